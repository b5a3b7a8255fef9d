use crate::fields::Point;

/// Outcome of the smoothness monitor on ∇²S.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CausticReport {
    pub triggered: bool,
    pub time: f64,
    /// Grid point where |∇²S| is largest.
    pub location: Point,
    /// max |∇²S|.
    pub value: f64,
}

impl CausticReport {
    /// The `# caustic ...` log line.
    pub fn log_line(&self) -> String {
        format!(
            "caustic t={} x={} value={:e}",
            self.time,
            if self.location[1] == 0.0 {
                format!("{}", self.location[0])
            } else {
                format!("{};{}", self.location[0], self.location[1])
            },
            self.value
        )
    }
}
