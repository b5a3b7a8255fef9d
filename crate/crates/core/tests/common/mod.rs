//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

/// Free Gaussian packet ψ(x, t) = ψ₀ with phase e^{ik₀x}, evaluated as a direct quadrature of its
/// Fourier integral (no FFT), for a packet with density standard
/// deviation `sigma`, centre `x0` and wavenumber `k0` at t = 0.
pub fn free_packet_fourier(x: f64, t: f64, x0: f64, k0: f64, sigma: f64, hbar: f64, m: f64) -> Complex64 {
    let half_range = 12.0 / sigma;
    let nk = 6001;
    let dk = 2.0 * half_range / (nk - 1) as f64;
    let amp = (2.0 * PI * sigma * sigma).powf(-0.25) * 2.0 * sigma * PI.sqrt();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nk {
        let k = k0 - half_range + j as f64 * dk;
        let q = k - k0;
        let w = if j == 0 || j == nk - 1 { 0.5 } else { 1.0 };
        let phase = k * x - hbar * k * k * t / (2.0 * m) - q * x0;
        acc += w * amp * (-sigma * sigma * q * q).exp() * Complex64::from_polar(1.0, phase);
    }
    acc * dk / (2.0 * PI)
}

/// Density standard deviation of a free Gaussian at time t.
pub fn free_width(l0: f64, t: f64, hbar: f64, m: f64) -> f64 {
    l0 * (1.0 + (hbar * t / (2.0 * m * l0 * l0)).powi(2)).sqrt()
}

/// Classical RK4 on ẍ = -ω²x (second-order system), returning x(t).
pub fn harmonic_ode(x0: f64, v0: f64, omega: f64, t: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let f = |s: [f64; 2]| [s[1], -omega * omega * s[0]];
    let mut s = [x0, v0];
    for _ in 0..steps {
        let k1 = f(s);
        let k2 = f([s[0] + 0.5 * h * k1[0], s[1] + 0.5 * h * k1[1]]);
        let k3 = f([s[0] + 0.5 * h * k2[0], s[1] + 0.5 * h * k2[1]]);
        let k4 = f([s[0] + h * k3[0], s[1] + h * k3[1]]);
        s[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        s[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    s[0]
}

/// Mean and standard deviation of a sampled 1D density by plain sums.
pub fn mean_std(xs: &[f64], rho: &[f64]) -> (f64, f64) {
    let z: f64 = rho.iter().sum();
    let mu = xs.iter().zip(rho).map(|(x, r)| x * r).sum::<f64>() / z;
    let var = xs.iter().zip(rho).map(|(x, r)| (x - mu).powi(2) * r).sum::<f64>() / z;
    (mu, var.sqrt())
}

/// (max - min)/(max + min) over the samples.
pub fn visibility(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    (max - min) / (max + min)
}

/// cos² bump of half-width `a` centred at `c`, exactly zero outside.
pub fn bump(x: f64, c: f64, a: f64) -> f64 {
    let u = (x - c) / a;
    if u.abs() < 1.0 {
        (0.5 * PI * u).cos().powi(2)
    } else {
        0.0
    }
}

/// Eigenvalues (descending) of the symmetric 2×2 matrix [[a, b], [b, c]].
pub fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c).powi(2) + b * b).sqrt();
    (mid + rad, mid - rad)
}
