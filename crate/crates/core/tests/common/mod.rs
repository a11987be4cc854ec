//! Shared oracles for the integration suites: an independent modified-Bessel
//! evaluation for extension mode profiles, a brute-force DFT, and seeded
//! band-limited random fields. Everything here is deliberately written
//! against textbook formulas rather than the library internals.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use confrac::special;
use confrac::spectral::GridFunction;

/// Modified Bessel function of the second kind by Simpson quadrature of
/// K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    assert!(z > 0.0, "quadrature needs z > 0");
    // truncate where exp(-z cosh t) underflows; the extra margin keeps the
    // cosh(nu t) growth harmless for the orders used here (nu < 3)
    let t_max = (745.0 / z).max(2.0).acosh() + 1.0;
    let steps = 8000usize;
    let h = t_max / steps as f64;
    let f = |t: f64| (-z * t.cosh()).exp() * (nu * t).cosh();
    let mut acc = f(0.0) + f(t_max);
    for j in 1..steps {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(j as f64 * h);
    }
    acc * h / 3.0
}

/// Decaying solution of U'' + (a/y) U' = k^2 U with U(0) = 1, a = 1 - 2 gamma,
/// gamma in (0, 1):
///   U(y) = 2^{1 - gamma} / Gamma(gamma) * (k y)^gamma K_gamma(k y).
pub fn mode_oracle(gamma: f64, kmag: f64, y: f64) -> f64 {
    let z = kmag * y;
    2f64.powf(1.0 - gamma) / special::gamma(gamma) * z.powf(gamma) * bessel_k(gamma, z)
}

/// O(N^2) reference DFT with the same 1/N normalization as the library.
pub fn brute_force_dft(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &v) in values.iter().enumerate() {
                let phase = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                acc += v * Complex64::new(phase.cos(), phase.sin());
            }
            acc / n as f64
        })
        .collect()
}

/// Seeded real field with spectrum supported on 1 <= |k| <= band, well inside
/// the Nyquist limit so multiplier routes agree to round-off.
pub fn band_limited_field(seed: u64, n: usize, period: f64, band: usize) -> GridFunction {
    assert!(band < n / 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..band)
        .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GridFunction::sample_1d(n, period, |x| {
        let mut v = 0.0;
        for (i, &(a, b)) in coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            let arg = 2.0 * std::f64::consts::PI * k * x / period;
            v += a * arg.cos() + b * arg.sin();
        }
        v
    })
    .unwrap()
}
