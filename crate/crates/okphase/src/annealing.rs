//! Annealing mechanisms: dominant-mode detection, spectral weighting that
//! favors the dominant wavenumber and its first three harmonics, and
//! mass-preserving noise injection.
//!
//! The weighting multiplies each coefficient by
//!
//! ```text
//! w(k; k*) = (1 - rho) + rho * sum_{h=1..3} exp(-5 (h - |k|/k*)^2)
//! ```
//!
//! so modes near the dominant ring (and its harmonics) keep their amplitude
//! while everything else is damped toward zero geometrically, one factor of
//! about `(1 - rho)` per application.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::{RealField, SpectralField};

/// Damping strength inside the insensitive range.
pub const DEFAULT_RHO: f64 = 0.1;
/// Gaussian sharpness of the harmonic rings.
pub const GAUSS_WIDTH: f64 = 5.0;
/// Number of harmonic rings kept by the weighting.
pub const HARMONICS: usize = 3;

/// `|k_phys|` of the largest-magnitude nonzero coefficient; ties break
/// toward smaller `|k|`. `None` when every nonzero-mode coefficient
/// vanishes (a disorder state with no scale).
pub fn dominant_mode(v: &SpectralField) -> Option<f64> {
    let n = v.grid.n();
    let tau = 2.0 * std::f64::consts::PI / v.grid.length();
    let mut best: Option<(f64, f64)> = None; // (norm_sqr, k2_int)
    for i in 0..n {
        let ki = v.grid.int_freq(i) as f64;
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            let kj = v.grid.int_freq(j) as f64;
            let p = v.coeffs[i * n + j].norm_sqr();
            if p == 0.0 {
                continue;
            }
            let k2 = ki * ki + kj * kj;
            let better = match best {
                None => true,
                Some((bp, bk2)) => p > bp || (p == bp && k2 < bk2),
            };
            if better {
                best = Some((p, k2));
            }
        }
    }
    best.map(|(_, k2)| tau * k2.sqrt())
}

/// The damping profile at wavenumber magnitude `kmag`.
pub fn weight(kmag: f64, k_star: f64, rho: f64) -> f64 {
    let r = kmag / k_star;
    let mut s = 0.0;
    for h in 1..=HARMONICS {
        let d = h as f64 - r;
        s += (-GAUSS_WIDTH * d * d).exp();
    }
    (1.0 - rho) + rho * s
}

/// Coefficient-wise damping; the zero mode is untouched so mass is
/// preserved exactly.
pub fn apply_weighting(v: &mut SpectralField, k_star: f64, rho: f64) {
    if rho == 0.0 {
        return;
    }
    let n = v.grid.n();
    let tau = 2.0 * std::f64::consts::PI / v.grid.length();
    for i in 0..n {
        let ki = v.grid.int_freq(i) as f64;
        for j in 0..n {
            if i == 0 && j == 0 {
                continue;
            }
            let kj = v.grid.int_freq(j) as f64;
            let kmag = tau * (ki * ki + kj * kj).sqrt();
            v.coeffs[i * n + j] *= weight(kmag, k_star, rho);
        }
    }
}

/// Adds i.i.d. uniform noise in `[-amplitude, amplitude]` with its
/// empirical mean removed, so the field mean is untouched. Deterministic
/// given `seed`.
pub fn inject_noise(f: &mut RealField, amplitude: f64, seed: u64) {
    if amplitude == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..f.values.len())
        .map(|_| rng.gen_range(-amplitude..amplitude))
        .collect();
    let mean = noise.iter().sum::<f64>() / noise.len() as f64;
    for (v, n) in f.values.iter_mut().zip(&noise) {
        *v += n - mean;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{self, GridSpec};
    use num_complex::Complex64;
    use std::f64::consts::{PI, SQRT_2};

    #[test]
    fn weight_on_ring_and_at_origin() {
        let w_ring = weight(1.0, 1.0, 0.1);
        assert!((w_ring - 1.000674).abs() < 1e-6, "ring weight {w_ring}");
        let w_zero = weight(0.0, 1.0, 0.1);
        assert!((w_zero - 0.900674).abs() < 1e-6, "origin weight {w_zero}");
        // Second harmonic is also protected.
        assert!(weight(2.0, 1.0, 0.1) > 1.0 - 1e-6);
    }

    #[test]
    fn weight_is_identity_at_zero_rho() {
        for kmag in [0.0, 0.3, 1.0, 2.7, 10.0] {
            assert_eq!(weight(kmag, 1.4, 0.0), 1.0);
        }
    }

    #[test]
    fn off_harmonic_modes_decay_geometrically() {
        let g = GridSpec::new(32, 2.0 * PI).unwrap();
        let mut v = SpectralField::zeros(g);
        // |k| = 8 with k* = 0.5: 16 ring-widths away from every harmonic,
        // so the Gaussian sum underflows to exactly zero.
        v.coeffs[8 * 32] = Complex64::new(1.0, 0.0);
        v.coeffs[24 * 32] = Complex64::new(1.0, 0.0);
        for _ in 0..3 {
            apply_weighting(&mut v, 0.5, 0.1);
        }
        let got = v.coeffs[8 * 32].re;
        assert!((got - 0.9f64.powi(3)).abs() < 1e-12, "decayed to {got}");
    }

    #[test]
    fn weighting_leaves_zero_mode_untouched() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let mut v = SpectralField::zeros(g);
        v.coeffs[0] = Complex64::new(0.25, 0.0);
        v.coeffs[1] = Complex64::new(1.0, 0.0);
        apply_weighting(&mut v, 1.0, 0.3);
        assert_eq!(v.coeffs[0], Complex64::new(0.25, 0.0));
        assert!((v.coeffs[1].re - weight(1.0, 1.0, 0.3)).abs() < 1e-15);
    }

    #[test]
    fn dominant_mode_finds_the_ansatz_wavenumber() {
        let g = GridSpec::new(32, 4.0 * SQRT_2 * PI).unwrap();
        let f = RealField::from_fn(g, |x, _| SQRT_2 * (SQRT_2 * x).cos());
        let v = spectral::forward(&f).unwrap();
        let k = dominant_mode(&v).unwrap();
        assert!((k - SQRT_2).abs() < 1e-12, "k* = {k}");

        // A 10% admixture of another mode does not steal dominance.
        let f = RealField::from_fn(g, |x, y| {
            0.9 * SQRT_2 * (SQRT_2 * x).cos() + 0.1 * (SQRT_2 * 2.0 * y).cos()
        });
        let v = spectral::forward(&f).unwrap();
        assert!((dominant_mode(&v).unwrap() - SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn dominant_mode_tie_breaks_to_smaller_wavenumber() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let mut v = SpectralField::zeros(g);
        for idx in [1, 15, 3, 13] {
            v.coeffs[idx * 16] = Complex64::new(0.5, 0.0);
        }
        assert!((dominant_mode(&v).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dominant_mode_of_empty_spectrum_is_none() {
        let g = GridSpec::new(16, 2.0 * PI).unwrap();
        let mut v = SpectralField::zeros(g);
        assert!(dominant_mode(&v).is_none());
        // A pure-mean field has no dominant mode either.
        v.coeffs[0] = Complex64::new(3.0, 0.0);
        assert!(dominant_mode(&v).is_none());
    }

    #[test]
    fn noise_is_deterministic_mass_preserving_and_bounded() {
        let g = GridSpec::new(16, 5.0).unwrap();
        let base = RealField::from_fn(g, |x, y| 0.3 * (x - y).sin());
        let mean0 = base.mean();

        let mut a = base.clone();
        let mut b = base.clone();
        inject_noise(&mut a, 0.05, 99);
        inject_noise(&mut b, 0.05, 99);
        assert_eq!(a.values, b.values, "same seed must be bitwise identical");

        let mut c = base.clone();
        inject_noise(&mut c, 0.05, 100);
        assert_ne!(a.values, c.values, "different seed should differ");

        assert!((a.mean() - mean0).abs() < 1e-14);
        let max_shift = a
            .values
            .iter()
            .zip(&base.values)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0f64, f64::max);
        assert!(max_shift <= 0.1 + 1e-12, "shift {max_shift} exceeds 2*amp");
        assert!(max_shift > 0.0);
    }

    #[test]
    fn zero_amplitude_noise_is_identity() {
        let g = GridSpec::new(16, 5.0).unwrap();
        let base = RealField::from_fn(g, |x, y| (x + 2.0 * y).cos());
        let mut a = base.clone();
        inject_noise(&mut a, 0.0, 7);
        assert_eq!(a.values, base.values);
    }
}
