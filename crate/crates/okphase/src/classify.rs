//! Pattern labeling from the angular distribution of spectral power at the
//! dominant wavelength.
//!
//! The diagnostic is
//!
//! ```text
//! g(theta_i) = sum_{k != 0} exp(-|k - (sin theta_i, cos theta_i) k*|^2 / eps) |vhat(k)|
//! ```
//!
//! sampled on a 720-point angle grid. Stripes put two peaks on the circle,
//! hexagonally packed spots six, Cartesian-packed spots four; anything else
//! is Mixed, and a spectrum with (numerically) no power outside the mean is
//! Disorder. Magnitudes `|vhat|` discard phases, so labels are invariant
//! under translation, and the angle grid is divisible by 4, so the square
//! lattice symmetries permute it exactly.

use crate::annealing;
use crate::spectral::{self, RealField, SpectralError, SpectralField};

/// Angle samples on the circle; divisible by 4 for exact D4 invariance.
pub const ANGULAR_SAMPLES: usize = 720;
/// A local maximum counts as a peak above this fraction of the global max.
pub const PEAK_FRACTION: f64 = 0.5;
/// Disorder gate: nonzero-mode spectral power below this times N^2.
pub const DISORDER_POWER_FACTOR: f64 = 1e-8;
/// Width of the matching Gaussian: eps = (RING_WIDTH_FACTOR * k*)^2.
pub const RING_WIDTH_FACTOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseLabel {
    Disorder,
    Lamellae,
    HexSpots,
    SquareSpots,
    Mixed,
}

impl std::fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            PhaseLabel::Disorder => "Disorder",
            PhaseLabel::Lamellae => "Lamellae",
            PhaseLabel::HexSpots => "HexSpots",
            PhaseLabel::SquareSpots => "SquareSpots",
            PhaseLabel::Mixed => "Mixed",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for PhaseLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "Disorder" => Ok(PhaseLabel::Disorder),
            "Lamellae" => Ok(PhaseLabel::Lamellae),
            "HexSpots" => Ok(PhaseLabel::HexSpots),
            "SquareSpots" => Ok(PhaseLabel::SquareSpots),
            "Mixed" => Ok(PhaseLabel::Mixed),
            other => Err(format!("unknown phase label '{other}'")),
        }
    }
}

/// Label plus the evidence it was derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub label: PhaseLabel,
    pub peaks: usize,
    pub k_star: Option<f64>,
}

/// The angular diagnostic on the `ANGULAR_SAMPLES`-point grid
/// `theta_i = 2 pi i / M`. Modes radially farther than the Gaussian's
/// numerical support from the `k*` circle are skipped; the cut is radial,
/// so the skip respects every angular symmetry exactly.
pub fn angular_spectrum(v: &SpectralField, k_star: f64, eps: f64) -> Vec<f64> {
    assert!(k_star > 0.0 && eps > 0.0);
    let n = v.grid.n();
    let tau = 2.0 * std::f64::consts::PI / v.grid.length();
    let m = ANGULAR_SAMPLES;
    let (sin_t, cos_t): (Vec<f64>, Vec<f64>) = (0..m)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            (th.sin(), th.cos())
        })
        .unzip();
    let mut g = vec![0.0; m];
    let support = 45.0 * eps;
    // The -n/2 row and column have no positive-frequency partner, so they
    // would break the exact g(theta) = g(theta + pi) symmetry of a real
    // field's spectrum; leave those aliased representatives out.
    let nyquist = (n / 2) as i64;
    for i in 0..n {
        let fi = v.grid.int_freq(i);
        if fi == -nyquist {
            continue;
        }
        let kx = tau * fi as f64;
        for j in 0..n {
            if (i == 0 && j == 0) || v.grid.int_freq(j) == -nyquist {
                continue;
            }
            let amp = v.coeffs[i * n + j].norm();
            if amp == 0.0 {
                continue;
            }
            let ky = tau * v.grid.int_freq(j) as f64;
            let k2 = kx * kx + ky * ky;
            let radial = k2.sqrt() - k_star;
            if radial * radial > support {
                continue;
            }
            let base = k2 + k_star * k_star;
            for t in 0..m {
                let d2 = base - 2.0 * k_star * (kx * sin_t[t] + ky * cos_t[t]);
                g[t] += (-d2 / eps).exp() * amp;
            }
        }
    }
    g
}

/// Local maxima of the periodic sequence exceeding `fraction * max(g)`;
/// a plateau (run of equal values) counts once, and a constant sequence
/// has no peaks.
pub fn count_peaks(g: &[f64], fraction: f64) -> usize {
    assert!(fraction > 0.0 && fraction < 1.0);
    let n = g.len();
    if n == 0 {
        return 0;
    }
    let max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = fraction * max;
    // Runs of equal values in circular order; a run is a peak iff both
    // neighboring runs are strictly lower.
    let mut starts: Vec<usize> = (0..n).filter(|&i| g[i] != g[(i + n - 1) % n]).collect();
    if starts.is_empty() {
        return 0; // constant sequence
    }
    let runs = starts.len();
    starts.sort_unstable();
    let mut peaks = 0;
    for r in 0..runs {
        let start = starts[r];
        let value = g[start];
        if value <= threshold {
            continue;
        }
        let prev_value = g[(start + n - 1) % n];
        let next_start = starts[(r + 1) % runs];
        let next_value = g[next_start];
        if value > prev_value && value > next_value {
            peaks += 1;
        }
    }
    peaks
}

/// Labels a field: Disorder when the nonzero-mode power is numerically
/// zero, otherwise by the peak count of the angular diagnostic at the
/// dominant wavenumber.
pub fn classify(field: &RealField) -> Result<Classification, SpectralError> {
    let v = spectral::forward(field)?;
    let nn = (field.grid.n() * field.grid.n()) as f64;
    if v.power_excluding_zero() < DISORDER_POWER_FACTOR * nn {
        return Ok(Classification {
            label: PhaseLabel::Disorder,
            peaks: 0,
            k_star: None,
        });
    }
    let k_star = annealing::dominant_mode(&v)
        .expect("power above the disorder gate implies a nonzero mode");
    let eps = (RING_WIDTH_FACTOR * k_star) * (RING_WIDTH_FACTOR * k_star);
    let g = angular_spectrum(&v, k_star, eps);
    let peaks = count_peaks(&g, PEAK_FRACTION);
    let label = match peaks {
        2 => PhaseLabel::Lamellae,
        6 => PhaseLabel::HexSpots,
        4 => PhaseLabel::SquareSpots,
        _ => PhaseLabel::Mixed,
    };
    Ok(Classification {
        label,
        peaks,
        k_star: Some(k_star),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{ansatz_field, AmplitudeState};
    use crate::spectral::GridSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, SQRT_2};

    fn hex_grid() -> GridSpec {
        GridSpec::new(64, 8.0 * SQRT_2 * PI).unwrap()
    }

    #[test]
    fn count_peaks_handles_plateaus_and_wraparound() {
        assert_eq!(count_peaks(&[1.0; 16], 0.5), 0);
        let mut two = vec![0.0; 16];
        two[3] = 1.0;
        two[11] = 0.9;
        assert_eq!(count_peaks(&two, 0.5), 2);
        assert_eq!(count_peaks(&two, 0.95), 1);
        // Plateau counts once.
        let plateau = [0.0, 0.0, 5.0, 5.0, 5.0, 0.0, 0.0, 1.0];
        assert_eq!(count_peaks(&plateau, 0.5), 1);
        // Peak spanning the wrap point.
        let wrapped = [5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 5.0];
        assert_eq!(count_peaks(&wrapped, 0.5), 1);
        // Shoulders below threshold are ignored.
        let shouldered = [0.0, 2.0, 0.0, 0.0, 10.0, 0.0, 0.0, 2.0];
        assert_eq!(count_peaks(&shouldered, 0.5), 1);
    }

    #[test]
    fn lamellar_ansatz_is_two_peaks_at_sqrt2() {
        let s = AmplitudeState::new(SQRT_2, 0.0, 0.0, 0.0);
        let f = ansatz_field(&s, 3.0, hex_grid()).unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.label, PhaseLabel::Lamellae);
        assert_eq!(c.peaks, 2);
        assert!((c.k_star.unwrap() - SQRT_2).abs() < 1e-12);

        // The two peaks sit half a circle apart.
        let v = spectral::forward(&f).unwrap();
        let g = angular_spectrum(&v, SQRT_2, (0.2 * SQRT_2) * (0.2 * SQRT_2));
        let imax = (0..g.len())
            .max_by(|&a, &b| g[a].partial_cmp(&g[b]).unwrap())
            .unwrap();
        let opposite = (imax + g.len() / 2) % g.len();
        assert!((g[imax] - g[opposite]).abs() < 1e-9 * g[imax]);
    }

    #[test]
    fn hex_ansatz_is_six_nearly_equal_peaks() {
        let r = -SQRT_2 / 2.0;
        let s = AmplitudeState::new(r, r, r, 0.5);
        let f = ansatz_field(&s, 3.0, hex_grid()).unwrap();
        let c = classify(&f).unwrap();
        assert_eq!(c.label, PhaseLabel::HexSpots);
        assert_eq!(c.peaks, 6);

        let v = spectral::forward(&f).unwrap();
        let k = c.k_star.unwrap();
        let g = angular_spectrum(&v, k, (0.2 * k) * (0.2 * k));
        let max = g.iter().cloned().fold(0.0f64, f64::max);
        // Collect the six local-max heights and compare them.
        let n = g.len();
        let mut heights: Vec<f64> = (0..n)
            .filter(|&i| {
                g[i] > 0.5 * max && g[i] > g[(i + n - 1) % n] && g[i] >= g[(i + 1) % n]
            })
            .map(|i| g[i])
            .collect();
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(heights.len(), 6, "heights {heights:?}");
        assert!(
            heights[5] / heights[0] < 1.01,
            "peak spread {:?}",
            (heights[0], heights[5])
        );
    }

    #[test]
    fn square_and_many_direction_fields_label_correctly() {
        let g = hex_grid();
        let square = RealField::from_fn(g, |x, y| {
            0.5 * (SQRT_2 * x).cos() + 0.5 * (SQRT_2 * y).cos()
        });
        let c = classify(&square).unwrap();
        assert_eq!(c.label, PhaseLabel::SquareSpots);
        assert_eq!(c.peaks, 4);

        // Five directions of similar radius spread ~36 degrees apart (with
        // their antipodes, ten nearly uniform ring spots): ten peaks.
        let g2 = GridSpec::new(64, 2.0 * PI).unwrap();
        let dirs: [(f64, f64, f64); 5] = [
            (10.0, 0.0, 1.1),
            (8.0, 6.0, 1.0),
            (3.0, 10.0, 1.0),
            (-3.0, 10.0, 1.0),
            (-8.0, 6.0, 1.0),
        ];
        let f = RealField::from_fn(g2, |x, y| {
            dirs.iter()
                .map(|&(kx, ky, a)| a * (kx * x + ky * y).cos())
                .sum()
        });
        let c = classify(&f).unwrap();
        assert_eq!(c.label, PhaseLabel::Mixed, "peaks {}", c.peaks);
        assert_eq!(c.peaks, 10);
    }

    #[test]
    fn angular_spectrum_has_half_turn_symmetry() {
        let g = GridSpec::new(32, 9.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut f = RealField {
            grid: g,
            values: (0..32 * 32).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        };
        f.remove_mean();
        let v = spectral::forward(&f).unwrap();
        let k = annealing::dominant_mode(&v).unwrap();
        let gg = angular_spectrum(&v, k, (0.2 * k) * (0.2 * k));
        let m = gg.len();
        let scale = gg.iter().cloned().fold(0.0f64, f64::max);
        for i in 0..m / 2 {
            assert!(
                (gg[i] - gg[i + m / 2]).abs() < 1e-10 * scale,
                "g({i}) asymmetric"
            );
        }
    }

    #[test]
    fn labels_are_exactly_invariant_under_shifts_and_square_symmetries() {
        let r = -SQRT_2 / 2.0;
        let cases: Vec<RealField> = vec![
            ansatz_field(&AmplitudeState::new(SQRT_2, 0.0, 0.0, 0.0), 3.0, hex_grid()).unwrap(),
            ansatz_field(&AmplitudeState::new(r, r, r, 0.5), 3.0, hex_grid()).unwrap(),
            RealField::from_fn(hex_grid(), |x, y| {
                0.4 * (SQRT_2 * x).cos() + 0.4 * (SQRT_2 * y).cos()
            }),
        ];
        for (idx, base) in cases.iter().enumerate() {
            let reference = classify(base).unwrap();
            let variants = [
                base.cyclic_shift(3, 7),
                base.cyclic_shift(17, 0),
                base.transposed(),
                base.flipped(),
                base.transposed().flipped(),
                base.cyclic_shift(5, 5).transposed(),
            ];
            for (vi, var) in variants.iter().enumerate() {
                let c = classify(var).unwrap();
                assert_eq!(c.label, reference.label, "case {idx} variant {vi}");
                assert_eq!(c.peaks, reference.peaks, "case {idx} variant {vi}");
            }
        }
    }

    #[test]
    fn flat_and_near_flat_fields_are_disorder() {
        let g = GridSpec::new(32, 5.0).unwrap();
        let zero = RealField::constant(g, 0.0);
        let c = classify(&zero).unwrap();
        assert_eq!(c.label, PhaseLabel::Disorder);
        assert_eq!(c.peaks, 0);
        assert!(c.k_star.is_none());

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut tiny = RealField {
            grid: g,
            values: (0..32 * 32).map(|_| rng.gen_range(-1e-6..1e-6)).collect(),
        };
        tiny.remove_mean();
        assert_eq!(classify(&tiny).unwrap().label, PhaseLabel::Disorder);

        // A constant offset alone (pure mean) is still disorder.
        let flat = RealField::constant(g, 0.4);
        assert_eq!(classify(&flat).unwrap().label, PhaseLabel::Disorder);
    }
}
