//! Periodic grids and FFT-backed spectral transforms.
//!
//! Conventions, fixed here and relied on everywhere else:
//!
//! - Square box `[0, L]^2`, `N x N` samples at `x_ij = (i L/N, j L/N)`,
//!   row-major storage `values[i*N + j]`.
//! - Integer wavevectors `k` lie in `[-N/2, N/2)^2`; the physical wavevector
//!   is `(2 pi / L) k`. Coefficient storage follows FFT index order.
//! - The forward transform carries the `1/N^2` normalization, so the zero
//!   mode of `forward(f)` equals `mean(f)` and the inverse is an
//!   unnormalized sum.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Imaginary residue above this (relative to `max(1, |Re|_inf)`) after an
/// inverse transform signals an asymmetric, corrupted spectrum.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Zero modes smaller than this count as zero when a singular multiplier
/// (inverse Laplacian) is applied.
pub const ZERO_MODE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("grids differ: {0}x{0} (L={1}) vs {2}x{2} (L={3})")]
    GridMismatch(usize, f64, usize, f64),
    #[error("spectrum not conjugate-symmetric: imaginary residue {residue:.3e} after inverse")]
    CorruptSpectrum { residue: f64 },
    #[error("singular multiplier with nonzero zero mode |v0| = {zero_mode:.3e}")]
    SingularMultiplier { zero_mode: f64 },
}

/// Square periodic grid: `n` samples per dimension on `[0, length]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    length: f64,
}

impl GridSpec {
    /// `n` must be even and at least 8 (powers of two transform fastest);
    /// `length` must be positive and finite.
    pub fn new(n: usize, length: f64) -> Result<Self, SpectralError> {
        if n < 8 || n % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!(
                "n = {n} (need even n >= 8)"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!("length = {length}")));
        }
        Ok(GridSpec { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Same samples, new box length: wavenumbers rescale, values do not.
    pub fn with_length(&self, length: f64) -> Result<Self, SpectralError> {
        GridSpec::new(self.n, length)
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing() * self.spacing()
    }

    pub fn area(&self) -> f64 {
        self.length * self.length
    }

    /// Integer frequency for FFT index `p`: `p` below `n/2`, else `p - n`.
    pub fn int_freq(&self, p: usize) -> i64 {
        if p < self.n / 2 {
            p as i64
        } else {
            p as i64 - self.n as i64
        }
    }

    /// Physical wavenumber component for FFT index `p`.
    pub fn wavenumber(&self, p: usize) -> f64 {
        2.0 * std::f64::consts::PI / self.length * self.int_freq(p) as f64
    }

    /// `|k|^2` for every mode, same layout as coefficient storage.
    pub fn k_squared(&self) -> Vec<f64> {
        let n = self.n;
        let axis: Vec<f64> = (0..n).map(|p| self.wavenumber(p)).collect();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            let kx2 = axis[i] * axis[i];
            for j in 0..n {
                out[i * n + j] = kx2 + axis[j] * axis[j];
            }
        }
        out
    }
}

/// Real-valued samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.n() * grid.n()],
        }
    }

    /// Sample `f(x, y)` at the grid points.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let h = grid.spacing();
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i as f64 * h, j as f64 * h));
            }
        }
        RealField { grid, values }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Subtract the sample mean in place.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        for v in &mut self.values {
            *v -= m;
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &v| a.max(v.abs()))
    }

    /// Continuous L^2 norm: `sqrt(int f^2 dx)` by the rectangle rule, which
    /// is exact for band-limited fields.
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_area()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Cyclic translation by whole cells; the torus makes this exact.
    pub fn cyclic_shift(&self, di: usize, dj: usize) -> RealField {
        let n = self.grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[((i + di) % n) * n + (j + dj) % n] = self.values[i * n + j];
            }
        }
        RealField {
            grid: self.grid,
            values,
        }
    }

    /// Swap axes (reflection across the diagonal).
    pub fn transposed(&self) -> RealField {
        let n = self.grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[j * n + i] = self.values[i * n + j];
            }
        }
        RealField {
            grid: self.grid,
            values,
        }
    }

    /// Reflect the first axis (`x -> -x` on the torus).
    pub fn flipped(&self) -> RealField {
        let n = self.grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            let ri = (n - i) % n;
            for j in 0..n {
                values[ri * n + j] = self.values[i * n + j];
            }
        }
        RealField {
            grid: self.grid,
            values,
        }
    }
}

/// Fourier coefficients on a [`GridSpec`], FFT index order.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        SpectralField {
            grid,
            coeffs: vec![Complex64::default(); grid.n() * grid.n()],
        }
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Pin the zero mode to exactly zero (mean-zero enforcement).
    pub fn pin_zero_mode(&mut self) {
        self.coeffs[0] = Complex64::default();
    }

    /// Total spectral power excluding the zero mode; by Parseval this is the
    /// mean-square fluctuation about the mean.
    pub fn power_excluding_zero(&self) -> f64 {
        self.coeffs.iter().skip(1).map(|c| c.norm_sqr()).sum()
    }

    /// Zero every mode with an integer frequency at or beyond `n/3` in
    /// either axis (the 2/3 dealiasing rule). Off by default everywhere.
    pub fn apply_two_thirds_mask(&mut self) {
        let n = self.grid.n();
        let cut = (n as i64) / 3;
        for i in 0..n {
            let ki = self.grid.int_freq(i).abs();
            for j in 0..n {
                let kj = self.grid.int_freq(j).abs();
                if ki >= cut || kj >= cut {
                    self.coeffs[i * n + j] = Complex64::default();
                }
            }
        }
    }
}

/// Planned 2D FFT pair for one grid size, with owned scratch.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    transpose_buf: Vec<Complex64>,
}

impl Fft2 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let scratch_len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Fft2 {
            n,
            fwd,
            inv,
            scratch: vec![Complex64::default(); scratch_len],
            transpose_buf: vec![Complex64::default(); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn pass(&mut self, data: &mut [Complex64], forward: bool) {
        debug_assert_eq!(data.len(), self.n * self.n);
        let plan = if forward { &self.fwd } else { &self.inv };
        // Rows are contiguous: one batched call per axis, transpose between.
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.transpose_buf, self.n);
        data.copy_from_slice(&self.transpose_buf);
        plan.process_with_scratch(data, &mut self.scratch);
        transpose(data, &mut self.transpose_buf, self.n);
        data.copy_from_slice(&self.transpose_buf);
    }

    /// Unnormalized forward DFT, in place.
    pub fn fwd_raw(&mut self, data: &mut [Complex64]) {
        self.pass(data, true);
    }

    /// Unnormalized inverse DFT, in place.
    pub fn inv_raw(&mut self, data: &mut [Complex64]) {
        self.pass(data, false);
    }

    /// Forward transform with the `1/N^2` normalization.
    pub fn forward(&mut self, f: &RealField) -> Result<SpectralField, SpectralError> {
        if f.grid.n() != self.n {
            return Err(SpectralError::GridMismatch(
                f.grid.n(),
                f.grid.length(),
                self.n,
                f.grid.length(),
            ));
        }
        if !f.is_finite() {
            return Err(SpectralError::NonFinite);
        }
        let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd_raw(&mut data);
        let scale = 1.0 / (self.n * self.n) as f64;
        for c in &mut data {
            *c *= scale;
        }
        Ok(SpectralField {
            grid: f.grid,
            coeffs: data,
        })
    }

    /// Inverse transform; discards imaginary residue below
    /// [`IMAG_RESIDUE_TOL`] and errors above it.
    pub fn inverse(&mut self, v: &SpectralField) -> Result<RealField, SpectralError> {
        if v.grid.n() != self.n {
            return Err(SpectralError::GridMismatch(
                v.grid.n(),
                v.grid.length(),
                self.n,
                v.grid.length(),
            ));
        }
        let mut data = v.coeffs.clone();
        self.inv_raw(&mut data);
        let mut re_max = 0.0f64;
        let mut im_max = 0.0f64;
        for c in &data {
            re_max = re_max.max(c.re.abs());
            im_max = im_max.max(c.im.abs());
        }
        if !(re_max.is_finite() && im_max.is_finite()) {
            return Err(SpectralError::NonFinite);
        }
        if im_max > IMAG_RESIDUE_TOL * re_max.max(1.0) {
            return Err(SpectralError::CorruptSpectrum { residue: im_max });
        }
        Ok(RealField {
            grid: v.grid,
            values: data.iter().map(|c| c.re).collect(),
        })
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in 0..n {
            dst[j * n + i] = src[i * n + j];
        }
    }
}

thread_local! {
    static FFT_CACHE: RefCell<HashMap<usize, Fft2>> = RefCell::new(HashMap::new());
}

fn with_fft<T>(n: usize, f: impl FnOnce(&mut Fft2) -> T) -> T {
    FFT_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        let fft = cache.entry(n).or_insert_with(|| Fft2::new(n));
        f(fft)
    })
}

/// Forward transform via a thread-local plan cache. Hot loops should own an
/// [`Fft2`] instead.
pub fn forward(f: &RealField) -> Result<SpectralField, SpectralError> {
    with_fft(f.grid.n(), |fft| fft.forward(f))
}

/// Inverse transform via the thread-local plan cache.
pub fn inverse(v: &SpectralField) -> Result<RealField, SpectralError> {
    with_fft(v.grid.n(), |fft| fft.inverse(v))
}

/// Multiply each coefficient by `s(|k|^2)`. A multiplier that is non-finite
/// at `k = 0` (inverse-Laplacian type) requires a vanishing zero mode, which
/// is then pinned to exactly zero.
pub fn apply_multiplier(
    v: &SpectralField,
    s: impl Fn(f64) -> f64,
) -> Result<SpectralField, SpectralError> {
    let s0 = s(0.0);
    if !s0.is_finite() {
        let z = v.zero_mode().norm();
        if z > ZERO_MODE_TOL {
            return Err(SpectralError::SingularMultiplier { zero_mode: z });
        }
    }
    let k2 = v.grid.k_squared();
    let mut out = v.clone();
    for (c, &q) in out.coeffs.iter_mut().zip(&k2) {
        *c *= s(q);
    }
    if !s0.is_finite() {
        out.pin_zero_mode();
    }
    Ok(out)
}
