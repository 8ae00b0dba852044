//! Natural continuation of stationary states in the mass parameter.
//!
//! At each mass value a modified Newton method drives `||rhs||_2` below
//! 1e-8. The Newton systems are solved matrix-free: restarted GMRES sees
//! the Jacobian only through [`crate::dynamics::jacobian_apply`],
//! preconditioned by the inverse constant-coefficient symbol
//! `1 / (|k|^4/gamma^2 + |k|^2 + 1)`, with a mean-zero projection after
//! every operator application so the mass constraint never leaks into the
//! Krylov space. Newton failure (a fold, or exhausted backtracking) ends
//! the branch with `truncated = true` rather than an error.

use crate::dynamics::{self, DynamicsError};
use crate::energy::{self, EnergyBreakdown, EnergyError};
use crate::spectral::{self, RealField, SpectralError};
use thiserror::Error;

/// Stationarity target for every accepted branch point.
pub const NEWTON_TOL: f64 = 1e-8;
/// The starting state must already be near-stationary.
pub const START_RESIDUAL_TOL: f64 = 1e-4;
const MAX_NEWTON_ITERS: usize = 25;
const GMRES_RESTART: usize = 30;
const MAX_GMRES_CYCLES: usize = 4;
const GMRES_REL_TOL: f64 = 1e-4;
const BACKTRACK_STEPS: usize = 6;

#[derive(Debug, Error)]
pub enum ContinuationError {
    #[error("starting state is not near-stationary: residual {0:.3e} exceeds 1e-4")]
    BadStart(f64),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

impl From<DynamicsError> for ContinuationError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Spectral(s) => ContinuationError::Spectral(s),
            DynamicsError::Energy(s) => ContinuationError::Energy(s),
            // Continuation never steps in time; other variants cannot occur.
            other => panic!("unexpected dynamics error in continuation: {other}"),
        }
    }
}

/// One converged stationary state along the branch.
#[derive(Debug, Clone)]
pub struct ContinuationPoint {
    pub m: f64,
    /// Mean-zero fluctuation of the stationary state.
    pub field: RealField,
    pub energy: EnergyBreakdown,
    pub residual: f64,
    pub newton_iters: usize,
}

#[derive(Debug, Clone)]
pub struct ContinuationBranch {
    pub points: Vec<ContinuationPoint>,
    /// True when Newton failed before `n_steps` points were accepted.
    pub truncated: bool,
}

/// Polishes `u0` at `m0`, then marches `n_steps` increments of `dm`,
/// Newton-converging each point from its predecessor.
pub fn continue_in_m(
    u0: &RealField,
    gamma: f64,
    m0: f64,
    dm: f64,
    n_steps: usize,
) -> Result<ContinuationBranch, ContinuationError> {
    let mut v = u0.clone();
    v.remove_mean();
    let r0 = dynamics::rhs(&v, gamma, m0)?.l2_norm();
    if r0 > START_RESIDUAL_TOL {
        return Err(ContinuationError::BadStart(r0));
    }

    let mut points = Vec::with_capacity(n_steps + 1);
    let mut truncated = false;
    for step in 0..=n_steps {
        let m = m0 + step as f64 * dm;
        match newton_polish(&mut v, gamma, m) {
            Ok((residual, newton_iters)) => {
                let u = RealField {
                    grid: v.grid,
                    values: v.values.iter().map(|x| x + m).collect(),
                };
                let energy = energy::total_energy(&u, gamma, m)?;
                points.push(ContinuationPoint {
                    m,
                    field: v.clone(),
                    energy,
                    residual,
                    newton_iters,
                });
            }
            Err(NewtonFailure::Numerical(e)) => return Err(e),
            Err(NewtonFailure::Stalled) => {
                truncated = true;
                break;
            }
        }
    }
    Ok(ContinuationBranch { points, truncated })
}

enum NewtonFailure {
    Stalled,
    Numerical(ContinuationError),
}

impl From<ContinuationError> for NewtonFailure {
    fn from(e: ContinuationError) -> Self {
        NewtonFailure::Numerical(e)
    }
}

impl From<SpectralError> for NewtonFailure {
    fn from(e: SpectralError) -> Self {
        NewtonFailure::Numerical(e.into())
    }
}

impl From<DynamicsError> for NewtonFailure {
    fn from(e: DynamicsError) -> Self {
        NewtonFailure::Numerical(e.into())
    }
}

/// Newton iteration with backtracking line search on `||rhs||_2`.
fn newton_polish(v: &mut RealField, gamma: f64, m: f64) -> Result<(f64, usize), NewtonFailure> {
    let g2 = gamma * gamma;
    let precond = move |f: &RealField| -> Result<RealField, SpectralError> {
        let mut hat = spectral::forward(f)?;
        hat.pin_zero_mode();
        let scaled = spectral::apply_multiplier(&hat, |k2| 1.0 / (k2 * k2 / g2 + k2 + 1.0))?;
        spectral::inverse(&scaled)
    };

    for iter in 0..MAX_NEWTON_ITERS {
        let r = dynamics::rhs(v, gamma, m)?;
        let rn = r.l2_norm();
        if rn < NEWTON_TOL {
            return Ok((rn, iter));
        }

        // Right-hand side of the Newton system, preconditioned.
        let mut b_field = precond(&r)?;
        b_field.remove_mean();
        for x in b_field.values.iter_mut() {
            *x = -*x;
        }

        let grid = v.grid;
        let base = v.clone();
        let mut matvec = |x: &[f64]| -> Result<Vec<f64>, NewtonFailure> {
            let xf = RealField {
                grid,
                values: x.to_vec(),
            };
            let jx = dynamics::jacobian_apply(&base, &xf, gamma, m)?;
            let mut out = precond(&jx)?;
            out.remove_mean();
            Ok(out.values)
        };
        let delta = gmres(&mut matvec, &b_field.values)?;

        let mut accepted = false;
        let mut alpha = 1.0;
        for _ in 0..BACKTRACK_STEPS {
            let mut trial = v.clone();
            for (t, d) in trial.values.iter_mut().zip(&delta) {
                *t += alpha * d;
            }
            trial.remove_mean();
            if trial.is_finite() {
                let rn_trial = dynamics::rhs(&trial, gamma, m)?.l2_norm();
                if rn_trial < (1.0 - 1e-4 * alpha) * rn {
                    *v = trial;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(NewtonFailure::Stalled);
        }
    }
    Err(NewtonFailure::Stalled)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
/// Returns the best iterate once the relative residual drops below
/// `GMRES_REL_TOL` or the cycle budget is spent.
fn gmres<E, F: FnMut(&[f64]) -> Result<Vec<f64>, E>>(
    matvec: &mut F,
    b: &[f64],
) -> Result<Vec<f64>, E> {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let target = GMRES_REL_TOL * b_norm;

    for cycle in 0..MAX_GMRES_CYCLES {
        // Residual of the current iterate.
        let r = if cycle == 0 {
            b.to_vec()
        } else {
            let ax = matvec(&x)?;
            b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect()
        };
        let beta = norm(&r);
        if beta <= target {
            break;
        }

        let m = GMRES_RESTART;
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Upper-triangular factor of the Hessenberg matrix (rotations are
        // applied column by column, so the subdiagonal is never stored).
        let mut h = vec![vec![0.0; m]; m];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut cols = 0;

        for j in 0..m {
            let mut w = matvec(&basis[j])?;
            for (i, q) in basis.iter().enumerate() {
                h[i][j] = dot(&w, q);
                for (wk, qk) in w.iter_mut().zip(q) {
                    *wk -= h[i][j] * qk;
                }
            }
            let sub = norm(&w);

            // Accumulated rotations on the new column, then a fresh one to
            // zero its subdiagonal entry.
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = (h[j][j] * h[j][j] + sub * sub).sqrt();
            if denom == 0.0 {
                cols = j;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = sub / denom;
            h[j][j] = denom;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;

            if g[j + 1].abs() <= target || sub == 0.0 {
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|v| v / sub).collect());
            }
        }

        // Back-substitute the triangularized least-squares system.
        let mut y = vec![0.0; cols];
        for i in (0..cols).rev() {
            let mut s = g[i];
            for k in i + 1..cols {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for (xi, qi) in x.iter_mut().zip(&basis[j]) {
                *xi += yj * qi;
            }
        }
        if g[cols].abs() <= target {
            break;
        }
    }
    Ok(x)
}
