//! Pseudo-spectral minimization of the 2D Ohta-Kawasaki energy on a periodic
//! box, plus the closed-form amplitude-equation asymptotics it is checked
//! against.
//!
//! The crate is organized bottom-up:
//!
//! - [`spectral`]: grids, FFT-backed transforms, Fourier multipliers.
//! - [`energy`]: the energy functional, its dissipated (Lyapunov) form, and
//!   domain-size selection.
//! - [`dynamics`]: the H^-1 gradient flow, ETDRK4 and gradient-stable
//!   steppers, and the linearized operator.
//! - [`continuation`]: matrix-free Newton-Krylov continuation in the mass.
//! - [`annealing`]: spectral weighting and seeded noise injection.
//! - [`asymptotics`]: the three-mode amplitude system, its fixed points,
//!   Lyapunov landscape, and stability thresholds.
//! - [`classify`]: angular-spectrum pattern classification.
//! - [`pipeline`]: the nine-step annealed run protocol and parameter sweeps.
//! - [`io`]: field dumps, PGM previews, checkpoints, CSV records.

pub mod annealing;
pub mod asymptotics;
pub mod classify;
pub mod continuation;
pub mod dynamics;
pub mod energy;
pub mod io;
pub mod pipeline;
pub mod spectral;

pub use num_complex::Complex64;
