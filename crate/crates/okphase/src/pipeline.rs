//! Annealed minimization protocol, domain refit, and phase-diagram sweeps.
//!
//! A single run takes `(gamma, m, seed)` through a schedule: seeded random
//! start, ETDRK4 burn-in, a spectral-weighting phase that nudges power toward
//! the dominant ring (ending as soon as the angular spectrum condenses onto a
//! single pattern system, capped at `t2`), one noise kick, gradient-stable
//! descent with an adaptive step, one box refit, and a long descent to
//! stationarity.  The
//! lowest-energy-density state seen anywhere along the way is what gets
//! classified and reported.  Sweeps scatter runs over a `(gamma, m)` window,
//! then bisect between neighboring runs that disagree on the label.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::annealing;
use crate::asymptotics;
use crate::classify::{self, PhaseLabel};
use crate::dynamics::{
    adapt_dt, default_dt, rhs, DynamicsError, Etdrk4, GradientStable, SolverState, StepperKind,
};
use crate::energy::{self, EnergyBreakdown, EnergyError};
use crate::io::{self, IoError};
use crate::spectral::{self, GridSpec, RealField, SpectralError};

/// Gradient-stable settling time after a box refit, in simulation time units.
pub const REFIT_SETTLE_TIME: f64 = 5.0;
/// Minimum length of the weighted phase before its early stop may fire.
pub const WEIGHT_MIN_SPAN: f64 = 40.0;
/// Time between angular-condensation checks inside the weighted phase.
const WEIGHT_CHECK_INTERVAL: f64 = 5.0;
/// Slack when comparing simulation times against phase boundaries.
const TIME_EPS: f64 = 1e-9;
/// Steps between residual checks in the pure-flow reference run.
const RESIDUAL_CHECK_STRIDE: usize = 25;
/// Pairs closer than `diameter / REFINE_RADIUS_DIV` are bisected when their labels differ.
const REFINE_RADIUS_DIV: f64 = 20.0;
/// Candidate midpoints within `refine_radius / DEDUPE_DIV` of an existing point are dropped.
const DEDUPE_DIV: f64 = 10.0;

/// CSV header for sweep output rows.
pub const SWEEP_CSV_HEADER: &str =
    "gamma,m,beta,label,E_paper,E_diss,L_opt,k_star,residual,seed,wall_s";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl PipelineError {
    /// Failures that mean "this trajectory blew up", as opposed to bad input.
    fn is_numerical(&self) -> bool {
        matches!(self, PipelineError::Dynamics(_) | PipelineError::Spectral(_))
    }
}

/// Phase boundaries and knobs for one protocol run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// End of the plain ETDRK4 burn-in.
    pub t1: f64,
    /// Latest end (cap) of the spectrally weighted ETDRK4 phase.  The phase
    /// stops earlier — at `t_w <= t2` — once the angular spectrum has stably
    /// condensed onto a single pattern system; see [`WEIGHT_MIN_SPAN`].
    pub t2: f64,
    /// Sets the length `t3 - t2` of the post-noise ETDRK4 phase (noise is
    /// injected once, when the weighted phase ends at `t_w`).
    pub t3: f64,
    /// Sets the length `t4 - t3` of the first gradient-stable phase; the box
    /// refit happens at its end, `t_w + (t4 - t2)`.
    pub t4: f64,
    /// Hard stop for the final gradient-stable descent (absolute time).
    pub t5: f64,
    /// `||u_t||_2` below which the state counts as stationary.
    pub residual_tol: f64,
    /// Spectral weighting strength; `0` disables the weighting phase.
    pub rho: f64,
    /// Noise amplitude as a fraction of the field's peak-to-peak range.
    pub noise_amplitude_factor: f64,
}

impl Default for Schedule {
    // How long the weighted window needs to be depends on (gamma, m): at
    // (10, 0.1) the angular competition on the dominant ring takes 80+ time
    // units to condense the pattern into a single system of wavevectors
    // (shorter windows freeze a two-orientation grain state), while at (3, 0)
    // anything past ~40 units re-opens the competition as the ring migrates
    // during coarsening and freezes grains instead.  Hence the adaptive stop:
    // t2 is only a cap, and the phase ends as soon as the spectrum has
    // condensed (but not before WEIGHT_MIN_SPAN has elapsed).
    fn default() -> Self {
        Schedule {
            t1: 40.0,
            t2: 200.0,
            t3: 210.0,
            t4: 220.0,
            t5: 2500.0,
            residual_tol: 1e-8,
            rho: annealing::DEFAULT_RHO,
            noise_amplitude_factor: 0.05,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let ts = [self.t1, self.t2, self.t3, self.t4, self.t5];
        if ts.iter().any(|t| !t.is_finite()) {
            return Err(PipelineError::InvalidSchedule(
                "phase boundaries must be finite".into(),
            ));
        }
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3 && self.t3 < self.t4) {
            return Err(PipelineError::InvalidSchedule(format!(
                "need 0 < t1 < t2 < t3 < t4, got {} {} {} {}",
                self.t1, self.t2, self.t3, self.t4
            )));
        }
        if self.t5 < self.t4 {
            return Err(PipelineError::InvalidSchedule(format!(
                "need t5 >= t4, got t4 = {}, t5 = {}",
                self.t4, self.t5
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(PipelineError::InvalidSchedule(format!(
                "residual tolerance must be positive, got {}",
                self.residual_tol
            )));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(PipelineError::InvalidSchedule(format!(
                "rho must lie in [0, 1], got {}",
                self.rho
            )));
        }
        if !(0.0..1.0).contains(&self.noise_amplitude_factor) {
            return Err(PipelineError::InvalidSchedule(format!(
                "noise amplitude factor must lie in [0, 1), got {}",
                self.noise_amplitude_factor
            )));
        }
        Ok(())
    }
}

/// Everything reported about one protocol run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub gamma: f64,
    pub m: f64,
    pub seed: u64,
    /// `m / m*(gamma)` when the onset scale exists.
    pub beta: Option<f64>,
    pub label: PhaseLabel,
    pub peaks: usize,
    /// Energies of the best state seen during the run — the one with the
    /// least dissipated-energy density, since that is what the flow descends.
    pub e_paper: f64,
    pub e_diss: f64,
    /// Box length of the best state (differs from the initial box after a refit).
    pub l_opt: f64,
    pub k_star: Option<f64>,
    /// Stationarity residual of the best state.
    pub residual: f64,
    pub wall_s: f64,
    /// Simulation time reached when the run stopped.
    pub t_final: f64,
    /// Energy and box length of the state the run actually ended on.
    pub final_e_paper: f64,
    pub final_e_diss: f64,
    pub final_length: f64,
    pub refit_applied: bool,
    /// Refit was skipped because the state had no gradient or no nonlocal energy.
    pub refit_skipped: bool,
    /// Time at which the weighted phase ended (`t2` when it ran to its cap),
    /// or `None` when the burn-in was already stationary and the phase was
    /// skipped.
    pub weight_end: Option<f64>,
    /// Diagnostic when a stepper failed; the record then describes the best
    /// state reached before the failure.
    pub aborted: Option<String>,
    /// Mean-zero fluctuation of the best state.
    pub best_field: RealField,
    /// Fluctuation the run ended on; stationary when the final phase hit the
    /// residual tolerance, hence the right seed for continuation.
    pub final_field: RealField,
}

/// Lowest dissipated-energy-density state seen so far.  Density (energy per
/// box area) rather than total energy so that states on refitted boxes
/// compare fairly.
struct Best {
    density: f64,
    energy: EnergyBreakdown,
    field: RealField,
    t: f64,
}

impl Best {
    // Ranking uses the dissipated energy: it is the functional the flow
    // descends, so settled patterns outrank both the uniform state and the
    // artificially smoothed transients of the weighting phase.  Ranking by
    // e_paper instead would hand the record to an early near-uniform blob
    // whenever gamma is small (e_paper weighs the gradient and nonlocal
    // terms twice as heavily, which patterns pay for and uniform does not).
    fn new(field: &RealField, energy: EnergyBreakdown, t: f64) -> Self {
        Best {
            density: energy.e_diss / field.grid.area(),
            energy,
            field: field.clone(),
            t,
        }
    }

    fn update(&mut self, field: &RealField, energy: EnergyBreakdown, t: f64) {
        let density = energy.e_diss / field.grid.area();
        if density < self.density {
            self.density = density;
            self.energy = energy;
            self.field = field.clone();
            self.t = t;
        }
    }
}

/// Full energy breakdown of the state's `u = v + m`.
fn breakdown_of(state: &SolverState) -> Result<EnergyBreakdown, PipelineError> {
    let mut u = state.field.clone();
    for v in &mut u.values {
        *v += state.m;
    }
    Ok(energy::total_energy(&u, state.gamma, state.m)?)
}

/// Plain ETDRK4 steps until `t_end`.
fn run_etdrk4_span(
    state: &mut SolverState,
    stepper: &mut Etdrk4,
    t_end: f64,
    dt_main: f64,
    best: &mut Best,
    trace: &mut Vec<(f64, EnergyBreakdown)>,
    tracing: bool,
) -> Result<(), PipelineError> {
    while state.t < t_end - TIME_EPS {
        state.dt = dt_main.min(t_end - state.t);
        let e = stepper.step(state)?;
        best.update(&state.field, e, state.t);
        if tracing {
            trace.push((state.t, e));
        }
    }
    Ok(())
}

/// Weighted ETDRK4 span: applies spectral weighting toward the dominant ring
/// after every step (best-state snapshots are taken from the post-step field
/// *before* the weighting perturbs it), and ends early once the angular
/// spectrum has stably condensed onto a single pattern system — two
/// consecutive checks, [`WEIGHT_CHECK_INTERVAL`] apart, both reading stripes
/// or hexagons — but never before [`WEIGHT_MIN_SPAN`] has elapsed and never
/// after `t_cap`.  Returns the time at which the span actually ended.
///
/// The weighting suppresses off-ring (grain-wall) content so the on-ring
/// angular competition can finish; once a single system has won, keeping the
/// weighting on only does harm, because the dominant ring migrates as the
/// pattern coarsens and re-weighting onto the moved ring re-opens the
/// orientation competition.
#[allow(clippy::too_many_arguments)]
fn run_weighted_span(
    state: &mut SolverState,
    stepper: &mut Etdrk4,
    t_cap: f64,
    dt_main: f64,
    rho: f64,
    best: &mut Best,
    trace: &mut Vec<(f64, EnergyBreakdown)>,
    tracing: bool,
) -> Result<f64, PipelineError> {
    let t_start = state.t;
    let mut next_check = t_start + WEIGHT_CHECK_INTERVAL;
    let mut prev_condensed = false;
    while state.t < t_cap - TIME_EPS {
        state.dt = dt_main.min(t_cap - state.t);
        let e = stepper.step(state)?;
        best.update(&state.field, e, state.t);
        if tracing {
            trace.push((state.t, e));
        }
        if rho > 0.0 {
            let mut v = spectral::forward(&state.field)?;
            if let Some(k_star) = annealing::dominant_mode(&v) {
                annealing::apply_weighting(&mut v, k_star, rho);
                state.field = spectral::inverse(&v)?;
            }
        }
        if state.t >= next_check - TIME_EPS {
            next_check = state.t + WEIGHT_CHECK_INTERVAL;
            let condensed = matches!(
                classify::classify(&state.field)?.label,
                PhaseLabel::Lamellae | PhaseLabel::HexSpots
            );
            if condensed && prev_condensed && state.t - t_start >= WEIGHT_MIN_SPAN - TIME_EPS {
                break;
            }
            prev_condensed = condensed;
        }
    }
    Ok(state.t)
}

/// Gradient-stable steps until `t_end` (or until the residual drops below
/// `stop_residual`), growing and shrinking the target step with `adapt_dt`.
fn run_gs_span(
    state: &mut SolverState,
    gs: &mut GradientStable,
    t_end: f64,
    stop_residual: Option<f64>,
    best: &mut Best,
    trace: &mut Vec<(f64, EnergyBreakdown)>,
    tracing: bool,
) -> Result<(), PipelineError> {
    let mut dt_target = state.dt;
    while state.t < t_end - TIME_EPS {
        if let Some(tol) = stop_residual {
            if state.residual()? < tol {
                break;
            }
        }
        state.dt = dt_target.min(t_end - state.t);
        let clamped = state.dt < dt_target;
        let info = gs.step(state)?;
        best.update(&state.field, info.energy, state.t);
        if tracing {
            trace.push((state.t, info.energy));
        }
        // Adapt from the unclamped target unless the step itself was halved,
        // so a short boundary step does not reset the growth.
        let base = if clamped && info.halvings == 0 {
            dt_target
        } else {
            state.dt
        };
        dt_target = adapt_dt(info.iterations, base);
    }
    state.dt = dt_target;
    Ok(())
}

/// Outcome of one box refit attempt.
#[derive(Debug, Clone, Copy)]
pub struct RefitOutcome {
    /// The refitted box was kept (its settled energy density was lower).
    pub applied: bool,
    /// No refit was attempted (zero gradient or zero nonlocal energy).
    pub skipped: bool,
    pub l_before: f64,
    pub l_after: f64,
    pub e_tilde_before: f64,
    pub e_tilde_after: f64,
}

/// Rescales the box to the length minimizing the separable energy surrogate,
/// settles for `settle_time` units under the gradient-stable scheme, and
/// keeps the new box only if the energy density actually dropped.
pub fn domain_refit(
    state: &mut SolverState,
    settle_time: f64,
) -> Result<RefitOutcome, PipelineError> {
    let l_before = state.field.grid.length();
    let e0 = breakdown_of(state)?;
    let (i1u, _, i3u) = e0.unit_domain(l_before);
    let e_tilde_before = e0.e_paper / state.field.grid.area();
    let Some((l_star, _)) = energy::optimal_length(i1u, i3u, state.gamma) else {
        return Ok(RefitOutcome {
            applied: false,
            skipped: true,
            l_before,
            l_after: l_before,
            e_tilde_before,
            e_tilde_after: e_tilde_before,
        });
    };

    let snapshot = state.clone();
    state.field.grid = state.field.grid.with_length(l_star)?;
    let mut gs = GradientStable::new(state.field.grid, state.gamma, state.m);
    let t_end = state.t + settle_time;
    let mut dt_target = state.dt;
    while state.t < t_end - TIME_EPS {
        state.dt = dt_target.min(t_end - state.t);
        let clamped = state.dt < dt_target;
        let info = gs.step(state)?;
        let base = if clamped && info.halvings == 0 {
            dt_target
        } else {
            state.dt
        };
        dt_target = adapt_dt(info.iterations, base);
    }
    state.dt = dt_target;

    let e1 = breakdown_of(state)?;
    let e_tilde_after = e1.e_paper / state.field.grid.area();
    if e_tilde_after < e_tilde_before {
        Ok(RefitOutcome {
            applied: true,
            skipped: false,
            l_before,
            l_after: l_star,
            e_tilde_before,
            e_tilde_after,
        })
    } else {
        *state = snapshot;
        Ok(RefitOutcome {
            applied: false,
            skipped: false,
            l_before,
            l_after: l_before,
            e_tilde_before,
            e_tilde_after,
        })
    }
}

/// Runs all protocol phases in place.  Returns the refit outcome flags and
/// the time the weighted phase ended (`None` when it was skipped).
fn run_phases(
    state: &mut SolverState,
    schedule: &Schedule,
    noise_seed: u64,
    best: &mut Best,
    trace: &mut Vec<(f64, EnergyBreakdown)>,
    tracing: bool,
) -> Result<(bool, bool, Option<f64>), PipelineError> {
    let (gamma, m) = (state.gamma, state.m);
    let dt_main = default_dt(gamma);

    state.stepper = StepperKind::Etdrk4;
    let mut etdrk4 = Etdrk4::new(state.field.grid, gamma, m, dt_main);
    run_etdrk4_span(state, &mut etdrk4, schedule.t1, dt_main, best, trace, tracing)?;

    // The weighting and noise phases exist to escape shallow traps; skip them
    // when the burn-in already landed on a stationary state.  When the
    // weighted phase stops early at t_w < t2, the two phases after it keep
    // their scheduled lengths by anchoring at t_w instead of t2.
    let mut t4_end = schedule.t4;
    let mut weight_end = None;
    if state.residual()? >= schedule.residual_tol {
        let t_w = run_weighted_span(
            state,
            &mut etdrk4,
            schedule.t2,
            dt_main,
            schedule.rho,
            best,
            trace,
            tracing,
        )?;
        t4_end = t_w + (schedule.t4 - schedule.t2);
        weight_end = Some(t_w);

        let (lo, hi) = state.field.min_max();
        annealing::inject_noise(
            &mut state.field,
            schedule.noise_amplitude_factor * (hi - lo),
            noise_seed,
        );
        state.field.remove_mean();
        let e = breakdown_of(state)?;
        best.update(&state.field, e, state.t);
        if tracing {
            trace.push((state.t, e));
        }

        let t3_end = t_w + (schedule.t3 - schedule.t2);
        run_etdrk4_span(state, &mut etdrk4, t3_end, dt_main, best, trace, tracing)?;
    }

    state.stepper = StepperKind::GradientStable;
    let mut gs = GradientStable::new(state.field.grid, gamma, m);
    run_gs_span(state, &mut gs, t4_end, None, best, trace, tracing)?;

    let refit = domain_refit(state, REFIT_SETTLE_TIME)?;
    if refit.applied {
        let e = breakdown_of(state)?;
        best.update(&state.field, e, state.t);
        if tracing {
            trace.push((state.t, e));
        }
    }

    let mut gs = GradientStable::new(state.field.grid, gamma, m);
    run_gs_span(
        state,
        &mut gs,
        schedule.t5,
        Some(schedule.residual_tol),
        best,
        trace,
        tracing,
    )?;
    Ok((refit.applied, refit.skipped, weight_end))
}

/// Deterministic seeded start: iid uniform on `[-1 - m, 1 - m]` with the
/// empirical mean removed, plus a derived seed for the later noise kick.
fn initial_field(grid: GridSpec, m: f64, seed: u64) -> (RealField, u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.n();
    let mut values = vec![0.0; n * n];
    for v in &mut values {
        *v = rng.gen_range((-1.0 - m)..(1.0 - m));
    }
    let noise_seed: u64 = rng.gen();
    let mut field = RealField { grid, values };
    field.remove_mean();
    (field, noise_seed)
}

fn check_params(gamma: f64, m: f64) -> Result<(), PipelineError> {
    if !gamma.is_finite() || !(gamma > 0.0) {
        return Err(PipelineError::InvalidParams(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    if !m.is_finite() || !(m.abs() < 1.0) {
        return Err(PipelineError::InvalidParams(format!(
            "mean must satisfy |m| < 1, got {m}"
        )));
    }
    Ok(())
}

/// Box length used for protocol runs: a dozen expected periods across.
pub fn protocol_length(gamma: f64) -> f64 {
    12.0 * PI * (2.0 / gamma).cbrt()
}

/// Runs the full protocol; see [`run_protocol_with_trace`].
pub fn run_protocol(
    gamma: f64,
    m: f64,
    seed: u64,
    schedule: &Schedule,
    n: usize,
) -> Result<RunRecord, PipelineError> {
    Ok(run_protocol_with_trace(gamma, m, seed, schedule, n, false)?.0)
}

/// Runs the full annealing protocol on an `n x n` grid and classifies the
/// best state seen.  With `tracing` the per-step `(t, energy)` history is
/// returned alongside the record.  Stepper blow-ups do not error: the record
/// comes back flagged `aborted` and describes the best state reached.
pub fn run_protocol_with_trace(
    gamma: f64,
    m: f64,
    seed: u64,
    schedule: &Schedule,
    n: usize,
    tracing: bool,
) -> Result<(RunRecord, Vec<(f64, EnergyBreakdown)>), PipelineError> {
    schedule.validate()?;
    check_params(gamma, m)?;
    let start = Instant::now();

    let grid = GridSpec::new(n, protocol_length(gamma))?;
    let (field, noise_seed) = initial_field(grid, m, seed);
    let mut state = SolverState::new(field, default_dt(gamma), gamma, m)?;

    let e0 = breakdown_of(&state)?;
    let mut best = Best::new(&state.field, e0, 0.0);
    let mut trace = Vec::new();
    if tracing {
        trace.push((0.0, e0));
    }

    let phases = run_phases(&mut state, schedule, noise_seed, &mut best, &mut trace, tracing);
    let (aborted, refit_applied, refit_skipped, weight_end) = match phases {
        Ok((applied, skipped, w)) => (None, applied, skipped, w),
        Err(e) if e.is_numerical() => (Some(e.to_string()), false, false, None),
        Err(e) => return Err(e),
    };

    let classification = classify::classify(&best.field)?;
    let residual = rhs(&best.field, gamma, m)?.l2_norm();
    let (final_e, final_e_diss) = if aborted.is_none() {
        let b = breakdown_of(&state)?;
        (b.e_paper, b.e_diss)
    } else {
        (f64::NAN, f64::NAN)
    };

    let record = RunRecord {
        gamma,
        m,
        seed,
        beta: asymptotics::beta_of(gamma, m),
        label: classification.label,
        peaks: classification.peaks,
        e_paper: best.energy.e_paper,
        e_diss: best.energy.e_diss,
        l_opt: best.field.grid.length(),
        k_star: classification.k_star,
        residual,
        wall_s: start.elapsed().as_secs_f64(),
        t_final: state.t,
        final_e_paper: final_e,
        final_e_diss,
        final_length: state.field.grid.length(),
        refit_applied,
        refit_skipped,
        weight_end,
        aborted,
        best_field: best.field,
        final_field: state.field,
    };
    Ok((record, trace))
}

/// Rectangular sweep window in the `(gamma, m)` plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub m_min: f64,
    pub m_max: f64,
}

impl Region {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let vals = [self.gamma_min, self.gamma_max, self.m_min, self.m_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(PipelineError::InvalidParams(
                "region bounds must be finite".into(),
            ));
        }
        if !(self.gamma_min > 0.0 && self.gamma_max >= self.gamma_min) {
            return Err(PipelineError::InvalidParams(format!(
                "need 0 < gamma_min <= gamma_max, got [{}, {}]",
                self.gamma_min, self.gamma_max
            )));
        }
        if !(self.m_min > -1.0 && self.m_max < 1.0 && self.m_max >= self.m_min) {
            return Err(PipelineError::InvalidParams(format!(
                "need -1 < m_min <= m_max < 1, got [{}, {}]",
                self.m_min, self.m_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, gamma: f64, m: f64) -> bool {
        (self.gamma_min..=self.gamma_max).contains(&gamma)
            && (self.m_min..=self.m_max).contains(&m)
    }

    /// Diagonal extent; sets the refinement length scale.
    pub fn diameter(&self) -> f64 {
        (self.gamma_max - self.gamma_min).hypot(self.m_max - self.m_min)
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub region: Region,
    /// Random points in the first round.
    pub n_initial: usize,
    /// Refinement rounds after the first.
    pub rounds: usize,
    pub master_seed: u64,
    /// Grid resolution for every run.
    pub n: usize,
    pub schedule: Schedule,
    /// Worker threads; runs within a round execute in parallel.
    pub jobs: usize,
    /// When set, `sweep.csv` plus per-run field dumps are written here,
    /// appended as each round completes.
    pub out_dir: Option<PathBuf>,
}

/// A run that errored out badly enough to produce no record.
#[derive(Debug, Clone)]
pub struct SweepFailure {
    pub gamma: f64,
    pub m: f64,
    pub seed: u64,
    pub message: String,
}

/// All completed runs of a sweep, in deterministic submission order.
#[derive(Debug)]
pub struct PhaseDiagram {
    pub region: Region,
    pub records: Vec<RunRecord>,
    pub failures: Vec<SweepFailure>,
}

/// One CSV row for a record, `NaN` standing in for absent optionals.
pub fn format_sweep_row(rec: &RunRecord) -> String {
    let beta = rec.beta.map_or_else(|| "NaN".to_string(), |b| b.to_string());
    let k_star = rec.k_star.map_or_else(|| "NaN".to_string(), |k| k.to_string());
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        rec.gamma,
        rec.m,
        beta,
        rec.label,
        rec.e_paper,
        rec.e_diss,
        rec.l_opt,
        k_star,
        rec.residual,
        rec.seed,
        rec.wall_s
    )
}

/// Key-value summary of a record for the per-run `run.meta` dump.
pub fn record_kv(rec: &RunRecord) -> Vec<(String, String)> {
    let mut kv = vec![
        ("gamma".into(), rec.gamma.to_string()),
        ("m".into(), rec.m.to_string()),
        ("seed".into(), rec.seed.to_string()),
        (
            "beta".into(),
            rec.beta.map_or_else(|| "NaN".into(), |b| b.to_string()),
        ),
        ("label".into(), rec.label.to_string()),
        ("peaks".into(), rec.peaks.to_string()),
        ("E_paper".into(), rec.e_paper.to_string()),
        ("E_diss".into(), rec.e_diss.to_string()),
        ("L_opt".into(), rec.l_opt.to_string()),
        (
            "k_star".into(),
            rec.k_star.map_or_else(|| "NaN".into(), |k| k.to_string()),
        ),
        ("residual".into(), rec.residual.to_string()),
        ("t_final".into(), rec.t_final.to_string()),
        ("refit_applied".into(), rec.refit_applied.to_string()),
        (
            "weight_end".into(),
            rec.weight_end.map_or_else(|| "NaN".into(), |t| t.to_string()),
        ),
    ];
    if let Some(msg) = &rec.aborted {
        kv.push(("aborted".into(), msg.clone()));
    }
    kv
}

fn dump_record(dir: &Path, index: usize, rec: &RunRecord) -> Result<(), IoError> {
    let sub = dir.join(format!("run_{index:04}"));
    std::fs::create_dir_all(&sub)?;
    io::write_field(&sub.join("best.okf"), &rec.best_field)?;
    io::write_pgm(&sub.join("best.pgm"), &rec.best_field)?;
    io::write_kv(&sub.join("run.meta"), &record_kv(rec))?;
    Ok(())
}

/// Midpoints of record pairs that are close together yet disagree on the
/// label, skipping candidates that nearly duplicate an existing point.
fn refinement_points(
    records: &[RunRecord],
    region: &Region,
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64, u64)> {
    let radius = region.diameter() / REFINE_RADIUS_DIV;
    let dedupe = radius / DEDUPE_DIV;
    let mut out: Vec<(f64, f64, u64)> = Vec::new();
    for i in 0..records.len() {
        for j in (i + 1)..records.len() {
            let (a, b) = (&records[i], &records[j]);
            if a.label == b.label {
                continue;
            }
            let dist = (a.gamma - b.gamma).hypot(a.m - b.m);
            if dist >= radius || dist == 0.0 {
                continue;
            }
            let gamma = 0.5 * (a.gamma + b.gamma);
            let m = 0.5 * (a.m + b.m);
            if !region.contains(gamma, m) {
                continue;
            }
            let near = records
                .iter()
                .map(|q| (q.gamma, q.m))
                .chain(out.iter().map(|&(g, mm, _)| (g, mm)))
                .any(|(g, mm)| (g - gamma).hypot(mm - m) < dedupe);
            if near {
                continue;
            }
            out.push((gamma, m, rng.gen()));
        }
    }
    out
}

/// Scattered runs over the region, then `rounds` rounds of bisection between
/// differently labeled neighbors.  Individual run blow-ups land in
/// `failures`; the sweep itself keeps going.
pub fn sweep(cfg: &SweepConfig) -> Result<PhaseDiagram, PipelineError> {
    cfg.region.validate()?;
    cfg.schedule.validate()?;
    if cfg.n_initial == 0 {
        return Err(PipelineError::InvalidParams(
            "sweep needs at least one initial point".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| PipelineError::InvalidParams(format!("thread pool: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.master_seed);
    let mut queue: Vec<(f64, f64, u64)> = (0..cfg.n_initial)
        .map(|_| {
            let gamma = rng.gen_range(cfg.region.gamma_min..=cfg.region.gamma_max);
            let m = rng.gen_range(cfg.region.m_min..=cfg.region.m_max);
            (gamma, m, rng.gen())
        })
        .collect();

    let mut csv = match &cfg.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(IoError::from)?;
            let mut f = File::create(dir.join("sweep.csv")).map_err(IoError::from)?;
            writeln!(f, "{SWEEP_CSV_HEADER}").map_err(IoError::from)?;
            Some(f)
        }
        None => None,
    };

    let mut records: Vec<RunRecord> = Vec::new();
    let mut failures: Vec<SweepFailure> = Vec::new();
    for round in 0..=cfg.rounds {
        let batch: Vec<Result<RunRecord, PipelineError>> = pool.install(|| {
            queue
                .par_iter()
                .map(|&(gamma, m, seed)| run_protocol(gamma, m, seed, &cfg.schedule, cfg.n))
                .collect()
        });
        for (&(gamma, m, seed), result) in queue.iter().zip(batch) {
            match result {
                Ok(rec) => {
                    if let Some(f) = csv.as_mut() {
                        writeln!(f, "{}", format_sweep_row(&rec)).map_err(IoError::from)?;
                        f.flush().map_err(IoError::from)?;
                    }
                    if let Some(dir) = &cfg.out_dir {
                        dump_record(dir, records.len(), &rec)?;
                    }
                    records.push(rec);
                }
                Err(e) => failures.push(SweepFailure {
                    gamma,
                    m,
                    seed,
                    message: e.to_string(),
                }),
            }
        }
        if round < cfg.rounds {
            queue = refinement_points(&records, &cfg.region, &mut rng);
            if queue.is_empty() {
                break;
            }
        }
    }
    Ok(PhaseDiagram {
        region: cfg.region,
        records,
        failures,
    })
}

/// Mean half peak-to-peak amplitude of the best fields, `None` when empty.
pub fn fluctuation_stat<'a, I>(records: I) -> Option<f64>
where
    I: IntoIterator<Item = &'a RunRecord>,
{
    let mut total = 0.0;
    let mut count = 0usize;
    for rec in records {
        let (lo, hi) = rec.best_field.min_max();
        total += 0.5 * (hi - lo);
        count += 1;
    }
    (count > 0).then(|| total / count as f64)
}

/// Where a pure-flow reference run ended up.
#[derive(Debug, Clone, Copy)]
pub struct PureRunOutcome {
    pub wall_s: f64,
    pub t_final: f64,
    pub residual: f64,
    pub converged: bool,
}

/// Plain ETDRK4 at the default step from the same seeded start as the
/// protocol, until the residual drops below `target_residual`, the clock
/// reaches `t_max`, or `wall_cap_s` of wall time elapses.  The baseline the
/// annealed protocol is measured against.
pub fn run_pure_etdrk4(
    gamma: f64,
    m: f64,
    seed: u64,
    n: usize,
    target_residual: f64,
    t_max: f64,
    wall_cap_s: f64,
) -> Result<PureRunOutcome, PipelineError> {
    check_params(gamma, m)?;
    if !(target_residual > 0.0) || !(t_max > 0.0) || !(wall_cap_s > 0.0) {
        return Err(PipelineError::InvalidParams(
            "pure run needs positive residual target, horizon, and wall cap".into(),
        ));
    }
    let grid = GridSpec::new(n, protocol_length(gamma))?;
    let (field, _) = initial_field(grid, m, seed);
    let dt_main = default_dt(gamma);
    let mut state = SolverState::new(field, dt_main, gamma, m)?;
    let mut stepper = Etdrk4::new(grid, gamma, m, dt_main);

    let start = Instant::now();
    let mut residual = state.residual()?;
    let mut converged = residual < target_residual;
    let mut steps = 0usize;
    while !converged
        && state.t < t_max - TIME_EPS
        && start.elapsed().as_secs_f64() < wall_cap_s
    {
        state.dt = dt_main.min(t_max - state.t);
        stepper.step(&mut state)?;
        steps += 1;
        if steps % RESIDUAL_CHECK_STRIDE == 0 {
            residual = state.residual()?;
            converged = residual < target_residual;
        }
    }
    if !converged {
        residual = state.residual()?;
        converged = residual < target_residual;
    }
    Ok(PureRunOutcome {
        wall_s: start.elapsed().as_secs_f64(),
        t_final: state.t,
        residual,
        converged,
    })
}
