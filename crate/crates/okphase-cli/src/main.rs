//! Command-line driver: protocol runs, phase-diagram sweeps, branch
//! continuation, closed-form thresholds, field classification, and energy
//! evaluation.  Exit code 0 on success, 1 on validation/usage errors, 2 when
//! a computation failed numerically.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use okphase::asymptotics::{self, AmplitudeState, FixedPointLabel};
use okphase::classify;
use okphase::continuation::{self, ContinuationError};
use okphase::dynamics::{default_dt, SolverState, StepperKind};
use okphase::energy;
use okphase::io::{self, IoError};
use okphase::pipeline::{self, PipelineError, Region, Schedule, SweepConfig};

#[derive(Parser)]
#[command(
    name = "okphase",
    version,
    about = "Minimizers and phase diagrams for a nonlocal Cahn-Hilliard energy"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the annealed minimization protocol at one (gamma, m).
    Run(RunArgs),
    /// Map phase labels over a (gamma, m) window.
    Sweep(SweepArgs),
    /// Continue a stationary state in m from a checkpoint.
    #[command(name = "continue")]
    Continue(ContinueArgs),
    /// Print the closed-form stability thresholds in beta.
    Asymptotics(AsymptoticsArgs),
    /// Label a stored field dump.
    Classify(ClassifyArgs),
    /// Evaluate the energy of a stored field dump.
    Energy(EnergyArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    m: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid resolution (N x N).
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Spectral weighting strength; 0 disables the weighting phase.
    #[arg(long, default_value_t = Schedule::default().rho)]
    rho: f64,
    /// End of the plain ETDRK4 burn-in.
    #[arg(long, default_value_t = Schedule::default().t1)]
    t1: f64,
    /// Cap on the weighted phase (it ends early once the spectrum condenses).
    #[arg(long, default_value_t = Schedule::default().t2)]
    t2: f64,
    /// Sets the post-noise ETDRK4 length, t3 - t2.
    #[arg(long, default_value_t = Schedule::default().t3)]
    t3: f64,
    /// Sets the first gradient-stable length, t4 - t3; the box refit follows.
    #[arg(long, default_value_t = Schedule::default().t4)]
    t4: f64,
    /// Hard stop for the final gradient-stable descent.
    #[arg(long, default_value_t = Schedule::default().t5)]
    t5: f64,
    /// Directory for field/energy/checkpoint dumps.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    gamma_min: f64,
    #[arg(long)]
    gamma_max: f64,
    #[arg(long)]
    m_min: f64,
    #[arg(long)]
    m_max: f64,
    /// Random points in the first round.
    #[arg(long, default_value_t = 24)]
    count: usize,
    /// Refinement rounds bisecting label disagreements.
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    /// Worker threads (falls back to OKPHASE_JOBS, then 1).
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Output directory for sweep.csv and per-run dumps.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ContinueArgs {
    /// Checkpoint base path (reads <base>.okf and <base>.meta).
    #[arg(long)]
    from: PathBuf,
    /// Mass increment per continuation step.
    #[arg(long)]
    dm: f64,
    #[arg(long)]
    steps: usize,
}

#[derive(Args)]
struct AsymptoticsArgs {
    /// Write a CSV sampling each family's landscape value and least
    /// Hessian eigenvalue over beta in [0, 1.3].
    #[arg(long, value_name = "PATH")]
    beta_scan: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Field dump to label.
    field: PathBuf,
}

#[derive(Args)]
struct EnergyArgs {
    /// Field dump holding the mean-zero fluctuation.
    field: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    m: f64,
}

/// A failure plus which exit code it deserves.
enum Failure {
    Validation(String),
    Numerical(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::InvalidSchedule(_)
            | PipelineError::InvalidParams(_)
            | PipelineError::Io(_) => Failure::Validation(e.to_string()),
            PipelineError::Dynamics(_)
            | PipelineError::Spectral(_)
            | PipelineError::Energy(_) => Failure::Numerical(e.to_string()),
        }
    }
}

impl From<ContinuationError> for Failure {
    fn from(e: ContinuationError) -> Self {
        Failure::Numerical(e.to_string())
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Cmd::Run(args) => cmd_run(args),
        Cmd::Sweep(args) => cmd_sweep(args),
        Cmd::Continue(args) => cmd_continue(args),
        Cmd::Asymptotics(args) => cmd_asymptotics(args),
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Energy(args) => cmd_energy(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let schedule = Schedule {
        t1: args.t1,
        t2: args.t2,
        t3: args.t3,
        t4: args.t4,
        t5: args.t5,
        rho: args.rho,
        ..Schedule::default()
    };
    let tracing = args.out.is_some();
    let (record, trace) =
        pipeline::run_protocol_with_trace(args.gamma, args.m, args.seed, &schedule, args.n, tracing)?;

    println!("{}", pipeline::SWEEP_CSV_HEADER);
    println!("{}", pipeline::format_sweep_row(&record));

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        io::write_field(&dir.join("best.okf"), &record.best_field)?;
        io::write_pgm(&dir.join("best.pgm"), &record.best_field)?;
        io::write_kv(&dir.join("run.meta"), &pipeline::record_kv(&record))?;
        io::write_energy_csv(&dir.join("energy.csv"), &trace)?;
        let checkpoint = SolverState {
            field: record.final_field.clone(),
            t: record.t_final,
            dt: default_dt(record.gamma),
            gamma: record.gamma,
            m: record.m,
            stepper: StepperKind::GradientStable,
        };
        io::write_checkpoint(&dir.join("final"), &checkpoint, record.seed)?;
    }

    match &record.aborted {
        Some(msg) => Err(Failure::Numerical(format!("run aborted: {msg}"))),
        None => Ok(()),
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let jobs = args
        .jobs
        .or_else(|| {
            std::env::var("OKPHASE_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);
    let cfg = SweepConfig {
        region: Region {
            gamma_min: args.gamma_min,
            gamma_max: args.gamma_max,
            m_min: args.m_min,
            m_max: args.m_max,
        },
        n_initial: args.count,
        rounds: args.rounds,
        master_seed: args.seed,
        n: args.n,
        schedule: Schedule::default(),
        jobs,
        out_dir: Some(args.out.clone()),
    };
    let diagram = pipeline::sweep(&cfg)?;
    for f in &diagram.failures {
        eprintln!(
            "failed run: gamma {} m {} seed {}: {}",
            f.gamma, f.m, f.seed, f.message
        );
    }
    println!(
        "{} records ({} failures) -> {}",
        diagram.records.len(),
        diagram.failures.len(),
        args.out.join("sweep.csv").display()
    );
    if diagram.records.is_empty() && !diagram.failures.is_empty() {
        return Err(Failure::Numerical("every sweep run failed".into()));
    }
    Ok(())
}

fn cmd_continue(args: ContinueArgs) -> Result<(), Failure> {
    let (state, _seed) = io::read_checkpoint(&args.from)?;
    let branch =
        continuation::continue_in_m(&state.field, state.gamma, state.m, args.dm, args.steps)?;
    println!("m,E_paper,E_diss,residual,newton_iters");
    for p in &branch.points {
        println!(
            "{},{},{},{},{}",
            p.m, p.energy.e_paper, p.energy.e_diss, p.residual, p.newton_iters
        );
    }
    if branch.truncated {
        return Err(Failure::Numerical(
            "branch truncated: Newton stopped converging".into(),
        ));
    }
    Ok(())
}

fn cmd_asymptotics(args: AsymptoticsArgs) -> Result<(), Failure> {
    let r = asymptotics::stability_regions();
    println!("lamellae_linear_upper {:.6}", r.linear_lamellae.1);
    println!("hex_linear_lower {:.6}", r.linear_hex.0);
    println!("hex_linear_upper {:.6}", r.linear_hex.1);
    println!("disorder_linear_lower {:.6}", r.linear_disorder.0);
    println!("lamellae_global_upper {:.6}", r.global_lamellae.1);
    println!("hex_global_upper {:.6}", r.global_hex.1);
    if let Some(path) = &args.beta_scan {
        write_beta_scan(path)?;
        println!("beta scan -> {}", path.display());
    }
    Ok(())
}

/// Per-family landscape value and least Hessian eigenvalue, sampled over
/// beta in [0, 1.3] in steps of 1e-3.  Families outside their domain print
/// NaN columns.
fn write_beta_scan(path: &Path) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "beta,V_disorder,minEig_disorder,V_lamellae,minEig_lamellae,\
         V_triangular,minEig_triangular,V_hex,minEig_hex,V_abnotc,minEig_abnotc"
    )?;
    for i in 0..=1300usize {
        let beta = i as f64 / 1000.0;
        let mut cols = [f64::NAN; 10];
        for family in asymptotics::fixed_points(beta) {
            let slot = match family.label {
                FixedPointLabel::Disorder => 0,
                FixedPointLabel::Lamellae => 1,
                FixedPointLabel::TriangularSpots => 2,
                FixedPointLabel::HexSpots => 3,
                FixedPointLabel::ABnotC => 4,
            };
            for rep in &family.representatives {
                let s = AmplitudeState::from_amps(*rep, beta);
                let v = asymptotics::lyapunov(&s);
                if cols[2 * slot].is_nan() || v < cols[2 * slot] {
                    cols[2 * slot] = v;
                    cols[2 * slot + 1] = asymptotics::hessian_eigs(&s)[0];
                }
            }
        }
        write!(w, "{beta}")?;
        for c in cols {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<(), Failure> {
    let field = io::read_field(&args.field)?;
    let c = classify::classify(&field).map_err(|e| Failure::Numerical(e.to_string()))?;
    println!("{} {} {:.3}", c.label, c.peaks, c.k_star.unwrap_or(0.0));
    Ok(())
}

fn cmd_energy(args: EnergyArgs) -> Result<(), Failure> {
    let mut u = io::read_field(&args.field)?;
    for v in &mut u.values {
        *v += args.m;
    }
    let e = energy::total_energy(&u, args.gamma, args.m)
        .map_err(|e| Failure::Validation(e.to_string()))?;
    println!("E_paper {}", e.e_paper);
    println!("E_diss {}", e.e_diss);
    println!("I1 {}", e.i1);
    println!("I2 {}", e.i2);
    println!("I3 {}", e.i3);
    Ok(())
}
