//! Persistence: binary field dumps, PGM previews, solver checkpoints,
//! energy traces, and plain-text key=value config files.
//!
//! The dump format is fixed: a 16-byte header (magic `OKF1`, `u32` grid
//! size, `f64` box length, both little-endian) followed by the `N*N`
//! little-endian `f64` samples in row-major order. A checkpoint is a dump
//! plus a sibling `.meta` text file with `key=value` lines (gamma, m, t,
//! dt, stepper, seed). Floats in text files use Rust's shortest-roundtrip
//! formatting, so reading a checkpoint back reproduces the state bit for
//! bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::dynamics::{SolverState, StepperKind};
use crate::energy::EnergyBreakdown;
use crate::spectral::{GridSpec, RealField};

/// Leading bytes of every field dump.
pub const FIELD_MAGIC: &[u8; 4] = b"OKF1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

/// Writes the 16-byte header and row-major samples.
pub fn write_field(path: &Path, f: &RealField) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(FIELD_MAGIC)?;
    w.write_all(&(f.grid.n() as u32).to_le_bytes())?;
    w.write_all(&f.grid.length().to_le_bytes())?;
    for v in &f.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<RealField, IoError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| IoError::Format("file shorter than its header".into()))?;
    if &magic != FIELD_MAGIC {
        return Err(IoError::Format(format!(
            "bad magic {magic:?}, expected {FIELD_MAGIC:?}"
        )));
    }
    let mut n_bytes = [0u8; 4];
    let mut l_bytes = [0u8; 8];
    r.read_exact(&mut n_bytes)
        .map_err(|_| IoError::Format("truncated header".into()))?;
    r.read_exact(&mut l_bytes)
        .map_err(|_| IoError::Format("truncated header".into()))?;
    let n = u32::from_le_bytes(n_bytes) as usize;
    let length = f64::from_le_bytes(l_bytes);
    let grid = GridSpec::new(n, length)
        .map_err(|e| IoError::Format(format!("invalid grid in header: {e}")))?;
    let mut values = vec![0.0f64; n * n];
    let mut buf = [0u8; 8];
    for v in values.iter_mut() {
        r.read_exact(&mut buf)
            .map_err(|_| IoError::Format("truncated sample data".into()))?;
        *v = f64::from_le_bytes(buf);
    }
    Ok(RealField { grid, values })
}

/// 8-bit binary PGM preview, `[min, max]` mapped linearly onto `[0, 255]`
/// (a constant field maps to 0).
pub fn write_pgm(path: &Path, f: &RealField) -> Result<(), IoError> {
    let n = f.grid.n();
    let (min, max) = f.min_max();
    let span = max - min;
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{n} {n}\n255\n")?;
    let bytes: Vec<u8> = f
        .values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - min) / span * 255.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    w.write_all(&bytes)?;
    w.flush()?;
    Ok(())
}

fn checkpoint_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = match base.extension().and_then(|e| e.to_str()) {
        Some("okf") | Some("meta") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    (stem.with_extension("okf"), stem.with_extension("meta"))
}

/// Field dump plus sibling metadata; `base` may carry either extension or
/// none.
pub fn write_checkpoint(base: &Path, state: &SolverState, seed: u64) -> Result<(), IoError> {
    let (field_path, meta_path) = checkpoint_paths(base);
    write_field(&field_path, &state.field)?;
    let mut w = BufWriter::new(File::create(meta_path)?);
    writeln!(w, "gamma={}", state.gamma)?;
    writeln!(w, "m={}", state.m)?;
    writeln!(w, "t={}", state.t)?;
    writeln!(w, "dt={}", state.dt)?;
    writeln!(w, "stepper={}", state.stepper)?;
    writeln!(w, "seed={seed}")?;
    w.flush()?;
    Ok(())
}

pub fn read_checkpoint(base: &Path) -> Result<(SolverState, u64), IoError> {
    let (field_path, meta_path) = checkpoint_paths(base);
    let field = read_field(&field_path)?;
    let kv = read_kv(&meta_path)?;
    let get = |key: &str| -> Result<&str, IoError> {
        kv.iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| IoError::Format(format!("missing key '{key}' in metadata")))
    };
    let parse_f64 = |key: &str| -> Result<f64, IoError> {
        get(key)?
            .parse()
            .map_err(|_| IoError::Format(format!("key '{key}' is not a float")))
    };
    let stepper: StepperKind = get("stepper")?
        .parse()
        .map_err(|e: String| IoError::Format(e))?;
    let seed: u64 = get("seed")?
        .parse()
        .map_err(|_| IoError::Format("key 'seed' is not an integer".into()))?;
    Ok((
        SolverState {
            field,
            t: parse_f64("t")?,
            dt: parse_f64("dt")?,
            gamma: parse_f64("gamma")?,
            m: parse_f64("m")?,
            stepper,
        },
        seed,
    ))
}

/// Energy trace CSV: `t,E_paper,E_diss,I1,I2,I3`.
pub fn write_energy_csv(path: &Path, rows: &[(f64, EnergyBreakdown)]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t,E_paper,E_diss,I1,I2,I3")?;
    for (t, e) in rows {
        writeln!(
            w,
            "{t},{},{},{},{},{}",
            e.e_paper, e.e_diss, e.i1, e.i2, e.i3
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Ordered `key=value` lines; blank lines and `#` comments are skipped.
pub fn read_kv(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let mut text = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| IoError::Format(format!("line {}: expected key=value", lineno + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn write_kv(path: &Path, pairs: &[(String, String)]) -> Result<(), IoError> {
    let mut w = BufWriter::new(File::create(path)?);
    for (k, v) in pairs {
        writeln!(w, "{k}={v}")?;
    }
    w.flush()?;
    Ok(())
}
