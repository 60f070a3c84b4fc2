use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::Method;

/// Aggregated symbol error rate of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SerRecord {
    pub method: Method,
    pub snr_db: f64,
    pub n_symbols: usize,
    pub n_pilots: usize,
    /// Devices that contributed (diverged devices are excluded).
    pub devices: usize,
    /// Symbols evaluated.
    pub symbols: u64,
    pub errors: u64,
    pub ser: f64,
    /// Binomial standard error `√(ser(1−ser)/symbols)`.
    pub stderr: f64,
    pub seed: u64,
}

impl SerRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        method: Method,
        snr_db: f64,
        n_symbols: usize,
        n_pilots: usize,
        devices: usize,
        symbols: u64,
        errors: u64,
        seed: u64,
    ) -> Self {
        let (ser, stderr) = if symbols == 0 {
            (0.0, 0.0)
        } else {
            let ser = errors as f64 / symbols as f64;
            (ser, (ser * (1.0 - ser) / symbols as f64).sqrt())
        };
        SerRecord {
            method,
            snr_db,
            n_symbols,
            n_pilots,
            devices,
            symbols,
            errors,
            ser,
            stderr,
            seed,
        }
    }
}

pub const HEADER: [&str; 10] = [
    "method",
    "snr_db",
    "n_symbols",
    "n_pilots",
    "devices",
    "symbols",
    "errors",
    "ser",
    "stderr",
    "seed",
];

/// Writes records as CSV with a header row, LF line endings.
pub fn write_results(records: &[SerRecord], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file);
    w.write_record(HEADER)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<Vec<SerRecord>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != HEADER {
        return Err(Error::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize()
        .map(|row| row.map_err(Error::from))
        .collect()
}

/// `results.csv` → `results_holdout.csv`.
pub fn holdout_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    let name = match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => format!("{stem}_holdout.{ext}"),
        None => format!("{stem}_holdout"),
    };
    out.with_file_name(name)
}
