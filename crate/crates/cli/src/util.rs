//! Shared plumbing: error-to-exit-code mapping, seed resolution, file
//! digests, deterministic metadata files, and small flag parsers.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use drivesig::baselines::BaselineError;
use drivesig::corruption::CorruptionError;
use drivesig::data::DataError;
use drivesig::eval::EvalError;
use drivesig::model::ModelError;
use drivesig::synth::SynthError;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit code 1: bad flags/config. 2: unreadable or unusable data/model
/// files. 3: training failed (divergence, empty split).
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Data(String),
    Training(String),
}

impl AppError {
    pub fn code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Data(_) => 2,
            AppError::Training(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) | AppError::Training(m) => m,
        }
    }
}

impl From<DataError> for AppError {
    fn from(e: DataError) -> Self {
        AppError::Data(e.to_string())
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidConfig(_) => AppError::Usage(e.to_string()),
            ModelError::Divergence { .. }
            | ModelError::EmptyTrainingSet
            | ModelError::EmptyValidationSet => AppError::Training(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<BaselineError> for AppError {
    fn from(e: BaselineError) -> Self {
        match e {
            BaselineError::InvalidConfig(_) => AppError::Usage(e.to_string()),
            BaselineError::Divergence { .. }
            | BaselineError::EmptyTrainingSet
            | BaselineError::EmptyValidationSet => AppError::Training(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<SynthError> for AppError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::TooFewProfiles { .. }
            | SynthError::NoFeatures
            | SynthError::NoTrips
            | SynthError::TripTooShort { .. } => AppError::Usage(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<CorruptionError> for AppError {
    fn from(e: CorruptionError) -> Self {
        match e {
            CorruptionError::InvalidSpec { .. } => AppError::Usage(e.to_string()),
            CorruptionError::MissingStats { .. } => AppError::Data(e.to_string()),
        }
    }
}

impl From<EvalError> for AppError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::EmptyGrid | EvalError::NoModels | EvalError::NoRepeats => {
                AppError::Usage(e.to_string())
            }
            EvalError::Model(m) => m.into(),
            EvalError::Baseline(b) => b.into(),
            EvalError::Data(d) => d.into(),
            EvalError::Corruption(c) => c.into(),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

/// Seed precedence: `--seed` flag, then `DRIVESIG_SEED`, then 42.
pub fn resolve_seed(flag: Option<u64>) -> Result<u64, AppError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("DRIVESIG_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            AppError::Usage(format!(
                "DRIVESIG_SEED must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(_) => Ok(42),
    }
}

/// Builds the global thread pool when `--jobs` is nonzero. Call once,
/// before any parallel work.
pub fn configure_jobs(jobs: usize) -> Result<(), AppError> {
    if jobs == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build_global()
        .map_err(|e| AppError::Usage(format!("cannot configure {jobs} worker threads: {e}")))
}

pub fn sha256_file(path: &Path) -> Result<String, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn write_text(path: &Path, contents: &str) -> Result<(), AppError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| AppError::Data(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| AppError::Data(format!("cannot write {}: {e}", path.display())))
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    tool_version: &'a str,
    command: &'a str,
    flags: &'a BTreeMap<String, String>,
    input_digests: &'a BTreeMap<String, String>,
    outputs: &'a [String],
}

/// Writes the deterministic run-metadata JSON that makes a run
/// re-executable: tool version, resolved flags, input digests, and the
/// produced files. No timestamps, so reruns are byte-identical.
pub fn write_run_metadata(
    path: &Path,
    command: &str,
    flags: &BTreeMap<String, String>,
    input_digests: &BTreeMap<String, String>,
    outputs: &[String],
) -> Result<(), AppError> {
    let meta = RunMetadata {
        tool_version: TOOL_VERSION,
        command,
        flags,
        input_digests,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&meta)
        .map_err(|e| AppError::Data(format!("cannot serialize run metadata: {e}")))?;
    text.push('\n');
    write_text(path, &text)
}

/// Model display name for sweep outputs: the bundle file's stem.
pub fn model_name_from_path(path: &Path) -> Result<String, AppError> {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .filter(|s| !s.is_empty())
        .ok_or_else(|| {
            AppError::Usage(format!(
                "cannot derive a model name from {}",
                path.display()
            ))
        })
}

/// Parses a comma-separated list of numbers, e.g. "0,0.25,0.5".
pub fn parse_f64_list(raw: &str) -> Result<Vec<f64>, String> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number {:?} in list {raw:?}", s.trim()))
        })
        .collect()
}

/// Parses comma-separated layer widths, e.g. "160,200".
pub fn parse_usize_list(raw: &str) -> Result<Vec<usize>, String> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| format!("invalid integer {:?} in list {raw:?}", s.trim()))
        })
        .collect()
}

/// Parses semicolon-separated hidden-size candidates, e.g. "24;24,32".
pub fn parse_hidden_grid(raw: &str) -> Result<Vec<Vec<usize>>, String> {
    raw.split(';').map(parse_usize_list).collect()
}

/// Joins layer widths for display/CSV, e.g. `[24, 32]` -> "24x32".
pub fn format_hidden(sizes: &[usize]) -> String {
    sizes
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join("x")
}
