//! `drivesig`: driver identification from OBD-II style telematics CSV
//! logs. Subcommands cover the whole pipeline — synthetic data, split
//! preparation, training (sequence model and per-row baselines),
//! evaluation, corruption robustness sweeps, corrupted-data training,
//! architecture search, and single-window prediction.
//!
//! Every run is deterministic for a given `--seed` and writes metadata
//! sufficient to re-execute it. Exit codes: 0 success, 1 usage error,
//! 2 data error, 3 training error.

mod commands;
mod config;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::util::AppError;

#[derive(Parser)]
#[command(
    name = "drivesig",
    version,
    about = "Driver identification from OBD-II telematics windows",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Flags shared by every subcommand.
#[derive(Args)]
struct CommonOpts {
    /// RNG seed; falls back to $DRIVESIG_SEED, then 42.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap; 0 uses every core, 1 forces serial execution.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Key-value config file; command-line flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
}

/// How a raw CSV becomes scaled, windowed, chronologically split data.
#[derive(Args)]
struct DataOpts {
    /// Input CSV of per-timestep sensor rows.
    #[arg(long)]
    data: PathBuf,
    /// Column holding the driver identity label.
    #[arg(long, default_value = "driver_id")]
    label_col: String,
    /// Column separating trips; windows never span trips.
    #[arg(long)]
    trip_col: Option<String>,
    /// Rows per classification window.
    #[arg(long, default_value_t = 16)]
    window_length: usize,
    /// Fractional overlap between consecutive windows, in [0, 1).
    #[arg(long, default_value_t = 0.5)]
    overlap: f64,
    /// Chronological train fraction per driver.
    #[arg(long, default_value_t = 0.85)]
    train_frac: f64,
    /// Chronological validation fraction per driver.
    #[arg(long, default_value_t = 0.05)]
    val_frac: f64,
    /// Chronological test fraction per driver.
    #[arg(long, default_value_t = 0.10)]
    test_frac: f64,
    /// Fit the min-max scaler on all rows instead of the training split.
    #[arg(long)]
    scale_globally: bool,
}

/// Network hyperparameters (sequence model and per-row network).
#[derive(Args)]
struct NetOpts {
    /// Hidden layer widths, comma-separated (e.g. 160,200).
    #[arg(long, default_value = "160,200")]
    hidden: String,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 64)]
    batch_size: usize,
    #[arg(long, default_value_t = 200)]
    max_epochs: usize,
    /// Early-stop after this many epochs without validation improvement.
    #[arg(long, default_value_t = 10)]
    patience: usize,
    /// Global gradient-norm clip; absent means no clipping.
    #[arg(long)]
    clip_norm: Option<f64>,
}

/// Tree and forest hyperparameters.
#[derive(Args)]
struct TreeOpts {
    /// Depth limit for trees (and forest trees); absent means unlimited.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_samples_split: usize,
    /// Trees in the random forest.
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    /// Candidate features per forest split; absent means ceil(sqrt(d)).
    #[arg(long)]
    features_per_split: Option<usize>,
    /// Train forest trees on the full set instead of bootstrap resamples.
    #[arg(long)]
    no_bootstrap: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate deterministic synthetic multi-driver telemetry CSV.
    Synth {
        #[command(flatten)]
        common: CommonOpts,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Number of default driver profiles to include (2-5).
        #[arg(long, default_value_t = 5)]
        drivers: usize,
        /// Trips per driver.
        #[arg(long, default_value_t = 3)]
        trips: usize,
        /// Rows per trip (at least 480).
        #[arg(long, default_value_t = 2000)]
        rows_per_trip: usize,
    },
    /// Split a CSV chronologically and cache the raw train/val/test rows.
    Prepare {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        data: DataOpts,
        /// Directory for train.csv, val.csv, test.csv, and metadata.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Train one model kind and save it with its preprocessing bundle.
    Train {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        data: DataOpts,
        #[command(flatten)]
        net: NetOpts,
        #[command(flatten)]
        tree: TreeOpts,
        /// Model kind: lstm, tree, forest, or fcnn.
        #[arg(long)]
        model: String,
        /// Output model bundle path (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a saved model on every window of a CSV.
    Evaluate {
        #[command(flatten)]
        common: CommonOpts,
        /// Saved model bundle.
        #[arg(long)]
        model: PathBuf,
        /// CSV to evaluate; preprocessing comes from the bundle.
        #[arg(long)]
        data: PathBuf,
        /// Column holding the driver identity label.
        #[arg(long, default_value = "driver_id")]
        label_col: String,
        /// Column separating trips; windows never span trips.
        #[arg(long)]
        trip_col: Option<String>,
        /// Directory for metrics.csv, confusion.csv, and metadata.
        #[arg(long, default_value = "drivesig_out")]
        out_dir: PathBuf,
    },
    /// Sweep additive-noise corruption over saved models.
    SweepNoise {
        #[command(flatten)]
        common: CommonOpts,
        /// Saved model bundles; all must share preprocessing.
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        /// Clean CSV providing the evaluation windows.
        #[arg(long)]
        data: PathBuf,
        /// Column holding the driver identity label.
        #[arg(long, default_value = "driver_id")]
        label_col: String,
        /// Column separating trips; windows never span trips.
        #[arg(long)]
        trip_col: Option<String>,
        /// Swept axis: severity (sigma units) or level (probability).
        #[arg(long, default_value = "severity")]
        axis: String,
        /// Comma-separated grid; default 0..2 sigma in 0.25 steps.
        #[arg(long)]
        grid: Option<String>,
        /// Per-cell corruption probability when sweeping severity.
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        /// Noise scale in sigma units when sweeping level.
        #[arg(long, default_value_t = 1.0)]
        severity: f64,
        /// Evaluations per grid point.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value = "drivesig_out")]
        out_dir: PathBuf,
    },
    /// Sweep multiplicative-anomaly corruption over saved models.
    SweepAnomaly {
        #[command(flatten)]
        common: CommonOpts,
        /// Saved model bundles; all must share preprocessing.
        #[arg(long, num_args = 1.., required = true)]
        models: Vec<PathBuf>,
        /// Clean CSV providing the evaluation windows.
        #[arg(long)]
        data: PathBuf,
        /// Column holding the driver identity label.
        #[arg(long, default_value = "driver_id")]
        label_col: String,
        /// Column separating trips; windows never span trips.
        #[arg(long)]
        trip_col: Option<String>,
        /// Comma-separated rate grid; default 0..0.65 in six steps.
        #[arg(long)]
        grid: Option<String>,
        /// Fraction of cells (or rows) hit at each rate.
        #[arg(long, default_value_t = 0.40)]
        fraction: f64,
        /// Corrupt whole rows instead of individual cells.
        #[arg(long)]
        per_row: bool,
        /// Evaluations per grid point.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value = "drivesig_out")]
        out_dir: PathBuf,
    },
    /// Train every model kind on noise-corrupted data and compare them.
    TrainCorrupted {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        data: DataOpts,
        #[command(flatten)]
        net: NetOpts,
        #[command(flatten)]
        tree: TreeOpts,
        /// Per-cell corruption probability applied to every split.
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        /// Noise scale in clean-sigma units.
        #[arg(long, default_value_t = 1.0)]
        severity: f64,
        /// Corruption stream seed; defaults to the run seed.
        #[arg(long)]
        noise_seed: Option<u64>,
        /// Directory for the four bundles, comparison.csv, and metadata.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Grid-search hidden sizes and window lengths by validation F1.
    Search {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        data: DataOpts,
        #[command(flatten)]
        net: NetOpts,
        /// Semicolon-separated hidden-size candidates (e.g. "24;24,32").
        #[arg(long, default_value = "160,200")]
        hidden_grid: String,
        /// Comma-separated window lengths to try.
        #[arg(long, default_value = "4,8,16,32,64,120")]
        window_grid: String,
        /// Epoch cap per grid cell.
        #[arg(long, default_value_t = 25)]
        budget: usize,
        #[arg(long, default_value = "drivesig_out")]
        out_dir: PathBuf,
    },
    /// Classify one window sliced from a CSV (labels not required).
    Predict {
        #[command(flatten)]
        common: CommonOpts,
        /// Saved model bundle.
        #[arg(long)]
        model: PathBuf,
        /// CSV holding at least window-length consecutive rows of one trip.
        #[arg(long)]
        data: PathBuf,
        /// First row of the window (0-based, after the header).
        #[arg(long, default_value_t = 0)]
        offset: usize,
    },
}

fn main() -> ExitCode {
    // Die quietly when a stdout reader closes early (e.g. `| head`), like
    // other unix line tools, instead of panicking on the broken pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let argv: Vec<String> = std::env::args().collect();
    match run(&argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(argv: &[String]) -> Result<(), AppError> {
    let argv = match config::find_config_flag(argv) {
        Some(path) => {
            let sub = argv
                .get(1)
                .filter(|s| !s.starts_with('-'))
                .cloned()
                .ok_or_else(|| {
                    AppError::Usage("--config needs a subcommand to apply to".to_string())
                })?;
            let root = Cli::command();
            let extra = config::config_args(std::path::Path::new(&path), &root, &sub, &argv[2..])?;
            config::inject_config_args(argv, extra)
        }
        None => argv.to_vec(),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(AppError::Usage(e.to_string())),
    };
    match cli.command {
        Cmd::Synth {
            common,
            out,
            drivers,
            trips,
            rows_per_trip,
        } => commands::synth::run(&common, &out, drivers, trips, rows_per_trip),
        Cmd::Prepare {
            common,
            data,
            out_dir,
        } => commands::prepare::run(&common, &data, &out_dir),
        Cmd::Train {
            common,
            data,
            net,
            tree,
            model,
            out,
        } => commands::train::run(&common, &data, &net, &tree, &model, &out),
        Cmd::Evaluate {
            common,
            model,
            data,
            label_col,
            trip_col,
            out_dir,
        } => commands::evaluate::run(&common, &model, &data, &label_col, trip_col.as_deref(), &out_dir),
        Cmd::SweepNoise {
            common,
            models,
            data,
            label_col,
            trip_col,
            axis,
            grid,
            level,
            severity,
            repeats,
            out_dir,
        } => commands::sweep::run_noise(
            &common,
            &models,
            &data,
            &label_col,
            trip_col.as_deref(),
            &axis,
            grid.as_deref(),
            level,
            severity,
            repeats,
            &out_dir,
        ),
        Cmd::SweepAnomaly {
            common,
            models,
            data,
            label_col,
            trip_col,
            grid,
            fraction,
            per_row,
            repeats,
            out_dir,
        } => commands::sweep::run_anomaly(
            &common,
            &models,
            &data,
            &label_col,
            trip_col.as_deref(),
            grid.as_deref(),
            fraction,
            per_row,
            repeats,
            &out_dir,
        ),
        Cmd::TrainCorrupted {
            common,
            data,
            net,
            tree,
            level,
            severity,
            noise_seed,
            out_dir,
        } => commands::corrupted::run(
            &common, &data, &net, &tree, level, severity, noise_seed, &out_dir,
        ),
        Cmd::Search {
            common,
            data,
            net,
            hidden_grid,
            window_grid,
            budget,
            out_dir,
        } => commands::search::run(&common, &data, &net, &hidden_grid, &window_grid, budget, &out_dir),
        Cmd::Predict {
            common,
            model,
            data,
            offset,
        } => commands::predict::run(&common, &model, &data, offset),
    }
}
