//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "trifault",
    version,
    about = "Three-phase fault detection and classification from voltage/current waveforms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze a waveform CSV: per-window shape/classification CSV plus a
    /// JSON summary.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic fault waveform CSV.
    Synth(SynthArgs),
    /// Bivector estimation error vs. operand angle, per noise level.
    StudyBivector(StudyBivectorArgs),
    /// Ellipse-fit error vs. available arc fraction, per noise level.
    StudyFit(StudyFitArgs),
    /// Classification accuracy and severity error over the full fault grid.
    Corpus(CorpusArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input CSV with header `t,va,vb,vc` or `t,va,vb,vc,ia,ib,ic`.
    #[arg(long)]
    pub input: PathBuf,
    /// Per-window output CSV for the voltage channels
    /// (default: `<input>.windows.csv`).
    #[arg(long)]
    pub windows_out: Option<PathBuf>,
    /// Per-window output CSV for the current channels, when present
    /// (default: `<input>.currents.windows.csv`).
    #[arg(long)]
    pub currents_out: Option<PathBuf>,
    /// JSON summary output (default: `<input>.summary.json`).
    #[arg(long)]
    pub summary_out: Option<PathBuf>,
    /// Fundamental frequency in Hz.
    #[arg(long, default_value_t = 50.0)]
    pub f0: f64,
    /// Sampling rate in Hz; inferred from the timestamps when omitted.
    #[arg(long)]
    pub fs: Option<f64>,
    /// Analysis window span as a fraction of one cycle.
    #[arg(long, default_value_t = 0.25)]
    pub window_fraction: f64,
    /// Samples between successive windows.
    #[arg(long, default_value_t = 1)]
    pub hop: usize,
    /// Collapsed-trajectory threshold on |sin(angle(x1, xn))|.
    #[arg(long, default_value_t = 1e-3)]
    pub degenerate_ratio: f64,
    /// Width of the optional moving-average smoother (0 disables).
    #[arg(long, default_value_t = 0)]
    pub smooth: usize,
    /// Normalize samples to per-unit by this peak amplitude on ingestion.
    #[arg(long)]
    pub pu: Option<f64>,
    /// Nominal phase RMS in analyzed units, for classification thresholds
    /// and severity bounds. Default: 1/sqrt(2), the per-unit value.
    #[arg(long)]
    pub rms: Option<f64>,
    /// Minimum bivector-component deviation to consider a ground fault.
    #[arg(long, default_value_t = 0.01)]
    pub ground_epsilon: f64,
    /// Relative radius drop separating a symmetric fault from health.
    #[arg(long, default_value_t = 0.01)]
    pub circle_tol: f64,
    /// Relative semi-axis difference below which an ellipse counts as a
    /// circle.
    #[arg(long, default_value_t = 0.05)]
    pub roundness_tol: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Fault label: none, AG, BG, CG, ABG, BCG, CAG, AB, BC, CA, ABC.
    #[arg(long, default_value = "none")]
    pub fault: String,
    /// Fault depth in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub severity: f64,
    /// Quadrature shift of the faulted pair in radians (0 = resistive).
    #[arg(long, default_value_t = 0.0)]
    pub phase_shift: f64,
    /// Fault onset in seconds.
    #[arg(long, default_value_t = 0.1)]
    pub fault_time: f64,
    /// Record length in seconds.
    #[arg(long, default_value_t = 0.28)]
    pub duration: f64,
    #[arg(long, default_value_t = 50.0)]
    pub f0: f64,
    #[arg(long, default_value_t = 10_000.0)]
    pub fs: f64,
    /// Peak phase amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Gaussian noise standard deviation as a fraction of the amplitude.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// RNG seed; falls back to $TRIFAULT_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyBivectorArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Noise levels as fractions of the amplitude.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.001, 0.01, 0.02, 0.05, 0.1])]
    pub noise: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StudyFitArgs {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.001, 0.01, 0.02, 0.05, 0.1])]
    pub noise: Vec<f64>,
    /// Arc fractions of a full cycle to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.05, 0.10, 0.25, 0.50, 0.75, 1.00])]
    pub fractions: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Noise levels to evaluate the grid under.
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.0, 0.01])]
    pub noise: Vec<f64>,
    /// Records per grid cell and noise level.
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Steady-state record length per trial, in seconds.
    #[arg(long, default_value_t = 0.06)]
    pub duration: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional CSV output; the table always prints to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// RNG seed resolution: flag, then `$TRIFAULT_SEED`, then 0.
pub fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("TRIFAULT_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(0)
}
