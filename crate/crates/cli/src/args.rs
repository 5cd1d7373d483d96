use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Sum statistics of i.i.d. alpha-mu envelopes: series PDF/CDF with certified
/// truncation bounds, EGC/MRC error rates, and oracle cross-checks.
#[derive(Parser, Debug)]
#[command(name = "alphamu", version, args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Density of the sum at one point or over a sweep.
    Pdf(DensityArgs),
    /// Distribution function of the sum at one point or over a sweep.
    Cdf(DensityArgs),
    /// Regenerate the six-row accuracy table.
    AccuracyTable(AccuracyArgs),
    /// Average symbol error rate against SNR per symbol.
    Aser(LinkArgs),
    /// Outage probability against SNR per symbol.
    Op(LinkArgs),
    /// Cross-check series, convolution and Monte Carlo.
    Validate(ValidateArgs),
    /// Time cached-table sweeps across branch counts.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write to this file (atomically) instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Flat key=value file of flag values; flags on the command line win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Pdf,
    Cdf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combiner {
    Egc,
    Mrc,
}

#[derive(Args, Debug, Clone)]
pub struct Params {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub rhat: Option<f64>,

    /// Number of branches.
    #[arg(long = "L", allow_hyphen_values = true)]
    pub l: Option<i64>,
}

#[derive(Args, Debug)]
pub struct DensityArgs {
    #[command(flatten)]
    pub params: Params,

    /// Single evaluation point.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["r_min", "r_max"])]
    pub r: Option<f64>,

    #[arg(long, allow_hyphen_values = true, requires = "r_max")]
    pub r_min: Option<f64>,

    #[arg(long, allow_hyphen_values = true, requires = "r_min")]
    pub r_max: Option<f64>,

    /// Sweep points, endpoints included.
    #[arg(long, default_value_t = 100)]
    pub points: usize,

    /// Absolute accuracy certified by the truncation bound.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Term cap of the series.
    #[arg(long, default_value_t = 500)]
    pub nt_max: usize,

    /// Figure sweep: fig1..fig3 for pdf, fig4..fig6 for cdf.
    #[arg(long)]
    pub preset: Option<String>,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct AccuracyArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,

    /// Target that fixes N_T.
    #[arg(long, default_value_t = 1e-10)]
    pub target: f64,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct LinkArgs {
    #[command(flatten)]
    pub params: Params,

    #[arg(long, value_enum)]
    pub combiner: Option<Combiner>,

    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub snr_db_min: f64,

    #[arg(long, default_value_t = 40.0, allow_hyphen_values = true)]
    pub snr_db_max: f64,

    #[arg(long, default_value_t = 2.0)]
    pub snr_db_step: f64,

    /// Modulation constant: a number or bpsk, orthogonal-bpsk, min-correlation-bpsk.
    #[arg(long = "G", default_value = "bpsk")]
    pub g: String,

    /// Outage threshold in dB (op only).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_out_db: Option<f64>,

    /// Fill the asymptotic column.
    #[arg(long)]
    pub asymptotic: bool,

    /// Absolute accuracy of each value.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,

    /// Figure sweep: fig7..fig9 for aser, fig10..fig12 for op.
    #[arg(long)]
    pub preset: Option<String>,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub params: Params,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,

    /// Convolution lattice points.
    #[arg(long, default_value_t = 16384)]
    pub grid: usize,

    #[command(flatten)]
    pub out: Output,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub params: Params,

    /// Branch counts to time.
    #[arg(long = "L-list", value_delimiter = ',', default_value = "2,5,10,25,50")]
    pub l_list: Vec<u32>,

    /// Points per sweep.
    #[arg(long, default_value_t = 100)]
    pub points: usize,

    /// Repetitions per sweep; the minimum is reported.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,

    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,

    #[command(flatten)]
    pub out: Output,
}
