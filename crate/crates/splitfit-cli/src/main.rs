//! splitfit: sample-splitting goodness-of-fit diagnostics for time series.
//!
//! Subcommands: simulate, fit, diagnose, calibrate, experiment. Exit codes:
//! 0 success, 2 usage or validation problem, 3 numerical failure.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use splitfit::Error;

#[derive(Parser)]
#[command(
    name = "splitfit",
    version,
    about = "Sample-splitting goodness-of-fit diagnostics for ARMA/GARCH time series"
)]
struct Cli {
    /// Worker threads for Monte Carlo commands (0 = all cores). Overrides
    /// the SPLITFIT_THREADS environment variable.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a series and write it as single-column CSV.
    Simulate(SimulateArgs),
    /// Fit a model to a series and print the estimate as JSON.
    Fit(FitArgs),
    /// Split-based residual diagnostics on one series.
    Diagnose(DiagnoseArgs),
    /// Simulate null quantiles of the ADCF statistics.
    Calibrate(CalibrateArgs),
    /// Run a declarative Monte Carlo experiment.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Model family: ar | ma | arma | garch | ar-garch.
    #[arg(long)]
    pub model: String,
    /// AR coefficients (comma separated), e.g. --phi 0.8,0.1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Vec<f64>,
    /// MA coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Vec<f64>,
    /// GARCH intercept (omega > 0).
    #[arg(long)]
    pub omega: Option<f64>,
    /// GARCH ARCH coefficients.
    #[arg(long, value_delimiter = ',')]
    pub alpha: Vec<f64>,
    /// GARCH persistence coefficients.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Innovation family: gaussian | laplace | student_t.
    #[arg(long, default_value = "gaussian")]
    pub noise: String,
    /// Innovation variance (sigma^2).
    #[arg(long, default_value_t = 1.0)]
    pub variance: f64,
    /// Degrees of freedom for student_t noise (> 4).
    #[arg(long)]
    pub df: Option<f64>,
    /// Series length.
    #[arg(long)]
    pub n: usize,
    /// Discarded warm-up steps (default: model-dependent).
    #[arg(long)]
    pub burn_in: Option<usize>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV path.
    #[arg(long)]
    pub out: std::path::PathBuf,
    /// Optional JSON sidecar with the simulation truth.
    #[arg(long)]
    pub truth_out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Input series CSV (header "x").
    #[arg(long = "in")]
    pub input: std::path::PathBuf,
    /// Model spec: ar:p | arma:p,q | garch:p,q.
    #[arg(long)]
    pub model: String,
    /// Write the fit JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct DiagnoseArgs {
    /// Input series CSV (header "x").
    #[arg(long = "in")]
    pub input: std::path::PathBuf,
    /// Model spec: ar:p | arma:p,q | garch:p,q.
    #[arg(long)]
    pub model: String,
    /// Split: "half" | "full" | "f,l" (e.g. 500,1000).
    #[arg(long, default_value = "half")]
    pub split: String,
    /// Statistics: acf, acf2, adcf, q_acf, q_acf2, q_adcf, q_lb.
    #[arg(long, value_delimiter = ',', default_value = "acf,q_acf")]
    pub stats: Vec<String>,
    /// Test lags (tables run to the maximum).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub lags: Vec<usize>,
    /// ADCF weight variances "s_var,t_var".
    #[arg(long, default_value = "0.5,0.5")]
    pub weight: String,
    /// Q_ADCF critical values as h=value pairs, e.g. 2=7.84,5=14.2.
    #[arg(long, value_delimiter = ',')]
    pub crit: Vec<String>,
    /// JSON quantile table produced by `calibrate`.
    #[arg(long)]
    pub crit_file: Option<std::path::PathBuf>,
    /// Report format when --out is given: csv | json.
    #[arg(long, default_value = "csv")]
    pub format: String,
    /// Output path prefix for report files.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Ljung-Box degrees-of-freedom reduction (df = h - adjust).
    #[arg(long, default_value_t = 1)]
    pub lb_df_adjust: usize,
}

#[derive(Args)]
pub struct CalibrateArgs {
    /// Calibration config JSON.
    #[arg(long)]
    pub config: std::path::PathBuf,
    /// Write the quantile table here instead of stdout.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct ExperimentArgs {
    /// Experiment config JSON (repeat for several studies in one output).
    #[arg(long, required = true, num_args = 1..)]
    pub config: Vec<std::path::PathBuf>,
    /// Output path prefix.
    #[arg(long)]
    pub out: std::path::PathBuf,
    /// Output format: csv | json | both.
    #[arg(long, default_value = "both")]
    pub format: String,
    /// Study size: desk (as configured) | full (paper scale).
    #[arg(long, default_value = "desk")]
    pub scale: String,
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidParameter(_)
        | Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::Io(_) => 2,
        Error::Estimation(_) | Error::Numeric(_) | Error::DegenerateInput(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| {
            std::env::var("SPLITFIT_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);

    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Fit(args) => commands::fit(args),
        Command::Diagnose(args) => commands::diagnose(args, workers),
        Command::Calibrate(args) => commands::calibrate(args, workers),
        Command::Experiment(args) => commands::experiment(args, workers),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
