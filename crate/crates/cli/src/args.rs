use std::path::PathBuf;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "atslab",
    version,
    about = "ATS option model toolkit: pricing, calibration and skew-scaling tests"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    /// Normal inverse Gaussian, alpha = 1/2
    Nig,
    /// Variance gamma, alpha = 0
    Vg,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModelArgs {
    /// Stability index in [0, 1)
    #[arg(long, conflicts_with = "model")]
    pub alpha: Option<f64>,

    /// Named model, shorthand for --alpha
    #[arg(long, value_enum)]
    pub model: Option<Model>,
}

impl ModelArgs {
    /// Explicit choice, if any.
    pub fn chosen(&self) -> Option<f64> {
        match (self.alpha, self.model) {
            (Some(a), _) => Some(a),
            (None, Some(Model::Nig)) => Some(0.5),
            (None, Some(Model::Vg)) => Some(0.0),
            (None, None) => None,
        }
    }

    pub fn alpha_or(&self, default: f64) -> f64 {
        self.chosen().unwrap_or(default)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic quote file from power-law parameter curves
    GenSynthetic {
        /// Synthetic configuration JSON; missing fields take defaults
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Quotes CSV
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth model JSON [default: <out> with extension truth.json]
        #[arg(long)]
        truth_out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Scaling exponent of the skew parameter
        #[arg(long, allow_hyphen_values = true)]
        delta: Option<f64>,
        /// IV noise standard deviation in basis points
        #[arg(long)]
        noise_bps: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Calibrate every trade date of a quote file
    Calibrate {
        /// Quotes CSV
        #[arg(long = "in")]
        input: PathBuf,
        /// Fits JSON
        #[arg(long)]
        out: PathBuf,
        /// Share one eta across maturities
        #[arg(long)]
        constant_eta: bool,
        /// Relative cost decrease at which the optimizer stops
        #[arg(long)]
        tol: Option<f64>,
        /// Dataset label [default: input file stem]
        #[arg(long)]
        dataset: Option<String>,
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Test for time scaling of the calibrated skew parameter
    TestEta {
        /// Fits JSON from `calibrate`
        #[arg(long = "in")]
        input: PathBuf,
        /// Report JSON
        #[arg(long)]
        out: PathBuf,
        /// Unweighted regression
        #[arg(long)]
        equal_weights: bool,
        /// Regression data CSV for one date
        #[arg(long)]
        regression_csv: Option<PathBuf>,
        /// Regression plot SVG for one date
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Date of the CSV and SVG outputs [default: first date]
        #[arg(long)]
        date: Option<NaiveDate>,
    },

    /// Summarize test-eta reports into mean and maximum p-values
    Aggregate {
        /// Directory of test-eta report JSON files
        #[arg(long = "in")]
        input: PathBuf,
        /// Summary CSV
        #[arg(long)]
        out: PathBuf,
        /// Full summary JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },

    /// Price European calls and puts by Fourier inversion
    Price {
        /// Model JSON [default: synthetic ground truth on the default grid]
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Prices CSV
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        market: MarketArgs,
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Compare Fourier prices against Monte Carlo
    McCheck {
        /// Model JSON [default: synthetic ground truth on the default grid]
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Comparison JSON
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        market: MarketArgs,
        /// Number of draws per maturity
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Analytic checks of the subordinator and representability
    Lab {
        /// Parameter curves JSON [default: synthetic ground truth]
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Report JSON
        #[arg(long)]
        out: PathBuf,
        /// Relative eta spread tolerated as constant
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        model: ModelArgs,
    },

    /// Market versus free and constant-eta model implied volatilities
    SmileReport {
        /// Quotes CSV
        #[arg(long = "in")]
        input: PathBuf,
        /// Free fits JSON from `calibrate`
        #[arg(long)]
        fits: PathBuf,
        /// Constant-eta fits JSON from `calibrate --constant-eta`
        #[arg(long)]
        constant_fits: PathBuf,
        /// Per-quote CSV
        #[arg(long)]
        out: PathBuf,
        /// Per-maturity MSE CSV [default: <out> with extension mse.csv]
        #[arg(long)]
        mse_out: Option<PathBuf>,
        /// Trade date [default: first date]
        #[arg(long)]
        date: Option<NaiveDate>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct MarketArgs {
    /// Comma-separated strikes [default: 80,90,100,110,120 % of the forward]
    #[arg(long, value_delimiter = ',')]
    pub strikes: Vec<f64>,
    /// Maturities to price [default: every model maturity]
    #[arg(long, value_delimiter = ',')]
    pub maturities: Vec<f64>,
    #[arg(long, default_value_t = 100.0)]
    pub forward: f64,
    #[arg(long, default_value_t = 1.0)]
    pub discount: f64,
}
