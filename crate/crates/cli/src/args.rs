//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rgbiw::inference::{FitConfig, Reparam};
use rgbiw::series::{DivergencePolicy, SeriesControl};
use rgbiw::{Params, Seed, SubModel};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "rgbiw",
    version,
    about = "Fit and evaluate the rGB1-IWei lifetime distribution"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, default_value_t = 20_240_601)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Maximum-likelihood fit, optionally compared with a nested sub-model.
    Fit {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Model::Full)]
        model: Model,
        /// Nested model to test against with AIC, KS and the LR test.
        #[arg(long, value_enum)]
        compare: Option<Model>,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// Log-likelihood, AIC and KS test at given parameters.
    Gof {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Model::Full)]
        model: Model,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Seeded inverse-transform draws.
    Sample {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        params: ParamArgs,
    },
    Quantile {
        /// Probabilities, comma separated or repeated.
        #[arg(long, required = true, num_args = 1.., value_delimiter = ',')]
        q: Vec<f64>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Raw moments up to an order, with skewness and kurtosis when they exist.
    Moments {
        #[arg(long, default_value_t = 4)]
        max_order: u32,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Rényi entropies on a grid of orders and the Shannon entropy.
    Entropy {
        #[arg(long, num_args = 1.., value_delimiter = ',', default_values_t = [0.5, 2.0])]
        rho: Vec<f64>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Stress-strength reliability P(Y < X).
    Reliability {
        /// Strength X.
        #[command(flatten)]
        params: ParamArgs,
        /// Stress Y.
        #[command(flatten)]
        stress: StressArgs,
        #[command(flatten)]
        series: SeriesArgs,
    },
    /// Empirical and fitted scaled total-time-on-test curves.
    Ttt {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, value_enum, default_value_t = Model::Full)]
        model: Model,
        #[arg(long, default_value_t = 100)]
        grid: usize,
        /// Use the given parameters for the fitted curve instead of fitting.
        #[arg(long)]
        at_params: bool,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        optim: OptimArgs,
    },
    /// pdf, cdf and hazard on a grid of x values.
    Table {
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        /// Space the grid evenly in ln x.
        #[arg(long)]
        log_grid: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Fit { .. } => "fit",
            Command::Gof { .. } => "gof",
            Command::Sample { .. } => "sample",
            Command::Quantile { .. } => "quantile",
            Command::Moments { .. } => "moments",
            Command::Entropy { .. } => "entropy",
            Command::Reliability { .. } => "reliability",
            Command::Ttt { .. } => "ttt",
            Command::Table { .. } => "table",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Full,
    Iwei,
    BetaIwei,
    ExpgenIwei,
}

impl From<Model> for SubModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Full => SubModel::Full,
            Model::Iwei => SubModel::IWei,
            Model::BetaIwei => SubModel::BetaIWei,
            Model::ExpgenIwei => SubModel::ExpGenIWei,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Observation file: numbers separated by whitespace, `#` comments.
    #[arg(long)]
    pub data: PathBuf,
    /// Divide every observation by this value.
    #[arg(long)]
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub theta: f64,
}

impl ParamArgs {
    pub fn params(&self) -> rgbiw::Result<Params> {
        Params::new(self.a, self.b, self.c, self.gamma, self.theta)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct StressArgs {
    #[arg(long = "y-a", id = "y_a", default_value_t = 1.0)]
    pub a: f64,
    #[arg(long = "y-b", id = "y_b", default_value_t = 1.0)]
    pub b: f64,
    #[arg(long = "y-c", id = "y_c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long = "y-gamma", id = "y_gamma", default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long = "y-theta", id = "y_theta", default_value_t = 1.0)]
    pub theta: f64,
}

impl StressArgs {
    pub fn params(&self) -> rgbiw::Result<Params> {
        Params::new(self.a, self.b, self.c, self.gamma, self.theta)
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SeriesArgs {
    /// Relative size below which series terms count as negligible.
    #[arg(long, default_value_t = 1e-10)]
    pub series_rel_tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_terms: usize,
    /// Fail instead of falling back to quadrature when a series does not converge.
    #[arg(long)]
    pub strict: bool,
}

impl SeriesArgs {
    pub fn control(&self) -> SeriesControl {
        SeriesControl {
            rel_tol: self.series_rel_tol,
            max_terms_per_index: self.max_terms,
            on_divergence: if self.strict {
                DivergencePolicy::Error
            } else {
                DivergencePolicy::FallbackQuadrature
            },
            ..SeriesControl::default()
        }
    }
}

#[derive(Debug, Clone, Copy, Args)]
pub struct OptimArgs {
    /// Latin-hypercube starts.
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, value_enum, default_value_t = ReparamArg::Log)]
    pub reparam: ReparamArg,
    /// Search box |ln p| <= bound on every free parameter.
    #[arg(long, default_value_t = 25.0)]
    pub log_bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReparamArg {
    Log,
    Softplus,
}

impl OptimArgs {
    pub fn config(&self, seed: u64) -> FitConfig {
        FitConfig {
            n_starts: self.starts,
            reparam: match self.reparam {
                ReparamArg::Log => Reparam::Log,
                ReparamArg::Softplus => Reparam::Softplus,
            },
            log_bound: self.log_bound,
            seed: Seed(seed),
            ..FitConfig::default()
        }
    }
}
