//! `metricgeo`: batch front-end for the metricgeo toolkit.
//!
//! Exit status: 0 when every check passes, 2 when a violation or failure
//! witness is found, 1 on input errors.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "metricgeo", version, about = "Metric-geometry diagnostics on finite metric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized test-function families.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// JSON space description.
    #[arg(long)]
    pub space: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct FieldArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Field name in the space file, or a JSON file of values.
    #[arg(long)]
    pub field: String,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check nonnegativity, symmetry and the triangle inequality.
    VerifyMetric {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = metricgeo::metric::DEFAULT_METRIC_TOL)]
        tol: f64,
    },
    /// Pointwise Lip estimates over a scale schedule.
    Lip {
        #[command(flatten)]
        field: FieldArgs,
        /// Geometric schedule `r0:ratio:rmin`.
        #[arg(long)]
        schedule: Option<String>,
    },
    /// Membership in D, LIP and LIP_loc at the finest scale.
    Classify {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        threshold: f64,
    },
    /// Epsilon-chains: quasi-length and quasi-convexity tables.
    Chains {
        #[command(flatten)]
        space: SpaceArgs,
        /// Point pairs `x:y,x:y`; default the first and last point.
        #[arg(long)]
        pairs: Option<String>,
        /// Comma-separated epsilons; default 4 and 2 times the resolution.
        #[arg(long)]
        eps: Option<String>,
        /// Step bound for quasi-convexity walks on non-graph spaces.
        #[arg(long)]
        resolution: Option<f64>,
    },
    /// p-modulus of a curve family on a weighted graph.
    Modulus {
        #[arg(long)]
        instance: PathBuf,
        /// Overrides the exponent of the instance: 1, 2 or inf.
        #[arg(long)]
        p: Option<String>,
        /// Overrides the duality-gap tolerance of the instance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Gradients, seminorms, doubling and Poincaré estimates.
    #[command(subcommand)]
    Sobolev(SobolevCommand),
    /// Example spaces: list them, emit samples and check their facts.
    Corpus(CorpusArgs),
}

#[derive(Subcommand, Debug)]
pub enum SobolevCommand {
    /// Minimal Hajłasz gradient for p in {1, 2, inf}.
    Hajlasz {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value = "inf")]
        p: String,
    },
    /// Check |f(start) - f(end)| <= int g + tol along curves.
    UpperGradient {
        #[command(flatten)]
        field: FieldArgs,
        /// JSON array of point-index sequences.
        #[arg(long)]
        curves: PathBuf,
        /// Density file; default the minimal edge gradient (graph spaces).
        #[arg(long)]
        gradient: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// Discrete Newtonian sup-seminorm, per connected component.
    Newtonian {
        #[command(flatten)]
        field: FieldArgs,
        /// Epsilon-graph step bound for non-graph spaces.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Doubling constant of the counting measure.
    Doubling {
        #[command(flatten)]
        space: SpaceArgs,
        /// Comma-separated radii; default diameter / 2^k, k = 2..7.
        #[arg(long)]
        radii: Option<String>,
        /// Comma-separated centers; default every point.
        #[arg(long)]
        centers: Option<String>,
    },
    /// Weak (1, p)-Poincaré constant over sampled balls and test functions.
    Poincare {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        radii: Option<String>,
        #[arg(long)]
        centers: Option<String>,
        /// Number of random smooth test functions.
        #[arg(long, default_value_t = 20)]
        random: usize,
        /// Gradient-graph step bound for non-graph spaces.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Compare the Newtonian, sup-Lip, LIP and Hajłasz seminorms.
    Chain {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        schedule: Option<String>,
        #[arg(long)]
        eps: Option<f64>,
    },
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Space to build; lists the available spaces when omitted.
    #[arg(long)]
    pub name: Option<String>,
    /// Size: intervals (halfline), arms (comb) or discs (ball_sequence).
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Sampling density of the chosen space.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Smallest cusp parameter.
    #[arg(long)]
    pub t_min: Option<f64>,
    /// Write the sampled space (with its fields) to this file.
    #[arg(long)]
    pub emit: Option<PathBuf>,
}

fn configure_threads() {
    if let Some(n) = std::env::var("METRICGEO_THREADS").ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        if n > 0 {
            // fails only if a pool already exists
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    configure_threads();
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.write(cli.common.format, cli.common.out.as_deref()) {
        eprintln!("error: writing the report: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(if report.failed { 2 } else { 0 })
}
