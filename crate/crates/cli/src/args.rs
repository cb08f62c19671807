use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Secular dynamics of the lunar three-body problem.
#[derive(Debug, Parser)]
#[command(name = "lunar3b", version, about)]
pub struct Cli {
    /// Write the main output here instead of stdout (`-` is stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized initial anomalies.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Relative tolerance of the mean-anomaly quadrature.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// JSON file with parameters; explicit flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Region of the (α̂, β̂) parameter plane.
    Classify(LzArgs),
    /// Critical points of W with their Morse data.
    Singularities(LzArgs),
    /// Level curves, separatrix and singularities of W.
    Portrait(PortraitArgs),
    /// Actions, frequencies and torsion along one branch of tori.
    Freqmap(FreqmapArgs),
    /// Frequencies of the elliptic torus through B.
    EllipticTorus(LzArgs),
    /// Double average of the perturbing function and its quadrupolar part.
    Average(AverageArgs),
    /// Symplectic integration of the full three-body problem.
    Integrate(IntegrateArgs),
    /// Full-problem run started from a chosen place in the quadrupolar portrait.
    DemoKozai(KozaiArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Classify(_) => "classify",
            Command::Singularities(_) => "singularities",
            Command::Portrait(_) => "portrait",
            Command::Freqmap(_) => "freqmap",
            Command::EllipticTorus(_) => "elliptic-torus",
            Command::Average(_) => "average",
            Command::Integrate(_) => "integrate",
            Command::DemoKozai(_) => "demo-kozai",
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct LzArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_hat: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta_hat: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct PortraitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lz: LzArgs,
    /// Grid cells per side used for contouring.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of level curves, or `auto`.
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct FreqmapArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub lz: LzArgs,
    /// libration, circ-min or circ-max.
    #[arg(long)]
    pub branch: Option<String>,
    /// Number of tori sampled across the branch.
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct OrbitArgs {
    /// Masses m0,m1,m2.
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    /// Inner orbit a,e,i,l,g,h (angles in radians).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub elements1: Option<Vec<f64>>,
    /// Outer orbit a,e,i,l,g,h (angles in radians).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub elements2: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct AverageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub orbits: OrbitArgs,
    /// Initial trapezoid nodes per mean anomaly.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Ratios a1/a2 for the residual scaling fit.
    #[arg(long, value_delimiter = ',')]
    pub alpha_list: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct IntegrateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub orbits: OrbitArgs,
    /// Length of the run in inner orbital periods.
    #[arg(long)]
    pub periods: Option<f64>,
    #[arg(long)]
    pub steps_per_period: Option<usize>,
    /// Keep every n-th step.
    #[arg(long)]
    pub sample_every: Option<usize>,
    /// second or fourth.
    #[arg(long)]
    pub order: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct KozaiArgs {
    /// Semi-major-axis ratio a1/a2.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub masses: Option<Vec<f64>>,
    /// Length of the run in outer orbital periods.
    #[arg(long)]
    pub periods: Option<f64>,
    #[arg(long)]
    pub e2: Option<f64>,
    #[arg(long)]
    pub inclination_deg: Option<f64>,
    /// libration or circulation.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub level_fraction: Option<f64>,
    #[arg(long)]
    pub steps_per_inner_period: Option<usize>,
    /// Write the summary JSON here instead of stdout.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Keep every n-th sample (one per inner period) in the trajectory CSV.
    #[arg(long)]
    pub csv_every: Option<usize>,
}
