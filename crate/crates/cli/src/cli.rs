use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kruskal_cmc::verify::Suite;
use kruskal_cmc::Branch;

use crate::config::{Amplitude, Format, Overrides};

#[derive(Debug, Parser)]
#[command(name = "kruskal-cmc", version, about = "CMC slices and foliations of the Kruskal spacetime")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Mass parameter.
    #[arg(long = "M", global = true, value_name = "M")]
    pub m: Option<f64>,

    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output file, or directory for `foliation`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub format: Option<Format>,

    /// Curve exponent p.
    #[arg(long, global = true)]
    pub p: Option<f64>,

    /// Curve amplitude C, or "auto".
    #[arg(long = "C", global = true, value_name = "C", allow_hyphen_values = true)]
    pub amplitude: Option<Amplitude>,

    /// Curve offset A = y(2M).
    #[arg(long = "A", global = true, value_name = "A", allow_hyphen_values = true)]
    pub a: Option<f64>,

    /// Explicit leaf parameters, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub c_list: Option<Vec<f64>>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_min: Option<f64>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c_max: Option<f64>,

    #[arg(long, global = true)]
    pub count: Option<usize>,

    /// Largest |X| to integrate to, and the half-width of plots.
    #[arg(long, global = true)]
    pub xmax: Option<f64>,

    #[arg(long, global = true)]
    pub samples_per_side: Option<usize>,

    #[arg(long, global = true)]
    pub tol_root: Option<f64>,

    #[arg(long, global = true)]
    pub tol_quad: Option<f64>,

    #[arg(long, global = true)]
    pub tol_ode: Option<f64>,

    #[arg(long, global = true)]
    pub tol_coord: Option<f64>,

    #[arg(long, global = true)]
    pub tol_resid: Option<f64>,
}

impl GlobalArgs {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            m: self.m,
            p: self.p,
            amplitude: self.amplitude,
            a: self.a,
            c_list: self.c_list.clone(),
            c_min: self.c_min,
            c_max: self.c_max,
            count: self.count,
            x_max: self.xmax,
            samples_per_side: self.samples_per_side,
            tol_root: self.tol_root,
            tol_quad: self.tol_quad,
            tol_ode: self.tol_ode,
            tol_coord: self.tol_coord,
            tol_resid: self.tol_resid,
            format: self.format,
            out: self.out.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute one slice from (H, c), or the foliation leaf for c.
    Slice(SliceArgs),
    /// Compute every leaf on the c grid and write an index.
    Foliation(FoliationArgs),
    /// Find the leaf through a point.
    Locate(LocateArgs),
    /// Run verification suites and write a report.
    Verify(VerifyArgs),
    /// Render slice or index files as an SVG Kruskal diagram.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Plus => Branch::Plus,
            BranchArg::Minus => Branch::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum GeneratorArg {
    #[default]
    Ivp,
    Quadrature,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    /// Mean curvature; requires --c.
    #[arg(long = "H", value_name = "H", allow_hyphen_values = true)]
    pub h: Option<f64>,

    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,

    /// Root anchoring the slice (with --H). Defaults to minus, or the
    /// cylinder when the roots coincide.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,

    #[arg(long, value_enum, default_value_t)]
    pub generator: GeneratorArg,
}

#[derive(Debug, Args)]
pub struct FoliationArgs {
    /// Build the linear family c = -8 M^3 H instead of the curve leaves.
    #[arg(long)]
    pub mo_family: bool,

    /// Mean curvatures for --mo-family, comma separated.
    #[arg(long = "H-list", value_delimiter = ',', allow_hyphen_values = true, requires = "mo_family")]
    pub h_list: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct LocateArgs {
    #[arg(long = "T", value_name = "T", allow_hyphen_values = true)]
    pub t: f64,

    #[arg(long = "X", value_name = "X", allow_hyphen_values = true)]
    pub x: f64,

    /// Largest accepted |T(leaf, X) - T|.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    pub suite: Suite,

    /// Seed for the coverage points.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of coverage points.
    #[arg(long)]
    pub points: Option<usize>,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: kruskal_cmc::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// Slice files (.csv, .json) or foliation index files.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
}
