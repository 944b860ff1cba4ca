//! Command-line interface definition.
//!
//! All configuration comes from flags; environment variables are never
//! consulted, so a command line is a complete record of a run.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// 2D deformable image registration with a biomechanics-informed prior.
#[derive(Debug, Parser)]
#[command(name = "bioreg", version, about)]
pub struct Cli {
    /// Increase log verbosity (-v: info, -vv: debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the displacement field aligning a moving image to a fixed image.
    Register(RegisterArgs),
    /// Evaluate overlap, surface, and Jacobian metrics for an existing field.
    Metrics(MetricsArgs),
    /// Export strain-energy and Jacobian-determinant maps of a field.
    Strain(StrainArgs),
    /// Generate a synthetic contracting-annulus image pair with ground truth.
    Phantom(PhantomArgs),
    /// Rerun registration across a list of values of one hyperparameter.
    Sweep(SweepArgs),
}

/// Regularizer choice.
#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
pub enum RegChoice {
    /// Linear-elastic strain-energy penalty (biomechanics-informed).
    Bim,
    /// Squared-gradient smoothness baseline.
    L2,
    /// No regularization.
    None,
}

/// Hyperparameter selectable for a sweep.
#[derive(Clone, Copy, Debug, Eq, PartialEq, ValueEnum)]
pub enum SweepParam {
    Lambda,
    Gamma,
    Nu,
}

/// Registration inputs and optimizer knobs, shared by `register` and `sweep`.
#[derive(Args, Clone, Debug)]
pub struct RegisterCommon {
    /// Moving (source) image, BIOREG1 kind=image.
    #[arg(long)]
    pub moving: PathBuf,
    /// Fixed (target) image, BIOREG1 kind=image.
    #[arg(long)]
    pub fixed: PathBuf,
    /// Moving-frame segmentation masks (kind=mask); requires --fixed-masks.
    #[arg(long, requires = "fixed_masks")]
    pub moving_masks: Option<PathBuf>,
    /// Fixed-frame segmentation masks (kind=mask); requires --moving-masks.
    #[arg(long, requires = "moving_masks")]
    pub fixed_masks: Option<PathBuf>,
    /// Regularizer.
    #[arg(long, value_enum, default_value_t = RegChoice::Bim)]
    pub reg: RegChoice,
    /// Regularizer weight.
    #[arg(long, default_value_t = 0.05)]
    pub lambda: f64,
    /// Segmentation-loss weight (active only when masks are given).
    #[arg(long, default_value_t = 0.01)]
    pub gamma: f64,
    /// Poisson ratio of the elastic material.
    #[arg(long, default_value_t = 0.4)]
    pub nu: f64,
    /// Young's modulus of the elastic material.
    #[arg(long = "E", default_value_t = 1.0)]
    pub young: f64,
    /// Adam step size.
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Maximum optimizer iterations.
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Solve on a 2x-downsampled level first, then refine at full resolution.
    #[arg(long)]
    pub pyramid: bool,
    /// Ground-truth field (kind=field) for endpoint-error reporting.
    #[arg(long)]
    pub gt_dvf: Option<PathBuf>,
    /// Single-channel region mask restricting endpoint-error statistics
    /// (default: whole image).
    #[arg(long, requires = "gt_dvf")]
    pub roi: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RegisterArgs {
    #[command(flatten)]
    pub common: RegisterCommon,
    /// Output displacement field (BIOREG1 kind=field).
    #[arg(long)]
    pub out_dvf: PathBuf,
    /// Optional JSON run report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Displacement field to evaluate (kind=field).
    #[arg(long)]
    pub dvf: PathBuf,
    /// Moving-frame segmentation masks (kind=mask).
    #[arg(long)]
    pub moving_masks: PathBuf,
    /// Fixed-frame segmentation masks (kind=mask).
    #[arg(long)]
    pub fixed_masks: PathBuf,
    /// Output JSON report.
    #[arg(long)]
    pub report: PathBuf,
}

#[derive(Args, Debug)]
pub struct StrainArgs {
    /// Displacement field to analyze (kind=field).
    #[arg(long)]
    pub dvf: PathBuf,
    /// Poisson ratio of the elastic material.
    #[arg(long, default_value_t = 0.4)]
    pub nu: f64,
    /// Young's modulus of the elastic material.
    #[arg(long = "E", default_value_t = 1.0)]
    pub young: f64,
    /// Output strain-energy-density map (kind=image).
    #[arg(long)]
    pub out_energy: PathBuf,
    /// Output Jacobian-determinant map (kind=image).
    #[arg(long)]
    pub out_detj: PathBuf,
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    /// Image width and height in pixels.
    #[arg(long, default_value_t = 96)]
    pub size: usize,
    /// Inner (cavity) radius, mm.
    #[arg(long, default_value_t = 12.0)]
    pub ri: f64,
    /// Outer (epicardial) radius, mm.
    #[arg(long, default_value_t = 24.0)]
    pub ro: f64,
    /// Contraction fraction.
    #[arg(long, default_value_t = 0.05)]
    pub contraction: f64,
    /// Gaussian noise standard deviation (0 = clean).
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Noise RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path prefix; writes <prefix>_moving.brs, _fixed.brs,
    /// _moving_masks.brs, _fixed_masks.brs, _gt_dvf.brs, and _roi.brs.
    #[arg(long)]
    pub out_prefix: String,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Hyperparameter to sweep.
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// Comma-separated values to try.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[command(flatten)]
    pub common: RegisterCommon,
    /// Output JSON report (one row per value).
    #[arg(long)]
    pub report: PathBuf,
}
