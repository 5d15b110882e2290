use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "resonatorsim", version, about = "W-state generation in distant resonators coupled through a common bus")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Population trajectories: dispersive model, full Hamiltonian and optional decay.
    Evolve(EvolveArgs),
    /// Equal-population times of the homogeneous dispersive model.
    Crossings(CrossingsArgs),
    /// Fidelity against the ideal W-type state versus operation time.
    Fidelity(FidelityArgs),
    /// Calibrate the R1 coupling so that n ≥ 5 resonators reach equal populations.
    #[command(name = "optimize-g1")]
    OptimizeG1(OptimizeG1Args),
    /// Fidelity at the first crossing versus the direct coupling ratio g/G_M.
    #[command(name = "gm-sweep")]
    GmSweep(GmSweepArgs),
    /// Fidelity at the first crossing for Werner-type initial states.
    Werner(WernerArgs),
    /// Schrieffer-Wolff residuals and dispersive validity of a configuration.
    #[command(name = "sw-verify")]
    SwVerify(SwVerifyArgs),
    /// Run predefined scenarios.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SystemArgs {
    /// System description (JSON). Defaults to the homogeneous working point
    /// (bus 6.75 GHz, resonators 5.75 GHz, g = 50 MHz, lossless).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of distant resonators; must match the config when both are given.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EvolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// End time in μs.
    #[arg(long = "t-max-us", conflicts_with = "chi_t_max")]
    pub t_max_us: Option<f64>,
    /// End time as χt in units of π.
    #[arg(long = "chi-t-max")]
    pub chi_t_max: Option<f64>,
    #[arg(long, default_value_t = 600)]
    pub points: usize,
    /// Also propagate the master equation with every mode decaying at this rate.
    #[arg(long = "kappa-mhz")]
    pub kappa_mhz: Option<f64>,
    #[arg(long, default_value = "population.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CrossingsArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Search horizon as χt in units of π.
    #[arg(long = "chi-t-max", default_value_t = 2.0)]
    pub chi_t_max: f64,
    /// Root tolerance in units of χt/π.
    #[arg(long, default_value_t = resonatorsim::analytic::CROSSING_TOL)]
    pub tol: f64,
    #[arg(long, default_value = "crossings.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// Ideal state at the same elapsed time.
    Instantaneous,
    /// Ideal state at the first crossing, held fixed.
    Snapshot,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FidelityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated decay rates in MHz, applied to every mode.
    #[arg(long = "kappas-mhz", value_parser = parse_real, value_delimiter = ',', default_value = "0,0.25,0.5")]
    pub kappas_mhz: Vec<f64>,
    /// End time as χt in units of π.
    #[arg(long = "chi-t-max", default_value_t = resonatorsim::experiments::DEFAULT_CHI_T_MAX)]
    pub chi_t_max: f64,
    #[arg(long, default_value_t = resonatorsim::experiments::DEFAULT_POINTS)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = TargetKind::Instantaneous)]
    pub target: TargetKind,
    #[arg(long, default_value = "fidelity.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OptimizeG1Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Search interval for g1 in MHz, as lo:hi.
    #[arg(long = "search-mhz", value_parser = parse_range, default_value = "50:80")]
    pub search_mhz: (f64, f64),
    /// Decay rate for the reported sensitivity of the calibrated system.
    #[arg(long = "damped-kappa-mhz", default_value_t = 0.5)]
    pub damped_kappa_mhz: f64,
    #[arg(long, default_value = "optimize_g1.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GmSweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated g/G_M ratios; `inf` means no direct coupling.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', default_value = "inf,1000,500,200,100,50,20,10")]
    pub ratios: Vec<f64>,
    #[arg(long = "kappas-mhz", value_parser = parse_real, value_delimiter = ',', default_value = "0,0.5")]
    pub kappas_mhz: Vec<f64>,
    #[arg(long, default_value = "gm_sweep.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WernerArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    /// Comma-separated weights of the pure part.
    #[arg(long = "p-grid", value_parser = parse_real, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    pub p_grid: Vec<f64>,
    /// Comma-separated mixing angles in units of π.
    #[arg(long, value_parser = parse_real, value_delimiter = ',', default_value = "0,0.25,0.5")]
    pub thetas: Vec<f64>,
    #[arg(long, default_value = "werner.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SwVerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value = "sw_verify.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    /// Scenario name; `all` runs every scenario.
    #[arg(value_parser = ["all"])]
    pub name: String,
    #[arg(long = "out-dir", default_value = "results")]
    pub out_dir: PathBuf,
}

/// One list element. `inf` is accepted, NaN is not.
pub fn parse_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{}' is not a number", s.trim()))?;
    if v.is_nan() {
        return Err("NaN is not allowed".into());
    }
    Ok(v)
}

/// `lo:hi` with finite bounds.
pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got '{s}'"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("'{}' is not a number", v.trim()));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err("interval bounds must be finite".into());
    }
    Ok((lo, hi))
}
