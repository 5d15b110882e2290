//! Calibration of the first coupling `g₁` so that `n ≥ 5` homogeneous
//! resonators regain equal-population times.
//!
//! With `g₁` raised above the common `g`, the population left in `R_1`
//! oscillates deeper. The objective is the distance of its minimum over
//! `χt/π ∈ (0, 2]` from `1/n`: below the optimum `R_1` never drains to
//! `1/n`, above it overshoots. Populations come from exact unitary evolution
//! of the full Hamiltonian (no decay).

use std::f64::consts::PI;

use serde::Serialize;

use super::{check_n, ScenarioResult, Simulation};
use crate::analytic::{golden_min, w_deviation};
use crate::dynamics::{Propagator, TimeGrid};
use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::observables::resonator_populations;
use crate::parallel::{par_map, ExecMode};

/// Coarse grid size for the `g₁` search.
pub const G1_SEARCH_POINTS: usize = 21;
/// Time samples over `χt/π ∈ (0, 2]`.
pub const G1_TIME_POINTS: usize = 2000;
pub const G1_HORIZON: f64 = 2.0;
/// Population tolerance for a near-W time.
pub const NEAR_W_TOL: f64 = 0.02;
/// Golden-section stopping width, MHz.
pub const G1_TOL_MHZ: f64 = 1e-3;

#[derive(Debug, Clone, Serialize)]
pub struct G1Calibration {
    pub g1_mhz: f64,
    pub objective: f64,
    /// Objective at `g₁ = g` (homogeneous).
    pub homogeneous_objective: f64,
    /// `min_t max_m |P_m − 1/n|` at the optimum.
    pub best_deviation: f64,
    /// One representative `χt/π` per contiguous window where all
    /// populations are within `NEAR_W_TOL` of `1/n`.
    pub near_w_times: Vec<f64>,
    pub grid_g1_mhz: Vec<f64>,
    pub grid_objective: Vec<f64>,
}

struct Profile {
    xs: Vec<f64>,
    deviation: Vec<f64>,
    min_first: f64,
}

fn profile(spec: &SystemSpec, g1_mhz: f64) -> Result<Profile> {
    let spec = spec.clone().with_coupling(1, g1_mhz);
    let sim = Simulation::single_excitation(&spec)?;
    let prop = Propagator::new(&sim.hamiltonian)?;
    let psi0 = sim.seeded()?;
    let step = G1_HORIZON / G1_TIME_POINTS as f64;
    let xs: Vec<f64> = (1..=G1_TIME_POINTS).map(|k| k as f64 * step).collect();
    let mut deviation = Vec::with_capacity(xs.len());
    let mut min_first = f64::INFINITY;
    for &x in &xs {
        let pops = resonator_populations(&prop.apply(&psi0, sim.time_us(x)), &sim.basis)?;
        min_first = min_first.min(pops[0]);
        deviation.push(w_deviation(&pops));
    }
    Ok(Profile { xs, deviation, min_first })
}

fn objective(spec: &SystemSpec, g1_mhz: f64) -> Result<f64> {
    let n = spec.n() as f64;
    Ok((profile(spec, g1_mhz)?.min_first - 1.0 / n).abs())
}

/// Coarse grid over `search_mhz` followed by golden-section refinement
/// around the best grid point.
pub fn optimize_g1(spec: &SystemSpec, search_mhz: (f64, f64), mode: ExecMode) -> Result<G1Calibration> {
    if spec.n() < 5 {
        check_n(spec, 5)?;
    }
    let (lo, hi) = search_mhz;
    if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("empty or non-positive g1 search interval [{lo}, {hi}] MHz")));
    }
    let grid: Vec<f64> =
        (0..G1_SEARCH_POINTS).map(|k| lo + (hi - lo) * k as f64 / (G1_SEARCH_POINTS - 1) as f64).collect();
    let values: Vec<f64> =
        par_map(mode, &grid, |&g1| objective(spec, g1)).into_iter().collect::<Result<_>>()?;
    let best = (0..grid.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("grid is non-empty");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];

    let refined = golden_min(|g1| objective(spec, g1).unwrap_or(f64::INFINITY), a, b, G1_TOL_MHZ);
    let refined_value = objective(spec, refined)?;
    let (g1_mhz, value) =
        if refined_value <= values[best] { (refined, refined_value) } else { (grid[best], values[best]) };

    let homogeneous_objective = objective(spec, spec.resonators[1].g_mhz)?;
    let optimum = profile(spec, g1_mhz)?;
    let best_deviation = optimum.deviation.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(G1Calibration {
        g1_mhz,
        objective: value,
        homogeneous_objective,
        best_deviation,
        near_w_times: near_w_windows(&optimum.xs, &optimum.deviation, NEAR_W_TOL),
        grid_g1_mhz: grid,
        grid_objective: values,
    })
}

/// Argmin of `deviation` inside each maximal run below `tol`.
fn near_w_windows(xs: &[f64], deviation: &[f64], tol: f64) -> Vec<f64> {
    let mut times = Vec::new();
    let mut run: Option<usize> = None;
    for k in 0..=xs.len() {
        let inside = k < xs.len() && deviation[k] < tol;
        match (inside, run) {
            (true, None) => run = Some(k),
            (false, Some(start)) => {
                let best = (start..k).min_by(|&a, &b| deviation[a].total_cmp(&deviation[b])).expect("non-empty run");
                times.push(xs[best]);
                run = None;
            }
            _ => {}
        }
    }
    times
}

/// `min_t max_m |P_m(t) − 1/n|` over `χt/π ∈ (0, 2]` for the given system
/// (no decay).
pub fn min_w_deviation(spec: &SystemSpec) -> Result<f64> {
    let g1 = spec.resonators[0].g_mhz;
    Ok(profile(spec, g1)?.deviation.into_iter().fold(f64::INFINITY, f64::min))
}

/// Min over `χt/π ∈ (0, 2]` of `max_m |P_m − 1/n|` under the master
/// equation, for the sensitivity of a calibrated system to decay.
pub fn min_w_deviation_damped(spec: &SystemSpec) -> Result<f64> {
    let sim = Simulation::single_excitation(spec)?;
    let grid = TimeGrid::new(sim.time_us(G1_HORIZON / 400.0), sim.time_us(G1_HORIZON), 400)?;
    let rho0 = crate::dynamics::DensityMatrix::from_pure(&sim.seeded()?);
    let mut best = f64::INFINITY;
    for rho in sim.lindblad(&rho0, &grid)? {
        best = best.min(w_deviation(&resonator_populations(&rho, &sim.basis)?));
    }
    Ok(best)
}

impl G1Calibration {
    pub fn to_result(&self, spec: &SystemSpec, search_mhz: (f64, f64)) -> Result<ScenarioResult> {
        let mut result = ScenarioResult::new("optimize_g1");
        result.push_column("g1_mhz", self.grid_g1_mhz.clone())?;
        result.push_column("objective", self.grid_objective.clone())?;
        result.meta("spec", spec)?;
        result.meta("search_mhz", [search_mhz.0, search_mhz.1])?;
        result.meta("g1_star_mhz", self.g1_mhz)?;
        result.meta("objective_star", self.objective)?;
        result.meta("homogeneous_objective", self.homogeneous_objective)?;
        result.meta("best_deviation", self.best_deviation)?;
        result.meta("near_w_chi_t_over_pi", &self.near_w_times)?;
        result.meta("near_w_tol", NEAR_W_TOL)?;
        result.meta("time_points", G1_TIME_POINTS)?;
        result.meta("horizon_chi_t_over_pi", G1_HORIZON)?;
        result.meta("chi_t_unit_rad", PI)?;
        Ok(result)
    }
}
