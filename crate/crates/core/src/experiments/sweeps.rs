//! Fidelity sweeps over time, decay rate, coupling inhomogeneity, direct
//! coupling and Werner noise.

use std::f64::consts::PI;

use serde::Serialize;

use super::{
    check_n, first_crossing, kappa_label, with_kappa, FidelityTarget, ScenarioResult, Simulation, PEAK_HALF_WINDOW,
    PEAK_WINDOW_POINTS,
};
use crate::dynamics::DensityMatrix;
use crate::error::{Error, Result};
use crate::model::SystemSpec;
use crate::observables::{fidelity_pure_target, werner_initial, werner_mixed_part, werner_pure_part, WernerParams};
use crate::parallel::{try_par_map, ExecMode};

/// Fidelity against `target` over `χt/π ∈ [0, chi_t_max]`, one column per
/// decay rate (applied to every mode, bus included).
pub fn sweep_fidelity_vs_time(
    spec: &SystemSpec,
    kappas_mhz: &[f64],
    chi_t_max: f64,
    points: usize,
    target: FidelityTarget,
    mode: ExecMode,
) -> Result<ScenarioResult> {
    if kappas_mhz.is_empty() {
        return Err(Error::InvalidParameter("at least one decay rate is required".into()));
    }
    let base = Simulation::single_excitation(spec)?;
    let grid = base.grid(0.0, chi_t_max, points)?;
    let curves = try_par_map(mode, kappas_mhz, |&kappa| {
        Simulation::single_excitation(&with_kappa(spec, kappa))?.fidelity_curve(target, &grid)
    })?;
    let n = spec.n();
    let mut result = ScenarioResult::new(format!("fidelity_n{n}"));
    let times = grid.times();
    result.push_column("chi_t_over_pi", times.iter().map(|&t| t * base.chi_ref.abs() / PI).collect())?;
    result.push_column("time_us", times)?;
    for (kappa, curve) in kappas_mhz.iter().zip(curves) {
        result.push_column(format!("fidelity_kappa_{}", kappa_label(*kappa)), curve)?;
    }
    result.meta("spec", spec)?;
    result.meta("grid", grid)?;
    result.meta("kappas_mhz", kappas_mhz)?;
    result.meta("target", target)?;
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakFidelity {
    pub chi_t_over_pi: f64,
    pub fidelity: f64,
}

/// Maximum fidelity on `PEAK_WINDOW_POINTS` samples of
/// `[center − PEAK_HALF_WINDOW, center + PEAK_HALF_WINDOW]` in `χt/π`.
pub fn peak_fidelity(spec: &SystemSpec, center: f64, target: FidelityTarget) -> Result<PeakFidelity> {
    let sim = Simulation::single_excitation(spec)?;
    let lo = (center - PEAK_HALF_WINDOW).max(0.0);
    let grid = sim.grid(lo, center + PEAK_HALF_WINDOW, PEAK_WINDOW_POINTS)?;
    let curve = sim.fidelity_curve(target, &grid)?;
    let (k, &fidelity) = curve
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty window");
    Ok(PeakFidelity { chi_t_over_pi: grid.time(k) * sim.chi_ref.abs() / PI, fidelity })
}

#[derive(Debug, Clone)]
pub struct FidelityMap {
    /// Long format: `g2_over_g`, `chi_t_over_pi`, `fidelity`.
    pub result: ScenarioResult,
    pub best_ratio: f64,
    pub best_chi_t_over_pi: f64,
    pub best_fidelity: f64,
}

/// Fidelity of the three-resonator system against `target` as a function of
/// `g₂/g` and `χt/π`, all modes decaying at `kappa_mhz`. `g` is the
/// coupling of `R_1` (and `R_3`) in `spec`.
pub fn sweep_fidelity_map_g2(
    spec: &SystemSpec,
    g2_ratios: &[f64],
    chi_t_range: (f64, f64),
    points: usize,
    kappa_mhz: f64,
    target: FidelityTarget,
    mode: ExecMode,
) -> Result<FidelityMap> {
    check_n(spec, 3)?;
    if g2_ratios.is_empty() || g2_ratios.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
        return Err(Error::InvalidParameter("g2 ratios must be a non-empty list of non-negative numbers".into()));
    }
    let g = spec.resonators[0].g_mhz;
    let damped = with_kappa(spec, kappa_mhz);
    let reference = Simulation::single_excitation(&damped)?;
    let grid = reference.grid(chi_t_range.0, chi_t_range.1, points)?;
    let xs: Vec<f64> = grid.times().iter().map(|&t| t * reference.chi_ref.abs() / PI).collect();
    let curves = try_par_map(mode, g2_ratios, |&ratio| {
        Simulation::single_excitation(&damped.clone().with_coupling(2, ratio * g))?.fidelity_curve(target, &grid)
    })?;

    let (mut ratio_col, mut x_col, mut f_col) = (Vec::new(), Vec::new(), Vec::new());
    let mut best = (f64::NAN, f64::NAN, f64::NEG_INFINITY);
    for (&ratio, curve) in g2_ratios.iter().zip(&curves) {
        for (&x, &f) in xs.iter().zip(curve) {
            ratio_col.push(ratio);
            x_col.push(x);
            f_col.push(f);
            if f > best.2 {
                best = (ratio, x, f);
            }
        }
    }
    let mut result = ScenarioResult::new("fidelity_map_g2");
    result.push_column("g2_over_g", ratio_col)?;
    result.push_column("chi_t_over_pi", x_col)?;
    result.push_column("fidelity", f_col)?;
    result.meta("spec", spec)?;
    result.meta("grid", grid)?;
    result.meta("g2_ratios", g2_ratios)?;
    result.meta("kappa_mhz", kappa_mhz)?;
    result.meta("target", target)?;
    result.meta("best", [best.0, best.1, best.2])?;
    Ok(FidelityMap { result, best_ratio: best.0, best_chi_t_over_pi: best.1, best_fidelity: best.2 })
}

/// Fidelity at the first homogeneous crossing time versus `g/G_M`, with the
/// direct nearest-neighbour coupling in the full Hamiltonian. An infinite
/// ratio means `G_M = 0`. The target is the ideal state at that time.
pub fn sweep_gm(spec: &SystemSpec, ratios: &[f64], kappas_mhz: &[f64], mode: ExecMode) -> Result<ScenarioResult> {
    check_n(spec, 3)?;
    if ratios.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::InvalidParameter("g/G_M ratios must be positive (use inf for no direct coupling)".into()));
    }
    let g = spec.resonators[0].g_mhz;
    let x_c = first_crossing(3)?;
    let target = FidelityTarget::Snapshot { chi_t_over_pi: x_c };
    let cases: Vec<(f64, f64)> =
        ratios.iter().flat_map(|&r| kappas_mhz.iter().map(move |&k| (r, k))).collect();
    let values = try_par_map(mode, &cases, |&(ratio, kappa)| {
        let gm = if ratio.is_infinite() { 0.0 } else { g / ratio };
        fidelity_at(&with_kappa(spec, kappa).with_gm(gm), x_c, target)
    })?;
    let baselines = try_par_map(mode, kappas_mhz, |&kappa| fidelity_at(&with_kappa(spec, kappa).with_gm(0.0), x_c, target))?;

    let mut result = ScenarioResult::new("fidelity_vs_gm");
    result.push_column("g_over_gm", ratios.to_vec())?;
    result.push_column("gm_mhz", ratios.iter().map(|&r| if r.is_infinite() { 0.0 } else { g / r }).collect())?;
    for (k, kappa) in kappas_mhz.iter().enumerate() {
        let column = (0..ratios.len()).map(|r| values[r * kappas_mhz.len() + k]).collect();
        result.push_column(format!("fidelity_kappa_{}", kappa_label(*kappa)), column)?;
        let delta = (0..ratios.len()).map(|r| values[r * kappas_mhz.len() + k] - baselines[k]).collect();
        result.push_column(format!("delta_kappa_{}", kappa_label(*kappa)), delta)?;
    }
    result.meta("spec", spec)?;
    result.meta("kappas_mhz", kappas_mhz)?;
    result.meta("chi_t_over_pi", x_c)?;
    result.meta("target", target)?;
    result.meta("baseline_fidelity", &baselines)?;
    Ok(result)
}

fn fidelity_at(spec: &SystemSpec, x: f64, target: FidelityTarget) -> Result<f64> {
    let sim = Simulation::single_excitation(spec)?;
    let t = sim.time_us(x);
    let rho = sim.lindblad_at(&DensityMatrix::from_pure(&sim.seeded()?), t)?;
    fidelity_pure_target(&rho, &sim.target_at(target, t)?)
}

/// Fidelity at the first crossing time for Werner-type initial states, in a
/// basis holding up to three photons. Columns: `theta`, `p`, `fidelity`,
/// the pure and mixed components, and the residual from the affine
/// combination `p·F_pure + (1 − p)·F_mixed`.
pub fn sweep_werner(spec: &SystemSpec, p_grid: &[f64], thetas: &[f64], mode: ExecMode) -> Result<ScenarioResult> {
    check_n(spec, 3)?;
    let sim = Simulation::new(spec, 3)?;
    let x_c = first_crossing(3)?;
    let t = sim.time_us(x_c);
    let target = sim.ideal_at(t)?;
    let evolve = |rho: &DensityMatrix| -> Result<f64> { fidelity_pure_target(&sim.lindblad_at(rho, t)?, &target) };

    let mixed = evolve(&werner_mixed_part(&sim.basis)?)?;
    let pure = try_par_map(mode, thetas, |&theta| evolve(&DensityMatrix::from_pure(&werner_pure_part(theta, &sim.basis)?)))?;
    let cases: Vec<(f64, f64)> = thetas.iter().flat_map(|&th| p_grid.iter().map(move |&p| (th, p))).collect();
    let values = try_par_map(mode, &cases, |&(theta, p)| evolve(&werner_initial(WernerParams { p, theta }, &sim.basis)?))?;

    let single = Simulation::single_excitation(spec)?;
    let baseline = fidelity_pure_target(
        &single.lindblad_at(&DensityMatrix::from_pure(&single.seeded()?), t)?,
        &single.ideal_at(t)?,
    )?;

    let mut result = ScenarioResult::new("fidelity_werner");
    let (mut th_col, mut p_col, mut f_col, mut fp_col, mut fm_col, mut res_col) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (((theta, p), f), k) in cases.iter().zip(&values).zip(0..) {
        let f_pure = pure[k / p_grid.len()];
        th_col.push(*theta);
        p_col.push(*p);
        f_col.push(*f);
        fp_col.push(f_pure);
        fm_col.push(mixed);
        res_col.push(f - (p * f_pure + (1.0 - p) * mixed));
    }
    result.push_column("theta", th_col)?;
    result.push_column("p", p_col)?;
    result.push_column("fidelity", f_col)?;
    result.push_column("fidelity_pure", fp_col)?;
    result.push_column("fidelity_mixed", fm_col)?;
    result.push_column("affine_residual", res_col)?;
    result.meta("spec", spec)?;
    result.meta("chi_t_over_pi", x_c)?;
    result.meta("p_grid", p_grid)?;
    result.meta("thetas", thetas)?;
    result.meta("excitation_cap", 3)?;
    result.meta("baseline_fidelity", baseline)?;
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decay_lowers_fidelity_pointwise() {
        let spec = SystemSpec::homogeneous(3);
        let r = sweep_fidelity_vs_time(&spec, &[0.0, 0.5], 0.3, 31, FidelityTarget::Instantaneous, ExecMode::Sequential)
            .unwrap();
        let closed = r.column("fidelity_kappa_0").unwrap();
        let lossy = r.column("fidelity_kappa_0.5").unwrap();
        assert!(closed.iter().zip(lossy).all(|(a, b)| a >= b));
        assert!(closed.iter().all(|&f| f > 0.99 && f <= 1.0 + 1e-9));
    }

    #[test]
    fn gm_zero_matches_plain_run() {
        let spec = SystemSpec::homogeneous(3);
        let r = sweep_gm(&spec, &[f64::INFINITY, 10.0], &[0.0], ExecMode::Sequential).unwrap();
        assert_eq!(r.column("delta_kappa_0").unwrap()[0], 0.0);
        assert!(r.column("delta_kappa_0").unwrap()[1] < -0.01);
        assert!(sweep_gm(&spec, &[0.0], &[0.0], ExecMode::Sequential).is_err());
    }
}
