//! Scenario harness: population dynamics, fidelity sweeps, the `g₁`
//! calibration and tabular output.
//!
//! Time axes are in units of `χt/π`, with `χ = g²/Δ` of the last resonator
//! (sweeps that vary a coupling keep that one fixed). Propagation uses the
//! full Hamiltonian with the bus kept explicitly. Master-equation runs are
//! done in the frame rotating at the mean resonator frequency,
//! `H − ω_ref N`. That frame is exact here because `H` conserves photon
//! number and every collapse operator lowers it by one, so populations and
//! fidelities against single-photon targets are unchanged, while the
//! fixed-step integrator no longer has to resolve the 5–7 GHz carrier.

pub mod calibration;
pub mod output;
pub mod sweeps;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::analytic::{amplitudes_homogeneous, find_w_crossings, populations, AmplitudeVector, CROSSING_TOL};
use crate::dynamics::{
    evolve_lindblad, integrate_amplitudes, Collapse, DensityMatrix, Propagator, StateVector, TimeGrid,
};
use crate::error::{Error, Result};
use crate::fockspace::{build_basis, FockBasis, ModeId, OperatorMatrix};
use crate::hamiltonians::build_full;
use crate::model::{derive_dispersive, SystemSpec};
use crate::observables::{fidelity_pure_target, ideal_target, resonator_populations};

pub use calibration::{optimize_g1, G1Calibration, G1_SEARCH_POINTS};
pub use output::{format_sig, write_atomic, Column, ScenarioResult};
pub use sweeps::{
    peak_fidelity, sweep_fidelity_map_g2, sweep_fidelity_vs_time, sweep_gm, sweep_werner, FidelityMap, PeakFidelity,
};

/// Default time axis: `χt/π ∈ [0, 1.3]` with 600 points.
pub const DEFAULT_CHI_T_MAX: f64 = 1.3;
pub const DEFAULT_POINTS: usize = 600;
/// Decay rates of the fidelity-vs-time sweep, MHz.
pub const DEFAULT_KAPPAS_MHZ: [f64; 3] = [0.0, 0.25, 0.5];
/// Decay rate used for the inhomogeneity map, MHz.
pub const MAP_KAPPA_MHZ: f64 = 0.10;
/// Half-width in `χt/π` of the window searched for a fidelity peak.
pub const PEAK_HALF_WINDOW: f64 = 0.01;
pub const PEAK_WINDOW_POINTS: usize = 41;

/// Which ideal state a fidelity is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FidelityTarget {
    /// The closed-form state at the same elapsed time.
    Instantaneous,
    /// The closed-form state frozen at `χt/π = chi_t_over_pi`.
    Snapshot { chi_t_over_pi: f64 },
}

/// A system ready to propagate: basis, rotating-frame Hamiltonian and
/// collapse operators.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub spec: SystemSpec,
    pub basis: FockBasis,
    /// `H − ω_ref N`.
    pub hamiltonian: OperatorMatrix,
    pub frame_omega: f64,
    pub collapse: Vec<Collapse>,
    /// Signed reference `χ`, rad/μs.
    pub chi_ref: f64,
}

impl Simulation {
    /// Cutoff 1 per mode and at most `excitation_cap` photons in total.
    pub fn new(spec: &SystemSpec, excitation_cap: u32) -> Result<Simulation> {
        spec.validate()?;
        let basis = build_basis(spec.n() + 1, 1, Some(excitation_cap))?;
        let set = build_full(spec, &basis)?;
        let frame_omega = spec.resonators.iter().map(|r| r.omega()).sum::<f64>() / spec.n() as f64;
        let hamiltonian = set.h_full - basis.total_number() * Complex64::new(frame_omega, 0.0);
        let mut collapse = Vec::new();
        if spec.bus.kappa_mhz > 0.0 {
            collapse.push(Collapse { rate: spec.bus.kappa_mhz, operator: basis.annihilation(ModeId::BUS)? });
        }
        for (k, r) in spec.resonators.iter().enumerate() {
            if r.kappa_mhz > 0.0 {
                let operator = basis.annihilation(ModeId::resonator(k + 1))?;
                collapse.push(Collapse { rate: r.kappa_mhz, operator });
            }
        }
        let chi_ref = spec.reference_chi()?;
        if chi_ref == 0.0 {
            return Err(Error::InvalidParameter(
                "reference coupling is zero, so the χt time axis is undefined".into(),
            ));
        }
        Ok(Simulation { spec: spec.clone(), basis, hamiltonian, frame_omega, collapse, chi_ref })
    }

    pub fn single_excitation(spec: &SystemSpec) -> Result<Simulation> {
        Simulation::new(spec, 1)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// μs corresponding to `χt/π = x`.
    pub fn time_us(&self, chi_t_over_pi: f64) -> f64 {
        chi_t_over_pi * PI / self.chi_ref.abs()
    }

    pub fn grid(&self, x_start: f64, x_end: f64, points: usize) -> Result<TimeGrid> {
        TimeGrid::new(self.time_us(x_start), self.time_us(x_end), points)
    }

    /// One photon in `R_1`.
    pub fn seeded(&self) -> Result<StateVector> {
        Ok(StateVector::basis(self.basis.dim(), self.basis.single_photon(ModeId::resonator(1))?))
    }

    /// Closed-form homogeneous state for `R_1`-seeded evolution at time `t`.
    pub fn ideal_at(&self, t_us: f64) -> Result<StateVector> {
        ideal_target(self.n(), -self.chi_ref * t_us, &self.basis)
    }

    pub fn target_at(&self, target: FidelityTarget, t_us: f64) -> Result<StateVector> {
        match target {
            FidelityTarget::Instantaneous => self.ideal_at(t_us),
            FidelityTarget::Snapshot { chi_t_over_pi } => self.ideal_at(self.time_us(chi_t_over_pi)),
        }
    }

    pub fn lindblad(&self, rho0: &DensityMatrix, grid: &TimeGrid) -> Result<Vec<DensityMatrix>> {
        Ok(evolve_lindblad(&self.hamiltonian, &self.collapse, rho0, grid)?.states)
    }

    /// Density matrix at a single time.
    pub fn lindblad_at(&self, rho0: &DensityMatrix, t_us: f64) -> Result<DensityMatrix> {
        let grid = TimeGrid::new(0.5 * t_us, t_us, 2)?;
        Ok(self.lindblad(rho0, &grid)?.pop().expect("two samples"))
    }

    /// Fidelity of the `R_1`-seeded master-equation state on `grid`.
    pub fn fidelity_curve(&self, target: FidelityTarget, grid: &TimeGrid) -> Result<Vec<f64>> {
        let rho0 = DensityMatrix::from_pure(&self.seeded()?);
        let states = self.lindblad(&rho0, grid)?;
        grid.times()
            .iter()
            .zip(&states)
            .map(|(&t, rho)| fidelity_pure_target(rho, &self.target_at(target, t)?))
            .collect()
    }
}

/// First equal-population time of the homogeneous `n`-resonator model, in
/// units of `χt/π`.
pub fn first_crossing(n: usize) -> Result<f64> {
    let roots = find_w_crossings(n, 2.0 * PI, CROSSING_TOL)?;
    roots
        .first()
        .map(|x| x / PI)
        .ok_or_else(|| Error::InvalidParameter(format!("the homogeneous {n}-resonator model has no W crossing")))
}

fn kappa_label(kappa_mhz: f64) -> String {
    format_sig(kappa_mhz, 12)
}

/// Same decay rate on every mode.
pub fn with_kappa(spec: &SystemSpec, kappa_mhz: f64) -> SystemSpec {
    spec.clone().with_uniform_kappa(kappa_mhz)
}

fn check_n(spec: &SystemSpec, n: usize) -> Result<()> {
    if spec.n() != n {
        return Err(Error::Config(format!("requested n = {n} but the system has {} resonators", spec.n())));
    }
    Ok(())
}

/// Single-photon populations of `R_1..R_n` over `χt/π ∈ [0, chi_t_max]`:
/// dispersive model (closed form when homogeneous, amplitude equations
/// otherwise), full-Hamiltonian unitary evolution, and optionally the
/// master equation with every mode decaying at `with_kappa_mhz`.
pub fn scenario_population(
    n: usize,
    spec: &SystemSpec,
    with_kappa_mhz: Option<f64>,
    chi_t_max: f64,
    points: usize,
) -> Result<ScenarioResult> {
    check_n(spec, n)?;
    let sim = Simulation::single_excitation(spec)?;
    let grid = sim.grid(0.0, chi_t_max, points)?;
    let times = grid.times();
    let model = derive_dispersive(spec)?;

    let analytic: Vec<Vec<f64>> = if model.is_homogeneous(1e-12) {
        times
            .iter()
            .map(|&t| amplitudes_homogeneous(n, model.exchange(0, 1) * t).map(|a| populations(&a)))
            .collect::<Result<_>>()?
    } else {
        integrate_amplitudes(&model, &AmplitudeVector::seeded(n), &grid)?.states.iter().map(populations).collect()
    };

    let prop = Propagator::new(&sim.hamiltonian)?;
    let psi0 = sim.seeded()?;
    let ab_initio: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| resonator_populations(&prop.apply(&psi0, t), &sim.basis))
        .collect::<Result<_>>()?;

    let mut result = ScenarioResult::new(format!("population_n{n}"));
    result.push_column("chi_t_over_pi", times.iter().map(|&t| t * sim.chi_ref.abs() / PI).collect())?;
    result.push_column("time_us", times.clone())?;
    for j in 0..n {
        result.push_column(format!("P{}_analytic", j + 1), analytic.iter().map(|p| p[j]).collect())?;
    }
    for j in 0..n {
        result.push_column(format!("P{}_abinitio", j + 1), ab_initio.iter().map(|p| p[j]).collect())?;
    }
    if let Some(kappa) = with_kappa_mhz {
        let damped_sim = Simulation::single_excitation(&with_kappa(spec, kappa))?;
        let states = damped_sim.lindblad(&DensityMatrix::from_pure(&psi0), &grid)?;
        let damped: Vec<Vec<f64>> =
            states.iter().map(|rho| resonator_populations(rho, &sim.basis)).collect::<Result<_>>()?;
        for j in 0..n {
            result.push_column(format!("P{}_damped", j + 1), damped.iter().map(|p| p[j]).collect())?;
        }
        result.meta("damped_kappa_mhz", kappa)?;
    }
    result.meta("spec", spec)?;
    result.meta("grid", grid)?;
    result.meta("chi_t_max_over_pi", chi_t_max)?;
    result.meta("reference_chi_rad_per_us", sim.chi_ref)?;
    Ok(result)
}

/// Largest `|P_m^abinitio − P_m^analytic|` in a population scenario.
pub fn max_population_deviation(result: &ScenarioResult, n: usize) -> f64 {
    (1..=n)
        .map(|j| {
            let a = result.column(&format!("P{j}_analytic")).unwrap_or(&[]);
            let b = result.column(&format!("P{j}_abinitio")).unwrap_or(&[]);
            a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Crossing list as a table.
pub fn scenario_crossings(n: usize, chi_t_max_over_pi: f64, tol: f64) -> Result<ScenarioResult> {
    let roots = find_w_crossings(n, chi_t_max_over_pi * PI, tol)?;
    let mut result = ScenarioResult::new(format!("crossings_n{n}"));
    let deviations = roots
        .iter()
        .map(|&x| amplitudes_homogeneous(n, x).map(|a| crate::analytic::w_deviation(&populations(&a))))
        .collect::<Result<Vec<_>>>()?;
    result.push_column("chi_t_over_pi", roots.iter().map(|x| x / PI).collect())?;
    result.push_column("max_population_deviation", deviations)?;
    result.meta("n", n)?;
    result.meta("chi_t_max_over_pi", chi_t_max_over_pi)?;
    result.meta("tol", tol)?;
    result.meta("grid_points", crate::analytic::CROSSING_GRID_POINTS)?;
    Ok(result)
}
