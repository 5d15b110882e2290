//! Independent routes to the same quantity must agree.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use resonatorsim::analytic::{amplitudes_homogeneous, AmplitudeVector};
use resonatorsim::dynamics::{evolve_lindblad, evolve_unitary, integrate_amplitudes, DensityMatrix, TimeGrid};
use resonatorsim::experiments::{
    first_crossing, scenario_population, sweep_fidelity_map_g2, sweep_fidelity_vs_time, sweep_gm, FidelityTarget,
    Simulation, MAP_KAPPA_MHZ,
};
use resonatorsim::model::{derive_dispersive, SystemSpec};
use resonatorsim::observables::{fidelity_pure_target, resonator_populations};
use resonatorsim::parallel::ExecMode;

#[test]
fn amplitude_equations_match_closed_form() {
    for n in [2, 3, 4, 6] {
        let model = derive_dispersive(&SystemSpec::homogeneous(n)).unwrap();
        let chi = model.chi[(0, 1)];
        let grid = TimeGrid::new(0.0, 1.5 * PI / chi, 50).unwrap();
        let traj = integrate_amplitudes(&model, &AmplitudeVector::seeded(n), &grid).unwrap();
        for (t, amps) in traj.iter() {
            // J = −χ, so the dispersive state at time t is the closed form at −χt.
            let exact = amplitudes_homogeneous(n, -chi * t).unwrap();
            for (a, b) in amps.c.iter().zip(&exact.c) {
                assert!((a - b).norm() < 1e-8, "n={n} t={t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn full_hamiltonian_tracks_dispersive_model_early_on() {
    let result = scenario_population(3, &SystemSpec::homogeneous(3), None, 0.3, 120).unwrap();
    let deviation = resonatorsim::experiments::max_population_deviation(&result, 3);
    assert!(deviation < 0.012, "{deviation}");
    // R2 and R3 see identical couplings.
    let p2 = result.column("P2_abinitio").unwrap();
    let p3 = result.column("P3_abinitio").unwrap();
    for (a, b) in p2.iter().zip(p3) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn lossless_master_equation_equals_unitary_evolution() {
    let sim = Simulation::single_excitation(&SystemSpec::homogeneous(3)).unwrap();
    let psi0 = sim.seeded().unwrap();
    let grid = sim.grid(0.0, 0.5, 30).unwrap();
    let pure = evolve_unitary(&sim.hamiltonian, &psi0, &grid).unwrap();
    let mixed = evolve_lindblad(&sim.hamiltonian, &[], &DensityMatrix::from_pure(&psi0), &grid).unwrap();
    for (psi, rho) in pure.states.iter().zip(&mixed.states) {
        let p = resonator_populations(psi, &sim.basis).unwrap();
        let q = resonator_populations(rho, &sim.basis).unwrap();
        for (a, b) in p.iter().zip(&q) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
        assert_abs_diff_eq!(fidelity_pure_target(rho, psi).unwrap(), 1.0, epsilon = 1e-8);
    }
}

#[test]
fn decay_never_helps() {
    let r = sweep_fidelity_vs_time(
        &SystemSpec::homogeneous(3),
        &[0.0, 0.25, 0.5],
        0.4,
        60,
        FidelityTarget::Instantaneous,
        ExecMode::Parallel,
    )
    .unwrap();
    let f0 = r.column("fidelity_kappa_0").unwrap();
    let f1 = r.column("fidelity_kappa_0.25").unwrap();
    let f2 = r.column("fidelity_kappa_0.5").unwrap();
    for k in 0..f0.len() {
        assert!(f0[k] + 1e-12 >= f1[k] && f1[k] + 1e-12 >= f2[k], "row {k}");
    }
}

#[test]
fn map_column_at_unit_ratio_equals_one_dimensional_sweep() {
    let target = FidelityTarget::Snapshot { chi_t_over_pi: first_crossing(3).unwrap() };
    let spec = SystemSpec::homogeneous(3);
    let map = sweep_fidelity_map_g2(&spec, &[0.9, 1.0], (0.0, 0.4), 40, MAP_KAPPA_MHZ, target, ExecMode::Parallel).unwrap();
    let line = sweep_fidelity_vs_time(&spec, &[MAP_KAPPA_MHZ], 0.4, 40, target, ExecMode::Parallel).unwrap();
    let ratios = map.result.column("g2_over_g").unwrap();
    let f = map.result.column("fidelity").unwrap();
    let at_one: Vec<f64> = ratios.iter().zip(f).filter(|(r, _)| **r == 1.0).map(|(_, f)| *f).collect();
    assert_eq!(at_one.as_slice(), line.column("fidelity_kappa_0.1").unwrap());
}

#[test]
fn infinite_ratio_reproduces_the_uncoupled_system() {
    let r = sweep_gm(&SystemSpec::homogeneous(3), &[f64::INFINITY, 50.0], &[0.0], ExecMode::Sequential).unwrap();
    let baseline = r.metadata["baseline_fidelity"][0].as_f64().unwrap();
    let sim = Simulation::single_excitation(&SystemSpec::homogeneous(3)).unwrap();
    let t = sim.time_us(first_crossing(3).unwrap());
    let rho = sim.lindblad_at(&DensityMatrix::from_pure(&sim.seeded().unwrap()), t).unwrap();
    let direct = fidelity_pure_target(&rho, &sim.ideal_at(t).unwrap()).unwrap();
    assert_eq!(r.column("fidelity_kappa_0").unwrap()[0], direct);
    assert_eq!(baseline, direct);
    assert!(r.column("fidelity_kappa_0").unwrap()[1] < direct);
}
