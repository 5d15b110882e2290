//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use resonatorsim::analytic::{amplitudes_homogeneous, find_w_crossings, populations, w_deviation, CROSSING_TOL};
use resonatorsim::dynamics::{evolve_lindblad, Collapse, DensityMatrix, StateVector, TimeGrid};
use resonatorsim::experiments::calibration::min_w_deviation;
use resonatorsim::experiments::{
    first_crossing, max_population_deviation, optimize_g1, peak_fidelity, scenario_population,
    sweep_fidelity_map_g2, sweep_gm, sweep_werner, FidelityTarget, MAP_KAPPA_MHZ,
};
use resonatorsim::fockspace::{build_basis, ModeId};
use resonatorsim::hamiltonians::{build_full, single_excitation_basis, verify_sw_identities};
use resonatorsim::model::{lifetime_from_kappa, lifetime_from_q, BusSpec, ResonatorSpec, SystemSpec};
use resonatorsim::parallel::ExecMode;

type Check = Result<(bool, String), String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within(value: f64, expected: f64, tol: f64) -> bool {
    (value - expected).abs() <= tol
}

fn crossings_n3() -> Check {
    let roots = find_w_crossings(3, 1.2 * PI, CROSSING_TOL).map_err(err)?;
    let expected = [0.22, 0.44, 0.88, 1.10];
    let xs: Vec<f64> = roots.iter().map(|r| r / PI).collect();
    let mut ok = xs.len() == expected.len();
    let mut worst_pop: f64 = 0.0;
    for (x, e) in xs.iter().zip(expected) {
        ok &= within(*x, e, 0.01);
        let p = populations(&amplitudes_homogeneous(3, x * PI).map_err(err)?);
        worst_pop = worst_pop.max(w_deviation(&p));
    }
    ok &= worst_pop <= 0.01;
    let offsets: Vec<String> = xs.iter().zip(expected).map(|(x, e)| format!("{:+.4}", x - e)).collect();
    Ok((ok, format!("roots χt/π = {xs:.4?}, offsets from listed {offsets:?} (tol 0.01), max |P−1/3| = {worst_pop:.1e}")))
}

fn crossings_n4() -> Check {
    let roots = find_w_crossings(4, 1.5 * PI, CROSSING_TOL).map_err(err)?;
    let expected = [0.25, 0.75, 1.25];
    let xs: Vec<f64> = roots.iter().map(|r| r / PI).collect();
    let mut ok = xs.len() == 3;
    let mut worst_root: f64 = 0.0;
    let mut worst_pop: f64 = 0.0;
    for (x, e) in xs.iter().zip(expected) {
        worst_root = worst_root.max((x - e).abs());
        worst_pop = worst_pop.max(w_deviation(&populations(&amplitudes_homogeneous(4, x * PI).map_err(err)?)));
    }
    ok &= worst_root <= 1e-6 && worst_pop <= 1e-9;
    Ok((ok, format!("roots χt/π = {xs:.7?}, max root error {worst_root:.1e}, max |P−1/4| = {worst_pop:.1e}")))
}

fn snapshots() -> Check {
    let u3 = Complex64::new(1.0, 3f64.sqrt()) / 6.0;
    let u4 = Complex64::new(1.0, 1.0) / (2.0 * 2f64.sqrt());
    let cases: [(usize, f64, Vec<Complex64>); 3] = [
        (3, PI / 3.0, vec![u3, -2.0 * u3, -2.0 * u3]),
        (3, PI, vec![Complex64::new(-1.0 / 3.0, 0.0), Complex64::new(2.0 / 3.0, 0.0), Complex64::new(2.0 / 3.0, 0.0)]),
        (4, PI / 4.0, vec![u4, -u4, -u4, -u4]),
    ];
    let mut worst: f64 = 0.0;
    for (n, x, expected) in &cases {
        let a = amplitudes_homogeneous(*n, *x).map_err(err)?;
        for (c, e) in a.c.iter().zip(expected) {
            worst = worst.max((c - e).norm());
        }
    }
    Ok((worst <= 1e-10, format!("max coefficient error {worst:.1e} over χt = π/3, π (n=3) and π/4 (n=4)")))
}

fn effective_vs_ab_initio() -> Check {
    let r3 = scenario_population(3, &SystemSpec::homogeneous(3), None, 1.3, 600).map_err(err)?;
    let d3 = max_population_deviation(&r3, 3);
    let early = scenario_population(3, &SystemSpec::homogeneous(3), None, 0.3, 600).map_err(err)?;
    let d3_early = max_population_deviation(&early, 3);
    Ok((
        d3 <= 0.02,
        format!("max |P_abinitio − P_analytic| over χt/π ∈ [0, 1.3] = {d3:.4} (limit 0.02); over [0, 0.3] = {d3_early:.4}"),
    ))
}

fn decay_peaks(n: usize, expected: [f64; 2]) -> Check {
    let x_c = first_crossing(n).map_err(err)?;
    let target = FidelityTarget::Snapshot { chi_t_over_pi: x_c };
    let f0 = peak_fidelity(&SystemSpec::homogeneous(n), x_c, target).map_err(err)?;
    let f1 = peak_fidelity(&SystemSpec::homogeneous(n).with_uniform_kappa(0.25), x_c, target).map_err(err)?;
    let f2 = peak_fidelity(&SystemSpec::homogeneous(n).with_uniform_kappa(0.5), x_c, target).map_err(err)?;
    let ok = f0.fidelity >= 0.995 && within(f1.fidelity, expected[0], 0.005) && within(f2.fidelity, expected[1], 0.005);
    Ok((
        ok,
        format!(
            "peak F{n} near χt/π = {x_c:.4}: κ=0 {:.4} (≥ 0.995), κ=0.25 {:.4} (target {} ± 0.005), κ=0.5 {:.4} (target {} ± 0.005)",
            f0.fidelity, f1.fidelity, expected[0], f2.fidelity, expected[1]
        ),
    ))
}

fn five_resonator_calibration() -> Check {
    let gap = min_w_deviation(&SystemSpec::homogeneous(5)).map_err(err)?;
    let cal = optimize_g1(&SystemSpec::homogeneous(5), (50.0, 80.0), ExecMode::Parallel).map_err(err)?;
    let windows: Vec<f64> = cal.near_w_times.iter().copied().filter(|x| *x > 0.0 && *x <= 2.0).collect();
    let ok = gap > 0.02 && within(cal.g1_mhz, 62.5, 3.0) && windows.len() >= 4;
    Ok((
        ok,
        format!(
            "homogeneous min max|P−1/5| = {gap:.4} (> 0.02); g1* = {:.2} MHz (62.5 ± 3); {} near-W windows at χt/π {:.3?}",
            cal.g1_mhz,
            windows.len(),
            windows
        ),
    ))
}

fn direct_coupling() -> Check {
    let r = sweep_gm(&SystemSpec::homogeneous(3), &[f64::INFINITY, 100.0], &[0.0, 0.5], ExecMode::Parallel).map_err(err)?;
    let d0 = r.column("delta_kappa_0").ok_or("missing column")?[1];
    let d5 = r.column("delta_kappa_0.5").ok_or("missing column")?[1];
    let f0 = r.column("fidelity_kappa_0").ok_or("missing column")?;
    let f5 = r.column("fidelity_kappa_0.5").ok_or("missing column")?;
    Ok((
        d0.abs() <= 0.01 && d5.abs() <= 0.01,
        format!(
            "F3 at first crossing, g/G_M = 100 vs G_M = 0: κ=0 {:.4} vs {:.4} (Δ {d0:+.4}), κ=0.5 {:.4} vs {:.4} (Δ {d5:+.4}); limit |Δ| ≤ 0.01",
            f0[1], f0[0], f5[1], f5[0]
        ),
    ))
}

fn inhomogeneity_map() -> Check {
    let ratios: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
    let x_c = first_crossing(3).map_err(err)?;
    let map = sweep_fidelity_map_g2(
        &SystemSpec::homogeneous(3),
        &ratios,
        (0.0, 1.3),
        600,
        MAP_KAPPA_MHZ,
        FidelityTarget::Snapshot { chi_t_over_pi: x_c },
        ExecMode::Parallel,
    )
    .map_err(err)?;
    let ok = map.best_fidelity >= 0.985 && within(map.best_ratio, 1.0, 0.05) && within(map.best_chi_t_over_pi, 0.22, 0.02);
    Ok((
        ok,
        format!(
            "max F3 = {:.4} at g2/g = {:.2}, χt/π = {:.4} (κ = {MAP_KAPPA_MHZ} MHz)",
            map.best_fidelity, map.best_ratio, map.best_chi_t_over_pi
        ),
    ))
}

fn werner_limit() -> Check {
    let p_grid: Vec<f64> = (0..=10).map(|k| 0.1 * k as f64).collect();
    let thetas = [0.0, PI / 4.0, PI / 2.0];
    let r = sweep_werner(&SystemSpec::homogeneous(3), &p_grid, &thetas, ExecMode::Parallel).map_err(err)?;
    let baseline = r.metadata["baseline_fidelity"].as_f64().ok_or("missing baseline")?;
    let theta = r.column("theta").ok_or("missing column")?;
    let p = r.column("p").ok_or("missing column")?;
    let f = r.column("fidelity").ok_or("missing column")?;
    let k = (0..f.len()).find(|&k| theta[k] == 0.0 && p[k] == 1.0).ok_or("no p=1, θ=0 row")?;
    let limit_error = (f[k] - baseline).abs();
    let affine = r.column("affine_residual").ok_or("missing column")?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((
        limit_error <= 1e-9 && affine <= 1e-9,
        format!("|F(p=1, θ=0) − baseline| = {limit_error:.1e}, max affine residual = {affine:.1e} (baseline {baseline:.6})"),
    ))
}

fn sw_identities() -> Check {
    let basis = single_excitation_basis(4).map_err(err)?;
    let r = verify_sw_identities(&SystemSpec::homogeneous(3), &basis).map_err(err)?;
    Ok((
        r.r1 <= 1e-10 && r.similarity_error <= 1e-10 && r.r3 <= 1e-3,
        format!(
            "r1 = {:.1e}, spectrum(e^S H e^-S) − spectrum(H) = {:.1e}, dispersive-form relative spectral error = {:.1e}",
            r.r1, r.similarity_error, r.r3
        ),
    ))
}

fn unit_arithmetic() -> Check {
    let lifetime = lifetime_from_q(2e6, 5.75).map_err(err)?;
    let kappa_lifetime = lifetime_from_kappa(0.5).map_err(err)?;
    Ok((
        within(lifetime, 55.4, 0.2) && kappa_lifetime == 2.0,
        format!("Q = 2e6 at 5.75 GHz → {lifetime:.3} μs; κ = 0.5 MHz → {kappa_lifetime} μs"),
    ))
}

fn random_system() -> impl Strategy<Value = (SystemSpec, u32, f64)> {
    (2usize..=4, 1u32..=2, 6.75f64..7.5, 0.0f64..2.0, 0.0f64..2.0, 1e-3f64..5e-3).prop_flat_map(
        |(n, cap, bus, bus_kappa, gm, span)| {
            let resonator = (4.5f64..6.5, 0.0f64..100.0, 0.0f64..2.0)
                .prop_map(|(freq_ghz, g_mhz, kappa_mhz)| ResonatorSpec { freq_ghz, g_mhz, kappa_mhz });
            proptest::collection::vec(resonator, n).prop_map(move |resonators| {
                let spec = SystemSpec { bus: BusSpec { freq_ghz: bus, kappa_mhz: bus_kappa }, resonators, gm_mhz: gm };
                (spec, cap, span)
            })
        },
    )
}

fn describe<T: std::fmt::Debug>(r: &Result<(), proptest::test_runner::TestError<T>>) -> String {
    match r {
        Ok(()) => "ok".to_string(),
        Err(e) => format!("{e}"),
    }
}

fn property_suites() -> Check {
    let config = Config { cases: 1000, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config.clone(), TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let lindblad = runner.run(&random_system(), |(spec, cap, span)| {
        let basis = build_basis(spec.n() + 1, 1, Some(cap)).unwrap();
        let set = build_full(&spec, &basis).unwrap();
        let frame = spec.resonators.iter().map(|r| r.omega()).sum::<f64>() / spec.n() as f64;
        let h = set.h_full - basis.total_number() * Complex64::new(frame, 0.0);
        let mut collapse = vec![Collapse { rate: spec.bus.kappa_mhz, operator: basis.annihilation(ModeId::BUS).unwrap() }];
        for (k, r) in spec.resonators.iter().enumerate() {
            collapse.push(Collapse { rate: r.kappa_mhz, operator: basis.annihilation(ModeId::resonator(k + 1)).unwrap() });
        }
        // Mixture of the seeded photon and, when allowed, a two-photon state.
        let mut rho = DensityMatrix::from_pure(&StateVector::basis(basis.dim(), basis.single_photon(ModeId::resonator(1)).unwrap()));
        if cap >= 2 {
            let two = basis.index_of(&{
                let mut occ = vec![0; basis.n_modes()];
                occ[1] = 1;
                occ[2] = 1;
                occ
            });
            if let Some(i) = two {
                rho.entries *= Complex64::new(0.5, 0.0);
                rho.entries[(i, i)] += Complex64::new(0.5, 0.0);
            }
        }
        let grid = TimeGrid::new(0.0, span, 5).unwrap();
        let traj = evolve_lindblad(&h, &collapse, &rho, &grid).unwrap();
        for state in &traj.states {
            prop_assert!((state.trace() - 1.0).abs() < 1e-8, "trace {}", state.trace());
            prop_assert!(state.hermiticity_defect() < 1e-10);
            prop_assert!(state.min_eigenvalue() > -1e-9, "min eigenvalue {}", state.min_eigenvalue());
        }
        Ok(())
    });
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let amplitudes = runner.run(&(2usize..=12, -50.0f64..50.0), |(n, x)| {
        let a = amplitudes_homogeneous(n, x).unwrap();
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert!(a.c[1..].iter().all(|c| *c == a.c[1]));
        Ok(())
    });
    let ok = lindblad.is_ok() && amplitudes.is_ok();
    Ok((ok, format!("1000 Lindblad fuzz cases: {}; 1000 amplitude cases: {}", describe(&lindblad), describe(&amplitudes))))
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, fn() -> Check)> = vec![
        ("analytic W crossings, n=3", crossings_n3),
        ("analytic W crossings, n=4", crossings_n4),
        ("named amplitude snapshots", snapshots),
        ("dispersive model vs full Hamiltonian", effective_vs_ab_initio),
        ("fidelity under decay, n=3", || decay_peaks(3, [0.987, 0.977])),
        ("fidelity under decay, n=4", || decay_peaks(4, [0.984, 0.974])),
        ("five-resonator gap and g1 calibration", five_resonator_calibration),
        ("direct-coupling tolerance", direct_coupling),
        ("g2 inhomogeneity map", inhomogeneity_map),
        ("Werner limit and linearity", werner_limit),
        ("Schrieffer-Wolff identities", sw_identities),
        ("unit arithmetic", unit_arithmetic),
        ("property suites", property_suites),
    ];
    let mut failures = 0;
    for (k, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(outcome) => outcome,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        let status = if pass { "PASS" } else { "FAIL" };
        println!("{status} [{:>2}] {title}: {detail} ({:.1} s)", k + 1, start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
