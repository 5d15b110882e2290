use proptest::prelude::*;

use resonatorsim::analytic::{amplitudes_homogeneous, populations};
use resonatorsim::dynamics::{Propagator, StateVector};
use resonatorsim::experiments::{format_sig, optimize_g1};
use resonatorsim::fockspace::{build_basis, ModeId};
use resonatorsim::hamiltonians::build_full;
use resonatorsim::linalg::hermiticity_defect;
use resonatorsim::model::{lifetime_from_kappa, BusSpec, ResonatorSpec, SystemSpec};
use resonatorsim::observables::resonator_populations;
use resonatorsim::parallel::ExecMode;

fn spec_strategy() -> impl Strategy<Value = SystemSpec> {
    (1usize..=4, 6.5f64..7.5, 0.0f64..5.0).prop_flat_map(|(n, bus, gm)| {
        proptest::collection::vec((4.5f64..6.0, 0.0f64..120.0), n).prop_map(move |rs| SystemSpec {
            bus: BusSpec { freq_ghz: bus, kappa_mhz: 0.0 },
            resonators: rs.into_iter().map(|(freq_ghz, g_mhz)| ResonatorSpec { freq_ghz, g_mhz, kappa_mhz: 0.0 }).collect(),
            gm_mhz: gm,
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_hamiltonian_is_hermitian_and_conserves_photons(spec in spec_strategy(), cap in 1u32..=2) {
        let basis = build_basis(spec.n() + 1, 2, Some(cap)).unwrap();
        let set = build_full(&spec, &basis).unwrap();
        prop_assert!(hermiticity_defect(&set.h_full) < 1e-9);
        let n_op = basis.total_number();
        let comm = &set.h_full * &n_op - &n_op * &set.h_full;
        prop_assert!(comm.iter().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn unitary_evolution_keeps_single_photon_normalized(spec in spec_strategy(), t in 0.0f64..2.0) {
        let basis = build_basis(spec.n() + 1, 1, Some(1)).unwrap();
        let set = build_full(&spec, &basis).unwrap();
        let prop = Propagator::new(&set.h_full).unwrap();
        let psi0 = StateVector::basis(basis.dim(), basis.single_photon(ModeId::resonator(1)).unwrap());
        let psi = prop.apply(&psi0, t);
        prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-9);
        let total: f64 = resonator_populations(&psi, &basis).unwrap().iter().sum();
        prop_assert!(total <= 1.0 + 1e-9);
    }

    #[test]
    fn closed_form_populations_are_symmetric(n in 2usize..=10, x in -20.0f64..20.0) {
        let a = amplitudes_homogeneous(n, x).unwrap();
        let b = amplitudes_homogeneous(n, -x).unwrap();
        let (pa, pb) = (populations(&a), populations(&b));
        for (u, v) in pa.iter().zip(&pb) {
            prop_assert!((u - v).abs() < 1e-12);
        }
        prop_assert!((pa.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_numbers_round_trip_to_twelve_digits(x in prop::num::f64::NORMAL) {
        let s = format_sig(x, 12);
        let y: f64 = s.parse().unwrap();
        prop_assert!(((y - x) / x).abs() < 1e-11, "{x} -> {s}");
        prop_assert!(!s.contains(' ') && !s.contains(','));
    }

    #[test]
    fn kappa_lifetime_round_trips(k in 1e-3f64..1e3) {
        let back = 1.0 / lifetime_from_kappa(k).unwrap();
        prop_assert!((back - k).abs() <= k * f64::EPSILON);
    }
}

#[test]
fn g1_optimizer_stays_inside_interval_and_beats_endpoints() {
    let spec = SystemSpec::homogeneous(5);
    for search in [(50.0, 80.0), (55.0, 60.0), (63.0, 75.0)] {
        let cal = optimize_g1(&spec, search, ExecMode::Parallel).unwrap();
        assert!(cal.g1_mhz >= search.0 && cal.g1_mhz <= search.1, "{search:?}: {}", cal.g1_mhz);
        let first = cal.grid_objective[0];
        let last = *cal.grid_objective.last().unwrap();
        assert!(cal.objective <= first && cal.objective <= last, "{search:?}");
    }
}
