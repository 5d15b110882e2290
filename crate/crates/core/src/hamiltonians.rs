//! Hamiltonian matrices for the bus plus distant resonators, the
//! Schrieffer-Wolff generator, and numerical checks of the transformation.
//!
//! The full Hamiltonian (rotating-wave form, ħ = 1) is
//!
//! ```text
//! H = Ω₀ a†a + Σ ω_j b_j†b_j + Σ g_j (a†b_j + a b_j†) + G_M Σ (b_j b_{j+1}† + h.c.)
//! ```
//!
//! with the direct-coupling term along the chain `R_1–R_2–…–R_n`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{build_basis, commutator, FockBasis, ModeId, OperatorMatrix};
use crate::linalg::{expm_anti_hermitian, hermitian_eigenvalues, hermiticity_defect, operator_norm};
use crate::model::{derive_dispersive, DispersiveModel, SystemSpec};

/// Hermiticity tolerance for assembled Hamiltonians, relative to the
/// largest entry.
const HERMITIAN_REL_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct HamiltonianSet {
    /// `h0 + h_int + h_direct`.
    pub h_full: OperatorMatrix,
    pub h0: OperatorMatrix,
    pub h_int: OperatorMatrix,
    /// Direct nearest-neighbour coupling; zero when `G_M = 0`.
    pub h_direct: OperatorMatrix,
    /// Second-order dispersive Hamiltonian on the same basis, bus included:
    /// Lamb-shifted diagonal plus the exchange terms. `None` if a detuning
    /// vanishes.
    pub h_dispersive: Option<OperatorMatrix>,
    /// Anti-Hermitian generator `S` with `[S, h0] = −h_int`. `None` if a
    /// detuning vanishes.
    pub s_generator: Option<OperatorMatrix>,
}

fn check_modes(spec: &SystemSpec, basis: &FockBasis) -> Result<()> {
    if basis.n_modes() != spec.n() + 1 {
        return Err(Error::DimensionMismatch { expected: spec.n() + 1, found: basis.n_modes() });
    }
    Ok(())
}

fn scaled(op: OperatorMatrix, s: f64) -> OperatorMatrix {
    op * Complex64::new(s, 0.0)
}

/// Lab-frame Hamiltonian and its parts on `basis` (which must have `n + 1`
/// modes, bus first).
pub fn build_full(spec: &SystemSpec, basis: &FockBasis) -> Result<HamiltonianSet> {
    spec.validate()?;
    check_modes(spec, basis)?;
    let dim = basis.dim();
    let mut h0 = scaled(basis.number(ModeId::BUS)?, spec.bus_omega());
    let mut h_int = OperatorMatrix::zeros(dim, dim);
    for (k, r) in spec.resonators.iter().enumerate() {
        let mode = ModeId::resonator(k + 1);
        h0 += scaled(basis.number(mode)?, r.omega());
        if r.g_mhz != 0.0 {
            h_int += scaled(basis.exchange(ModeId::BUS, mode)?, r.coupling());
        }
    }
    let mut h_direct = OperatorMatrix::zeros(dim, dim);
    if spec.gm_mhz != 0.0 {
        for j in 1..spec.n() {
            let link = basis.exchange(ModeId::resonator(j), ModeId::resonator(j + 1))?;
            h_direct += scaled(link, spec.direct_coupling());
        }
    }
    let h_full = &h0 + &h_int + &h_direct;

    let (h_dispersive, s_generator) = match derive_dispersive(spec) {
        Ok(model) => (Some(dispersive_on(&model, basis)?), Some(generator_on(spec, basis)?)),
        Err(Error::ZeroDetuning { .. }) => (None, None),
        Err(e) => return Err(e),
    };

    let scale = crate::linalg::max_abs(&h_full).max(1.0);
    let deviation = hermiticity_defect(&h_full);
    if deviation > HERMITIAN_REL_TOL * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(HamiltonianSet { h_full, h0, h_int, h_direct, h_dispersive, s_generator })
}

fn dispersive_on(model: &DispersiveModel, basis: &FockBasis) -> Result<OperatorMatrix> {
    let n = model.n();
    let mut h = scaled(basis.number(ModeId::BUS)?, model.lamb_shifted_bus);
    for k in 0..n {
        let mode = ModeId::resonator(k + 1);
        h += scaled(basis.number(mode)?, model.lamb_shifted_omega_j[k]);
        for l in k + 1..n {
            if model.chi[(k, l)] != 0.0 {
                let pair = basis.exchange(mode, ModeId::resonator(l + 1))?;
                h += scaled(pair, model.exchange(k, l));
            }
        }
    }
    Ok(h)
}

fn generator_on(spec: &SystemSpec, basis: &FockBasis) -> Result<OperatorMatrix> {
    let dim = basis.dim();
    let mut s = OperatorMatrix::zeros(dim, dim);
    for (k, (r, delta)) in spec.resonators.iter().zip(spec.detunings()).enumerate() {
        if delta == 0.0 {
            return Err(Error::ZeroDetuning { resonator: k + 1 });
        }
        if r.g_mhz == 0.0 {
            continue;
        }
        let mode = ModeId::resonator(k + 1);
        // a† b_j − a b_j†
        let term = basis.hop(mode, ModeId::BUS)? - basis.hop(ModeId::BUS, mode)?;
        s += scaled(term, r.coupling() / delta);
    }
    Ok(s)
}

/// `S = Σ_j (g_j/Δ_j)(a† b_j − a b_j†)`, which satisfies `[S, H₀] = −H_int`
/// for `Δ_j = Ω₀ − ω_j`.
pub fn build_sw_generator(spec: &SystemSpec, basis: &FockBasis) -> Result<OperatorMatrix> {
    spec.validate()?;
    check_modes(spec, basis)?;
    generator_on(spec, basis)
}

/// Time-independent effective Hamiltonian of the distant resonators with the
/// bus eliminated, expressed in the rotating frame of the common resonator
/// frequency:
///
/// `H_eff = Σ_{i<j} J_ij (b_i b_j† + b_i† b_j)`, `J_ij = −χ_ij`.
///
/// `basis` has exactly `n` modes and mode `k` stands for resonator
/// `R_{k+1}` (there is no bus mode here). Fails with
/// [`Error::NotResonant`] when the Lamb-shifted resonators are detuned from
/// each other; that case needs the amplitude equations in
/// [`crate::dynamics::integrate_amplitudes`].
pub fn build_effective(model: &DispersiveModel, basis: &FockBasis) -> Result<OperatorMatrix> {
    let n = model.n();
    if basis.n_modes() != n {
        return Err(Error::DimensionMismatch { expected: n, found: basis.n_modes() });
    }
    let omega_scale = model.lamb_shifted_omega_j.iter().fold(1.0f64, |m, w| m.max(w.abs()));
    let max_residual = model.max_residual_detuning();
    if max_residual > 1e-12 * omega_scale {
        return Err(Error::NotResonant { max_residual });
    }
    let mut h = OperatorMatrix::zeros(basis.dim(), basis.dim());
    for i in 0..n {
        for j in i + 1..n {
            if model.chi[(i, j)] != 0.0 {
                h += scaled(basis.exchange(ModeId(i), ModeId(j))?, model.exchange(i, j));
            }
        }
    }
    Ok(h)
}

/// Residuals of the Schrieffer-Wolff construction. Norms are operator
/// 2-norms in rad/μs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SwReport {
    /// `‖[S, H₀] + H_int‖`.
    pub r1: f64,
    /// `‖e^S H e^{−S} − (H₀ + ½[S, H_int])‖`.
    pub r2: f64,
    /// `r2 / ‖H_int‖`.
    pub r2_relative: f64,
    /// Largest eigenvalue difference between `e^S H e^{−S}` and `H`,
    /// measured in the frame rotating at the mean resonator frequency.
    pub similarity_error: f64,
    /// Largest relative eigenvalue difference between `e^S H e^{−S}` and the
    /// second-order dispersive Hamiltonian.
    pub r3: f64,
    /// `max_j g_j/|Δ_j|`.
    pub max_ratio: f64,
}

/// Check the transformation identities on `basis`. The commutator identity
/// is exact only in a single-excitation basis; elsewhere the report still
/// computes but `r1` picks up truncation effects.
pub fn verify_sw_identities(spec: &SystemSpec, basis: &FockBasis) -> Result<SwReport> {
    let set = build_full(spec, basis)?;
    let model = derive_dispersive(spec)?;
    let s = set.s_generator.as_ref().expect("detunings are nonzero");
    let h_disp = set.h_dispersive.as_ref().expect("detunings are nonzero");

    let r1 = operator_norm(&(commutator(s, &set.h0)? + &set.h_int));

    let u = expm_anti_hermitian(s);
    let transformed = &u * &set.h_full * u.adjoint();
    let second_order = &set.h0 + commutator(s, &set.h_int)? * Complex64::new(0.5, 0.0);
    let r2 = operator_norm(&(&transformed - &second_order));
    let h_int_norm = operator_norm(&set.h_int);
    let r2_relative = if h_int_norm > 0.0 { r2 / h_int_norm } else { 0.0 };

    // S commutes with the photon number N, so e^S (H − ω N) e^{−S} is the
    // transformed operator shifted by the same ω N. Comparing spectra in
    // that frame removes the large common ω from the eigenvalue roundoff.
    let frame = spec.resonators.iter().map(|r| r.omega()).sum::<f64>() / spec.n() as f64;
    let shifted = &set.h_full - basis.total_number() * Complex64::new(frame, 0.0);
    let exact = hermitian_eigenvalues(&shifted);
    let similarity_error = hermitian_eigenvalues(&(&u * &shifted * u.adjoint()))
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let rotated = hermitian_eigenvalues(&transformed);
    let approx = hermitian_eigenvalues(h_disp);
    let r3 = rotated
        .iter()
        .zip(&approx)
        .map(|(a, b)| {
            let scale = a.abs().max(b.abs());
            if scale == 0.0 {
                0.0
            } else {
                (a - b).abs() / scale
            }
        })
        .fold(0.0, f64::max);

    let max_ratio = spec
        .resonators
        .iter()
        .zip(&model.delta_j)
        .map(|(r, d)| r.coupling() / d.abs())
        .fold(0.0, f64::max);
    Ok(SwReport { r1, r2, r2_relative, similarity_error, r3, max_ratio })
}

/// Vacuum plus one photon in each of the `n_modes` modes.
pub fn single_excitation_basis(n_modes: usize) -> Result<FockBasis> {
    build_basis(n_modes, 1, Some(1))
}
