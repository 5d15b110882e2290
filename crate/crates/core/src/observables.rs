//! Populations, fidelities, ideal targets and Werner-type initial states.

use num_complex::Complex64;

use crate::analytic::amplitudes_homogeneous;
use crate::dynamics::{DensityMatrix, StateVector};
use crate::error::{Error, Result};
use crate::fockspace::{FockBasis, ModeId};
use crate::linalg::CMatrix;

/// Anything with a diagonal in the Fock basis.
pub trait Populated {
    fn dim(&self) -> usize;
    fn diagonal(&self, index: usize) -> f64;
}

impl Populated for StateVector {
    fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    fn diagonal(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }
}

impl Populated for DensityMatrix {
    fn dim(&self) -> usize {
        self.entries.nrows()
    }

    fn diagonal(&self, index: usize) -> f64 {
        self.entries[(index, index)].re
    }
}

/// `⟨m|ρ|m⟩` for the occupation vector `occupation`.
pub fn population<S: Populated>(state: &S, basis: &FockBasis, occupation: &[u32]) -> Result<f64> {
    if state.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: state.dim() });
    }
    let index = basis.index_of(occupation).ok_or_else(|| Error::UnknownBasisState(occupation.to_vec()))?;
    Ok(state.diagonal(index))
}

/// Single-photon populations of resonators `R_1..R_n`.
pub fn resonator_populations<S: Populated>(state: &S, basis: &FockBasis) -> Result<Vec<f64>> {
    (1..basis.n_modes())
        .map(|j| basis.single_photon(ModeId::resonator(j)).map(|i| state.diagonal(i)))
        .collect()
}

/// `⟨ψ|ρ|ψ⟩` for a pure target `ψ`.
pub fn fidelity_pure_target(rho: &DensityMatrix, target: &StateVector) -> Result<f64> {
    if rho.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: target.dim() });
    }
    let v = &target.amplitudes;
    Ok(v.dotc(&(&rho.entries * v)).re)
}

/// `|⟨ψ|φ⟩|²`.
pub fn fidelity_pure_pure(state: &StateVector, target: &StateVector) -> Result<f64> {
    if state.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), found: state.dim() });
    }
    Ok(target.inner(state).norm_sqr())
}

/// Embed the closed-form amplitudes at exchange phase `phase` into `basis`
/// (bus in vacuum). The physical state at time `t` of a system with
/// exchange coefficient `J` corresponds to `phase = J·t`, which is negative
/// for resonators below the bus.
pub fn ideal_target(n: usize, phase: f64, basis: &FockBasis) -> Result<StateVector> {
    if basis.n_modes() < n + 1 {
        return Err(Error::DimensionMismatch { expected: n + 1, found: basis.n_modes() });
    }
    let amps = amplitudes_homogeneous(n, phase)?;
    let mut psi = StateVector::new(crate::linalg::CVector::zeros(basis.dim()));
    for (k, c) in amps.c.iter().enumerate() {
        psi.amplitudes[basis.single_photon(ModeId::resonator(k + 1))?] = *c;
    }
    Ok(psi)
}

/// Werner-type mixture `p|Φ⟩⟨Φ| + (1 − p) I₈/8` with
/// `|Φ⟩ = (cos θ |1₁0₂⟩ + i sin θ |0₁1₂⟩)|0₃0₀⟩` and `I₈` the identity on the
/// eight states of `R_1..R_3` at occupation ≤ 1, all other modes empty.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct WernerParams {
    pub p: f64,
    pub theta: f64,
}

/// Occupation vectors spanning the three-resonator qubit subspace.
pub fn werner_support(basis: &FockBasis) -> Result<Vec<usize>> {
    if basis.n_modes() < 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: basis.n_modes() });
    }
    let mut support = Vec::with_capacity(8);
    for bits in 0..8u32 {
        let mut occ = vec![0u32; basis.n_modes()];
        for (k, slot) in occ[1..4].iter_mut().enumerate() {
            *slot = (bits >> (2 - k)) & 1;
        }
        support.push(basis.index_of(&occ).ok_or(Error::UnknownBasisState(occ))?);
    }
    Ok(support)
}

pub fn werner_pure_part(theta: f64, basis: &FockBasis) -> Result<StateVector> {
    werner_support(basis)?;
    let mut psi = StateVector::new(crate::linalg::CVector::zeros(basis.dim()));
    psi.amplitudes[basis.single_photon(ModeId::resonator(1))?] = Complex64::new(theta.cos(), 0.0);
    psi.amplitudes[basis.single_photon(ModeId::resonator(2))?] = Complex64::new(0.0, theta.sin());
    Ok(psi)
}

pub fn werner_mixed_part(basis: &FockBasis) -> Result<DensityMatrix> {
    let mut rho = CMatrix::zeros(basis.dim(), basis.dim());
    for i in werner_support(basis)? {
        rho[(i, i)] = Complex64::new(0.125, 0.0);
    }
    Ok(DensityMatrix::new(rho))
}

pub fn werner_initial(params: WernerParams, basis: &FockBasis) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&params.p) {
        return Err(Error::InvalidParameter(format!("Werner p must lie in [0, 1], got {}", params.p)));
    }
    let pure = DensityMatrix::from_pure(&werner_pure_part(params.theta, basis)?);
    let mixed = werner_mixed_part(basis)?;
    let p = Complex64::new(params.p, 0.0);
    let q = Complex64::new(1.0 - params.p, 0.0);
    Ok(DensityMatrix::new(pure.entries * p + mixed.entries * q))
}
