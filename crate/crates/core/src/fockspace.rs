//! Truncated multimode Fock basis and bosonic ladder operators.
//!
//! Mode 0 is the bus resonator `R_0`; modes `1..=n` are the distant
//! resonators. Basis states are occupation vectors with one entry per mode,
//! each in `0..=cutoff`, optionally limited to a total photon number. States
//! are ordered lexicographically, so indices are stable across runs.
//!
//! Operators are projected onto the basis: any component that would leave the
//! basis is dropped. Products of ladder operators should be built with
//! [`FockBasis::monomial`], which applies the whole product to each
//! occupation vector before projecting. Multiplying individually truncated
//! matrices is not the same thing in an excitation-capped basis: `a b†`
//! applied to a bus photon passes through a two-photon state that the cap
//! removes.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

pub type OperatorMatrix = CMatrix;

/// Index of a resonator mode: 0 is the bus, `1..=n` the distant resonators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeId(pub usize);

impl ModeId {
    pub const BUS: ModeId = ModeId(0);

    /// Distant resonator `R_j`, `j >= 1`.
    pub fn resonator(j: usize) -> ModeId {
        assert!(j >= 1, "distant resonators are numbered from 1");
        ModeId(j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    Create,
    Annihilate,
}

#[derive(Debug, Clone)]
pub struct FockBasis {
    n_modes: usize,
    cutoff: u32,
    excitation_cap: Option<u32>,
    states: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

/// Enumerate the truncated basis.
pub fn build_basis(n_modes: usize, cutoff: u32, excitation_cap: Option<u32>) -> Result<FockBasis> {
    if n_modes < 2 {
        return Err(Error::InvalidBasis(format!("need at least 2 modes, got {n_modes}")));
    }
    if cutoff < 1 {
        return Err(Error::InvalidBasis("cutoff must be at least 1".into()));
    }
    let admissible = |occ: &[u32]| excitation_cap.is_none_or(|cap| occ.iter().sum::<u32>() <= cap);

    // Odometer over [0, cutoff]^n_modes with the last mode varying fastest,
    // which yields lexicographic order directly.
    let mut states = Vec::new();
    let mut occ = vec![0u32; n_modes];
    loop {
        if admissible(&occ) {
            states.push(occ.clone());
        }
        let mut k = n_modes;
        loop {
            if k == 0 {
                let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
                return Ok(FockBasis { n_modes, cutoff, excitation_cap, states, index });
            }
            k -= 1;
            if occ[k] < cutoff {
                occ[k] += 1;
                occ[k + 1..].iter_mut().for_each(|o| *o = 0);
                break;
            }
        }
    }
}

impl FockBasis {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn excitation_cap(&self) -> Option<u32> {
        self.excitation_cap
    }

    pub fn states(&self) -> &[Vec<u32>] {
        &self.states
    }

    pub fn occupation(&self, index: usize) -> &[u32] {
        &self.states[index]
    }

    pub fn index_of(&self, occupation: &[u32]) -> Option<usize> {
        self.index.get(occupation).copied()
    }

    pub fn total_photons(&self, index: usize) -> u32 {
        self.states[index].iter().sum()
    }

    /// Index of the state with one photon in `mode` and vacuum elsewhere.
    pub fn single_photon(&self, mode: ModeId) -> Result<usize> {
        self.check_mode(mode)?;
        let mut occ = vec![0; self.n_modes];
        occ[mode.0] = 1;
        self.index_of(&occ).ok_or(Error::UnknownBasisState(occ))
    }

    pub fn vacuum(&self) -> usize {
        0
    }

    fn check_mode(&self, mode: ModeId) -> Result<()> {
        if mode.0 >= self.n_modes {
            return Err(Error::InvalidMode { mode: mode.0, n_modes: self.n_modes });
        }
        Ok(())
    }

    /// Matrix of the ordered product `ops[0] ops[1] ... ops[k-1]`.
    ///
    /// The rightmost factor acts first. Intermediate occupations may use the
    /// full per-mode cutoff; only the final state must lie in the basis.
    pub fn monomial(&self, ops: &[(ModeId, Ladder)]) -> Result<OperatorMatrix> {
        for &(mode, _) in ops {
            self.check_mode(mode)?;
        }
        let dim = self.dim();
        let mut m = OperatorMatrix::zeros(dim, dim);
        for (col, state) in self.states.iter().enumerate() {
            let mut occ = state.clone();
            let mut amp = 1.0;
            let mut alive = true;
            for &(mode, kind) in ops.iter().rev() {
                let n = occ[mode.0];
                match kind {
                    Ladder::Annihilate if n == 0 => alive = false,
                    Ladder::Annihilate => {
                        amp *= f64::from(n).sqrt();
                        occ[mode.0] = n - 1;
                    }
                    Ladder::Create if n >= self.cutoff => alive = false,
                    Ladder::Create => {
                        amp *= f64::from(n + 1).sqrt();
                        occ[mode.0] = n + 1;
                    }
                }
                if !alive {
                    break;
                }
            }
            if alive {
                if let Some(row) = self.index_of(&occ) {
                    m[(row, col)] += Complex64::new(amp, 0.0);
                }
            }
        }
        Ok(m)
    }

    pub fn annihilation(&self, mode: ModeId) -> Result<OperatorMatrix> {
        self.monomial(&[(mode, Ladder::Annihilate)])
    }

    pub fn creation(&self, mode: ModeId) -> Result<OperatorMatrix> {
        self.monomial(&[(mode, Ladder::Create)])
    }

    /// `b† b` for `mode`.
    pub fn number(&self, mode: ModeId) -> Result<OperatorMatrix> {
        self.check_mode(mode)?;
        let dim = self.dim();
        Ok(OperatorMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(f64::from(self.states[i][mode.0]), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Total photon number `a†a + Σ b_j† b_j`.
    pub fn total_number(&self) -> OperatorMatrix {
        let dim = self.dim();
        OperatorMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::new(f64::from(self.total_photons(i)), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// `to† from`: moves one photon from `from` to `to`.
    pub fn hop(&self, from: ModeId, to: ModeId) -> Result<OperatorMatrix> {
        self.monomial(&[(to, Ladder::Create), (from, Ladder::Annihilate)])
    }

    /// `x† y + y† x`, the symmetric exchange term between two modes.
    pub fn exchange(&self, x: ModeId, y: ModeId) -> Result<OperatorMatrix> {
        Ok(self.hop(x, y)? + self.hop(y, x)?)
    }

    /// Keep only the rows and columns whose states satisfy `keep`.
    pub fn restrict(&self, op: &OperatorMatrix, keep: impl Fn(&[u32]) -> bool) -> OperatorMatrix {
        let idx: Vec<usize> = (0..self.dim()).filter(|&i| keep(&self.states[i])).collect();
        OperatorMatrix::from_fn(idx.len(), idx.len(), |i, j| op[(idx[i], idx[j])])
    }
}

/// `AB − BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), found: b.nrows() });
    }
    Ok(crate::linalg::commutator(a, b))
}
