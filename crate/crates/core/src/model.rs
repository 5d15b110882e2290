//! Physical parameters and derived dispersive quantities.
//!
//! Configuration uses ordinary frequencies (GHz for mode frequencies, MHz for
//! couplings) and plain decay rates in MHz = μs⁻¹. Everything derived here is
//! angular, in rad/μs.
//!
//! Sign convention: detunings are `Δ_j = Ω₀ − ω_j`, and `χ_ij` is
//! `(g_i g_j / 2)(1/Δ_i + 1/Δ_j)`, positive for resonators below the bus.
//! The second-order effective Hamiltonian obtained by eliminating the bus is
//!
//! ```text
//! H′ = Ω₀′ a†a + Σ ω_j′ b_j†b_j − Σ_{i<j} χ_ij (b_i b_j† + b_i† b_j)
//! ω_j′ = ω_j − g_j²/Δ_j        Ω₀′ = Ω₀ + Σ g_j²/Δ_j
//! ```
//!
//! so the exchange coefficient actually seen by the dynamics is `−χ_ij`
//! ([`DispersiveModel::exchange`]). Level repulsion pushes the resonators
//! down and the bus up when the bus is the higher mode.

use std::f64::consts::TAU;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// GHz (ordinary) to rad/μs.
pub fn ghz_to_angular(f_ghz: f64) -> f64 {
    TAU * f_ghz * 1e3
}

/// MHz (ordinary) to rad/μs.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// Default working point: bus at 6.75 GHz, resonators at 5.75 GHz, g = 2π×50 MHz.
pub const WORKING_BUS_GHZ: f64 = 6.75;
pub const WORKING_RESONATOR_GHZ: f64 = 5.75;
pub const WORKING_G_MHZ: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusSpec {
    pub freq_ghz: f64,
    #[serde(default)]
    pub kappa_mhz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorSpec {
    pub freq_ghz: f64,
    pub g_mhz: f64,
    #[serde(default)]
    pub kappa_mhz: f64,
}

impl ResonatorSpec {
    pub fn omega(&self) -> f64 {
        ghz_to_angular(self.freq_ghz)
    }

    pub fn coupling(&self) -> f64 {
        mhz_to_angular(self.g_mhz)
    }
}

/// Bus plus distant resonators, in configuration units.
///
/// JSON form:
/// `{"bus": {"freq_ghz": 6.75, "kappa_mhz": 0.5},
///   "resonators": [{"freq_ghz": 5.75, "g_mhz": 50.0, "kappa_mhz": 0.5}, ...],
///   "gm_mhz": 0.0}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    pub bus: BusSpec,
    pub resonators: Vec<ResonatorSpec>,
    #[serde(default)]
    pub gm_mhz: f64,
}

impl SystemSpec {
    /// Homogeneous system at the default working point (bus 6.75 GHz, resonators 5.75 GHz, g = 50 MHz), lossless.
    pub fn homogeneous(n: usize) -> SystemSpec {
        SystemSpec {
            bus: BusSpec { freq_ghz: WORKING_BUS_GHZ, kappa_mhz: 0.0 },
            resonators: vec![
                ResonatorSpec { freq_ghz: WORKING_RESONATOR_GHZ, g_mhz: WORKING_G_MHZ, kappa_mhz: 0.0 };
                n
            ],
            gm_mhz: 0.0,
        }
    }

    /// Same decay rate on every mode, bus included.
    pub fn with_uniform_kappa(mut self, kappa_mhz: f64) -> SystemSpec {
        self.bus.kappa_mhz = kappa_mhz;
        self.resonators.iter_mut().for_each(|r| r.kappa_mhz = kappa_mhz);
        self
    }

    pub fn with_gm(mut self, gm_mhz: f64) -> SystemSpec {
        self.gm_mhz = gm_mhz;
        self
    }

    /// Replace the coupling of resonator `R_j` (1-based).
    pub fn with_coupling(mut self, j: usize, g_mhz: f64) -> SystemSpec {
        self.resonators[j - 1].g_mhz = g_mhz;
        self
    }

    pub fn n(&self) -> usize {
        self.resonators.len()
    }

    pub fn bus_omega(&self) -> f64 {
        ghz_to_angular(self.bus.freq_ghz)
    }

    pub fn direct_coupling(&self) -> f64 {
        mhz_to_angular(self.gm_mhz)
    }

    /// `Δ_j = Ω₀ − ω_j` in rad/μs.
    pub fn detunings(&self) -> Vec<f64> {
        let bus = self.bus_omega();
        self.resonators.iter().map(|r| bus - r.omega()).collect()
    }

    /// Reference `χ = g²/Δ` of the last resonator, used as the time unit for
    /// `χt/π` axes. Sweeps that vary one coupling keep the last one fixed.
    pub fn reference_chi(&self) -> Result<f64> {
        let last = self
            .resonators
            .last()
            .ok_or_else(|| Error::InvalidParameter("system has no resonators".into()))?;
        let delta = self.bus_omega() - last.omega();
        if delta == 0.0 {
            return Err(Error::ZeroDetuning { resonator: self.n() });
        }
        Ok(last.coupling().powi(2) / delta)
    }

    pub fn validate(&self) -> Result<()> {
        if self.resonators.is_empty() {
            return Err(Error::InvalidParameter("at least one resonator is required".into()));
        }
        if !(self.bus.freq_ghz.is_finite() && self.bus.freq_ghz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bus frequency must be positive, got {} GHz",
                self.bus.freq_ghz
            )));
        }
        if !(self.bus.kappa_mhz.is_finite() && self.bus.kappa_mhz >= 0.0) {
            return Err(Error::InvalidParameter("bus kappa must be non-negative".into()));
        }
        if !self.gm_mhz.is_finite() {
            return Err(Error::InvalidParameter("gm must be finite".into()));
        }
        for (k, r) in self.resonators.iter().enumerate() {
            let j = k + 1;
            if !(r.freq_ghz.is_finite() && r.freq_ghz > 0.0) {
                return Err(Error::InvalidParameter(format!("R{j}: frequency must be positive")));
            }
            if !(r.g_mhz.is_finite() && r.g_mhz >= 0.0) {
                return Err(Error::InvalidParameter(format!("R{j}: coupling must be non-negative")));
            }
            if !(r.kappa_mhz.is_finite() && r.kappa_mhz >= 0.0) {
                return Err(Error::InvalidParameter(format!("R{j}: kappa must be non-negative")));
            }
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<SystemSpec> {
        let spec: SystemSpec =
            serde_json::from_str(s).map_err(|e| Error::Config(format!("invalid system config: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<SystemSpec> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
        Self::from_json_str(&text)
    }
}

/// Quantities derived from a [`SystemSpec`] in the dispersive regime.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersiveModel {
    /// `Δ_j = Ω₀ − ω_j`.
    pub delta_j: Vec<f64>,
    /// `ω_j′ = ω_j − g_j²/Δ_j`.
    pub lamb_shifted_omega_j: Vec<f64>,
    /// `Ω₀′ = Ω₀ + Σ g_j²/Δ_j`.
    pub lamb_shifted_bus: f64,
    /// Symmetric, zero diagonal. Row/column `k` is resonator `R_{k+1}`.
    pub chi: DMatrix<f64>,
    /// `δ_ij = ω_i′ − ω_j′`, antisymmetric.
    pub delta_ij: DMatrix<f64>,
}

impl DispersiveModel {
    pub fn n(&self) -> usize {
        self.delta_j.len()
    }

    /// Signed coefficient of `(b_i b_j† + h.c.)` in the effective
    /// Hamiltonian (0-based indices).
    pub fn exchange(&self, i: usize, j: usize) -> f64 {
        -self.chi[(i, j)]
    }

    pub fn max_residual_detuning(&self) -> f64 {
        self.delta_ij.iter().map(|d| d.abs()).fold(0.0, f64::max)
    }

    /// All pairwise χ equal and all δ_ij zero, to relative precision `rel`.
    pub fn is_homogeneous(&self, rel: f64) -> bool {
        let n = self.n();
        if n < 2 {
            return true;
        }
        let chi0 = self.chi[(0, 1)];
        let scale = chi0.abs().max(f64::MIN_POSITIVE);
        let chi_equal = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .all(|(i, j)| (self.chi[(i, j)] - chi0).abs() <= rel * scale);
        let omega_scale = self.lamb_shifted_omega_j.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        chi_equal && self.max_residual_detuning() <= rel * omega_scale.max(scale)
    }
}

pub fn derive_dispersive(spec: &SystemSpec) -> Result<DispersiveModel> {
    spec.validate()?;
    let delta_j = spec.detunings();
    if let Some(k) = delta_j.iter().position(|&d| d == 0.0) {
        return Err(Error::ZeroDetuning { resonator: k + 1 });
    }
    let g: Vec<f64> = spec.resonators.iter().map(ResonatorSpec::coupling).collect();
    let n = spec.n();
    let shift: Vec<f64> = (0..n).map(|k| g[k] * g[k] / delta_j[k]).collect();
    let lamb_shifted_omega_j: Vec<f64> =
        spec.resonators.iter().zip(&shift).map(|(r, s)| r.omega() - s).collect();
    let lamb_shifted_bus = spec.bus_omega() + shift.iter().sum::<f64>();
    let chi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            0.5 * g[i] * g[j] * (1.0 / delta_j[i] + 1.0 / delta_j[j])
        }
    });
    let delta_ij = DMatrix::from_fn(n, n, |i, j| lamb_shifted_omega_j[i] - lamb_shifted_omega_j[j]);
    Ok(DispersiveModel { delta_j, lamb_shifted_omega_j, lamb_shifted_bus, chi, delta_ij })
}

/// `g/|Δ|` above this is flagged.
pub const DISPERSIVE_WARN_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Validity {
    Pass,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityCheck {
    pub resonator: usize,
    pub ratio: f64,
    pub flag: Validity,
}

/// Per-resonator `g_j/|Δ_j|` with a warning flag above
/// [`DISPERSIVE_WARN_RATIO`].
pub fn dispersive_validity(spec: &SystemSpec) -> Result<Vec<ValidityCheck>> {
    spec.validate()?;
    spec.resonators
        .iter()
        .zip(spec.detunings())
        .enumerate()
        .map(|(k, (r, delta))| {
            if delta == 0.0 {
                return Err(Error::ZeroDetuning { resonator: k + 1 });
            }
            let ratio = r.coupling() / delta.abs();
            let flag = if ratio > DISPERSIVE_WARN_RATIO { Validity::Warn } else { Validity::Pass };
            Ok(ValidityCheck { resonator: k + 1, ratio, flag })
        })
        .collect()
}

/// Photon lifetime `Q/ω_r` in μs for a resonator at `frequency_ghz`.
pub fn lifetime_from_q(q_factor: f64, frequency_ghz: f64) -> Result<f64> {
    if !(q_factor > 0.0 && frequency_ghz > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Q and frequency must be positive (Q = {q_factor}, f = {frequency_ghz} GHz)"
        )));
    }
    Ok(q_factor / ghz_to_angular(frequency_ghz))
}

/// Lifetime `1/κ` in μs for a plain decay rate in MHz.
pub fn lifetime_from_kappa(kappa_mhz: f64) -> Result<f64> {
    if !(kappa_mhz > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa_mhz}")));
    }
    Ok(1.0 / kappa_mhz)
}
