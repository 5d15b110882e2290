//! Time propagation of pure states, density matrices and dispersive-model
//! amplitudes.
//!
//! Initial states are given at `t = 0`. A [`TimeGrid`] may start later, in
//! which case the state is propagated silently up to `t_start` and sampled
//! from there.

use num_complex::Complex64;

use crate::analytic::AmplitudeVector;
use crate::error::{Error, Result};
use crate::fockspace::OperatorMatrix;
use crate::linalg::{hermitian_eigen, hermiticity_defect, max_abs, spectral_radius_hermitian, CMatrix, CVector, I};
use crate::model::DispersiveModel;

#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: CVector,
}

impl StateVector {
    pub fn new(amplitudes: CVector) -> StateVector {
        StateVector { amplitudes }
    }

    /// Basis vector `index` of a `dim`-dimensional space.
    pub fn basis(dim: usize, index: usize) -> StateVector {
        let mut v = CVector::zeros(dim);
        v[index] = Complex64::new(1.0, 0.0);
        StateVector { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> DensityMatrix {
        DensityMatrix { entries }
    }

    pub fn from_pure(psi: &StateVector) -> DensityMatrix {
        DensityMatrix { entries: &psi.amplitudes * psi.amplitudes.adjoint() }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.entries)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        crate::linalg::hermitian_eigenvalues(&sym).first().copied().unwrap_or(0.0)
    }
}

/// Uniform grid of `points` times from `t_start` to `t_end` inclusive, μs.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub points: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, points: usize) -> Result<TimeGrid> {
        if points < 2 {
            return Err(Error::InvalidParameter(format!("time grid needs at least 2 points, got {points}")));
        }
        if !(t_start.is_finite() && t_end.is_finite() && t_start >= 0.0 && t_end > t_start) {
            return Err(Error::InvalidParameter(format!(
                "time grid must satisfy 0 <= t_start < t_end, got [{t_start}, {t_end}]"
            )));
        }
        Ok(TimeGrid { t_start, t_end, points })
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.points {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * k as f64 / (self.points - 1) as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.time(k)).collect()
    }
}

/// States sampled on a grid, one per grid point.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub grid: TimeGrid,
    pub states: Vec<S>,
}

impl<S> Trajectory<S> {
    pub fn iter(&self) -> impl Iterator<Item = (f64, &S)> {
        self.states.iter().enumerate().map(|(k, s)| (self.grid.time(k), s))
    }
}

fn check_hermitian(h: &OperatorMatrix) -> Result<()> {
    let deviation = hermiticity_defect(h);
    if deviation > 1e-12 * max_abs(h).max(1.0) {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// `e^{−iHt}` for a fixed Hermitian `H`, via one eigendecomposition.
#[derive(Debug, Clone)]
pub struct Propagator {
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &OperatorMatrix) -> Result<Propagator> {
        check_hermitian(h)?;
        let (energies, vectors) = hermitian_eigen(h);
        Ok(Propagator { energies, vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    /// `ψ(t) = V e^{−iEt} V† ψ₀`.
    pub fn apply(&self, psi0: &StateVector, t: f64) -> StateVector {
        let mut coeffs = self.vectors.ad_mul(&psi0.amplitudes);
        for (c, e) in coeffs.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * t);
        }
        StateVector { amplitudes: &self.vectors * coeffs }
    }
}

pub fn evolve_unitary(h: &OperatorMatrix, psi0: &StateVector, grid: &TimeGrid) -> Result<Trajectory<StateVector>> {
    if h.nrows() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: psi0.dim() });
    }
    let prop = Propagator::new(h)?;
    let states = grid.times().into_iter().map(|t| prop.apply(psi0, t)).collect();
    Ok(Trajectory { grid: *grid, states })
}

/// Collapse operator `ξ` with its rate `κ` in μs⁻¹.
#[derive(Debug, Clone)]
pub struct Collapse {
    pub rate: f64,
    pub operator: OperatorMatrix,
}

/// Largest allowed `‖H‖·h` for the fixed-step integrators.
const MAX_PHASE_PER_STEP: f64 = 0.01;
/// Minimum number of steps across the whole span.
const MIN_STEPS: f64 = 4000.0;

fn step_size(span: f64, rate_scale: f64) -> f64 {
    let by_span = span / MIN_STEPS;
    if rate_scale > 0.0 {
        by_span.min(MAX_PHASE_PER_STEP / rate_scale)
    } else {
        by_span
    }
}

/// `dρ/dt = −i[H, ρ] + Σ κ (ξ ρ ξ† − ½{ξ†ξ, ρ})` split as
/// `K + K† + Σ κ ξ ρ ξ†` with `K = −i H_nh ρ` and
/// `H_nh = H − (i/2) Σ κ ξ†ξ`. Both parts are stored as sparse triplets;
/// the operators here are number-conserving or single ladder steps, so
/// they are very sparse.
struct Liouvillian {
    /// Nonzero entries `(row, col, value)` of `−i H_nh`.
    generator: Vec<(usize, usize, Complex64)>,
    /// Nonzero entries `(row, col, √κ·ξ[row, col])` of every jump operator.
    jumps: Vec<Vec<(usize, usize, Complex64)>>,
    scratch: CMatrix,
}

fn triplets(m: &CMatrix, scale: Complex64) -> Vec<(usize, usize, Complex64)> {
    let (rows, cols) = m.shape();
    (0..cols)
        .flat_map(|col| (0..rows).map(move |row| (row, col)))
        .filter_map(|(row, col)| {
            let z = m[(row, col)];
            (z != Complex64::new(0.0, 0.0)).then_some((row, col, z * scale))
        })
        .collect()
}

impl Liouvillian {
    fn new(h: &OperatorMatrix, collapse: &[Collapse]) -> Liouvillian {
        let dim = h.nrows();
        let mut h_nh = h.clone();
        let mut jumps = Vec::new();
        for c in collapse.iter().filter(|c| c.rate > 0.0) {
            h_nh -= (c.operator.adjoint() * &c.operator) * Complex64::new(0.0, 0.5 * c.rate);
            jumps.push(triplets(&c.operator, Complex64::new(c.rate.sqrt(), 0.0)));
        }
        Liouvillian { generator: triplets(&h_nh, -I), jumps, scratch: CMatrix::zeros(dim, dim) }
    }

    fn apply(&mut self, rho: &CMatrix, out: &mut CMatrix) {
        let dim = rho.nrows();
        self.scratch.fill(Complex64::new(0.0, 0.0));
        for &(a, k, v) in &self.generator {
            for j in 0..dim {
                self.scratch[(a, j)] += v * rho[(k, j)];
            }
        }
        for j in 0..dim {
            for i in 0..dim {
                out[(i, j)] = self.scratch[(i, j)] + self.scratch[(j, i)].conj();
            }
        }
        for jump in &self.jumps {
            for &(a, i, x) in jump {
                for &(b, j, y) in jump {
                    out[(a, b)] += x * rho[(i, j)] * y.conj();
                }
            }
        }
    }
}

struct Rk4 {
    liouvillian: Liouvillian,
    k1: CMatrix,
    k2: CMatrix,
    k3: CMatrix,
    k4: CMatrix,
    stage: CMatrix,
}

impl Rk4 {
    fn step(&mut self, rho: &mut CMatrix, h: f64) {
        self.liouvillian.apply(rho, &mut self.k1);
        combine(&mut self.stage, rho, 0.5 * h, &self.k1);
        self.liouvillian.apply(&self.stage, &mut self.k2);
        combine(&mut self.stage, rho, 0.5 * h, &self.k2);
        self.liouvillian.apply(&self.stage, &mut self.k3);
        combine(&mut self.stage, rho, h, &self.k3);
        self.liouvillian.apply(&self.stage, &mut self.k4);
        let (sixth, third) = (h / 6.0, h / 3.0);
        for (((r, a), (b, c)), d) in rho
            .iter_mut()
            .zip(self.k1.iter())
            .zip(self.k2.iter().zip(self.k3.iter()))
            .zip(self.k4.iter())
        {
            *r += (a + d) * sixth + (b + c) * third;
        }
        symmetrize(rho);
    }
}

/// `out = base + s·slope`.
fn combine(out: &mut CMatrix, base: &CMatrix, s: f64, slope: &CMatrix) {
    for ((o, b), d) in out.iter_mut().zip(base.iter()).zip(slope.iter()) {
        *o = b + d * s;
    }
}

fn symmetrize(rho: &mut CMatrix) {
    let dim = rho.nrows();
    for i in 0..dim {
        rho[(i, i)].im = 0.0;
        for j in i + 1..dim {
            let avg = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = avg;
            rho[(j, i)] = avg.conj();
        }
    }
}

/// Fixed-step RK4 integration of the master equation with
/// `h = min(span/4000, 0.01/‖H‖)`, where span is `t_end` (integration always
/// starts at 0). Each grid interval is split into equal substeps no longer
/// than `h`.
pub fn evolve_lindblad(
    h: &OperatorMatrix,
    collapse: &[Collapse],
    rho0: &DensityMatrix,
    grid: &TimeGrid,
) -> Result<Trajectory<DensityMatrix>> {
    let dim = h.nrows();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: rho0.dim() });
    }
    for c in collapse {
        if !(c.rate >= 0.0) {
            return Err(Error::InvalidParameter(format!("collapse rate must be non-negative, got {}", c.rate)));
        }
        if c.operator.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.operator.nrows() });
        }
    }
    check_hermitian(h)?;

    let h_max = step_size(grid.t_end, spectral_radius_hermitian(h));
    let mut rk = Rk4 {
        liouvillian: Liouvillian::new(h, collapse),
        k1: CMatrix::zeros(dim, dim),
        k2: CMatrix::zeros(dim, dim),
        k3: CMatrix::zeros(dim, dim),
        k4: CMatrix::zeros(dim, dim),
        stage: CMatrix::zeros(dim, dim),
    };
    let mut rho = rho0.entries.clone();
    let mut t = 0.0;
    let mut states = Vec::with_capacity(grid.points);
    for target in grid.times() {
        let span = target - t;
        if span > 0.0 {
            let substeps = (span / h_max).ceil().max(1.0) as usize;
            let dt = span / substeps as f64;
            for _ in 0..substeps {
                rk.step(&mut rho, dt);
            }
            if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::StepFailure { time: target, reason: "non-finite density matrix".into() });
            }
            t = target;
        }
        states.push(DensityMatrix { entries: rho.clone() });
    }
    Ok(Trajectory { grid: *grid, states })
}

/// Integrate the interaction-picture amplitude equations of the dispersive
/// model,
///
/// `dC_m/dt = −i Σ_k J_mk e^{i(ω′_m − ω′_k)t} C_k`,   `J = −χ`,
///
/// with fixed-step RK4. Valid for arbitrary residual detunings.
pub fn integrate_amplitudes(
    model: &DispersiveModel,
    c0: &AmplitudeVector,
    grid: &TimeGrid,
) -> Result<Trajectory<AmplitudeVector>> {
    let n = model.n();
    if c0.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: c0.n() });
    }
    let norm_sqr = c0.norm_sqr();
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sqr });
    }
    let coupling: Vec<Vec<f64>> = (0..n).map(|m| (0..n).map(|k| if m == k { 0.0 } else { model.exchange(m, k) }).collect()).collect();
    let detuning = &model.delta_ij;
    let rate_scale = (0..n)
        .map(|m| coupling[m].iter().map(|j| j.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        .max(model.max_residual_detuning());
    let h_max = step_size(grid.t_end, rate_scale);

    let deriv = |t: f64, c: &[Complex64], out: &mut [Complex64]| {
        for m in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                if coupling[m][k] != 0.0 {
                    acc += Complex64::from_polar(coupling[m][k], detuning[(m, k)] * t) * c[k];
                }
            }
            out[m] = -I * acc;
        }
    };

    let mut c = c0.c.clone();
    let zero = Complex64::new(0.0, 0.0);
    let (mut k1, mut k2, mut k3, mut k4, mut stage) =
        (vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n], vec![zero; n]);
    let mut t = 0.0;
    let mut states = Vec::with_capacity(grid.points);
    for target in grid.times() {
        let span = target - t;
        if span > 0.0 {
            let substeps = (span / h_max).ceil().max(1.0) as usize;
            let dt = span / substeps as f64;
            for s in 0..substeps {
                let t0 = t + s as f64 * dt;
                deriv(t0, &c, &mut k1);
                stage.iter_mut().zip(&c).zip(&k1).for_each(|((o, x), d)| *o = x + d * (0.5 * dt));
                deriv(t0 + 0.5 * dt, &stage, &mut k2);
                stage.iter_mut().zip(&c).zip(&k2).for_each(|((o, x), d)| *o = x + d * (0.5 * dt));
                deriv(t0 + 0.5 * dt, &stage, &mut k3);
                stage.iter_mut().zip(&c).zip(&k3).for_each(|((o, x), d)| *o = x + d * dt);
                deriv(t0 + dt, &stage, &mut k4);
                for m in 0..n {
                    c[m] += (k1[m] + k2[m] * 2.0 + k3[m] * 2.0 + k4[m]) * (dt / 6.0);
                }
            }
            t = target;
        }
        states.push(AmplitudeVector { c: c.clone() });
    }
    Ok(Trajectory { grid: *grid, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{amplitudes_homogeneous, populations};
    use crate::fockspace::{build_basis, ModeId};
    use crate::hamiltonians::{build_full, single_excitation_basis};
    use crate::model::{derive_dispersive, SystemSpec};
    use std::f64::consts::PI;

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 5).is_err());
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn zero_hamiltonian_is_identity() {
        let psi = StateVector::basis(3, 1);
        let traj = evolve_unitary(&CMatrix::zeros(3, 3), &psi, &TimeGrid::new(0.0, 5.0, 4).unwrap()).unwrap();
        for (_, s) in traj.iter() {
            assert_eq!(s.amplitudes, psi.amplitudes);
        }
    }

    #[test]
    fn resonant_rabi_period() {
        // One resonator on resonance with the bus: full swap after π/(2g),
        // return after π/g.
        let mut spec = SystemSpec::homogeneous(1);
        spec.resonators[0].freq_ghz = spec.bus.freq_ghz;
        let basis = single_excitation_basis(2).unwrap();
        let h = build_full(&spec, &basis).unwrap().h_full;
        let g = spec.resonators[0].coupling();
        let r1 = basis.single_photon(ModeId::resonator(1)).unwrap();
        let bus = basis.single_photon(ModeId::BUS).unwrap();
        let psi0 = StateVector::basis(basis.dim(), r1);
        let grid = TimeGrid::new(0.0, PI / g, 3).unwrap();
        let traj = evolve_unitary(&h, &psi0, &grid).unwrap();
        assert!(traj.states[1].amplitudes[bus].norm_sqr() > 1.0 - 1e-10);
        assert!(traj.states[2].amplitudes[r1].norm_sqr() > 1.0 - 1e-10);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::zeros(2, 2);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        assert!(matches!(evolve_unitary(&h, &StateVector::basis(2, 0), &grid), Err(Error::NotHermitian { .. })));
        let rho = DensityMatrix::from_pure(&StateVector::basis(2, 0));
        assert!(matches!(evolve_lindblad(&h, &[], &rho, &grid), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn exponential_decay() {
        let basis = build_basis(2, 1, Some(1)).unwrap();
        let one = basis.single_photon(ModeId(1)).unwrap();
        let rho0 = DensityMatrix::from_pure(&StateVector::basis(basis.dim(), one));
        let collapse = [Collapse { rate: 0.5, operator: basis.annihilation(ModeId(1)).unwrap() }];
        let grid = TimeGrid::new(0.0, 2.0, 3).unwrap();
        let traj = evolve_lindblad(&CMatrix::zeros(3, 3), &collapse, &rho0, &grid).unwrap();
        let last = &traj.states[2];
        assert!((last.entries[(one, one)].re - (-1.0f64).exp()).abs() < 1e-10);
        assert!((last.trace() - 1.0).abs() < 1e-12);
        assert!(matches!(
            evolve_lindblad(&CMatrix::zeros(3, 3), &[Collapse { rate: -1.0, ..collapse[0].clone() }], &rho0, &grid),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn closed_lindblad_matches_unitary() {
        let basis = single_excitation_basis(4).unwrap();
        let spec = SystemSpec::homogeneous(3);
        // Remove the common resonator frequency to keep the step count small.
        let h = build_full(&spec, &basis).unwrap().h_full
            - basis.total_number() * Complex64::new(spec.resonators[0].omega(), 0.0);
        let psi0 = StateVector::basis(basis.dim(), basis.single_photon(ModeId::resonator(1)).unwrap());
        let grid = TimeGrid::new(0.0, 0.05, 6).unwrap();
        let pure = evolve_unitary(&h, &psi0, &grid).unwrap();
        let mixed = evolve_lindblad(&h, &[], &DensityMatrix::from_pure(&psi0), &grid).unwrap();
        for (p, m) in pure.states.iter().zip(&mixed.states) {
            let diff = DensityMatrix::from_pure(p).entries - &m.entries;
            assert!(max_abs(&diff) < 1e-8, "{}", max_abs(&diff));
        }
    }

    #[test]
    fn amplitude_ode_matches_closed_form() {
        let model = derive_dispersive(&SystemSpec::homogeneous(3)).unwrap();
        let chi = model.chi[(0, 1)];
        let grid = TimeGrid::new(0.0, 1.3 * PI / chi, 200).unwrap();
        let traj = integrate_amplitudes(&model, &AmplitudeVector::seeded(3), &grid).unwrap();
        for (t, a) in traj.iter() {
            // Exchange coefficient −χ: the state is C(−χt).
            let exact = amplitudes_homogeneous(3, -chi * t).unwrap();
            for (x, y) in a.c.iter().zip(&exact.c) {
                assert!((x - y).norm() < 1e-8, "t = {t}");
            }
            assert!((a.norm_sqr() - 1.0).abs() < 1e-8);
            let p = populations(a);
            assert!((p[1] - p[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_ode_without_coupling_is_constant() {
        let mut spec = SystemSpec::homogeneous(3);
        spec.resonators.iter_mut().for_each(|r| r.g_mhz = 0.0);
        let model = derive_dispersive(&spec).unwrap();
        let c0 = AmplitudeVector { c: vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8), Complex64::new(0.0, 0.0)] };
        let traj = integrate_amplitudes(&model, &c0, &TimeGrid::new(0.0, 1.0, 5).unwrap()).unwrap();
        assert!(traj.states.iter().all(|a| a.c == c0.c));
        let bad = AmplitudeVector { c: vec![Complex64::new(1.0, 0.0); 3] };
        assert!(matches!(
            integrate_amplitudes(&model, &bad, &TimeGrid::new(0.0, 1.0, 5).unwrap()),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn grid_starting_late_propagates_from_zero() {
        let model = derive_dispersive(&SystemSpec::homogeneous(3)).unwrap();
        let full = integrate_amplitudes(&model, &AmplitudeVector::seeded(3), &TimeGrid::new(0.0, 0.02, 3).unwrap()).unwrap();
        let late = integrate_amplitudes(&model, &AmplitudeVector::seeded(3), &TimeGrid::new(0.01, 0.02, 2).unwrap()).unwrap();
        for (a, b) in full.states[1].c.iter().zip(&late.states[0].c) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
