//! Closed-form single-photon dynamics of `n` identical resonators coupled
//! through an eliminated bus, and the equal-population (W-type) crossings.
//!
//! With exchange phase `x` (equal to `χt` up to the sign of the exchange
//! coefficient) and the photon starting in `R_1`:
//!
//! ```text
//! C₁ = [(n−1)cos x + cos (n−1)x]/n + i[(n−1)sin x − sin (n−1)x]/n
//! C_m = [cos (n−1)x − cos x]/n − i[sin x + sin (n−1)x]/n,   m ≥ 2
//! ```
//!
//! Hence `|C₁|² = ((n−1)² + 1 + 2(n−1) cos nx)/n²`, and all populations
//! equal `1/n` exactly when `cos nx = −(n−2)/2`. For `n = 4` those points
//! are tangencies, and for `n ≥ 5` there are none.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector {
    /// `C_1..C_n`, the amplitude of one photon in each distant resonator.
    pub c: Vec<Complex64>,
}

impl AmplitudeVector {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(Complex64::norm_sqr).sum()
    }

    /// Photon in `R_1`.
    pub fn seeded(n: usize) -> AmplitudeVector {
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[0] = Complex64::new(1.0, 0.0);
        AmplitudeVector { c }
    }
}

pub fn amplitudes_homogeneous(n: usize, chi_t: f64) -> Result<AmplitudeVector> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 resonators, got {n}")));
    }
    let nf = n as f64;
    let k = (n - 1) as f64;
    let (s1, c1) = chi_t.sin_cos();
    let (sk, ck) = (k * chi_t).sin_cos();
    let first = Complex64::new((k * c1 + ck) / nf, (k * s1 - sk) / nf);
    let rest = Complex64::new((ck - c1) / nf, -(s1 + sk) / nf);
    let mut c = vec![rest; n];
    c[0] = first;
    Ok(AmplitudeVector { c })
}

pub fn populations(amps: &AmplitudeVector) -> Vec<f64> {
    amps.c.iter().map(Complex64::norm_sqr).collect()
}

/// `max_m | |C_m|² − 1/n |`.
pub fn w_deviation(pops: &[f64]) -> f64 {
    let target = 1.0 / pops.len() as f64;
    pops.iter().map(|p| (p - target).abs()).fold(0.0, f64::max)
}

/// Grid resolution of the bracketing pass in [`find_w_crossings`].
pub const CROSSING_GRID_POINTS: usize = 2000;

/// Default root tolerance in units of `χt/π`.
pub const CROSSING_TOL: f64 = 1e-6;

/// All `χt ∈ (0, chi_t_max]` where every population equals `1/n`.
///
/// `tol` is the root tolerance in units of `χt/π`. Returned values are `χt`
/// in radians, ascending. Sign changes of `|C₁|² − 1/n` are bisected;
/// touching minima (as for `n = 4`) are refined by golden-section search.
/// A root is kept only if all populations lie within `10·tol` of `1/n`.
pub fn find_w_crossings(n: usize, chi_t_max: f64, tol: f64) -> Result<Vec<f64>> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("crossings need n >= 3, got {n}")));
    }
    if !(chi_t_max > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter("chi_t_max and tol must be positive".into()));
    }
    let target = 1.0 / n as f64;
    let f = |x: f64| amplitudes_homogeneous(n, x).map(|a| a.c[0].norm_sqr() - target).unwrap();
    let certified = |x: f64| {
        let pops = populations(&amplitudes_homogeneous(n, x).unwrap());
        w_deviation(&pops) <= 10.0 * tol
    };
    let x_tol = tol * PI;

    let step = chi_t_max / CROSSING_GRID_POINTS as f64;
    let xs: Vec<f64> = (1..=CROSSING_GRID_POINTS).map(|k| k as f64 * step).collect();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();

    let mut roots = Vec::new();
    for k in 0..xs.len() {
        if fs[k] == 0.0 {
            roots.push(xs[k]);
            continue;
        }
        if k + 1 < xs.len() && fs[k + 1] != 0.0 && fs[k].signum() != fs[k + 1].signum() {
            roots.push(bisect(f, xs[k], xs[k + 1], x_tol));
            continue;
        }
        if k == 0 || k + 1 == xs.len() {
            continue;
        }
        let (a, b, c) = (fs[k - 1], fs[k], fs[k + 1]);
        let same_sign = a.signum() == b.signum() && b.signum() == c.signum();
        if same_sign && b.abs() <= a.abs() && b.abs() <= c.abs() {
            let x = golden_min(|x| f(x).abs(), xs[k - 1], xs[k + 1], x_tol);
            roots.push(x);
        }
    }
    roots.retain(|&x| certified(x));
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 2.0 * x_tol);
    Ok(roots)
}

/// Bisection on a bracketing interval, narrowed well below `x_tol`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > 1e-3 * x_tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimisation of `f` on `[lo, hi]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-3 * x_tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Equal-weight single-photon superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct WState {
    pub amplitudes: Vec<Complex64>,
}

impl WState {
    pub fn n(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn overlap(&self, other: &WState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }
}

/// W state with amplitudes `phase_m / √n`.
pub fn w_state(n: usize, phase_profile: &[Complex64]) -> Result<WState> {
    if phase_profile.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: phase_profile.len() });
    }
    if let Some(bad) = phase_profile.iter().find(|z| (z.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::InvalidParameter(format!("phase {bad} is not unit modulus")));
    }
    let scale = 1.0 / (n as f64).sqrt();
    Ok(WState { amplitudes: phase_profile.iter().map(|z| z * scale).collect() })
}
