//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Eigendecomposition of a Hermitian matrix with eigenvalues in ascending
/// order. Columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let dim = h.nrows();
    let eig = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(dim, dim, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `exp(S)` for anti-Hermitian `S`, via the Hermitian matrix `-iS`.
pub fn expm_anti_hermitian(s: &CMatrix) -> CMatrix {
    let k = s.map(|z| -I * z);
    let (values, vectors) = hermitian_eigen(&k);
    let phases = DVector::from_iterator(values.len(), values.iter().map(|&v| (I * v).exp()));
    &vectors * CMatrix::from_diagonal(&phases) * vectors.adjoint()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn spectral_radius_hermitian(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// Operator 2-norm of a general matrix (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    spectral_radius_hermitian(&(m.adjoint() * m)).sqrt()
}
