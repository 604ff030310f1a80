//! Dense spectral helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Sorted eigenvalues of the Hermitian part `(M + M*)/2`.
pub fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut eigs: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(f64::total_cmp);
    eigs
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Hausdorff distance between two finite point sets on the real line.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    let dist = |x: f64, set: &[f64]| set.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min);
    let ab = a.iter().map(|&x| dist(x, b)).fold(0.0, f64::max);
    let ba = b.iter().map(|&y| dist(y, a)).fold(0.0, f64::max);
    ab.max(ba)
}
