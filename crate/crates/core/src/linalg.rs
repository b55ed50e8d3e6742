//! Dense complex matrix kernels shared by the frequency-domain modules.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

/// Eigenvalues of the Hermitian matrix `m`, ascending.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
    let h = (m + m.adjoint()).scale(0.5);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Smallest eigenvalue of `m + m^H`.
pub(crate) fn hermitian_part_min_eig(m: &DMatrix<Complex64>) -> f64 {
    let sum = m + m.adjoint();
    hermitian_eigenvalues(&sum)[0]
}

/// Largest singular value, from the eigenvalues of `m^H m`.
pub(crate) fn sigma_max(m: &DMatrix<Complex64>) -> f64 {
    if m.nrows() == 1 || m.ncols() == 1 {
        return m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    let g = m.adjoint() * m;
    hermitian_eigenvalues(&g).last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

pub(crate) fn complex_det(m: &DMatrix<Complex64>) -> Complex64 {
    m.clone().lu().determinant()
}

pub(crate) fn real_to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn singular_value_of_diagonal() {
        let m = DMatrix::from_row_slice(2, 2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!((sigma_max(&m) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_value_of_rotation_scaled() {
        // 2 * unitary matrix
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 2.0), c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0)]);
        assert!((sigma_max(&m) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hermitian_part_of_skew_matrix_is_zero() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, -3.0)]);
        assert!(hermitian_part_min_eig(&m).abs() < 1e-12);
    }

    #[test]
    fn determinant_of_triangular() {
        let m = DMatrix::from_row_slice(2, 2, &[c(1.0, 1.0), c(5.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert!((complex_det(&m) - c(2.0, 2.0)).norm() < 1e-12);
    }
}
