use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::lattice::Hamiltonian;

/// Largest dimension handled by dense diagonalization; above it the sparse
/// Taylor action is used.
pub const DENSE_LIMIT: usize = 2000;

const TAYLOR_STEP_NORM: f64 = 0.5;
const TAYLOR_TOLERANCE: f64 = 1e-15;

/// `exp(-i H t)` for a dense Hermitian `H`.
pub fn unitary_from_hermitian(h: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
    if t == 0.0 {
        return DMatrix::identity(h.nrows(), h.ncols());
    }
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -l * t)),
    ));
    v * phases * v.adjoint()
}

/// `exp(-i H t) x`, picking the dense or sparse path by dimension.
pub fn apply_exp(h: &Hamiltonian, t: f64, x: &DVector<Complex64>) -> DVector<Complex64> {
    if t == 0.0 {
        return x.clone();
    }
    if h.dim() <= DENSE_LIMIT {
        apply_exp_dense(&h.to_dense(), t, x)
    } else {
        apply_exp_taylor(h, t, x)
    }
}

pub fn apply_exp_dense(h: &DMatrix<Complex64>, t: f64, x: &DVector<Complex64>) -> DVector<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let mut y = v.adjoint() * x;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        y[k] *= Complex64::from_polar(1.0, -l * t);
    }
    v * y
}

/// Truncated Taylor series of the action, with `t` split so each substep has
/// `||H|| dt <= 0.5`.
pub fn apply_exp_taylor(h: &Hamiltonian, t: f64, x: &DVector<Complex64>) -> DVector<Complex64> {
    let norm = h.row_sum_norm();
    let steps = ((norm * t.abs()) / TAYLOR_STEP_NORM).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let factor = Complex64::new(0.0, -dt);
    let mut y = x.clone();
    for _ in 0..steps {
        let mut term = y.clone();
        let mut acc = y.clone();
        let scale = y.norm().max(f64::MIN_POSITIVE);
        for k in 1..64 {
            term = h.apply(&term) * (factor / k as f64);
            acc += &term;
            if term.norm() <= TAYLOR_TOLERANCE * scale {
                break;
            }
        }
        y = acc;
    }
    y
}
