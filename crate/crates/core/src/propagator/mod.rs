//! Exact time-ordered evolution; the reference every approximation is checked against.

mod evolve;
mod expm;
mod state;

pub use evolve::{evolve_exact, evolve_region, evolve_window, Direction, DRIFT_LIMIT};
pub use expm::{apply_exp, apply_exp_dense, apply_exp_taylor, unitary_from_hermitian, DENSE_LIMIT};
pub use state::{StateVector, NORM_TOLERANCE};
