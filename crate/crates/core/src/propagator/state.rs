use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};

/// Normalization slack accepted on input states.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Complex amplitudes over a shared Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps `amplitudes`; rejects a length mismatch or a norm away from one.
    pub fn new(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dimension() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a basis of dimension {}",
                amplitudes.len(),
                basis.dimension()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidInput(format!("state norm {norm} is not 1")));
        }
        Ok(Self { basis, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(basis: Arc<FockBasis>, amplitudes: DVector<Complex64>) -> Self {
        Self { basis, amplitudes }
    }

    pub fn basis_state(basis: Arc<FockBasis>, state: &FockState) -> Result<Self> {
        let idx = basis
            .index_of(state)
            .ok_or_else(|| Error::InvalidInput(format!("{state:?} is not in the basis")))?;
        let mut amplitudes = DVector::from_element(basis.dimension(), Complex64::new(0.0, 0.0));
        amplitudes[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<Complex64> {
        self.amplitudes
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn amplitude(&self, state: &FockState) -> Complex64 {
        self.basis
            .index_of(state)
            .map_or(Complex64::new(0.0, 0.0), |k| self.amplitudes[k])
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`; both must live on the same basis.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.dimension(), other.dimension(), "states on different bases");
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|| self - other ||_2`.
    pub fn distance(&self, other: &StateVector) -> f64 {
        assert_eq!(self.dimension(), other.dimension(), "states on different bases");
        (&self.amplitudes - &other.amplitudes).norm()
    }

    /// Re-expresses the state on a larger basis containing this one.
    pub fn embed(&self, target: Arc<FockBasis>) -> Result<StateVector> {
        let mut amplitudes = DVector::from_element(target.dimension(), Complex64::new(0.0, 0.0));
        for (k, s) in self.basis.states().iter().enumerate() {
            let idx = target
                .index_of(s)
                .ok_or_else(|| Error::InvalidInput(format!("{s:?} missing from target basis")))?;
            amplitudes[idx] = self.amplitudes[k];
        }
        Ok(StateVector {
            basis: target,
            amplitudes,
        })
    }
}
