use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{build_hamiltonian, CouplingSchedule, Hamiltonian};

use super::expm::apply_exp;
use super::state::{StateVector, NORM_TOLERANCE};

/// Norm drift beyond which an evolution is declared numerically broken.
pub const DRIFT_LIMIT: f64 = 1e-8;
const TIME_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    /// Applies the adjoint of the forward propagator over the same window.
    Backward,
}

/// Time-ordered evolution from 0 to `t` under the full Hamiltonian.
pub fn evolve_exact(schedule: &CouplingSchedule, psi0: &StateVector, t: f64) -> Result<StateVector> {
    evolve_window(schedule, psi0, 0.0, t, None, Direction::Forward)
}

/// Evolution from 0 to `t` under `H_R`, the terms supported inside `region`.
pub fn evolve_region(
    schedule: &CouplingSchedule,
    psi0: &StateVector,
    t: f64,
    region: &[usize],
    direction: Direction,
) -> Result<StateVector> {
    evolve_window(schedule, psi0, 0.0, t, Some(region), direction)
}

/// `U_{t0,t1}` (or its adjoint) restricted to `region`, applied to `psi0`.
pub fn evolve_window(
    schedule: &CouplingSchedule,
    psi0: &StateVector,
    t0: f64,
    t1: f64,
    region: Option<&[usize]>,
    direction: Direction,
) -> Result<StateVector> {
    let total = schedule.total_duration();
    if !(t0 >= 0.0 && t1 >= t0 && t1 <= total + TIME_SLACK) {
        return Err(Error::InvalidInput(format!(
            "window [{t0}, {t1}] outside the schedule's [0, {total}]"
        )));
    }
    if (psi0.norm() - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "initial state norm {} is not 1",
            psi0.norm()
        )));
    }
    let basis = psi0.basis();
    if basis.site_count() != schedule.site_count() {
        return Err(Error::InvalidInput(format!(
            "state lives on {} sites, schedule on {}",
            basis.site_count(),
            schedule.site_count()
        )));
    }
    let pieces: Vec<(Hamiltonian, f64)> = schedule
        .window(t0, t1.min(total))
        .into_iter()
        .map(|(seg, dt)| (build_hamiltonian(seg, schedule.interaction(), basis, region), dt))
        .collect();
    let mut amps = psi0.amplitudes().clone();
    let ordered: Box<dyn Iterator<Item = &(Hamiltonian, f64)>> = match direction {
        Direction::Forward => Box::new(pieces.iter()),
        Direction::Backward => Box::new(pieces.iter().rev()),
    };
    for (h, dt) in ordered {
        let signed = match direction {
            Direction::Forward => *dt,
            Direction::Backward => -*dt,
        };
        amps = apply_exp(h, signed, &amps);
        let drift = (amps.norm() - 1.0).abs();
        if drift > DRIFT_LIMIT {
            return Err(Error::Numerical(format!("norm drifted by {drift:e} during evolution")));
        }
    }
    Ok(StateVector::from_parts_unchecked(Arc::clone(basis), amps))
}
