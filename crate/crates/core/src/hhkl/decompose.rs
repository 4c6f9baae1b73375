use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{FockBasis, FockState};
use crate::lattice::{ClusterPartition, CouplingSchedule, LatticeGeometry};
use crate::propagator::{evolve_exact, evolve_window, Direction, StateVector};

use super::bounds::error_bound;
use super::plan::{plan_decomposition, HhklPlan, PlanOptions, Regime};

/// One cluster's evolved state on its own sites (global indices, ascending).
#[derive(Clone, Debug)]
pub struct ClusterState {
    pub sites: Vec<usize>,
    pub state: StateVector,
}

/// Forward ball evolutions per cluster: `U^{B_N}_{t_{N-1},t_N} ... U^{B_1}_{0,t_1} A_i^dag |0>`.
pub fn decompose_evolve(
    plan: &HhklPlan,
    schedule: &CouplingSchedule,
    partition: &ClusterPartition,
    initial: &FockState,
) -> Result<Vec<ClusterState>> {
    if !partition.preserves_cluster_numbers(initial) {
        return Err(Error::InvalidInput(format!(
            "initial state {initial:?} does not match the partition's boson placement"
        )));
    }
    (0..partition.cluster_count())
        .map(|c| {
            let sites = partition.members(c).to_vec();
            let mut local_index = vec![usize::MAX; schedule.site_count()];
            for (k, &s) in sites.iter().enumerate() {
                local_index[s] = k;
            }
            let occ: Vec<u8> = sites.iter().map(|&s| initial.get(s)).collect();
            let basis = Arc::new(FockBasis::new(sites.len(), partition.bosons()[c])?);
            let mut state = StateVector::basis_state(basis, &FockState::new(occ))?;
            if partition.bosons()[c] > 0 {
                let local = schedule.restrict(&sites);
                for k in 1..=plan.steps {
                    let region: Vec<usize> = plan.balls[c][k].iter().map(|&s| local_index[s]).collect();
                    let (t0, t1) = plan.step_window(k);
                    state = evolve_window(&local, &state, t0, t1, Some(&region), Direction::Forward)?;
                }
            }
            Ok(ClusterState { sites, state })
        })
        .collect()
}

/// The product of cluster states written on a global basis.
pub fn product_state(clusters: &[ClusterState], target: Arc<FockBasis>) -> Result<StateVector> {
    let m = target.site_count();
    let mut owner = vec![(usize::MAX, 0usize); m];
    for (c, cs) in clusters.iter().enumerate() {
        for (k, &s) in cs.sites.iter().enumerate() {
            owner[s] = (c, k);
        }
    }
    if owner.iter().any(|&(c, _)| c == usize::MAX) {
        return Err(Error::InvalidInput("cluster states do not cover every site".into()));
    }
    let mut amps = DVector::from_element(target.dimension(), Complex64::new(0.0, 0.0));
    let mut scratch: Vec<Vec<u8>> = clusters.iter().map(|cs| vec![0u8; cs.sites.len()]).collect();
    for (idx, s) in target.states().iter().enumerate() {
        for (site, &n) in s.occupations().iter().enumerate() {
            let (c, k) = owner[site];
            scratch[c][k] = n;
        }
        let mut amp = Complex64::new(1.0, 0.0);
        for (cs, occ) in clusters.iter().zip(&scratch) {
            match cs.state.basis().index_of_occupations(occ) {
                Some(j) => amp *= cs.state.amplitudes()[j],
                None => {
                    amp = Complex64::new(0.0, 0.0);
                    break;
                }
            }
        }
        amps[idx] = amp;
    }
    StateVector::new(target, amps)
}

/// Draws each cluster's configuration independently (seed `seed + cluster index`).
pub fn sample_output(clusters: &[ClusterState], site_count: usize, seed: u64) -> Result<FockState> {
    let mut occ = vec![0u8; site_count];
    for (c, cs) in clusters.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(c as u64));
        let dist = WeightedIndex::new(cs.state.probabilities())
            .map_err(|e| Error::Numerical(format!("cluster {c} has no valid distribution: {e}")))?;
        let local = cs.state.basis().state(dist.sample(&mut rng));
        for (k, &s) in cs.sites.iter().enumerate() {
            occ[s] = local.get(k);
        }
    }
    Ok(FockState::new(occ))
}

/// One time point of the decomposition checked against exact evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct HhklPoint {
    pub t: f64,
    pub error_measured: f64,
    pub error_bound: f64,
    pub regime: Regime,
    pub steps: usize,
    pub shell_width: f64,
}

#[derive(Clone, Debug)]
pub struct HhklSetup<'a> {
    pub geom: &'a LatticeGeometry,
    pub schedule: &'a CouplingSchedule,
    pub partition: &'a ClusterPartition,
    pub initial: &'a FockState,
    pub beta: f64,
    pub velocity: f64,
    pub options: PlanOptions,
}

impl HhklSetup<'_> {
    /// Plans for time `t`; when the fixed-step plan has no room for a shell,
    /// falls back to a single step.
    pub fn plan(&self, t: f64) -> Result<HhklPlan> {
        let alpha = self.schedule.alpha();
        match plan_decomposition(
            self.geom,
            self.partition,
            t,
            alpha,
            self.velocity,
            self.beta,
            &self.options,
        ) {
            Err(Error::InfeasiblePlan(_)) if self.beta > 1.0 => {
                plan_decomposition(self.geom, self.partition, t, alpha, self.velocity, 1.0, &self.options)
            }
            other => other,
        }
    }

    pub fn point(&self, t: f64) -> Result<HhklPoint> {
        let plan = self.plan(t)?;
        let clusters = decompose_evolve(&plan, self.schedule, self.partition, self.initial)?;
        let full = Arc::new(FockBasis::new(self.geom.site_count(), self.initial.total())?);
        let approx = product_state(&clusters, Arc::clone(&full))?;
        let exact = evolve_exact(self.schedule, &StateVector::basis_state(full, self.initial)?, t)?;
        Ok(HhklPoint {
            t,
            error_measured: exact.distance(&approx),
            error_bound: error_bound(&plan, self.partition.cluster_count()),
            regime: plan.regime,
            steps: plan.steps,
            shell_width: plan.shell_width,
        })
    }
}
