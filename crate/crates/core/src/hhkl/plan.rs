use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{ClusterPartition, LatticeGeometry};

/// Default step length in the fixed-step regime.
pub const DEFAULT_STEP_TIME: f64 = 0.5;
const RADIUS_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SingleStep,
    FixedStep,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SingleStep => "single_step",
            Regime::FixedStep => "fixed_step",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanOptions {
    pub step_time: f64,
    /// Fixed shell width; `None` picks the largest one the geometry allows.
    pub shell_width: Option<usize>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            step_time: DEFAULT_STEP_TIME,
            shell_width: None,
        }
    }
}

/// Nested balls per cluster and step, with the numbers entering the error bound.
#[derive(Clone, Debug, PartialEq)]
pub struct HhklPlan {
    pub total_time: f64,
    pub steps: usize,
    /// Nominal step length `t1`; the last step may be shorter.
    pub step_time: f64,
    /// `ell`; infinite when the partition has a single cluster.
    pub shell_width: f64,
    pub core_radius: f64,
    pub velocity: f64,
    pub regime: Regime,
    pub alpha: f64,
    pub dimension: usize,
    /// Ball centre per cluster (`None` for clusters without bosons).
    pub centres: Vec<Option<usize>>,
    /// `balls[i][k]` is `B^i_k`, for `k = 0..=steps`.
    pub balls: Vec<Vec<Vec<usize>>>,
}

impl HhklPlan {
    /// `[t_{k-1}, t_k]` for step `k` in `1..=steps`.
    pub fn step_window(&self, k: usize) -> (f64, f64) {
        let lo = ((k - 1) as f64 * self.step_time).min(self.total_time);
        let hi = (k as f64 * self.step_time).min(self.total_time);
        (lo, hi)
    }
}

/// `2 D + D / (beta - 1)`; infinite at `beta = 1`.
pub fn fixed_step_threshold(beta: f64, dimension: usize) -> f64 {
    let d = dimension as f64;
    if beta <= 1.0 {
        f64::INFINITY
    } else {
        2.0 * d + d / (beta - 1.0)
    }
}

/// Lieb-Robinson speed used when none is configured: `2 (b + 1) max|J|`.
pub fn default_velocity(b: usize, max_coupling: f64) -> f64 {
    2.0 * (b as f64 + 1.0) * max_coupling
}

/// Site of `sites` minimizing the largest distance to `targets`, with that distance.
fn centre_of(geom: &LatticeGeometry, sites: &[usize], targets: &[usize]) -> (usize, f64) {
    let mut best = (sites[0], f64::INFINITY);
    for &s in sites {
        let r = targets.iter().map(|&o| geom.distance(s, o)).fold(0.0, f64::max);
        if r < best.1 - RADIUS_SLACK {
            best = (s, r);
        }
    }
    best
}

pub fn plan_decomposition(
    geom: &LatticeGeometry,
    partition: &ClusterPartition,
    t: f64,
    alpha: f64,
    velocity: f64,
    beta: f64,
    options: &PlanOptions,
) -> Result<HhklPlan> {
    let dimension = geom.dimension();
    let d = dimension as f64;
    if !(alpha > d + 1.0) {
        return Err(Error::OutOfScope(format!(
            "cluster decomposition needs alpha > D + 1 = {}, got alpha = {alpha}",
            d + 1.0
        )));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "evolution time {t} must be finite and non-negative"
        )));
    }
    if !(options.step_time > 0.0) {
        return Err(Error::InvalidInput(format!(
            "t1 = {} must be positive",
            options.step_time
        )));
    }
    if !(beta >= 1.0) {
        return Err(Error::InvalidInput(format!("beta = {beta} must be at least 1")));
    }

    let k = partition.cluster_count();
    let mut centres = Vec::with_capacity(k);
    let mut core_radius = 0.0f64;
    for c in 0..k {
        if partition.occupied(c).is_empty() {
            centres.push(None);
        } else {
            let (centre, r) = centre_of(geom, partition.members(c), partition.occupied(c));
            core_radius = core_radius.max(r);
            centres.push(Some(centre));
        }
    }

    let regime = if alpha > fixed_step_threshold(beta, dimension) {
        Regime::FixedStep
    } else {
        Regime::SingleStep
    };
    let (steps, step_time) = if t == 0.0 {
        (0, options.step_time)
    } else {
        match regime {
            Regime::FixedStep => (
                ((t / options.step_time) - RADIUS_SLACK).ceil().max(1.0) as usize,
                options.step_time,
            ),
            Regime::SingleStep => (1, t),
        }
    };

    let width = partition.width();
    let shell_width = if width.is_infinite() {
        f64::INFINITY
    } else if steps == 0 {
        (width - core_radius).floor()
    } else {
        let max_ell = ((width - core_radius + RADIUS_SLACK) / steps as f64).floor();
        let ell = match options.shell_width {
            Some(e) if e as f64 > max_ell => {
                return Err(Error::InfeasiblePlan(format!(
                    "shell width {e} with {steps} steps leaves the clusters (at most {max_ell})"
                )))
            }
            Some(e) => e as f64,
            None => max_ell,
        };
        if ell < 1.0 {
            return Err(Error::InfeasiblePlan(format!(
                "t = {t} needs {steps} steps but L - r0 = {} allows no shell of width >= 1",
                width - core_radius
            )));
        }
        ell
    };

    let balls = (0..k)
        .map(|c| match centres[c] {
            None => Vec::new(),
            Some(centre) => (0..=steps)
                .map(|step| {
                    let radius = core_radius + step as f64 * shell_width;
                    partition
                        .members(c)
                        .iter()
                        .copied()
                        .filter(|&s| geom.distance(s, centre) <= radius + RADIUS_SLACK)
                        .collect()
                })
                .collect(),
        })
        .collect();

    Ok(HhklPlan {
        total_time: t,
        steps,
        step_time,
        shell_width,
        core_radius,
        velocity,
        regime,
        alpha,
        dimension,
        centres,
        balls,
    })
}
