use crate::error::{Error, Result};
use crate::lattice::{offcluster_norm_bound, ClusterPartition};

use super::plan::{fixed_step_threshold, HhklPlan};

/// Decay rate of the short-range tail; its value is not fixed by the bound.
pub const TAIL_DECAY: f64 = 1.0;
const QUADRATURE_RELATIVE_TOLERANCE: f64 = 1e-6;

/// `K (e^{v t1} - 1) (ell^{-alpha+D+1} + e^{-ell}) sum_{j<N} (r0 + j ell)^{D-1}`, constant 1.
///
/// A zero-radius boundary is counted as one site.
pub fn error_bound(plan: &HhklPlan, clusters: usize) -> f64 {
    if plan.steps == 0 || plan.shell_width.is_infinite() {
        return 0.0;
    }
    let d = plan.dimension as f64;
    let ell = plan.shell_width;
    let growth = (plan.velocity * plan.step_time).exp_m1();
    let tail = ell.powf(-plan.alpha + d + 1.0) + (-TAIL_DECAY * ell).exp();
    let surface: f64 = (0..plan.steps)
        .map(|j| (plan.core_radius + j as f64 * ell).max(1.0).powf(d - 1.0))
        .sum();
    clusters as f64 * growth * tail * surface
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorBranch {
    NearestNeighbour,
    Polynomial,
    Exponential,
}

/// Regime used for `alpha`; `alpha = inf` selects the nearest-neighbour branch.
pub fn error_branch(alpha: f64, beta: f64, dimension: usize) -> Result<ErrorBranch> {
    let d = dimension as f64;
    if alpha.is_infinite() {
        Ok(ErrorBranch::NearestNeighbour)
    } else if !(alpha > d + 1.0) {
        Err(Error::OutOfScope(format!(
            "no error branch for alpha = {alpha} <= D + 1"
        )))
    } else if alpha > fixed_step_threshold(beta, dimension) {
        Ok(ErrorBranch::Polynomial)
    } else {
        Ok(ErrorBranch::Exponential)
    }
}

/// Three-branch asymptotic error with all constants set to 1.
pub fn regime_error(alpha: f64, beta: f64, dimension: usize, n: f64, width: f64, v: f64, t: f64) -> Result<f64> {
    let d = dimension as f64;
    Ok(match error_branch(alpha, beta, dimension)? {
        ErrorBranch::NearestNeighbour => n * (v * t - width).exp(),
        ErrorBranch::Polynomial => n * t.powf(alpha - d) / width.powf(alpha - 2.0 * d),
        ErrorBranch::Exponential => n * (v * t).exp_m1() / width.powf(alpha - d - 1.0),
    })
}

/// Time at which [`regime_error`] reaches 1.
pub fn easiness_time(alpha: f64, beta: f64, dimension: usize, n: f64, width: f64, v: f64) -> Result<f64> {
    let d = dimension as f64;
    Ok(match error_branch(alpha, beta, dimension)? {
        ErrorBranch::NearestNeighbour => (width - n.ln()) / v,
        ErrorBranch::Polynomial => (width.powf(alpha - 2.0 * d) / n).powf(1.0 / (alpha - d)),
        ErrorBranch::Exponential => (width.powf(alpha - d - 1.0) / n).ln_1p() / v,
    })
}

/// `delta(t) = bound * integral_0^t eps(tau) dtau`, with `bound` the analytic off-cluster norm.
pub fn truncation_error_bound<F>(
    dimension: usize,
    partition: &ClusterPartition,
    alpha: f64,
    b: usize,
    t: f64,
    eps_of_tau: F,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let norm = offcluster_norm_bound(dimension, partition, alpha, b, None)?.analytic_bound;
    Ok(norm * integrate_relative(eps_of_tau, t))
}

/// Integral over `[0, t]` refined until the error estimate is within the relative tolerance.
pub fn integrate_relative<F: Fn(f64) -> f64>(f: F, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let mut target = 1e-8;
    let mut out = quadrature::integrate(&f, 0.0, t, target);
    for _ in 0..8 {
        let wanted = QUADRATURE_RELATIVE_TOLERANCE * out.integral.abs();
        if out.error_estimate <= wanted || wanted == 0.0 {
            break;
        }
        target = wanted;
        out = quadrature::integrate(&f, 0.0, t, target);
    }
    out.integral
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use crate::hhkl::plan::Regime;
    use crate::lattice::LatticeGeometry;

    fn plan(steps: usize, ell: f64, velocity: f64, step_time: f64, dimension: usize, alpha: f64) -> HhklPlan {
        HhklPlan {
            total_time: steps as f64 * step_time,
            steps,
            step_time,
            shell_width: ell,
            core_radius: 0.0,
            velocity,
            regime: Regime::FixedStep,
            alpha,
            dimension,
            centres: Vec::new(),
            balls: Vec::new(),
        }
    }

    #[test]
    fn vanishes_without_growth() {
        assert_eq!(error_bound(&plan(3, 2.0, 0.0, 0.5, 1, 4.0), 2), 0.0);
    }

    #[test]
    fn power_law_factor_quarters_when_ell_doubles() {
        // alpha - D - 1 = 2; compare the power-law parts only
        let p1 = plan(1, 5.0, 1.0, 0.5, 1, 4.0);
        let p2 = plan(1, 10.0, 1.0, 0.5, 1, 4.0);
        let strip = |p: &HhklPlan| error_bound(p, 1) / (p.velocity * p.step_time).exp_m1() - (-p.shell_width).exp();
        assert!((strip(&p1) / strip(&p2) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_surface_counts_steps() {
        let p = plan(5, 1.0, 1.0, 0.5, 1, 3.0);
        let expected = 0.5f64.exp_m1() * (1.0 + (-1.0f64).exp()) * 5.0;
        assert!((error_bound(&p, 1) - expected).abs() < 1e-12);
    }

    #[test]
    fn branches() {
        // alpha -> inf at t = L / v gives n
        assert!((regime_error(f64::INFINITY, 2.0, 1, 3.0, 10.0, 2.0, 5.0).unwrap() - 3.0).abs() < 1e-12);
        assert!(regime_error(1.5, 2.0, 1, 3.0, 10.0, 2.0, 5.0).is_err());
        // boundary alpha = 2D + D/(beta-1) = 3 for D = 1, beta = 2 goes to the exponential branch
        assert_eq!(error_branch(3.0, 2.0, 1).unwrap(), ErrorBranch::Exponential);
        assert_eq!(error_branch(3.0 + 1e-9, 2.0, 1).unwrap(), ErrorBranch::Polynomial);
    }

    #[test]
    fn easiness_time_solves_unit_error() {
        for &(alpha, beta) in &[(f64::INFINITY, 2.0), (8.0, 2.0), (3.5, 1.5)] {
            let t = easiness_time(alpha, beta, 2, 5.0, 20.0, 3.0).unwrap();
            let e = regime_error(alpha, beta, 2, 5.0, 20.0, 3.0, t).unwrap();
            assert!((e - 1.0).abs() < 1e-10, "alpha = {alpha}");
        }
        // n^{-1/(alpha-D)} L^{(alpha-2D)/(alpha-D)}
        let t = easiness_time(8.0, 2.0, 2, 5.0, 20.0, 3.0).unwrap();
        assert!((t - 5f64.powf(-1.0 / 6.0) * 20f64.powf(4.0 / 6.0)).abs() < 1e-12);
        // density doubling doubles v and halves the nearest-neighbour time
        let t1 = easiness_time(f64::INFINITY, 2.0, 1, 1.0, 10.0, 1.0).unwrap();
        let t2 = easiness_time(f64::INFINITY, 2.0, 1, 1.0, 10.0, 2.0).unwrap();
        assert!((t1 / t2 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_integral() {
        let g = LatticeGeometry::chain(12);
        let init = FockState::from_sites(12, &[2, 9]).unwrap();
        let p = ClusterPartition::cubic_blocks(&g, 6, &init).unwrap();
        let bound = 0.5;
        assert_eq!(truncation_error_bound(1, &p, 3.0, 1, 0.0, |_| 1.0).unwrap(), 0.0);
        let lin = truncation_error_bound(1, &p, 3.0, 1, 2.0, |_| 0.3).unwrap();
        assert!((lin - bound * 0.6).abs() < 1e-9);
        let quad = truncation_error_bound(1, &p, 3.0, 1, 1.0, |x| x * x).unwrap();
        assert!((quad / (bound / 3.0) - 1.0).abs() < 1e-6);
        assert!(truncation_error_bound(1, &p, 1.0, 1, 1.0, |x| x).is_err());
    }
}
