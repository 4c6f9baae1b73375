use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::FockBasis;

use super::hamiltonian::{build_hamiltonian, embedding};
use super::partition::ClusterPartition;
use super::schedule::Segment;

/// Dense problems above this size skip the exact singular-value check.
const EXACT_DIMENSION_LIMIT: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OffClusterNorm {
    /// `c_geo * b * L^(D - alpha)` with the cluster-distance sum evaluated explicitly.
    pub analytic_bound: f64,
    pub c_geo: f64,
    /// `n * max row sum of the inter-cluster hopping block`; valid for any admissible drive.
    pub gershgorin_bound: Option<f64>,
    /// Largest singular value of `(1 - Q) H Q`.
    pub exact_norm: Option<f64>,
}

/// Number of clusters at cluster distance `l` from a given one in `D` dimensions, doubled
/// for the two hop directions: `2 ((2l+3)^D - (2l+1)^D)`.
fn shell_count(l: usize, dimension: usize) -> f64 {
    let outer = (2 * l + 3) as f64;
    let inner = (2 * l + 1) as f64;
    2.0 * (outer.powi(dimension as i32) - inner.powi(dimension as i32))
}

/// `c_geo = 2 sum_{l=0}^{l_max} g(l) (l+1)^(-alpha)`. With `l_max = None` the full
/// series is summed, its tail bounded by an integral.
pub fn geometric_constant(dimension: usize, alpha: f64, l_max: Option<usize>) -> Result<f64> {
    if alpha <= dimension as f64 {
        return Err(Error::Divergence { alpha, dimension });
    }
    let term = |l: usize| shell_count(l, dimension) * ((l + 1) as f64).powf(-alpha);
    let sum = match l_max {
        Some(lm) => (0..=lm).map(term).sum::<f64>(),
        None => {
            const CUTOFF: usize = 100_000;
            let head: f64 = (0..CUTOFF).map(term).sum();
            // g(l) <= 4 D 3^(D-1) (l+1)^(D-1), so the tail is at most
            // 4 D 3^(D-1) * integral_{CUTOFF}^inf x^(D-1-alpha) dx.
            let d = dimension as f64;
            let tail = 4.0 * d * 3f64.powf(d - 1.0) * (CUTOFF as f64).powf(d - alpha) / (alpha - d);
            head + tail
        }
    };
    Ok(2.0 * sum)
}

/// Inter-cluster part of a hopping matrix: entries joining different clusters.
pub fn inter_cluster_block(hopping: &DMatrix<Complex64>, assignment: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(hopping.nrows(), hopping.ncols(), |i, j| {
        if assignment[i] != assignment[j] {
            hopping[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `(lambda_max, max absolute row sum)` of a Hermitian matrix; Gershgorin guarantees
/// the first never exceeds the second.
pub fn gershgorin_check(h: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = h.clone().symmetric_eigen();
    let lambda = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let rows = (0..h.nrows())
        .map(|r| h.row(r).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    (lambda, rows)
}

/// Bound on `||(H - QHQ) Q||` for the cluster-capped projector `Q` with cap `b + 1`.
///
/// `drive` optionally supplies a concrete segment, interaction and boson number for
/// the Gershgorin bound and (on small instances) the exact norm.
pub fn offcluster_norm_bound(
    dimension: usize,
    partition: &ClusterPartition,
    alpha: f64,
    b: usize,
    drive: Option<(&Segment, f64, usize)>,
) -> Result<OffClusterNorm> {
    let l_max = partition.grid().and_then(|g| g.max_cluster_distance());
    let c_geo = geometric_constant(dimension, alpha, l_max)?;
    let width = partition.width();
    let analytic_bound = if width.is_infinite() {
        0.0
    } else {
        c_geo * b as f64 * width.powf(dimension as f64 - alpha)
    };
    let (mut gershgorin_bound, mut exact_norm) = (None, None);
    if let Some((segment, interaction, n)) = drive {
        let inter = inter_cluster_block(&segment.hopping, partition.assignment());
        let (_, rows) = gershgorin_check(&inter);
        gershgorin_bound = Some(n as f64 * rows);
        exact_norm = exact_offcluster_norm(segment, interaction, partition, n, b)?;
    }
    Ok(OffClusterNorm {
        analytic_bound,
        c_geo,
        gershgorin_bound,
        exact_norm,
    })
}

/// Largest singular value of the block of `H` mapping the capped subspace out of itself.
/// `None` when the full basis is too large for a dense check.
pub fn exact_offcluster_norm(
    segment: &Segment,
    interaction: f64,
    partition: &ClusterPartition,
    n: usize,
    b: usize,
) -> Result<Option<f64>> {
    let m = segment.site_count();
    let full = match FockBasis::build(m, n, None, EXACT_DIMENSION_LIMIT) {
        Ok(basis) => basis,
        Err(Error::Capacity { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let truncated = FockBasis::truncated(m, n, partition.cap(b + 1))?;
    let inside = embedding(&full, &truncated);
    let mut is_inside = vec![false; full.dimension()];
    for &k in &inside {
        is_inside[k] = true;
    }
    let outside: Vec<usize> = (0..full.dimension()).filter(|&k| !is_inside[k]).collect();
    if outside.is_empty() || inside.is_empty() {
        return Ok(Some(0.0));
    }
    let h = build_hamiltonian(segment, interaction, &full, None).to_dense();
    let block = DMatrix::from_fn(outside.len(), inside.len(), |r, c| h[(outside[r], inside[c])]);
    let sv = block.singular_values();
    Ok(Some(sv.iter().copied().fold(0.0, f64::max)))
}
