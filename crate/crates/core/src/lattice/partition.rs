use crate::error::{Error, Result};
use crate::fock::{ClusterCap, FockState};

use super::geometry::LatticeGeometry;

/// Disjoint clusters covering the lattice, with the initial boson placement.
///
/// Widths are always recomputed from the geometry: `L_i` is the smallest
/// distance between a site outside cluster `i` and an initially occupied
/// site inside it. A cluster with no outside (K = 1) or no bosons has
/// infinite width.
#[derive(Clone, Debug)]
pub struct ClusterPartition {
    assignment: Vec<usize>,
    members: Vec<Vec<usize>>,
    occupied: Vec<Vec<usize>>,
    bosons: Vec<usize>,
    widths: Vec<f64>,
    grid: Option<BlockGrid>,
}

/// Cluster coordinates when the partition is a grid of equal cubic blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGrid {
    pub shape: Vec<usize>,
    pub block_width: usize,
    pub coords: Vec<Vec<usize>>,
}

impl BlockGrid {
    /// Cluster distance `l` with `l + 1 = max_d |i_d - j_d|`; `None` for the same cluster.
    pub fn cluster_distance(&self, a: usize, b: usize) -> Option<usize> {
        let cheb = self.coords[a]
            .iter()
            .zip(&self.coords[b])
            .map(|(&x, &y)| x.abs_diff(y))
            .max()
            .unwrap_or(0);
        cheb.checked_sub(1)
    }

    /// Largest cluster distance present in the grid.
    pub fn max_cluster_distance(&self) -> Option<usize> {
        self.shape.iter().max().and_then(|&e| e.checked_sub(2))
    }
}

impl ClusterPartition {
    pub fn new(geom: &LatticeGeometry, assignment: Vec<usize>, initial: &FockState) -> Result<Self> {
        Self::build(geom, assignment, initial, None)
    }

    /// Partition into cubes of side `width`; every axis extent must be a multiple of it.
    pub fn cubic_blocks(geom: &LatticeGeometry, width: usize, initial: &FockState) -> Result<Self> {
        if width == 0 || geom.shape().iter().any(|&e| e % width != 0) {
            return Err(Error::InvalidInput(format!(
                "cluster width {width} does not tile lattice shape {:?}",
                geom.shape()
            )));
        }
        let grid_shape: Vec<usize> = geom.shape().iter().map(|&e| e / width).collect();
        let grid_geom = LatticeGeometry::new(grid_shape.clone(), geom.metric())?;
        let assignment: Vec<usize> = (0..geom.site_count())
            .map(|s| {
                let c: Vec<usize> = geom.coords(s).iter().map(|&x| x / width).collect();
                grid_geom.site(&c)
            })
            .collect();
        let coords = (0..grid_geom.site_count()).map(|k| grid_geom.coords(k)).collect();
        let grid = BlockGrid {
            shape: grid_shape,
            block_width: width,
            coords,
        };
        Self::build(geom, assignment, initial, Some(grid))
    }

    fn build(
        geom: &LatticeGeometry,
        assignment: Vec<usize>,
        initial: &FockState,
        grid: Option<BlockGrid>,
    ) -> Result<Self> {
        let m = geom.site_count();
        if assignment.len() != m || initial.site_count() != m {
            return Err(Error::InvalidInput(format!(
                "partition covers {} sites and initial state {} sites; lattice has {m}",
                assignment.len(),
                initial.site_count()
            )));
        }
        let k = assignment.iter().max().map_or(0, |&c| c + 1);
        let mut members = vec![Vec::new(); k];
        for (site, &c) in assignment.iter().enumerate() {
            members[c].push(site);
        }
        if let Some(empty) = members.iter().position(|c| c.is_empty()) {
            return Err(Error::InvalidInput(format!("cluster {empty} has no sites")));
        }
        let mut occupied = vec![Vec::new(); k];
        let mut bosons = vec![0usize; k];
        for (site, &n) in initial.occupations().iter().enumerate() {
            if n > 0 {
                occupied[assignment[site]].push(site);
                bosons[assignment[site]] += n as usize;
            }
        }
        let widths = (0..k)
            .map(|c| {
                let mut w = f64::INFINITY;
                for &o in &occupied[c] {
                    for (s, &cs) in assignment.iter().enumerate() {
                        if cs != c {
                            w = w.min(geom.distance(s, o));
                        }
                    }
                }
                w
            })
            .collect();
        Ok(Self {
            assignment,
            members,
            occupied,
            bosons,
            widths,
            grid,
        })
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_count(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self, cluster: usize) -> &[usize] {
        &self.members[cluster]
    }

    pub fn occupied(&self, cluster: usize) -> &[usize] {
        &self.occupied[cluster]
    }

    /// Initial bosons `b_i` per cluster.
    pub fn bosons(&self) -> &[usize] {
        &self.bosons
    }

    /// `b = max_i b_i`.
    pub fn max_bosons(&self) -> usize {
        self.bosons.iter().copied().max().unwrap_or(0)
    }

    pub fn total_bosons(&self) -> usize {
        self.bosons.iter().sum()
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    /// `L = min_i L_i`; infinite for a single cluster.
    pub fn width(&self) -> f64 {
        self.widths.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_cluster_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn grid(&self) -> Option<&BlockGrid> {
        self.grid.as_ref()
    }

    /// Truncation admitting at most `cap` bosons per cluster.
    pub fn cap(&self, cap: usize) -> ClusterCap {
        ClusterCap::new(self.assignment.clone(), cap)
    }

    /// Does `s` keep each cluster's boson count equal to its initial value?
    pub fn preserves_cluster_numbers(&self, s: &FockState) -> bool {
        s.cluster_counts(&self.assignment, self.cluster_count()) == self.bosons
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Metric;

    #[test]
    fn chain_two_clusters_widths() {
        let g = LatticeGeometry::chain(12);
        let init = FockState::from_sites(12, &[2, 9]).unwrap();
        let p = ClusterPartition::cubic_blocks(&g, 6, &init).unwrap();
        assert_eq!(p.cluster_count(), 2);
        assert_eq!(p.widths(), &[4.0, 4.0]);
        assert_eq!(p.width(), 4.0);
        assert_eq!(p.max_bosons(), 1);
        let grid = p.grid().unwrap();
        assert_eq!(grid.cluster_distance(0, 1), Some(0));
        assert_eq!(grid.cluster_distance(0, 0), None);
    }

    #[test]
    fn single_cluster_has_infinite_width() {
        let g = LatticeGeometry::chain(5);
        let init = FockState::from_sites(5, &[2]).unwrap();
        let p = ClusterPartition::new(&g, vec![0; 5], &init).unwrap();
        assert!(p.width().is_infinite());
    }

    #[test]
    fn width_recomputed_in_2d() {
        let g = LatticeGeometry::new(vec![6, 6], Metric::Chebyshev).unwrap();
        let centre = g.site(&[1, 1]);
        let init = FockState::from_sites(36, &[centre]).unwrap();
        let p = ClusterPartition::cubic_blocks(&g, 3, &init).unwrap();
        assert_eq!(p.cluster_count(), 4);
        assert_eq!(p.widths()[0], 2.0);
        assert!(p.widths()[1].is_infinite());
        assert_eq!(p.grid().unwrap().cluster_distance(0, 3), Some(0));
    }

    #[test]
    fn non_tiling_width_rejected() {
        let g = LatticeGeometry::chain(10);
        let init = FockState::from_sites(10, &[1]).unwrap();
        assert!(ClusterPartition::cubic_blocks(&g, 3, &init).is_err());
    }
}
