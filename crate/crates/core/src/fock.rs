//! Occupation-number bases for `n` bosons on `m` sites.
//!
//! States are stored in lexicographically *descending* order of their
//! occupation vectors, so `(n, 0, .., 0)` is always index 0 and indices are
//! reproducible from `(m, n, truncation)` alone. A basis may be truncated to
//! at most `cap` bosons per cluster; a per-site cap of 1 (every site its own
//! cluster) is the hardcore limit.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::ClusterPartition;

/// Default guard on the number of basis states.
pub const DEFAULT_DIMENSION_LIMIT: usize = 200_000;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockState {
    occupations: Vec<u8>,
}

impl FockState {
    pub fn new(occupations: Vec<u8>) -> Self {
        Self { occupations }
    }

    /// Fock state with one boson on each listed site (repeats stack).
    pub fn from_sites(m: usize, sites: &[usize]) -> Result<Self> {
        let mut occ = vec![0u8; m];
        for &s in sites {
            if s >= m {
                return Err(Error::InvalidInput(format!("site {s} outside a lattice of {m} sites")));
            }
            occ[s] = occ[s]
                .checked_add(1)
                .ok_or_else(|| Error::InvalidInput(format!("more than 255 bosons on site {s}")))?;
        }
        Ok(Self { occupations: occ })
    }

    pub fn occupations(&self) -> &[u8] {
        &self.occupations
    }

    pub fn site_count(&self) -> usize {
        self.occupations.len()
    }

    pub fn total(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }

    pub fn get(&self, site: usize) -> u8 {
        self.occupations[site]
    }

    /// Bosons per cluster under `assignment` (site -> cluster id).
    pub fn cluster_counts(&self, assignment: &[usize], clusters: usize) -> Vec<usize> {
        let mut counts = vec![0usize; clusters];
        for (site, &n) in self.occupations.iter().enumerate() {
            counts[assignment[site]] += n as usize;
        }
        counts
    }
}

impl fmt::Debug for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for n in &self.occupations {
            write!(f, "{n}")?;
        }
        write!(f, ">")
    }
}

/// Image of `s` under `a_i^dag a_j` and its amplitude `sqrt(n_i + 1) sqrt(n_j)`.
///
/// Returns `None` when site `j` is empty.
pub fn hop_element(s: &FockState, i: usize, j: usize) -> Option<(FockState, f64)> {
    assert_ne!(i, j, "hop_element needs distinct sites");
    let nj = s.occupations[j];
    if nj == 0 {
        return None;
    }
    let ni = s.occupations[i];
    let mut occ = s.occupations.clone();
    occ[j] -= 1;
    occ[i] += 1;
    let amp = ((ni as f64 + 1.0) * nj as f64).sqrt();
    Some((FockState { occupations: occ }, amp))
}

/// Bose-Hubbard on-site energy `sum_i V n_i (n_i - 1) / 2`.
pub fn interaction_energy(s: &FockState, v: f64) -> f64 {
    s.occupations
        .iter()
        .map(|&n| {
            let n = n as f64;
            v * n * (n - 1.0) / 2.0
        })
        .sum()
}

/// Per-cluster truncation: at most `cap` bosons in every cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClusterCap {
    pub assignment: Vec<usize>,
    pub clusters: usize,
    pub cap: usize,
}

impl ClusterCap {
    pub fn new(assignment: Vec<usize>, cap: usize) -> Self {
        let clusters = assignment.iter().max().map_or(0, |&c| c + 1);
        Self {
            assignment,
            clusters,
            cap,
        }
    }

    /// Hardcore truncation: at most one boson per site.
    pub fn hardcore(m: usize) -> Self {
        Self::new((0..m).collect(), 1)
    }

    pub fn admits(&self, s: &FockState) -> bool {
        s.cluster_counts(&self.assignment, self.clusters)
            .iter()
            .all(|&c| c <= self.cap)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FockBasis {
    states: Vec<FockState>,
    total_n: usize,
    site_count: usize,
    truncation: Option<ClusterCap>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return None;
        }
    }
    Some(acc as usize)
}

/// Number of untruncated states, `binomial(m + n - 1, n)`.
pub fn untruncated_dimension(m: usize, n: usize) -> Option<usize> {
    binomial(m + n - 1, n)
}

impl FockBasis {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        Self::build(m, n, None, DEFAULT_DIMENSION_LIMIT)
    }

    pub fn truncated(m: usize, n: usize, cap: ClusterCap) -> Result<Self> {
        Self::build(m, n, Some(cap), DEFAULT_DIMENSION_LIMIT)
    }

    pub fn build(m: usize, n: usize, truncation: Option<ClusterCap>, limit: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidInput("a basis needs at least one site".into()));
        }
        if n > u8::MAX as usize {
            return Err(Error::InvalidInput(format!(
                "{n} bosons exceed the 255-per-site storage"
            )));
        }
        if let Some(tr) = &truncation {
            if tr.assignment.len() != m {
                return Err(Error::InvalidInput(format!(
                    "cluster assignment covers {} sites, basis has {m}",
                    tr.assignment.len()
                )));
            }
        } else {
            match untruncated_dimension(m, n) {
                Some(d) if d <= limit => {}
                Some(d) => return Err(Error::Capacity { dimension: d, limit }),
                None => {
                    return Err(Error::Capacity {
                        dimension: usize::MAX,
                        limit,
                    })
                }
            }
        }

        let mut states = Vec::new();
        let mut occ = vec![0u8; m];
        let mut counts = truncation.as_ref().map(|t| vec![0usize; t.clusters]);
        enumerate_rec(0, n, &mut occ, truncation.as_ref(), &mut counts, &mut states, limit)?;
        Ok(Self {
            states,
            total_n: n,
            site_count: m,
            truncation,
        })
    }

    pub fn dimension(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[FockState] {
        &self.states
    }

    pub fn state(&self, idx: usize) -> &FockState {
        &self.states[idx]
    }

    pub fn total_n(&self) -> usize {
        self.total_n
    }

    pub fn site_count(&self) -> usize {
        self.site_count
    }

    pub fn truncation(&self) -> Option<&ClusterCap> {
        self.truncation.as_ref()
    }

    pub fn cluster_cap(&self) -> Option<usize> {
        self.truncation.as_ref().map(|t| t.cap)
    }

    /// Ordinal of `s`, if it belongs to this basis.
    pub fn index_of(&self, s: &FockState) -> Option<usize> {
        if s.site_count() != self.site_count {
            return None;
        }
        // descending order: compare reversed
        self.states
            .binary_search_by(|probe| match probe.cmp(s) {
                Ordering::Less => Ordering::Greater,
                Ordering::Greater => Ordering::Less,
                Ordering::Equal => Ordering::Equal,
            })
            .ok()
    }

    pub fn index_of_occupations(&self, occ: &[u8]) -> Option<usize> {
        self.index_of(&FockState::new(occ.to_vec()))
    }
}

fn enumerate_rec(
    site: usize,
    remaining: usize,
    occ: &mut Vec<u8>,
    trunc: Option<&ClusterCap>,
    counts: &mut Option<Vec<usize>>,
    out: &mut Vec<FockState>,
    limit: usize,
) -> Result<()> {
    let m = occ.len();
    if site == m - 1 {
        if let (Some(t), Some(c)) = (trunc, counts.as_ref()) {
            if c[t.assignment[site]] + remaining > t.cap {
                return Ok(());
            }
        }
        occ[site] = remaining as u8;
        if out.len() == limit {
            return Err(Error::Capacity {
                dimension: limit + 1,
                limit,
            });
        }
        out.push(FockState::new(occ.clone()));
        occ[site] = 0;
        return Ok(());
    }
    for k in (0..=remaining).rev() {
        if let (Some(t), Some(c)) = (trunc, counts.as_mut()) {
            let cl = t.assignment[site];
            if c[cl] + k > t.cap {
                continue;
            }
            c[cl] += k;
        }
        occ[site] = k as u8;
        let res = enumerate_rec(site + 1, remaining - k, occ, trunc, counts, out, limit);
        if let (Some(t), Some(c)) = (trunc, counts.as_mut()) {
            c[t.assignment[site]] -= k;
        }
        res?;
    }
    occ[site] = 0;
    Ok(())
}

/// Enumerate the `n`-boson basis on `m` sites, optionally capped per cluster.
pub fn enumerate_basis(
    m: usize,
    n: usize,
    partition: Option<&ClusterPartition>,
    cap: Option<usize>,
) -> Result<FockBasis> {
    match (partition, cap) {
        (_, None) => FockBasis::new(m, n),
        (Some(p), Some(cap)) => FockBasis::truncated(m, n, ClusterCap::new(p.assignment().to_vec(), cap)),
        (None, Some(_)) => Err(Error::InvalidInput("a cluster cap needs a partition".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_boson_two_sites() {
        let b = FockBasis::new(2, 1).unwrap();
        assert_eq!(b.dimension(), 2);
        assert_eq!(b.state(0).occupations(), &[1, 0]);
        assert_eq!(b.state(1).occupations(), &[0, 1]);
    }

    #[test]
    fn three_sites_two_bosons() {
        let b = FockBasis::new(3, 2).unwrap();
        assert_eq!(b.dimension(), 6);
        let expected: Vec<Vec<u8>> = vec![
            vec![2, 0, 0],
            vec![1, 1, 0],
            vec![1, 0, 1],
            vec![0, 2, 0],
            vec![0, 1, 1],
            vec![0, 0, 2],
        ];
        let got: Vec<Vec<u8>> = b.states().iter().map(|s| s.occupations().to_vec()).collect();
        assert_eq!(got, expected);
    }

    #[test]
    fn truncated_two_clusters_cap_one() {
        // brute force: filter the 10 untruncated states
        let full = FockBasis::new(4, 2).unwrap();
        let assignment = vec![0, 0, 1, 1];
        let brute: Vec<_> = full
            .states()
            .iter()
            .filter(|s| s.cluster_counts(&assignment, 2).iter().all(|&c| c <= 1))
            .cloned()
            .collect();
        assert_eq!(full.dimension(), 10);
        assert_eq!(brute.len(), 4);
        let tr = FockBasis::truncated(4, 2, ClusterCap::new(assignment, 1)).unwrap();
        assert_eq!(tr.states(), brute.as_slice());
    }

    #[test]
    fn hop_amplitudes() {
        let (s, a) = hop_element(&FockState::new(vec![0, 1]), 0, 1).unwrap();
        assert_eq!(s.occupations(), &[1, 0]);
        assert_eq!(a, 1.0);
        let (s, a) = hop_element(&FockState::new(vec![1, 1]), 0, 1).unwrap();
        assert_eq!(s.occupations(), &[2, 0]);
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
        let (s, a) = hop_element(&FockState::new(vec![2, 0]), 1, 0).unwrap();
        assert_eq!(s.occupations(), &[1, 1]);
        assert!((a - 2f64.sqrt()).abs() < 1e-15);
        assert!(hop_element(&FockState::new(vec![2, 0]), 0, 1).is_none());
    }

    #[test]
    fn onsite_energy() {
        assert_eq!(interaction_energy(&FockState::new(vec![1, 1, 1]), 5.0), 0.0);
        assert_eq!(interaction_energy(&FockState::new(vec![2, 0]), 4.0), 4.0);
        assert_eq!(interaction_energy(&FockState::new(vec![3, 1]), 2.0), 6.0);
    }

    #[test]
    fn capacity_guard() {
        let err = FockBasis::build(30, 6, None, 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
        // truncated enumeration trips the guard while enumerating
        let cap = ClusterCap::new(vec![0; 30], 6);
        let err = FockBasis::build(30, 6, Some(cap), 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { .. }));
    }

    #[test]
    fn cap_without_partition_rejected() {
        assert!(enumerate_basis(3, 1, None, Some(1)).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let b = FockBasis::new(5, 3).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s), Some(i));
        }
        assert_eq!(b.index_of(&FockState::new(vec![1, 1, 1, 1, 0])), None);
    }
}
