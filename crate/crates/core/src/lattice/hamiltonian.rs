use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::fock::{hop_element, interaction_energy, FockBasis};

use super::schedule::Segment;

/// Sparse Hermitian operator on a Fock basis, stored row-compressed.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl Hamiltonian {
    fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Complex64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut values: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            if last == Some((r, c)) {
                *values.last_mut().expect("previous entry") += v;
                continue;
            }
            row_ptr[r + 1] += 1;
            cols.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map_or(Complex64::new(0.0, 0.0), |(_, v)| v)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        DVector::from_iterator(
            self.dim,
            (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum::<Complex64>()),
        )
    }

    /// Max absolute row sum; an upper bound on the spectral norm for Hermitian `H`.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.row(r).map(|(_, v)| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `<x|H|x>`.
    pub fn expectation(&self, x: &DVector<Complex64>) -> f64 {
        x.dotc(&self.apply(x)).re
    }

    /// Largest entrywise deviation from `H = H^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Principal submatrix on `keep` (indices into this operator's basis).
    pub fn submatrix(&self, keep: &[usize]) -> Hamiltonian {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            for (c, v) in self.row(old_r) {
                if map[c] != usize::MAX {
                    triplets.push((new_r, map[c], v));
                }
            }
        }
        Hamiltonian::from_triplets(keep.len(), triplets)
    }
}

/// Assemble `H = sum_{i != j} J_ij a_i^dag a_j + sum_i J_ii n_i + V/2 sum_i n_i (n_i - 1)`
/// on `basis`, keeping only terms supported inside `region` (all sites when `None`).
///
/// On a truncated basis, images that leave the basis are dropped, which is
/// exactly `QHQ`.
pub fn build_hamiltonian(
    segment: &Segment,
    interaction: f64,
    basis: &FockBasis,
    region: Option<&[usize]>,
) -> Hamiltonian {
    let m = basis.site_count();
    assert_eq!(segment.site_count(), m, "segment and basis disagree on the site count");
    let mut inside = vec![region.is_none(); m];
    if let Some(r) = region {
        for &s in r {
            inside[s] = true;
        }
    }
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && inside[i] && inside[j] {
                let jij = segment.hopping[(i, j)];
                if jij.norm() > 0.0 {
                    pairs.push((i, j, jij));
                }
            }
        }
    }

    let mut triplets = Vec::new();
    for (col, s) in basis.states().iter().enumerate() {
        let mut diag = 0.0;
        for (site, &n) in s.occupations().iter().enumerate() {
            if inside[site] && n > 0 {
                let n = n as f64;
                diag += segment.onsite[site] * n;
            }
        }
        let local: Vec<u8> = s
            .occupations()
            .iter()
            .enumerate()
            .map(|(site, &n)| if inside[site] { n } else { 0 })
            .collect();
        diag += interaction_energy(&crate::fock::FockState::new(local), interaction);
        if diag != 0.0 {
            triplets.push((col, col, Complex64::new(diag, 0.0)));
        }
        for &(i, j, jij) in &pairs {
            if let Some((image, amp)) = hop_element(s, i, j) {
                if let Some(row) = basis.index_of(&image) {
                    triplets.push((row, col, jij * amp));
                }
            }
        }
    }
    Hamiltonian::from_triplets(basis.dimension(), triplets)
}

/// Indices in `full` of the states of `truncated`.
pub fn embedding(full: &FockBasis, truncated: &FockBasis) -> Vec<usize> {
    truncated
        .states()
        .iter()
        .map(|s| full.index_of(s).expect("truncated basis must be a sub-basis"))
        .collect()
}

/// `H' = QHQ` expressed on the truncated basis.
pub fn truncate_hamiltonian(h: &Hamiltonian, full: &FockBasis, truncated: &FockBasis) -> Hamiltonian {
    h.submatrix(&embedding(full, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{ClusterCap, FockState};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn dimer(j: f64, onsite: [f64; 2]) -> Segment {
        let mut h = DMatrix::from_element(2, 2, c(0.0));
        h[(0, 1)] = c(j);
        h[(1, 0)] = c(j);
        Segment::new(1.0, h, onsite.to_vec())
    }

    #[test]
    fn single_boson_dimer_is_hopping_matrix() {
        let b = FockBasis::new(2, 1).unwrap();
        let h = build_hamiltonian(&dimer(1.0, [0.3, -0.7]), 0.0, &b, None).to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.3), c(1.0), c(1.0), c(-0.7)]);
        assert_eq!(h, expected);
    }

    #[test]
    fn two_boson_dimer_by_hand() {
        let b = FockBasis::new(2, 2).unwrap();
        let v = 2.5;
        let (f0, f1) = (0.4, -0.1);
        let h = build_hamiltonian(&dimer(1.0, [f0, f1]), v, &b, None).to_dense();
        let r2 = 2f64.sqrt();
        // basis order: |20>, |11>, |02>
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[
                c(v + 2.0 * f0),
                c(r2),
                c(0.0),
                c(r2),
                c(f0 + f1),
                c(r2),
                c(0.0),
                c(r2),
                c(v + 2.0 * f1),
            ],
        );
        assert!((h - expected).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn region_restriction_drops_outside_terms() {
        let b = FockBasis::new(3, 1).unwrap();
        let mut hop = DMatrix::from_element(3, 3, c(0.0));
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            hop[(i, j)] = c(0.5);
            hop[(j, i)] = c(0.5);
        }
        let seg = Segment::new(1.0, hop, vec![1.0, 2.0, 3.0]);
        let h = build_hamiltonian(&seg, 0.0, &b, Some(&[0, 1])).to_dense();
        for k in 0..3 {
            assert_eq!(h[(2, k)], c(0.0));
            assert_eq!(h[(k, 2)], c(0.0));
        }
        assert_eq!(h[(0, 1)], c(0.5));
        assert_eq!(h[(1, 1)], c(2.0));
    }

    #[test]
    fn truncation_is_principal_submatrix() {
        let full = FockBasis::new(4, 2).unwrap();
        let tr = FockBasis::truncated(4, 2, ClusterCap::new(vec![0, 0, 1, 1], 1)).unwrap();
        assert_eq!((full.dimension(), tr.dimension()), (10, 4));
        let mut hop = DMatrix::from_element(4, 4, c(0.0));
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    hop[(i, j)] = c(1.0 / (i as f64 - j as f64).abs().powi(2));
                }
            }
        }
        let seg = Segment::hopping_only(1.0, hop);
        let h = build_hamiltonian(&seg, 1.3, &full, None);
        let direct = build_hamiltonian(&seg, 1.3, &tr, None);
        assert_eq!(truncate_hamiltonian(&h, &full, &tr).to_dense(), direct.to_dense());
        // a huge cap changes nothing
        let loose = FockBasis::truncated(4, 2, ClusterCap::new(vec![0, 0, 1, 1], 5)).unwrap();
        assert_eq!(build_hamiltonian(&seg, 1.3, &loose, None).to_dense(), h.to_dense());
        assert_eq!(h.hermiticity_defect(), 0.0);
        let _ = FockState::new(vec![1, 0, 1, 0]);
    }
}
