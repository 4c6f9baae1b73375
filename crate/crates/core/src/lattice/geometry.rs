use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Chebyshev,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Chebyshev => "chebyshev",
        }
    }
}

/// Hypercubic lattice with unit spacing and open boundaries.
///
/// Sites are numbered row-major: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeGeometry {
    shape: Vec<usize>,
    metric: Metric,
}

impl LatticeGeometry {
    pub fn new(shape: Vec<usize>, metric: Metric) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::InvalidInput("lattice needs at least one axis".into()));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidInput(format!("zero extent in lattice shape {shape:?}")));
        }
        Ok(Self { shape, metric })
    }

    pub fn chain(m: usize) -> Self {
        Self::new(vec![m], Metric::Euclidean).expect("non-empty chain")
    }

    pub fn dimension(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn site_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        let mut c = vec![0; self.shape.len()];
        for (axis, &extent) in self.shape.iter().enumerate().rev() {
            c[axis] = rest % extent;
            rest /= extent;
        }
        c
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.shape)
            .fold(0, |acc, (&c, &extent)| acc * extent + c)
    }

    /// Distance under the configured metric.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        match self.metric {
            Metric::Euclidean => self.euclidean(i, j),
            Metric::Chebyshev => self.chebyshev(i, j) as f64,
        }
    }

    pub fn euclidean(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords(i), self.coords(j));
        a.iter()
            .zip(&b)
            .map(|(&x, &y)| {
                let d = x as f64 - y as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn chebyshev(&self, i: usize, j: usize) -> usize {
        let (a, b) = (self.coords(i), self.coords(j));
        a.iter().zip(&b).map(|(&x, &y)| x.abs_diff(y)).max().unwrap_or(0)
    }

    /// Largest pairwise distance among `sites`.
    pub fn max_pair_distance(&self, sites: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (k, &a) in sites.iter().enumerate() {
            for &b in &sites[k + 1..] {
                best = best.max(self.distance(a, b));
            }
        }
        best
    }

    /// Power-law cap `1 / d(i,j)^alpha` on a hopping amplitude.
    pub fn coupling_cap(&self, i: usize, j: usize, alpha: f64) -> f64 {
        1.0 / self.distance(i, j).powf(alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_roundtrip() {
        let g = LatticeGeometry::new(vec![3, 4, 2], Metric::Euclidean).unwrap();
        assert_eq!(g.site_count(), 24);
        for s in 0..24 {
            assert_eq!(g.site(&g.coords(s)), s);
        }
    }

    #[test]
    fn distances() {
        let g = LatticeGeometry::new(vec![4, 4], Metric::Euclidean).unwrap();
        let a = g.site(&[0, 0]);
        let b = g.site(&[3, 4 - 1]);
        assert!((g.distance(a, b) - 18f64.sqrt()).abs() < 1e-12);
        assert_eq!(g.chebyshev(a, b), 3);
        assert_eq!(g.distance(a, a), 0.0);
        let c = LatticeGeometry::new(vec![4, 4], Metric::Chebyshev).unwrap();
        assert_eq!(c.distance(a, b), 3.0);
        for i in 0..16 {
            for j in 0..16 {
                if i != j {
                    assert!(g.distance(i, j) >= 1.0);
                    assert!(c.distance(i, j) >= 1.0);
                }
            }
        }
    }

    #[test]
    fn nearest_neighbour_limit_of_cap() {
        let g = LatticeGeometry::chain(3);
        assert_eq!(g.coupling_cap(0, 1, f64::INFINITY), 1.0);
        assert_eq!(g.coupling_cap(0, 2, f64::INFINITY), 0.0);
        assert_eq!(g.coupling_cap(0, 2, 0.0), 1.0);
    }
}
