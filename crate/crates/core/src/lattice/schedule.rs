use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

use super::geometry::LatticeGeometry;

const CAP_TOLERANCE: f64 = 1e-12;

/// One piecewise-constant stretch of the drive.
///
/// `hopping` is the Hermitian matrix of `J_ij` (its diagonal is ignored);
/// `onsite` holds the real fields `J_ii`, which are never capped.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub duration: f64,
    pub hopping: DMatrix<Complex64>,
    pub onsite: Vec<f64>,
}

impl Segment {
    pub fn new(duration: f64, hopping: DMatrix<Complex64>, onsite: Vec<f64>) -> Self {
        Self {
            duration,
            hopping,
            onsite,
        }
    }

    /// Hopping-only segment with zero on-site fields.
    pub fn hopping_only(duration: f64, hopping: DMatrix<Complex64>) -> Self {
        let m = hopping.nrows();
        Self::new(duration, hopping, vec![0.0; m])
    }

    pub fn site_count(&self) -> usize {
        self.onsite.len()
    }

    /// Largest off-diagonal coupling magnitude.
    pub fn max_coupling(&self) -> f64 {
        let m = self.site_count();
        let mut best = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                if i != j {
                    best = best.max(self.hopping[(i, j)].norm());
                }
            }
        }
        best
    }

    /// Same drive seen on the sub-lattice `sites` (in that order).
    pub fn restrict(&self, sites: &[usize]) -> Segment {
        let k = sites.len();
        let hopping = DMatrix::from_fn(k, k, |a, b| self.hopping[(sites[a], sites[b])]);
        let onsite = sites.iter().map(|&s| self.onsite[s]).collect();
        Segment::new(self.duration, hopping, onsite)
    }

    fn validate(&self, geom: Option<&LatticeGeometry>, alpha: f64) -> Result<()> {
        let m = self.site_count();
        if self.hopping.nrows() != m || self.hopping.ncols() != m {
            return Err(Error::InvalidInput(format!(
                "hopping matrix is {}x{}, on-site fields cover {m} sites",
                self.hopping.nrows(),
                self.hopping.ncols()
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "segment duration {} must be positive and finite",
                self.duration
            )));
        }
        if self.onsite.iter().any(|f| !f.is_finite()) {
            return Err(Error::InvalidInput("non-finite on-site field".into()));
        }
        for i in 0..m {
            for j in (i + 1)..m {
                let a = self.hopping[(i, j)];
                let b = self.hopping[(j, i)];
                if (a - b.conj()).norm() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "hopping matrix not Hermitian at ({i}, {j})"
                    )));
                }
                if let Some(g) = geom {
                    let cap = g.coupling_cap(i, j, alpha);
                    let mag = a.norm();
                    if mag > cap * (1.0 + CAP_TOLERANCE) {
                        return Err(Error::CapViolation {
                            i,
                            j,
                            magnitude: mag,
                            cap,
                            alpha,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Piecewise-constant `J(t)` together with the interaction strength `V` and
/// the power-law exponent the hoppings were validated against.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingSchedule {
    segments: Vec<Segment>,
    interaction: f64,
    alpha: f64,
}

impl CouplingSchedule {
    /// Validates every segment against `|J_ij| <= 1 / d(i,j)^alpha`.
    pub fn new(geom: &LatticeGeometry, segments: Vec<Segment>, interaction: f64, alpha: f64) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidInput("schedule needs at least one segment".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::InvalidInput(format!("alpha = {alpha} must be non-negative")));
        }
        if !interaction.is_finite() {
            return Err(Error::InvalidInput("interaction strength must be finite".into()));
        }
        for seg in &segments {
            if seg.site_count() != geom.site_count() {
                return Err(Error::InvalidInput(format!(
                    "segment covers {} sites, lattice has {}",
                    seg.site_count(),
                    geom.site_count()
                )));
            }
            seg.validate(Some(geom), alpha)?;
        }
        Ok(Self {
            segments,
            interaction,
            alpha,
        })
    }

    /// Single static segment with `J_ij = scale / d(i,j)^alpha`.
    pub fn power_law(geom: &LatticeGeometry, alpha: f64, scale: f64, interaction: f64, duration: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&scale) {
            return Err(Error::InvalidInput(format!("J_scale = {scale} must lie in [0, 1]")));
        }
        let m = geom.site_count();
        let hopping = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(scale * geom.coupling_cap(i, j, alpha), 0.0)
            }
        });
        Self::new(geom, vec![Segment::hopping_only(duration, hopping)], interaction, alpha)
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn interaction(&self) -> f64 {
        self.interaction
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn site_count(&self) -> usize {
        self.segments[0].site_count()
    }

    pub fn max_coupling(&self) -> f64 {
        self.segments.iter().map(Segment::max_coupling).fold(0.0, f64::max)
    }

    /// The drive restricted to `sites`; the sub-schedule inherits validity.
    pub fn restrict(&self, sites: &[usize]) -> CouplingSchedule {
        CouplingSchedule {
            segments: self.segments.iter().map(|s| s.restrict(sites)).collect(),
            interaction: self.interaction,
            alpha: self.alpha,
        }
    }

    /// Schedule followed by `other` (same sites, interaction and alpha).
    pub fn concat(&self, other: &CouplingSchedule) -> Result<CouplingSchedule> {
        if self.site_count() != other.site_count() || self.interaction != other.interaction || self.alpha != other.alpha
        {
            return Err(Error::InvalidInput(
                "cannot concatenate schedules with different models".into(),
            ));
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        Ok(CouplingSchedule {
            segments,
            interaction: self.interaction,
            alpha: self.alpha,
        })
    }

    /// Segments overlapping `[t0, t1]`, clipped, as `(segment, dt)` pairs in time order.
    pub fn window(&self, t0: f64, t1: f64) -> Vec<(&Segment, f64)> {
        let mut out = Vec::new();
        let mut start = 0.0;
        for seg in &self.segments {
            let end = start + seg.duration;
            let lo = t0.max(start);
            let hi = t1.min(end);
            if hi > lo {
                out.push((seg, hi - lo));
            }
            start = end;
        }
        out
    }
}
