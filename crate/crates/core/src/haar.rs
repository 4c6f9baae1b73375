//! Haar-random unitaries and the column statistics that set synthesis times.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::LatticeGeometry;
use crate::transfer::implement_column;

/// Constant in the high-probability frequency bound.
pub const DEFAULT_C: f64 = 0.2475;

fn complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Uniformly distributed unit vector in `C^m`.
pub fn sample_unit_vector<R: Rng>(m: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(m, |_, _| complex_gaussian(rng));
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// QR of a complex Ginibre matrix with `R`'s diagonal made positive, which
/// makes the law exactly Haar.
pub fn haar_unitary<R: Rng>(m: usize, rng: &mut R) -> DMatrix<Complex64> {
    let z = DMatrix::from_fn(m, m, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..m {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

pub fn sample_haar_unitary(m: usize, seed: u64) -> DMatrix<Complex64> {
    haar_unitary(m, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MaxEntryCdf {
    /// `Pr(max_j |z_j|^2 <= x)` for a uniform unit vector in `C^m`.
    pub value: f64,
    /// `1 - m (1 - x)^(m-1)`.
    pub two_term_bound: f64,
}

/// Alternating series `sum_{l=0}^{floor(1/x)} C(m,l) (-1)^l (1 - l x)^(m-1)`.
pub fn max_entry_cdf(x: f64, m: usize) -> Result<MaxEntryCdf> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::InvalidInput(format!("threshold x = {x} must lie in (0, 1]")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let k = ((1.0 / x).floor() as usize).min(m);
    let power = (m - 1) as i32;
    let mut binom = 1.0f64;
    let mut sum = 0.0f64;
    for l in 0..=k {
        if l > 0 {
            binom *= (m - l + 1) as f64 / l as f64;
        }
        let base = (1.0 - l as f64 * x).max(0.0);
        let term = binom * base.powi(power);
        sum += if l % 2 == 0 { term } else { -term };
    }
    let two_term_bound = 1.0 - m as f64 * (1.0 - x).powi(power);
    Ok(MaxEntryCdf {
        value: sum.clamp(0.0, 1.0),
        two_term_bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnStats {
    pub m: usize,
    pub max_entry_sq: f64,
    pub second_entry_sq: f64,
    pub diag_entry_sq: f64,
    pub omega_sq: f64,
    /// Synthesis time, when the column was actually run through the protocol.
    pub implement_time: Option<f64>,
}

/// `omega^2 = (1 - |U_1j|^2 - |U_jj|^2) / |U_2j|^2` with `U_1j`, `U_2j` the two
/// largest off-diagonal entries.
pub fn omega_for_column(column: &DVector<Complex64>, j: usize) -> Result<ColumnStats> {
    let m = column.len();
    if j >= m {
        return Err(Error::InvalidInput(format!(
            "diagonal index {j} outside a column of length {m}"
        )));
    }
    let nonzero = column.iter().filter(|z| z.norm() > 0.0).count();
    if nonzero < 3 {
        return Err(Error::Degenerate(format!(
            "column has {nonzero} nonzero entries, need 3"
        )));
    }
    let mut off: Vec<f64> = (0..m).filter(|&i| i != j).map(|i| column[i].norm_sqr()).collect();
    off.sort_by(|a, b| b.total_cmp(a));
    let (first, second) = (off[0], off.get(1).copied().unwrap_or(0.0));
    if second == 0.0 {
        return Err(Error::Degenerate("second-largest off-diagonal entry vanishes".into()));
    }
    let diag = column[j].norm_sqr();
    Ok(ColumnStats {
        m,
        max_entry_sq: first,
        second_entry_sq: second,
        diag_entry_sq: diag,
        omega_sq: ((1.0 - first - diag) / second).max(0.0),
        implement_time: None,
    })
}

/// Binomial proportion with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub successes: usize,
    pub total: usize,
    pub fraction: f64,
    pub std_error: f64,
}

impl Proportion {
    pub fn new(successes: usize, total: usize) -> Self {
        let fraction = if total == 0 {
            0.0
        } else {
            successes as f64 / total as f64
        };
        let std_error = if total == 0 {
            0.0
        } else {
            (fraction * (1.0 - fraction) / total as f64).sqrt()
        };
        Self {
            successes,
            total,
            fraction,
            std_error,
        }
    }

    /// Is `p` within `k` standard errors of the estimate (or above it)?
    pub fn at_least(&self, p: f64, k: f64) -> bool {
        self.fraction + k * self.std_error.max(self.floor_error()) >= p
    }

    /// Standard error floor for degenerate estimates (all or none succeeded).
    fn floor_error(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            (0.25 / self.total as f64).sqrt().min(1.0 / self.total as f64)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnRow {
    pub trial: usize,
    pub m: usize,
    pub column: usize,
    pub omega_sq: f64,
    pub time: f64,
    pub fidelity: f64,
    pub omega_measured: f64,
    pub below_threshold: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnTimeStats {
    pub m: usize,
    pub c: f64,
    pub omega_sq_threshold: f64,
    pub time_threshold: f64,
    pub omega_fraction: Proportion,
    pub time_fraction: Proportion,
    pub rows: Vec<ColumnRow>,
}

/// Haar samples (seed `seed + trial`), each synthesizing `columns` columns at `alpha = 0`.
pub fn column_time_trials(m: usize, trials: usize, seed: u64, c: f64, columns: usize) -> Result<ColumnTimeStats> {
    if trials < 1 || columns < 1 || columns > m || m < 3 {
        return Err(Error::InvalidInput(format!(
            "need m >= 3, trials >= 1 and 1 <= columns <= m (got m = {m}, trials = {trials}, columns = {columns})"
        )));
    }
    let ln_m = (m as f64).ln();
    let omega_sq_threshold = c * m as f64 / ln_m;
    let time_threshold = (ln_m / (c * m as f64)).sqrt();
    let geom = LatticeGeometry::chain(m);
    let per_trial: Vec<Vec<ColumnRow>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let u = sample_haar_unitary(m, seed.wrapping_add(trial as u64));
            (0..columns)
                .map(|j| {
                    let stats = omega_for_column(&u.column(j).into_owned(), j)?;
                    let trace = implement_column(&u, j, 0.0, &geom)?;
                    Ok(ColumnRow {
                        trial,
                        m,
                        column: j,
                        omega_sq: stats.omega_sq,
                        time: trace.total_time,
                        fidelity: trace.fidelity,
                        omega_measured: trace.omega,
                        below_threshold: trace.total_time <= time_threshold,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ColumnRow> = per_trial.into_iter().flatten().collect();
    let total = rows.len();
    let omega_ok = rows.iter().filter(|r| r.omega_sq >= omega_sq_threshold).count();
    let time_ok = rows.iter().filter(|r| r.below_threshold).count();
    Ok(ColumnTimeStats {
        m,
        c,
        omega_sq_threshold,
        time_threshold,
        omega_fraction: Proportion::new(omega_ok, total),
        time_fraction: Proportion::new(time_ok, total),
        rows,
    })
}
