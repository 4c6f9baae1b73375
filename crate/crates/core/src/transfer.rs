//! Free-boson protocols on one particle: the single-shot map, two-round state
//! transfer and the column synthesis built from them.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{CouplingSchedule, LatticeGeometry, Segment};
use crate::propagator::unitary_from_hermitian;

const NORM_TOLERANCE: f64 = 1e-10;
/// Columns with `1 - |U_jj|^2` below this are already localized.
pub const LOCALIZED_TOLERANCE: f64 = 1e-14;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// Constant hopping pattern held for `duration`.
    Hop { duration: f64, hopping: DMatrix<Complex64> },
    /// Instantaneous on-site rotation `a_site -> e^{i phase} a_site`.
    Phase { site: usize, phase: f64 },
}

impl Step {
    pub fn duration(&self) -> f64 {
        match self {
            Step::Hop { duration, .. } => *duration,
            Step::Phase { .. } => 0.0,
        }
    }

    pub fn nonzero_couplings(&self) -> usize {
        match self {
            Step::Hop { hopping, .. } => {
                let m = hopping.nrows();
                let mut count = 0;
                for i in 0..m {
                    for j in (i + 1)..m {
                        if hopping[(i, j)].norm() > 0.0 {
                            count += 1;
                        }
                    }
                }
                count
            }
            Step::Phase { .. } => 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolTrace {
    pub steps: Vec<Step>,
    pub total_time: f64,
    /// Effective two-mode frequency of the last hopping stage.
    pub omega: f64,
    pub target: DVector<Complex64>,
    pub achieved: DVector<Complex64>,
    pub fidelity: f64,
    pub leakage: f64,
}

#[derive(Serialize)]
struct TraceSegmentJson {
    duration: f64,
    nonzero_couplings: usize,
}

#[derive(Serialize)]
struct TraceJson {
    column: Option<usize>,
    total_time: f64,
    fidelity: f64,
    segments: Vec<TraceSegmentJson>,
}

impl ProtocolTrace {
    /// Runs `steps` on a particle starting at `source` and scores the result against `target`.
    fn execute(steps: Vec<Step>, source: usize, target: DVector<Complex64>, omega: f64) -> Result<Self> {
        let m = target.len();
        let mut psi = DVector::from_element(m, zero());
        psi[source] = Complex64::new(1.0, 0.0);
        for step in &steps {
            match step {
                Step::Hop { duration, hopping } => psi = unitary_from_hermitian(hopping, *duration) * psi,
                Step::Phase { site, phase } => psi[*site] *= Complex64::from_polar(1.0, *phase),
            }
        }
        let drift = (psi.norm() - 1.0).abs();
        if drift > NORM_TOLERANCE {
            return Err(Error::Numerical(format!("single-particle norm drifted by {drift:e}")));
        }
        let fidelity = target.dotc(&psi).norm_sqr();
        Ok(Self {
            total_time: steps.iter().map(Step::duration).sum(),
            steps,
            omega,
            target,
            achieved: psi,
            fidelity,
            leakage: 1.0 - fidelity,
        })
    }

    pub fn to_json(&self, column: Option<usize>) -> serde_json::Value {
        let doc = TraceJson {
            column,
            total_time: self.total_time,
            fidelity: self.fidelity,
            segments: self
                .steps
                .iter()
                .map(|s| TraceSegmentJson {
                    duration: s.duration(),
                    nonzero_couplings: s.nonzero_couplings(),
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("trace serializes")
    }
}

/// Worst-case coupling scale `1 / W^alpha` over the listed pairs.
fn worst_pair_scale(geom: &LatticeGeometry, pairs: &[(usize, usize)], alpha: f64) -> Result<f64> {
    let mut scale = 1.0f64;
    for &(a, b) in pairs {
        let cap = geom.coupling_cap(a, b, alpha).min(1.0);
        scale = scale.min(cap);
    }
    if scale <= 0.0 {
        let &(i, j) = pairs
            .iter()
            .find(|&&(a, b)| geom.coupling_cap(a, b, alpha) <= 0.0)
            .expect("a zero cap exists");
        return Err(Error::CapViolation {
            i,
            j,
            magnitude: 0.0,
            cap: 0.0,
            alpha,
        });
    }
    Ok(scale)
}

/// Asserts the hopping pattern respects the power-law cap.
fn checked_hop(geom: &LatticeGeometry, alpha: f64, duration: f64, hopping: DMatrix<Complex64>) -> Result<Step> {
    if duration > 0.0 {
        CouplingSchedule::new(geom, vec![Segment::hopping_only(duration, hopping.clone())], 0.0, alpha)?;
    }
    Ok(Step::Hop { duration, hopping })
}

fn phase_fix(site: usize, have: Complex64, want: Complex64) -> Option<Step> {
    if have.norm() < 1e-300 || want.norm() < 1e-300 {
        return None;
    }
    let phase = want.arg() - have.arg();
    (phase.abs() > 0.0).then_some(Step::Phase { site, phase })
}

/// Couplings of a single-shot pulse from `source`: `J_{source,k} = -i kappa conj(g_k)`.
fn single_shot_steps(
    source: usize,
    gammas: &DVector<Complex64>,
    alpha: f64,
    geom: &LatticeGeometry,
) -> Result<(Vec<Step>, f64)> {
    let m = gammas.len();
    let off: Vec<usize> = (0..m).filter(|&k| k != source && gammas[k].norm() > 0.0).collect();
    let off_norm = off.iter().map(|&k| gammas[k].norm_sqr()).sum::<f64>().sqrt();
    if off.is_empty() {
        let steps = phase_fix(source, Complex64::new(1.0, 0.0), gammas[source])
            .into_iter()
            .collect();
        return Ok((steps, 0.0));
    }
    let max_off = off.iter().map(|&k| gammas[k].norm()).fold(0.0, f64::max);
    let pairs: Vec<(usize, usize)> = off.iter().map(|&k| (source, k)).collect();
    let kappa = worst_pair_scale(geom, &pairs, alpha)? / max_off;
    let mut hopping = DMatrix::from_element(m, m, zero());
    for &k in &off {
        let j = Complex64::new(0.0, -kappa) * gammas[k].conj();
        hopping[(source, k)] = j;
        hopping[(k, source)] = j.conj();
    }
    let omega = kappa * off_norm;
    let duration = gammas[source].norm().clamp(0.0, 1.0).acos() / omega;
    let mut steps = vec![checked_hop(geom, alpha, duration, hopping)?];
    // after the pulse the source holds the real amplitude |g_source|
    steps.extend(phase_fix(source, Complex64::new(1.0, 0.0), gammas[source]));
    Ok((steps, omega))
}

fn check_unit(gammas: &DVector<Complex64>) -> Result<()> {
    let norm = gammas.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "target amplitudes have norm {norm}, not 1"
        )));
    }
    Ok(())
}

/// `a_i^dag -> sum_j g_j a_j^dag` with one pulse of duration `acos|g_i| / omega`.
pub fn single_shot(
    source: usize,
    gammas: &DVector<Complex64>,
    alpha: f64,
    geom: &LatticeGeometry,
) -> Result<ProtocolTrace> {
    check_unit(gammas)?;
    if gammas.len() != geom.site_count() || source >= gammas.len() {
        return Err(Error::InvalidInput(
            "amplitudes must cover every site and the source must exist".into(),
        ));
    }
    let (steps, omega) = single_shot_steps(source, gammas, alpha, geom)?;
    ProtocolTrace::execute(steps, source, gammas.clone(), omega)
}

fn transfer_steps(
    i: usize,
    j: usize,
    gamma_i: Complex64,
    gamma_j: Complex64,
    ancillas: &[usize],
    alpha: f64,
    geom: &LatticeGeometry,
) -> Result<(Vec<Step>, f64)> {
    let m = geom.site_count();
    let pairs: Vec<(usize, usize)> = ancillas.iter().flat_map(|&k| [(i, k), (j, k)]).collect();
    let kappa = worst_pair_scale(geom, &pairs, alpha)?;
    let omega = kappa * (ancillas.len() as f64).sqrt();

    // round 1: partial pulse from i into the uniform ancilla mode
    let mut round1 = DMatrix::from_element(m, m, zero());
    for &k in ancillas {
        round1[(i, k)] = Complex64::new(0.0, -kappa);
        round1[(k, i)] = Complex64::new(0.0, kappa);
    }
    let t1 = gamma_i.norm().clamp(0.0, 1.0).acos() / omega;
    // round 2: full swap of that mode into j
    let mut round2 = DMatrix::from_element(m, m, zero());
    for &k in ancillas {
        round2[(j, k)] = Complex64::new(kappa, 0.0);
        round2[(k, j)] = Complex64::new(kappa, 0.0);
    }
    let t2 = FRAC_PI_2 / omega;
    let mut steps = vec![
        checked_hop(geom, alpha, t1, round1)?,
        checked_hop(geom, alpha, t2, round2)?,
    ];
    // i holds |g_i|; j holds -i * sqrt(1 - |g_i|^2)
    steps.extend(phase_fix(i, Complex64::new(1.0, 0.0), gamma_i));
    steps.extend(phase_fix(j, Complex64::new(0.0, -1.0), gamma_j));
    Ok((steps, omega))
}

/// `a_i^dag -> g_i a_i^dag + g_j a_j^dag` through the uniform mode of `ancillas`.
pub fn state_transfer(
    i: usize,
    j: usize,
    gamma_i: Complex64,
    gamma_j: Complex64,
    ancillas: &[usize],
    alpha: f64,
    geom: &LatticeGeometry,
) -> Result<ProtocolTrace> {
    let m = geom.site_count();
    if i == j || i >= m || j >= m {
        return Err(Error::InvalidInput(format!(
            "state transfer needs distinct sites, got {i} and {j}"
        )));
    }
    if ancillas.is_empty() || ancillas.iter().any(|&k| k == i || k == j || k >= m) {
        return Err(Error::InvalidInput(
            "ancillas must be non-empty and exclude both endpoints".into(),
        ));
    }
    let mut target = DVector::from_element(m, zero());
    target[i] = gamma_i;
    target[j] = gamma_j;
    check_unit(&target)?;
    let (steps, omega) = transfer_steps(i, j, gamma_i, gamma_j, ancillas, alpha, geom)?;
    ProtocolTrace::execute(steps, i, target, omega)
}

/// Prepares column `j` of `u` from a particle on site `j`.
pub fn implement_column(u: &DMatrix<Complex64>, j: usize, alpha: f64, geom: &LatticeGeometry) -> Result<ProtocolTrace> {
    let m = u.nrows();
    if u.ncols() != m || geom.site_count() != m || j >= m {
        return Err(Error::InvalidInput(
            "unitary, geometry and column index disagree".into(),
        ));
    }
    let defect = (u.adjoint() * u - DMatrix::<Complex64>::identity(m, m))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if defect > NORM_TOLERANCE {
        return Err(Error::InvalidInput(format!(
            "matrix is not unitary (defect {defect:e})"
        )));
    }
    let column: DVector<Complex64> = u.column(j).into_owned();
    let ujj = column[j];
    let rest = 1.0 - ujj.norm_sqr();
    if rest < LOCALIZED_TOLERANCE {
        let steps = phase_fix(j, Complex64::new(1.0, 0.0), ujj).into_iter().collect();
        return ProtocolTrace::execute(steps, j, column, 0.0);
    }
    let mut others: Vec<usize> = (0..m).filter(|&k| k != j).collect();
    others.sort_by(|&a, &b| column[b].norm().total_cmp(&column[a].norm()).then(a.cmp(&b)));
    let p = others[0];
    let ancillas: Vec<usize> = others[1..].to_vec();

    if ujj.norm() >= column[p].norm() || ancillas.is_empty() {
        let (steps, omega) = single_shot_steps(j, &column, alpha, geom)?;
        return ProtocolTrace::execute(steps, j, column, omega);
    }
    let s = rest.sqrt();
    let (mut steps, _) = transfer_steps(j, p, ujj, Complex64::new(s, 0.0), &ancillas, alpha, geom)?;
    let mut spread = column.clone();
    spread[j] = zero();
    spread /= Complex64::new(s, 0.0);
    let (shot, omega) = single_shot_steps(p, &spread, alpha, geom)?;
    steps.extend(shot);
    ProtocolTrace::execute(steps, j, column, omega)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::fock::{FockBasis, FockState};
    use crate::propagator::{evolve_exact, StateVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn even_split_over_two_sites() {
        let g = LatticeGeometry::chain(3);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let gammas = DVector::from_vec(vec![c(h, 0.0), c(0.0, 0.0), c(h, 0.0)]);
        let tr = single_shot(1, &gammas, 0.0, &g).unwrap();
        assert!((tr.omega - 2f64.sqrt()).abs() < 1e-12);
        assert!((tr.total_time - PI / (2.0 * 2f64.sqrt())).abs() < 1e-12);
        assert!(tr.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn staying_put_takes_no_time() {
        let g = LatticeGeometry::chain(4);
        let mut gammas = DVector::from_element(4, c(0.0, 0.0));
        gammas[2] = c(1.0, 0.0);
        let tr = single_shot(2, &gammas, 1.0, &g).unwrap();
        assert_eq!(tr.total_time, 0.0);
        assert!(tr.fidelity > 1.0 - 1e-15);
    }

    #[test]
    fn uniform_spread_frequency() {
        let m = 7;
        let g = LatticeGeometry::chain(m);
        let a = 1.0 / ((m - 1) as f64).sqrt();
        let gammas = DVector::from_fn(m, |k, _| if k == 0 { c(0.0, 0.0) } else { c(0.0, -a) });
        let tr = single_shot(0, &gammas, 0.0, &g).unwrap();
        assert!((tr.omega - ((m - 1) as f64).sqrt()).abs() < 1e-12);
        assert!((tr.total_time - PI / (2.0 * ((m - 1) as f64).sqrt())).abs() < 1e-12);
        assert!(tr.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn nearest_neighbour_only_cannot_spread() {
        let g = LatticeGeometry::chain(3);
        let gammas = DVector::from_vec(vec![c(0.0, 0.0), c(0.6, 0.0), c(0.8, 0.0)]);
        assert!(matches!(
            single_shot(0, &gammas, f64::INFINITY, &g),
            Err(Error::CapViolation { .. })
        ));
    }

    #[test]
    fn full_transfer_with_nine_ancillas() {
        let g = LatticeGeometry::chain(11);
        let anc: Vec<usize> = (1..10).collect();
        let tr = state_transfer(0, 10, c(0.0, 0.0), c(1.0, 0.0), &anc, 0.0, &g).unwrap();
        assert!((tr.total_time - PI / 3.0).abs() < 1e-14);
        assert!(tr.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn transfer_returning_to_source() {
        let g = LatticeGeometry::chain(5);
        let tr = state_transfer(0, 4, c(0.0, 1.0), c(0.0, 0.0), &[1, 2, 3], 0.0, &g).unwrap();
        assert!((tr.total_time - FRAC_PI_2 / 3f64.sqrt()).abs() < 1e-14);
        assert!(tr.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn long_range_cost_of_farthest_pair() {
        let g = LatticeGeometry::chain(11);
        let anc: Vec<usize> = (1..10).collect();
        let free = state_transfer(0, 10, c(0.6, 0.0), c(0.0, 0.8), &anc, 0.0, &g).unwrap();
        let slow = state_transfer(0, 10, c(0.6, 0.0), c(0.0, 0.8), &anc, 0.4, &g).unwrap();
        // farthest coupled pair is at distance 9 here
        assert!((slow.total_time / free.total_time - 9f64.powf(0.4)).abs() < 1e-12);
        assert!(slow.fidelity > 1.0 - 1e-9);
    }

    #[test]
    fn identity_column_is_free() {
        let u = DMatrix::<Complex64>::identity(4, 4);
        let g = LatticeGeometry::chain(4);
        for j in 0..4 {
            let tr = implement_column(&u, j, 0.0, &g).unwrap();
            assert_eq!(tr.total_time, 0.0);
            assert!((tr.fidelity - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hadamard_column() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let u = DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]);
        let g = LatticeGeometry::chain(2);
        let tr = implement_column(&u, 0, 0.0, &g).unwrap();
        assert!((tr.total_time - PI / 4.0).abs() < 1e-12);
        assert_eq!(tr.steps.iter().filter(|s| matches!(s, Step::Hop { .. })).count(), 1);
        assert!(tr.fidelity > 1.0 - 1e-12);
    }

    #[test]
    fn single_particle_matches_fock_space_evolution() {
        let g = LatticeGeometry::chain(4);
        let gammas = DVector::from_vec(vec![c(0.5, 0.0), c(0.0, 0.5), c(0.5, 0.0), c(-0.5, 0.0)]);
        let tr = single_shot(0, &gammas, 1.0, &g).unwrap();
        let Step::Hop { duration, hopping } = &tr.steps[0] else {
            panic!("first step is a pulse")
        };
        let s = CouplingSchedule::new(&g, vec![Segment::hopping_only(*duration, hopping.clone())], 0.0, 1.0).unwrap();
        let basis = Arc::new(FockBasis::new(4, 1).unwrap());
        let psi = StateVector::basis_state(basis, &FockState::new(vec![1, 0, 0, 0])).unwrap();
        let out = evolve_exact(&s, &psi, *duration).unwrap();
        // Fock order for one boson is site order
        let single = unitary_from_hermitian(hopping, *duration).column(0).into_owned();
        assert!((out.amplitudes() - single).norm() < 1e-12);
    }

    #[test]
    fn trace_json_shape() {
        let g = LatticeGeometry::chain(3);
        let gammas = DVector::from_vec(vec![c(0.0, 0.0), c(0.6, 0.0), c(0.8, 0.0)]);
        let v = single_shot(0, &gammas, 0.0, &g).unwrap().to_json(Some(2));
        assert_eq!(v["column"], 2);
        assert_eq!(v["segments"][0]["nonzero_couplings"], 2);
    }
}
