//! Closed-form complexity exponents and the easy/hard/unknown phase map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default boson number used where an exponent needs a concrete `n`.
pub const DEFAULT_REFERENCE_N: f64 = 1e6;
/// Hopping exponents at or above this count as the nearest-neighbour limit.
pub const NEAREST_NEIGHBOUR_ALPHA: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionRegime {
    /// `V = o(1)`.
    Vanishing,
    /// `V = Theta(1)`.
    Constant,
    /// `V = poly(n)`.
    Polynomial,
    /// `V -> infinity`.
    Hardcore,
}

impl InteractionRegime {
    pub fn is_interacting(self) -> bool {
        !matches!(self, InteractionRegime::Vanishing)
    }

    /// Representative interaction strength at boson number `n`: 0, 1, `n` and infinity.
    pub fn representative_v(self, n: f64) -> f64 {
        match self {
            InteractionRegime::Vanishing => 0.0,
            InteractionRegime::Constant => 1.0,
            InteractionRegime::Polynomial => n,
            InteractionRegime::Hardcore => f64::INFINITY,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub beta: f64,
    pub dimension: usize,
    pub v_regime: InteractionRegime,
    pub gamma: f64,
    pub delta: f64,
    /// Boson number plugged into the `log(V + 1) / log n` correction.
    pub n_ref: f64,
}

impl PhasePoint {
    pub fn new(alpha: f64, beta: f64, dimension: usize, v_regime: InteractionRegime, gamma: f64) -> Self {
        Self {
            alpha,
            beta,
            dimension,
            v_regime,
            gamma,
            delta: 0.01,
            n_ref: DEFAULT_REFERENCE_N,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) || !(self.beta >= 1.0) || self.dimension == 0 {
            return Err(Error::InvalidInput(format!(
                "need alpha >= 0, beta >= 1, D >= 1; got alpha={}, beta={}, D={}",
                self.alpha, self.beta, self.dimension
            )));
        }
        if !(self.delta > 0.0) || !(self.n_ref > 1.0) {
            return Err(Error::InvalidInput(format!(
                "need delta > 0 and n > 1; got {} and {}",
                self.delta, self.n_ref
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaEasy {
    pub value: f64,
    /// Negative exponent: the easy timescale is logarithmic instead.
    pub log_regime: bool,
}

impl GammaEasy {
    /// Exponent below which sampling is easy; a logarithmic timescale admits every `gamma < 0`.
    pub fn threshold(&self) -> f64 {
        if self.log_regime {
            0.0
        } else {
            self.value
        }
    }
}

/// `(beta-1)/D (alpha-2D)/(alpha-D) - 1/(alpha-D)`, defined for `alpha > D + 1`.
pub fn gamma_easy(alpha: f64, beta: f64, dimension: usize) -> Result<GammaEasy> {
    let d = dimension as f64;
    if !(alpha > d + 1.0) {
        return Err(Error::OutOfScope(format!(
            "the easiness bound needs alpha > D + 1; got alpha = {alpha}, D = {dimension}"
        )));
    }
    let value = (beta - 1.0) / d * (alpha - 2.0 * d) / (alpha - d) - 1.0 / (alpha - d);
    Ok(GammaEasy {
        value,
        log_regime: value < 0.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HardType {
    I,
    II,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaHard {
    pub value: f64,
    pub kind: HardType,
    pub type_i: f64,
    pub type_ii: f64,
}

fn type_i_exponent(alpha: f64, beta: f64, d: f64) -> f64 {
    if alpha > d {
        (beta - 1.0) / d * (alpha - d).min(1.0)
    } else {
        0.0
    }
}

fn type_ii_exponent(p: &PhasePoint) -> f64 {
    let d = p.dimension as f64;
    let core = if p.alpha > d {
        let v = p.v_regime.representative_v(p.n_ref);
        let correction = 1.0 + (v + 1.0).ln() / p.n_ref.ln();
        (p.beta - 1.0) / d * correction.min(p.alpha - d)
    } else if p.alpha >= d / 2.0 {
        0.0
    } else {
        p.beta / d * (p.alpha - d / 2.0)
    };
    p.delta + core
}

/// Whether the first hardness branch applies: `alpha >= D/2`, interacting, `D >= 2`.
pub fn type_i_applies(alpha: f64, dimension: usize, v_regime: InteractionRegime) -> bool {
    alpha >= dimension as f64 / 2.0 && v_regime.is_interacting() && dimension >= 2
}

/// Hardness exponent with both branches evaluated; the applicable one is reported.
pub fn gamma_hard(point: &PhasePoint) -> Result<GammaHard> {
    point.validate()?;
    let type_i = type_i_exponent(point.alpha, point.beta, point.dimension as f64);
    let type_ii = type_ii_exponent(point);
    let (value, kind) = if type_i_applies(point.alpha, point.dimension, point.v_regime) {
        (type_i, HardType::I)
    } else {
        (type_ii, HardType::II)
    };
    Ok(GammaHard {
        value,
        kind,
        type_i,
        type_ii,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Easy,
    Hard,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TransitionKind {
    Sharp,
    Coarse,
    SuggestedCoarse,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Easy => "easy",
            Verdict::Hard => "hard",
            Verdict::Unknown => "unknown",
        }
    }
}

impl TransitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Sharp => "sharp",
            TransitionKind::Coarse => "coarse",
            TransitionKind::SuggestedCoarse => "suggested_coarse",
            TransitionKind::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseVerdict {
    pub verdict: Verdict,
    pub gamma_easy: Option<GammaEasy>,
    pub gamma_hard: GammaHard,
    pub transition_kind: TransitionKind,
    /// Which bound decided the verdict.
    pub governing: &'static str,
}

pub fn classify(point: &PhasePoint) -> Result<PhaseVerdict> {
    let hard = gamma_hard(point)?;
    let easy = gamma_easy(point.alpha, point.beta, point.dimension).ok();
    if let Some(e) = easy {
        if e.threshold() > hard.value {
            return Err(Error::Inconsistent(format!(
                "easy exponent {} exceeds hard exponent {} at alpha={}, beta={}, D={}",
                e.threshold(),
                hard.value,
                point.alpha,
                point.beta,
                point.dimension
            )));
        }
    }
    let (verdict, governing) = match easy {
        Some(e) if point.gamma < e.threshold() => (Verdict::Easy, "easiness bound"),
        _ if point.gamma > hard.value => (
            Verdict::Hard,
            match hard.kind {
                HardType::I => "hardness type I",
                HardType::II => "hardness type II",
            },
        ),
        _ => (Verdict::Unknown, "between bounds"),
    };
    let nn = point.alpha >= NEAREST_NEIGHBOUR_ALPHA;
    let transition_kind = match hard.kind {
        HardType::I if nn => TransitionKind::Sharp,
        HardType::II if nn && point.dimension == 1 => TransitionKind::Coarse,
        HardType::II => TransitionKind::SuggestedCoarse,
        HardType::I => TransitionKind::Unknown,
    };
    Ok(PhaseVerdict {
        verdict,
        gamma_easy: easy,
        gamma_hard: hard,
        transition_kind,
        governing,
    })
}

/// One-dimensional state-transfer time over distance `L` (natural log at `alpha = 1`).
pub fn ts_1d(l: f64, alpha: f64, c: f64) -> Result<f64> {
    if !(l >= 2.0) || !(c > 0.0) || !(alpha >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "need L >= 2, c > 0, alpha >= 0; got {l}, {c}, {alpha}"
        )));
    }
    Ok(c * if alpha > 2.0 {
        l
    } else if alpha > 1.0 {
        l.powf(alpha - 1.0)
    } else if alpha == 1.0 {
        l.ln()
    } else if alpha >= 0.5 {
        1.0
    } else {
        l.powf(alpha - 0.5)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum HardnessStrategy {
    NearestNeighbour,
    LongRangeTransfer,
    EntanglingGateLimited,
    BosonSampling,
}

impl HardnessStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            HardnessStrategy::NearestNeighbour => "nearest_neighbour",
            HardnessStrategy::LongRangeTransfer => "long_range_transfer",
            HardnessStrategy::EntanglingGateLimited => "entangling_gate_limited",
            HardnessStrategy::BosonSampling => "boson_sampling",
        }
    }
}

/// Fastest known route to a hard instance, all constants 1.
///
/// Candidates: walking the logical qubits a total distance `6L` plus one gate;
/// long-range transfer `L^(alpha-D) ln L + 1` for `alpha > D`; a single gate when
/// `alpha <= D`; and column synthesis on `n^delta` bosons,
/// `n^delta m^(alpha/D - 1/2) sqrt(ln m)` with `n = m^(1/beta)`, for `alpha <= D/2`.
pub fn hardness_protocol_time(
    alpha: f64,
    dimension: usize,
    l: f64,
    m: f64,
    beta: f64,
    delta: f64,
) -> Result<(f64, HardnessStrategy)> {
    if !(alpha >= 0.0) || dimension == 0 || !(l >= 1.0) || !(m >= 2.0) || !(beta >= 1.0) || !(delta > 0.0) {
        return Err(Error::InvalidInput(format!(
            "inconsistent protocol parameters alpha={alpha}, D={dimension}, L={l}, m={m}, beta={beta}, delta={delta}"
        )));
    }
    let d = dimension as f64;
    let mut options = vec![(6.0 * l + 1.0, HardnessStrategy::NearestNeighbour)];
    if alpha.is_finite() && alpha > d {
        options.push((l.powf(alpha - d) * l.ln() + 1.0, HardnessStrategy::LongRangeTransfer));
    } else if alpha <= d {
        options.push((1.0, HardnessStrategy::EntanglingGateLimited));
    }
    if alpha <= d / 2.0 {
        let n = m.powf(1.0 / beta);
        options.push((
            n.powf(delta) * m.powf(alpha / d - 0.5) * m.ln().sqrt(),
            HardnessStrategy::BosonSampling,
        ));
    }
    Ok(options
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("at least one strategy"))
}

/// Boustrophedon index on a `rows x cols` grid: even rows run left to right, odd rows back.
pub fn snake_index(row: usize, col: usize, rows: usize, cols: usize) -> Result<usize> {
    if row >= rows || col >= cols {
        return Err(Error::OutOfBounds { row, col, rows, cols });
    }
    Ok(row * cols + if row.is_multiple_of(2) { col } else { cols - 1 - col })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub alpha: f64,
    /// `1/sqrt(alpha)`; absent at `alpha = 0`.
    pub y: Option<f64>,
    pub gamma: f64,
    pub gamma_easy: Option<f64>,
    pub gamma_hard: f64,
    pub hard_type: HardType,
    pub verdict: Verdict,
    pub transition_kind: TransitionKind,
}

pub const GRID_HEADER: [&str; 8] = [
    "alpha",
    "y",
    "gamma",
    "gamma_easy",
    "gamma_hard",
    "hard_type",
    "verdict",
    "transition_kind",
];

impl PhaseRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            format!("{}", self.alpha),
            self.y.map_or_else(|| "alpha0".to_string(), |y| format!("{y}")),
            format!("{}", self.gamma),
            self.gamma_easy.map_or_else(String::new, |g| format!("{g}")),
            format!("{}", self.gamma_hard),
            match self.hard_type {
                HardType::I => "I".into(),
                HardType::II => "II".into(),
            },
            self.verdict.as_str().into(),
            self.transition_kind.as_str().into(),
        ]
    }
}

/// Classify every `(alpha, gamma)` pair; rows are alpha-major.
pub fn phase_grid(template: &PhasePoint, alphas: &[f64], gammas: &[f64]) -> Result<Vec<PhaseRow>> {
    let mut rows = Vec::with_capacity(alphas.len() * gammas.len());
    for &alpha in alphas {
        for &gamma in gammas {
            let p = PhasePoint {
                alpha,
                gamma,
                ..*template
            };
            let v = classify(&p)?;
            rows.push(PhaseRow {
                alpha,
                y: (alpha > 0.0).then(|| 1.0 / alpha.sqrt()),
                gamma,
                gamma_easy: v.gamma_easy.map(|g| g.value),
                gamma_hard: v.gamma_hard.value,
                hard_type: v.gamma_hard.kind,
                verdict: v.verdict,
                transition_kind: v.transition_kind,
            });
        }
    }
    Ok(rows)
}

/// `n` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn easy_exponent_examples() {
        let g = gamma_easy(1e6, 2.0, 1).unwrap();
        assert!((g.value - 1.0).abs() < 1e-5);
        assert!(gamma_easy(5.0, 1.0, 2).unwrap().log_regime);
        assert_abs_diff_eq!(gamma_easy(8.0, 2.0, 2).unwrap().value, 1.0 / 6.0, epsilon = 1e-15);
        assert!(matches!(gamma_easy(3.0, 2.0, 2), Err(Error::OutOfScope(_))));
    }

    #[test]
    fn hard_exponent_examples() {
        for alpha in [1.0, 1.5, 2.0] {
            let h = gamma_hard(&PhasePoint::new(alpha, 2.0, 2, InteractionRegime::Constant, 0.0)).unwrap();
            assert_eq!((h.value, h.kind), (0.0, HardType::I));
        }
        let h = gamma_hard(&PhasePoint::new(2.5, 2.0, 2, InteractionRegime::Constant, 0.0)).unwrap();
        assert_abs_diff_eq!(h.value, 0.25, epsilon = 1e-15);
        assert_eq!(h.kind, HardType::I);
        let h = gamma_hard(&PhasePoint::new(0.5, 2.0, 2, InteractionRegime::Vanishing, 0.0)).unwrap();
        assert_abs_diff_eq!(h.value, -0.49, epsilon = 1e-12);
        assert_eq!(h.kind, HardType::II);
    }

    #[test]
    fn hardcore_chain_has_no_hardness_in_the_local_limit() {
        let h = gamma_hard(&PhasePoint::new(1e6, 2.0, 1, InteractionRegime::Hardcore, 0.0)).unwrap();
        assert!(h.value > 1e5);
    }

    #[test]
    fn classify_examples() {
        let v = classify(&PhasePoint::new(1e6, 2.0, 2, InteractionRegime::Constant, 0.4)).unwrap();
        assert_eq!(v.verdict, Verdict::Easy);
        assert_eq!(v.transition_kind, TransitionKind::Sharp);
        let v = classify(&PhasePoint::new(1e6, 2.0, 2, InteractionRegime::Constant, 0.6)).unwrap();
        assert_eq!(v.verdict, Verdict::Hard);
        // alpha = 3: easy below 0, hard above 0.5
        let v = classify(&PhasePoint::new(3.5, 2.0, 2, InteractionRegime::Constant, 0.3)).unwrap();
        assert_eq!(v.verdict, Verdict::Unknown);
        let v = classify(&PhasePoint::new(3.0, 2.0, 2, InteractionRegime::Constant, 0.3)).unwrap();
        assert_eq!(v.verdict, Verdict::Unknown);
        assert!(v.gamma_easy.is_none());
        let v = classify(&PhasePoint::new(1e6, 2.0, 1, InteractionRegime::Constant, 0.5)).unwrap();
        assert_eq!(v.transition_kind, TransitionKind::Coarse);
        let v = classify(&PhasePoint::new(4.0, 2.0, 2, InteractionRegime::Vanishing, 0.5)).unwrap();
        assert_eq!(v.transition_kind, TransitionKind::SuggestedCoarse);
    }

    #[test]
    fn nearest_neighbour_convergence_is_monotone() {
        let target = 0.5;
        let gaps: Vec<(f64, f64)> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&a| {
                let e = gamma_easy(a, 2.0, 2).unwrap().value;
                let h = gamma_hard(&PhasePoint::new(a, 2.0, 2, InteractionRegime::Constant, 0.0))
                    .unwrap()
                    .value;
                ((e - target).abs(), (h - target).abs())
            })
            .collect();
        assert!(gaps.windows(2).all(|w| w[1].0 <= w[0].0 && w[1].1 <= w[0].1));
        assert!(gaps[2].0 < 1e-5 && gaps[2].1 < 1e-5);
    }

    #[test]
    fn transfer_time_branches() {
        assert_eq!(ts_1d(100.0, 3.0, 1.0).unwrap(), 100.0);
        assert_abs_diff_eq!(ts_1d(100.0, 1.5, 1.0).unwrap(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ts_1d(100.0, 0.3, 1.0).unwrap(), 100f64.powf(-0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(ts_1d(100.0, 1.0, 1.0).unwrap(), 100f64.ln(), epsilon = 1e-12);
        // continuous at alpha = 2 and alpha = 1/2
        assert_abs_diff_eq!(
            ts_1d(50.0, 2.0, 1.0).unwrap(),
            ts_1d(50.0, 2.0 + 1e-12, 1.0).unwrap(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            ts_1d(50.0, 0.5, 1.0).unwrap(),
            ts_1d(50.0, 0.5 - 1e-12, 1.0).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn protocol_time_examples() {
        let (t, s) = hardness_protocol_time(2.5, 2, 16.0, 1024.0, 2.0, 0.01).unwrap();
        assert_abs_diff_eq!(t, 4.0 * 16f64.ln() + 1.0, epsilon = 1e-12);
        assert_eq!(s, HardnessStrategy::LongRangeTransfer);
        let (t, s) = hardness_protocol_time(1.5, 2, 16.0, 1024.0, 2.0, 0.01).unwrap();
        assert_eq!((t, s), (1.0, HardnessStrategy::EntanglingGateLimited));
        let (t, s) = hardness_protocol_time(1e6, 2, 16.0, 1024.0, 2.0, 0.01).unwrap();
        assert_eq!((t, s), (97.0, HardnessStrategy::NearestNeighbour));
        let (_, s) = hardness_protocol_time(0.1, 2, 16.0, 1e8, 2.0, 0.01).unwrap();
        assert_eq!(s, HardnessStrategy::BosonSampling);
    }

    #[test]
    fn snake_examples() {
        assert_eq!(snake_index(0, 0, 2, 3).unwrap(), 0);
        assert_eq!(snake_index(1, 2, 2, 3).unwrap(), 3);
        assert!(matches!(snake_index(2, 0, 2, 3), Err(Error::OutOfBounds { .. })));
    }

    proptest! {
        #[test]
        fn snake_is_a_bijection(rows in 1usize..12, cols in 1usize..12) {
            let mut seen = vec![false; rows * cols];
            for r in 0..rows {
                for c in 0..cols {
                    let k = snake_index(r, c, rows, cols).unwrap();
                    prop_assert!(!seen[k]);
                    seen[k] = true;
                    if c + 1 < cols {
                        prop_assert_eq!(k.abs_diff(snake_index(r, c + 1, rows, cols).unwrap()), 1);
                    }
                }
            }
        }

        #[test]
        fn bounds_are_ordered(
            alpha in 0.0f64..50.0,
            beta in 1.0f64..3.0,
            d in 1usize..4,
            regime in prop_oneof![
                Just(InteractionRegime::Vanishing),
                Just(InteractionRegime::Constant),
                Just(InteractionRegime::Polynomial),
                Just(InteractionRegime::Hardcore),
            ],
        ) {
            let p = PhasePoint::new(alpha, beta, d, regime, 0.0);
            let v = classify(&p).unwrap();
            if let Some(e) = v.gamma_easy {
                prop_assert!(e.value <= v.gamma_hard.value);
            }
        }

        #[test]
        fn transfer_time_is_positive(l in 2.0f64..1e4, alpha in 0.0f64..6.0) {
            prop_assert!(ts_1d(l, alpha, 1.0).unwrap() > 0.0);
        }
    }
}
