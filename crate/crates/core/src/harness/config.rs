use serde::{Deserialize, Serialize};

use crate::lattice::{LatticeGeometry, Metric};
use crate::phase::InteractionRegime;

use super::HarnessError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HhklVsExact,
    TruncationCheck,
    PhaseGrid,
    Transfer,
    ColumnSynthesis,
    Gates,
    HaarStats,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::HhklVsExact => "hhkl_vs_exact",
            ExperimentKind::TruncationCheck => "truncation_check",
            ExperimentKind::PhaseGrid => "phase_grid",
            ExperimentKind::Transfer => "transfer",
            ExperimentKind::ColumnSynthesis => "column_synthesis",
            ExperimentKind::Gates => "gates",
            ExperimentKind::HaarStats => "haar_stats",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Auto(AutoTag),
    Value(T),
}

impl<T> Default for AutoOr<T> {
    fn default() -> Self {
        AutoOr::Auto(AutoTag::Auto)
    }
}

impl<T: Copy> AutoOr<T> {
    pub fn value(&self) -> Option<T> {
        match self {
            AutoOr::Auto(_) => None,
            AutoOr::Value(v) => Some(*v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dimension: usize,
    pub shape: Vec<usize>,
    #[serde(default)]
    pub metric: Metric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub count: usize,
    /// Side length of the cubic blocks.
    pub width: usize,
    /// Initially occupied sites (row-major indices), one boson per entry.
    pub positions: Vec<usize>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianConfig {
    pub alpha: f64,
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "J_scale", default = "one")]
    pub j_scale: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    pub t_max: f64,
    /// Number of time points on `[0, t_max]`, both ends included.
    pub steps: usize,
}

fn half() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HhklConfig {
    #[serde(default = "half")]
    pub t1: f64,
    #[serde(default)]
    pub ell: AutoOr<usize>,
    #[serde(default)]
    pub velocity: AutoOr<f64>,
    /// Density exponent; `ln m / ln n` when absent.
    #[serde(default)]
    pub beta: Option<f64>,
}

fn default_delta() -> f64 {
    0.01
}

fn default_n_ref() -> f64 {
    crate::phase::DEFAULT_REFERENCE_N
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub dimension: usize,
    pub beta: f64,
    pub v_regime: InteractionRegime,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_n_ref")]
    pub n_ref: f64,
    pub alpha: Range,
    pub gamma: Range,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    pub source: usize,
    pub target: usize,
}

fn default_c() -> f64 {
    crate::haar::DEFAULT_C
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarConfig {
    pub m: usize,
    pub columns: usize,
    #[serde(default = "one_usize")]
    pub trials: usize,
    #[serde(default = "default_c")]
    pub c: f64,
}

fn one_usize() -> usize {
    1
}

fn default_leakage_v() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GatesConfig {
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    #[serde(rename = "leakage_V", default = "default_leakage_v")]
    pub leakage_v: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<ClusterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hhkl: Option<HhklConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<PhaseConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub haar: Option<HaarConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gates: Option<GatesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> HarnessError {
    HarnessError::Config(format!("{field}: {msg}"))
}

fn require<'a, T>(block: &'a Option<T>, name: &str, kind: ExperimentKind) -> Result<&'a T, HarnessError> {
    block
        .as_ref()
        .ok_or_else(|| invalid(name, format!("required by experiment {}", kind.as_str())))
}

fn positive(field: &str, x: f64) -> Result<(), HarnessError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("config: {e}")))
    }

    pub fn lattice(&self) -> Result<&LatticeConfig, HarnessError> {
        require(&self.lattice, "lattice", self.experiment)
    }

    pub fn clusters(&self) -> Result<&ClusterConfig, HarnessError> {
        require(&self.clusters, "clusters", self.experiment)
    }

    pub fn hamiltonian(&self) -> Result<&HamiltonianConfig, HarnessError> {
        require(&self.hamiltonian, "hamiltonian", self.experiment)
    }

    pub fn evolution(&self) -> Result<&EvolutionConfig, HarnessError> {
        require(&self.evolution, "evolution", self.experiment)
    }

    pub fn phase(&self) -> Result<&PhaseConfig, HarnessError> {
        require(&self.phase, "phase", self.experiment)
    }

    pub fn transfer(&self) -> Result<&TransferConfig, HarnessError> {
        require(&self.transfer, "transfer", self.experiment)
    }

    pub fn haar(&self) -> Result<&HaarConfig, HarnessError> {
        require(&self.haar, "haar", self.experiment)
    }

    pub fn gates(&self) -> Result<&GatesConfig, HarnessError> {
        require(&self.gates, "gates", self.experiment)
    }

    pub fn geometry(&self) -> Result<LatticeGeometry, HarnessError> {
        let l = self.lattice()?;
        if l.dimension == 0 || l.shape.len() != l.dimension {
            return Err(invalid(
                "lattice.shape",
                format!("needs {} extents, got {:?}", l.dimension, l.shape),
            ));
        }
        LatticeGeometry::new(l.shape.clone(), l.metric).map_err(|e| invalid("lattice.shape", e))
    }

    /// Checks every physical parameter the chosen experiment reads, before any computation.
    pub fn validate(&self) -> Result<(), HarnessError> {
        match self.experiment {
            ExperimentKind::HhklVsExact | ExperimentKind::TruncationCheck => {
                let geom = self.geometry()?;
                let c = self.clusters()?;
                if c.positions.is_empty() {
                    return Err(invalid("clusters.positions", "at least one boson is needed"));
                }
                if let Some(&p) = c.positions.iter().find(|&&p| p >= geom.site_count()) {
                    return Err(invalid("clusters.positions", format!("site {p} outside the lattice")));
                }
                if c.width == 0 {
                    return Err(invalid("clusters.width", "must be at least 1"));
                }
                let h = self.hamiltonian()?;
                let d = geom.dimension() as f64;
                if self.experiment == ExperimentKind::HhklVsExact && !(h.alpha > d + 1.0) {
                    return Err(invalid(
                        "hamiltonian.alpha",
                        format!(
                            "= {} is outside the easiness regime, which needs alpha > D + 1 = {}",
                            h.alpha,
                            d + 1.0
                        ),
                    ));
                }
                if self.experiment == ExperimentKind::TruncationCheck && !(h.alpha > d) {
                    return Err(invalid(
                        "hamiltonian.alpha",
                        format!("= {} must exceed D = {} for the truncation bound", h.alpha, d),
                    ));
                }
                if !(h.v >= 0.0) {
                    return Err(invalid("hamiltonian.V", format!("must be >= 0, got {}", h.v)));
                }
                if !(0.0..=1.0).contains(&h.j_scale) {
                    return Err(invalid(
                        "hamiltonian.J_scale",
                        format!("must lie in [0, 1], got {}", h.j_scale),
                    ));
                }
                let e = self.evolution()?;
                positive("evolution.t_max", e.t_max)?;
                if e.steps < 1 {
                    return Err(invalid("evolution.steps", "must be at least 1"));
                }
                if let Some(hh) = &self.hhkl {
                    positive("hhkl.t1", hh.t1)?;
                    if let Some(v) = hh.velocity.value() {
                        positive("hhkl.velocity", v)?;
                    }
                    if let Some(b) = hh.beta {
                        if !(b >= 1.0) {
                            return Err(invalid("hhkl.beta", format!("must be >= 1, got {b}")));
                        }
                    }
                }
            }
            ExperimentKind::PhaseGrid => {
                let p = self.phase()?;
                if p.dimension == 0 {
                    return Err(invalid("phase.dimension", "must be at least 1"));
                }
                if !(p.beta >= 1.0) {
                    return Err(invalid("phase.beta", format!("must be >= 1, got {}", p.beta)));
                }
                positive("phase.delta", p.delta)?;
                if !(p.n_ref > 1.0) {
                    return Err(invalid("phase.n_ref", "must exceed 1"));
                }
                for (name, r) in [("phase.alpha", p.alpha), ("phase.gamma", p.gamma)] {
                    if r.points == 0 || !(r.max >= r.min) {
                        return Err(invalid(name, "needs points >= 1 and max >= min"));
                    }
                }
                if !(p.alpha.min >= 0.0) {
                    return Err(invalid("phase.alpha.min", "must be >= 0"));
                }
            }
            ExperimentKind::Transfer => {
                let geom = self.geometry()?;
                let t = self.transfer()?;
                let m = geom.site_count();
                if t.source >= m || t.target >= m || t.source == t.target {
                    return Err(invalid(
                        "transfer",
                        format!("needs distinct source and target below {m}"),
                    ));
                }
                if m < 3 {
                    return Err(invalid("lattice.shape", "state transfer needs at least one ancilla"));
                }
                let h = self.hamiltonian()?;
                if !(h.alpha >= 0.0) {
                    return Err(invalid("hamiltonian.alpha", "must be >= 0"));
                }
            }
            ExperimentKind::ColumnSynthesis | ExperimentKind::HaarStats => {
                let h = self.haar()?;
                if h.m < 3 {
                    return Err(invalid("haar.m", "must be at least 3"));
                }
                if h.columns == 0 || h.columns > h.m {
                    return Err(invalid("haar.columns", format!("must lie in [1, {}]", h.m)));
                }
                if h.trials == 0 {
                    return Err(invalid("haar.trials", "must be at least 1"));
                }
                positive("haar.c", h.c)?;
                if self.experiment == ExperimentKind::ColumnSynthesis {
                    if let Some(hm) = &self.hamiltonian {
                        if !(hm.alpha >= 0.0) {
                            return Err(invalid("hamiltonian.alpha", "must be >= 0"));
                        }
                    }
                    if self.lattice.is_some() && self.geometry()?.site_count() != h.m {
                        return Err(invalid("lattice.shape", format!("must hold haar.m = {} sites", h.m)));
                    }
                }
            }
            ExperimentKind::Gates => {
                let g = self.gates()?;
                if g.v.is_empty() {
                    return Err(invalid("gates.V", "needs at least one value"));
                }
                for &v in g.v.iter().chain(&g.leakage_v) {
                    positive("gates.V", v)?;
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(invalid("sweep.values", "empty sweep"));
            }
        }
        Ok(())
    }
}
