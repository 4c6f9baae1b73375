//! Batch driver: strict JSON configs, seeded runs and sweeps, atomic CSV/JSON output.

pub mod config;
mod experiments;

use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::Error;

pub use config::{ExperimentConfig, ExperimentKind};
pub use experiments::{execute, random_admissible_segment, OFFCLUSTER_DRAWS};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl HarnessError {
    /// 1 for anything caught by validation, 2 for failures during the computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Core(e) => match e {
                Error::InvalidInput(_)
                | Error::OutOfScope(_)
                | Error::Divergence { .. }
                | Error::CapViolation { .. }
                | Error::Capacity { .. }
                | Error::InfeasiblePlan(_)
                | Error::Geometry(_)
                | Error::OutOfBounds { .. } => 1,
                Error::Numerical(_) | Error::NoSolution(_) | Error::Inconsistent(_) | Error::Degenerate(_) => 2,
            },
            HarnessError::Io(_) => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Artifact {
    Csv {
        header: Vec<String>,
        rows: Vec<Vec<String>>,
    },
    Json(Value),
}

impl Artifact {
    pub fn csv(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Artifact::Csv {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Artifact::Csv { .. } => "csv",
            Artifact::Json(_) => "json",
        }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>, HarnessError> {
        match self {
            Artifact::Csv { header, rows } => {
                let mut w = csv::Writer::from_writer(Vec::new());
                let fail = |e: csv::Error| HarnessError::Io(e.to_string());
                w.write_record(header).map_err(fail)?;
                for r in rows {
                    w.write_record(r).map_err(fail)?;
                }
                w.into_inner().map_err(|e| HarnessError::Io(e.to_string()))
            }
            Artifact::Json(v) => {
                let mut out = serde_json::to_vec_pretty(v).map_err(|e| HarnessError::Io(e.to_string()))?;
                out.push(b'\n');
                Ok(out)
            }
        }
    }
}

/// Result of one experiment: the main artifact, named companions and a summary line.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub artifact: Artifact,
    pub sidecars: Vec<(String, Artifact)>,
    pub summary: String,
}

impl Outcome {
    pub fn new(artifact: Artifact, summary: String) -> Self {
        Self {
            artifact,
            sidecars: Vec::new(),
            summary,
        }
    }

    /// Paths written for a main output at `path`: companions go next to it as `<stem>.<name>.<ext>`.
    pub fn paths(&self, path: &Path) -> Vec<PathBuf> {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut out = vec![path.to_path_buf()];
        for (name, a) in &self.sidecars {
            out.push(path.with_file_name(format!("{stem}.{name}.{}", a.extension())));
        }
        out
    }

    /// Writes every file to a temporary sibling first and renames only once all are complete.
    pub fn write(&self, path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
        let paths = self.paths(path);
        let artifacts = std::iter::once(&self.artifact).chain(self.sidecars.iter().map(|(_, a)| a));
        let mut staged = Vec::new();
        for (p, a) in paths.iter().zip(artifacts) {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            std::fs::create_dir_all(&dir)?;
            let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
            tmp.write_all(&a.to_bytes()?)?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, p.clone()));
        }
        for (tmp, p) in staged {
            tmp.persist(&p).map_err(|e| HarnessError::Io(e.to_string()))?;
        }
        Ok(paths)
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("config {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}

/// `--out` wins over the config's `output`; otherwise `<experiment>.<ext>` in the working directory.
pub fn output_path(cfg: &ExperimentConfig, out: Option<&Path>, artifact: &Artifact) -> PathBuf {
    match (out, &cfg.output) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => PathBuf::from(format!("{}.{}", cfg.experiment.as_str(), artifact.extension())),
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    execute(cfg)
}

fn sweep_target(param: &str) -> String {
    match param {
        "alpha" | "V" | "J_scale" => format!("hamiltonian.{param}"),
        "t_max" | "steps" => format!("evolution.{param}"),
        "t1" => "hhkl.t1".to_string(),
        "m" | "columns" | "trials" => format!("haar.{param}"),
        other => other.to_string(),
    }
}

fn json_number(x: f64) -> Value {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        json!(x as i64)
    } else {
        json!(x)
    }
}

/// The config for sweep point `index`: parameter set, sweep block dropped, seed advanced by `index`.
pub fn sweep_point(cfg: &ExperimentConfig, index: usize) -> Result<ExperimentConfig, HarnessError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("sweep: block missing".to_string()))?;
    let value = *sweep
        .values
        .get(index)
        .ok_or_else(|| HarnessError::Config(format!("sweep.values: no point {index}")))?;
    let mut doc = serde_json::to_value(cfg).map_err(|e| HarnessError::Config(e.to_string()))?;
    let target = sweep_target(&sweep.param);
    let (parent, key) = match target.rsplit_once('.') {
        Some((head, last)) => (format!("/{}", head.replace('.', "/")), last),
        None => (String::new(), target.as_str()),
    };
    doc.pointer_mut(&parent)
        .and_then(Value::as_object_mut)
        .ok_or_else(|| {
            HarnessError::Config(format!(
                "sweep.param: {} names a block missing from the config",
                sweep.param
            ))
        })?
        .insert(key.to_string(), json_number(value));
    let obj = doc.as_object_mut().expect("config serializes to an object");
    obj.remove("sweep");
    obj.insert("seed".to_string(), json!(cfg.seed.wrapping_add(index as u64)));
    serde_json::from_value(doc).map_err(|e| HarnessError::Config(format!("sweep.param {}: {e}", sweep.param)))
}

fn merge(param: &str, values: &[f64], parts: Vec<Artifact>) -> Result<Artifact, HarnessError> {
    match parts.first() {
        Some(Artifact::Csv { header, .. }) => {
            let mut full = vec!["point".to_string(), param.to_string()];
            full.extend(header.iter().cloned());
            let mut rows = Vec::new();
            for (k, part) in parts.into_iter().enumerate() {
                let Artifact::Csv { rows: r, .. } = part else {
                    return Err(HarnessError::Io("mixed artifact kinds in sweep".to_string()));
                };
                for row in r {
                    let mut line = vec![k.to_string(), format!("{}", values[k])];
                    line.extend(row);
                    rows.push(line);
                }
            }
            Ok(Artifact::Csv { header: full, rows })
        }
        _ => {
            let points = parts
                .into_iter()
                .enumerate()
                .map(|(k, a)| match a {
                    Artifact::Json(v) => Ok(json!({ "point": k, "param": param, "value": values[k], "result": v })),
                    Artifact::Csv { .. } => Err(HarnessError::Io("mixed artifact kinds in sweep".to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Artifact::Json(Value::Array(points)))
        }
    }
}

/// Runs every sweep point, at most `jobs` at a time, and merges them in point order.
/// Any failing point fails the whole sweep.
pub fn sweep(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Outcome, HarnessError> {
    let sw = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Config("sweep: block missing".to_string()))?;
    if sw.values.is_empty() {
        return Err(HarnessError::Config("sweep.values: empty sweep".to_string()));
    }
    let points = (0..sw.values.len())
        .map(|k| {
            let p = sweep_point(cfg, k)?;
            p.validate()?;
            Ok(p)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Io(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| points.par_iter().map(execute).collect::<Result<_, _>>())?;

    let mut sidecar_parts: Vec<(String, Vec<Artifact>)> = Vec::new();
    for o in &outcomes {
        for (name, a) in &o.sidecars {
            match sidecar_parts.iter_mut().find(|(n, _)| n == name) {
                Some((_, v)) => v.push(a.clone()),
                None => sidecar_parts.push((name.clone(), vec![a.clone()])),
            }
        }
    }
    let summary = format!(
        "sweep over {} ({} points): {}",
        sw.param,
        outcomes.len(),
        outcomes.last().map_or("", |o| o.summary.as_str())
    );
    let main = merge(
        &sw.param,
        &sw.values,
        outcomes.into_iter().map(|o| o.artifact).collect(),
    )?;
    let mut out = Outcome::new(main, summary);
    for (name, parts) in sidecar_parts {
        out.sidecars.push((name, merge(&sw.param, &sw.values, parts)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase_cfg() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"experiment": "phase_grid", "seed": 3,
                "phase": {"dimension": 2, "beta": 2, "v_regime": "constant",
                          "alpha": {"min": 0, "max": 8, "points": 5},
                          "gamma": {"min": 0, "max": 2, "points": 4}},
                "sweep": {"param": "phase.beta", "values": [1, 1.5]}}"#,
        )
        .unwrap()
    }

    #[test]
    fn sweep_point_sets_parameter_and_seed() {
        let p = sweep_point(&phase_cfg(), 1).unwrap();
        assert_eq!(p.phase.as_ref().unwrap().beta, 1.5);
        assert_eq!(p.seed, 4);
        assert!(p.sweep.is_none());
    }

    #[test]
    fn unknown_sweep_target_is_a_config_error() {
        let mut cfg = phase_cfg();
        cfg.sweep.as_mut().unwrap().param = "hamiltonian.alpha".to_string();
        assert_eq!(sweep_point(&cfg, 0).unwrap_err().exit_code(), 1);
    }

    #[test]
    fn sweep_rows_are_grouped_by_point() {
        let out = sweep(&phase_cfg(), Some(2)).unwrap();
        let Artifact::Csv { header, rows } = out.artifact else {
            panic!("csv expected")
        };
        assert_eq!(&header[..2], &["point", "phase.beta"]);
        assert_eq!(rows.len(), 2 * 5 * 4);
        assert_eq!(rows[0][0], "0");
        assert_eq!(rows[20][0], "1");
        assert_eq!(rows[20][1], "1.5");
    }

    #[test]
    fn write_is_atomic_and_names_sidecars() {
        let dir = tempfile::tempdir().unwrap();
        let mut o = Outcome::new(Artifact::csv(&["a"], vec![vec!["1".into()]]), String::new());
        o.sidecars.push(("extra".into(), Artifact::Json(json!({"x": 1}))));
        let paths = o.write(&dir.path().join("res.csv")).unwrap();
        assert_eq!(paths[1].file_name().unwrap(), "res.extra.json");
        assert_eq!(std::fs::read_to_string(&paths[0]).unwrap(), "a\n1\n");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
