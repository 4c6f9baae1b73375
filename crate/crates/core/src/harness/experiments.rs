use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::fock::{FockBasis, FockState};
use crate::gates::{
    entangling_gate, find_ancilla_path, hardcore_entangling, tuned_entangling_params, DualRailRegister,
};
use crate::haar::{column_time_trials, sample_haar_unitary};
use crate::hhkl::{default_velocity, regime_error, truncation_error_bound, HhklSetup, PlanOptions, TAIL_DECAY};
use crate::lattice::{offcluster_norm_bound, ClusterPartition, CouplingSchedule, LatticeGeometry, Metric, Segment};
use crate::phase::{linspace, phase_grid, PhasePoint, GRID_HEADER};
use crate::propagator::{evolve_exact, StateVector};
use crate::transfer::{implement_column, state_transfer};

use super::config::{ExperimentConfig, ExperimentKind};
use super::{Artifact, HarnessError, Outcome};

fn num(x: f64) -> String {
    format!("{x}")
}

pub fn execute(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    cfg.validate()?;
    match cfg.experiment {
        ExperimentKind::HhklVsExact => hhkl_vs_exact(cfg),
        ExperimentKind::TruncationCheck => truncation_check(cfg),
        ExperimentKind::PhaseGrid => phase_grid_experiment(cfg),
        ExperimentKind::Transfer => transfer(cfg),
        ExperimentKind::ColumnSynthesis => column_synthesis(cfg),
        ExperimentKind::Gates => gates(cfg),
        ExperimentKind::HaarStats => haar_stats(cfg),
    }
}

struct Instance {
    geom: LatticeGeometry,
    initial: FockState,
    partition: ClusterPartition,
    schedule: CouplingSchedule,
    beta: f64,
    velocity: f64,
}

fn instance(cfg: &ExperimentConfig) -> Result<Instance, HarnessError> {
    let geom = cfg.geometry()?;
    let c = cfg.clusters()?;
    let h = cfg.hamiltonian()?;
    let e = cfg.evolution()?;
    let initial = FockState::from_sites(geom.site_count(), &c.positions)?;
    let partition = ClusterPartition::cubic_blocks(&geom, c.width, &initial)?;
    if partition.cluster_count() != c.count {
        return Err(HarnessError::Config(format!(
            "clusters.count: blocks of width {} give {} clusters, config says {}",
            c.width,
            partition.cluster_count(),
            c.count
        )));
    }
    let schedule = CouplingSchedule::power_law(&geom, h.alpha, h.j_scale, h.v, e.t_max)?;
    let n = initial.total() as f64;
    let m = geom.site_count() as f64;
    let hh = cfg.hhkl.as_ref();
    let beta = match hh.and_then(|x| x.beta) {
        Some(b) => b,
        None if n > 1.0 => (m.ln() / n.ln()).max(1.0),
        None => 1.0,
    };
    let velocity = hh
        .and_then(|x| x.velocity.value())
        .unwrap_or_else(|| default_velocity(partition.max_bosons(), schedule.max_coupling()));
    Ok(Instance {
        geom,
        initial,
        partition,
        schedule,
        beta,
        velocity,
    })
}

fn times(cfg: &ExperimentConfig) -> Result<Vec<f64>, HarnessError> {
    let e = cfg.evolution()?;
    Ok(linspace(0.0, e.t_max, e.steps))
}

fn trunc_bound(inst: &Instance, alpha: f64, t: f64) -> Result<f64, HarnessError> {
    let d = inst.geom.dimension();
    let n = inst.initial.total() as f64;
    let width = inst.partition.width();
    let (beta, v) = (inst.beta, inst.velocity);
    let b = inst.partition.max_bosons();
    Ok(truncation_error_bound(d, &inst.partition, alpha, b, t, |tau| {
        regime_error(alpha, beta, d, n, width, v, tau).unwrap_or(f64::NAN)
    })?)
}

fn hhkl_vs_exact(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let inst = instance(cfg)?;
    let alpha = cfg.hamiltonian()?.alpha;
    let hh = cfg.hhkl.clone();
    let options = PlanOptions {
        step_time: hh.as_ref().map_or(0.5, |x| x.t1),
        shell_width: hh.as_ref().and_then(|x| x.ell.value()),
    };
    let setup = HhklSetup {
        geom: &inst.geom,
        schedule: &inst.schedule,
        partition: &inst.partition,
        initial: &inst.initial,
        beta: inst.beta,
        velocity: inst.velocity,
        options,
    };
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for t in times(cfg)? {
        let p = setup.point(t)?;
        worst = worst.max(p.error_measured);
        rows.push(vec![
            num(t),
            num(p.error_measured),
            num(p.error_bound),
            num(trunc_bound(&inst, alpha, t)?),
            p.regime.as_str().to_string(),
            p.steps.to_string(),
            num(p.shell_width),
        ]);
    }
    let summary = format!(
        "{} time points, max measured error {worst:.3e} ({} metric, velocity {}, tail decay {TAIL_DECAY})",
        rows.len(),
        inst.geom.metric().as_str(),
        inst.velocity
    );
    Ok(Outcome::new(
        Artifact::csv(
            &[
                "t",
                "error_measured",
                "error_bound",
                "trunc_bound",
                "regime",
                "N",
                "ell",
            ],
            rows,
        ),
        summary,
    ))
}

/// Random Hermitian hopping with `|J_ij| <= scale / d(i,j)^alpha`.
pub fn random_admissible_segment(geom: &LatticeGeometry, alpha: f64, scale: f64, rng: &mut ChaCha8Rng) -> Segment {
    let m = geom.site_count();
    let mut hop = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
    for i in 0..m {
        for j in (i + 1)..m {
            let mag = scale * rng.random::<f64>() * geom.coupling_cap(i, j, alpha);
            let z = Complex64::from_polar(mag, 2.0 * PI * rng.random::<f64>());
            hop[(i, j)] = z;
            hop[(j, i)] = z.conj();
        }
    }
    Segment::hopping_only(1.0, hop)
}

/// Number of random drives checked against the off-cluster bound.
pub const OFFCLUSTER_DRAWS: usize = 5;

fn truncation_check(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let inst = instance(cfg)?;
    let h = cfg.hamiltonian()?;
    let m = inst.geom.site_count();
    let n = inst.initial.total();
    let b = inst.partition.max_bosons();
    let full = Arc::new(FockBasis::new(m, n)?);
    let truncated = Arc::new(FockBasis::truncated(m, n, inst.partition.cap(b + 1))?);
    let psi_full = StateVector::basis_state(Arc::clone(&full), &inst.initial)?;
    let psi_trunc = StateVector::basis_state(Arc::clone(&truncated), &inst.initial)?;
    let mut rows = Vec::new();
    for t in times(cfg)? {
        let a = evolve_exact(&inst.schedule, &psi_full, t)?;
        let bt = evolve_exact(&inst.schedule, &psi_trunc, t)?.embed(Arc::clone(&full))?;
        rows.push(vec![num(t), num(a.distance(&bt)), num(trunc_bound(&inst, h.alpha, t)?)]);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut draws = Vec::new();
    for k in 0..OFFCLUSTER_DRAWS {
        let seg = random_admissible_segment(&inst.geom, h.alpha, h.j_scale, &mut rng);
        let bound = offcluster_norm_bound(inst.geom.dimension(), &inst.partition, h.alpha, b, Some((&seg, h.v, n)))?;
        draws.push(vec![
            k.to_string(),
            bound.exact_norm.map_or_else(String::new, num),
            num(bound.gershgorin_bound.unwrap_or(f64::NAN)),
            num(bound.analytic_bound),
        ]);
    }
    let summary = format!(
        "{} time points, truncated dimension {} of {} ({} metric)",
        rows.len(),
        truncated.dimension(),
        full.dimension(),
        inst.geom.metric().as_str()
    );
    let mut out = Outcome::new(Artifact::csv(&["t", "distance", "trunc_bound"], rows), summary);
    out.sidecars.push((
        "offcluster".to_string(),
        Artifact::csv(&["draw", "exact_norm", "gershgorin_bound", "analytic_bound"], draws),
    ));
    Ok(out)
}

fn phase_grid_experiment(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let p = cfg.phase()?;
    let template = PhasePoint {
        alpha: 0.0,
        beta: p.beta,
        dimension: p.dimension,
        v_regime: p.v_regime,
        gamma: 0.0,
        delta: p.delta,
        n_ref: p.n_ref,
    };
    let alphas = linspace(p.alpha.min, p.alpha.max, p.alpha.points);
    let gammas = linspace(p.gamma.min, p.gamma.max, p.gamma.points);
    let grid = phase_grid(&template, &alphas, &gammas)?;
    let counts = ["easy", "hard", "unknown"].map(|v| grid.iter().filter(|r| r.verdict.as_str() == v).count());
    let summary = format!(
        "{} grid points: {} easy, {} hard, {} unknown (O(1) constants 1, n = {}, delta = {})",
        grid.len(),
        counts[0],
        counts[1],
        counts[2],
        p.n_ref,
        p.delta
    );
    Ok(Outcome::new(
        Artifact::csv(&GRID_HEADER, grid.iter().map(|r| r.record()).collect()),
        summary,
    ))
}

fn transfer(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let geom = cfg.geometry()?;
    let t = cfg.transfer()?;
    let alpha = cfg.hamiltonian()?.alpha;
    let ancillas: Vec<usize> = (0..geom.site_count())
        .filter(|&k| k != t.source && k != t.target)
        .collect();
    let trace = state_transfer(
        t.source,
        t.target,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
        &ancillas,
        alpha,
        &geom,
    )?;
    let mut doc = trace.to_json(None);
    doc["source"] = json!(t.source);
    doc["target"] = json!(t.target);
    doc["ancillas"] = json!(ancillas.len());
    doc["alpha"] = json!(alpha);
    doc["metric"] = json!(geom.metric().as_str());
    let summary = format!(
        "transfer {} -> {} in time {:.6} with fidelity {:.12}",
        t.source, t.target, trace.total_time, trace.fidelity
    );
    Ok(Outcome::new(Artifact::Json(doc), summary))
}

fn column_synthesis(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let h = cfg.haar()?;
    let alpha = cfg.hamiltonian.as_ref().map_or(0.0, |x| x.alpha);
    let geom = if cfg.lattice.is_some() {
        cfg.geometry()?
    } else {
        LatticeGeometry::new(vec![h.m], Metric::Euclidean)?
    };
    let u = sample_haar_unitary(h.m, cfg.seed);
    let mut traces = Vec::new();
    let mut worst = 1.0f64;
    for j in 0..h.columns {
        let trace = implement_column(&u, j, alpha, &geom)?;
        worst = worst.min(trace.fidelity);
        let mut doc = trace.to_json(Some(j));
        doc["omega"] = json!(trace.omega);
        traces.push(doc);
    }
    let summary = format!(
        "{} columns of a Haar unitary on {} modes, min fidelity {worst:.12}",
        h.columns, h.m
    );
    Ok(Outcome::new(
        Artifact::Json(json!({ "m": h.m, "alpha": alpha, "seed": cfg.seed, "columns": traces })),
        summary,
    ))
}

fn gates(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let g = cfg.gates()?;
    let mut tuned = Vec::new();
    let mut reports = Vec::new();
    for &v in &g.v {
        let p = tuned_entangling_params(v)?;
        reports.push(entangling_gate(p.j, p.t, v)?.to_json());
        tuned.push(serde_json::to_value(p).expect("tuned parameters serialize"));
    }

    let leak: Vec<(f64, f64)> = g
        .leakage_v
        .iter()
        .map(|&v| Ok((v, entangling_gate(1.0, 2.0 * PI, v)?.leakage)))
        .collect::<Result<_, HarnessError>>()?;
    let c_fit = leak.iter().map(|&(v, l)| l * v * v).fold(0.0, f64::max);

    let mut mu_curve = Vec::new();
    for &v in &g.v {
        for t in linspace(0.0, 2.0 * PI, 9) {
            let e = entangling_gate(1.0, t, v)?.entangling.expect("entangling details");
            mu_curve.push(json!({
                "V": v,
                "t": t,
                "mu_abs": e.mu.norm(),
                "mu_exact_closed_form": e.exact_mu_closed_form,
                "mu_reference_shape": e.reference_mu_shape,
                "exact_splitting": e.exact_splitting,
                "reference_splitting": e.reference_splitting,
            }));
        }
    }

    let grid = LatticeGeometry::new(vec![2, 4], Metric::Euclidean)?;
    let register = DualRailRegister::new(vec![
        (grid.site(&[0, 0]), grid.site(&[0, 1])),
        (grid.site(&[0, 3]), grid.site(&[0, 2])),
    ])?;
    let path = find_ancilla_path(&grid, &register, 1.0)?;
    let hardcore = hardcore_entangling(&register, &path, &grid, 1.0)?;

    let worst_tuned = tuned
        .iter()
        .map(|p| p["leakage"].as_f64().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    let summary = format!(
        "{} tuned gates (max leakage {worst_tuned:.3e}), leakage fit c = {c_fit:.4}",
        tuned.len()
    );
    Ok(Outcome::new(
        Artifact::Json(json!({
            "tuned": tuned,
            "entangling": reports,
            "leakage_fit": {
                "J": 1.0,
                "t": 2.0 * PI,
                "points": leak.iter().map(|&(v, l)| json!({ "V": v, "leakage": l })).collect::<Vec<_>>(),
                "c": c_fit,
            },
            "mu_comparison": mu_curve,
            "hardcore": hardcore.to_json(),
        })),
        summary,
    ))
}

fn haar_stats(cfg: &ExperimentConfig) -> Result<Outcome, HarnessError> {
    let h = cfg.haar()?;
    let stats = column_time_trials(h.m, h.trials, cfg.seed, h.c, h.columns)?;
    let rows = stats
        .rows
        .iter()
        .map(|r| {
            vec![
                r.trial.to_string(),
                r.m.to_string(),
                num(r.omega_sq),
                num(r.time),
                u8::from(r.below_threshold).to_string(),
                r.column.to_string(),
                num(r.fidelity),
            ]
        })
        .collect();
    let summary = format!(
        "{} columns: omega^2 fraction {:.4} +- {:.4}, time fraction {:.4} +- {:.4}",
        stats.rows.len(),
        stats.omega_fraction.fraction,
        stats.omega_fraction.std_error,
        stats.time_fraction.fraction,
        stats.time_fraction.std_error
    );
    Ok(Outcome::new(
        Artifact::csv(
            &[
                "trial",
                "m",
                "omega_sq",
                "time",
                "below_threshold",
                "column",
                "fidelity",
            ],
            rows,
        ),
        summary,
    ))
}
