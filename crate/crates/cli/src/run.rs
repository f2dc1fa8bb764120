//! Dispatches an [`ExperimentSpec`] to the estimators and the solver.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Map, Value};
use subreg_core::regularity::{
    self, growth_check_lower, growth_check_pairwise, metric_regularity_probe, order_scan, parameterized_check,
    perturbation_bound_check, ratio_table, GraphSampler, GrowthSetup, ModulusKind, ParameterSweep,
    PerturbationParams, ProbeGrid, ScanThresholds, Verdict,
};
use subreg_core::solver::{rate_analysis, solve, SolverConfig, TraceStatus};
use subreg_core::ClosedInterval;

use crate::output::{write_atomic, Cell, Table};
use crate::spec::{ExperimentKind, ExperimentSpec, Format, GrowthVariant, Modulus, SpecError};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default order-scan radii: one per decade from 1e-1 to 1e-6.
pub const DEFAULT_RADII: [f64; 6] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{context}: {source}")]
    Core {
        context: String,
        source: subreg_core::Error,
    },
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

trait Context<T> {
    fn at(self, context: &str) -> Result<T, RunError>;
}

impl<T> Context<T> for subreg_core::Result<T> {
    fn at(self, context: &str) -> Result<T, RunError> {
        self.map_err(|source| RunError::Core {
            context: context.to_string(),
            source,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec: ExperimentSpec,
    pub passed: bool,
    pub verdicts: Vec<(String, String)>,
    pub tables: Vec<(String, Table)>,
    /// Grid and estimator metadata, including `truncation_active`.
    pub meta: Map<String, Value>,
    pub wall_clock_s: f64,
}

impl RunResult {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// Writes the primary table to `<stem>.csv` (further tables to
    /// `<stem>.<table>.csv`), or everything to `<stem>.json`.
    pub fn write(&self, out_dir: &Path, format: Format) -> Result<Vec<PathBuf>, RunError> {
        let stem = self.spec.stem();
        let primary = match &self.spec.output.path {
            Some(p) => out_dir.join(p),
            None => out_dir.join(format!(
                "{stem}.{}",
                match format {
                    Format::Csv => "csv",
                    Format::Json => "json",
                }
            )),
        };
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| RunError::Io { path, source }
        };
        let mut written = Vec::new();
        match format {
            Format::Json => {
                let mut bytes = serde_json::to_vec_pretty(self).expect("result serializes");
                bytes.push(b'\n');
                write_atomic(&primary, &bytes).map_err(io(&primary))?;
                written.push(primary);
            }
            Format::Csv => {
                for (i, (name, table)) in self.tables.iter().enumerate() {
                    let path = if i == 0 {
                        primary.clone()
                    } else {
                        primary.with_extension(format!("{name}.csv"))
                    };
                    write_atomic(&path, &table.to_csv()).map_err(io(&path))?;
                    written.push(path);
                }
            }
        }
        Ok(written)
    }
}

struct Outcome {
    passed: bool,
    verdicts: Vec<(String, String)>,
    tables: Vec<(String, Table)>,
    meta: Map<String, Value>,
}

fn verdict(name: &str, value: impl Into<String>) -> (String, String) {
    (name.to_string(), value.into())
}

fn kind_of(spec: &ExperimentSpec) -> ModulusKind {
    match spec.modulus.unwrap_or_default() {
        Modulus::Plain => ModulusKind::Plain,
        Modulus::Strong => ModulusKind::Strong,
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(crate::output::fmt_f64(v))
    }
}

pub fn run(spec: &ExperimentSpec) -> Result<RunResult, RunError> {
    let start = Instant::now();
    let out = match spec.kind {
        ExperimentKind::Estimate => run_estimate(spec)?,
        ExperimentKind::OrderScan => run_order_scan(spec)?,
        ExperimentKind::GrowthCheck => run_growth(spec)?,
        ExperimentKind::MrProbe => run_probe(spec)?,
        ExperimentKind::PerturbCheck => run_perturb(spec)?,
        ExperimentKind::ParamCheck => run_param(spec)?,
        ExperimentKind::Solve => run_solve(spec)?,
    };
    Ok(RunResult {
        tool: TOOL,
        version: VERSION,
        spec: spec.clone(),
        passed: out.passed,
        verdicts: out.verdicts,
        tables: out.tables,
        meta: out.meta,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

fn grid_meta(spec: &ExperimentSpec, radius: f64) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("radius".into(), num(radius));
    m.insert("points_per_decade".into(), json!(spec.grid.points_per_decade));
    m.insert("decades".into(), json!(spec.grid.decades));
    m
}

fn run_estimate(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let q = spec.positive("q", spec.q)?;
    let radius = spec.positive("radius", spec.radius)?;
    let grid = spec.grid(radius)?;
    let kind = kind_of(spec);
    let window = spec.search_window()?;
    let est = regularity::estimate_modulus(&r.map, r.base, q, &grid, kind, window).at("estimate")?;
    let (samples, _) = ratio_table(&r.map, r.base, q, &grid, kind, window).at("estimate")?;
    let mut table = Table::new(&["x", "numerator", "denominator", "ratio"]);
    for s in &samples {
        table.push(vec![Cell::Num(s.x), Cell::Num(s.numerator), Cell::Num(s.denominator), Cell::Num(s.ratio)]);
    }
    let within = spec.target.is_none_or(|t| est.modulus <= t);
    let mut meta = grid_meta(spec, radius);
    meta.insert("eta_hat".into(), num(est.modulus));
    meta.insert("witness".into(), est.witness.map_or(Value::Null, num));
    meta.insert("grid_points".into(), json!(est.grid_points));
    meta.insert("excluded_points".into(), json!(est.excluded_points));
    meta.insert("truncation_active".into(), json!(est.truncation_active));
    meta.insert("approximate_preimage".into(), json!(est.approximate_preimage));
    let status = if est.is_violation() {
        "violation"
    } else if !within {
        "above-target"
    } else {
        "finite"
    };
    Ok(Outcome {
        passed: !est.is_violation() && within,
        verdicts: vec![verdict("modulus", status)],
        tables: vec![("estimate".into(), table)],
        meta,
    })
}

fn run_order_scan(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let orders = spec
        .q_list
        .clone()
        .or(spec.q.map(|q| vec![q]))
        .ok_or_else(|| SpecError::Invalid {
            field: "q_list".into(),
            message: "required for kind `order-scan`".into(),
        })?;
    let radii = spec.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec());
    let top = radii.first().copied().unwrap_or(DEFAULT_RADII[0]);
    let grid = spec.grid(top)?;
    let rep = order_scan(&r.map, r.base, &orders, &radii, &grid, kind_of(spec), &ScanThresholds::default())
        .at("order-scan")?;
    let mut table = Table::new(&["q", "radius", "eta_hat", "verdict"]);
    let mut verdicts = Vec::new();
    let mut truncation = false;
    for row in &rep.rows {
        for &(radius, eta) in &row.cells {
            table.push(vec![Cell::Num(row.order), Cell::Num(radius), Cell::Num(eta), Cell::text(row.verdict.as_str())]);
        }
        verdicts.push(verdict(&format!("q={}", row.order), row.verdict.as_str()));
        truncation |= row.truncation_active;
    }
    let mut meta = grid_meta(spec, top);
    meta.insert("critical_lower".into(), rep.critical_lower.map_or(Value::Null, num));
    meta.insert("critical_upper".into(), rep.critical_upper.map_or(Value::Null, num));
    meta.insert("truncation_active".into(), json!(truncation));
    Ok(Outcome {
        passed: rep.rows.iter().all(|r| r.verdict != Verdict::Inconclusive),
        verdicts,
        tables: vec![("order_scan".into(), table)],
        meta,
    })
}

fn run_growth(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let potential = r.entry.as_ref().and_then(|e| e.potential.clone()).ok_or_else(|| SpecError::Invalid {
        field: "map".into(),
        message: format!("`{}` has no potential; growth checks need a catalog subdifferential", r.map.label()),
    })?;
    let q = spec.positive("q", spec.q.or(Some(2.0)))?;
    let eta = spec.positive("eta", spec.eta)?;
    let x_star = spec.target_subgradient.unwrap_or(r.base.1);
    let setup = GrowthSetup::from_subdifferential(potential, &r.map, r.base.0, x_star, q).at("growth-check")?;
    let variant = spec.require("variant", spec.variant)?;
    let mut meta = grid_meta(spec, eta);
    meta.insert("q".into(), num(q));
    match variant {
        GrowthVariant::Lower => {
            let alpha = spec.positive("alpha", spec.alpha)?;
            let rep = growth_check_lower(&setup, alpha, eta, &spec.grid(eta)?).at("growth-check")?;
            let mut table = Table::new(&["variant", "alpha", "eta", "margin", "witness", "samples"]);
            table.push(vec![
                Cell::text("lower"),
                Cell::Num(alpha),
                Cell::Num(eta),
                Cell::Num(rep.margin),
                Cell::opt(rep.witness),
                Cell::Int(rep.samples as i64),
            ]);
            Ok(Outcome {
                passed: rep.passed,
                verdicts: vec![verdict("growth-lower", if rep.passed { "pass" } else { "violation" })],
                tables: vec![("growth".into(), table)],
                meta,
            })
        }
        GrowthVariant::Pairwise => {
            let beta = spec.positive("beta", spec.beta)?;
            let sampler = GraphSampler::new(spec.grid(eta)?);
            let rep = growth_check_pairwise(&setup, &r.map, beta, eta, &sampler).at("growth-check")?;
            let mut table = Table::new(&["role", "u", "x", "x_star", "margin"]);
            for (role, pair) in [("violation", rep.violation), ("worst", rep.worst)] {
                if let Some(p) = pair {
                    table.push(vec![Cell::text(role), Cell::Num(p.u), Cell::Num(p.x), Cell::Num(p.x_star), Cell::Num(p.margin)]);
                }
            }
            meta.insert("beta".into(), num(beta));
            meta.insert("pairs_checked".into(), json!(rep.pairs_checked));
            meta.insert("sampling_radius".into(), num(rep.radius));
            Ok(Outcome {
                passed: rep.passed,
                verdicts: vec![verdict("growth-pairwise", if rep.passed { "pass" } else { "violation" })],
                tables: vec![("growth".into(), table)],
                meta,
            })
        }
    }
}

fn run_probe(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let defaults = ProbeGrid::default();
    let grid = ProbeGrid {
        radii: spec.radii.clone().unwrap_or(defaults.radii),
        points_per_decade: spec.grid.points_per_decade,
        decades: spec.grid.decades,
    };
    let rep = metric_regularity_probe(&r.map, r.base, &grid, &ScanThresholds::default()).at("mr-probe")?;
    let mut table = Table::new(&["radius", "sup_quotient", "witness_x", "witness_y"]);
    for row in &rep.rows {
        table.push(vec![
            Cell::Num(row.radius),
            Cell::Num(row.sup_quotient),
            Cell::opt(row.witness.map(|w| w.0)),
            Cell::opt(row.witness.map(|w| w.1)),
        ]);
    }
    let mut meta = Map::new();
    meta.insert("points_per_decade".into(), json!(grid.points_per_decade));
    meta.insert("decades".into(), json!(grid.decades));
    meta.insert("kappa_hat".into(), rep.kappa_hat.map_or(Value::Null, num));
    Ok(Outcome {
        passed: rep.verdict == Verdict::Bounded,
        verdicts: vec![verdict("metric-regularity", rep.verdict.as_str())],
        tables: vec![("probe".into(), table)],
        meta,
    })
}

fn run_perturb(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let g = spec.perturbation()?;
    let q = spec.positive("q", spec.q)?;
    let radius = spec.positive("radius", spec.radius)?;
    let grid = spec.grid(radius)?;
    let lambda = spec.require("lambda", spec.lambda)?;
    let kappa = match spec.kappa {
        Some(k) => k,
        None => {
            regularity::estimate_strong_subreg_modulus(&r.map, r.base, q, &grid).at("perturb-check")?.modulus * 1.05
        }
    };
    let rep = perturbation_bound_check(&r.map, &g, r.base, PerturbationParams { q, kappa, lambda }, &grid)
        .at("perturb-check")?;
    let mut table = Table::new(&["kappa", "lambda", "base_eta_hat", "lip_hat", "perturbed_eta_hat", "bound", "radius"]);
    table.push(vec![
        Cell::Num(kappa),
        Cell::Num(lambda),
        Cell::Num(rep.base_estimate.modulus),
        Cell::Num(rep.lip_estimate),
        Cell::Num(rep.perturbed_estimate.modulus),
        Cell::Num(rep.bound),
        Cell::Num(rep.perturbation_radius),
    ]);
    let mut meta = grid_meta(spec, radius);
    meta.insert(
        "truncation_active".into(),
        json!(rep.base_estimate.truncation_active || rep.perturbed_estimate.truncation_active),
    );
    Ok(Outcome {
        passed: rep.satisfied,
        verdicts: vec![verdict("perturbation-bound", if rep.satisfied { "pass" } else { "violation" })],
        tables: vec![("perturbation".into(), table)],
        meta,
    })
}

fn run_param(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let r = spec.resolve_map()?;
    let g = spec.perturbation()?;
    let sweep = ParameterSweep {
        q: spec.positive("q", spec.q)?,
        target: spec.positive("target", spec.target)?,
        u_radius: spec.positive("u_radius", spec.u_radius)?,
        u_count: spec.require("u_count", spec.u_count)?,
    };
    let radius = spec.positive("radius", spec.radius)?;
    let rep = parameterized_check(&r.map, &g, r.base, sweep, &spec.grid(radius)?).at("param-check")?;
    let mut table = Table::new(&["u", "eta_hat", "within_target"]);
    for row in &rep.rows {
        table.push(vec![Cell::Num(row.u), Cell::Num(row.estimate.modulus), row.within_target.into()]);
    }
    let mut meta = grid_meta(spec, radius);
    meta.insert("linearization_eta_hat".into(), num(rep.linearization_estimate.modulus));
    meta.insert("violation_u".into(), rep.violation.map_or(Value::Null, num));
    Ok(Outcome {
        passed: rep.all_within(),
        verdicts: vec![verdict("parameterized", if rep.all_within() { "pass" } else { "violation" })],
        tables: vec![("parameterized".into(), table)],
        meta,
    })
}

fn run_solve(spec: &ExperimentSpec) -> Result<Outcome, RunError> {
    let geq = spec.resolve_equation()?;
    let schedule = spec.resolve_schedule()?;
    let x0 = spec.require("x0", spec.x0)?;
    let r = (2.0 * x0.abs()).max(1.0);
    let window: ClosedInterval = spec.window([-r, r])?;
    let mut config = SolverConfig::new(window);
    if let Some(tol) = spec.tol {
        config.tol = tol;
    }
    if let Some(n) = spec.max_iter {
        config.max_iter = n;
    }
    let trace = solve(&geq, x0, &schedule, &config).at("solve")?;
    let q_list = spec.q_list.clone().unwrap_or_else(|| vec![1.0, 2.0]);
    let mut meta = Map::new();
    meta.insert("schedule".into(), json!(schedule.name()));
    meta.insert("window".into(), json!([num(window.lo()), num(window.hi())]));
    let rates = match geq.solution {
        Some(x_bar) => match rate_analysis(&trace, x_bar, geq.g.derivative(x_bar), &q_list) {
            Ok(rep) => Some(rep),
            Err(e) => {
                meta.insert("rate_analysis".into(), json!(e.to_string()));
                None
            }
        },
        None => None,
    };
    let mut table = Table::new(&["k", "x_k", "residual", "B_k", "q_k", "dm_ratio"]);
    for (i, &k) in trace.labels.iter().enumerate() {
        table.push(vec![
            Cell::Int(k as i64),
            Cell::Num(trace.iterates[i]),
            Cell::Num(trace.residuals[i]),
            Cell::opt(trace.operators.get(i).copied()),
            Cell::opt(rates.as_ref().and_then(|r| r.order_at(k))),
            Cell::opt(rates.as_ref().and_then(|r| r.dennis_more_at(k))),
        ]);
    }
    if let Some(rep) = &rates {
        meta.insert("regression_order".into(), num(rep.regression_order));
        meta.insert("exact_hits".into(), json!(rep.exact_hits));
    }
    if let TraceStatus::SubproblemFailure { scan_min, scan_argmin } = trace.status {
        meta.insert("scan_min".into(), num(scan_min));
        meta.insert("scan_argmin".into(), num(scan_argmin));
    }
    meta.insert(
        "exponents".into(),
        json!(trace.exponents.iter().map(|e| e.map(i64::from)).collect::<Vec<_>>()),
    );
    Ok(Outcome {
        passed: trace.status == TraceStatus::Converged,
        verdicts: vec![verdict("status", trace.status.as_str())],
        tables: vec![("trace".into(), table)],
        meta,
    })
}
