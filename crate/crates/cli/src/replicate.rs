//! The replication suite: every worked example and property check, one
//! matrix row per verified claim.
//!
//! Row details are deterministic; elapsed times are kept apart so the
//! rendered matrix is byte-identical across runs.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subreg_core::catalog::{self, QStaircase};
use subreg_core::interval::{ClosedInterval, IntervalUnion};
use subreg_core::maps::SmoothMap;
use subreg_core::regularity::{
    estimate_strong_subreg_modulus, estimate_subreg_modulus, growth_check_lower, growth_check_pairwise,
    metric_regularity_probe, order_scan, parameterized_check, perturbation_bound_check, ratio_table,
    smooth_perturbation_equivalence, staircase_sequences, GraphSampler, GrowthSetup, ModulusKind, ParameterSweep,
    PerturbationParams, ProbeGrid, ScanThresholds, Verdict,
};
use subreg_core::solver::{
    lookup_equation, rate_analysis, rate_analysis_tail, solve, OperatorSchedule, SolverConfig, TraceStatus,
};
use subreg_core::GridSpec;

use crate::output::{fmt_f64, Cell, Table};

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

/// Random interval cases drawn by the property criterion.
pub const INTERVAL_CASES: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub criterion: u8,
    pub passed: bool,
    pub detail: String,
}

impl Row {
    fn new(criterion: u8, id: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            id: id.to_string(),
            criterion,
            passed,
            detail: detail.into(),
        }
    }

    fn error(criterion: u8, id: &str, err: impl std::fmt::Display) -> Self {
        Self::new(criterion, id, false, format!("error: {err}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    pub seed: u64,
    /// Staircase used by the `Q-map`/`S-map` rows; altered only by the
    /// tampering control.
    pub stairs: QStaircase,
    pub interval_cases: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            stairs: QStaircase::default(),
            interval_cases: INTERVAL_CASES,
        }
    }
}

/// `(criterion, name, budget)`.
pub const CRITERIA: [(u8, &str, u64); 9] = [
    (1, "Ex3.2", 1),
    (2, "Ex3.3", 2),
    (3, "Ex3.5", 1),
    (4, "Ex3.6", 1),
    (5, "Thm4.1", 1),
    (6, "Thm4.4", 2),
    (7, "Ex5.2", 1),
    (8, "Solver", 1),
    (9, "Prop", 30),
];

#[derive(Debug, Clone)]
pub struct Matrix {
    pub rows: Vec<Row>,
    /// Wall clock per criterion, parallel to the runtime rows.
    pub elapsed: Vec<(u8, Duration)>,
}

impl Matrix {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["id", "criterion", "passed", "detail"]);
        for r in &self.rows {
            t.push(vec![Cell::text(&r.id), Cell::Int(r.criterion as i64), r.passed.into(), Cell::text(&r.detail)]);
        }
        t
    }

    /// One line per row, with elapsed time appended to runtime rows.
    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
        let mut s = String::new();
        for r in &self.rows {
            let status = if r.passed { "PASS" } else { "FAIL" };
            let elapsed = r
                .id
                .ends_with("-runtime")
                .then(|| self.elapsed.iter().find(|e| e.0 == r.criterion))
                .flatten()
                .map(|e| format!(" ({:.3} s)", e.1.as_secs_f64()))
                .unwrap_or_default();
            s.push_str(&format!("{status}  {:width$}  {}{elapsed}\n", r.id, r.detail));
        }
        s
    }
}

fn e(v: f64) -> String {
    fmt_f64(v)
}

fn timed(criterion: u8, opts: &Options) -> (Vec<Row>, Duration) {
    let start = Instant::now();
    let rows = run_criterion(criterion, opts);
    (rows, start.elapsed())
}

fn runtime_row(criterion: u8, elapsed: Duration) -> Row {
    let (_, name, budget) = CRITERIA[criterion as usize - 1];
    Row::new(
        criterion,
        &format!("{name}-runtime"),
        elapsed < Duration::from_secs(budget),
        format!("budget {budget} s"),
    )
}

/// Rows of one criterion, without its runtime row.
pub fn run_criterion(criterion: u8, opts: &Options) -> Vec<Row> {
    match criterion {
        1 => example_3_2(),
        2 => example_3_3(opts.stairs),
        3 => example_3_5(),
        4 => example_3_6(),
        5 => perturbation_bound(),
        6 => parameterized(),
        7 => example_5_2(),
        8 => solver_sanity(),
        9 => properties(opts),
        _ => vec![Row::new(criterion, "unknown-criterion", false, "no such criterion")],
    }
}

/// Criterion rows followed by its runtime row.
pub fn criterion_with_runtime(criterion: u8, opts: &Options) -> (Vec<Row>, Duration) {
    let (mut rows, elapsed) = timed(criterion, opts);
    rows.push(runtime_row(criterion, elapsed));
    (rows, elapsed)
}

pub fn replicate_all(opts: &Options) -> Matrix {
    let mut rows = Vec::new();
    let mut elapsed = Vec::new();
    for (c, _, _) in CRITERIA {
        let (r, t) = criterion_with_runtime(c, opts);
        rows.extend(r);
        elapsed.push((c, t));
    }
    Matrix { rows, elapsed }
}

// ---- sqrt-abs: modulus and order scan ----

fn example_3_2() -> Vec<Row> {
    let map = catalog::sqrt_abs();
    let mut rows = Vec::new();
    let fine = GridSpec::new(1.0, 1000, 6).expect("valid grid");
    rows.push(match estimate_strong_subreg_modulus(&map, (0.0, 0.0), 2.0, &fine) {
        Ok(est) => Row::new(
            1,
            "Ex3.2-strong-modulus",
            fine.len() >= 10_000 && (est.modulus - 1.0).abs() <= 1e-9,
            format!("eta_hat={} grid_points={}", e(est.modulus), est.grid_points),
        ),
        Err(err) => Row::error(1, "Ex3.2-strong-modulus", err),
    });

    let radii = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let grid = GridSpec::new(1.0, 100, 6).expect("valid grid");
    match order_scan(&map, (0.0, 0.0), &[1.0, 2.0, 2.5], &radii, &grid, ModulusKind::Strong, &ScanThresholds::default()) {
        Ok(rep) => {
            let v = |q| rep.verdict_for(q);
            let ok = v(1.0) == Some(Verdict::Bounded)
                && v(2.0) == Some(Verdict::Bounded)
                && v(2.5) == Some(Verdict::BlowUp);
            let detail = rep
                .rows
                .iter()
                .map(|r| format!("q={}:{}", r.order, r.verdict.as_str()))
                .collect::<Vec<_>>()
                .join(" ");
            rows.push(Row::new(1, "Ex3.2-order-verdicts", ok, detail));
            let last = rep.rows.iter().find(|r| r.order == 2.5).expect("scanned order");
            rows.push(Row::new(
                1,
                "Ex3.2-decade-growth",
                last.min_decade_growth >= 10.0,
                format!(
                    "q=2.5 min_decade_growth={} total_growth={} required>=10 per decade",
                    e(last.min_decade_growth),
                    e(last.total_growth)
                ),
            ));
        }
        Err(err) => {
            rows.push(Row::error(1, "Ex3.2-order-verdicts", &err));
            rows.push(Row::error(1, "Ex3.2-decade-growth", err));
        }
    }
    rows
}

// ---- the staircase maps ----

fn example_3_3(stairs: QStaircase) -> Vec<Row> {
    let mut rows = Vec::new();
    let s = catalog::s_map_with(stairs);
    let grid = GridSpec::new(0.25, 200, 6).expect("valid grid");
    rows.push(match estimate_strong_subreg_modulus(&s, (0.0, 0.0), 2.0, &grid) {
        Ok(est) => Row::new(
            2,
            "Ex3.3-strong-2-subreg",
            est.modulus <= 1.0 + 1e-9,
            format!("eta_hat={} truncation_active={}", e(est.modulus), est.truncation_active),
        ),
        Err(err) => Row::error(2, "Ex3.3-strong-2-subreg", err),
    });

    // the quotients along the sequences, plus a grid probe that must not
    // certify metric regularity
    let q = catalog::q_map_with(stairs);
    let seq = staircase_sequences(stairs, 3..=10);
    let probe = metric_regularity_probe(&q, (0.0, 0.0), &ProbeGrid::default(), &ScanThresholds::default());
    rows.push(match (seq, probe) {
        (Ok(terms), Ok(probe)) => {
            let ok = terms.iter().all(|t| t.quotient >= t.k as f64) && probe.verdict != Verdict::Bounded;
            let quotients = terms.iter().map(|t| format!("{}:{}", t.k, e(t.quotient))).collect::<Vec<_>>().join(" ");
            Row::new(2, "Ex3.3-mr-sequences", ok, format!("{quotients} probe={}", probe.verdict.as_str()))
        }
        (Err(err), _) | (_, Err(err)) => Row::error(2, "Ex3.3-mr-sequences", err),
    });
    rows
}

// ---- the plateau subdifferential ----

fn example_3_5() -> Vec<Row> {
    let mut rows = Vec::new();
    let entry = catalog::lookup("subdiff-plateau").expect("catalog id");
    let potential = entry.potential.clone().expect("subdifferential entry");
    let grid = GridSpec::new(1.0, 20, 6).expect("valid grid");
    match GrowthSetup::from_subdifferential(potential, &entry.map, 0.0, 0.0, 2.0) {
        Ok(setup) => {
            rows.push(match growth_check_lower(&setup, 1.0, 0.5, &grid) {
                Ok(rep) => Row::new(
                    3,
                    "Ex3.5-growth-lower",
                    rep.passed && rep.margin >= 0.0,
                    format!("margin={} samples={}", e(rep.margin), rep.samples),
                ),
                Err(err) => Row::error(3, "Ex3.5-growth-lower", err),
            });
            rows.push(match growth_check_pairwise(&setup, &entry.map, 0.5, 0.5, &GraphSampler::new(grid)) {
                Ok(rep) => Row::new(
                    3,
                    "Ex3.5-growth-pairwise",
                    rep.passed,
                    format!("margin={} pairs={}", e(rep.margin), rep.pairs_checked),
                ),
                Err(err) => Row::error(3, "Ex3.5-growth-pairwise", err),
            });
        }
        Err(err) => {
            rows.push(Row::error(3, "Ex3.5-growth-lower", &err));
            rows.push(Row::error(3, "Ex3.5-growth-pairwise", err));
        }
    }
    let pairs: Vec<(f64, f64)> = (2..=25).map(|k| (1.0 / k as f64, 0.5 / k as f64)).collect();
    rows.push(match subreg_core::regularity::probe::sequence_quotients(&entry.map, &pairs) {
        Ok(qs) => {
            let last = *qs.last().expect("nonempty");
            let increasing = qs.windows(2).all(|w| w[1] > w[0]);
            Row::new(
                3,
                "Ex3.5-mr-sequence",
                increasing && last >= 10.0,
                format!("quotient_k25={} increasing={increasing}", e(last)),
            )
        }
        Err(err) => Row::error(3, "Ex3.5-mr-sequence", err),
    });
    rows
}

// ---- the square-root subdifferential ----

fn example_3_6() -> Vec<Row> {
    let mut rows = Vec::new();
    let entry = catalog::lookup("subdiff-sqrt").expect("catalog id");
    let mut ok = true;
    let mut parts = Vec::new();
    for q in [1.0f64, 2.0, 4.0] {
        let gamma = (-2.0 * q / (q + 2.0)).exp2();
        let grid = GridSpec::new(gamma, 200, 6).expect("valid grid");
        match estimate_strong_subreg_modulus(&entry.map, (0.0, 0.0), q, &grid) {
            Ok(est) => {
                ok &= est.modulus <= 1.0 + 1e-9;
                parts.push(format!("q={q}:{}", e(est.modulus)));
            }
            Err(err) => {
                ok = false;
                parts.push(format!("q={q}:error {err}"));
            }
        }
    }
    rows.push(Row::new(4, "Ex3.6-strong-modulus", ok, parts.join(" ")));

    let potential = entry.potential.clone().expect("subdifferential entry");
    let sampler = GraphSampler::new(GridSpec::new(1.0, 20, 6).expect("valid grid"));
    rows.push(match GrowthSetup::from_subdifferential(potential, &entry.map, 0.0, 0.0, 2.0) {
        Ok(setup) => {
            let mut violations = 0;
            let mut cases = 0;
            let mut failure = None;
            for beta in [0.1, 1.0, 10.0] {
                for eta in [0.1, 1.0, 10.0] {
                    cases += 1;
                    match growth_check_pairwise(&setup, &entry.map, beta, eta, &sampler) {
                        Ok(rep) if !rep.passed && rep.violation.is_some() => violations += 1,
                        Ok(_) => {}
                        Err(err) => failure = Some(err.to_string()),
                    }
                }
            }
            match failure {
                Some(err) => Row::new(4, "Ex3.6-pairwise-violation", false, format!("error: {err}")),
                None => Row::new(
                    4,
                    "Ex3.6-pairwise-violation",
                    violations == cases,
                    format!("violations={violations}/{cases}"),
                ),
            }
        }
        Err(err) => Row::error(4, "Ex3.6-pairwise-violation", err),
    });
    rows
}

// ---- perturbation bound and radius ----

fn perturbation_bound() -> Vec<Row> {
    let map = catalog::sqrt_abs();
    let grid = GridSpec::new(1.0, 200, 6).expect("valid grid");
    let base = match estimate_strong_subreg_modulus(&map, (0.0, 0.0), 2.0, &grid) {
        Ok(est) => est,
        Err(err) => return vec![Row::error(5, "Thm4.1-bound", &err), Row::error(5, "Cor4.3-radius", err)],
    };
    let kappa = base.modulus * 1.05;
    let mut bound_ok = true;
    let mut radius_ok = true;
    let mut bound_parts = Vec::new();
    let mut radius_parts = Vec::new();
    for lambda in [0.1, 0.3] {
        let params = PerturbationParams { q: 2.0, kappa, lambda };
        match perturbation_bound_check(&map, &SmoothMap::linear(lambda), (0.0, 0.0), params, &grid) {
            Ok(rep) => {
                bound_ok &= rep.satisfied;
                let expected = kappa.powf(-0.5);
                radius_ok &= (rep.perturbation_radius - expected).abs() <= 1e-12;
                bound_parts.push(format!(
                    "lambda={lambda}:eta_hat={} bound={}",
                    e(rep.perturbed_estimate.modulus),
                    e(rep.bound)
                ));
                radius_parts.push(format!("lambda={lambda}:radius={}", e(rep.perturbation_radius)));
            }
            Err(err) => {
                bound_ok = false;
                radius_ok = false;
                bound_parts.push(format!("lambda={lambda}:error {err}"));
            }
        }
    }
    vec![
        Row::new(5, "Thm4.1-bound", bound_ok, format!("kappa_hat={} {}", e(kappa), bound_parts.join(" "))),
        Row::new(
            5,
            "Cor4.3-radius",
            radius_ok,
            format!("expected={} {}", e(kappa.powf(-0.5)), radius_parts.join(" ")),
        ),
    ]
}

// ---- parameterized subregularity ----

fn parameterized() -> Vec<Row> {
    let map = catalog::sqrt_abs();
    let g = SmoothMap::polynomial(vec![0.0, 0.0, 1.0]);
    let sweep = ParameterSweep {
        q: 2.0,
        target: 1.3,
        u_radius: 0.1,
        u_count: 21,
    };
    let grid = GridSpec::new(0.1, 100, 6).expect("valid grid");
    let param = match parameterized_check(&map, &g, (0.0, 0.0), sweep, &grid) {
        Ok(rep) => {
            let worst = rep.rows.iter().map(|r| r.estimate.modulus).fold(f64::NEG_INFINITY, f64::max);
            Row::new(
                6,
                "Thm4.4-parameterized",
                rep.rows.len() == 21 && rep.all_within(),
                format!("u_count={} worst_eta_hat={}", rep.rows.len(), e(worst)),
            )
        }
        Err(err) => Row::error(6, "Thm4.4-parameterized", err),
    };
    let eq_grid = GridSpec::new(1e-3, 100, 6).expect("valid grid");
    let equiv = match smooth_perturbation_equivalence(&map, &g, (0.0, 0.0), 2.0, &eq_grid) {
        Ok(rep) => Row::new(
            6,
            "Cor4.2-equivalence",
            rep.agrees(0.10),
            format!(
                "sum={}:{} linearization={}:{} relative_gap={}",
                rep.sum_verdict.as_str(),
                e(rep.sum_estimate.modulus),
                rep.linearization_verdict.as_str(),
                e(rep.linearization_estimate.modulus),
                e(rep.relative_gap)
            ),
        ),
        Err(err) => Row::error(6, "Cor4.2-equivalence", err),
    };
    vec![param, equiv]
}

// ---- the explicit operator schedule ----

fn example_5_2() -> Vec<Row> {
    let ids = ["Ex5.2-iterates", "Ex5.2-step-residuals", "Ex5.2-orders", "Ex5.2-dennis-more", "Thm5.1-implication"];
    let fail_all = |err: &dyn std::fmt::Display| ids.iter().map(|id| Row::error(7, id, err)).collect::<Vec<_>>();
    let eq = lookup_equation("example-5-2").expect("catalog equation");
    let window = ClosedInterval::new(-1.0, 1.0).expect("valid window");
    let trace = match solve(&eq, 0.5, &OperatorSchedule::example_5_2(), &SolverConfig::new(window)) {
        Ok(t) => t,
        Err(err) => return fail_all(&err),
    };
    let mut rows = Vec::new();

    let factorial = |k: u32| (1..=k as i32).product::<i32>();
    let expected: Vec<f64> = (1..=5).map(|k| (-(factorial(k) as f64)).exp2()).collect();
    let exps_ok = (1..=5u32).all(|k| trace.exponents.get(k as usize - 1) == Some(&Some(-factorial(k))));
    let rel_ok = trace.iterates.len() == 5
        && trace.labels == vec![1, 2, 3, 4, 5]
        && trace.iterates.iter().zip(&expected).all(|(x, t)| ((x - t) / t).abs() <= 1e-10);
    let exps = trace
        .exponents
        .iter()
        .map(|e| e.map_or("-".to_string(), |v| v.to_string()))
        .collect::<Vec<_>>()
        .join(",");
    rows.push(Row::new(7, ids[0], rel_ok && exps_ok, format!("log2_x=[{exps}] status={}", trace.status.as_str())));

    let worst = trace.step_residuals.iter().copied().fold(0.0, f64::max);
    rows.push(Row::new(
        7,
        ids[1],
        trace.step_residuals.len() == 4 && worst <= 1e-12,
        format!("max_step_residual={}", e(worst)),
    ));

    let rates = match rate_analysis(&trace, 0.0, eq.g.derivative(0.0), &[2.0]) {
        Ok(r) => r,
        Err(err) => {
            rows.extend(ids[2..].iter().map(|id| Row::error(7, id, &err)));
            return rows;
        }
    };
    let orders_ok = [(2, 3.0), (3, 4.0), (4, 5.0)]
        .iter()
        .all(|&(k, q)| rates.order_at(k).is_some_and(|v| (v - q).abs() <= 1e-9));
    let orders = rates.pointwise_orders.iter().map(|(k, q)| format!("q{k}={}", e(*q))).collect::<Vec<_>>().join(" ");
    rows.push(Row::new(7, ids[2], orders_ok, orders));

    let dm = &rates.dennis_more_ratios;
    let equals_b = dm.len() == trace.operators.len()
        && dm.iter().zip(&trace.operators).all(|(d, b)| (d.1 - b.abs()).abs() <= 1e-12 * b.abs().max(1.0));
    let at = |k| rates.dennis_more_at(k).unwrap_or(f64::NAN);
    let decreasing = dm.windows(2).all(|w| w[1].1 < w[0].1);
    let dm_ok = equals_b && at(1) == 3.0 && (at(2) - 0.8).abs() <= 1e-12 && at(3) <= 0.04 && decreasing;
    let dm_detail = dm.iter().map(|(k, v)| format!("B{k}={}", e(*v))).collect::<Vec<_>>().join(" ");
    rows.push(Row::new(7, ids[3], dm_ok, dm_detail));

    // hypothesis: the operator gap vanishes along the steps; conclusion:
    // e_{k+1}/e_k^2 vanishes
    let sup = rates.super_ratios(2.0).unwrap_or(&[]);
    let sup_decreasing = sup.windows(2).all(|w| w[1].1 < w[0].1);
    let sup_last = sup.last().map_or(f64::NAN, |s| s.1);
    let dm_last = dm.last().map_or(f64::NAN, |d| d.1);
    rows.push(Row::new(
        7,
        ids[4],
        decreasing && dm_last <= 0.04 && sup_decreasing && sup_last < 1e-20,
        format!("dm_last={} super2_last={}", e(dm_last), e(sup_last)),
    ));
    rows
}

// ---- solver sanity ----

fn solver_sanity() -> Vec<Row> {
    let eq = lookup_equation("newton-quadratic").expect("catalog equation");
    let cfg = SolverConfig::new(ClosedInterval::new(-4.0, 4.0).expect("valid window"));
    let mut rows = Vec::new();
    match solve(&eq, 2.0, &OperatorSchedule::Newton, &cfg) {
        Ok(t) => {
            let worst = t
                .iterates
                .windows(2)
                .map(|w| {
                    let oracle = w[0] - (w[0] * w[0] - 1.0) / (2.0 * w[0]);
                    ((w[1] - oracle) / oracle).abs()
                })
                .fold(0.0, f64::max);
            rows.push(Row::new(
                8,
                "Newton-closed-form",
                t.status == TraceStatus::Converged && worst <= 1e-12,
                format!("steps={} max_rel_dev={}", t.steps(), e(worst)),
            ));
            rows.push(match rate_analysis_tail(&t, 1.0, 2.0, &[], 5) {
                Ok(r) => Row::new(
                    8,
                    "Newton-order",
                    (1.8..=2.2).contains(&r.regression_order),
                    format!("order={}", e(r.regression_order)),
                ),
                Err(err) => Row::error(8, "Newton-order", err),
            });
        }
        Err(err) => {
            rows.push(Row::error(8, "Newton-closed-form", &err));
            rows.push(Row::error(8, "Newton-order", err));
        }
    }
    rows.push(
        match solve(&eq, 2.0, &OperatorSchedule::Chord { b0: 4.0 }, &cfg)
            .and_then(|t| rate_analysis_tail(&t, 1.0, 2.0, &[], 5))
        {
            Ok(r) => Row::new(
                8,
                "Chord-order",
                (0.9..=1.1).contains(&r.regression_order),
                format!("order={}", e(r.regression_order)),
            ),
            Err(err) => Row::error(8, "Chord-order", err),
        },
    );
    rows
}

// ---- property suites ----

fn random_union(rng: &mut ChaCha8Rng) -> (Vec<ClosedInterval>, IntervalUnion) {
    let n = rng.gen_range(0..8);
    let raw: Vec<ClosedInterval> = (0..n)
        .map(|_| {
            let a: f64 = rng.gen_range(-50.0..50.0);
            let hi = match rng.gen_range(0..10) {
                0 => a,
                1 => f64::INFINITY,
                _ => a + rng.gen_range(0.0..20.0),
            };
            let lo = if rng.gen_range(0..20) == 0 { f64::NEG_INFINITY } else { a };
            ClosedInterval::new(lo, hi).expect("ordered endpoints")
        })
        .collect();
    let u = IntervalUnion::normalize(raw.clone());
    (raw, u)
}

/// Returns the number of failing cases and the first failure.
fn interval_algebra(seed: u64, cases: usize) -> (usize, Option<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut first = None;
    for case in 0..cases {
        let (raw, u) = random_union(&mut rng);
        let p: f64 = rng.gen_range(-80.0..80.0);
        let p2: f64 = rng.gen_range(-80.0..80.0);
        let oracle_contains = raw.iter().any(|i| i.contains(p));
        let oracle_dist = raw.iter().map(|i| i.distance(p)).fold(f64::INFINITY, f64::min);
        let canonical = u.parts().windows(2).all(|w| w[0].hi() < w[1].lo());
        let (d1, d2) = (u.distance(p), u.distance(p2));
        let lipschitz = u.is_empty() || (d1 - d2).abs() <= (p - p2).abs() + 1e-12 * (1.0 + p.abs() + p2.abs());
        let ok = canonical && u.contains(p) == oracle_contains && d1 == oracle_dist && lipschitz;
        if !ok {
            failures += 1;
            first.get_or_insert_with(|| format!("case {case}: p={p} union={u}"));
        }
    }
    (failures, first)
}

fn estimator_invariants(seed: u64) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0e57);
    let mut checked = 0;
    for entry in catalog::catalog() {
        for _ in 0..4 {
            let q: f64 = rng.gen_range(0.25..3.0);
            let dq: f64 = rng.gen_range(0.0..2.0);
            let radius: f64 = rng.gen_range(0.01..0.9);
            let grid = GridSpec::new(radius, 10, 4).map_err(|e| e.to_string())?;
            for kind in [ModulusKind::Plain, ModulusKind::Strong] {
                let (lo, _) = ratio_table(&entry.map, entry.base_point, q, &grid, kind, None).map_err(|e| e.to_string())?;
                let (hi, _) =
                    ratio_table(&entry.map, entry.base_point, q + dq, &grid, kind, None).map_err(|e| e.to_string())?;
                for (a, b) in lo.iter().zip(&hi) {
                    if a.denominator <= 1.0 && a.ratio > b.ratio * (1.0 + 1e-12) {
                        return Err(format!("{} order monotonicity at x={} q={q}", entry.id, a.x));
                    }
                }
            }
            let plain = estimate_subreg_modulus(&entry.map, entry.base_point, q, &grid).map_err(|e| e.to_string())?;
            let strong =
                estimate_strong_subreg_modulus(&entry.map, entry.base_point, q, &grid).map_err(|e| e.to_string())?;
            if strong.modulus < plain.modulus {
                return Err(format!("{} strong below plain at q={q}", entry.id));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// CSV of criteria 1-8 without runtime rows.
pub fn determinism_fingerprint(opts: &Options) -> Vec<u8> {
    let rows: Vec<Row> = (1..=8).flat_map(|c| run_criterion(c, opts)).collect();
    Matrix { rows, elapsed: Vec::new() }.table().to_csv()
}

fn properties(opts: &Options) -> Vec<Row> {
    let (failures, first) = interval_algebra(opts.seed, opts.interval_cases);
    let mut rows = vec![Row::new(
        9,
        "Prop-interval-algebra",
        failures == 0 && opts.interval_cases >= INTERVAL_CASES,
        match first {
            Some(f) => format!("cases={} failures={failures} first={f}", opts.interval_cases),
            None => format!("cases={} failures=0 seed={}", opts.interval_cases, opts.seed),
        },
    )];
    rows.push(match estimator_invariants(opts.seed) {
        Ok(n) => Row::new(9, "Prop-estimator-invariants", true, format!("maps={} draws={n}", catalog::CATALOG_IDS.len())),
        Err(err) => Row::new(9, "Prop-estimator-invariants", false, err),
    });
    let a = determinism_fingerprint(opts);
    let b = determinism_fingerprint(opts);
    rows.push(Row::new(
        9,
        "Prop-replicate-determinism",
        a == b,
        format!("bytes={} identical={}", a.len(), a == b),
    ));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_algebra_small_run_is_clean() {
        assert_eq!(interval_algebra(7, 2000).0, 0);
    }

    #[test]
    fn runtime_rows_use_budget() {
        assert!(runtime_row(1, Duration::from_millis(10)).passed);
        assert!(!runtime_row(1, Duration::from_secs(2)).passed);
        assert_eq!(runtime_row(9, Duration::ZERO).id, "Prop-runtime");
    }
}
