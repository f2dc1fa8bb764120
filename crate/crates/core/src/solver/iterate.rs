//! The quasi-Newton iteration `0 ∈ g(x_k) + B_k(x_{k+1} − x_k) + F(x_{k+1})`.

use crate::dyadic::exact_log2;
use crate::error::{Error, Result};
use crate::interval::ClosedInterval;

use super::equation::GeneralizedEquation;
use super::schedule::OperatorSchedule;
use super::subproblem::{subproblem_solve, SubproblemConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iter: usize,
    /// Stop once `d(0; g(x_k) + F(x_k))` is at most this.
    pub tol: f64,
    /// Search window of every step.
    pub window: ClosedInterval,
    pub subproblem: SubproblemConfig,
}

impl SolverConfig {
    pub fn new(window: ClosedInterval) -> Self {
        Self {
            max_iter: 100,
            tol: 1e-12,
            window,
            subproblem: SubproblemConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceStatus {
    Converged,
    MaxIter,
    SubproblemFailure { scan_min: f64, scan_argmin: f64 },
}

impl TraceStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max_iter",
            Self::SubproblemFailure { .. } => "subproblem_failure",
        }
    }
}

/// Iterates `x_k` with their residuals, plus one operator and step residual
/// per completed step (`operators[i]` produced `iterates[i + 1]`).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub labels: Vec<u32>,
    pub iterates: Vec<f64>,
    /// `e` with `|x_k| = 2^e` when `x_k` is a power of two.
    pub exponents: Vec<Option<i32>>,
    pub residuals: Vec<f64>,
    pub operators: Vec<f64>,
    pub step_residuals: Vec<f64>,
    pub status: TraceStatus,
}

impl IterationTrace {
    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trace holds x0")
    }

    pub fn steps(&self) -> usize {
        self.operators.len()
    }
}

pub fn solve(
    geq: &GeneralizedEquation,
    x0: f64,
    schedule: &OperatorSchedule,
    config: &SolverConfig,
) -> Result<IterationTrace> {
    if !geq.map.in_domain(x0) || !x0.is_finite() {
        return Err(Error::Domain {
            label: geq.map.label().to_string(),
            x: x0,
        });
    }
    let start = schedule.start_index();
    let mut trace = IterationTrace {
        labels: vec![start],
        iterates: vec![x0],
        exponents: vec![exact_log2(x0)],
        residuals: vec![geq.residual(x0)],
        operators: Vec::new(),
        step_residuals: Vec::new(),
        status: TraceStatus::MaxIter,
    };
    let mut broyden = match schedule {
        OperatorSchedule::Broyden { b0 } => *b0,
        _ => f64::NAN,
    };
    let mut x = x0;
    for i in 0..config.max_iter {
        if trace.residuals[i] <= config.tol {
            trace.status = TraceStatus::Converged;
            return Ok(trace);
        }
        let k = start + i as u32;
        let b = match schedule {
            OperatorSchedule::Newton => geq.g.derivative(x),
            OperatorSchedule::Chord { b0 } => *b0,
            OperatorSchedule::Broyden { .. } => broyden,
            OperatorSchedule::Explicit { oracle, .. } => oracle(k),
        };
        let sol = match subproblem_solve(geq, x, b, &config.window, &config.subproblem) {
            Ok(s) => s,
            Err(Error::SubproblemFailure { scan_min, scan_argmin, .. }) => {
                trace.status = TraceStatus::SubproblemFailure { scan_min, scan_argmin };
                return Ok(trace);
            }
            Err(e) => return Err(e),
        };
        let next = sol.x;
        if matches!(schedule, OperatorSchedule::Broyden { .. }) && next != x {
            broyden = (geq.g.value(next) - geq.g.value(x)) / (next - x);
        }
        trace.operators.push(b);
        trace.step_residuals.push(sol.residual);
        trace.labels.push(k + 1);
        trace.iterates.push(next);
        trace.exponents.push(exact_log2(next));
        trace.residuals.push(geq.residual(next));
        x = next;
    }
    if trace.residuals.last().is_some_and(|&r| r <= config.tol) {
        trace.status = TraceStatus::Converged;
    }
    Ok(trace)
}
