//! Empirical convergence orders from an iteration trace.
//!
//! With `e_k = |x_k − x̄|`, the pointwise order is `q_k = log e_{k+1} / log e_k`,
//! the regression order is the least-squares slope of `log e_{k+1}` against
//! `log e_k`, and `e_{k+1} / e_k^q → 0` witnesses convergence of order `q`.
//! Logs are base two and exact for powers of two.

use crate::dyadic::log2_abs;
use crate::error::{Error, Result};

use super::iterate::IterationTrace;

/// Default number of trailing usable iterates.
pub const DEFAULT_TAIL: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// Labels of the analysed iterates, all with `0 < e_k < 1`.
    pub tail_labels: Vec<u32>,
    pub errors: Vec<f64>,
    /// Labels whose iterate equals `x̄` exactly; left out of every ratio.
    pub exact_hits: Vec<u32>,
    /// `(k, q_k)` for consecutive labels in the tail.
    pub pointwise_orders: Vec<(u32, f64)>,
    pub regression_order: f64,
    /// Per requested `q`: `(k, e_{k+1} / e_k^q)`.
    pub super_q_ratios: Vec<(f64, Vec<(u32, f64)>)>,
    /// `(k, |(B_k − g'(x̄)) s_k| / |s_k|)` over every nonzero step.
    pub dennis_more_ratios: Vec<(u32, f64)>,
}

impl RateReport {
    pub fn order_at(&self, k: u32) -> Option<f64> {
        self.pointwise_orders.iter().find(|p| p.0 == k).map(|p| p.1)
    }

    pub fn dennis_more_at(&self, k: u32) -> Option<f64> {
        self.dennis_more_ratios.iter().find(|p| p.0 == k).map(|p| p.1)
    }

    pub fn super_ratios(&self, q: f64) -> Option<&[(u32, f64)]> {
        self.super_q_ratios.iter().find(|r| r.0 == q).map(|r| r.1.as_slice())
    }
}

/// Analysis over all usable iterates.
pub fn rate_analysis(trace: &IterationTrace, x_bar: f64, grad_at_solution: f64, q_list: &[f64]) -> Result<RateReport> {
    rate_analysis_tail(trace, x_bar, grad_at_solution, q_list, usize::MAX)
}

/// Analysis over the last `tail` usable iterates.
pub fn rate_analysis_tail(
    trace: &IterationTrace,
    x_bar: f64,
    grad_at_solution: f64,
    q_list: &[f64],
    tail: usize,
) -> Result<RateReport> {
    let mut usable: Vec<(u32, f64)> = Vec::new();
    let mut exact_hits = Vec::new();
    for (&k, &x) in trace.labels.iter().zip(&trace.iterates) {
        let e = (x - x_bar).abs();
        if e == 0.0 {
            exact_hits.push(k);
        } else if e < 1.0 {
            usable.push((k, e));
        }
    }
    let skip = usable.len().saturating_sub(tail);
    let usable = &usable[skip..];
    if usable.len() < 3 {
        return Err(Error::Analysis(format!(
            "need at least 3 iterates with 0 < e_k < 1, found {}",
            usable.len()
        )));
    }
    let pairs: Vec<(u32, f64, f64)> = usable
        .windows(2)
        .filter(|w| w[1].0 == w[0].0 + 1)
        .map(|w| (w[0].0, log2_abs(w[0].1), log2_abs(w[1].1)))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::Analysis("need at least two consecutive error pairs".into()));
    }
    let pointwise_orders = pairs.iter().map(|&(k, a, b)| (k, b / a)).collect();
    let regression_order = slope(&pairs)?;
    let super_q_ratios = q_list
        .iter()
        .map(|&q| (q, pairs.iter().map(|&(k, a, b)| (k, (b - q * a).exp2())).collect()))
        .collect();
    let dennis_more_ratios = trace
        .operators
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| {
            let s = trace.iterates[i + 1] - trace.iterates[i];
            (s != 0.0).then(|| (trace.labels[i], ((b - grad_at_solution) * s).abs() / s.abs()))
        })
        .collect();
    Ok(RateReport {
        tail_labels: usable.iter().map(|u| u.0).collect(),
        errors: usable.iter().map(|u| u.1).collect(),
        exact_hits,
        pointwise_orders,
        regression_order,
        super_q_ratios,
        dennis_more_ratios,
    })
}

fn slope(pairs: &[(u32, f64, f64)]) -> Result<f64> {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.2).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Analysis("errors do not vary; regression order undefined".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::iterate::TraceStatus;

    fn trace_from_errors(es: &[f64]) -> IterationTrace {
        let n = es.len();
        IterationTrace {
            labels: (1..=n as u32).collect(),
            iterates: es.to_vec(),
            exponents: vec![None; n],
            residuals: vec![0.0; n],
            operators: vec![1.0; n - 1],
            step_residuals: vec![0.0; n - 1],
            status: TraceStatus::Converged,
        }
    }

    #[test]
    fn factorial_exponents_give_integer_orders() {
        let es: Vec<f64> = [1, 2, 6, 24, 120].iter().map(|&m: &i32| 2f64.powi(-m)).collect();
        let r = rate_analysis(&trace_from_errors(&es), 0.0, 0.0, &[2.0]).unwrap();
        assert_eq!(r.order_at(2), Some(3.0));
        assert_eq!(r.order_at(3), Some(4.0));
        assert_eq!(r.order_at(4), Some(5.0));
        let sup = r.super_ratios(2.0).unwrap();
        assert_eq!(sup[0].1, 1.0);
        assert!(sup.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn doubling_and_linear_sequences() {
        let es: Vec<f64> = (1..=6).map(|k| 2f64.powi(-(1 << k))).collect();
        let r = rate_analysis(&trace_from_errors(&es), 0.0, 0.0, &[]).unwrap();
        assert!(r.pointwise_orders.iter().all(|p| p.1 == 2.0));
        assert_eq!(r.regression_order, 2.0);

        let es: Vec<f64> = (1..=30).map(|k| 2f64.powi(-k)).collect();
        let r = rate_analysis(&trace_from_errors(&es), 0.0, 0.0, &[1.0]).unwrap();
        let last = r.pointwise_orders.last().unwrap().1;
        assert!((last - 1.0).abs() < 0.05);
        assert!(r.super_ratios(1.0).unwrap().iter().all(|p| p.1 == 0.5));
        assert_eq!(r.regression_order, 1.0);
    }

    #[test]
    fn exact_hits_are_dropped() {
        let r = rate_analysis(&trace_from_errors(&[0.5, 0.25, 0.0625, 0.0]), 0.0, 0.0, &[]).unwrap();
        assert_eq!(r.exact_hits, vec![4]);
        assert_eq!(r.tail_labels, vec![1, 2, 3]);
    }

    #[test]
    fn short_traces_are_rejected() {
        assert!(matches!(
            rate_analysis(&trace_from_errors(&[0.5, 0.25]), 0.0, 0.0, &[]),
            Err(Error::Analysis(_))
        ));
        // large errors are not usable
        assert!(rate_analysis(&trace_from_errors(&[4.0, 2.0, 0.5, 0.25]), 0.0, 0.0, &[]).is_err());
    }

    #[test]
    fn dennis_more_is_operator_gap() {
        let mut t = trace_from_errors(&[0.5, 0.25, 0.0625]);
        t.operators = vec![3.0, 0.8];
        let r = rate_analysis(&t, 0.0, 0.0, &[]).unwrap();
        assert_eq!(r.dennis_more_ratios[0], (1, 3.0));
        assert_eq!(r.dennis_more_ratios[1].0, 2);
        assert!((r.dennis_more_ratios[1].1 - 0.8).abs() < 1e-15);
    }
}
