//! One quasi-Newton step: solve `0 ∈ g(x_k) + B_k(x − x_k) + F(x)` for `x`.
//!
//! The residual `φ(x) = d(0; T(x))` with `T(x) = F(x) + g(x_k) + B_k(x − x_k)`
//! is scanned on a uniform grid over the window, refined geometrically
//! toward `x_k` and toward the window centre. Exact hits are kept, and every
//! scan cell where `T` crosses from one side of 0 to the other is bisected
//! down to adjacent floats.

use crate::error::{Error, Result};
use crate::interval::{ClosedInterval, IntervalUnion};
use crate::maps::Side;

use super::equation::GeneralizedEquation;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemConfig {
    /// Uniform cells over the window.
    pub cells: usize,
    /// Largest accepted step residual.
    pub tol: f64,
}

impl Default for SubproblemConfig {
    fn default() -> Self {
        Self { cells: 1024, tol: 1e-12 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemSolution {
    pub x: f64,
    /// `φ(x)`.
    pub residual: f64,
}

/// Offsets `w·2^{-j}` until they vanish or stop changing the centre.
fn geometric(center: f64, width: f64, out: &mut Vec<f64>) {
    let mut off = width;
    while off > 0.0 {
        let (a, b) = (center + off, center - off);
        if a == center && b == center {
            break;
        }
        out.push(a);
        out.push(b);
        off *= 0.5;
    }
}

fn scan_points(x_k: f64, window: &ClosedInterval, cells: usize) -> Vec<f64> {
    let (lo, hi) = (window.lo(), window.hi());
    let width = hi - lo;
    let mut pts: Vec<f64> = (0..=cells)
        .map(|i| lo + width * (i as f64 / cells as f64))
        .collect();
    pts.push(hi);
    let center = lo + 0.5 * width;
    pts.push(center);
    geometric(center, 0.5 * width, &mut pts);
    if window.contains(x_k) {
        pts.push(x_k);
        geometric(x_k, width, &mut pts);
    }
    pts.retain(|x| window.contains(*x));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// `|a − b|` as an unevaluated sum `hi + lo` (error-free two-sum), so that
/// distances which round to the same float still compare correctly.
fn exact_distance(a: f64, b: f64) -> (f64, f64) {
    let hi = a - b;
    let bb = hi - a;
    let lo = (a - (hi - bb)) + (-b - bb);
    if hi < 0.0 || (hi == 0.0 && lo < 0.0) {
        (-hi, -lo)
    } else {
        (hi, lo)
    }
}

struct Step<'a> {
    geq: &'a GeneralizedEquation,
    x_k: f64,
    b_k: f64,
    c: f64,
}

impl Step<'_> {
    fn value(&self, x: f64) -> IntervalUnion {
        self.geq.map.eval_or_empty(x).shift(self.c + self.b_k * (x - self.x_k))
    }

    fn phi(&self, x: f64) -> f64 {
        self.value(x).distance(0.0)
    }

    fn side(&self, x: f64) -> Side {
        Side::of(&self.value(x), 0.0)
    }

    /// Bisects a cell whose endpoints lie on opposite sides of 0.
    fn bisect(&self, mut a: f64, mut b: f64) -> f64 {
        let side_a = self.side(a);
        loop {
            let m = a + 0.5 * (b - a);
            if m <= a || m >= b {
                break;
            }
            match self.side(m) {
                Side::Hit => return m,
                s if s == side_a => a = m,
                Side::Above | Side::Below => b = m,
                _ => {
                    // a gap or hole inside the cell; keep the best of the three
                    return [a, m, b]
                        .into_iter()
                        .min_by(|p, q| self.phi(*p).total_cmp(&self.phi(*q)))
                        .expect("three points");
                }
            }
        }
        if self.phi(b) < self.phi(a) {
            b
        } else {
            a
        }
    }
}

/// Solves one step. Among accepted roots the one nearest `x_k` wins, ties
/// toward the smaller value.
pub fn subproblem_solve(
    geq: &GeneralizedEquation,
    x_k: f64,
    b_k: f64,
    window: &ClosedInterval,
    config: &SubproblemConfig,
) -> Result<SubproblemSolution> {
    if !(config.tol > 0.0) || config.cells == 0 {
        return Err(Error::InvalidParameter("subproblem needs tol > 0 and at least one cell".into()));
    }
    if !window.is_bounded() || window.is_singleton() {
        return Err(Error::InvalidParameter(format!("subproblem window {window} must be bounded and nondegenerate")));
    }
    if !(x_k.is_finite() && b_k.is_finite()) {
        return Err(Error::InvalidParameter(format!("non-finite iterate {x_k} or operator {b_k}")));
    }
    let step = Step {
        geq,
        x_k,
        b_k,
        c: geq.g.value(x_k),
    };
    let pts = scan_points(x_k, window, config.cells);
    let sides: Vec<Side> = pts.iter().map(|&x| step.side(x)).collect();
    let phis: Vec<f64> = pts.iter().map(|&x| step.phi(x)).collect();

    let mut candidates: Vec<f64> = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        let local_min = (i == 0 || phis[i] <= phis[i - 1]) && (i + 1 == pts.len() || phis[i] <= phis[i + 1]);
        if sides[i] == Side::Hit || (local_min && phis[i] <= config.tol) {
            candidates.push(x);
        }
    }
    for i in 0..pts.len().saturating_sub(1) {
        if matches!((sides[i], sides[i + 1]), (Side::Above, Side::Below) | (Side::Below, Side::Above)) {
            candidates.push(step.bisect(pts[i], pts[i + 1]));
        }
    }

    let best = candidates
        .into_iter()
        .map(|x| (x, step.phi(x)))
        .filter(|&(_, r)| r <= config.tol)
        .min_by(|a, b| {
            (exact_distance(a.0, x_k), a.0)
                .partial_cmp(&(exact_distance(b.0, x_k), b.0))
                .expect("finite")
        });
    match best {
        Some((x, residual)) => Ok(SubproblemSolution { x, residual }),
        None => {
            let (i, scan_min) = phis
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty scan");
            Err(Error::SubproblemFailure {
                x_k,
                scan_min,
                scan_argmin: pts[i],
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::maps::SmoothMap;
    use crate::solver::equation::lookup_equation;

    fn window(r: f64) -> ClosedInterval {
        ClosedInterval::new(-r, r).unwrap()
    }

    #[test]
    fn example_first_step_is_exact() {
        let eq = lookup_equation("example-5-2").unwrap();
        let s = subproblem_solve(&eq, 0.5, 3.0, &window(1.0), &SubproblemConfig::default()).unwrap();
        assert_eq!(s.x, 0.25);
        assert_eq!(s.residual, 0.0);
    }

    #[test]
    fn newton_step() {
        let eq = lookup_equation("newton-quadratic").unwrap();
        let s = subproblem_solve(&eq, 2.0, 4.0, &window(4.0), &SubproblemConfig::default()).unwrap();
        assert_eq!(s.x, 1.25);
    }

    #[test]
    fn complementarity_step() {
        let eq = lookup_equation("halfline-complementarity").unwrap();
        let s = subproblem_solve(&eq, 0.0, 1.0, &window(4.0), &SubproblemConfig::default()).unwrap();
        assert_eq!(s.x, 2.0);
    }

    #[test]
    fn non_grid_root_is_bisected() {
        // 0 = 1/3 + x − 0 ⇒ x = −1/3, not on any scan grid
        let eq = GeneralizedEquation::new("lin", SmoothMap::polynomial(vec![1.0 / 3.0, 1.0]), catalog::zero_map());
        let s = subproblem_solve(&eq, 0.0, 1.0, &window(1.0), &SubproblemConfig::default()).unwrap();
        assert!((s.x + 1.0 / 3.0).abs() <= 1e-16);
        assert!(s.residual <= 1e-16);
    }

    #[test]
    fn nearest_root_wins() {
        // T(x) = x² − 1/4 via F(x) = {x²}, g ≡ −1/4, B = 0: roots ±1/2
        let sq = crate::maps::SetValuedMap::new("sq", ClosedInterval::whole_line(), |x| {
            IntervalUnion::singleton(x * x)
        });
        let eq = GeneralizedEquation::new("sq", SmoothMap::polynomial(vec![-0.25]), sq);
        let cfg = SubproblemConfig::default();
        assert_eq!(subproblem_solve(&eq, 0.4, 0.0, &window(1.0), &cfg).unwrap().x, 0.5);
        assert_eq!(subproblem_solve(&eq, -0.4, 0.0, &window(1.0), &cfg).unwrap().x, -0.5);
        // equidistant: smaller value
        assert_eq!(subproblem_solve(&eq, 0.0, 0.0, &window(1.0), &cfg).unwrap().x, -0.5);
    }

    #[test]
    fn exact_distance_breaks_rounding_ties() {
        let x_k = 2f64.powi(-24);
        let tiny = 2f64.powi(-120);
        assert_eq!((tiny - x_k).abs(), (-tiny - x_k).abs());
        assert!(exact_distance(tiny, x_k) < exact_distance(-tiny, x_k));
        assert_eq!(exact_distance(1.0, 3.0), (2.0, 0.0));
    }

    #[test]
    fn no_root_reports_scan_minimum() {
        // 0 ∈ 1 + |x|^{1/2} has no solution
        let eq = GeneralizedEquation::new("none", SmoothMap::polynomial(vec![1.0]), catalog::sqrt_abs());
        match subproblem_solve(&eq, 0.5, 0.0, &window(1.0), &SubproblemConfig::default()) {
            Err(Error::SubproblemFailure { scan_min, scan_argmin, .. }) => {
                assert_eq!(scan_min, 1.0);
                assert!(scan_argmin.abs() < 1e-30);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let eq = lookup_equation("newton-quadratic").unwrap();
        let bad = SubproblemConfig { cells: 16, tol: 0.0 };
        assert!(subproblem_solve(&eq, 2.0, 4.0, &window(4.0), &bad).is_err());
        let whole = ClosedInterval::whole_line();
        assert!(subproblem_solve(&eq, 2.0, 4.0, &whole, &SubproblemConfig::default()).is_err());
    }
}
