//! Sup-ratio estimates of (strong) q-subregularity moduli.
//!
//! For a base point `(x̄, ȳ)` in the graph the plain estimator tabulates
//!
//! ```text
//! d(x; F⁻¹(ȳ)) / d(ȳ; F(x))^q
//! ```
//!
//! and the strong one `|x − x̄| / d(ȳ; F(x))^q` over a [`GridSpec`]. The
//! reported modulus is the grid maximum, which is a lower bound for the true
//! supremum over the ball.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::interval::{ClosedInterval, IntervalUnion};
use crate::maps::SetValuedMap;

/// Cells used when the preimage `F⁻¹(ȳ)` has to be bracketed on a window.
pub const PREIMAGE_WINDOW_CELLS: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModulusKind {
    /// Numerator `d(x; F⁻¹(ȳ))`.
    Plain,
    /// Numerator `|x − x̄|`.
    Strong,
}

/// One grid point of a ratio table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub x: f64,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityEstimate {
    pub kind: ModulusKind,
    pub order: f64,
    /// Grid maximum of the ratio; `+∞` flags a subregularity violation.
    pub modulus: f64,
    /// Grid point attaining `modulus`.
    pub witness: Option<f64>,
    pub radius: f64,
    pub grid_points: usize,
    /// Points with positive numerator and zero denominator.
    pub excluded_points: usize,
    pub truncation_active: bool,
    /// Set when `F⁻¹(ȳ)` came from a bracketing search.
    pub approximate_preimage: bool,
}

impl RegularityEstimate {
    pub fn is_violation(&self) -> bool {
        self.modulus == f64::INFINITY
    }
}

/// `numerator / denominator^q` with the solution-point conventions: a zero
/// numerator gives 0, a positive numerator over a zero denominator gives `+∞`.
pub fn ratio(numerator: f64, denominator: f64, q: f64) -> f64 {
    if numerator == 0.0 || denominator == f64::INFINITY {
        0.0
    } else if denominator == 0.0 {
        f64::INFINITY
    } else {
        numerator / denominator.powf(q)
    }
}

fn check_base(map: &SetValuedMap, base: (f64, f64), q: f64) -> Result<()> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidParameter(format!("order must be positive, got {q}")));
    }
    let (xb, yb) = base;
    if map.eval(xb)?.distance(yb) != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "base point ({xb}, {yb}) is not in the graph of `{}`",
            map.label()
        )));
    }
    Ok(())
}

/// Per-point ratio table on the grid, in grid order. Points outside the map's
/// domain are dropped.
pub fn ratio_table(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
    kind: ModulusKind,
    search_window: Option<ClosedInterval>,
) -> Result<(Vec<RatioSample>, bool)> {
    grid.validate()?;
    check_base(map, base, q)?;
    let (xb, yb) = base;
    let (solutions, approximate) = match kind {
        ModulusKind::Plain => {
            let pre = map.inverse_eval_windowed(yb, search_window, PREIMAGE_WINDOW_CELLS)?;
            (Some(pre.set), pre.approximate)
        }
        ModulusKind::Strong => (None, false),
    };
    let points: Vec<f64> = grid
        .points(xb)
        .into_iter()
        .filter(|&x| map.in_domain(x))
        .collect();
    let table = points
        .par_iter()
        .map(|&x| sample(map, x, xb, yb, q, solutions.as_ref()))
        .collect::<Vec<_>>();
    Ok((table, approximate))
}

fn sample(
    map: &SetValuedMap,
    x: f64,
    xb: f64,
    yb: f64,
    q: f64,
    solutions: Option<&IntervalUnion>,
) -> RatioSample {
    let numerator = match solutions {
        Some(s) => s.distance(x),
        None => (x - xb).abs(),
    };
    let denominator = map.eval_or_empty(x).distance(yb);
    RatioSample {
        x,
        numerator,
        denominator,
        ratio: ratio(numerator, denominator, q),
    }
}

/// Deterministic argmax: larger ratio wins, then smaller `|x − x̄|`, then
/// smaller `x`.
pub(crate) fn better(a: &RatioSample, b: &RatioSample, xb: f64) -> bool {
    match a.ratio.total_cmp(&b.ratio) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => {
            let (da, db) = ((a.x - xb).abs(), (b.x - xb).abs());
            da < db || (da == db && a.x < b.x)
        }
    }
}

fn summarize(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
    kind: ModulusKind,
    table: &[RatioSample],
    approximate: bool,
) -> RegularityEstimate {
    let mut best: Option<&RatioSample> = None;
    for s in table {
        if best.is_none_or(|b| better(s, b, base.0)) {
            best = Some(s);
        }
    }
    RegularityEstimate {
        kind,
        order: q,
        modulus: best.map_or(0.0, |b| b.ratio),
        witness: best.map(|b| b.x),
        radius: grid.radius,
        grid_points: table.len(),
        excluded_points: table
            .iter()
            .filter(|s| s.numerator > 0.0 && s.denominator == 0.0)
            .count(),
        truncation_active: table.iter().any(|s| map.is_truncated_at(s.x)),
        approximate_preimage: approximate,
    }
}

pub fn estimate_modulus(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
    kind: ModulusKind,
    search_window: Option<ClosedInterval>,
) -> Result<RegularityEstimate> {
    let (table, approximate) = ratio_table(map, base, q, grid, kind, search_window)?;
    Ok(summarize(map, base, q, grid, kind, &table, approximate))
}

/// Estimate of `subreg^q F(x̄, ȳ)`. Needs an inverse oracle.
pub fn estimate_subreg_modulus(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
) -> Result<RegularityEstimate> {
    estimate_modulus(map, base, q, grid, ModulusKind::Plain, None)
}

/// Like [`estimate_subreg_modulus`], bracketing `F⁻¹(ȳ)` on `window` when the
/// map has no inverse oracle.
pub fn estimate_subreg_modulus_in(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
    window: ClosedInterval,
) -> Result<RegularityEstimate> {
    estimate_modulus(map, base, q, grid, ModulusKind::Plain, Some(window))
}

/// Estimate of `ssubreg^q F(x̄, ȳ)`.
pub fn estimate_strong_subreg_modulus(
    map: &SetValuedMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
) -> Result<RegularityEstimate> {
    estimate_modulus(map, base, q, grid, ModulusKind::Strong, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{self, lookup};

    fn grid(radius: f64) -> GridSpec {
        GridSpec::new(radius, 200, 6).unwrap()
    }

    #[test]
    fn sqrt_abs_order_two() {
        let m = catalog::sqrt_abs();
        let est = estimate_strong_subreg_modulus(&m, (0.0, 0.0), 2.0, &grid(1.0)).unwrap();
        assert!((est.modulus - 1.0).abs() < 1e-9);
        let plain = estimate_subreg_modulus(&m, (0.0, 0.0), 2.0, &grid(1.0)).unwrap();
        assert!((plain.modulus - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identity_order_one() {
        let m = catalog::identity();
        for r in [1e-3, 0.5, 7.0] {
            let est = estimate_subreg_modulus(&m, (0.0, 0.0), 1.0, &grid(r)).unwrap();
            assert_eq!(est.modulus, 1.0);
        }
    }

    #[test]
    fn s_map_strong_two_subregular_on_quarter_ball() {
        // Brute-force oracle from the branch formulas: for |x| in
        // (2^-(k+1), 2^-k) the nearest solution has |y| = 2^(-k/3); at
        // |x| = 2^-(k+1) it is 2^(-(k+1)/3).
        let oracle = |x: f64| {
            let a = x.abs();
            let t = -a.log2();
            let y = if t.fract() == 0.0 {
                (-(t) / 3.0).exp2()
            } else {
                (-(t.floor()) / 3.0).exp2()
            };
            a / (y * y)
        };
        let g = grid(0.25);
        let expected = g
            .points(0.0)
            .into_iter()
            .map(oracle)
            .fold(0.0, f64::max);
        let est = estimate_strong_subreg_modulus(&catalog::s_map(), (0.0, 0.0), 2.0, &g).unwrap();
        assert!((est.modulus - expected).abs() <= 1e-12 * expected);
        assert!(est.modulus <= 1.0 + 1e-9);
        assert!(!est.truncation_active);
    }

    #[test]
    fn zero_map_strong_violation() {
        let est =
            estimate_strong_subreg_modulus(&catalog::zero_map(), (0.0, 0.0), 1.0, &grid(1.0)).unwrap();
        assert!(est.is_violation());
        assert!(est.witness.unwrap() != 0.0);
        assert_eq!(est.excluded_points, grid(1.0).len());
    }

    #[test]
    fn subdiff_sqrt_on_shrinking_radius() {
        for q in [1.0f64, 2.0, 4.0] {
            let gamma = (-2.0 * q / (q + 2.0)).exp2();
            let est =
                estimate_strong_subreg_modulus(&catalog::subdiff_sqrt(), (0.0, 0.0), q, &grid(gamma))
                    .unwrap();
            assert!(est.modulus <= 1.0 + 1e-9, "q = {q}: {}", est.modulus);
        }
    }

    #[test]
    fn witness_reproduces_modulus() {
        for e in catalog::catalog() {
            let g = GridSpec::new(0.5, 20, 4).unwrap();
            let est = estimate_subreg_modulus(&e.map, e.base_point, 1.5, &g).unwrap();
            if let Some(w) = est.witness {
                let (xb, yb) = e.base_point;
                let num = e.map.inverse_eval(yb).unwrap().distance(w);
                let den = e.map.eval_or_empty(w).distance(yb);
                let r = ratio(num, den, 1.5);
                if r.is_finite() {
                    assert!((r - est.modulus).abs() <= 1e-12 * r.abs(), "{}", e.id);
                } else {
                    assert_eq!(est.modulus, r);
                }
                let _ = xb;
            }
        }
    }

    #[test]
    fn strong_dominates_plain() {
        for e in catalog::catalog() {
            let g = GridSpec::new(0.5, 20, 4).unwrap();
            for q in [0.5, 1.0, 2.0, 3.0] {
                let plain = estimate_subreg_modulus(&e.map, e.base_point, q, &g).unwrap();
                let strong = estimate_strong_subreg_modulus(&e.map, e.base_point, q, &g).unwrap();
                assert!(strong.modulus >= plain.modulus, "{} q={q}", e.id);
            }
        }
    }

    #[test]
    fn refinement_never_decreases_estimate() {
        for e in catalog::catalog() {
            let coarse = GridSpec::new(0.5, 10, 4).unwrap();
            let fine = GridSpec::new(0.5, 30, 4).unwrap();
            let a = estimate_strong_subreg_modulus(&e.map, e.base_point, 2.0, &coarse).unwrap();
            let b = estimate_strong_subreg_modulus(&e.map, e.base_point, 2.0, &fine).unwrap();
            assert!(b.modulus >= a.modulus, "{}", e.id);
        }
    }

    #[test]
    fn plain_estimate_needs_inverse_or_window() {
        let m = catalog::sqrt_abs();
        let no_inverse = SetValuedMap::new("bare", m.domain(), |x| {
            IntervalUnion::singleton(x.abs().sqrt())
        });
        assert!(matches!(
            estimate_subreg_modulus(&no_inverse, (0.0, 0.0), 2.0, &grid(1.0)),
            Err(Error::Capability(_))
        ));
        let w = ClosedInterval::new(-2.0, 2.0).unwrap();
        let est = estimate_subreg_modulus_in(&no_inverse, (0.0, 0.0), 2.0, &grid(1.0), w).unwrap();
        assert!(est.approximate_preimage);
        assert!((est.modulus - 1.0).abs() < 1e-9);
    }

    #[test]
    fn base_point_outside_graph_is_rejected() {
        let e = lookup("sqrt-abs").unwrap();
        assert!(estimate_strong_subreg_modulus(&e.map, (0.0, 1.0), 2.0, &grid(1.0)).is_err());
    }
}
