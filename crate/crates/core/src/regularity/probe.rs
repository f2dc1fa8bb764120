//! Two-parameter metric-regularity probe.
//!
//! Metric regularity asks for `d(x; F⁻¹(y)) ≤ κ·d(y; F(x))` for all `(x, y)`
//! near `(x̄, ȳ)`. The probe tabulates the supremum of that quotient on
//! shrinking square neighbourhoods, and evaluates explicit sequences that
//! witness its failure.

use rayon::prelude::*;

use crate::catalog::QStaircase;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::maps::SetValuedMap;

use super::estimate::ratio;
use super::scan::{classify, ScanThresholds, Verdict};

/// Neighbourhoods for the probe: for each radius the axes are sampled on the
/// symmetric log grid of that radius plus the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub radii: Vec<f64>,
    pub points_per_decade: u32,
    pub decades: u32,
}

impl Default for ProbeGrid {
    fn default() -> Self {
        Self {
            radii: vec![1e-1, 1e-2, 1e-3, 1e-4],
            points_per_decade: 4,
            decades: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeRow {
    pub radius: f64,
    pub sup_quotient: f64,
    pub witness: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    pub verdict: Verdict,
    /// Quotient supremum at the smallest radius when the verdict is bounded.
    pub kappa_hat: Option<f64>,
}

/// `d(x; F⁻¹(y)) / d(y; F(x))`.
pub fn regularity_quotient(map: &SetValuedMap, x: f64, y: f64) -> Result<f64> {
    let num = map.inverse_eval(y)?.distance(x);
    let den = map.eval_or_empty(x).distance(y);
    Ok(ratio(num, den, 1.0))
}

fn axis(center: f64, radius: f64, grid: &ProbeGrid) -> Result<Vec<f64>> {
    let mut pts = vec![center];
    pts.extend(GridSpec::new(radius, grid.points_per_decade, grid.decades)?.points(center));
    Ok(pts)
}

pub fn metric_regularity_probe(
    map: &SetValuedMap,
    base: (f64, f64),
    grid: &ProbeGrid,
    thresholds: &ScanThresholds,
) -> Result<ProbeReport> {
    if !map.has_inverse() {
        return Err(Error::Capability(format!(
            "metric-regularity probe needs an inverse oracle for `{}`",
            map.label()
        )));
    }
    let (xb, yb) = base;
    let mut rows = Vec::with_capacity(grid.radii.len());
    for &r in &grid.radii {
        let xs: Vec<f64> = axis(xb, r, grid)?.into_iter().filter(|&x| map.in_domain(x)).collect();
        let ys = axis(yb, r, grid)?;
        let best = xs
            .par_iter()
            .map(|&x| {
                let mut best: Option<(f64, f64, f64)> = None;
                for &y in &ys {
                    let qv = regularity_quotient(map, x, y).expect("inverse checked");
                    if best.is_none_or(|b| qv > b.0) {
                        best = Some((qv, x, y));
                    }
                }
                best
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .fold(None::<(f64, f64, f64)>, |acc, c| match acc {
                Some(a) if a.0 >= c.0 => Some(a),
                _ => Some(c),
            });
        rows.push(ProbeRow {
            radius: r,
            sup_quotient: best.map_or(0.0, |b| b.0),
            witness: best.map(|b| (b.1, b.2)),
        });
    }
    let cells: Vec<(f64, f64)> = rows.iter().map(|r| (r.radius, r.sup_quotient)).collect();
    let (verdict, _, _) = classify(&cells, thresholds);
    let kappa_hat = (verdict == Verdict::Bounded).then(|| cells.last().map(|c| c.1)).flatten();
    Ok(ProbeReport {
        rows,
        verdict,
        kappa_hat,
    })
}

/// One term of the staircase sequences: the pairs `(x₁ₖ, y₁ₖ)`, `(x₂ₖ, y₂ₖ)`
/// and the difference quotient of `ρ(x, y) = d(x; Q(y))` between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaircaseTerm {
    pub k: u32,
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub alpha: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub quotient: f64,
}

impl StaircaseTerm {
    /// `quotient / k`; at least one means the quotient outgrows `k`.
    pub fn growth(&self) -> f64 {
        self.quotient / self.k as f64
    }
}

/// Evaluates the staircase sequences for `k ∈ ks`:
/// `x₁ₖ = x₂ₖ = 2^{-(k-1)}`, `y₂ₖ = b^{-(k-1)}`, `y₁ₖ = y₂ₖ − αₖ`, with
/// `αₖ` half of `min{1/(k2^k), b^{-(k-1)} − b^{-k}}`.
pub fn staircase_sequences(
    stairs: QStaircase,
    ks: impl IntoIterator<Item = u32>,
) -> Result<Vec<StaircaseTerm>> {
    let q = crate::catalog::q_map_with(stairs);
    ks.into_iter()
        .map(|k| {
            if k == 0 {
                return Err(Error::InvalidParameter("sequence index starts at 1".into()));
            }
            let kf = k as f64;
            let x = (-(kf - 1.0)).exp2();
            let y2 = stairs.breakpoint(k - 1);
            let gap = y2 - stairs.breakpoint(k);
            let alpha = 0.5 * (1.0 / (kf * kf.exp2())).min(gap);
            let y1 = y2 - alpha;
            let rho1 = q.eval(y1)?.distance(x);
            let rho2 = q.eval(y2)?.distance(x);
            let step = (0.0f64).hypot(y1 - y2);
            Ok(StaircaseTerm {
                k,
                x1: x,
                y1,
                x2: x,
                y2,
                alpha,
                rho1,
                rho2,
                quotient: (rho1 - rho2).abs() / step,
            })
        })
        .collect()
}

/// Quotient `d(x; F⁻¹(y)) / d(y; F(x))` along explicit pairs.
pub fn sequence_quotients(map: &SetValuedMap, pairs: &[(f64, f64)]) -> Result<Vec<f64>> {
    pairs
        .iter()
        .map(|&(x, y)| regularity_quotient(map, x, y))
        .collect()
}
