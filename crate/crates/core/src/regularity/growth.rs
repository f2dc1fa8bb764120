//! Growth conditions on a function `f` around a subgradient pair `(x̄, x̄*)`.
//!
//! With `c = qα/(1+q)` and `P = (∂f)⁻¹(x̄*)`, the lower estimate is
//!
//! ```text
//! f(x) ≥ f(x̄) + x̄*·(x − x̄) + c·d(x; P)^{(1+q)/q}        for |x − x̄| ≤ η
//! ```
//!
//! and the pairwise estimate, with `c = qβ/(1+q)`, is
//!
//! ```text
//! f(u) ≥ f(x) + x*·(u − x) − c·d(x; P)^{(1+q)/q}
//! ```
//!
//! for graph pairs `(u, x̄*)`, `(x, x*)` of `∂f` near `(x̄, x̄*)`. Both are
//! checked on sampled points only.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::interval::{ClosedInterval, IntervalUnion};
use crate::maps::{RealOracle, SetValuedMap};

/// Slack below zero still counted as a pass.
pub const MARGIN_TOL: f64 = 1e-12;

/// The data shared by both growth checks.
#[derive(Clone)]
pub struct GrowthSetup {
    pub potential: RealOracle,
    /// `(∂f)⁻¹(x̄*)`.
    pub target_preimage: IntervalUnion,
    pub x_bar: f64,
    pub x_bar_star: f64,
    pub q: f64,
}

impl std::fmt::Debug for GrowthSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GrowthSetup")
            .field("target_preimage", &self.target_preimage)
            .field("x_bar", &self.x_bar)
            .field("x_bar_star", &self.x_bar_star)
            .field("q", &self.q)
            .finish()
    }
}

impl GrowthSetup {
    pub fn new(
        potential: RealOracle,
        target_preimage: IntervalUnion,
        x_bar: f64,
        x_bar_star: f64,
        q: f64,
    ) -> Result<Self> {
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::InvalidParameter(format!("order must be positive, got {q}")));
        }
        if target_preimage.is_empty() {
            return Err(Error::InvalidParameter("target preimage is empty".into()));
        }
        Ok(Self {
            potential,
            target_preimage,
            x_bar,
            x_bar_star,
            q,
        })
    }

    /// Takes `(∂f)⁻¹(x̄*)` from the subdifferential's inverse oracle.
    pub fn from_subdifferential(
        potential: RealOracle,
        subdiff: &SetValuedMap,
        x_bar: f64,
        x_bar_star: f64,
        q: f64,
    ) -> Result<Self> {
        let pre = subdiff.inverse_eval(x_bar_star)?;
        Self::new(potential, pre, x_bar, x_bar_star, q)
    }

    fn exponent(&self) -> f64 {
        (1.0 + self.q) / self.q
    }

    fn constant(&self, modulus: f64) -> f64 {
        self.q * modulus / (1.0 + self.q)
    }

    fn dist_term(&self, x: f64) -> f64 {
        let d = self.target_preimage.distance(x);
        if d == 0.0 {
            0.0
        } else {
            d.powf(self.exponent())
        }
    }
}

fn difference(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        0.0
    } else {
        lhs - rhs
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub passed: bool,
    /// Minimum of LHS − RHS over the samples.
    pub margin: f64,
    /// Sample attaining the margin.
    pub witness: Option<f64>,
    pub samples: usize,
}

/// Checks the lower growth estimate with modulus `alpha` on `B(x̄, η)`,
/// sampled by `grid` (its radius is replaced by `eta`) plus `x̄` itself.
pub fn growth_check_lower(setup: &GrowthSetup, alpha: f64, eta: f64, grid: &GridSpec) -> Result<GrowthReport> {
    if !(alpha > 0.0 && eta > 0.0) {
        return Err(Error::InvalidParameter("alpha and eta must be positive".into()));
    }
    let grid = grid.with_radius(eta);
    grid.validate()?;
    let mut xs = vec![setup.x_bar];
    xs.extend(grid.points(setup.x_bar));
    let f = &setup.potential;
    let f_bar = f(setup.x_bar);
    let c = setup.constant(alpha);
    let margins: Vec<f64> = xs
        .par_iter()
        .map(|&x| {
            let rhs = f_bar + setup.x_bar_star * (x - setup.x_bar) + c * setup.dist_term(x);
            difference(f(x), rhs)
        })
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for (&x, &m) in xs.iter().zip(&margins) {
        let replace = match best {
            None => true,
            Some((bm, bx)) => {
                m < bm
                    || (m == bm
                        && ((x - setup.x_bar).abs(), x) < ((bx - setup.x_bar).abs(), bx))
            }
        };
        if replace {
            best = Some((m, x));
        }
    }
    let (margin, witness) = best.expect("at least the centre is sampled");
    Ok(GrowthReport {
        passed: margin >= -MARGIN_TOL,
        margin,
        witness: Some(witness),
        samples: xs.len(),
    })
}

/// Which components of a graph pair must stay within the sampling radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallNorm {
    /// Only `|x − x̄| ≤ R`; subgradients are limited to `x̄* ± R` only where
    /// `∂f(x)` is unbounded.
    Primal,
    /// `max(|x − x̄|, |x* − x̄*|) ≤ R`.
    Product,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphSampler {
    /// Resolution of the `x` grid; its radius is replaced by `R`.
    pub grid: GridSpec,
    pub ball: BallNorm,
    /// Interior points taken from each part of `P ∩ [x̄ − R, x̄ + R]`.
    pub preimage_points: usize,
}

impl GraphSampler {
    pub fn new(grid: GridSpec) -> Self {
        Self {
            grid,
            ball: BallNorm::Primal,
            preimage_points: 8,
        }
    }

    pub fn with_ball(mut self, ball: BallNorm) -> Self {
        self.ball = ball;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPair {
    pub u: f64,
    pub x: f64,
    pub x_star: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseReport {
    pub passed: bool,
    pub margin: f64,
    /// First violating pair in sampling order.
    pub violation: Option<GraphPair>,
    /// Pair attaining the minimum margin.
    pub worst: Option<GraphPair>,
    pub pairs_checked: usize,
    /// Sampling radius `η + (qη/(1+q))^{1/q}`.
    pub radius: f64,
}

pub fn pairwise_radius(q: f64, eta: f64) -> f64 {
    eta + (q * eta / (1.0 + q)).powf(1.0 / q)
}

/// Endpoints and midpoint of a bounded interval.
fn interval_samples(iv: &ClosedInterval, out: &mut Vec<f64>) {
    out.push(iv.lo());
    if let Some(m) = iv.midpoint() {
        if !iv.is_singleton() {
            out.push(m);
            out.push(iv.hi());
        }
    }
}

fn subgradient_samples(value: &IntervalUnion, window: &ClosedInterval, ball: BallNorm) -> Vec<f64> {
    let mut out = Vec::new();
    for part in value.parts() {
        let clip = match ball {
            BallNorm::Product => true,
            BallNorm::Primal => !part.is_bounded(),
        };
        let part = if clip { part.intersect(window) } else { Some(*part) };
        if let Some(p) = part {
            interval_samples(&p, &mut out);
        }
    }
    out
}

fn preimage_samples(pre: &IntervalUnion, window: &ClosedInterval, interior: usize) -> Vec<f64> {
    let mut out = Vec::new();
    for part in pre.intersect_interval(window).parts() {
        if part.is_singleton() {
            out.push(part.lo());
            continue;
        }
        let n = interior + 1;
        for i in 0..=n {
            out.push(part.lo() + part.width() * (i as f64 / n as f64));
        }
    }
    out
}

/// Checks the pairwise estimate with modulus `beta` on the graph of
/// `subdiff` near `(x̄, x̄*)`.
pub fn growth_check_pairwise(
    setup: &GrowthSetup,
    subdiff: &SetValuedMap,
    beta: f64,
    eta: f64,
    sampler: &GraphSampler,
) -> Result<PairwiseReport> {
    if !(beta > 0.0 && eta > 0.0) {
        return Err(Error::InvalidParameter("beta and eta must be positive".into()));
    }
    let r = pairwise_radius(setup.q, eta);
    let primal = ClosedInterval::new(setup.x_bar - r, setup.x_bar + r)?;
    let dual = ClosedInterval::new(setup.x_bar_star - r, setup.x_bar_star + r)?;
    let us = preimage_samples(&setup.target_preimage, &primal, sampler.preimage_points);
    let grid = sampler.grid.with_radius(r);
    grid.validate()?;
    let mut xs = vec![setup.x_bar];
    xs.extend(grid.points(setup.x_bar));
    xs.retain(|&x| subdiff.in_domain(x));

    let f = &setup.potential;
    let c = setup.constant(beta);
    let per_x: Vec<Vec<GraphPair>> = xs
        .par_iter()
        .map(|&x| {
            let fx = f(x);
            let dist = c * setup.dist_term(x);
            let mut pairs = Vec::new();
            for xs_ in subgradient_samples(&subdiff.eval_or_empty(x), &dual, sampler.ball) {
                for &u in &us {
                    let rhs = fx + xs_ * (u - x) - dist;
                    pairs.push(GraphPair {
                        u,
                        x,
                        x_star: xs_,
                        margin: difference(f(u), rhs),
                    });
                }
            }
            pairs
        })
        .collect();
    let pairs: Vec<GraphPair> = per_x.into_iter().flatten().collect();
    let violation = pairs.iter().copied().find(|p| p.margin < -MARGIN_TOL);
    let worst = pairs
        .iter()
        .copied()
        .fold(None::<GraphPair>, |acc, p| match acc {
            Some(a) if a.margin <= p.margin => Some(a),
            _ => Some(p),
        });
    Ok(PairwiseReport {
        passed: violation.is_none(),
        margin: worst.map_or(f64::INFINITY, |w| w.margin),
        violation,
        worst,
        pairs_checked: pairs.len(),
        radius: r,
    })
}
