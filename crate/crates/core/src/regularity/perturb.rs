//! Stability of strong q-subregularity under single-valued perturbations.
//!
//! If `F` is strongly q-subregular at `(x̄, ȳ)` with modulus below `κ` and
//! `g` is Lipschitz near `x̄` with constant below `λ`, where `λκ^{1/q} < 1`,
//! then `x ↦ F(x) − g(x̄) + g(x)` is strongly q-subregular at the same point
//! with modulus at most `κ / (1 − λκ^{1/q})^q`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::maps::{SetValuedMap, SmoothMap};

use super::estimate::{estimate_strong_subreg_modulus, RegularityEstimate};
use super::scan::{classify, ScanThresholds, Verdict};

/// Cells used for the Lipschitz estimate of `g`.
pub const LIP_CELLS: usize = 2048;

/// Relative slack when comparing a Lipschitz estimate with `λ`. A linear `g`
/// with slope `λ` has difference quotients equal to `λ` up to rounding.
pub const LIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub base_estimate: RegularityEstimate,
    pub lip_estimate: f64,
    pub perturbed_estimate: RegularityEstimate,
    /// `κ / (1 − λκ^{1/q})^q`.
    pub bound: f64,
    pub satisfied: bool,
    /// `κ^{-1/q}`.
    pub perturbation_radius: f64,
}

/// `1 / κ^{1/q}`: Lipschitz perturbations of smaller constant cannot destroy
/// strong q-subregularity.
pub fn guaranteed_perturbation_radius(modulus: f64, q: f64) -> f64 {
    modulus.powf(-1.0 / q)
}

pub fn perturbation_bound(kappa: f64, lambda: f64, q: f64) -> f64 {
    kappa / (1.0 - lambda * kappa.powf(1.0 / q)).powf(q)
}

/// `x ↦ F(x) − g(x̄) + g(x)`.
pub fn perturbed_map(map: &SetValuedMap, g: &SmoothMap, x_bar: f64) -> SetValuedMap {
    let g = g.clone();
    let g_bar = g.value(x_bar);
    map.shifted_by(Arc::new(move |x| g.value(x) - g_bar), format!("{}~g", map.label()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationParams {
    pub q: f64,
    pub kappa: f64,
    pub lambda: f64,
}

pub fn perturbation_bound_check(
    map: &SetValuedMap,
    g: &SmoothMap,
    base: (f64, f64),
    params: PerturbationParams,
    grid: &GridSpec,
) -> Result<PerturbationReport> {
    let PerturbationParams { q, kappa, lambda } = params;
    if q < 1.0 {
        return Err(Error::Applicability(format!("perturbation bounds need q >= 1, got {q}")));
    }
    if !(kappa > 0.0 && lambda >= 0.0) {
        return Err(Error::InvalidParameter("kappa must be positive and lambda nonnegative".into()));
    }
    let contraction = lambda * kappa.powf(1.0 / q);
    if contraction >= 1.0 {
        return Err(Error::Applicability(format!(
            "lambda * kappa^(1/q) = {contraction} is not below 1"
        )));
    }
    let base_estimate = estimate_strong_subreg_modulus(map, base, q, grid)?;
    if base_estimate.modulus >= kappa {
        return Err(Error::Applicability(format!(
            "kappa = {kappa} does not exceed the modulus estimate {}",
            base_estimate.modulus
        )));
    }
    let lip_estimate = g.lipschitz_estimate(base.0, LIP_CELLS);
    if lip_estimate > lambda * (1.0 + LIP_SLACK) {
        return Err(Error::Applicability(format!(
            "Lipschitz estimate {lip_estimate} of g exceeds lambda = {lambda}"
        )));
    }
    let perturbed_estimate = estimate_strong_subreg_modulus(&perturbed_map(map, g, base.0), base, q, grid)?;
    let bound = perturbation_bound(kappa, lambda, q);
    Ok(PerturbationReport {
        satisfied: perturbed_estimate.modulus <= bound,
        base_estimate,
        lip_estimate,
        perturbed_estimate,
        bound,
        perturbation_radius: guaranteed_perturbation_radius(kappa, q),
    })
}

/// `x ↦ g(x̄) + g'(u)(x − x̄) + F(x)`.
pub fn partial_linearization(map: &SetValuedMap, g: &SmoothMap, x_bar: f64, u: f64) -> SetValuedMap {
    let g_bar = g.value(x_bar);
    let slope = g.derivative(u);
    map.shifted_by(
        Arc::new(move |x| g_bar + slope * (x - x_bar)),
        format!("{}+lin(u={u})", map.label()),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterRow {
    pub u: f64,
    pub estimate: RegularityEstimate,
    pub within_target: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedReport {
    /// Estimate for `G(x̄, ·)`.
    pub linearization_estimate: RegularityEstimate,
    pub rows: Vec<ParameterRow>,
    /// Parameter of the first row above the target.
    pub violation: Option<f64>,
}

impl ParameterizedReport {
    pub fn all_within(&self) -> bool {
        self.violation.is_none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSweep {
    pub q: f64,
    pub target: f64,
    pub u_radius: f64,
    pub u_count: usize,
}

/// Strong moduli of `G(u, ·)` at `(x̄, ȳ + g(x̄))` for `u` evenly spaced on
/// `[x̄ − γ, x̄ + γ]`.
pub fn parameterized_check(
    map: &SetValuedMap,
    g: &SmoothMap,
    base: (f64, f64),
    sweep: ParameterSweep,
    grid: &GridSpec,
) -> Result<ParameterizedReport> {
    let (xb, yb) = base;
    let shifted_base = (xb, yb + g.value(xb));
    if sweep.u_count < 2 || !(sweep.u_radius > 0.0) {
        return Err(Error::InvalidParameter("parameter sweep needs u_count >= 2 and a positive radius".into()));
    }
    let linearization_estimate =
        estimate_strong_subreg_modulus(&partial_linearization(map, g, xb, xb), shifted_base, sweep.q, grid)?;
    if linearization_estimate.modulus >= sweep.target {
        return Err(Error::Applicability(format!(
            "partial linearization has modulus estimate {} >= target {}",
            linearization_estimate.modulus, sweep.target
        )));
    }
    let n = sweep.u_count - 1;
    let rows = (0..=n)
        .map(|i| {
            let u = if 2 * i == n {
                xb
            } else {
                xb - sweep.u_radius + 2.0 * sweep.u_radius * (i as f64 / n as f64)
            };
            let estimate =
                estimate_strong_subreg_modulus(&partial_linearization(map, g, xb, u), shifted_base, sweep.q, grid)?;
            Ok(ParameterRow {
                u,
                within_target: estimate.modulus <= sweep.target,
                estimate,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let violation = rows.iter().find(|r| !r.within_target).map(|r| r.u);
    Ok(ParameterizedReport {
        linearization_estimate,
        rows,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub sum_estimate: RegularityEstimate,
    pub linearization_estimate: RegularityEstimate,
    pub sum_verdict: Verdict,
    pub linearization_verdict: Verdict,
    /// `|η̂(F+g) − η̂(G)| / max(η̂(F+g), η̂(G))`.
    pub relative_gap: f64,
}

impl EquivalenceReport {
    pub fn agrees(&self, tol: f64) -> bool {
        self.sum_verdict == self.linearization_verdict && self.relative_gap <= tol
    }
}

fn verdict_over_decades(map: &SetValuedMap, base: (f64, f64), q: f64, grid: &GridSpec) -> Result<(RegularityEstimate, Verdict)> {
    let mut cells = Vec::with_capacity(3);
    let mut first = None;
    for j in 0..3 {
        let r = grid.radius * 10f64.powi(-j);
        let est = estimate_strong_subreg_modulus(map, base, q, &grid.with_radius(r))?;
        cells.push((r, est.modulus));
        first.get_or_insert(est);
    }
    let (verdict, _, _) = classify(&cells, &ScanThresholds::default());
    Ok((first.expect("three radii"), verdict))
}

/// Compares `F + g` with its partial linearization `G(x̄, ·)` at the grid
/// radius; verdicts come from the radii `γ, γ/10, γ/100`.
pub fn smooth_perturbation_equivalence(
    map: &SetValuedMap,
    g: &SmoothMap,
    base: (f64, f64),
    q: f64,
    grid: &GridSpec,
) -> Result<EquivalenceReport> {
    let (xb, yb) = base;
    let shifted_base = (xb, yb + g.value(xb));
    let gg = g.clone();
    let sum = map.shifted_by(Arc::new(move |x| gg.value(x)), format!("{}+g", map.label()));
    let lin = partial_linearization(map, g, xb, xb);
    let (sum_estimate, sum_verdict) = verdict_over_decades(&sum, shifted_base, q, grid)?;
    let (linearization_estimate, linearization_verdict) = verdict_over_decades(&lin, shifted_base, q, grid)?;
    let (a, b) = (sum_estimate.modulus, linearization_estimate.modulus);
    let relative_gap = if a == b { 0.0 } else { (a - b).abs() / a.max(b) };
    Ok(EquivalenceReport {
        sum_estimate,
        linearization_estimate,
        sum_verdict,
        linearization_verdict,
        relative_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn grid(radius: f64) -> GridSpec {
        GridSpec::new(radius, 100, 6).unwrap()
    }

    #[test]
    fn sqrt_abs_linear_perturbation() {
        let p = PerturbationParams { q: 2.0, kappa: 1.05, lambda: 0.11 };
        let rep = perturbation_bound_check(&catalog::sqrt_abs(), &SmoothMap::linear(0.1), (0.0, 0.0), p, &grid(1.0))
            .unwrap();
        assert!(rep.satisfied);
        assert!((rep.bound - 1.05 / (1.0 - 0.11 * 1.05f64.sqrt()).powi(2)).abs() < 1e-12);
        // oracle: sup of 1/(1 − 0.1√|x|)² over the grid is attained at x = −1
        assert!((rep.perturbed_estimate.modulus - 1.0 / 0.81).abs() < 1e-12);
    }

    #[test]
    fn zero_perturbation_keeps_the_estimate() {
        let p = PerturbationParams { q: 2.0, kappa: 1.05, lambda: 0.0 };
        let rep =
            perturbation_bound_check(&catalog::sqrt_abs(), &SmoothMap::zero(), (0.0, 0.0), p, &grid(1.0)).unwrap();
        assert_eq!(rep.bound, 1.05);
        assert_eq!(rep.perturbed_estimate.modulus, rep.base_estimate.modulus);
        assert!(rep.satisfied);
    }

    #[test]
    fn radius_formula() {
        assert_eq!(guaranteed_perturbation_radius(1.0, 2.0), 1.0);
        assert!((guaranteed_perturbation_radius(4.0, 2.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn preconditions_are_enforced() {
        let m = catalog::sqrt_abs();
        let g = SmoothMap::linear(0.5);
        let run = |q, kappa, lambda| {
            perturbation_bound_check(&m, &g, (0.0, 0.0), PerturbationParams { q, kappa, lambda }, &grid(1.0))
        };
        assert!(matches!(run(2.0, 1.05, 1.0), Err(Error::Applicability(_))));
        assert!(matches!(run(0.5, 1.05, 0.1), Err(Error::Applicability(_))));
        assert!(matches!(run(2.0, 0.9, 0.1), Err(Error::Applicability(_))));
        // lip g = 0.5 > lambda
        assert!(matches!(run(2.0, 1.05, 0.2), Err(Error::Applicability(_))));
    }

    #[test]
    fn parameterized_sqrt_abs() {
        let g = SmoothMap::polynomial(vec![0.0, 0.0, 1.0]);
        let sweep = ParameterSweep { q: 2.0, target: 1.3, u_radius: 0.1, u_count: 21 };
        let rep = parameterized_check(&catalog::sqrt_abs(), &g, (0.0, 0.0), sweep, &grid(0.1)).unwrap();
        assert_eq!(rep.rows.len(), 21);
        assert!(rep.all_within());
        let centre = &rep.rows[10];
        assert_eq!(centre.u, 0.0);
        assert_eq!(centre.estimate.modulus, rep.linearization_estimate.modulus);
        // oracle: 1/(1 − 2|u|√γ)² at the worst sign
        let worst = rep.rows.iter().map(|r| r.estimate.modulus).fold(0.0, f64::max);
        assert!((worst - 1.0 / (1.0 - 0.2 * 0.1f64.sqrt()).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn smooth_equivalence_sqrt_abs() {
        let g = SmoothMap::polynomial(vec![0.0, 0.0, 1.0]);
        let rep = smooth_perturbation_equivalence(&catalog::sqrt_abs(), &g, (0.0, 0.0), 2.0, &grid(1e-3)).unwrap();
        assert_eq!(rep.sum_verdict, Verdict::Bounded);
        assert!(rep.agrees(0.10), "{rep:?}");
    }
}
