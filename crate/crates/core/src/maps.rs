//! Set-valued maps `F: ℝ ⇉ ℝ` given by evaluation oracles, and smooth
//! single-valued maps with derivative oracles.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::interval::{ClosedInterval, IntervalUnion};

pub type SetOracle = Arc<dyn Fn(f64) -> IntervalUnion + Send + Sync>;
pub type RealOracle = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A set-valued map on the real line.
///
/// `eval` must be deterministic and stateless. When present, `inverse` returns
/// the exact preimage `F⁻¹(y) = {x : y ∈ F(x)}`.
#[derive(Clone)]
pub struct SetValuedMap {
    label: String,
    domain: ClosedInterval,
    eval: SetOracle,
    inverse: Option<SetOracle>,
    truncation_zone: Option<ClosedInterval>,
}

/// Result of [`SetValuedMap::inverse_eval_windowed`].
#[derive(Debug, Clone, PartialEq)]
pub struct Preimage {
    pub set: IntervalUnion,
    /// `true` when the set is a grid-bracketed approximation rather than the
    /// analytic preimage.
    pub approximate: bool,
}

impl SetValuedMap {
    pub fn new(
        label: impl Into<String>,
        domain: ClosedInterval,
        eval: impl Fn(f64) -> IntervalUnion + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.into(),
            domain,
            eval: Arc::new(eval),
            inverse: None,
            truncation_zone: None,
        }
    }

    pub fn with_inverse(mut self, inverse: impl Fn(f64) -> IntervalUnion + Send + Sync + 'static) -> Self {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    /// Marks the inputs where `eval` uses a truncated formula instead of the
    /// exact one.
    pub fn with_truncation_zone(mut self, zone: ClosedInterval) -> Self {
        self.truncation_zone = Some(zone);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> ClosedInterval {
        self.domain
    }

    pub fn in_domain(&self, x: f64) -> bool {
        self.domain.contains(x)
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn is_truncated_at(&self, x: f64) -> bool {
        self.truncation_zone.is_some_and(|z| z.contains(x))
    }

    pub fn eval(&self, x: f64) -> Result<IntervalUnion> {
        if !self.in_domain(x) {
            return Err(Error::Domain {
                label: self.label.clone(),
                x,
            });
        }
        Ok((self.eval)(x))
    }

    /// `F(x)`, or the empty set outside the domain.
    pub fn eval_or_empty(&self, x: f64) -> IntervalUnion {
        if self.in_domain(x) {
            (self.eval)(x)
        } else {
            IntervalUnion::empty()
        }
    }

    /// Analytic preimage `F⁻¹(y)`.
    pub fn inverse_eval(&self, y: f64) -> Result<IntervalUnion> {
        match &self.inverse {
            Some(inv) => Ok(inv(y)),
            None => Err(Error::Capability(format!(
                "`{}` has no inverse oracle; supply a search window",
                self.label
            ))),
        }
    }

    /// `F⁻¹(y)`, analytic when available, otherwise bracketed on `cells`
    /// uniform cells of `window`.
    ///
    /// The bracketed form keeps every grid point where `y ∈ F(x)` and every
    /// cell across which `y` changes side relative to `F(x)`.
    pub fn inverse_eval_windowed(
        &self,
        y: f64,
        window: Option<ClosedInterval>,
        cells: usize,
    ) -> Result<Preimage> {
        if let Some(inv) = &self.inverse {
            return Ok(Preimage {
                set: inv(y),
                approximate: false,
            });
        }
        let window = window.ok_or_else(|| {
            Error::Capability(format!(
                "`{}` has no inverse oracle and no search window was given",
                self.label
            ))
        })?;
        if !window.is_bounded() || cells == 0 {
            return Err(Error::InvalidParameter(
                "search window must be bounded with at least one cell".into(),
            ));
        }
        let xs: Vec<f64> = (0..=cells)
            .map(|i| window.lo() + window.width() * (i as f64) / (cells as f64))
            .collect();
        let sides: Vec<Side> = xs
            .iter()
            .map(|&x| Side::of(&self.eval_or_empty(x), y))
            .collect();
        let mut raw = Vec::new();
        for (i, side) in sides.iter().enumerate() {
            if *side == Side::Hit {
                raw.push(ClosedInterval::point(xs[i]));
            }
        }
        for i in 0..cells {
            let crosses = matches!(
                (sides[i], sides[i + 1]),
                (Side::Below, Side::Above)
                    | (Side::Above, Side::Below)
                    | (Side::Hit, Side::Hit)
                    | (Side::Straddle, Side::Above | Side::Below | Side::Straddle | Side::Hit)
                    | (Side::Above | Side::Below | Side::Hit, Side::Straddle)
            );
            if crosses {
                raw.push(ClosedInterval::new(xs[i], xs[i + 1])?);
            }
        }
        Ok(Preimage {
            set: IntervalUnion::normalize(raw),
            approximate: true,
        })
    }

    /// The map `x ↦ F(x) + s(x)` for a single-valued shift `s`.
    pub fn shifted_by(&self, shift: RealOracle, label: impl Into<String>) -> SetValuedMap {
        let eval = self.eval.clone();
        SetValuedMap {
            label: label.into(),
            domain: self.domain,
            eval: Arc::new(move |x| eval(x).shift(shift(x))),
            inverse: None,
            truncation_zone: self.truncation_zone,
        }
    }

    /// The map `x ↦ F(x) + c`; keeps the inverse oracle.
    pub fn plus_constant(&self, c: f64) -> SetValuedMap {
        let eval = self.eval.clone();
        let inverse = self.inverse.clone().map(|inv| {
            let f: SetOracle = Arc::new(move |y| inv(y - c));
            f
        });
        SetValuedMap {
            label: format!("{}+{c}", self.label),
            domain: self.domain,
            eval: Arc::new(move |x| eval(x).shift(c)),
            inverse,
            truncation_zone: self.truncation_zone,
        }
    }
}

impl fmt::Debug for SetValuedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SetValuedMap")
            .field("label", &self.label)
            .field("domain", &self.domain)
            .field("has_inverse", &self.inverse.is_some())
            .field("truncation_zone", &self.truncation_zone)
            .finish()
    }
}

/// Position of a target value relative to a set value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Side {
    Hit,
    /// Every point of the set lies above the target.
    Above,
    /// Every point of the set lies below the target.
    Below,
    /// The target sits in a gap between parts.
    Straddle,
    Empty,
}

impl Side {
    pub(crate) fn of(set: &IntervalUnion, y: f64) -> Side {
        let Some(hull) = set.hull() else {
            return Side::Empty;
        };
        if set.contains(y) {
            Side::Hit
        } else if hull.lo() > y {
            Side::Above
        } else if hull.hi() < y {
            Side::Below
        } else {
            Side::Straddle
        }
    }
}

/// A smooth single-valued map with its derivative.
#[derive(Clone)]
pub struct SmoothMap {
    value: RealOracle,
    derivative: RealOracle,
    /// Radius of the neighbourhood used for Lipschitz estimates.
    pub lip_estimate_radius: f64,
}

impl SmoothMap {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            lip_estimate_radius: 0.1,
        }
    }

    pub fn with_lip_radius(mut self, radius: f64) -> Self {
        self.lip_estimate_radius = radius;
        self
    }

    /// `x ↦ Σ cᵢ xⁱ`, coefficients in increasing degree.
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        let dcoeffs: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * i as f64)
            .collect();
        let horner = |cs: &[f64], x: f64| cs.iter().rev().fold(0.0, |acc, c| acc * x + c);
        let cs = coeffs;
        Self::new(move |x| horner(&cs, x), move |x| horner(&dcoeffs, x))
    }

    pub fn linear(slope: f64) -> Self {
        Self::new(move |x| slope * x, move |_| slope)
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, |_| 0.0)
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn value_oracle(&self) -> RealOracle {
        self.value.clone()
    }

    /// Largest difference quotient of `g` between consecutive points of a
    /// uniform grid with `cells` cells on `[center - r, center + r]`,
    /// `r = lip_estimate_radius`.
    pub fn lipschitz_estimate(&self, center: f64, cells: usize) -> f64 {
        let r = self.lip_estimate_radius;
        let xs: Vec<f64> = (0..=cells)
            .map(|i| center - r + 2.0 * r * (i as f64) / (cells as f64))
            .collect();
        xs.windows(2)
            .map(|w| ((self.value(w[1]) - self.value(w[0])) / (w[1] - w[0])).abs())
            .fold(0.0, f64::max)
    }

    /// Checks the derivative oracle against central differences at `points`;
    /// returns the first point where the relative mismatch exceeds `rel_tol`.
    pub fn check_derivative(&self, points: &[f64], rel_tol: f64) -> Option<f64> {
        points.iter().copied().find(|&x| {
            let h = 1e-5 * x.abs().max(1.0);
            let fd = (self.value(x + h) - self.value(x - h)) / (2.0 * h);
            let d = self.derivative(x);
            (fd - d).abs() > rel_tol * d.abs().max(1.0)
        })
    }
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("lip_estimate_radius", &self.lip_estimate_radius)
            .finish_non_exhaustive()
    }
}

/// Samples graph consistency: for each `x` and each finite endpoint `y` of
/// `F(x)`, `x` must lie in `F⁻¹(y)` up to `rel_tol · max(1, |x|)`. Returns the
/// first offending pair.
pub fn check_graph_consistency(
    map: &SetValuedMap,
    xs: &[f64],
    rel_tol: f64,
) -> Result<Option<(f64, f64)>> {
    for &x in xs {
        if !map.in_domain(x) {
            continue;
        }
        let value = map.eval(x)?;
        for y in value.finite_endpoints() {
            if map.inverse_eval(y)?.distance(x) > rel_tol * x.abs().max(1.0) {
                return Ok(Some((x, y)));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sign_map() -> SetValuedMap {
        SetValuedMap::new("sign", ClosedInterval::whole_line(), |x| {
            if x > 0.0 {
                IntervalUnion::singleton(1.0)
            } else if x < 0.0 {
                IntervalUnion::singleton(-1.0)
            } else {
                IntervalUnion::interval(-1.0, 1.0).unwrap()
            }
        })
    }

    #[test]
    fn missing_inverse_is_a_capability_error() {
        let m = sign_map();
        assert!(matches!(m.inverse_eval(0.0), Err(Error::Capability(_))));
        assert!(matches!(
            m.inverse_eval_windowed(0.0, None, 10),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn windowed_inverse_brackets_preimage() {
        let m = sign_map();
        let w = ClosedInterval::new(-1.0, 1.0).unwrap();
        let pre = m.inverse_eval_windowed(0.5, Some(w), 8).unwrap();
        assert!(pre.approximate);
        assert!(pre.set.contains(0.0));
        let pre = m.inverse_eval_windowed(1.0, Some(w), 8).unwrap();
        assert_eq!(pre.set, IntervalUnion::interval(0.0, 1.0).unwrap());
    }

    #[test]
    fn out_of_domain_eval_errors() {
        let m = SetValuedMap::new("half", ClosedInterval::new(0.0, f64::INFINITY).unwrap(), |_| {
            IntervalUnion::singleton(0.0)
        });
        assert!(matches!(m.eval(-1.0), Err(Error::Domain { .. })));
        assert!(m.eval_or_empty(-1.0).is_empty());
    }

    #[test]
    fn polynomial_and_derivative() {
        let g = SmoothMap::polynomial(vec![-1.0, 0.0, 1.0]);
        assert_eq!(g.value(2.0), 3.0);
        assert_eq!(g.derivative(2.0), 4.0);
        assert_eq!(g.check_derivative(&[-3.0, -0.5, 0.25, 1.5, 4.0], 1e-6), None);
    }

    #[test]
    fn bad_derivative_is_detected() {
        let g = SmoothMap::new(|x| x * x, |x| x);
        assert_eq!(g.check_derivative(&[1.0], 1e-6), Some(1.0));
    }

    #[test]
    fn lipschitz_of_linear_map() {
        let g = SmoothMap::linear(0.3).with_lip_radius(0.5);
        assert!((g.lipschitz_estimate(0.0, 100) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn plus_constant_keeps_inverse() {
        let id = SetValuedMap::new("id", ClosedInterval::whole_line(), IntervalUnion::singleton)
            .with_inverse(IntervalUnion::singleton);
        let shifted = id.plus_constant(2.0);
        assert_eq!(shifted.eval(1.0).unwrap(), IntervalUnion::singleton(3.0));
        assert_eq!(shifted.inverse_eval(3.0).unwrap(), IntervalUnion::singleton(1.0));
    }
}
