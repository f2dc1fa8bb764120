//! Log-spaced sample grids centred at a reference point.

use crate::error::{Error, Result};

/// Samples `x̄ ± γ·10^{-j/points_per_decade}` for `j = 0..=decades·points_per_decade`.
///
/// The centre itself is never sampled. Points are ordered by decreasing
/// offset, with `x̄ + o` before `x̄ − o` when `symmetric` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub radius: f64,
    pub points_per_decade: u32,
    pub decades: u32,
    pub symmetric: bool,
}

impl GridSpec {
    pub fn new(radius: f64, points_per_decade: u32, decades: u32) -> Result<Self> {
        let g = Self {
            radius,
            points_per_decade,
            decades,
            symmetric: true,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn one_sided(mut self) -> Self {
        self.symmetric = false;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "grid radius must be positive and finite, got {}",
                self.radius
            )));
        }
        if self.points_per_decade == 0 || self.decades == 0 {
            return Err(Error::InvalidParameter(
                "grid needs at least one point per decade and one decade".into(),
            ));
        }
        Ok(())
    }

    /// Offsets `γ·10^{-j/ppd}`, largest first.
    pub fn offsets(&self) -> Vec<f64> {
        let ppd = self.points_per_decade as f64;
        (0..=self.decades * self.points_per_decade)
            .map(|j| self.radius * 10f64.powf(-(j as f64) / ppd))
            .collect()
    }

    pub fn points(&self, center: f64) -> Vec<f64> {
        let offsets = self.offsets();
        let mut pts = Vec::with_capacity(2 * offsets.len());
        for o in offsets {
            pts.push(center + o);
            if self.symmetric {
                pts.push(center - o);
            }
        }
        pts
    }

    pub fn len(&self) -> usize {
        let per_side = (self.decades * self.points_per_decade + 1) as usize;
        if self.symmetric {
            2 * per_side
        } else {
            per_side
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}
