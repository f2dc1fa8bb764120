//! Order scans: modulus-versus-radius tables with bounded / blow-up verdicts.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::maps::SetValuedMap;

use super::estimate::{estimate_modulus, ModulusKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Bounded,
    BlowUp,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Bounded => "bounded",
            Verdict::BlowUp => "blow-up",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Thresholds separating growing from stable modulus tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanThresholds {
    /// Minimum total growth of the modulus over the scanned radii for a
    /// blow-up verdict.
    pub blowup_factor: f64,
    /// Largest relative increase over the last two radius decades for a
    /// bounded verdict; also the minimum per-step growth for blow-up.
    pub stability_tol: f64,
}

impl Default for ScanThresholds {
    fn default() -> Self {
        Self {
            blowup_factor: 10.0,
            stability_tol: 0.10,
        }
    }
}

/// `(radius, η̂)` table for one order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRow {
    pub order: f64,
    pub cells: Vec<(f64, f64)>,
    pub verdict: Verdict,
    /// Smallest growth factor normalised to one radius decade.
    pub min_decade_growth: f64,
    /// `η̂(smallest radius) / η̂(largest radius)`.
    pub total_growth: f64,
    pub truncation_active: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderScanReport {
    pub kind: ModulusKind,
    pub rows: Vec<OrderRow>,
    /// Largest bounded order.
    pub critical_lower: Option<f64>,
    /// Smallest blow-up order.
    pub critical_upper: Option<f64>,
}

impl OrderScanReport {
    pub fn verdict_for(&self, q: f64) -> Option<Verdict> {
        self.rows.iter().find(|r| r.order == q).map(|r| r.verdict)
    }
}

fn growth(prev: f64, next: f64) -> f64 {
    if prev == next {
        1.0
    } else if prev == 0.0 || next == f64::INFINITY {
        f64::INFINITY
    } else {
        next / prev
    }
}

/// Applies the verdict rules to a `(radius, η̂)` table with decreasing radii.
pub fn classify(cells: &[(f64, f64)], thresholds: &ScanThresholds) -> (Verdict, f64, f64) {
    let (first, last) = match (cells.first(), cells.last()) {
        (Some(f), Some(l)) if cells.len() >= 2 => (*f, *l),
        _ => return (Verdict::Inconclusive, f64::NAN, f64::NAN),
    };
    let min_decade_growth = cells
        .windows(2)
        .map(|w| {
            let decades = (w[0].0 / w[1].0).log10();
            growth(w[0].1, w[1].1).powf(1.0 / decades)
        })
        .fold(f64::INFINITY, f64::min);
    let total_growth = growth(first.1, last.1);

    if cells.iter().any(|c| c.1 == f64::INFINITY) {
        return (Verdict::BlowUp, min_decade_growth, total_growth);
    }
    let steadily_growing = cells
        .windows(2)
        .all(|w| growth(w[0].1, w[1].1) >= 1.0 + thresholds.stability_tol);
    if steadily_growing && total_growth >= thresholds.blowup_factor {
        return (Verdict::BlowUp, min_decade_growth, total_growth);
    }
    // compare against the smallest radius at least two decades above the last
    let anchor = cells
        .iter()
        .rev()
        .find(|c| c.0 >= 100.0 * last.0 * (1.0 - 1e-12))
        .copied()
        .unwrap_or(first);
    if growth(anchor.1, last.1) <= 1.0 + thresholds.stability_tol {
        return (Verdict::Bounded, min_decade_growth, total_growth);
    }
    (Verdict::Inconclusive, min_decade_growth, total_growth)
}

/// Tabulates `η̂(radius)` for every order in `orders` and classifies each row.
///
/// Every radius reuses `grid`'s resolution with the radius replaced.
pub fn order_scan(
    map: &SetValuedMap,
    base: (f64, f64),
    orders: &[f64],
    radii: &[f64],
    grid: &GridSpec,
    kind: ModulusKind,
    thresholds: &ScanThresholds,
) -> Result<OrderScanReport> {
    if radii.len() < 2 {
        return Err(Error::InvalidParameter("order scan needs at least two radii".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::InvalidParameter("order-scan radii must lie in (0, 1)".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("order-scan radii must be strictly decreasing".into()));
    }
    let mut rows = Vec::with_capacity(orders.len());
    for &q in orders {
        let mut cells = Vec::with_capacity(radii.len());
        let mut truncation_active = false;
        for &r in radii {
            let est = estimate_modulus(map, base, q, &grid.with_radius(r), kind, None)?;
            truncation_active |= est.truncation_active;
            cells.push((r, est.modulus));
        }
        let (verdict, min_decade_growth, total_growth) = classify(&cells, thresholds);
        rows.push(OrderRow {
            order: q,
            cells,
            verdict,
            min_decade_growth,
            total_growth,
            truncation_active,
        });
    }
    let critical_lower = rows
        .iter()
        .filter(|r| r.verdict == Verdict::Bounded)
        .map(|r| r.order)
        .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.max(q))));
    let critical_upper = rows
        .iter()
        .filter(|r| r.verdict == Verdict::BlowUp)
        .map(|r| r.order)
        .fold(None, |acc: Option<f64>, q| Some(acc.map_or(q, |a| a.min(q))));
    Ok(OrderScanReport {
        kind,
        rows,
        critical_lower,
        critical_upper,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn radii() -> Vec<f64> {
        (1..=6).map(|i| 10f64.powi(-i)).collect()
    }

    fn scan(map: &SetValuedMap, orders: &[f64], kind: ModulusKind) -> OrderScanReport {
        let grid = GridSpec::new(0.1, 50, 4).unwrap();
        order_scan(map, (0.0, 0.0), orders, &radii(), &grid, kind, &ScanThresholds::default()).unwrap()
    }

    #[test]
    fn sqrt_abs_critical_order_two() {
        let rep = scan(&catalog::sqrt_abs(), &[1.0, 2.0, 2.5], ModulusKind::Strong);
        assert_eq!(rep.verdict_for(1.0), Some(Verdict::Bounded));
        assert_eq!(rep.verdict_for(2.0), Some(Verdict::Bounded));
        assert_eq!(rep.verdict_for(2.5), Some(Verdict::BlowUp));
        assert_eq!((rep.critical_lower, rep.critical_upper), (Some(2.0), Some(2.5)));
        // ratio |x|^(1 - q/2): 10^(1/4) per radius decade at q = 2.5
        let row = &rep.rows[2];
        assert!((row.min_decade_growth - 10f64.powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn identity_critical_order_one() {
        let rep = scan(&catalog::identity(), &[1.0, 2.0], ModulusKind::Plain);
        assert_eq!(rep.verdict_for(1.0), Some(Verdict::Bounded));
        assert_eq!(rep.verdict_for(2.0), Some(Verdict::BlowUp));
    }

    #[test]
    fn subdiff_sqrt_bounded_at_every_order() {
        let rep = scan(&catalog::subdiff_sqrt(), &[1.0, 2.0, 4.0, 8.0], ModulusKind::Plain);
        assert!(rep.rows.iter().all(|r| r.verdict == Verdict::Bounded));
    }

    #[test]
    fn verdicts_monotone_in_order() {
        for e in catalog::catalog() {
            let rep = scan(&e.map, &[0.5, 1.0, 1.5, 2.0, 3.0], ModulusKind::Strong);
            let mut seen_unbounded = false;
            for row in &rep.rows {
                if row.verdict != Verdict::Bounded {
                    seen_unbounded = true;
                } else {
                    assert!(!seen_unbounded, "{}: bounded at {} after a failure", e.id, row.order);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_radii() {
        let grid = GridSpec::new(0.1, 5, 2).unwrap();
        let m = catalog::identity();
        let t = ScanThresholds::default();
        assert!(order_scan(&m, (0.0, 0.0), &[1.0], &[1.0, 0.1], &grid, ModulusKind::Plain, &t).is_err());
        assert!(order_scan(&m, (0.0, 0.0), &[1.0], &[0.01, 0.1], &grid, ModulusKind::Plain, &t).is_err());
    }

    #[test]
    fn classify_edge_cases() {
        let t = ScanThresholds::default();
        assert_eq!(classify(&[(0.1, 1.0)], &t).0, Verdict::Inconclusive);
        assert_eq!(classify(&[(0.1, 1.0), (0.01, f64::INFINITY)], &t).0, Verdict::BlowUp);
        assert_eq!(classify(&[(0.1, 0.0), (0.01, 0.0), (0.001, 0.0)], &t).0, Verdict::Bounded);
        // grows, but slowly and not steadily
        assert_eq!(
            classify(&[(0.1, 1.0), (0.01, 1.5), (0.001, 1.5), (1e-4, 2.0)], &t).0,
            Verdict::Inconclusive
        );
    }
}
