//! Built-in maps with hand-derived values and preimages.
//!
//! | id | map |
//! |----|-----|
//! | `sqrt-abs` | `x ↦ {|x|^{1/2}}` |
//! | `Q-map` | the staircase `Q` with cube-root-of-two breakpoints |
//! | `S-map` | the solution map `S(x) = Q⁻¹(−x)` of `0 ∈ x + Q(y)` |
//! | `subdiff-plateau` | `∂f` for `f = max(|x|, 1)` |
//! | `subdiff-sqrt` | `∂f` for `f = |x|^{1/2}`, with `∂f(0) = ℝ` |
//! | `identity` | `x ↦ {x}` |
//! | `zero-map` | `x ↦ {0}` |
//! | `halfline-normal-cone` | `N_{[0,∞)}` |

use std::sync::Arc;

use crate::dyadic::exact_log2;
use crate::error::{Error, Result};
use crate::interval::{ClosedInterval, IntervalUnion};
use crate::maps::{RealOracle, SetValuedMap};

/// Branch index cutoff for `Q-map` and `S-map`.
pub const Q_K_MAX: u32 = 120;

/// Relative tolerance used to snap `Q-map` inputs onto breakpoints.
pub const Q_BREAKPOINT_SNAP: f64 = 1e-12;

pub const CATALOG_IDS: [&str; 8] = [
    "sqrt-abs",
    "Q-map",
    "S-map",
    "subdiff-plateau",
    "subdiff-sqrt",
    "identity",
    "zero-map",
    "halfline-normal-cone",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulusBound {
    pub eta: f64,
    pub radius: f64,
}

/// A catalog map together with its reference point and known facts.
#[derive(Clone)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub map: SetValuedMap,
    /// `(x̄, ȳ)` with `ȳ ∈ F(x̄)`.
    pub base_point: (f64, f64),
    pub known_order: Option<f64>,
    pub known_modulus_bound: Option<ModulusBound>,
    /// For subdifferential maps, the function `f` with `F = ∂f`.
    pub potential: Option<RealOracle>,
    pub notes: &'static str,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("id", &self.id)
            .field("map", &self.map)
            .field("base_point", &self.base_point)
            .field("known_order", &self.known_order)
            .field("known_modulus_bound", &self.known_modulus_bound)
            .field("has_potential", &self.potential.is_some())
            .finish()
    }
}

pub fn catalog() -> Vec<CatalogEntry> {
    CATALOG_IDS
        .iter()
        .map(|id| lookup(id).expect("catalog ids resolve"))
        .collect()
}

pub fn lookup(id: &str) -> Result<CatalogEntry> {
    let entry = match id {
        "sqrt-abs" => CatalogEntry {
            id: "sqrt-abs",
            map: sqrt_abs(),
            base_point: (0.0, 0.0),
            known_order: Some(2.0),
            known_modulus_bound: Some(ModulusBound { eta: 1.0, radius: 1.0 }),
            potential: None,
            notes: "single-valued |x|^(1/2); strongly q-subregular at (0,0) for q in (0,2] with eta = gamma = 1",
        },
        "Q-map" => CatalogEntry {
            id: "Q-map",
            map: q_map(),
            base_point: (0.0, 0.0),
            known_order: None,
            known_modulus_bound: None,
            potential: None,
            notes: "odd staircase; breakpoints (2^(1/3))^-k carry [2^-(k+1), 2^-k]; not Lipschitz-like around (0,0); truncated to {0} for |y| <= (2^(1/3))^-120",
        },
        "S-map" => CatalogEntry {
            id: "S-map",
            map: s_map(),
            base_point: (0.0, 0.0),
            known_order: Some(2.0),
            known_modulus_bound: Some(ModulusBound { eta: 1.0, radius: 1.0 }),
            potential: None,
            notes: "solution map S(x) = Q^-1(-x) of 0 in x + Q(y); strongly 2-subregular but not metrically regular at (0,0)",
        },
        "subdiff-plateau" => CatalogEntry {
            id: "subdiff-plateau",
            map: subdiff_plateau(),
            base_point: (0.0, 0.0),
            known_order: Some(2.0),
            known_modulus_bound: None,
            potential: Some(Arc::new(plateau_potential)),
            notes: "subdifferential of f = -x (x<-1), 1 on [-1,1], x (x>1); (df)^-1(0) stored as the closure [-1,1]",
        },
        "subdiff-sqrt" => CatalogEntry {
            id: "subdiff-sqrt",
            map: subdiff_sqrt(),
            base_point: (0.0, 0.0),
            known_order: None,
            known_modulus_bound: None,
            potential: Some(Arc::new(|x: f64| x.abs().sqrt())),
            notes: "subdifferential of |x|^(1/2); df(0) = R; q-subregular at (0,0) for every q > 0",
        },
        "identity" => CatalogEntry {
            id: "identity",
            map: identity(),
            base_point: (0.0, 0.0),
            known_order: Some(1.0),
            known_modulus_bound: Some(ModulusBound { eta: 1.0, radius: f64::INFINITY }),
            potential: Some(Arc::new(|x: f64| 0.5 * x * x)),
            notes: "x -> {x}, the subdifferential of x^2/2",
        },
        "zero-map" => CatalogEntry {
            id: "zero-map",
            map: zero_map(),
            base_point: (0.0, 0.0),
            known_order: None,
            known_modulus_bound: None,
            potential: Some(Arc::new(|_| 0.0)),
            notes: "F = {0}; every point solves, so strong subregularity fails at every order",
        },
        "halfline-normal-cone" => CatalogEntry {
            id: "halfline-normal-cone",
            map: halfline_normal_cone(),
            base_point: (0.0, 0.0),
            known_order: None,
            known_modulus_bound: None,
            potential: Some(Arc::new(|x: f64| if x >= 0.0 { 0.0 } else { f64::INFINITY })),
            notes: "normal cone to [0, inf): {0} for x > 0, (-inf, 0] at 0, empty for x < 0",
        },
        other => return Err(Error::UnknownCatalogId(other.to_string())),
    };
    Ok(entry)
}

pub fn sqrt_abs() -> SetValuedMap {
    SetValuedMap::new("sqrt-abs", ClosedInterval::whole_line(), |x| {
        IntervalUnion::singleton(x.abs().sqrt())
    })
    .with_inverse(|y| {
        if y > 0.0 {
            let x = y * y;
            IntervalUnion::normalize(vec![ClosedInterval::point(-x), ClosedInterval::point(x)])
        } else if y == 0.0 {
            IntervalUnion::singleton(0.0)
        } else {
            IntervalUnion::empty()
        }
    })
}

pub fn identity() -> SetValuedMap {
    SetValuedMap::new("identity", ClosedInterval::whole_line(), IntervalUnion::singleton)
        .with_inverse(IntervalUnion::singleton)
}

pub fn zero_map() -> SetValuedMap {
    SetValuedMap::new("zero-map", ClosedInterval::whole_line(), |_| {
        IntervalUnion::singleton(0.0)
    })
    .with_inverse(|y| {
        if y == 0.0 {
            IntervalUnion::whole_line()
        } else {
            IntervalUnion::empty()
        }
    })
}

pub fn halfline_normal_cone() -> SetValuedMap {
    let domain = ClosedInterval::new(0.0, f64::INFINITY).expect("valid");
    SetValuedMap::new("halfline-normal-cone", domain, |x| {
        if x > 0.0 {
            IntervalUnion::singleton(0.0)
        } else {
            IntervalUnion::interval(f64::NEG_INFINITY, 0.0).expect("valid")
        }
    })
    .with_inverse(|y| {
        if y == 0.0 {
            IntervalUnion::interval(0.0, f64::INFINITY).expect("valid")
        } else if y < 0.0 {
            IntervalUnion::singleton(0.0)
        } else {
            IntervalUnion::empty()
        }
    })
}

fn plateau_potential(x: f64) -> f64 {
    if x < -1.0 {
        -x
    } else if x <= 1.0 {
        1.0
    } else {
        x
    }
}

pub fn subdiff_plateau() -> SetValuedMap {
    SetValuedMap::new("subdiff-plateau", ClosedInterval::whole_line(), |x| {
        let iv = |lo, hi| IntervalUnion::interval(lo, hi).expect("valid");
        if x < -1.0 {
            IntervalUnion::singleton(-1.0)
        } else if x == -1.0 {
            iv(-1.0, 0.0)
        } else if x < 1.0 {
            IntervalUnion::singleton(0.0)
        } else if x == 1.0 {
            iv(0.0, 1.0)
        } else {
            IntervalUnion::singleton(1.0)
        }
    })
    .with_inverse(|v| {
        let iv = |lo, hi| IntervalUnion::interval(lo, hi).expect("valid");
        if v == -1.0 {
            iv(f64::NEG_INFINITY, -1.0)
        } else if v > -1.0 && v < 0.0 {
            IntervalUnion::singleton(-1.0)
        } else if v == 0.0 {
            iv(-1.0, 1.0)
        } else if v > 0.0 && v < 1.0 {
            IntervalUnion::singleton(1.0)
        } else if v == 1.0 {
            iv(1.0, f64::INFINITY)
        } else {
            IntervalUnion::empty()
        }
    })
}

/// `f'(x) = sign(x) / (2 √|x|)`, computed as `½·√(1/|x|)` so that dyadic
/// inputs give correctly rounded outputs.
pub fn sqrt_derivative(x: f64) -> f64 {
    let v = 0.5 * x.abs().recip().sqrt();
    if x < 0.0 {
        -v
    } else {
        v
    }
}

pub fn subdiff_sqrt() -> SetValuedMap {
    SetValuedMap::new("subdiff-sqrt", ClosedInterval::whole_line(), |x| {
        if x == 0.0 {
            IntervalUnion::whole_line()
        } else {
            IntervalUnion::singleton(sqrt_derivative(x))
        }
    })
    .with_inverse(|v| {
        if v == 0.0 {
            IntervalUnion::singleton(0.0)
        } else {
            let x = 0.25 / (v * v);
            let x = if v > 0.0 { x } else { -x };
            IntervalUnion::normalize(vec![ClosedInterval::point(0.0), ClosedInterval::point(x)])
        }
    })
}

/// Branch structure of the staircase map `Q`.
///
/// Breakpoints sit at `|y| = b^{-k}` with `b = 2^{log2_base}`; the default
/// `log2_base = 1/3` gives the cube root of two. Branches `k = 0..k_max-1` are
/// exact; `0 < |y| ≤ b^{-k_max}` evaluates to `{0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QStaircase {
    pub log2_base: f64,
    pub k_max: u32,
}

impl Default for QStaircase {
    fn default() -> Self {
        Self {
            log2_base: 1.0 / 3.0,
            k_max: Q_K_MAX,
        }
    }
}

/// Position of `|y|` within the staircase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    /// `|y| = b^{-k}`.
    Breakpoint(u32),
    /// `b^{-(k+1)} < |y| < b^{-k}`.
    Open(u32),
    Truncated,
    OutOfRange,
}

impl QStaircase {
    /// `b^{-k}`.
    pub fn breakpoint(&self, k: u32) -> f64 {
        (-(k as f64) * self.log2_base).exp2()
    }

    fn branch(&self, abs_y: f64) -> Branch {
        let t = -abs_y.log2() / self.log2_base;
        let nearest = t.round();
        let t = if (t - nearest).abs() <= Q_BREAKPOINT_SNAP * nearest.abs().max(1.0) {
            nearest
        } else {
            t
        };
        if t < 0.0 {
            return Branch::OutOfRange;
        }
        if t >= self.k_max as f64 {
            return Branch::Truncated;
        }
        let k = t.floor() as u32;
        if t == t.floor() {
            Branch::Breakpoint(k)
        } else {
            Branch::Open(k)
        }
    }

    fn eval_positive(&self, y: f64) -> IntervalUnion {
        match self.branch(y) {
            Branch::Breakpoint(k) => {
                let hi = (-(k as f64)).exp2();
                IntervalUnion::interval(0.5 * hi, hi).expect("valid")
            }
            Branch::Open(k) => IntervalUnion::singleton((-(k as f64) - 1.0).exp2()),
            Branch::Truncated => IntervalUnion::singleton(0.0),
            Branch::OutOfRange => IntervalUnion::empty(),
        }
    }

    /// `Q(y)`.
    pub fn eval(&self, y: f64) -> IntervalUnion {
        if y == 0.0 {
            IntervalUnion::singleton(0.0)
        } else if y > 0.0 {
            self.eval_positive(y)
        } else {
            self.eval_positive(-y).negate()
        }
    }

    fn preimage_positive(&self, v: f64) -> IntervalUnion {
        if v > 1.0 {
            return IntervalUnion::empty();
        }
        let k_max = self.k_max as i64;
        match exact_log2(v) {
            Some(0) => IntervalUnion::singleton(1.0),
            Some(e) => {
                // v = 2^{-m}: endpoint of branch m-1, lower end of branch m-2
                let m = -(e as i64);
                if m > k_max {
                    IntervalUnion::empty()
                } else {
                    let m = m as u32;
                    IntervalUnion::interval(self.breakpoint(m), self.breakpoint(m - 1))
                        .expect("valid")
                }
            }
            None => {
                let k = (-v.log2()).floor() as i64;
                if k >= k_max {
                    IntervalUnion::empty()
                } else {
                    IntervalUnion::singleton(self.breakpoint(k as u32))
                }
            }
        }
    }

    /// `Q⁻¹(v)`.
    pub fn preimage(&self, v: f64) -> IntervalUnion {
        if v == 0.0 {
            let r = self.breakpoint(self.k_max);
            IntervalUnion::interval(-r, r).expect("valid")
        } else if v > 0.0 {
            self.preimage_positive(v)
        } else {
            self.preimage_positive(-v).negate()
        }
    }
}

pub fn q_map() -> SetValuedMap {
    q_map_with(QStaircase::default())
}

pub fn q_map_with(stairs: QStaircase) -> SetValuedMap {
    let r = stairs.breakpoint(stairs.k_max);
    SetValuedMap::new("Q-map", ClosedInterval::new(-1.0, 1.0).expect("valid"), move |y| {
        stairs.eval(y)
    })
    .with_inverse(move |v| stairs.preimage(v))
    .with_truncation_zone(ClosedInterval::new(-r, r).expect("valid"))
}

pub fn s_map() -> SetValuedMap {
    s_map_with(QStaircase::default())
}

/// `S(x) = Q⁻¹(−x)`, with `S⁻¹(y) = −Q(y)`.
pub fn s_map_with(stairs: QStaircase) -> SetValuedMap {
    let r = (-(stairs.k_max as f64)).exp2();
    SetValuedMap::new("S-map", ClosedInterval::new(-1.0, 1.0).expect("valid"), move |x| {
        stairs.preimage(-x)
    })
    .with_inverse(move |y| stairs.eval(y).negate())
    .with_truncation_zone(ClosedInterval::new(-r, r).expect("valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::check_graph_consistency;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pairs(u: &IntervalUnion) -> Vec<(f64, f64)> {
        u.parts().iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    #[test]
    fn q_map_values() {
        let q = q_map();
        assert_eq!(pairs(&q.eval(1.0).unwrap()), vec![(0.5, 1.0)]);
        assert_eq!(pairs(&q.eval(0.0).unwrap()), vec![(0.0, 0.0)]);
        // y strictly inside (b^-3, b^-2) gives 2^-3
        let y = 0.5 * (2f64.powf(-1.0) + 2f64.powf(-2.0 / 3.0));
        assert_eq!(pairs(&q.eval(y).unwrap()), vec![(0.125, 0.125)]);
        // breakpoint b^-3 = 1/2 gives [2^-4, 2^-3]
        assert_eq!(pairs(&q.eval(0.5).unwrap()), vec![(0.0625, 0.125)]);
        assert!(q.eval(1.5).is_err());
    }

    #[test]
    fn q_map_breakpoints_snap() {
        let stairs = QStaircase::default();
        for k in 0..60 {
            let y = stairs.breakpoint(k);
            let v = stairs.eval(y);
            let hi = 2f64.powi(-(k as i32));
            assert_eq!(pairs(&v), vec![(0.5 * hi, hi)], "k = {k}");
        }
    }

    #[test]
    fn q_map_truncation() {
        let stairs = QStaircase::default();
        let tiny = stairs.breakpoint(Q_K_MAX) * 0.5;
        assert_eq!(stairs.eval(tiny), IntervalUnion::singleton(0.0));
        assert!(q_map().is_truncated_at(tiny));
        assert!(!q_map().is_truncated_at(0.01));
    }

    #[test]
    fn q_map_is_odd() {
        let q = q_map();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let y: f64 = rng.gen_range(-1.0..1.0);
            assert_eq!(q.eval(-y).unwrap(), q.eval(y).unwrap().negate());
        }
    }

    #[test]
    fn subdiff_plateau_values() {
        let m = subdiff_plateau();
        assert_eq!(pairs(&m.eval(1.0).unwrap()), vec![(0.0, 1.0)]);
        assert_eq!(pairs(&m.inverse_eval(0.0).unwrap()), vec![(-1.0, 1.0)]);
    }

    #[test]
    fn subdiff_sqrt_values() {
        let m = subdiff_sqrt();
        assert_eq!(m.eval(0.25).unwrap(), IntervalUnion::singleton(1.0));
        assert_eq!(m.inverse_eval(0.0).unwrap(), IntervalUnion::singleton(0.0));
        assert_eq!(m.eval(0.0).unwrap(), IntervalUnion::whole_line());
    }

    #[test]
    fn subdiff_sqrt_blow_up_on_dyadics() {
        let m = subdiff_sqrt();
        for j in 0..200 {
            let x = 2f64.powi(-j);
            let expected = 2f64.powf(j as f64 / 2.0 - 1.0);
            assert_eq!(m.eval(x).unwrap(), IntervalUnion::singleton(expected), "j = {j}");
        }
    }

    #[test]
    fn identity_and_zero_map() {
        assert_eq!(identity().inverse_eval(3.0).unwrap(), IntervalUnion::singleton(3.0));
        let z = lookup("zero-map").unwrap();
        for x in [-5.0, 0.0, 1e-9, 42.0] {
            assert_eq!(z.map.eval(x).unwrap(), IntervalUnion::singleton(0.0));
        }
    }

    #[test]
    fn sqrt_abs_entry() {
        let e = lookup("sqrt-abs").unwrap();
        assert_eq!(e.base_point, (0.0, 0.0));
        assert_eq!(e.known_order, Some(2.0));
        assert_eq!(e.known_modulus_bound, Some(ModulusBound { eta: 1.0, radius: 1.0 }));
    }

    #[test]
    fn unknown_id() {
        assert!(matches!(lookup("nope"), Err(Error::UnknownCatalogId(_))));
    }

    #[test]
    fn base_points_lie_in_graph() {
        for e in catalog() {
            let (x, y) = e.base_point;
            assert_eq!(e.map.eval(x).unwrap().distance(y), 0.0, "{}", e.id);
        }
    }

    #[test]
    fn graph_symmetry_for_all_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for e in catalog() {
            let dom = e.map.domain();
            let (lo, hi) = (dom.lo().max(-3.0), dom.hi().min(3.0));
            let mut xs: Vec<f64> = (0..200).map(|_| rng.gen_range(lo..hi)).collect();
            xs.extend([0.0, -1.0, 1.0, 0.5, -0.5]);
            assert_eq!(check_graph_consistency(&e.map, &xs, 1e-12).unwrap(), None, "{}", e.id);
        }
    }
}
