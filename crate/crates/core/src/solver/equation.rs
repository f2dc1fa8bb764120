//! Generalized equations `0 ∈ g(x) + F(x)`.

use crate::catalog;
use crate::error::{Error, Result};
use crate::maps::{SetValuedMap, SmoothMap};

/// Largest residual accepted for a declared solution.
pub const SOLUTION_TOL: f64 = 1e-12;

pub const EQUATION_IDS: [&str; 3] = ["example-5-2", "newton-quadratic", "halfline-complementarity"];

#[derive(Debug, Clone)]
pub struct GeneralizedEquation {
    pub label: String,
    pub g: SmoothMap,
    pub map: SetValuedMap,
    pub solution: Option<f64>,
}

impl GeneralizedEquation {
    pub fn new(label: impl Into<String>, g: SmoothMap, map: SetValuedMap) -> Self {
        Self {
            label: label.into(),
            g,
            map,
            solution: None,
        }
    }

    /// Declares `x̄` as a solution; rejected unless its residual is at most
    /// [`SOLUTION_TOL`].
    pub fn with_solution(mut self, x_bar: f64) -> Result<Self> {
        let r = self.residual(x_bar);
        if !(r <= SOLUTION_TOL) {
            return Err(Error::InvalidParameter(format!(
                "{x_bar} does not solve `{}` (residual {r})",
                self.label
            )));
        }
        self.solution = Some(x_bar);
        Ok(self)
    }

    /// `d(0; g(x) + F(x))`, `+∞` outside the domain of `F`.
    pub fn residual(&self, x: f64) -> f64 {
        self.map.eval_or_empty(x).distance(-self.g.value(x))
    }
}

/// Named equations with a known solution.
pub fn lookup_equation(id: &str) -> Result<GeneralizedEquation> {
    let eq = match id {
        // x² + |x|^{1/2} ∋ 0
        "example-5-2" => GeneralizedEquation::new(id, SmoothMap::polynomial(vec![0.0, 0.0, 1.0]), catalog::sqrt_abs()),
        "newton-quadratic" => {
            GeneralizedEquation::new(id, SmoothMap::polynomial(vec![-1.0, 0.0, 1.0]), catalog::zero_map())
        }
        "halfline-complementarity" => {
            GeneralizedEquation::new(id, SmoothMap::polynomial(vec![-2.0, 1.0]), catalog::halfline_normal_cone())
        }
        other => return Err(Error::UnknownCatalogId(other.to_string())),
    };
    let x_bar = match id {
        "example-5-2" => 0.0,
        "newton-quadratic" => 1.0,
        _ => 2.0,
    };
    eq.with_solution(x_bar)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_equations_resolve() {
        for id in EQUATION_IDS {
            let eq = lookup_equation(id).unwrap();
            assert_eq!(eq.residual(eq.solution.unwrap()), 0.0, "{id}");
        }
        assert!(lookup_equation("nope").is_err());
    }

    #[test]
    fn residuals() {
        let eq = lookup_equation("halfline-complementarity").unwrap();
        // g(0) = −2 and N(0) = (−∞, 0] contains 2? no: d(2; (−∞, 0]) = 2
        assert_eq!(eq.residual(0.0), 2.0);
        assert_eq!(eq.residual(-1.0), f64::INFINITY);
        let eq = lookup_equation("example-5-2").unwrap();
        assert_eq!(eq.residual(0.25), 0.5625);
        assert!(eq.clone().with_solution(0.5).is_err());
    }
}
