//! Experiment specifications: one TOML document per experiment.
//!
//! ```toml
//! kind = "estimate"
//! map = "sqrt-abs"
//! q = 2.0
//! radius = 1.0
//! modulus = "strong"
//!
//! [grid]
//! points_per_decade = 200
//! decades = 6
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use subreg_core::interval::{ClosedInterval, IntervalUnion};
use subreg_core::maps::{check_graph_consistency, SetValuedMap, SmoothMap};
use subreg_core::solver::{lookup_equation, GeneralizedEquation, OperatorSchedule};
use subreg_core::{catalog, GridSpec};

/// Spec errors carry the offending field so messages point at a location.
#[derive(Debug, thiserror::Error)]
pub enum SpecError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("field `{field}`: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> SpecError {
    SpecError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Estimate,
    OrderScan,
    GrowthCheck,
    MrProbe,
    PerturbCheck,
    ParamCheck,
    Solve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Modulus {
    Plain,
    #[default]
    Strong,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthVariant {
    Lower,
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// One piece of an inline map on `[lo, hi]`: either the single value
/// `slope·x + intercept` or the constant set `[set[0], set[1]]`. Where pieces
/// overlap the map takes the union of their values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    #[serde(default)]
    pub slope: Option<f64>,
    #[serde(default)]
    pub intercept: Option<f64>,
    #[serde(default)]
    pub set: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineMap {
    pub label: String,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapRef {
    Catalog(String),
    Inline(InlineMap),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InlineEquation {
    /// Coefficients of `g` in increasing degree.
    pub g: Vec<f64>,
    pub map: MapRef,
    #[serde(default)]
    pub solution: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EquationRef {
    Catalog(String),
    Inline(InlineEquation),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    #[serde(default = "default_ppd")]
    pub points_per_decade: u32,
    #[serde(default = "default_decades")]
    pub decades: u32,
}

fn default_ppd() -> u32 {
    100
}

fn default_decades() -> u32 {
    6
}

impl Default for GridParams {
    fn default() -> Self {
        Self {
            points_per_decade: default_ppd(),
            decades: default_decades(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub map: Option<MapRef>,
    #[serde(default)]
    pub equation: Option<EquationRef>,
    /// `(x̄, ȳ)`; defaults to the catalog base point, or `(0, 0)`.
    #[serde(default)]
    pub base: Option<[f64; 2]>,
    #[serde(default)]
    pub q: Option<f64>,
    #[serde(default)]
    pub q_list: Option<Vec<f64>>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub modulus: Option<Modulus>,
    #[serde(default)]
    pub grid: GridParams,
    /// Bracketing window for preimages of maps without an inverse oracle.
    #[serde(default)]
    pub search_window: Option<[f64; 2]>,
    #[serde(default)]
    pub variant: Option<GrowthVariant>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub eta: Option<f64>,
    #[serde(default)]
    pub target_subgradient: Option<f64>,
    /// Coefficients of the smooth perturbation `g`, increasing degree.
    #[serde(default)]
    pub perturbation: Option<Vec<f64>>,
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default)]
    pub u_radius: Option<f64>,
    #[serde(default)]
    pub u_count: Option<usize>,
    #[serde(default)]
    pub schedule: Option<String>,
    #[serde(default)]
    pub b0: Option<f64>,
    #[serde(default)]
    pub x0: Option<f64>,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentSpec {
    pub fn from_toml(text: &str, origin: &str) -> Result<Self, SpecError> {
        toml::from_str(text).map_err(|e| SpecError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, SpecError> {
        let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text, &path.display().to_string())
    }

    pub fn require<T: Copy>(&self, field: &str, value: Option<T>) -> Result<T, SpecError> {
        value.ok_or_else(|| invalid(field, format!("required for kind `{}`", self.kind_name())))
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ExperimentKind::Estimate => "estimate",
            ExperimentKind::OrderScan => "order-scan",
            ExperimentKind::GrowthCheck => "growth-check",
            ExperimentKind::MrProbe => "mr-probe",
            ExperimentKind::PerturbCheck => "perturb-check",
            ExperimentKind::ParamCheck => "param-check",
            ExperimentKind::Solve => "solve",
        }
    }

    pub fn positive(&self, field: &str, value: Option<f64>) -> Result<f64, SpecError> {
        let v = self.require(field, value)?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(field, format!("must be positive and finite, got {v}")));
        }
        Ok(v)
    }

    pub fn grid(&self, radius: f64) -> Result<GridSpec, SpecError> {
        GridSpec::new(radius, self.grid.points_per_decade, self.grid.decades)
            .map_err(|e| invalid("grid", e.to_string()))
    }

    pub fn search_window(&self) -> Result<Option<ClosedInterval>, SpecError> {
        self.search_window
            .map(|[lo, hi]| interval("search_window", lo, hi))
            .transpose()
    }

    /// The referenced map, its base point and, for catalog entries, the
    /// catalog record.
    pub fn resolve_map(&self) -> Result<ResolvedMap, SpecError> {
        let map_ref = self
            .map
            .as_ref()
            .ok_or_else(|| invalid("map", format!("required for kind `{}`", self.kind_name())))?;
        let (map, entry) = resolve_map_ref(map_ref, "map", self.search_window()?)?;
        let base = match (self.base, &entry) {
            (Some([x, y]), _) => (x, y),
            (None, Some(e)) => e.base_point,
            (None, None) => (0.0, 0.0),
        };
        if !map.in_domain(base.0) || map.eval_or_empty(base.0).distance(base.1) != 0.0 {
            return Err(invalid("base", format!("({}, {}) is not in the graph of `{}`", base.0, base.1, map.label())));
        }
        Ok(ResolvedMap { map, entry, base })
    }

    pub fn resolve_equation(&self) -> Result<GeneralizedEquation, SpecError> {
        let eq_ref = self
            .equation
            .as_ref()
            .ok_or_else(|| invalid("equation", "required for kind `solve`"))?;
        match eq_ref {
            EquationRef::Catalog(id) => lookup_equation(id).map_err(|e| invalid("equation", e.to_string())),
            EquationRef::Inline(inline) => {
                if inline.g.is_empty() || inline.g.iter().any(|c| !c.is_finite()) {
                    return Err(invalid("equation.g", "needs finite coefficients"));
                }
                let (map, _) = resolve_map_ref(&inline.map, "equation.map", None)?;
                let eq = GeneralizedEquation::new("inline", SmoothMap::polynomial(inline.g.clone()), map);
                match inline.solution {
                    Some(x) => eq.with_solution(x).map_err(|e| invalid("equation.solution", e.to_string())),
                    None => Ok(eq),
                }
            }
        }
    }

    pub fn resolve_schedule(&self) -> Result<OperatorSchedule, SpecError> {
        let name = self.schedule.as_deref().unwrap_or("newton");
        let b0 = || self.require("b0", self.b0);
        Ok(match name {
            "newton" => OperatorSchedule::Newton,
            "chord" => OperatorSchedule::Chord { b0: b0()? },
            "broyden" => OperatorSchedule::Broyden { b0: b0()? },
            "example-5-2" => OperatorSchedule::example_5_2(),
            other => return Err(invalid("schedule", format!("unknown schedule `{other}`"))),
        })
    }

    pub fn perturbation(&self) -> Result<SmoothMap, SpecError> {
        let coeffs = self
            .perturbation
            .clone()
            .ok_or_else(|| invalid("perturbation", format!("required for kind `{}`", self.kind_name())))?;
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("perturbation", "needs finite coefficients"));
        }
        Ok(SmoothMap::polynomial(coeffs))
    }

    pub fn window(&self, default: [f64; 2]) -> Result<ClosedInterval, SpecError> {
        let [lo, hi] = self.window.unwrap_or(default);
        let w = interval("window", lo, hi)?;
        if !w.is_bounded() || w.is_singleton() {
            return Err(invalid("window", "must be bounded with lo < hi"));
        }
        Ok(w)
    }

    /// Output stem: the explicit name, else the spec's kind.
    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.kind_name().to_string())
    }
}

fn interval(field: &str, lo: f64, hi: f64) -> Result<ClosedInterval, SpecError> {
    ClosedInterval::new(lo, hi).map_err(|e| invalid(field, e.to_string()))
}

pub struct ResolvedMap {
    pub map: SetValuedMap,
    pub entry: Option<catalog::CatalogEntry>,
    pub base: (f64, f64),
}

fn resolve_map_ref(
    map_ref: &MapRef,
    field: &str,
    search_window: Option<ClosedInterval>,
) -> Result<(SetValuedMap, Option<catalog::CatalogEntry>), SpecError> {
    match map_ref {
        MapRef::Catalog(id) => {
            let e = catalog::lookup(id).map_err(|e| invalid(field, e.to_string()))?;
            Ok((e.map.clone(), Some(e)))
        }
        MapRef::Inline(inline) => Ok((build_inline(inline, field, search_window)?, None)),
    }
}

/// Cells used to validate inline maps against their bracketed preimages.
const VALIDATION_CELLS: usize = 512;

pub fn build_inline(
    inline: &InlineMap,
    field: &str,
    search_window: Option<ClosedInterval>,
) -> Result<SetValuedMap, SpecError> {
    if inline.pieces.is_empty() {
        return Err(invalid(&format!("{field}.pieces"), "needs at least one piece"));
    }
    let mut domain_lo = f64::INFINITY;
    let mut domain_hi = f64::NEG_INFINITY;
    for (i, p) in inline.pieces.iter().enumerate() {
        let at = format!("{field}.pieces[{i}]");
        interval(&at, p.lo, p.hi)?;
        match (p.slope.is_some() || p.intercept.is_some(), p.set) {
            (true, None) => {
                if !(p.slope.unwrap_or(0.0).is_finite() && p.intercept.unwrap_or(0.0).is_finite()) {
                    return Err(invalid(&at, "slope and intercept must be finite"));
                }
            }
            (false, Some([a, b])) => {
                interval(&format!("{at}.set"), a, b)?;
            }
            _ => return Err(invalid(&at, "give either slope/intercept or set")),
        }
        domain_lo = domain_lo.min(p.lo);
        domain_hi = domain_hi.max(p.hi);
    }
    let pieces = inline.pieces.clone();
    let map = SetValuedMap::new(inline.label.clone(), interval(field, domain_lo, domain_hi)?, move |x| {
        let parts = pieces
            .iter()
            .filter(|p| p.lo <= x && x <= p.hi)
            .map(|p| match p.set {
                Some([a, b]) => ClosedInterval::new(a, b).expect("validated"),
                None => ClosedInterval::point(p.slope.unwrap_or(0.0) * x + p.intercept.unwrap_or(0.0)),
            })
            .collect();
        IntervalUnion::normalize(parts)
    });
    // sample the graph: no holes inside the domain hull, and when a search
    // window is given, bracketed preimages must recover the sampled points
    let lo = domain_lo.max(-1e3);
    let hi = domain_hi.min(1e3);
    let samples: Vec<f64> = (0..=64).map(|i| lo + (hi - lo) * (i as f64 / 64.0)).collect();
    if let Some(x) = samples.iter().copied().find(|&x| map.eval_or_empty(x).is_empty()) {
        return Err(invalid(field, format!("pieces leave a hole at x = {x}")));
    }
    if let Some(w) = search_window {
        let cell = w.width() / VALIDATION_CELLS as f64;
        for &x in samples.iter().filter(|&&x| w.contains(x)) {
            for y in map.eval_or_empty(x).finite_endpoints() {
                let pre = map
                    .inverse_eval_windowed(y, Some(w), VALIDATION_CELLS)
                    .map_err(|e| invalid(field, e.to_string()))?;
                if pre.set.distance(x) > cell {
                    return Err(invalid(field, format!("graph check failed at ({x}, {y})")));
                }
            }
        }
    }
    Ok(map)
}

/// Catalog maps pass the same sampled graph check.
pub fn validate_catalog_map(map: &SetValuedMap) -> Result<(), SpecError> {
    let xs: Vec<f64> = (0..=64).map(|i| -2.0 + 4.0 * (i as f64 / 64.0)).collect();
    match check_graph_consistency(map, &xs, 1e-12) {
        Ok(None) => Ok(()),
        Ok(Some((x, y))) => Err(invalid("map", format!("graph check failed at ({x}, {y})"))),
        Err(e) => Err(invalid("map", e.to_string())),
    }
}
