//! Operator schedules `k ↦ B_k` for the quasi-Newton iteration.

use std::fmt;
use std::sync::Arc;

pub type IndexOracle = Arc<dyn Fn(u32) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum OperatorSchedule {
    /// `B_k = g'(x_k)`.
    Newton,
    /// `B_k = B₀`.
    Chord { b0: f64 },
    /// Secant slope of `g` over the last step, starting from `B₀`; a zero step
    /// keeps the previous operator.
    Broyden { b0: f64 },
    /// `B_k` from an oracle; the first iterate carries index `start_index`.
    Explicit {
        label: String,
        start_index: u32,
        oracle: IndexOracle,
    },
}

impl fmt::Debug for OperatorSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Newton => write!(f, "Newton"),
            Self::Chord { b0 } => write!(f, "Chord({b0})"),
            Self::Broyden { b0 } => write!(f, "Broyden({b0})"),
            Self::Explicit { label, start_index, .. } => write!(f, "Explicit({label}, from {start_index})"),
        }
    }
}

/// `n!` as a float; exact for `n ≤ 18`.
fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// `B_k = (2^{-(k+1)!/2} + 2^{-2k!}) / (2^{-k!} − 2^{-(k+1)!})`, which makes
/// `x_k = 2^{-k!}` solve each step of `0 ∈ x² + |x|^{1/2}` exactly.
pub fn example_5_2_operator(k: u32) -> f64 {
    let (a, b) = (factorial(k), factorial(k + 1));
    ((-b / 2.0).exp2() + (-2.0 * a).exp2()) / ((-a).exp2() - (-b).exp2())
}

impl OperatorSchedule {
    /// The explicit schedule `example-5-2`, indexed from `k = 1`.
    pub fn example_5_2() -> Self {
        Self::Explicit {
            label: "example-5-2".into(),
            start_index: 1,
            oracle: Arc::new(example_5_2_operator),
        }
    }

    pub fn start_index(&self) -> u32 {
        match self {
            Self::Explicit { start_index, .. } => *start_index,
            _ => 0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Newton => "newton".into(),
            Self::Chord { .. } => "chord".into(),
            Self::Broyden { .. } => "broyden".into(),
            Self::Explicit { label, .. } => label.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_operators() {
        assert_eq!(example_5_2_operator(1), 3.0);
        assert!((example_5_2_operator(2) - 0.8).abs() < 1e-15);
        let b3 = example_5_2_operator(3);
        assert!(b3 > 0.0 && b3 <= 0.04);
        // decreasing from k = 1 on
        let bs: Vec<f64> = (1..=5).map(example_5_2_operator).collect();
        assert!(bs.windows(2).all(|w| w[1] < w[0]));
        assert!(bs[4] > 0.0 && bs[4].is_finite());
    }

    #[test]
    fn start_index() {
        assert_eq!(OperatorSchedule::example_5_2().start_index(), 1);
        assert_eq!(OperatorSchedule::Newton.start_index(), 0);
    }
}
