//! Quasi-Newton iterations for generalized equations and their rate analysis.

pub mod equation;
pub mod iterate;
pub mod rate;
pub mod schedule;
pub mod subproblem;

pub use equation::{lookup_equation, GeneralizedEquation, EQUATION_IDS};
pub use iterate::{solve, IterationTrace, SolverConfig, TraceStatus};
pub use rate::{rate_analysis, rate_analysis_tail, RateReport, DEFAULT_TAIL};
pub use schedule::{example_5_2_operator, OperatorSchedule};
pub use subproblem::{subproblem_solve, SubproblemConfig, SubproblemSolution};
