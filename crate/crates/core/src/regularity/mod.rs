//! Estimators and checkers for higher-order regularity of set-valued maps.

pub mod estimate;
pub mod growth;
pub mod perturb;
pub mod probe;
pub mod scan;

pub use estimate::{
    estimate_modulus, estimate_strong_subreg_modulus, estimate_subreg_modulus, estimate_subreg_modulus_in, ratio,
    ratio_table, ModulusKind, RatioSample, RegularityEstimate,
};
pub use growth::{
    growth_check_lower, growth_check_pairwise, BallNorm, GraphPair, GraphSampler, GrowthReport, GrowthSetup,
    PairwiseReport,
};
pub use perturb::{
    guaranteed_perturbation_radius, parameterized_check, perturbation_bound_check, smooth_perturbation_equivalence,
    EquivalenceReport, ParameterSweep, ParameterizedReport, PerturbationParams, PerturbationReport,
};
pub use probe::{metric_regularity_probe, staircase_sequences, ProbeGrid, ProbeReport, StaircaseTerm};
pub use scan::{classify, order_scan, OrderRow, OrderScanReport, ScanThresholds, Verdict};
