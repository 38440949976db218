//! Empirical one-sided Hölder seminorms of T(1_D) and S(f), structural bound
//! factors, the linearity study over the bumped-sphere family and normal-ray
//! L^∞ profiles.

pub mod field;
pub mod pairs;
pub mod study;

pub use field::{BoundaryValues, Evaluator, Field, FieldEvaluator, PlainField};
pub use pairs::{
    empirical_seminorm, evaluate_pairs, generate_pairs, holder_scan, summarize, PairConfig, PairPoints, PairSample, Regime,
    RegimeReport,
};
pub use study::{
    bound_factor, density_norms, linear_fit, linearity_study, linf_profile, log_spaced, BoundMode, DensityNorms, LinearityRow,
    LinearityTable, Profile, ProfileClass, StudyQuadrature,
};
