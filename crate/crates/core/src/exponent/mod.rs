//! Error exponents: channel coding with constant-composition codes, its
//! primal brute-force check, and joint source-channel coding.

pub mod channel;
pub mod jscc;
pub mod primal;

pub use channel::{
    e0_iid, e0_ml, e0_objective, exponent_curve, optimize_r, optimize_r_with, random_coding_exponent, u_closed_form,
    u_objective, u_star, E0Params, ExponentCurve, ExponentPoint, OptimizerConfig, OptimizerDiagnostics, ROptimum,
    RVector, RandomCodingExponent,
};
pub use jscc::{
    class_exponent, class_log_mass_tilted, default_partition, jscc_exponent_bound, sweep_class_compositions,
    ClassExponent, JsccBound, JsccDesign, Partition, SourceSpec,
};
pub use primal::{primal_exponent_oracle, PrimalResult};
