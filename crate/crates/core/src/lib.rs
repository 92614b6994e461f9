//! Maximal-growth matrices for Gaussian elimination with partial pivoting,
//! exact formulas for entrywise-perturbed last pivots, and the associated
//! bounds and experiments.

pub mod bounds;
pub mod elimination;
pub mod error;
pub mod experiments;
pub mod higham;
pub mod io;
pub mod numerics;
pub mod pivots;
pub mod random;

pub use elimination::{
    genp, gepp, last_pivot_direct, leading_block_view, solve, LuResult, PartialLuView,
};
pub use error::{Error, Result};
pub use higham::{
    canonicalize, from_uhat, random_uhat, validate, wilkinson, Canonicalization, Family,
    HighamInstance, ValidationReport,
};
pub use numerics::{BigFloat, BigRational, Matrix, Precision, Real, Regime, Scalar, Vector};
pub use pivots::{
    perturbed_pivot_general, perturbed_pivot_higham, HighamPivotEvaluator, LemmaEvaluator, Method,
    PerturbationQuery, PivotResult,
};
