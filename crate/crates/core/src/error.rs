use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("denominator modulus {modulus:e} near a pole at z = {z}")]
    PoleProximity { z: Complex64, modulus: f64 },

    #[error("|z| = {modulus} is outside the analyticity radius {radius}")]
    OutsideRadius { modulus: f64, radius: f64 },

    #[error("degenerate linear fractional map: |ad - bc| = {0:e}")]
    DegenerateMobius(f64),

    #[error("the identity map has no Denjoy-Wolff point")]
    IdentityMap,

    #[error("symbol is not a self-map of the disk (boundary sup {sup})")]
    NotSelfMap { sup: f64 },

    #[error("fixed-point iteration did not converge after {iterations} steps (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("analyticity radius {radius} is too small (need > {required})")]
    RadiusTooSmall { radius: f64, required: f64 },

    #[error("hypothesis refuted: {0}")]
    RefutedHypothesis(String),

    #[error("uniform convergence of iterates is not certified: {0}")]
    Uncertified(String),

    #[error("weight is not bounded away from zero (inf |psi| = {inf:e})")]
    VanishingWeight { inf: f64 },

    #[error("weight vanishes at the Denjoy-Wolff point (|psi(a)| = {0:e})")]
    ZeroAtFixedPoint(f64),

    #[error("wrong symbol class: expected {expected}, found {found}")]
    WrongClass { expected: &'static str, found: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigenfunction precondition failed: residual {residual:e} exceeds {tolerance:e}")]
    EigenPrecondition { residual: f64, tolerance: f64 },

    #[error("zero vector")]
    ZeroVector,

    #[error("iteration count {0} exceeds the overflow guard")]
    IterationOverflow(u64),

    #[error("eigensolver did not converge ({converged} of {total} eigenvalues found)")]
    EigenConvergence { converged: usize, total: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by inputs that violate a mathematical
    /// hypothesis, as opposed to internal or numerical failures.
    pub fn is_hypothesis_failure(&self) -> bool {
        matches!(
            self,
            Error::IdentityMap
                | Error::NotSelfMap { .. }
                | Error::NonPositive { .. }
                | Error::RadiusTooSmall { .. }
                | Error::RefutedHypothesis(_)
                | Error::Uncertified(_)
                | Error::VanishingWeight { .. }
                | Error::ZeroAtFixedPoint(_)
                | Error::WrongClass { .. }
                | Error::EigenPrecondition { .. }
                | Error::DegenerateMobius(_)
                | Error::OutsideRadius { .. }
        )
    }
}
