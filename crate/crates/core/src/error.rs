use num_complex::Complex64;
use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("map has a pole at z = {z}")]
    PoleAtZ { z: Complex64 },

    #[error("map is parabolic or the identity (trace^2 = {trace_sq})")]
    ParabolicOrIdentity { trace_sq: Complex64 },

    #[error("map is not loxodromic (|multiplier| = {modulus})")]
    NotLoxodromic { modulus: f64 },

    #[error("determinant {det} is too close to zero")]
    DegenerateMap { det: Complex64 },

    #[error("word enumeration needs {needed} words, capacity is {capacity}")]
    CapacityExceeded { needed: u128, capacity: usize },

    #[error("letter {position} cancels its predecessor; word is not reduced")]
    NonReducedWord { position: usize },

    #[error("group element is singular or badly conditioned (condition {condition})")]
    SingularGroupElement { condition: f64 },

    #[error("observable does not provide an analytic derivative")]
    DerivativeUnavailable,

    #[error("contraction factor {kappa} is not below 1")]
    ConvergenceCriterionViolated { kappa: f64 },

    #[error("tail {tail:e} above target {target:e} after {shells} shells (capacity limit reached)")]
    TailNotMet { tail: f64, target: f64, shells: usize },

    #[error("point {z} is within {distance:e} of a pole of the kernel")]
    NearPole { z: Complex64, distance: f64 },

    #[error("index {index} out of range (length {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("quadrature did not converge: discrepancy {discrepancy:e} at {nodes} nodes")]
    QuadratureNotConverged { discrepancy: f64, nodes: usize },

    #[error("contour meets a pole of the integrand at {z}")]
    PoleCollision { z: Complex64 },

    #[error("deformed circle leaves the fundamental domain (clearance {clearance:e})")]
    LeavesFundamentalDomain { clearance: f64 },

    #[error("moment map is {norm:e}, not zero")]
    MomentNotZero { norm: f64 },

    #[error("config fails the {check} screen: {detail}")]
    ScreenFailed { check: String, detail: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that mean "inputs do not meet a precondition",
    /// as opposed to a numerical check that ran and failed.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::ConvergenceCriterionViolated { .. }
                | Error::ScreenFailed { .. }
                | Error::NotLoxodromic { .. }
                | Error::ParabolicOrIdentity { .. }
                | Error::SingularGroupElement { .. }
                | Error::LeavesFundamentalDomain { .. }
                | Error::MomentNotZero { .. }
                | Error::CapacityExceeded { .. }
                | Error::TailNotMet { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
