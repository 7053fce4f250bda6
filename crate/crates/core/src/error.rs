//! Error types shared across the crate.

use crate::expr::Var;
use thiserror::Error;

/// Numeric evaluation failures.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("log of zero in subtree `{subtree}`")]
    LogOfZero { subtree: String },
    #[error("variable {var} is not assigned")]
    Unassigned { var: Var },
}

/// Geometry-level failures.
#[derive(Debug, Clone, Error)]
pub enum GeometryError {
    #[error("singular hypersurface point: all |d rho/d z_j| <= {eps:e} at {point}")]
    SingularPoint { point: String, eps: f64 },
    #[error("point is not on the hypersurface: |rho| = {rho:e} exceeds {eps:e} at {point}")]
    OffSurface { point: String, rho: f64, eps: f64 },
    #[error("vector is not in the complex tangent space: relative residual {residual:e}")]
    NotInComplexTangent { residual: f64 },
    #[error("multi-index must be nonzero on both sides of a Levi coefficient")]
    ZeroMultiIndex,
    #[error("defining expression is not real-valued (conjugate differs structurally)")]
    NotRealValued,
    #[error("defining expression references parameters; it must use z/zb variables only")]
    ParamInDefining,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Manifold- and probe-level failures.
#[derive(Debug, Clone, Error)]
pub enum ManifoldError {
    #[error("manifold component {index} references ambient variables; components must use parameters only")]
    AmbientInComponent { index: usize },
    #[error("component {index} is not entire in the parameters: subtree `{subtree}` (log, quotient and negative powers are rejected)")]
    NonEntireComponent { index: usize, subtree: String },
    #[error("parameter point {point} is outside the domain box")]
    OutsideDomain { point: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Scenario file loading/validation failures.
#[derive(Debug, Clone, Error)]
#[error("{path}:{line}: {msg}")]
pub struct ScenarioError {
    pub path: String,
    pub line: usize,
    pub msg: String,
}

impl ScenarioError {
    pub fn new(path: &str, line: usize, msg: impl Into<String>) -> ScenarioError {
        ScenarioError {
            path: path.to_string(),
            line,
            msg: msg.into(),
        }
    }
}
