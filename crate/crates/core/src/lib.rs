//! Symbolic-numeric toolkit for the CR geometry of real-analytic
//! hypersurface boundaries in complex space.
//!
//! Given a defining function `rho` of a hypersurface (with the domain of
//! interest on the side `rho < 0`) and a parametrized submanifold of it,
//! the crate computes:
//!
//! - holomorphic tangent bases, vector-field commutators and their
//!   contractions against the antiholomorphic differential of `rho`;
//! - the Bloom-Graham type of boundary points and higher-order Levi forms;
//! - the hypotheses of the interpolation-manifold criterion (totally real,
//!   complex-tangential, constant type, positive higher Levi form along
//!   `i * d(gamma)`), aggregated into a verdict;
//! - a numeric probe that complexifies the parametrization and searches for
//!   contact between the complexified manifold and the closed domain off
//!   the real parameter locus.
//!
//! Everything rests on an exact formal Wirtinger calculus over expression
//! trees; numbers only enter when trees are evaluated at points.

pub mod error;
pub mod expr;
pub mod gallery;
pub mod geometry;
pub mod manifold;
pub mod probe;
pub mod report;
pub mod scenario;

mod pool;

pub use error::{EvalError, GeometryError, ManifoldError, ScenarioError};
pub use expr::{parse_expr, Assignment, Expr, ExprContext, ParseError, Var};
