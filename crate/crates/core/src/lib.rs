//! Local bifurcation diagrams for scalar systems `dx/dt = f(x) + lambda*g(x)`.
//!
//! The equilibrium set is treated as a root locus on the real line: after
//! factoring out the common part `h = gcd(f, g)`, the remaining equilibria
//! satisfy `f1(x) + mu*g1(x) = 0` with `mu = ±lambda`, so every branch is a
//! piece of the explicit curve `mu(x) = -f1(x)/g1(x)`. Stability follows from
//! the sign alternation of `f + lambda*g` between consecutive equilibria, and an
//! independent per-column root solve checks the whole diagram.

pub mod diagram;
pub mod error;
pub mod expr;
pub mod locus;
pub mod oracle;
pub mod pipeline;
pub mod poly;
pub mod render;
pub mod roots;
pub mod stability;

pub use diagram::{Branch, BranchKind, Diagram, StabilityLabel};
pub use error::{ExprError, OracleError, PipelineError, PolyError, StabilityError};
pub use expr::{extract_affine_system, parse_expression, ExprAst, ParamAffineSystem};
pub use pipeline::{analyze, Analysis, Config};
pub use poly::Polynomial;
pub use roots::{real_roots, RootSet};
