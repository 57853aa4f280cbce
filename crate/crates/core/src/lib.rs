//! Canonical geometry of regular Lagrangians on a tangent bundle: metric,
//! semispray, nonlinear connection, Cartan forms and the horizontal
//! differential, with numerical identity checks, flows and a counterexample
//! lab.

pub mod cli;
pub mod corpus;
pub mod counterexample;
pub mod error;
pub mod expr;
pub mod field;
pub mod flows;
pub mod geometry;
pub mod jet;
pub mod point;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use expr::{parse_expr, Expr, Var};
pub use field::{parse_lagrangian, LagrangianField, LagrangianSpec};
pub use geometry::GeometryBundle;
pub use nalgebra;
pub use point::TangentPoint;
pub use report::IdentityReport;
pub use sampling::{Sampler, SamplingBox};
