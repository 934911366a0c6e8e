//! Exterior calculus on coordinate charts.

pub mod chart;
pub mod expr;
pub mod field;
pub mod form;
pub mod map;
pub mod parse;

pub use chart::{Axis, AxisKind, AxisSamples, Chart, Grid};
pub use expr::{ClampedPoly, Expr, Func};
pub use field::{ScalarField, VectorField};
pub use form::DifferentialForm;
pub use map::ChartMap;
pub use parse::parse_expr;
