//! Analytic symbols: Möbius algebra, expression trees, Taylor extraction and
//! Denjoy-Wolff classification.

mod classify;
mod expr;
mod json;
mod mobius;
mod taylor;

pub use classify::{boundary_circle, classify, classify_with, ClassifyOptions, DWClass, DWMethod, DWReport};
pub use expr::{Node, Symbol};
pub use mobius::{FixedPoint, MobiusMap};
pub use taylor::{contour_radius, eval_series, taylor, taylor_error_bound, Contour, MIN_NODES, OVERSAMPLING};
