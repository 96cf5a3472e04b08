//! Homogeneous forms in up to four variables, projective points and lines,
//! and the local calculus the condition builders need: directional
//! derivatives, multiplicities at points and along lines, pencil
//! restrictions, and the one blow-up chart used for infinitely-near data.

mod form;
mod json;
mod point;

pub use form::{monomial_basis, pencil_direction, scalar_powers, BiPoly, Chart, Exp, Form, Slope};
pub use json::{field_from_json, field_to_json, point_from_json, point_to_json};
pub use point::{complete_basis, points_span_rank, DualLine, ProjLine, ProjPoint};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormError {
    #[error("variable count {0} unsupported (expected 1..=4)")]
    BadNvars(usize),
    #[error("term exponent {got:?} has degree {got_deg}, form declares {want}")]
    BadTermDegree { got: Vec<u16>, got_deg: usize, want: usize },
    #[error("operand shapes differ: {0}")]
    ShapeMismatch(String),
    #[error("operation undefined on the zero form")]
    ZeroForm,
    #[error("point has all coordinates zero")]
    NotAPoint,
    #[error("direction is zero or lies along the base point")]
    DegenerateDirection,
    #[error("chart division impossible: multiplicity {found} below clear {clear}")]
    ChartDivision { found: usize, clear: usize },
    #[error("line spanned by coincident points")]
    CoincidentPoints,
    #[error("bad serialized form: {0}")]
    Json(String),
}
