//! Linear conditions on homogeneous forms: base schemes (fat points, fixed
//! tangencies, infinitely-near double points, fat lines) turned into exact
//! row systems, the linear systems they cut out, and independence defects.

mod rows;
mod system;

pub use rows::{condition_matrix, condition_matrix_seq, row_count, scheme_from_json, scheme_to_json, BaseCondition};
pub use system::{independence_defect, LinearSystem};

use crate::exactla::LinAlgError;
use crate::forms::FormError;

#[derive(Debug, thiserror::Error)]
pub enum SchemeError {
    #[error("condition over {got} in a system over {want}")]
    FieldMismatch { want: String, got: String },
    #[error("{kind} condition needs {want} variables, system has {got}")]
    AmbientMismatch { kind: &'static str, want: usize, got: usize },
    #[error("multiplicity {got} out of range")]
    BadMultiplicity { got: usize },
    #[error("infinitely-near double at {at} has no supporting fat point of multiplicity >= 2")]
    MissingSupport { at: String },
    #[error("blow-up direction at {at} does not leave the point")]
    DegenerateDirection { at: String },
    #[error("basis member {index} fails its scheme: {detail}")]
    BasisCheck { index: usize, detail: String },
    #[error("bad scheme JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}
