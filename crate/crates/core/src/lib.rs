//! Anisotropic geometry of closed sets and sets of positive reach: norms and
//! Wulff shapes, φ-distance and projection, generalized principal
//! curvatures, curvature measures, Steiner tube formulas, and numerical
//! verdicts for the classical integral identities and rigidity theorems.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod exec;
pub mod linalg;
pub mod measures;
pub mod norm;
pub mod optimize;
pub mod projection;
pub mod settings;
pub mod shapes;
pub mod theorems;

pub use error::{Error, Result};
pub use exec::Execution;
pub use norm::{Norm, NormKind};
pub use settings::Settings;
pub use projection::Scene;
pub use shapes::{Shape, ShapeSpec};
