//! Computable pieces of a generalized Schmidt subspace theorem over number
//! fields: heights and Weil functions over Q and quadratic fields, position
//! and distributive-constant combinatorics for hyperplane families, the
//! theorem's bound factors, and numerical experiments on the main
//! inequality.

pub mod arith;
pub mod bounds;
pub mod error;
pub mod harness;
pub mod numfield;
pub mod poly;
pub mod position;
pub mod projective;

pub use error::{BoundsError, HarnessError, NumFieldError, ParseError, PositionError, ProjectiveError};
pub use numfield::{Field, FieldElement, Place, Rational, RationalPlace, SSet};
