//! Waring decompositions of binary and ternary forms: catalecticants and
//! apolarity, Sylvester's algorithm, decompositions avoiding a closed set,
//! splitting ternary forms along lines, and verifiable certificates.

pub mod apolarity;
pub mod avoidance;
pub mod binary;
pub mod certify;
pub mod error;
pub mod form;
pub mod linalg;
pub mod monomial;
pub mod point;
mod refine;
pub mod roots;
pub mod scalar;
pub mod ternary;

pub use avoidance::AvoidanceSet;
pub use certify::{Certificate, Decomposition, Term};
pub use error::{Error, Result};
pub use form::{parse_form, DualForm, Form};
pub use point::ProjectivePoint;
pub use scalar::{Complex, Rational, Scalar};
