//! Metric and volumetric tools for three nested cones of even-degree forms:
//! nonnegative forms, sums of squares, and sums of even powers of linear forms.

pub mod apolarity;
pub mod cones;
pub mod error;
pub mod harmonic;
pub mod linalg;
pub mod metrics;
pub mod poly;
pub mod report;
pub mod scalar;
pub mod sphere;
pub mod volume;

// links the system OpenBLAS used by the SDP solver
extern crate openblas_src;

pub use error::{Error, Result};
pub use poly::{Form, RationalForm};
pub use scalar::{Rational, Scalar};
