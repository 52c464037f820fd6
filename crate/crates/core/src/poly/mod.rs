//! Homogeneous forms, their calculus, and exact sphere moments.

pub mod form;
pub mod io;
pub mod moments;
pub mod monomial;
pub mod random;

pub use form::{linear_form_power, r_power, Form, RationalForm};
pub use io::PolyFile;
pub use moments::{sphere_moment, sphere_moment_exps, sphere_moment_f64, SphereMeasureConvention};
pub use monomial::{binomial, monomial_basis, space_dim, ExponentVector, MonomialBasis};
pub use random::{gaussian_form, random_integer_form};
