use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::form::{Form, RationalForm};
use super::monomial::MonomialBasis;
use crate::scalar::rational_int;

/// Gaussian form: independent standard normal coordinates in the basis whose
/// coefficient vectors are the columns of `basis` (normally an L²-orthonormal
/// basis supplied by `metrics`).
pub fn gaussian_form<R: Rng + ?Sized>(n: usize, degree: u32, basis: &DMatrix<f64>, rng: &mut R) -> Form<f64> {
    assert_eq!(basis.nrows(), MonomialBasis::get(n, degree).len());
    let z = DVector::from_iterator(basis.ncols(), (0..basis.ncols()).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let coeffs = basis * z;
    Form::new(n, degree, coeffs.as_slice().to_vec()).expect("basis rows match the monomial count")
}

/// Form with integer coefficients drawn uniformly from `-bound..=bound`.
pub fn random_integer_form<R: Rng + ?Sized>(n: usize, degree: u32, bound: i64, rng: &mut R) -> RationalForm {
    let len = MonomialBasis::get(n, degree).len();
    let coeffs = (0..len).map(|_| rational_int(rng.gen_range(-bound..=bound))).collect();
    Form::new(n, degree, coeffs).expect("length matches")
}
