//! Exact moments of monomials against σ, the rotation-invariant probability
//! measure on the unit sphere S^{n−1}.
//!
//! ∫ x^α dσ = 0 when some αᵢ is odd, otherwise
//! ∏ (αᵢ−1)!! / (n(n+2)···(n+|α|−2)).

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::monomial::ExponentVector;
use crate::scalar::Rational;

/// Marker for the measure convention: every moment, inner product and norm in
/// this crate integrates against the probability measure σ on S^{n−1}.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SphereMeasureConvention;

impl SphereMeasureConvention {
    pub const TOTAL_MASS: i64 = 1;
}

fn odd_double_factorial(m: u32) -> BigInt {
    // (m−1)!! for even m
    let mut acc = BigInt::one();
    let mut j = 1u32;
    while j < m {
        acc *= j;
        j += 2;
    }
    acc
}

pub fn sphere_moment(alpha: &ExponentVector) -> Rational {
    sphere_moment_exps(alpha.entries())
}

pub fn sphere_moment_exps(alpha: &[u32]) -> Rational {
    if alpha.iter().any(|a| a % 2 == 1) {
        return Rational::zero();
    }
    let n = alpha.len() as u64;
    let total: u32 = alpha.iter().sum();
    let num = alpha
        .iter()
        .fold(BigInt::one(), |acc, &a| acc * odd_double_factorial(a));
    let mut den = BigInt::one();
    for j in 0..u64::from(total / 2) {
        den *= n + 2 * j;
    }
    Rational::new(num, den)
}

pub fn sphere_moment_f64(alpha: &[u32]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len() as f64;
    // interleave numerator and denominator factors to stay in range
    let mut num_factors: Vec<f64> = Vec::new();
    for &a in alpha {
        let mut j = 1u32;
        while j < a {
            num_factors.push(f64::from(j));
            j += 2;
        }
    }
    let total: u32 = alpha.iter().sum();
    let mut acc = 1.0;
    let mut it = num_factors.into_iter();
    for j in 0..total / 2 {
        acc /= n + 2.0 * f64::from(j);
        if let Some(f) = it.next() {
            acc *= f;
        }
    }
    for f in it {
        acc *= f;
    }
    acc
}
