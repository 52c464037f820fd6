//! Monomial bases of homogeneous forms in graded-reverse-lex order.
//!
//! Every coefficient vector and every matrix in the crate is indexed by the
//! order produced here, so it is fixed once and never changes: for two
//! exponent vectors of equal degree, `a` precedes `b` when the last index at
//! which they differ has `a[i] < b[i]`. For two variables and degree two this
//! gives `x1², x1x2, x2²`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ExponentVector {
    entries: Vec<u32>,
}

impl ExponentVector {
    pub fn new(entries: Vec<u32>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn degree(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        debug_assert_eq!(self.n(), other.n());
        ExponentVector::new(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    /// ∏ αᵢ!
    pub fn factorial(&self) -> BigUint {
        self.entries
            .iter()
            .fold(BigUint::one(), |acc, &a| acc * factorial(a))
    }

    pub fn factorial_f64(&self) -> f64 {
        self.entries.iter().map(|&a| factorial_f64(a)).product()
    }
}

impl From<Vec<u32>> for ExponentVector {
    fn from(entries: Vec<u32>) -> Self {
        Self::new(entries)
    }
}

pub fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    for i in (0..a.len()).rev() {
        match a[i].cmp(&b[i]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

pub fn factorial(a: u32) -> BigUint {
    (1..=a).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn factorial_f64(a: u32) -> f64 {
    (1..=a).map(f64::from).product()
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as u64
}

/// Number of monomials of degree `d` in `n` variables.
pub fn space_dim(n: usize, d: u32) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    binomial(n as u64 + u64::from(d) - 1, u64::from(d)) as usize
}

/// All exponent vectors of length `n` and total degree `d`, in the canonical order.
pub fn monomial_basis(n: usize, d: u32) -> Vec<ExponentVector> {
    assert!(n >= 1, "monomial_basis needs at least one variable");
    let mut out = Vec::with_capacity(space_dim(n, d));
    let mut current = vec![0u32; n];
    fill(&mut out, &mut current, 0, d);
    out.sort_by(|a, b| grevlex_cmp(a.entries(), b.entries()));
    out
}

fn fill(out: &mut Vec<ExponentVector>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(ExponentVector::new(current.to_vec()));
        return;
    }
    for a in (0..=remaining).rev() {
        current[pos] = a;
        fill(out, current, pos + 1, remaining - a);
    }
    current[pos] = 0;
}

/// Cached monomial basis with a reverse index.
#[derive(Debug)]
pub struct MonomialBasis {
    n: usize,
    degree: u32,
    monomials: Vec<ExponentVector>,
    index: HashMap<Vec<u32>, usize>,
}

impl MonomialBasis {
    fn build(n: usize, degree: u32) -> Self {
        let monomials = monomial_basis(n, degree);
        let index = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.entries().to_vec(), i))
            .collect();
        Self {
            n,
            degree,
            monomials,
            index,
        }
    }

    pub fn get(n: usize, degree: u32) -> Arc<MonomialBasis> {
        static CACHE: OnceLock<RwLock<HashMap<(usize, u32), Arc<MonomialBasis>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(b) = cache.read().expect("basis cache poisoned").get(&(n, degree)) {
            return Arc::clone(b);
        }
        let built = Arc::new(Self::build(n, degree));
        cache
            .write()
            .expect("basis cache poisoned")
            .entry((n, degree))
            .or_insert(built)
            .clone()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[ExponentVector] {
        &self.monomials
    }

    pub fn monomial(&self, i: usize) -> &ExponentVector {
        &self.monomials[i]
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.index.get(exps).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(v: &[u32]) -> ExponentVector {
        ExponentVector::new(v.to_vec())
    }

    #[test]
    fn two_variables_degree_two() {
        assert_eq!(monomial_basis(2, 2), vec![ev(&[2, 0]), ev(&[1, 1]), ev(&[0, 2])]);
    }

    #[test]
    fn three_variables_degree_two_is_grevlex() {
        let b = monomial_basis(3, 2);
        let expected = [[2, 0, 0], [1, 1, 0], [0, 2, 0], [1, 0, 1], [0, 1, 1], [0, 0, 2]];
        assert_eq!(b, expected.iter().map(|e| ev(e)).collect::<Vec<_>>());
    }

    #[test]
    fn counts_and_degenerate_cases() {
        assert_eq!(monomial_basis(3, 4).len(), 15);
        assert_eq!(monomial_basis(1, 3), vec![ev(&[3])]);
        assert_eq!(monomial_basis(4, 0), vec![ev(&[0, 0, 0, 0])]);
        for n in 1..6 {
            for d in 0..7 {
                assert_eq!(monomial_basis(n, d).len(), space_dim(n, d));
            }
        }
    }

    #[test]
    fn strictly_ordered_and_indexed() {
        let basis = MonomialBasis::get(4, 3);
        for w in basis.monomials().windows(2) {
            assert_eq!(grevlex_cmp(w[0].entries(), w[1].entries()), Ordering::Less);
        }
        for (i, m) in basis.monomials().iter().enumerate() {
            assert_eq!(basis.index_of(m.entries()), Some(i));
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 4), 15);
        assert_eq!(binomial(5, 7), 0);
        assert_eq!(binomial(40, 20), 137_846_528_820);
    }
}
