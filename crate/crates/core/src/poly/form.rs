use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;


use super::monomial::{factorial, ExponentVector, MonomialBasis};
use crate::error::{Error, Result};
use crate::scalar::{bigint_rational, f64_to_rational, Rational, Scalar};

/// A homogeneous polynomial with dense coefficients over the canonical monomial basis.
#[derive(Clone, Debug, PartialEq)]
pub struct Form<S> {
    n: usize,
    degree: u32,
    coeffs: Vec<S>,
}

pub type RationalForm = Form<Rational>;

impl<S: Scalar> Form<S> {
    pub fn new(n: usize, degree: u32, coeffs: Vec<S>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("a form needs at least one variable".into()));
        }
        let expected = MonomialBasis::get(n, degree).len();
        if coeffs.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "expected {expected} coefficients for n={n}, degree={degree}, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { n, degree, coeffs })
    }

    pub fn zero(n: usize, degree: u32) -> Self {
        let len = MonomialBasis::get(n, degree).len();
        Self {
            n,
            degree,
            coeffs: vec![S::zero(); len],
        }
    }

    pub fn constant(n: usize, value: S) -> Self {
        Self {
            n,
            degree: 0,
            coeffs: vec![value],
        }
    }

    pub fn monomial(exps: &[u32], coeff: S) -> Self {
        let n = exps.len();
        let degree = exps.iter().sum();
        let mut f = Self::zero(n, degree);
        let idx = f.basis().index_of(exps).expect("monomial in its own basis");
        f.coeffs[idx] = coeff;
        f
    }

    /// Variable `i` (zero-based) as a linear form.
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0u32; n];
        e[i] = 1;
        Self::monomial(&e, S::one())
    }

    /// Builds a form from `(exponents, coefficient)` pairs; repeated monomials add up.
    pub fn from_terms(n: usize, degree: u32, terms: &[(Vec<u32>, S)]) -> Result<Self> {
        let mut f = Self::zero(n, degree);
        let basis = f.basis();
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: exps.len(),
                });
            }
            let idx = basis.index_of(exps).ok_or_else(|| {
                Error::InvalidArgument(format!("monomial {exps:?} does not have degree {degree}"))
            })?;
            f.coeffs[idx] = f.coeffs[idx].clone() + c.clone();
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.coeffs
    }

    pub fn basis(&self) -> Arc<MonomialBasis> {
        MonomialBasis::get(self.n, self.degree)
    }

    pub fn coeff(&self, exps: &[u32]) -> S {
        self.basis()
            .index_of(exps)
            .map(|i| self.coeffs[i].clone())
            .unwrap_or_else(S::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Nonzero terms in basis order.
    pub fn terms(&self) -> Vec<(ExponentVector, S)> {
        let basis = self.basis();
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (basis.monomial(i).clone(), c.clone()))
            .collect()
    }

    pub fn evaluate(&self, x: &[S]) -> Result<S> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let basis = self.basis();
        let mut acc = S::zero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = c.clone();
            for (xj, &a) in x.iter().zip(basis.monomial(i).entries()) {
                for _ in 0..a {
                    term = term * xj.clone();
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.clone() * s.clone()).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_space(other)?;
        Ok(Self {
            n: self.n,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other)
    }

    pub fn check_same_space(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::VariableMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::VariableMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let a_basis = self.basis();
        let b_basis = other.basis();
        let mut out = Self::zero(self.n, self.degree + other.degree);
        let out_basis = out.basis();
        let mut scratch = vec![0u32; self.n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let ea = a_basis.monomial(i).entries();
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let eb = b_basis.monomial(j).entries();
                for k in 0..self.n {
                    scratch[k] = ea[k] + eb[k];
                }
                let idx = out_basis.index_of(&scratch).expect("product monomial");
                out.coeffs[idx] = out.coeffs[idx].clone() + a.clone() * b.clone();
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(self.n, S::one());
        for _ in 0..e {
            acc = acc.multiply(self).expect("same variable count");
        }
        acc
    }

    /// ∂f/∂x_i with a zero-based variable index. Degree-0 input gives the zero constant.
    pub fn differentiate(&self, i: usize) -> Self {
        assert!(i < self.n, "variable index {i} out of range for n={}", self.n);
        if self.degree == 0 {
            return Self::constant(self.n, S::zero());
        }
        let basis = self.basis();
        let mut out = Self::zero(self.n, self.degree - 1);
        let out_basis = out.basis();
        let mut scratch = vec![0u32; self.n];
        for (j, c) in self.coeffs.iter().enumerate() {
            let e = basis.monomial(j).entries();
            if c.is_zero() || e[i] == 0 {
                continue;
            }
            scratch.copy_from_slice(e);
            scratch[i] -= 1;
            let idx = out_basis.index_of(&scratch).expect("derivative monomial");
            out.coeffs[idx] = out.coeffs[idx].clone() + c.clone() * S::from_i64(i64::from(e[i]));
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.n).map(|i| self.differentiate(i)).collect()
    }

    pub fn laplacian(&self) -> Self {
        if self.degree < 2 {
            return Self::zero(self.n, self.degree.saturating_sub(2));
        }
        let mut out = Self::zero(self.n, self.degree - 2);
        for i in 0..self.n {
            let d2 = self.differentiate(i).differentiate(i);
            out = out.try_add(&d2).expect("same space");
        }
        out
    }

    /// Σ xᵢ ∂f/∂xᵢ, which equals deg(f)·f for a form.
    pub fn euler_operator(&self) -> Self {
        let mut out = Self::zero(self.n, self.degree);
        if self.degree == 0 {
            return out;
        }
        for i in 0..self.n {
            let term = Self::variable(self.n, i)
                .multiply(&self.differentiate(i))
                .expect("same variable count");
            out = out.try_add(&term).expect("same space");
        }
        out
    }

    /// Substitutes xᵢ ↦ Σⱼ m[i][j]·xⱼ.
    pub fn compose_linear(&self, m: &[Vec<S>]) -> Result<Self> {
        if m.len() != self.n || m.iter().any(|row| row.len() != self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: m.len(),
            });
        }
        let linear: Vec<Self> = m
            .iter()
            .map(|row| {
                let terms: Vec<(Vec<u32>, S)> = (0..self.n)
                    .map(|j| {
                        let mut e = vec![0u32; self.n];
                        e[j] = 1;
                        (e, row[j].clone())
                    })
                    .collect();
                Self::from_terms(self.n, 1, &terms).expect("linear terms")
            })
            .collect();
        // powers of each substituted variable, computed once
        let powers: Vec<Vec<Self>> = linear
            .iter()
            .map(|l| {
                let mut p = vec![Self::constant(self.n, S::one())];
                for _ in 0..self.degree {
                    let next = p.last().unwrap().multiply(l).expect("same n");
                    p.push(next);
                }
                p
            })
            .collect();
        let basis = self.basis();
        let mut out = Self::zero(self.n, self.degree);
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = basis.monomial(j).entries();
            let mut term = Self::constant(self.n, c.clone());
            for (i, &a) in e.iter().enumerate() {
                if a > 0 {
                    term = term.multiply(&powers[i][a as usize])?;
                }
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    pub fn to_f64(&self) -> Form<f64> {
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(Scalar::to_float).collect(),
        }
    }
}

impl Form<f64> {
    /// Exact rational image of the stored binary coefficients.
    pub fn to_rational(&self) -> Result<RationalForm> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| f64_to_rational(c).ok_or_else(|| Error::Numerical(format!("non-finite coefficient {c}"))))
            .collect::<Result<Vec<_>>>()?;
        Form::new(self.n, self.degree, coeffs)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.evaluate(x).expect("point dimension matches form")
    }

    pub fn norm_coeffs(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }
}

impl<S: Scalar> Neg for &Form<S> {
    type Output = Form<S>;
    fn neg(self) -> Form<S> {
        Form {
            n: self.n,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| -c.clone()).collect(),
        }
    }
}

impl<S: Scalar> Add for &Form<S> {
    type Output = Form<S>;
    fn add(self, rhs: &Form<S>) -> Form<S> {
        self.try_add(rhs).expect("adding forms from different spaces")
    }
}

impl<S: Scalar> Sub for &Form<S> {
    type Output = Form<S>;
    fn sub(self, rhs: &Form<S>) -> Form<S> {
        self.try_sub(rhs).expect("subtracting forms from different spaces")
    }
}

impl<S: Scalar> Mul for &Form<S> {
    type Output = Form<S>;
    fn mul(self, rhs: &Form<S>) -> Form<S> {
        self.multiply(rhs).expect("multiplying forms in different variable counts")
    }
}

/// (x1² + … + xn²)^k
pub fn r_power<S: Scalar>(n: usize, k: u32) -> Form<S> {
    let terms: Vec<(Vec<u32>, S)> = (0..n)
        .map(|i| {
            let mut e = vec![0u32; n];
            e[i] = 2;
            (e, S::one())
        })
        .collect();
    let r2 = Form::from_terms(n, 2, &terms).expect("r² terms");
    r2.pow(k)
}

/// (v·x)^d with coefficients multinomial(d; α)·v^α.
pub fn linear_form_power<S: Scalar>(v: &[S], d: u32) -> Result<Form<S>> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty vector".into()));
    }
    if v.iter().all(|c| c.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let n = v.len();
    let basis = MonomialBasis::get(n, d);
    let d_fact = bigint_rational(factorial(d).into());
    let coeffs = basis
        .monomials()
        .iter()
        .map(|alpha| {
            let multinomial = d_fact.clone() / bigint_rational(alpha.factorial().into());
            let mut c = S::from_rational(&multinomial);
            for (vi, &a) in v.iter().zip(alpha.entries()) {
                for _ in 0..a {
                    c = c * vi.clone();
                }
            }
            c
        })
        .collect();
    Form::new(n, d, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn q(num: i64, den: i64) -> Rational {
        rational(num, den)
    }

    fn rf(n: usize, d: u32, terms: &[(&[u32], i64)]) -> RationalForm {
        let t: Vec<(Vec<u32>, Rational)> = terms.iter().map(|(e, c)| (e.to_vec(), q(*c, 1))).collect();
        Form::from_terms(n, d, &t).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let f = Form::<f64>::monomial(&[2, 0, 0], 1.0);
        assert_eq!(f.eval(&[2.0, 0.0, 0.0]), 4.0);
        let r2 = r_power::<f64>(3, 1);
        let s = 1.0 / 3f64.sqrt();
        assert!((r2.eval(&[s, s, s]) - 1.0).abs() < 1e-15);
        let x1x2 = Form::<f64>::monomial(&[1, 1], 1.0);
        let h = 1.0 / 2f64.sqrt();
        assert!((x1x2.eval(&[h, h]) - 0.5).abs() < 1e-15);
        assert!(matches!(f.evaluate(&[1.0, 2.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn multiply_examples() {
        let x1 = Form::<Rational>::variable(2, 0);
        let x2 = Form::<Rational>::variable(2, 1);
        assert_eq!(&x1 * &x2, rf(2, 2, &[(&[1, 1], 1)]));
        let lhs = &(&x1 + &x2) * &(&x1 - &x2);
        assert_eq!(lhs, rf(2, 2, &[(&[2, 0], 1), (&[0, 2], -1)]));
        let r2 = r_power::<Rational>(3, 1);
        let r4 = rf(
            3,
            4,
            &[
                (&[4, 0, 0], 1),
                (&[0, 4, 0], 1),
                (&[0, 0, 4], 1),
                (&[2, 2, 0], 2),
                (&[2, 0, 2], 2),
                (&[0, 2, 2], 2),
            ],
        );
        assert_eq!(&r2 * &r2, r4);
        assert_eq!(r_power::<Rational>(3, 2), r4);
        assert!(x1.multiply(&Form::variable(3, 0)).is_err());
    }

    #[test]
    fn derivatives() {
        let f = rf(2, 3, &[(&[2, 1], 1)]);
        assert_eq!(f.differentiate(0), rf(2, 2, &[(&[1, 1], 2)]));
        let r2 = r_power::<Rational>(3, 1);
        assert_eq!(r2.laplacian(), Form::constant(3, q(6, 1)));
        let h = &rf(3, 2, &[(&[2, 0, 0], 1)]) - &r2.scale(&q(1, 3));
        assert!(h.laplacian().is_zero());
        let c = Form::constant(3, q(5, 1));
        assert!(c.differentiate(1).is_zero());
    }

    #[test]
    fn linear_powers() {
        assert_eq!(r_power::<Rational>(2, 1), rf(2, 2, &[(&[2, 0], 1), (&[0, 2], 1)]));
        assert_eq!(
            linear_form_power(&[q(1, 1), q(0, 1)], 4).unwrap(),
            rf(2, 4, &[(&[4, 0], 1)])
        );
        assert_eq!(
            linear_form_power(&[q(1, 1), q(1, 1)], 2).unwrap(),
            rf(2, 2, &[(&[2, 0], 1), (&[1, 1], 2), (&[0, 2], 1)])
        );
        assert!(matches!(
            linear_form_power(&[0.0, 0.0], 2),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn euler_identity_exact() {
        let f = rf(3, 4, &[(&[4, 0, 0], 3), (&[1, 2, 1], -7), (&[0, 1, 3], 2)]);
        assert_eq!(f.euler_operator(), f.scale(&q(4, 1)));
    }

    #[test]
    fn rotation_by_permutation() {
        let f = rf(2, 2, &[(&[2, 0], 1)]);
        let swap = vec![vec![q(0, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]];
        assert_eq!(f.compose_linear(&swap).unwrap(), rf(2, 2, &[(&[0, 2], 1)]));
    }
}
