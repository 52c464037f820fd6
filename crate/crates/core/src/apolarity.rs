//! The averaging operator T(f) = ∫ f(v)·(v·x)^{2k} dσ(v), its spectrum on the
//! harmonic levels, and catalecticant quadratic forms.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::metrics::{orthonormal_basis, MetricKind, MonomialGram, Space};
use crate::poly::{binomial, r_power, space_dim, sphere_moment_exps, Form, MonomialBasis};
use crate::scalar::{bigint_rational, rational, Rational, Scalar};

fn multinomial(beta: &[u32]) -> BigInt {
    let total: u32 = beta.iter().sum();
    let mut acc = BigInt::from(crate::poly::monomial::factorial(total));
    for &b in beta {
        acc /= BigInt::from(crate::poly::monomial::factorial(b));
    }
    acc
}

/// T over the monomial basis of P_{n,2k}, exact; column α holds T(x^α).
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub n: usize,
    pub two_k: u32,
    pub matrix: Matrix<Rational>,
    /// T(r^{2k}) = c·r^{2k}, c = ∫ x1^{2k} dσ.
    pub c: Rational,
}

pub fn t_constant(n: usize, two_k: u32) -> Rational {
    let mut e = vec![0u32; n];
    e[0] = two_k;
    sphere_moment_exps(&e)
}

pub fn t_matrix(n: usize, two_k: u32) -> Result<OperatorMatrix> {
    if n < 2 || two_k < 2 || two_k % 2 == 1 {
        return Err(Error::InvalidArgument(format!("t_matrix needs n ≥ 2 and even degree ≥ 2, got ({n}, {two_k})")));
    }
    let basis = MonomialBasis::get(n, two_k);
    let dim = basis.len();
    let mut matrix = Matrix::zeros(dim, dim);
    for (b, beta) in basis.monomials().iter().enumerate() {
        let mult = bigint_rational(multinomial(beta.entries()));
        for (a, alpha) in basis.monomials().iter().enumerate() {
            let m = sphere_moment_exps(alpha.add(beta).entries());
            if !m.is_zero() {
                matrix[(b, a)] = &mult * m;
            }
        }
    }
    Ok(OperatorMatrix {
        n,
        two_k,
        matrix,
        c: t_constant(n, two_k),
    })
}

/// T(f), computed term by term without forming the full matrix.
pub fn apply_t<S: Scalar>(f: &Form<S>) -> Form<S> {
    let basis = f.basis();
    let mut out = Vec::with_capacity(basis.len());
    for beta in basis.monomials() {
        let mut acc = S::zero();
        for (a, c) in f.coeffs().iter().enumerate() {
            if *c == S::zero() {
                continue;
            }
            let m = sphere_moment_exps(basis.monomial(a).add(beta).entries());
            if !m.is_zero() {
                acc = acc + c.clone() * S::from_rational(&m);
            }
        }
        let mult = bigint_rational(multinomial(beta.entries()));
        out.push(acc * S::from_rational(&mult));
    }
    Form::new(f.n(), f.degree(), out).expect("same basis")
}

/// ⟨T x^α, x^β⟩_d = (2k)!·⟨x^α, x^β⟩ for every monomial pair, exactly.
pub fn duality_identity_holds(op: &OperatorMatrix) -> bool {
    let basis = MonomialBasis::get(op.n, op.two_k);
    let fact = bigint_rational(crate::poly::monomial::factorial(op.two_k).into());
    let dim = basis.len();
    (0..dim).all(|a| {
        (0..dim).all(|b| {
            let lhs = &op.matrix[(b, a)] * bigint_rational(basis.monomial(b).factorial().into());
            let rhs = &fact * sphere_moment_exps(basis.monomial(a).add(basis.monomial(b)).entries());
            lhs == rhs
        })
    })
}

/// A value q·π^{e/2} used to evaluate Gamma at half-integers exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfGamma {
    pub rational: Rational,
    pub sqrt_pi_power: i32,
}

impl HalfGamma {
    /// Γ(m/2) for m ≥ 1.
    pub fn of_half(m: u32) -> Self {
        assert!(m >= 1, "Γ(0) is undefined");
        if m % 2 == 0 {
            let f = crate::poly::monomial::factorial(m / 2 - 1);
            HalfGamma {
                rational: bigint_rational(f.into()),
                sqrt_pi_power: 0,
            }
        } else {
            let mut acc = Rational::one();
            let mut j = 1;
            while j < m {
                acc *= rational(i64::from(j), 2);
                j += 2;
            }
            HalfGamma {
                rational: acc,
                sqrt_pi_power: 1,
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        HalfGamma {
            rational: &self.rational * &other.rational,
            sqrt_pi_power: self.sqrt_pi_power + other.sqrt_pi_power,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        HalfGamma {
            rational: &self.rational / &other.rational,
            sqrt_pi_power: self.sqrt_pi_power - other.sqrt_pi_power,
        }
    }

    /// The exact value when no power of π remains.
    pub fn as_rational(&self) -> Option<Rational> {
        (self.sqrt_pi_power == 0).then(|| self.rational.clone())
    }
}

/// Γ((2k+1)/2)Γ(n/2)/(√π·Γ((n+2k)/2)).
pub fn t_constant_gamma(n: usize, two_k: u32) -> Option<Rational> {
    let num = HalfGamma::of_half(two_k + 1).mul(&HalfGamma::of_half(n as u32));
    let den = HalfGamma::of_half(1).mul(&HalfGamma::of_half(n as u32 + two_k));
    num.div(&den).as_rational()
}

/// k!·Γ(k+n/2)/Γ(2k+n/2), the contraction of (1/c)T on the top level.
pub fn top_eigenvalue(n: usize, k: u32) -> Rational {
    let fk = bigint_rational(crate::poly::monomial::factorial(k).into());
    let q = HalfGamma::of_half(2 * k + n as u32).div(&HalfGamma::of_half(4 * k + n as u32));
    fk * q.as_rational().expect("same parity cancels π")
}

/// Re and Im of (x1 + i·x2)^m, both harmonic.
pub fn zonal_pair<S: Scalar>(n: usize, m: u32) -> (Form<S>, Form<S>) {
    let mut re = Vec::new();
    let mut im = Vec::new();
    for j in 0..=m {
        let mut e = vec![0u32; n];
        e[0] = m - j;
        e[1] = j;
        let b = S::from_i64(binomial(u64::from(m), u64::from(j)) as i64);
        let sign = if (j / 2) % 2 == 0 { S::one() } else { -S::one() };
        if j % 2 == 0 {
            re.push((e, b * sign));
        } else {
            im.push((e, b * sign));
        }
    }
    let re = Form::from_terms(n, m, &re).expect("valid terms");
    let im = if im.is_empty() {
        Form::zero(n, m)
    } else {
        Form::from_terms(n, m, &im).expect("valid terms")
    };
    (re, im)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub d: u32,
    /// Eigenvalue of (1/c)T on r^{2k−2d}H_{n,2d}.
    pub eigenvalue: String,
    pub eigenvalue_f64: f64,
    /// T maps the representative to a multiple of itself, exactly.
    pub scalar_on_level: bool,
    /// A second representative gives the same factor.
    pub second_representative_agrees: bool,
}

fn eigen_factor(f: &Form<Rational>, c: &Rational) -> Option<Rational> {
    let tf = apply_t(f);
    let (i, fi) = f.coeffs().iter().enumerate().find(|(_, v)| !v.is_zero())?;
    let lambda = &tf.coeffs()[i] / fi;
    (tf == f.scale(&lambda)).then(|| lambda / c)
}

pub fn t_spectrum(n: usize, two_k: u32) -> Result<Vec<SpectrumRow>> {
    if n < 2 || two_k % 2 == 1 || two_k == 0 {
        return Err(Error::InvalidArgument("t_spectrum needs n ≥ 2 and even degree ≥ 2".into()));
    }
    let k = two_k / 2;
    let c = t_constant(n, two_k);
    let mut rows = Vec::new();
    for d in 0..=k {
        let r = r_power::<Rational>(n, k - d);
        let (re, im) = zonal_pair::<Rational>(n, 2 * d);
        let f1 = re.multiply(&r)?;
        let f2 = if d == 0 { f1.clone() } else { im.multiply(&r)? };
        let l1 = eigen_factor(&f1, &c);
        let l2 = eigen_factor(&f2, &c);
        let value = l1.clone().unwrap_or_else(Rational::zero);
        rows.push(SpectrumRow {
            d,
            eigenvalue: crate::poly::io::format_rational(&value),
            eigenvalue_f64: value.to_f64().unwrap_or(f64::NAN),
            scalar_on_level: l1.is_some(),
            second_representative_agrees: l1.is_some() && l1 == l2,
        });
    }
    Ok(rows)
}

/// Index of x^{a+b} in the degree-2k basis for each pair of degree-k monomials.
struct SquareIndex {
    dim_k: usize,
    pairs: Vec<usize>,
}

fn square_index(n: usize, k: u32) -> Arc<SquareIndex> {
    type Cache = RwLock<HashMap<(usize, u32), Arc<SquareIndex>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(s) = cache.read().expect("index cache poisoned").get(&(n, k)) {
        return Arc::clone(s);
    }
    let low = MonomialBasis::get(n, k);
    let high = MonomialBasis::get(n, 2 * k);
    let dim_k = low.len();
    let mut pairs = vec![0; dim_k * dim_k];
    for a in 0..dim_k {
        for b in 0..dim_k {
            pairs[a * dim_k + b] = high
                .index_of(low.monomial(a).add(low.monomial(b)).entries())
                .expect("product monomial present");
        }
    }
    let s = Arc::new(SquareIndex { dim_k, pairs });
    cache.write().expect("index cache poisoned").entry((n, k)).or_insert(s).clone()
}

/// The quadratic form g ↦ ⟨f, g²⟩ on P_{n,k}, over an orthonormal basis of
/// P_{n,k} in the same metric.
#[derive(Clone, Debug)]
pub struct Catalecticant {
    pub kind: MetricKind,
    pub n: usize,
    pub k: u32,
    pub matrix: DMatrix<f64>,
}

impl Catalecticant {
    pub fn eigenvalues(&self) -> Vec<f64> {
        sym_eigen(&self.matrix).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    /// Evaluates the quadratic form on g given in monomial coordinates.
    pub fn apply(&self, g: &Form<f64>) -> Result<f64> {
        let coords = match self.kind {
            MetricKind::Integral => orthonormal_basis(self.n, self.k, Space::Full, MetricKind::Integral)?.coords(g),
            _ => {
                let basis = MonomialBasis::get(self.n, self.k);
                DVector::from_iterator(
                    basis.len(),
                    g.coeffs().iter().zip(basis.monomials()).map(|(c, a)| c * a.factorial_f64().sqrt()),
                )
            }
        };
        Ok(coords.dot(&(&self.matrix * &coords)))
    }
}

/// Catalecticant of f in the Integral or Apolar metric.
pub fn catalecticant(f: &Form<f64>, kind: MetricKind) -> Result<Catalecticant> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree("catalecticant", f.degree()));
    }
    let n = f.n();
    let k = f.degree() / 2;
    let idx = square_index(n, k);
    let dk = idx.dim_k;
    let matrix = match kind {
        MetricKind::Integral => {
            let gram = MonomialGram::get(n, 2 * k, MetricKind::Integral);
            let gf = &gram.float * DVector::from_column_slice(f.coeffs());
            let kf = DMatrix::from_fn(dk, dk, |a, b| gf[idx.pairs[a * dk + b]]);
            let basis = &orthonormal_basis(n, k, Space::Full, MetricKind::Integral)?.basis;
            let h = basis.transpose() * kf * basis;
            (&h + h.transpose()) * 0.5
        }
        MetricKind::Apolar => {
            let low = MonomialBasis::get(n, k);
            let high = MonomialBasis::get(n, 2 * k);
            DMatrix::from_fn(dk, dk, |a, b| {
                let g = idx.pairs[a * dk + b];
                f.coeffs()[g] * high.monomial(g).factorial_f64()
                    / (low.monomial(a).factorial_f64() * low.monomial(b).factorial_f64()).sqrt()
            })
        }
        MetricKind::Gradient => {
            return Err(Error::InvalidArgument("catalecticant is defined for Integral and Apolar metrics".into()))
        }
    };
    Ok(Catalecticant { kind, n, k, matrix })
}

/// D_{n,k} = binomial(n+k−1, k).
pub fn d_nk(n: usize, k: u32) -> usize {
    space_dim(n, k)
}

/// The rank-one form p ↦ ⟨p,q⟩_d² over the apolar-orthonormal basis.
pub fn apolar_square(q: &Form<f64>) -> DMatrix<f64> {
    let basis = MonomialBasis::get(q.n(), q.degree());
    let w = DVector::from_iterator(
        basis.len(),
        q.coeffs().iter().zip(basis.monomials()).map(|(c, a)| c * a.factorial_f64().sqrt()),
    );
    &w * w.transpose()
}

/// ‖P(A_q) − binomial(2k,k)⁻¹·H_{q²}‖_F, where P is the orthogonal projection
/// (trace inner product) onto {H_f : f ∈ P_{n,2k}} for the apolar metric.
pub fn projection_identity_residual(q: &Form<f64>) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    let n = q.n();
    let k = q.degree();
    let dk = space_dim(n, k);
    let d2k = space_dim(n, 2 * k);
    // columns: H_{x^γ} flattened
    let mut v = DMatrix::zeros(dk * dk, d2k);
    for g in 0..d2k {
        let mut e = vec![0.0; d2k];
        e[g] = 1.0;
        let h = catalecticant(&Form::new(n, 2 * k, e)?, MetricKind::Apolar)?;
        v.column_mut(g).copy_from_slice(h.matrix.as_slice());
    }
    // the columns have disjoint supports, so they are orthogonal
    let a = apolar_square(q);
    let a_vec = DVector::from_column_slice(a.as_slice());
    let coeffs = DVector::from_iterator(
        d2k,
        v.column_iter().map(|c| c.dot(&a_vec) / c.norm_squared()),
    );
    let projected = &v * coeffs;
    let hq2 = catalecticant(&q.multiply(q)?, MetricKind::Apolar)?;
    let scale = 1.0 / binomial(2 * u64::from(k), u64::from(k)) as f64;
    let target = DVector::from_column_slice(hq2.matrix.as_slice()) * scale;
    Ok((projected - target).norm())
}

/// ‖H_{v^{2k}} − binomial(2k,k)·A_{v^k}‖_F in the apolar metric.
pub fn power_catalecticant_defect(v: &[f64], k: u32) -> Result<f64> {
    let h = catalecticant(&crate::poly::linear_form_power(v, 2 * k)?, MetricKind::Apolar)?;
    let a = apolar_square(&crate::poly::linear_form_power(v, k)?);
    Ok((h.matrix - a * binomial(2 * u64::from(k), u64::from(k)) as f64).norm())
}
