//! Inner products on spaces of forms, orthonormal bases, projection onto the
//! mean-zero hyperplane M, and the evaluation kernels q_v.
//!
//! Three metrics are available:
//! - `Integral`: ⟨f,g⟩ = ∫ fg dσ.
//! - `Gradient`: ⟨f,g⟩_G = (1/d²) ∫ ⟨∇f,∇g⟩ dσ for forms of degree d.
//! - `Apolar`: ⟨f,g⟩_d = Σ_α f_α g_α α!, i.e. f(∂) applied to g.

mod norms;

pub use norms::{barvinok_constant, gradient_norm, kellogg_check, linf_norm, lp_norm, KelloggCheck, LpNorm};

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{r_power, space_dim, sphere_moment_exps, Form, MonomialBasis};
use crate::scalar::{bigint_rational, Rational, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Integral,
    Gradient,
    Apolar,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Integral, MetricKind::Gradient, MetricKind::Apolar];
}

/// The full space P_{n,d} or the hyperplane M of forms with zero sphere integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Space {
    Full,
    MeanZero,
}

/// Gram matrix of a metric over the monomial basis, in both exact and f64 form.
#[derive(Debug)]
pub struct MonomialGram {
    pub n: usize,
    pub degree: u32,
    pub metric: MetricKind,
    exact: Vec<Rational>,
    pub float: DMatrix<f64>,
}

impl MonomialGram {
    pub fn dim(&self) -> usize {
        self.float.nrows()
    }

    pub fn exact(&self, i: usize, j: usize) -> &Rational {
        &self.exact[i * self.dim() + j]
    }

    pub fn get(n: usize, degree: u32, metric: MetricKind) -> Arc<MonomialGram> {
        type Cache = RwLock<HashMap<(usize, u32, MetricKind), Arc<MonomialGram>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(g) = cache.read().expect("gram cache poisoned").get(&(n, degree, metric)) {
            return Arc::clone(g);
        }
        let g = Arc::new(build_gram(n, degree, metric));
        cache
            .write()
            .expect("gram cache poisoned")
            .entry((n, degree, metric))
            .or_insert(g)
            .clone()
    }
}

struct MomentTable(HashMap<Vec<u32>, Rational>);

impl MomentTable {
    fn new() -> Self {
        Self(HashMap::new())
    }

    fn get(&mut self, alpha: Vec<u32>) -> Rational {
        self.0
            .entry(alpha)
            .or_insert_with_key(|a| sphere_moment_exps(a))
            .clone()
    }
}

fn build_gram(n: usize, degree: u32, metric: MetricKind) -> MonomialGram {
    let basis = MonomialBasis::get(n, degree);
    let dim = basis.len();
    let mut exact = vec![Rational::zero(); dim * dim];
    let mut moments = MomentTable::new();
    for i in 0..dim {
        let a = basis.monomial(i).entries();
        for j in i..dim {
            let b = basis.monomial(j).entries();
            let value = match metric {
                MetricKind::Integral => moments.get(a.iter().zip(b).map(|(x, y)| x + y).collect()),
                MetricKind::Apolar => {
                    if i == j {
                        bigint_rational(basis.monomial(i).factorial().into())
                    } else {
                        Rational::zero()
                    }
                }
                MetricKind::Gradient => {
                    let mut acc = Rational::zero();
                    for l in 0..n {
                        if a[l] > 0 && b[l] > 0 {
                            let mut s: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                            s[l] -= 2;
                            let m = moments.get(s);
                            if !m.is_zero() {
                                acc += m * Rational::from_integer((u64::from(a[l]) * u64::from(b[l])).into());
                            }
                        }
                    }
                    if degree > 0 {
                        acc / Rational::from_integer((u64::from(degree) * u64::from(degree)).into())
                    } else {
                        acc
                    }
                }
            };
            exact[i * dim + j] = value.clone();
            exact[j * dim + i] = value;
        }
    }
    let float = DMatrix::from_fn(dim, dim, |i, j| exact[i * dim + j].to_f64().unwrap_or(f64::NAN));
    MonomialGram {
        n,
        degree,
        metric,
        exact,
        float,
    }
}

fn bilinear<S: Scalar>(f: &Form<S>, g: &Form<S>, metric: MetricKind) -> Result<S> {
    f.check_same_space(g)?;
    if metric == MetricKind::Gradient && f.degree() < 2 {
        return Err(Error::InvalidArgument(format!(
            "gradient metric needs degree ≥ 2, got {}",
            f.degree()
        )));
    }
    let gram = MonomialGram::get(f.n(), f.degree(), metric);
    let dim = gram.dim();
    let mut acc = S::zero();
    if metric == MetricKind::Apolar {
        for i in 0..dim {
            if f.coeffs()[i] != S::zero() && g.coeffs()[i] != S::zero() {
                let w = S::from_cached(gram.exact(i, i), gram.float[(i, i)]);
                acc = acc + f.coeffs()[i].clone() * g.coeffs()[i].clone() * w;
            }
        }
        return Ok(acc);
    }
    for i in 0..dim {
        let fi = &f.coeffs()[i];
        if *fi == S::zero() {
            continue;
        }
        let mut row = S::zero();
        for j in 0..dim {
            let gj = &g.coeffs()[j];
            if *gj == S::zero() {
                continue;
            }
            let w = gram.exact(i, j);
            if w.is_zero() {
                continue;
            }
            row = row + gj.clone() * S::from_cached(w, gram.float[(i, j)]);
        }
        acc = acc + fi.clone() * row;
    }
    Ok(acc)
}

/// ⟨f,g⟩ = ∫ fg dσ.
pub fn integral_ip<S: Scalar>(f: &Form<S>, g: &Form<S>) -> Result<S> {
    bilinear(f, g, MetricKind::Integral)
}

/// ⟨f,g⟩_d = Σ f_α g_α α!.
pub fn apolar_ip<S: Scalar>(f: &Form<S>, g: &Form<S>) -> Result<S> {
    bilinear(f, g, MetricKind::Apolar)
}

/// ⟨f,g⟩_G = (1/d²) ∫ ⟨∇f,∇g⟩ dσ.
pub fn gradient_ip<S: Scalar>(f: &Form<S>, g: &Form<S>) -> Result<S> {
    bilinear(f, g, MetricKind::Gradient)
}

pub fn inner_product<S: Scalar>(metric: MetricKind, f: &Form<S>, g: &Form<S>) -> Result<S> {
    bilinear(f, g, metric)
}

/// ∫ f dσ.
pub fn sphere_integral<S: Scalar>(f: &Form<S>) -> S {
    let basis = f.basis();
    let mut acc = S::zero();
    for (i, c) in f.coeffs().iter().enumerate() {
        if *c == S::zero() {
            continue;
        }
        let e = basis.monomial(i).entries();
        if e.iter().any(|a| a % 2 == 1) {
            continue;
        }
        let m = sphere_moment_exps(e);
        let mf = m.to_f64().unwrap_or(f64::NAN);
        acc = acc + c.clone() * S::from_cached(&m, mf);
    }
    acc
}

/// f − (∫f dσ)·r^{2k}.
pub fn project_to_m<S: Scalar>(f: &Form<S>) -> Result<Form<S>> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree("project_to_m", f.degree()));
    }
    let mean = sphere_integral(f);
    let r = r_power::<S>(f.n(), f.degree() / 2);
    f.try_sub(&r.scale(&mean))
}

/// Gram data and an orthonormal basis for a metric on P_{n,d} or on M.
#[derive(Debug)]
pub struct GramData {
    pub n: usize,
    pub degree: u32,
    pub space: Space,
    pub metric: MetricKind,
    /// Gram matrix over the monomial basis of the full space.
    pub gram: Arc<MonomialGram>,
    /// Columns are the orthonormal basis elements in monomial coordinates.
    pub basis: DMatrix<f64>,
}

impl GramData {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Coordinates of f (assumed to lie in the space) in the orthonormal basis.
    pub fn coords(&self, f: &Form<f64>) -> DVector<f64> {
        let v = DVector::from_column_slice(f.coeffs());
        self.basis.tr_mul(&(&self.gram.float * v))
    }

    pub fn form_from_coords(&self, c: &[f64]) -> Form<f64> {
        let v = &self.basis * DVector::from_column_slice(c);
        Form::new(self.n, self.degree, v.as_slice().to_vec()).expect("basis has the right length")
    }

    pub fn element(&self, i: usize) -> Form<f64> {
        Form::new(self.n, self.degree, self.basis.column(i).iter().copied().collect())
            .expect("basis has the right length")
    }

    /// max |Bᵀ G B − I|.
    pub fn orthonormality_defect(&self) -> f64 {
        let m = self.basis.transpose() * &self.gram.float * &self.basis;
        (m - DMatrix::identity(self.dim(), self.dim())).amax()
    }
}

/// D_M = binomial(n+2k−1, 2k) − 1.
pub fn dim_m(n: usize, two_k: u32) -> usize {
    space_dim(n, two_k) - 1
}

/// Cached orthonormal basis; for `Space::MeanZero` every element has zero
/// sphere integral.
pub fn orthonormal_basis(n: usize, degree: u32, space: Space, metric: MetricKind) -> Result<Arc<GramData>> {
    type Cache = RwLock<HashMap<(usize, u32, Space, MetricKind), Arc<GramData>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    let key = (n, degree, space, metric);
    if let Some(g) = cache.read().expect("basis cache poisoned").get(&key) {
        return Ok(Arc::clone(g));
    }
    let data = Arc::new(build_basis(n, degree, space, metric)?);
    Ok(cache
        .write()
        .expect("basis cache poisoned")
        .entry(key)
        .or_insert(data)
        .clone())
}

fn build_basis(n: usize, degree: u32, space: Space, metric: MetricKind) -> Result<GramData> {
    if space == Space::MeanZero && degree % 2 == 1 {
        return Err(Error::OddDegree("mean-zero space", degree));
    }
    if metric == MetricKind::Gradient && degree < 1 {
        return Err(Error::InvalidArgument("gradient metric on constants".into()));
    }
    let gram = MonomialGram::get(n, degree, metric);
    let mb = MonomialBasis::get(n, degree);
    let dim = mb.len();
    // exact Gram of the spanning set, then a single conversion to f64
    let (span, reduced): (DMatrix<f64>, DMatrix<f64>) = match space {
        Space::Full => (DMatrix::identity(dim, dim), gram.float.clone()),
        Space::MeanZero => {
            let mut pivot_exps = vec![0u32; n];
            pivot_exps[0] = degree;
            let p = mb.index_of(&pivot_exps).expect("pivot monomial present");
            let mp = sphere_moment_exps(&pivot_exps);
            let others: Vec<usize> = (0..dim).filter(|&i| i != p).collect();
            let c: Vec<Rational> = others
                .iter()
                .map(|&i| sphere_moment_exps(mb.monomial(i).entries()) / &mp)
                .collect();
            let m = others.len();
            let mut g = DMatrix::zeros(m, m);
            for (a, &i) in others.iter().enumerate() {
                for (b, &j) in others.iter().enumerate().skip(a) {
                    let v = gram.exact(i, j).clone() - &c[b] * gram.exact(i, p) - &c[a] * gram.exact(p, j)
                        + &c[a] * &c[b] * gram.exact(p, p);
                    let vf = v.to_f64().unwrap_or(f64::NAN);
                    g[(a, b)] = vf;
                    g[(b, a)] = vf;
                }
            }
            let mut u = DMatrix::zeros(dim, m);
            for (a, &i) in others.iter().enumerate() {
                u[(i, a)] = 1.0;
                u[(p, a)] = -c[a].to_f64().unwrap_or(f64::NAN);
            }
            (u, g)
        }
    };
    let chol = reduced
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("{metric:?} Gram not positive definite at n={n}, d={degree}")))?;
    // B = U L^{-T}
    let l = chol.l();
    let lt_inv = l
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let basis = span * lt_inv;
    Ok(GramData {
        n,
        degree,
        space,
        metric,
        gram,
        basis,
    })
}

/// Monomial values at a point, in basis order.
pub fn monomial_values(n: usize, degree: u32, v: &[f64]) -> Vec<f64> {
    let basis = MonomialBasis::get(n, degree);
    basis
        .monomials()
        .iter()
        .map(|a| a.entries().iter().zip(v).map(|(&e, x)| x.powi(e as i32)).product())
        .collect()
}

/// The form q_v ∈ M with ⟨q_v, f⟩ = f(v) for every f ∈ M.
pub fn evaluation_kernel(v: &[f64], n: usize, two_k: u32) -> Result<Form<f64>> {
    if v.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: v.len() });
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnit(norm));
    }
    let data = orthonormal_basis(n, two_k, Space::MeanZero, MetricKind::Integral)?;
    let phi = DVector::from_vec(monomial_values(n, two_k, v));
    let e_at_v = data.basis.tr_mul(&phi);
    Ok(data.form_from_coords(e_at_v.as_slice()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;

    fn q(exps: &[u32]) -> Form<Rational> {
        Form::monomial(exps, rational(1, 1))
    }

    #[test]
    fn integral_examples() {
        let r2 = r_power::<Rational>(3, 1);
        assert_eq!(integral_ip(&r2, &r2).unwrap(), rational(1, 1));
        assert_eq!(integral_ip(&q(&[2, 0, 0]), &q(&[0, 2, 0])).unwrap(), rational(1, 15));
        assert_eq!(integral_ip(&q(&[1, 1, 0]), &q(&[1, 1, 0])).unwrap(), rational(1, 15));
    }

    #[test]
    fn apolar_examples() {
        assert_eq!(apolar_ip(&q(&[2, 0]), &q(&[2, 0])).unwrap(), rational(2, 1));
        let s = linear_square();
        assert_eq!(apolar_ip(&s, &q(&[1, 1])).unwrap(), rational(2, 1));
        assert_eq!(apolar_ip(&q(&[4, 0]), &q(&[2, 2])).unwrap(), rational(0, 1));
    }

    fn linear_square() -> Form<Rational> {
        crate::poly::linear_form_power(&[rational(1, 1), rational(1, 1)], 2).unwrap()
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(gradient_ip(&q(&[1, 1, 0]), &q(&[1, 1, 0])).unwrap(), rational(1, 6));
        let r2 = r_power::<Rational>(3, 1);
        assert_eq!(gradient_ip(&r2, &r2).unwrap(), rational(1, 1));
        let h = project_to_m(&q(&[2, 0, 0])).unwrap();
        let ratio = gradient_ip(&h, &h).unwrap() / integral_ip(&h, &h).unwrap();
        assert_eq!(ratio, rational(5, 2));
        assert!(gradient_ip(&q(&[1, 0]), &q(&[1, 0])).is_err());
    }

    #[test]
    fn projection_examples() {
        let h = project_to_m(&q(&[2, 0, 0])).unwrap();
        let expected = q(&[2, 0, 0]).try_sub(&r_power::<Rational>(3, 1).scale(&rational(1, 3))).unwrap();
        assert_eq!(h, expected);
        assert!(project_to_m(&r_power::<Rational>(3, 2)).unwrap().is_zero());
        assert_eq!(project_to_m(&h).unwrap(), h);
    }

    #[test]
    fn orthonormal_bases() {
        let d = orthonormal_basis(2, 1, Space::Full, MetricKind::Integral).unwrap();
        assert!(d.orthonormality_defect() < 1e-12);
        let e0 = d.element(0);
        assert!((e0.coeffs().iter().map(|c| c * c).sum::<f64>() - 2.0).abs() < 1e-12);
        let m = orthonormal_basis(3, 4, Space::MeanZero, MetricKind::Integral).unwrap();
        assert_eq!(m.dim(), 14);
        assert_eq!(dim_m(3, 4), 14);
        for i in 0..m.dim() {
            assert!(sphere_integral(&m.element(i)).abs() < 1e-12);
        }
        let a = orthonormal_basis(3, 3, Space::Full, MetricKind::Apolar).unwrap();
        let mb = MonomialBasis::get(3, 3);
        for i in 0..a.dim() {
            let expected = 1.0 / mb.monomial(i).factorial_f64().sqrt();
            assert!((a.basis[(i, i)] - expected).abs() < 1e-14);
        }
        for metric in MetricKind::ALL {
            let g = orthonormal_basis(4, 4, Space::MeanZero, metric).unwrap();
            assert!(g.orthonormality_defect() < 1e-10, "{metric:?}");
        }
    }

    #[test]
    fn kernel_reproduces_evaluation() {
        let v = [0.6, 0.0, 0.8];
        let qv = evaluation_kernel(&v, 3, 2).unwrap();
        let nq = integral_ip(&qv, &qv).unwrap();
        assert!((nq - 5.0).abs() < 1e-10);
        assert!((qv.eval(&v) - 5.0).abs() < 1e-10);
        let f = project_to_m(&Form::<f64>::monomial(&[1, 1, 0], 1.0)).unwrap();
        assert!((integral_ip(&qv, &f).unwrap() - f.eval(&v)).abs() < 1e-12);
        assert!(matches!(evaluation_kernel(&[1.0, 1.0, 0.0], 3, 2), Err(Error::NotUnit(_))));
    }
}
