//! Decomposition of P_{n,2k} into the levels r^{2k−2d}·H_{n,2d} and the
//! gradient/integral metric ratios on each level.

use std::collections::BTreeMap;

use num_traits::{One, Pow, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::metrics::sphere_integral;
use crate::poly::{r_power, space_dim, Form, MonomialBasis};
use crate::scalar::{rational, Rational, Scalar};

/// f = Σ_d r^{2k−2d}·h_{2d} with each h_{2d} harmonic of degree 2d.
#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicDecomposition<S> {
    pub n: usize,
    pub degree: u32,
    pub components: BTreeMap<u32, Form<S>>,
}

impl<S: Scalar> HarmonicDecomposition<S> {
    /// The level r^{2k−2d}·h_{2d} as a form of full degree.
    pub fn level(&self, d: u32) -> Form<S> {
        let h = &self.components[&d];
        h.multiply(&r_power(self.n, self.degree / 2 - d))
            .expect("same variable count")
    }

    pub fn reconstruct(&self) -> Form<S> {
        let mut acc = Form::zero(self.n, self.degree);
        for &d in self.components.keys() {
            acc = &acc + &self.level(d);
        }
        acc
    }
}

/// Matrix of g ↦ Δ(r²g) on P_{n,m}, an isomorphism.
fn laplace_r2_matrix<S: Scalar>(n: usize, m: u32) -> Matrix<S> {
    let basis = MonomialBasis::get(n, m);
    let r2 = r_power::<S>(n, 1);
    let dim = basis.len();
    let mut out = Matrix::zeros(dim, dim);
    for j in 0..dim {
        let e = Form::monomial(basis.monomial(j).entries(), S::one());
        let image = e.multiply(&r2).expect("same n").laplacian();
        for (i, c) in image.coeffs().iter().enumerate() {
            out[(i, j)] = c.clone();
        }
    }
    out
}

pub fn harmonic_decompose<S: Scalar>(f: &Form<S>) -> Result<HarmonicDecomposition<S>> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree("harmonic_decompose", f.degree()));
    }
    let n = f.n();
    let mut components = BTreeMap::new();
    let mut current = f.clone();
    let mut deg = f.degree();
    while deg >= 2 {
        let lap = current.laplacian();
        let g_coeffs = laplace_r2_matrix::<S>(n, deg - 2).solve(lap.coeffs())?;
        let g = Form::new(n, deg - 2, g_coeffs)?;
        let h = current.try_sub(&g.multiply(&r_power(n, 1))?)?;
        components.insert(deg / 2, h);
        current = g;
        deg -= 2;
    }
    components.insert(0, current);
    Ok(HarmonicDecomposition {
        n,
        degree: f.degree(),
        components,
    })
}

/// dim H_{n,2d} for d = 0..=k.
pub fn harmonic_dims(n: usize, two_k: u32) -> Vec<(u32, usize)> {
    (0..=two_k / 2)
        .map(|d| {
            let below = if d == 0 { 0 } else { space_dim(n, 2 * d - 2) };
            (d, space_dim(n, 2 * d) - below)
        })
        .collect()
}

/// (2k²+d(n−2)+2d²)/(2k²): ⟨f,f⟩_G/⟨f,f⟩ on the level r^{2k−2d}H_{n,2d}.
pub fn level_ratio(n: usize, k: u32, d: u32) -> Rational {
    let (n, k, d) = (n as i64, i64::from(k), i64::from(d));
    rational(2 * k * k + d * (n - 2) + 2 * d * d, 2 * k * k)
}

/// The lemma's claimed minimum over d ≥ 1: (4k²+n−2)/(2k²).
pub fn lemma_min_ratio(n: usize, k: u32) -> Rational {
    let (n, k) = (n as i64, i64::from(k));
    rational(4 * k * k + n - 2, 2 * k * k)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioRow {
    pub d: u32,
    pub dim: usize,
    pub measured: f64,
    pub formula: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioTable {
    pub n: usize,
    pub k: u32,
    pub rows: Vec<RatioRow>,
    /// min over d ≥ 1 of the measured ratio.
    pub measured_min: f64,
    pub measured_argmin: u32,
    /// The value (4k²+n−2)/(2k²) stated as that minimum.
    pub lemma_min: f64,
}

fn gradient_sq<S: Scalar>(f: &Form<S>) -> S {
    let mut acc = S::zero();
    for p in f.gradient() {
        acc = acc + sphere_integral(&p.multiply(&p).expect("same n"));
    }
    let d = S::from_i64(i64::from(f.degree()));
    acc / (d.clone() * d)
}

fn integral_sq<S: Scalar>(f: &Form<S>) -> S {
    sphere_integral(&f.multiply(f).expect("same n"))
}

/// An element of r^{2k−2d}H_{n,2d} obtained from a random form of degree 2d.
fn random_level_element<S: Scalar>(n: usize, k: u32, d: u32, rng: &mut ChaCha8Rng) -> Result<Form<S>> {
    loop {
        let dim = space_dim(n, 2 * d);
        let coeffs: Vec<S> = (0..dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(rng);
                S::from_rational(&Rational::new(((z * 1024.0).round() as i64).into(), 1024.into()))
            })
            .collect();
        let g = Form::new(n, 2 * d, coeffs)?;
        let h = harmonic_decompose(&g)?.components[&d].clone();
        if integral_sq(&h).to_float() < 1e-8 {
            continue;
        }
        return h.multiply(&r_power(n, k - d));
    }
}

/// Measured ⟨f,f⟩_G/⟨f,f⟩ on a random element of each level.
pub fn measured_level_ratio<S: Scalar>(n: usize, k: u32, d: u32, seed: u64) -> Result<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (u64::from(d) << 32) ^ n as u64);
    let f = random_level_element::<S>(n, k, d, &mut rng)?;
    Ok(gradient_sq(&f) / integral_sq(&f))
}

pub fn metric_ratio_table(n: usize, k: u32, seed: u64) -> Result<RatioTable> {
    if n < 2 || k < 1 {
        return Err(Error::InvalidArgument("metric_ratio_table needs n ≥ 2, k ≥ 1".into()));
    }
    let dims = harmonic_dims(n, 2 * k);
    let mut rows = Vec::new();
    for &(d, dim) in &dims {
        rows.push(RatioRow {
            d,
            dim,
            measured: measured_level_ratio::<f64>(n, k, d, seed)?,
            formula: level_ratio(n, k, d).to_f64().unwrap_or(f64::NAN),
        });
    }
    let (measured_argmin, measured_min) = rows
        .iter()
        .filter(|r| r.d >= 1)
        .map(|r| (r.d, r.measured))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("k ≥ 1 gives a level d ≥ 1");
    Ok(RatioTable {
        n,
        k,
        rows,
        measured_min,
        measured_argmin,
        lemma_min: lemma_min_ratio(n, k).to_f64().unwrap_or(f64::NAN),
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradientBallRatio {
    pub n: usize,
    pub k: u32,
    /// (Vol B_M / Vol B_G)^{1/D_M}.
    pub value: f64,
    /// √((4k²+n−2)/(2k²)).
    pub lemma_bound: f64,
    /// value ≥ lemma_bound, decided in exact arithmetic.
    pub bound_holds: bool,
}

/// (∏_{d≥1} ratio_d^{dim_d})^{1/(2 D_M)}, the ratio of volume radii of the
/// integral and gradient unit balls in M.
pub fn gradient_ball_volume_ratio(n: usize, k: u32) -> GradientBallRatio {
    let dims = harmonic_dims(n, 2 * k);
    let d_m: usize = dims.iter().filter(|(d, _)| *d >= 1).map(|(_, m)| m).sum();
    let mut log = 0.0;
    let mut product = Rational::one();
    for &(d, dim) in dims.iter().filter(|(d, _)| *d >= 1) {
        let r = level_ratio(n, k, d);
        log += dim as f64 * r.to_f64().unwrap_or(f64::NAN).ln();
        product *= Pow::pow(&r, dim as u64);
    }
    let bound = lemma_min_ratio(n, k);
    let bound_holds = product >= Pow::pow(&bound, d_m as u64);
    GradientBallRatio {
        n,
        k,
        value: (log / (2.0 * d_m as f64)).exp(),
        lemma_bound: bound.to_f64().unwrap_or(f64::NAN).sqrt(),
        bound_holds,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DimensionRatio {
    pub n: usize,
    pub k: u32,
    pub d_h: usize,
    pub d_m: usize,
    pub ratio: f64,
    /// 1 − ((2k−1)/(n+2k−2))².
    pub bound: f64,
    pub bound_holds: bool,
}

/// D_H/D_M against 1 − ((2k−1)/(n+2k−2))², exactly.
pub fn dimension_ratio(n: usize, k: u32) -> DimensionRatio {
    let d_h = harmonic_dims(n, 2 * k).last().map(|x| x.1).unwrap_or(0);
    let d_m = space_dim(n, 2 * k) - 1;
    let exact = rational(d_h as i64, d_m as i64);
    let q = rational(2 * i64::from(k) - 1, n as i64 + 2 * i64::from(k) - 2);
    let bound = Rational::one() - &q * &q;
    DimensionRatio {
        n,
        k,
        d_h,
        d_m,
        ratio: exact.to_f64().unwrap_or(f64::NAN),
        bound: bound.to_f64().unwrap_or(f64::NAN),
        bound_holds: exact >= bound,
    }
}
