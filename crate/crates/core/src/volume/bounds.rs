//! Explicit windows for the normalized volumes of C̃, S̃q, L̃f and for the
//! average L^∞ and sq norms over S_M.

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::apolarity::t_constant;
use crate::error::{Error, Result};
use crate::metrics::dim_m;
use crate::poly::io::format_rational;
use crate::poly::monomial::{factorial_f64, space_dim};
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub body: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub n: usize,
    pub two_k: u32,
    pub rows: Vec<BoundRow>,
    /// c = ∫ x_1^{2k} dσ, exact.
    pub c: String,
    pub c_f64: f64,
    pub d_m: usize,
    /// Dimension of the harmonic forms of degree 2k.
    pub d_h: usize,
    /// α = 1 − ((2k−1)/(n+2k−2))², exact.
    pub alpha: String,
    pub alpha_f64: f64,
    /// 2√(2n(2k+1)), the bound on the average L^∞ norm over S_M.
    pub avg_linf_bound: f64,
    /// 4^{2k}(2k)!√24·n^{−k/2}/k!, the bound on the average sq norm over S_M.
    pub avg_sq_bound: f64,
}

impl BoundTable {
    pub fn row(&self, body: &str) -> Option<&BoundRow> {
        self.rows.iter().find(|r| r.body == body)
    }
}

pub fn alpha_exact(n: usize, k: u32) -> Rational {
    let q = BigRational::new((2 * k as i64 - 1).into(), (n as i64 + 2 * k as i64 - 2).into());
    BigRational::one() - &q * &q
}

pub fn bound_table(n: usize, two_k: u32) -> Result<BoundTable> {
    if n < 2 || two_k < 2 || two_k % 2 == 1 {
        return Err(Error::InvalidArgument(format!(
            "bound table needs n ≥ 2 and an even degree ≥ 2, got n={n}, 2k={two_k}"
        )));
    }
    let k = two_k / 2;
    let (nf, kf) = (n as f64, k as f64);
    let kfact = factorial_f64(k);
    let two_k_fact = factorial_f64(two_k);
    let sqrt24 = 24f64.sqrt();
    let four_2k = 4f64.powi(two_k as i32);
    let alpha = alpha_exact(n, k);
    let alpha_f64 = alpha.to_f64().unwrap_or(f64::NAN);

    let nonneg = BoundRow {
        body: "C~".into(),
        lower: nf.powf(-0.5) / (2.0 * (4.0 * kf + 2.0).sqrt()),
        upper: 4.0 * (2.0 * kf * kf / (4.0 * kf * kf + nf - 2.0)).sqrt(),
    };
    let sq_upper = four_2k * two_k_fact * sqrt24 * nf.powf(-kf / 2.0) / kfact;
    let sos = BoundRow {
        body: "Sq~".into(),
        lower: kfact * kfact * nf.powf(kf / 2.0) / (four_2k * two_k_fact * sqrt24 * (nf / 2.0 + 2.0 * kf).powf(kf)),
        upper: sq_upper,
    };
    let lf = BoundRow {
        body: "Lf~".into(),
        lower: kfact * (4.0 * kf * kf + nf - 2.0).sqrt() / (4.0 * kf * 2f64.sqrt() * (nf / 2.0 + 2.0 * kf).powf(kf)),
        upper: 2.0 * (nf * (4.0 * kf + 2.0)).sqrt() * (kfact / (nf / 2.0 + kf).powf(kf)).powf(alpha_f64),
    };
    let c = t_constant(n, two_k);
    Ok(BoundTable {
        n,
        two_k,
        rows: vec![nonneg, sos, lf],
        c: format_rational(&c),
        c_f64: c.to_f64().unwrap_or(f64::NAN),
        d_m: dim_m(n, two_k),
        d_h: space_dim(n, two_k) - space_dim(n, two_k - 2),
        alpha: format_rational(&alpha),
        alpha_f64,
        avg_linf_bound: 2.0 * (2.0 * nf * (2.0 * kf + 1.0)).sqrt(),
        avg_sq_bound: sq_upper,
    })
}
