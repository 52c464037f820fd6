//! L^p norms on the sphere, the sup norm, and the gradient norm.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{gradient_ip, sphere_integral};
use crate::error::{Error, Result};
use crate::poly::Form;
use crate::sphere::{uniform_sphere_point, SphereExtremum, SphereSearch};

/// An L^p norm value; Monte Carlo estimates carry a 95% interval.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    pub p: f64,
    pub value: f64,
    pub exact: bool,
    pub ci: Option<(f64, f64)>,
}

const MC_SAMPLES: usize = 200_000;
const MC_SEED: u64 = 0x1a_0b0e;

/// (∫ |f|^p dσ)^{1/p}. Even integer p is computed by expanding f^p and
/// integrating moments; other p by Monte Carlo with a fixed seed.
pub fn lp_norm(f: &Form<f64>, p: f64) -> Result<LpNorm> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("p must be a finite number ≥ 1, got {p}")));
    }
    if p.fract() == 0.0 && (p as u32) % 2 == 0 {
        let integral = sphere_integral(&f.pow(p as u32)).max(0.0);
        return Ok(LpNorm {
            p,
            value: integral.powf(1.0 / p),
            exact: true,
            ci: None,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..MC_SAMPLES {
        let x = uniform_sphere_point(f.n(), &mut rng);
        let v = f.eval(&x).abs().powf(p);
        sum += v;
        sum_sq += v * v;
    }
    let n = MC_SAMPLES as f64;
    let mean = sum / n;
    let se = ((sum_sq / n - mean * mean).max(0.0) / n).sqrt();
    Ok(LpNorm {
        p,
        value: mean.powf(1.0 / p),
        exact: false,
        ci: Some(((mean - 1.96 * se).max(0.0).powf(1.0 / p), (mean + 1.96 * se).powf(1.0 / p))),
    })
}

/// max |f| on the sphere, by the default multi-start search.
pub fn linf_norm(f: &Form<f64>) -> SphereExtremum {
    SphereSearch::default().max_abs(f)
}

/// ‖f‖_G = √⟨f,f⟩_G.
pub fn gradient_norm(f: &Form<f64>) -> Result<f64> {
    Ok(gradient_ip(f, f)?.max(0.0).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KelloggCheck {
    /// max over the sphere of ⟨∇f, ∇f⟩.
    pub gradient_max: f64,
    /// (2k)²‖f‖²_∞.
    pub scaled_linf: f64,
    pub rel_error: f64,
}

/// Kellogg: for a form of degree 2k, max_S |∇f|² = 4k²‖f‖²_∞. Both sides use
/// the same sphere search.
pub fn kellogg_check(f: &Form<f64>) -> Result<KelloggCheck> {
    let search = SphereSearch::default();
    let mut grad_sq = Form::zero(f.n(), 2 * f.degree() - 2);
    for p in f.gradient() {
        grad_sq = grad_sq.try_add(&p.multiply(&p)?)?;
    }
    let gradient_max = search.max_form(&grad_sq).value;
    let d = f64::from(f.degree());
    let scaled_linf = (d * search.max_abs(f).value).powi(2);
    Ok(KelloggCheck {
        gradient_max,
        scaled_linf,
        rel_error: (gradient_max - scaled_linf).abs() / scaled_linf.max(f64::MIN_POSITIVE),
    })
}

/// binomial(2kn+n−1, 2kn)^{1/(2n)}, the constant in ‖f‖_∞ ≤ C‖f‖_{2n}.
pub fn barvinok_constant(n: usize, k: u32) -> f64 {
    let top = 2 * u64::from(k) * n as u64;
    // log binomial(top+n−1, n−1)
    let log_binom: f64 = (1..n as u64).map(|j| ((top + j) as f64).ln() - (j as f64).ln()).sum();
    (log_binom / (2.0 * n as f64)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::r_power;

    #[test]
    fn examples() {
        let r4 = r_power::<f64>(3, 2);
        for p in [2.0, 4.0, 3.0] {
            assert!((lp_norm(&r4, p).unwrap().value - 1.0).abs() < 1e-12);
        }
        let x1 = Form::<f64>::variable(3, 0);
        assert!((linf_norm(&x1).value - 1.0).abs() < 1e-12);
        let x1sq = Form::<f64>::monomial(&[2, 0, 0], 1.0);
        assert!((lp_norm(&x1sq, 2.0).unwrap().value - 0.2f64.sqrt()).abs() < 1e-14);
        assert!(lp_norm(&x1sq, 0.5).is_err());
    }

    #[test]
    fn monte_carlo_interval_brackets_exact() {
        let f = Form::<f64>::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![1, 1], 0.5)]).unwrap();
        let exact = lp_norm(&f, 4.0).unwrap().value;
        // Monte Carlo path at p = 4 + tiny
        let mc = lp_norm(&f, 4.000001).unwrap();
        let (lo, hi) = mc.ci.unwrap();
        assert!(lo - 1e-4 <= exact && exact <= hi + 1e-4, "{lo} {exact} {hi}");
    }

    #[test]
    fn barvinok_arithmetic_bound() {
        for n in 1..=50 {
            for k in 1..=5 {
                assert!(barvinok_constant(n, k) <= 2.0 * f64::from(2 * k + 1).sqrt());
            }
        }
    }
}
