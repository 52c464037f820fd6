//! Monte Carlo estimates of normalized volumes (Vol K / Vol B_M)^{1/D_M} of
//! bodies in M through their gauges, average norms over the unit sphere S_M,
//! the explicit bound windows, and the experiments built on top of them.
//!
//! Sample i is always drawn from `sample_rng(seed, i)`, so different bodies
//! evaluated with the same seed see the same forms, and the thread count never
//! changes a result.

mod bounds;
mod experiments;

pub use bounds::{bound_table, BoundRow, BoundTable};
pub use experiments::{
    quadratic_coincidence, santalo_and_rogers_shephard_checks, slope_experiment, window_check, QuadraticCoincidence,
    SantaloReport, SlopeFit, SlopePoint, WindowCheck,
};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{
    gauge_linpowers, gauge_nonneg_with, gauge_sos, support_sos, Cone, GaugeMethod, GaugeResult, LinPowersConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{dim_m, integral_ip, orthonormal_basis, MetricKind, Space};
use crate::poly::Form;
use crate::sphere::SphereSearch;

pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Convex bodies in M containing the origin, identified by their gauges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Body {
    /// B_M, the unit ball of the integral metric.
    Ball,
    /// C̃
    Nonneg,
    /// S̃q
    Sos,
    /// L̃f
    Linpowers,
    /// The polar of S̃q; its gauge is the support function of S̃q.
    SosPolar,
    /// B_∞ = {f ∈ M : |f| ≤ 1 on the sphere}.
    LinfBall,
}

impl Body {
    pub fn symbol(self) -> &'static str {
        match self {
            Body::Ball => "B_M",
            Body::Nonneg => "C~",
            Body::Sos => "Sq~",
            Body::Linpowers => "Lf~",
            Body::SosPolar => "Sq~polar",
            Body::LinfBall => "B_inf",
        }
    }
}

impl From<Cone> for Body {
    fn from(c: Cone) -> Self {
        match c {
            Cone::Nonneg => Body::Nonneg,
            Cone::Sos => Body::Sos,
            Cone::Linpowers => Body::Linpowers,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VolumeConfig {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub bootstrap: usize,
    /// A gauge bracket wider than this (relative to its upper end) counts as undecided.
    pub undecided_width: f64,
    /// Exchange-method settings for L̃f; `None` uses `LinPowersConfig::sampling(n)`.
    pub linpowers: Option<LinPowersConfig>,
}

impl VolumeConfig {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            tol: 1e-8,
            bootstrap: BOOTSTRAP_RESAMPLES,
            undecided_width: 0.05,
            linpowers: None,
        }
    }

    /// Default sample count per body: cheap gauges get more samples.
    pub fn default_samples(body: Body) -> usize {
        match body {
            Body::Nonneg | Body::LinfBall | Body::Ball | Body::SosPolar => 20_000,
            Body::Sos => 2_000,
            Body::Linpowers => 1_000,
        }
    }
}

/// Generator for sample `index` under master seed `seed`.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniform point of S_M: a normalized standard Gaussian in an L²-orthonormal
/// basis of M.
pub fn sample_uniform_sm<R: Rng + ?Sized>(n: usize, two_k: u32, rng: &mut R) -> Result<Form<f64>> {
    let data = orthonormal_basis(n, two_k, Space::MeanZero, MetricKind::Integral)?;
    let dim = data.basis.ncols();
    let mut z = DVector::from_iterator(dim, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let norm = z.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    z /= norm;
    let coeffs = &data.basis * z;
    Form::new(n, two_k, coeffs.as_slice().to_vec())
}

/// Gauge of `body` at f with the settings used inside sampling loops.
pub fn body_gauge(body: Body, f: &Form<f64>, cfg: &VolumeConfig) -> Result<GaugeResult> {
    let n = f.n();
    match body {
        Body::Ball => Ok(GaugeResult::exact(integral_ip(f, f)?.sqrt(), GaugeMethod::Trivial, None)),
        Body::Nonneg => gauge_nonneg_with(f, &SphereSearch::sampling(n)),
        Body::Sos => gauge_sos(f, cfg.tol),
        Body::Linpowers => {
            let lp = cfg.linpowers.clone().unwrap_or_else(|| LinPowersConfig::sampling(n));
            Ok(gauge_linpowers(f, &lp)?.gauge)
        }
        Body::SosPolar => Ok(GaugeResult::exact(support_sos(f)?, GaugeMethod::Eigen, None)),
        Body::LinfBall => {
            let search = SphereSearch::sampling(n);
            let lo = gauge_nonneg_with(f, &search)?.value;
            let hi = gauge_nonneg_with(&f.scale(&-1.0), &search)?.value;
            Ok(GaugeResult::exact(lo.max(hi), GaugeMethod::SphereMin, None))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GaugeStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Mean of upper − lower over the gauge brackets.
    pub mean_width: f64,
    /// Largest (upper − lower)/upper.
    pub max_rel_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub body: String,
    pub n: usize,
    pub two_k: u32,
    pub d_m: usize,
    pub samples: usize,
    /// (mean G^{-D_M})^{1/D_M} from the gauge values.
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Same estimator from the upper gauge endpoints (the smaller volume).
    pub value_lo: f64,
    pub value_lo_ci: [f64; 2],
    /// Same estimator from the lower gauge endpoints (the larger volume).
    pub value_hi: f64,
    pub value_hi_ci: [f64; 2],
    /// (mean G)^{-1}, never above the direct estimator by Hölder.
    pub jensen_bound: f64,
    /// Standard error of mean G propagated to the Jensen bound.
    pub jensen_se: f64,
    /// Largest single-sample share of Σ G^{-D_M}.
    pub tail_share: f64,
    pub gauge_stats: GaugeStats,
    /// Brackets wider than the configured threshold.
    pub undecided: usize,
    /// Samples whose gauge evaluation failed; left out of every estimator.
    pub failures: usize,
}

impl VolumeEstimate {
    /// More than half the samples were undecided or failed.
    pub fn undecided_dominated(&self) -> bool {
        2 * (self.undecided + self.failures) > self.samples
    }

    /// Half-width of the bootstrap interval relative to the value.
    pub fn rel_half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low) / self.value
    }

    /// Midpoint of the interval spanned by the endpoint estimators.
    pub fn bracket_midpoint(&self) -> f64 {
        0.5 * (self.value_lo + self.value_hi)
    }
}

/// log((1/N) Σ exp(x_i)) over the selected indices.
fn log_mean_exp(x: &[f64], idx: impl Iterator<Item = usize> + Clone) -> f64 {
    let m = idx.clone().map(|i| x[i]).fold(f64::NEG_INFINITY, f64::max);
    if m == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut count = 0usize;
    let s: f64 = idx
        .map(|i| {
            count += 1;
            (x[i] - m).exp()
        })
        .sum();
    m + (s / count as f64).ln()
}

struct Estimator {
    value: f64,
    ci: [f64; 2],
}

/// Direct estimator exp(log_mean_exp(−D log G)/D) with a percentile bootstrap
/// over the shared resample indices.
fn direct_estimator(gauges: &[f64], d: f64, resamples: &[Vec<usize>]) -> Estimator {
    let logs: Vec<f64> = gauges.iter().map(|g| -d * g.ln()).collect();
    let est = |idx: &[usize]| (log_mean_exp(&logs, idx.iter().copied()) / d).exp();
    let value = (log_mean_exp(&logs, 0..logs.len()) / d).exp();
    if resamples.is_empty() {
        return Estimator { value, ci: [value, value] };
    }
    let mut boot: Vec<f64> = resamples.iter().map(|idx| est(idx)).collect();
    boot.sort_by(f64::total_cmp);
    let q = |p: f64| boot[((p * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    // a percentile interval need not cover the point estimate for skewed
    // integrands; widen it to do so
    Estimator {
        value,
        ci: [q(0.025).min(value), q(0.975).max(value)],
    }
}

fn resample_indices(len: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    if len == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb007_57a9);
    (0..count).map(|_| (0..len).map(|_| rng.gen_range(0..len)).collect()).collect()
}

/// Normalized volume from gauge brackets already evaluated on uniform samples
/// of S_M. Failed samples are passed as `None`.
pub fn normalized_volume_from_gauges(
    body: &str,
    n: usize,
    two_k: u32,
    gauges: &[Option<GaugeResult>],
    cfg: &VolumeConfig,
) -> Result<VolumeEstimate> {
    let d_m = dim_m(n, two_k);
    let ok: Vec<&GaugeResult> = gauges.iter().flatten().collect();
    let failures = gauges.len() - ok.len();
    if ok.is_empty() {
        return Err(Error::Numerical(format!("no gauge evaluation succeeded for {body}")));
    }
    if let Some(bad) = ok.iter().find(|g| !(g.lower > 0.0) || !(g.upper >= g.lower)) {
        return Err(Error::Numerical(format!(
            "gauge of {body} must be positive on S_M, got [{}, {}]",
            bad.lower, bad.upper
        )));
    }
    let d = d_m as f64;
    let values: Vec<f64> = ok.iter().map(|g| g.value.clamp(g.lower, g.upper)).collect();
    let uppers: Vec<f64> = ok.iter().map(|g| g.upper).collect();
    let lowers: Vec<f64> = ok.iter().map(|g| g.lower).collect();
    let resamples = resample_indices(ok.len(), cfg.bootstrap, cfg.seed);
    let main = direct_estimator(&values, d, &resamples);
    let lo = direct_estimator(&uppers, d, &resamples);
    let hi = direct_estimator(&lowers, d, &resamples);

    let count = ok.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    let se_mean = (var / count).sqrt();
    let logs: Vec<f64> = values.iter().map(|g| -d * g.ln()).collect();
    let lmax = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = logs.iter().map(|l| (l - lmax).exp()).sum();
    let widths: Vec<f64> = ok.iter().map(|g| g.upper - g.lower).collect();
    let rel_widths: Vec<f64> = ok.iter().map(|g| (g.upper - g.lower) / g.upper).collect();
    let undecided = rel_widths.iter().filter(|w| **w > cfg.undecided_width).count();

    Ok(VolumeEstimate {
        body: body.to_string(),
        n,
        two_k,
        d_m,
        samples: gauges.len(),
        value: main.value,
        ci_low: main.ci[0],
        ci_high: main.ci[1],
        value_lo: lo.value,
        value_lo_ci: lo.ci,
        value_hi: hi.value,
        value_hi_ci: hi.ci,
        jensen_bound: 1.0 / mean,
        jensen_se: se_mean / (mean * mean),
        tail_share: 1.0 / total,
        gauge_stats: GaugeStats {
            mean,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_width: widths.iter().sum::<f64>() / count,
            max_rel_width: rel_widths.iter().copied().fold(0.0, f64::max),
        },
        undecided,
        failures,
    })
}

/// Evaluates `gauge_fn` on `cfg.samples` uniform samples of S_M (in parallel,
/// deterministically) and returns the normalized-volume estimate.
pub fn normalized_volume<F>(body: &str, gauge_fn: F, n: usize, two_k: u32, cfg: &VolumeConfig) -> Result<VolumeEstimate>
where
    F: Fn(&Form<f64>) -> Result<GaugeResult> + Sync,
{
    let gauges = sample_map(n, two_k, cfg.samples, cfg.seed, |f| gauge_fn(f).ok())?;
    normalized_volume_from_gauges(body, n, two_k, &gauges, cfg)
}

/// Normalized volume of one of the named bodies.
pub fn body_volume(body: Body, n: usize, two_k: u32, cfg: &VolumeConfig) -> Result<VolumeEstimate> {
    normalized_volume(body.symbol(), |f| body_gauge(body, f, cfg), n, two_k, cfg)
}

/// Applies `map` to samples 0..count of S_M, in index order.
pub fn sample_map<T, F>(n: usize, two_k: u32, count: usize, seed: u64, map: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&Form<f64>) -> T + Sync,
{
    // warm the shared caches before fanning out
    sample_uniform_sm(n, two_k, &mut sample_rng(seed, 0))?;
    (0..count as u64)
        .into_par_iter()
        .map(|i| sample_uniform_sm(n, two_k, &mut sample_rng(seed, i)).map(|f| map(&f)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub n: usize,
    pub two_k: u32,
    pub samples: usize,
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Mean of `norm_fn` over uniform samples of S_M with a percentile bootstrap CI.
pub fn average_norm<F>(norm_fn: F, n: usize, two_k: u32, samples: usize, seed: u64) -> Result<NormEstimate>
where
    F: Fn(&Form<f64>) -> Result<f64> + Sync,
{
    let values: Vec<f64> = sample_map(n, two_k, samples, seed, |f| norm_fn(f))?
        .into_iter()
        .collect::<Result<_>>()?;
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    let resamples = resample_indices(values.len(), BOOTSTRAP_RESAMPLES, seed);
    let mut boot: Vec<f64> = resamples
        .iter()
        .map(|idx| idx.iter().map(|&i| values[i]).sum::<f64>() / count)
        .collect();
    boot.sort_by(f64::total_cmp);
    let (ci_low, ci_high) = if boot.is_empty() {
        (mean, mean)
    } else {
        (boot[(0.025 * (boot.len() - 1) as f64).round() as usize], boot[(0.975 * (boot.len() - 1) as f64).round() as usize])
    };
    Ok(NormEstimate {
        n,
        two_k,
        samples,
        mean,
        std_error: (var / count).sqrt(),
        ci_low: ci_low.min(mean),
        ci_high: ci_high.max(mean),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::sphere_integral;

    #[test]
    fn samples_are_unit_and_mean_zero() {
        for (n, two_k) in [(2, 2), (3, 4), (4, 4), (3, 6)] {
            for i in 0..20 {
                let f = sample_uniform_sm(n, two_k, &mut sample_rng(7, i)).unwrap();
                assert!((integral_ip(&f, &f).unwrap() - 1.0).abs() < 1e-12);
                assert!(sphere_integral(&f).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let a = sample_uniform_sm(3, 4, &mut sample_rng(3, 11)).unwrap();
        let b = sample_uniform_sm(3, 4, &mut sample_rng(3, 11)).unwrap();
        let c = sample_uniform_sm(3, 4, &mut sample_rng(3, 12)).unwrap();
        assert_eq!(a.coeffs(), b.coeffs());
        assert_ne!(a.coeffs(), c.coeffs());
    }

    #[test]
    fn second_moments_match_uniform_sphere() {
        // E⟨f, e_i⟩² = 1/D_M for f uniform on S_M
        let (n, two_k) = (3, 4);
        let data = orthonormal_basis(n, two_k, Space::MeanZero, MetricKind::Integral).unwrap();
        let dm = dim_m(n, two_k);
        let draws = 10_000;
        let coords: Vec<Vec<f64>> = sample_map(n, two_k, draws, 5, |f| data.coords(f).as_slice().to_vec()).unwrap();
        for i in 0..dm {
            let sq: Vec<f64> = coords.iter().map(|c| c[i] * c[i]).collect();
            let mean = sq.iter().sum::<f64>() / draws as f64;
            let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let se = (var / draws as f64).sqrt();
            assert!((mean - 1.0 / dm as f64).abs() < 3.0 * se + 1e-12, "direction {i}: {mean}");
        }
    }

    #[test]
    fn ball_and_homothety() {
        let cfg = VolumeConfig::new(500, 1);
        let v = body_volume(Body::Ball, 3, 4, &cfg).unwrap();
        assert!((v.value - 1.0).abs() < 1e-12 && v.ci_low <= 1.0 + 1e-12 && v.ci_high >= 1.0 - 1e-12);
        let half = normalized_volume(
            "2B_M",
            |f| Ok(GaugeResult::exact(2.0 * integral_ip(f, f)?.sqrt(), GaugeMethod::Trivial, None)),
            3,
            4,
            &cfg,
        )
        .unwrap();
        assert!((half.value - 0.5).abs() < 1e-12);
        assert!((half.jensen_bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn direct_estimator_dominates_jensen() {
        let cfg = VolumeConfig::new(400, 2);
        let v = body_volume(Body::Nonneg, 3, 4, &cfg).unwrap();
        assert!(v.ci_low <= v.value && v.value <= v.ci_high);
        assert!(v.value >= v.jensen_bound - 2.0 * v.jensen_se);
        assert_eq!(v.failures, 0);
        assert!(v.tail_share > 0.0 && v.tail_share <= 1.0);
    }

    #[test]
    fn log_mean_exp_is_stable() {
        let x = [1000.0, 1000.0];
        assert!((log_mean_exp(&x, 0..2) - 1000.0).abs() < 1e-12);
        let y = [0.0, (3.0f64).ln()];
        assert!((log_mean_exp(&y, 0..2) - 2.0f64.ln()).abs() < 1e-12);
    }
}
