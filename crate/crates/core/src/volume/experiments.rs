use serde::{Deserialize, Serialize};

use super::bounds::{bound_table, BoundTable};
use super::{body_volume, Body, VolumeConfig, VolumeEstimate};
use crate::cones::Cone;
use crate::error::{Error, Result};

/// Position of a volume estimate relative to its proven window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub body: String,
    pub lower: f64,
    pub upper: f64,
    /// The estimate from upper gauge endpoints, widened upward by its CI,
    /// reaches the lower bound.
    pub lower_ok: bool,
    /// The estimate from lower gauge endpoints, widened downward by its CI,
    /// stays below the upper bound.
    pub upper_ok: bool,
    /// [value_lo CI low, value_hi CI high] meets the window.
    pub intersects: bool,
}

impl WindowCheck {
    pub fn inside(&self) -> bool {
        self.lower_ok && self.upper_ok
    }
}

pub fn window_check(est: &VolumeEstimate, table: &BoundTable) -> Result<WindowCheck> {
    let row = table
        .row(&est.body)
        .ok_or_else(|| Error::InvalidArgument(format!("no window for body {}", est.body)))?;
    let lower_ok = est.value_lo_ci[1] >= row.lower;
    let upper_ok = est.value_hi_ci[0] <= row.upper;
    Ok(WindowCheck {
        body: est.body.clone(),
        lower: row.lower,
        upper: row.upper,
        lower_ok,
        upper_ok,
        intersects: est.value_lo_ci[0] <= row.upper && est.value_hi_ci[1] >= row.lower,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopePoint {
    pub n: usize,
    pub estimate: VolumeEstimate,
    /// The value entering the fit: the estimate, or the bracket midpoint for L̃f.
    pub fitted_value: f64,
    pub window: WindowCheck,
    /// Left out of the fit because most samples were undecided or failed.
    pub excluded: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub cone: Cone,
    pub k: u32,
    pub points: Vec<SlopePoint>,
    /// Least-squares slope of log(value) against log(n).
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; absent with fewer than three points.
    pub std_error: Option<f64>,
    /// Exponent of n in the asymptotic volume: −1/2, −k/2, −k+1/2.
    pub theory_slope: f64,
}

impl SlopeFit {
    pub fn excluded(&self) -> Vec<usize> {
        self.points.iter().filter(|p| p.excluded).map(|p| p.n).collect()
    }
}

pub fn theory_slope(cone: Cone, k: u32) -> f64 {
    match cone {
        Cone::Nonneg => -0.5,
        Cone::Sos => -(k as f64) / 2.0,
        Cone::Linpowers => -(k as f64) + 0.5,
    }
}

/// Ordinary least squares y = a + b x; returns (b, a, se(b)).
fn ols(xs: &[f64], ys: &[f64]) -> (f64, f64, Option<f64>) {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let se = (xs.len() > 2).then(|| {
        let ssr: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
        (ssr / (m - 2.0) / sxx).sqrt()
    });
    (b, a, se)
}

/// Volume estimates of one section over a range of n at degree 2k, and the
/// log-log slope through them. `cfg.samples == 0` selects the default count.
pub fn slope_experiment(
    cone: Cone,
    k: u32,
    n_range: std::ops::RangeInclusive<usize>,
    cfg: &VolumeConfig,
) -> Result<SlopeFit> {
    let body = Body::from(cone);
    let mut cfg = cfg.clone();
    if cfg.samples == 0 {
        cfg.samples = VolumeConfig::default_samples(body);
    }
    let mut points = Vec::new();
    for n in n_range {
        let est = body_volume(body, n, 2 * k, &cfg)?;
        let table = bound_table(n, 2 * k)?;
        let window = window_check(&est, &table)?;
        let fitted_value = if cone == Cone::Linpowers { est.bracket_midpoint() } else { est.value };
        points.push(SlopePoint {
            n,
            excluded: est.undecided_dominated(),
            estimate: est,
            fitted_value,
            window,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| ((p.n as f64).ln(), p.fitted_value.ln()))
        .unzip();
    if xs.len() < 2 {
        return Err(Error::InvalidArgument("slope fit needs at least two usable values of n".into()));
    }
    let (slope, intercept, std_error) = ols(&xs, &ys);
    Ok(SlopeFit {
        cone,
        k,
        points,
        slope,
        intercept,
        std_error,
        theory_slope: theory_slope(cone, k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SantaloReport {
    pub n: usize,
    pub two_k: u32,
    pub sos: VolumeEstimate,
    pub sos_polar: VolumeEstimate,
    /// Normalized Vol S̃q · Vol S̃q°, i.e. ((Vol S̃q Vol S̃q°)/(Vol B_M)²)^{1/D_M}.
    pub product: f64,
    pub product_ci: [f64; 2],
    /// Lower end of the product interval is at most 1.
    pub santalo_holds: bool,
    pub linf_ball: VolumeEstimate,
    pub nonneg: VolumeEstimate,
    /// (Vol B_∞ / Vol C̃)^{1/D_M}.
    pub ratio: f64,
    pub ratio_ci: [f64; 2],
    /// Upper end of the ratio interval is at least 1/4.
    pub rogers_shephard_holds: bool,
}

fn with_samples(cfg: &VolumeConfig, body: Body) -> VolumeConfig {
    let mut c = cfg.clone();
    if c.samples == 0 {
        c.samples = VolumeConfig::default_samples(body);
    }
    c
}

/// Blaschke–Santaló product for S̃q and its polar (the origin is the
/// Santaló point by rotation invariance), and the B_∞ versus C̃ ratio.
pub fn santalo_and_rogers_shephard_checks(n: usize, two_k: u32, cfg: &VolumeConfig) -> Result<SantaloReport> {
    let sos = body_volume(Body::Sos, n, two_k, &with_samples(cfg, Body::Sos))?;
    let sos_polar = body_volume(Body::SosPolar, n, two_k, &with_samples(cfg, Body::SosPolar))?;
    let linf_ball = body_volume(Body::LinfBall, n, two_k, &with_samples(cfg, Body::LinfBall))?;
    let nonneg = body_volume(Body::Nonneg, n, two_k, &with_samples(cfg, Body::Nonneg))?;
    // the upper-bound comparison uses the larger S̃q volume (lower gauge ends)
    let product_ci = [sos.value_hi_ci[0] * sos_polar.ci_low, sos.value_hi_ci[1] * sos_polar.ci_high];
    let ratio_ci = [linf_ball.ci_low / nonneg.ci_high, linf_ball.ci_high / nonneg.ci_low];
    Ok(SantaloReport {
        n,
        two_k,
        product: sos.value * sos_polar.value,
        santalo_holds: product_ci[0] <= 1.0,
        product_ci,
        ratio: linf_ball.value / nonneg.value,
        rogers_shephard_holds: ratio_ci[1] >= 0.25,
        ratio_ci,
        sos,
        sos_polar,
        linf_ball,
        nonneg,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoincidence {
    pub n: usize,
    pub estimates: Vec<VolumeEstimate>,
    /// Largest relative difference between two of the three estimates.
    pub max_rel_diff: f64,
    /// All pairs of bootstrap intervals overlap.
    pub coincide: bool,
}

/// For quadratic forms the three sections are the same body.
pub fn quadratic_coincidence(n: usize, cfg: &VolumeConfig) -> Result<QuadraticCoincidence> {
    let mut cfg = cfg.clone();
    if cfg.samples == 0 {
        cfg.samples = VolumeConfig::default_samples(Body::Linpowers);
    }
    let estimates: Vec<VolumeEstimate> = Cone::ALL
        .iter()
        .map(|&c| body_volume(Body::from(c), n, 2, &cfg))
        .collect::<Result<_>>()?;
    let mut max_rel_diff = 0.0f64;
    let mut coincide = true;
    for a in &estimates {
        for b in &estimates {
            max_rel_diff = max_rel_diff.max((a.value - b.value).abs() / a.value.max(b.value));
            coincide &= a.ci_low <= b.ci_high && b.ci_low <= a.ci_high;
        }
    }
    Ok(QuadraticCoincidence {
        n,
        estimates,
        max_rel_diff,
        coincide,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ols_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (b, a, se) = ols(&xs, &ys);
        assert!((b + 0.5).abs() < 1e-12 && (a - 2.0).abs() < 1e-12 && se.unwrap() < 1e-12);
    }

    #[test]
    fn quadratic_sections_coincide() {
        let q = quadratic_coincidence(3, &VolumeConfig::new(200, 9)).unwrap();
        assert!(q.coincide, "{q:?}");
        assert!(q.max_rel_diff < 1e-3, "{}", q.max_rel_diff);
    }

    #[test]
    fn small_window_check() {
        let est = body_volume(Body::Nonneg, 3, 4, &VolumeConfig::new(300, 4)).unwrap();
        let w = window_check(&est, &bound_table(3, 4).unwrap()).unwrap();
        assert!(w.inside() && w.intersects, "{w:?} {}", est.value);
    }
}
