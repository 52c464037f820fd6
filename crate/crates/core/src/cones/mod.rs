//! Gauges, membership tests and certificates for the sections C̃, S̃q, L̃f of
//! the cones of nonnegative forms, sums of squares and sums of 2k-th powers
//! of linear forms, translated into M by subtracting r^{2k}.
//!
//! The gauge of a section K̃ at f ∈ M is the least t ≥ 0 with f + t·r^{2k} in
//! the cone.

mod linpowers;
mod lp;
mod sdp;
mod sos;

pub use linpowers::{
    gauge_linpowers, gauge_linpowers_lower, gauge_linpowers_upper, LinPowersConfig, LinPowersOutcome,
};
pub use sdp::{gauge_sos, SdpSosSolution};
pub use sos::{
    gauge_sos_bisection, gram_to_form, sos_feasible, sos_feasible_dykstra, SosCertificate, SosOutcome, SosWitness,
};

use serde::{Deserialize, Serialize};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::apolarity::catalecticant;
use crate::linalg::sym_eigen;
use crate::error::{Error, Result};
use crate::metrics::{sphere_integral, MetricKind};
use crate::poly::{r_power, Form, MonomialBasis};
use crate::sphere::{SphereExtremum, SphereSearch};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cone {
    Nonneg,
    Sos,
    Linpowers,
}

impl Cone {
    pub const ALL: [Cone; 3] = [Cone::Nonneg, Cone::Sos, Cone::Linpowers];

    pub fn symbol(self) -> &'static str {
        match self {
            Cone::Nonneg => "C",
            Cone::Sos => "Sq",
            Cone::Linpowers => "Lf",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaugeMethod {
    SphereMin,
    SdpBisection,
    SdpInteriorPoint,
    InnerLp,
    DualCertificate,
    Eigen,
    /// Lower bound from dual witnesses, upper bound from the inner LP.
    Bracket,
    Trivial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "data")]
pub enum Certificate {
    /// A unit vector attaining the sphere minimum.
    Point(Vec<f64>),
    /// Gram matrix over the apolar-orthonormal basis x^α/√α! of P_{n,k}.
    Gram(Vec<Vec<f64>>),
    /// f + t·r^{2k} = Σ λ_i (v_i·x)^{2k}.
    Powers { points: Vec<Vec<f64>>, weights: Vec<f64> },
    /// Coefficients of a nonnegative dual form g.
    Witness(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub method: GaugeMethod,
    pub certificate: Option<Certificate>,
}

impl GaugeResult {
    pub fn exact(value: f64, method: GaugeMethod, certificate: Option<Certificate>) -> Self {
        Self {
            value,
            lower: value,
            upper: value,
            method,
            certificate,
        }
    }

    pub fn zero() -> Self {
        Self::exact(0.0, GaugeMethod::Trivial, None)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Rejects forms whose sphere integral is not zero to `tol`·(1+‖f‖).
pub fn check_mean_zero(f: &Form<f64>, tol: f64) -> Result<()> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree("sections in M", f.degree()));
    }
    let mean = sphere_integral(f);
    if mean.abs() > tol * (1.0 + f.norm_coeffs()) {
        return Err(Error::NonzeroMean(mean));
    }
    Ok(())
}

/// Minimum of f on the unit sphere (multi-start search).
pub fn min_on_sphere(f: &Form<f64>) -> SphereExtremum {
    SphereSearch::default().min_form(f)
}

/// Gauge of C̃: |min f| on the sphere.
pub fn gauge_nonneg(f: &Form<f64>) -> Result<GaugeResult> {
    gauge_nonneg_with(f, &SphereSearch::default())
}

pub fn gauge_nonneg_with(f: &Form<f64>, search: &SphereSearch) -> Result<GaugeResult> {
    check_mean_zero(f, 1e-10)?;
    if f.is_zero() {
        return Ok(GaugeResult::zero());
    }
    let m = search.min_form(f);
    let value = (-m.value).max(0.0);
    Ok(GaugeResult::exact(value, GaugeMethod::SphereMin, Some(Certificate::Point(m.point))))
}

/// ‖f‖_sq: spectral norm of the integral catalecticant.
pub fn sq_norm(f: &Form<f64>) -> Result<f64> {
    let ev = catalecticant(f, MetricKind::Integral)?.eigenvalues();
    Ok(ev.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// max ⟨f, g²⟩ over ‖g‖₂ = 1: the largest catalecticant eigenvalue.
pub fn support_sos(f: &Form<f64>) -> Result<f64> {
    Ok(catalecticant(f, MetricKind::Integral)?.max_eigenvalue())
}

/// Membership in the dual of Sq for the apolar pairing: PSD apolar catalecticant.
pub fn dual_sos_membership(f: &Form<f64>) -> Result<bool> {
    Ok(catalecticant(f, MetricKind::Apolar)?.min_eigenvalue() >= -1e-10)
}

/// A random form with positive semidefinite apolar catalecticant, close to the
/// boundary: r^{2k} + t·g for a Gaussian g, with t drawn from [0.9, 1) times
/// the largest t keeping the catalecticant PSD.
pub fn random_dual_sos_form<R: Rng + ?Sized>(n: usize, two_k: u32, rng: &mut R) -> Result<Form<f64>> {
    let k = two_k / 2;
    let r = r_power::<f64>(n, k);
    let dim = MonomialBasis::get(n, two_k).len();
    let g = Form::new(n, two_k, (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())?;
    let hr = catalecticant(&r, MetricKind::Apolar)?.matrix;
    let hg = catalecticant(&g, MetricKind::Apolar)?.matrix;
    let li = hr
        .cholesky()
        .ok_or_else(|| Error::Numerical("apolar catalecticant of r^2k not positive definite".into()))?
        .l()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular factor".into()))?;
    let (values, _) = sym_eigen(&(&li * hg * li.transpose()));
    let u: f64 = rng.gen_range(0.9..1.0);
    let t = if values[0] < 0.0 { u / -values[0] } else { u };
    r.try_add(&g.scale(&t))
}

/// Evaluates the gauge of one of the three sections with default settings.
pub fn gauge(cone: Cone, f: &Form<f64>, tol: f64) -> Result<GaugeResult> {
    match cone {
        Cone::Nonneg => gauge_nonneg(f),
        Cone::Sos => gauge_sos(f, tol),
        Cone::Linpowers => Ok(gauge_linpowers(f, &LinPowersConfig { tol, ..Default::default() })?.gauge),
    }
}
