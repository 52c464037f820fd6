//! Sum-of-squares feasibility by alternating projections (Dykstra), with
//! Gram matrices over the apolar-orthonormal basis u_α = x^α/√α! of P_{n,k}.
//!
//! The coefficient map is 𝒜(Q) = Σ_{a,b} Q_ab u_a u_b, so 𝒜(Q)_γ sums
//! Q_ab/√(a!b!) over a+b = γ. Distinct γ touch disjoint entries of Q, which
//! makes the affine projection a per-coefficient correction.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sdp::solve_sos_sdp;
use super::{GaugeMethod, GaugeResult};
use crate::error::{Error, Result};
use crate::linalg::{project_psd, sym_eigen};
use crate::metrics::sphere_integral;
use crate::poly::{r_power, sphere_moment_f64, Form, MonomialBasis};

/// Index and weight data of 𝒜 for one (n, k).
#[derive(Debug)]
pub(crate) struct GramMap {
    pub n: usize,
    pub k: u32,
    pub dk: usize,
    pub d2k: usize,
    /// pairs[a*dk+b] = index of x^{a+b} in the degree-2k basis.
    pub pairs: Vec<usize>,
    /// 1/√(a!b!).
    pub coef: Vec<f64>,
    /// Σ_{a+b=γ} coef², equal to binomial(2k,k)/γ!.
    pub wsum: Vec<f64>,
    /// Sphere moments of the degree-2k monomials.
    pub moments: Vec<f64>,
}

impl GramMap {
    pub fn get(n: usize, k: u32) -> Arc<GramMap> {
        type Cache = RwLock<HashMap<(usize, u32), Arc<GramMap>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(m) = cache.read().expect("gram map cache poisoned").get(&(n, k)) {
            return Arc::clone(m);
        }
        let low = MonomialBasis::get(n, k);
        let high = MonomialBasis::get(n, 2 * k);
        let dk = low.len();
        let d2k = high.len();
        let mut pairs = vec![0; dk * dk];
        let mut coef = vec![0.0; dk * dk];
        let mut wsum = vec![0.0; d2k];
        for a in 0..dk {
            for b in 0..dk {
                let g = high
                    .index_of(low.monomial(a).add(low.monomial(b)).entries())
                    .expect("product monomial present");
                let c = 1.0 / (low.monomial(a).factorial_f64() * low.monomial(b).factorial_f64()).sqrt();
                pairs[a * dk + b] = g;
                coef[a * dk + b] = c;
                wsum[g] += c * c;
            }
        }
        let moments = high.monomials().iter().map(|m| sphere_moment_f64(m.entries())).collect();
        let map = Arc::new(GramMap {
            n,
            k,
            dk,
            d2k,
            pairs,
            coef,
            wsum,
            moments,
        });
        cache
            .write()
            .expect("gram map cache poisoned")
            .entry((n, k))
            .or_insert(map)
            .clone()
    }

    /// 𝒜(Q) as a coefficient vector.
    pub fn apply(&self, q: &DMatrix<f64>) -> Vec<f64> {
        let mut out = vec![0.0; self.d2k];
        for a in 0..self.dk {
            for b in 0..self.dk {
                out[self.pairs[a * self.dk + b]] += q[(a, b)] * self.coef[a * self.dk + b];
            }
        }
        out
    }

    /// 𝒜*(z): the matrix with entries z_{a+b}/√(a!b!).
    pub fn adjoint(&self, z: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dk, self.dk, |a, b| {
            z[self.pairs[a * self.dk + b]] * self.coef[a * self.dk + b]
        })
    }

    /// Least-norm Q with 𝒜(Q) = c.
    pub fn least_norm(&self, c: &[f64]) -> DMatrix<f64> {
        let z: Vec<f64> = c.iter().zip(&self.wsum).map(|(v, w)| v / w).collect();
        self.adjoint(&z)
    }

    /// Adds the correction that puts Q on the affine set 𝒜(Q) = c.
    pub fn project_affine(&self, q: &DMatrix<f64>, c: &[f64]) -> DMatrix<f64> {
        let image = self.apply(q);
        let res: Vec<f64> = image.iter().zip(c).map(|(a, b)| a - b).collect();
        q - self.least_norm(&res)
    }
}

/// min eigenvalue of Lm⁻¹ W Lm⁻ᵀ, where Lm Lmᵀ = 𝒜*(moments).
fn relative_min_eig(map: &GramMap, w: &DMatrix<f64>) -> Result<f64> {
    let m = map.adjoint(&map.moments);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("moment matrix not positive definite".into()))?;
    let l = chol.l();
    let li = l
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular moment factor".into()))?;
    Ok(sym_eigen(&(&li * w * li.transpose())).0[0])
}

/// A linear functional z on P_{n,2k} with 𝒜*(z) ⪰ 0 and z(f) < 0, which
/// separates f from the cone of sums of squares.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosWitness {
    /// Values z(x^γ) on the degree-2k monomials, normalized so z(r^{2k}) = 1.
    pub functional: Vec<f64>,
    /// z(f).
    pub pairing: f64,
    /// Smallest eigenvalue of 𝒜*(z).
    pub min_eigenvalue: f64,
}

/// Shifts z along the sphere-moment functional until 𝒜*(z) is PSD, then
/// keeps it if it still separates f.
pub(crate) fn repair_witness(map: &GramMap, z: &[f64], f: &[f64], tol: f64) -> Result<Option<SosWitness>> {
    let w = map.adjoint(z);
    let shift = (-relative_min_eig(map, &w)?).max(0.0) * (1.0 + 1e-9) + 1e-14;
    let mut zs: Vec<f64> = z.iter().zip(&map.moments).map(|(a, m)| a + shift * m).collect();
    let r = r_power::<f64>(map.n, map.k);
    let zr: f64 = zs.iter().zip(r.coeffs()).map(|(a, b)| a * b).sum();
    if !(zr > 0.0) {
        return Ok(None);
    }
    zs.iter_mut().for_each(|v| *v /= zr);
    let pairing: f64 = zs.iter().zip(f).map(|(a, b)| a * b).sum();
    let min_eigenvalue = sym_eigen(&map.adjoint(&zs)).0[0];
    let fnorm = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if pairing < -tol * fnorm.max(1e-300) && min_eigenvalue >= -1e-12 {
        Ok(Some(SosWitness {
            functional: zs,
            pairing,
            min_eigenvalue,
        }))
    } else {
        Ok(None)
    }
}

/// A Gram matrix Q ⪰ 0 (up to tolerance) with 𝒜(Q) = f.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SosCertificate {
    pub gram: Vec<Vec<f64>>,
    /// max |𝒜(Q) − f|.
    pub residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub method: GaugeMethod,
}

impl SosCertificate {
    pub(crate) fn from_matrix(q: &DMatrix<f64>, f: &[f64], map: &GramMap, iterations: usize, method: GaugeMethod) -> Self {
        let image = map.apply(q);
        let residual = image.iter().zip(f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        SosCertificate {
            gram: (0..q.nrows()).map(|i| q.row(i).iter().copied().collect()).collect(),
            residual,
            min_eigenvalue: sym_eigen(q).0.first().copied().unwrap_or(0.0),
            iterations,
            method,
        }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let d = self.gram.len();
        DMatrix::from_fn(d, d, |i, j| self.gram[i][j])
    }
}

/// The form 𝒜(Q) for a Gram matrix over the apolar-orthonormal basis of P_{n,k}.
pub fn gram_to_form(n: usize, k: u32, q: &DMatrix<f64>) -> Result<Form<f64>> {
    let map = GramMap::get(n, k);
    if q.nrows() != map.dk || q.ncols() != map.dk {
        return Err(Error::DimensionMismatch {
            expected: map.dk,
            got: q.nrows(),
        });
    }
    Form::new(n, 2 * k, map.apply(q))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum SosOutcome {
    Feasible(SosCertificate),
    Infeasible(SosWitness),
    Undecided { iterations: usize, residual: f64, min_eigenvalue: f64 },
}

impl SosOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SosOutcome::Feasible(_))
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, SosOutcome::Infeasible(_))
    }
}

pub const DYKSTRA_MAX_ITER: usize = 5000;

/// Alternating projections only; the iteration cap yields `Undecided` unless
/// the final PSD iterate supplies a separating functional.
pub fn sos_feasible_dykstra(f: &Form<f64>, tol: f64, max_iter: usize) -> Result<SosOutcome> {
    if f.degree() % 2 == 1 {
        return Err(Error::OddDegree("sos_feasible", f.degree()));
    }
    let map = GramMap::get(f.n(), f.degree() / 2);
    let scale = f.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        let zero = DMatrix::zeros(map.dk, map.dk);
        return Ok(SosOutcome::Feasible(SosCertificate::from_matrix(
            &zero,
            f.coeffs(),
            &map,
            0,
            GaugeMethod::SdpBisection,
        )));
    }
    let fs: Vec<f64> = f.coeffs().iter().map(|v| v / scale).collect();
    let finish = |q: DMatrix<f64>, it: usize| {
        SosOutcome::Feasible(SosCertificate::from_matrix(&(q * scale), f.coeffs(), &map, it, GaugeMethod::SdpBisection))
    };
    let mut x = map.least_norm(&fs);
    let mut p = DMatrix::zeros(map.dk, map.dk);
    let mut q = DMatrix::zeros(map.dk, map.dk);
    let mut y = x.clone();
    let mut res_inf = f64::INFINITY;
    let mut res = vec![0.0; map.d2k];
    for it in 0..=max_iter {
        if sym_eigen(&x).0[0] >= -tol {
            return Ok(finish(x, it));
        }
        if it == max_iter {
            break;
        }
        y = project_psd(&(&x + &p));
        p = &x + &p - &y;
        let image = map.apply(&y);
        res = image.iter().zip(&fs).map(|(a, b)| a - b).collect();
        res_inf = res.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res_inf <= tol {
            return Ok(finish(y, it + 1));
        }
        let x_new = map.project_affine(&(&y + &q), &fs);
        q = &y + &q - &x_new;
        x = x_new;
    }
    let z: Vec<f64> = res.iter().zip(&map.wsum).map(|(r, w)| r / w).collect();
    if let Some(mut w) = repair_witness(&map, &z, &fs, tol)? {
        w.pairing *= scale;
        return Ok(SosOutcome::Infeasible(w));
    }
    Ok(SosOutcome::Undecided {
        iterations: max_iter,
        residual: res_inf * scale,
        min_eigenvalue: sym_eigen(&y).0[0] * scale,
    })
}

/// Dykstra first; if undecided, the interior-point SDP supplies either a
/// certificate or a dual witness.
pub fn sos_feasible(f: &Form<f64>, tol: f64) -> Result<SosOutcome> {
    let outcome = sos_feasible_dykstra(f, tol, DYKSTRA_MAX_ITER)?;
    if !matches!(outcome, SosOutcome::Undecided { .. }) {
        return Ok(outcome);
    }
    let map = GramMap::get(f.n(), f.degree() / 2);
    let scale = f.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let fs = f.scale(&(1.0 / scale));
    let sol = solve_sos_sdp(&fs)?;
    let q_r = map.least_norm(r_power::<f64>(f.n(), f.degree() / 2).coeffs());
    if sol.upper <= 0.0 || sol.upper * crate::linalg::max_eigenvalue(&q_r) <= tol {
        // f = 𝒜(Q_c) − upper·r^{2k}
        let q = (&sol.gram - q_r * sol.upper) * scale;
        let cert = SosCertificate::from_matrix(&q, f.coeffs(), &map, 0, GaugeMethod::SdpInteriorPoint);
        if cert.min_eigenvalue >= -tol * scale {
            return Ok(SosOutcome::Feasible(cert));
        }
    }
    if sol.lower > tol {
        if let Some(mut w) = repair_witness(&map, &sol.functional, fs.coeffs(), tol)? {
            w.pairing *= scale;
            return Ok(SosOutcome::Infeasible(w));
        }
    }
    Ok(outcome)
}

/// Bisection on t for membership of f + t·r^{2k}, started at t = ‖f‖₂ and
/// doubled until feasible; undecided answers stop the search and leave the
/// bracket wide.
pub fn gauge_sos_bisection(f: &Form<f64>, tol: f64) -> Result<GaugeResult> {
    super::check_mean_zero(f, 1e-10)?;
    if f.is_zero() {
        return Ok(GaugeResult::zero());
    }
    let r = r_power::<f64>(f.n(), f.degree() / 2);
    let shifted = |t: f64| f.try_add(&r.scale(&t));
    let feasible = |t: f64| -> Result<SosOutcome> { sos_feasible(&shifted(t)?, 1e-9) };
    let mut hi = sphere_integral(&f.multiply(f)?).sqrt();
    let mut lo = 0.0;
    let mut tries = 0;
    loop {
        match feasible(hi)? {
            SosOutcome::Feasible(_) => break,
            SosOutcome::Infeasible(_) => lo = hi,
            SosOutcome::Undecided { .. } => {}
        }
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::Numerical("no feasible shift found".into()));
        }
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        match feasible(mid)? {
            SosOutcome::Feasible(_) => hi = mid,
            SosOutcome::Infeasible(_) => lo = mid,
            SosOutcome::Undecided { .. } => break,
        }
    }
    Ok(GaugeResult {
        value: 0.5 * (lo + hi),
        lower: lo,
        upper: hi,
        method: GaugeMethod::SdpBisection,
        certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::linear_form_power;

    #[test]
    fn gram_map_weights() {
        let map = GramMap::get(3, 2);
        let high = MonomialBasis::get(3, 4);
        for (g, m) in high.monomials().iter().enumerate() {
            assert!((map.wsum[g] - 6.0 / m.factorial_f64()).abs() < 1e-12);
        }
        let q = DMatrix::from_fn(map.dk, map.dk, |i, j| ((i * 7 + j * 3) % 5) as f64 + if i == j { 9.0 } else { 0.0 });
        let q = (&q + q.transpose()) * 0.5;
        let c = map.apply(&q);
        let back = map.apply(&map.least_norm(&c));
        assert!(c.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn feasible_examples() {
        let r4 = r_power::<f64>(3, 2);
        let out = sos_feasible(&r4, 1e-8).unwrap();
        let SosOutcome::Feasible(cert) = out else { panic!("r^4 is a sum of squares") };
        assert_eq!(cert.iterations, 0);
        let g = gram_to_form(3, 2, &cert.matrix()).unwrap();
        assert!((&g - &r4).norm_coeffs() < 1e-10);
        let d = Form::<f64>::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        let sq = d.multiply(&d).unwrap();
        assert!(sos_feasible(&sq, 1e-8).unwrap().is_feasible());
        let p = linear_form_power(&[0.3, -0.4, 0.5], 4).unwrap();
        assert!(sos_feasible(&p, 1e-8).unwrap().is_feasible());
    }

    #[test]
    fn motzkin_is_separated() {
        let m = Form::<f64>::from_terms(
            3,
            6,
            &[
                (vec![4, 2, 0], 1.0),
                (vec![2, 4, 0], 1.0),
                (vec![0, 0, 6], 1.0),
                (vec![2, 2, 2], -3.0),
            ],
        )
        .unwrap();
        match sos_feasible(&m, 1e-8).unwrap() {
            SosOutcome::Infeasible(w) => {
                assert!(w.pairing < 0.0 && w.min_eigenvalue >= -1e-12);
            }
            SosOutcome::Feasible(_) => panic!("Motzkin form is not a sum of squares"),
            SosOutcome::Undecided { .. } => {}
        }
    }

    #[test]
    fn negative_form_is_infeasible() {
        let r2 = r_power::<f64>(2, 1).scale(&-1.0);
        assert!(sos_feasible_dykstra(&r2, 1e-8, 200).unwrap().is_infeasible());
    }
}
