//! Bracketing the gauge of L̃f, the section of the cone of sums of 2k-th
//! powers of linear forms.
//!
//! Upper bound: the LP min t s.t. f + t·r^{2k} = Σ λ_i (v_i·x)^{2k}, λ ≥ 0 over
//! a finite set of directions. Its dual is a form g ≥ 0 on the directions;
//! shifted to be nonnegative on the whole sphere it gives a lower bound
//! through the apolar pairing. Directions where g is negative are added and
//! the LP is re-solved (an exchange method).

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::NonnegativeConeT,
    SupportedConeT::ZeroConeT,
};
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_mean_zero, Certificate, GaugeMethod, GaugeResult};
use crate::apolarity::{catalecticant, t_constant};
use crate::linalg::sym_eigen;
use nalgebra::{DMatrix, DVector};

use super::lp::solve_dense_lp;
use crate::error::{Error, Result};
use crate::metrics::{apolar_ip, sphere_integral, MetricKind};
use crate::poly::{monomial::factorial_f64, r_power, Form, MonomialBasis};
use crate::sphere::{sphere_points, uniform_sphere_point, CompiledForm, SphereSearch};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinPowersConfig {
    /// Initial number of directions; 0 picks max(500, 4·dim P_{n,2k}).
    pub grid: usize,
    /// Exchange rounds after the first LP.
    pub max_rounds: usize,
    /// Directions added per round.
    pub add_per_round: usize,
    /// Stop once upper − lower ≤ tol·upper.
    pub tol: f64,
    pub search: SphereSearch,
    /// Squares of random forms of degree k added to the witness pool.
    pub witness_squares: usize,
    pub seed: u64,
}

impl Default for LinPowersConfig {
    fn default() -> Self {
        Self {
            grid: 0,
            max_rounds: 40,
            add_per_round: 32,
            tol: 1e-6,
            search: SphereSearch::default(),
            witness_squares: 0,
            seed: 0,
        }
    }
}

impl LinPowersConfig {
    /// Cheaper setting for per-sample use inside volume estimates.
    pub fn sampling(n: usize) -> Self {
        Self {
            max_rounds: 12,
            tol: 1e-3,
            search: SphereSearch::sampling(n),
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinPowersOutcome {
    pub gauge: GaugeResult,
    pub rounds: usize,
    pub directions: usize,
    /// Sphere minimum of the last dual form before shifting, relative to its
    /// largest coefficient; ≥ 0 means the exchange converged.
    pub dual_min: f64,
}

fn multinomials(n: usize, degree: u32) -> Vec<f64> {
    let d = factorial_f64(degree);
    MonomialBasis::get(n, degree)
        .monomials()
        .iter()
        .map(|m| d / m.factorial_f64())
        .collect()
}

struct GridLp {
    t: f64,
    weights: Vec<f64>,
    /// Dual form: nonnegative on the directions, ⟨g, r^{2k}⟩_d = (2k)!.
    dual: Form<f64>,
}

fn solve_grid_lp(f: &Form<f64>, grid: &[Vec<f64>]) -> Result<Option<GridLp>> {
    let n = f.n();
    let degree = f.degree();
    let basis = MonomialBasis::get(n, degree);
    let d = basis.len();
    let mult = multinomials(n, degree);
    let r = r_power::<f64>(n, degree / 2);
    let m = grid.len();
    // solved in dual form: min ⟨b, g⟩ over forms g with g(v_i) ≥ 0 on the
    // grid and ⟨ρ, g⟩ = 1; the multipliers of the grid rows are the weights
    let rho: Vec<f64> = r.coeffs().iter().zip(&mult).map(|(c, w)| c / w).collect();
    let values: Vec<Vec<f64>> = grid
        .iter()
        .map(|v| {
            basis
                .monomials()
                .iter()
                .map(|mono| mono.entries().iter().zip(v).map(|(&e, x)| x.powi(e as i32)).product())
                .collect()
        })
        .collect();
    let fb: Vec<f64> = f.coeffs().iter().zip(&mult).map(|(c, w)| c / w).collect();
    // primal x = (t, w): Σ w_i v_i^γ − t ρ_γ = b_γ
    let amat = DMatrix::from_fn(d, 1 + m, |g, j| if j == 0 { -rho[g] } else { values[j - 1][g] });
    let mut cvec = DVector::zeros(1 + m);
    cvec[0] = 1.0;
    if let Some(lp) = solve_dense_lp(&amat, &DVector::from_vec(fb.clone()), &cvec, 1e-9) {
        return Ok(Some(GridLp {
            t: lp.objective,
            weights: lp.x.iter().skip(1).map(|w| w.max(0.0)).collect(),
            dual: Form::new(n, degree, lp.y.iter().map(|v| -v).collect())?,
        }));
    }
    let mut colptr = vec![0usize];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for g in 0..d {
        if rho[g] != 0.0 {
            rowval.push(0);
            nzval.push(rho[g]);
        }
        for (i, vals) in values.iter().enumerate() {
            if vals[g] != 0.0 {
                rowval.push(1 + i);
                nzval.push(-vals[g]);
            }
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(1 + m, d, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((d, d));
    let q: Vec<f64> = f.coeffs().iter().zip(&mult).map(|(c, w)| c / w).collect();
    let mut b = vec![0.0; 1 + m];
    b[0] = 1.0;
    let cones = [ZeroConeT(1), NonnegativeConeT(m)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| Error::Numerical(format!("{e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => return Ok(None),
        s => return Err(Error::Numerical(format!("LP solver status {s:?}"))),
    }
    let z = &solver.solution.z;
    let dual = Form::new(n, degree, solver.solution.x.clone())?;
    Ok(Some(GridLp {
        t: z[0],
        weights: z[1..].iter().map(|w| w.max(0.0)).collect(),
        dual,
    }))
}

/// Grid-only upper bound (inner approximation of Lf by the given directions).
pub fn gauge_linpowers_upper(f: &Form<f64>, grid: &[Vec<f64>], _tol: f64) -> Result<GaugeResult> {
    check_mean_zero(f, 1e-10)?;
    if f.is_zero() {
        return Ok(GaugeResult::zero());
    }
    let scale = f.norm_coeffs();
    let fs = f.scale(&(1.0 / scale));
    match solve_grid_lp(&fs, grid)? {
        Some(lp) => {
            let t = lp.t.max(0.0) * scale;
            Ok(GaugeResult {
                value: t,
                lower: 0.0,
                upper: t,
                method: GaugeMethod::InnerLp,
                certificate: Some(powers_certificate(grid, &lp.weights, scale)),
            })
        }
        None => Ok(GaugeResult {
            value: f64::INFINITY,
            lower: 0.0,
            upper: f64::INFINITY,
            method: GaugeMethod::InnerLp,
            certificate: None,
        }),
    }
}

fn powers_certificate(grid: &[Vec<f64>], weights: &[f64], scale: f64) -> Certificate {
    let (points, weights): (Vec<Vec<f64>>, Vec<f64>) = grid
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 1e-12)
        .map(|(v, &w)| (v.clone(), w * scale))
        .unzip();
    Certificate::Powers { points, weights }
}

/// Lower bound max_g c·max(0, −⟨f,g⟩_d)/((2k)!·∫g) over nonnegative witnesses g.
/// Each witness is certified by a sphere search; failures are errors.
pub fn gauge_linpowers_lower(f: &Form<f64>, witnesses: &[Form<f64>]) -> Result<GaugeResult> {
    check_mean_zero(f, 1e-10)?;
    let search = SphereSearch::default();
    for (index, g) in witnesses.iter().enumerate() {
        let min = search.min_form(g).value;
        let scale = g.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if min < -1e-10 * scale.max(1.0) || sphere_integral(g) <= 0.0 {
            return Err(Error::UncertifiedWitness { index, min });
        }
    }
    let (value, best) = lower_from_certified(f, witnesses)?;
    Ok(GaugeResult {
        value,
        lower: value,
        upper: f64::INFINITY,
        method: GaugeMethod::DualCertificate,
        certificate: best.map(|g| Certificate::Witness(g.coeffs().to_vec())),
    })
}

/// p² for the eigenvector p of the smallest eigenvalue of H_r^{-1/2} H_f H_r^{-1/2}
/// (apolar catalecticants), or None when that eigenvalue is nonnegative.
fn dual_sos_square(f: &Form<f64>) -> Result<Option<Form<f64>>> {
    let n = f.n();
    let k = f.degree() / 2;
    let hf = catalecticant(f, MetricKind::Apolar)?.matrix;
    let hr = catalecticant(&r_power::<f64>(n, k), MetricKind::Apolar)?.matrix;
    let l = hr
        .cholesky()
        .ok_or_else(|| Error::Numerical("apolar catalecticant of r^2k not positive definite".into()))?
        .l();
    let li = l.try_inverse().ok_or_else(|| Error::Numerical("singular factor".into()))?;
    let (values, vectors) = sym_eigen(&(&li * hf * li.transpose()));
    if values[0] >= 0.0 {
        return Ok(None);
    }
    // coordinates over u_a = x^a/√a!
    let y = li.transpose() * vectors.column(0);
    let basis = MonomialBasis::get(n, k);
    let coeffs = y.iter().zip(basis.monomials()).map(|(c, a)| c / a.factorial_f64().sqrt()).collect();
    let p = Form::new(n, k, coeffs)?;
    Ok(Some(p.multiply(&p)?))
}

fn lower_from_certified<'a>(f: &Form<f64>, witnesses: &'a [Form<f64>]) -> Result<(f64, Option<&'a Form<f64>>)> {
    let c = t_constant(f.n(), f.degree()).to_f64().unwrap_or(f64::NAN);
    let fact = factorial_f64(f.degree());
    let mut best = 0.0;
    let mut arg = None;
    for g in witnesses {
        let integral = sphere_integral(g);
        if integral <= 0.0 {
            continue;
        }
        let bound = c * (-apolar_ip(f, g)?).max(0.0) / (fact * integral);
        if bound > best {
            best = bound;
            arg = Some(g);
        }
    }
    Ok((best, arg))
}

/// Bracket [dual lower, LP upper] for the gauge of L̃f, refined by exchange.
pub fn gauge_linpowers(f: &Form<f64>, cfg: &LinPowersConfig) -> Result<LinPowersOutcome> {
    check_mean_zero(f, 1e-10)?;
    if f.is_zero() {
        return Ok(LinPowersOutcome {
            gauge: GaugeResult::zero(),
            rounds: 0,
            directions: 0,
            dual_min: 0.0,
        });
    }
    let n = f.n();
    let k = f.degree() / 2;
    let scale = f.norm_coeffs();
    let fs = f.scale(&(1.0 / scale));
    let r = r_power::<f64>(n, k);
    let size = if cfg.grid == 0 {
        (4 * MonomialBasis::get(n, f.degree()).len()).max(500)
    } else {
        cfg.grid
    };
    let pts = sphere_points(n, size);
    let mut grid: Vec<Vec<f64>> = pts.chunks(n).map(|c| c.to_vec()).collect();

    // witness pool: argmin of f, optional random squares, shifted dual forms
    let mut witnesses: Vec<Form<f64>> = Vec::new();
    let fmin = cfg.search.min_form(&fs);
    witnesses.push(crate::poly::linear_form_power(&fmin.point, 2 * k)?);
    grid.push(fmin.point.clone());
    if cfg.witness_squares > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let dk = MonomialBasis::get(n, k).len();
        for _ in 0..cfg.witness_squares {
            let coeffs = uniform_sphere_point(dk, &mut rng);
            let p = Form::new(n, k, coeffs)?;
            witnesses.push(p.multiply(&p)?);
        }
    }

    // the square p² from the smallest generalized eigenvector of the apolar
    // catalecticant pencil (H_f, H_r) is a nonnegative witness; it realises
    // the gauge of the dual cone of sums of squares, which contains Lf
    if let Some(p2) = dual_sos_square(&fs)? {
        witnesses.push(p2);
    }

    let mut upper = f64::INFINITY;
    let mut best_weights: Option<(Vec<Vec<f64>>, Vec<f64>)> = None;
    let mut dual_min = f64::NEG_INFINITY;
    let mut rounds = 0;
    let mut lower = lower_from_certified(&fs, &witnesses)?.0;
    let mut infeasible_retries = 0;
    let keep = 3 * MonomialBasis::get(n, f.degree()).len();
    let mut step = 0.1;
    loop {
        let Some(lp) = solve_grid_lp(&fs, &grid)? else {
            infeasible_retries += 1;
            if infeasible_retries > 3 {
                break;
            }
            let more = sphere_points(n, 2 * grid.len());
            grid.extend(more.chunks(n).map(|c| c.to_vec()));
            continue;
        };
        if lp.t < upper {
            upper = lp.t.max(0.0);
            best_weights = Some((grid.clone(), lp.weights.clone()));
        }
        let wmax = lp.weights.iter().fold(0.0f64, |m, w| m.max(*w));
        let active: Vec<Vec<f64>> = grid
            .iter()
            .zip(&lp.weights)
            .filter(|(_, &w)| w > 1e-5 * wmax)
            .map(|(v, _)| v.clone())
            .collect();
        let g = lp.dual;
        let gc = CompiledForm::new(&g);
        let gscale = g.coeffs().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        // optimal directions move only slightly between rounds, so descend
        // from the current support as well as from the global grid
        let minima = cfg.search.minimize_many_from(&gc, &active);
        let gmin = minima.first().map(|m| m.value).unwrap_or(0.0);
        dual_min = gmin / gscale;
        let shift = (-gmin).max(0.0) + 1e-12 * gscale;
        witnesses.push(g.try_add(&r.scale(&shift))?);
        lower = lower.max(lower_from_certified(&fs, &witnesses)?.0);
        let converged = upper - lower <= cfg.tol * upper.max(1e-12);
        if converged || rounds >= cfg.max_rounds {
            break;
        }
        let mut added: Vec<Vec<f64>> = minima
            .iter()
            .filter(|m| m.value < 0.0)
            .take(cfg.add_per_round)
            .map(|m| m.point.clone())
            .collect();
        // small clouds around the support let the LP move its directions
        for v in &active {
            for j in 0..n {
                for sign in [-1.0, 1.0] {
                    let mut w = v.clone();
                    w[j] += sign * step;
                    let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
                    w.iter_mut().for_each(|x| *x /= norm);
                    added.push(w);
                }
            }
        }
        step *= 0.6;
        // prune directions where the dual form is clearly positive; the
        // support stays, so the current solution remains feasible
        let mut scored: Vec<(f64, Vec<f64>)> = grid
            .into_iter()
            .zip(&lp.weights)
            .map(|(v, &w)| (if w > 1e-5 * wmax { f64::NEG_INFINITY } else { gc.value(&v) }, v))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        scored.truncate(keep.max(active.len()));
        grid = scored.into_iter().map(|(_, v)| v).collect();
        grid.extend(added);
        rounds += 1;
    }
    let (lower, upper) = (lower * scale, upper * scale);
    let lower = lower.min(upper);
    let certificate = best_weights.map(|(g, w)| powers_certificate(&g, &w, scale));
    Ok(LinPowersOutcome {
        gauge: GaugeResult {
            value: if upper.is_finite() { 0.5 * (lower + upper) } else { f64::INFINITY },
            lower,
            upper,
            method: GaugeMethod::Bracket,
            certificate,
        },
        rounds,
        directions: grid.len(),
        dual_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{gauge_nonneg, gauge_sos};
    use crate::metrics::project_to_m;

    #[test]
    fn quadratic_case_equals_sphere_min() {
        let f = project_to_m(&Form::<f64>::monomial(&[2, 0], 1.0)).unwrap();
        let out = gauge_linpowers(&f, &LinPowersConfig::default()).unwrap();
        assert!((out.gauge.upper - 0.5).abs() < 1e-6, "{:?}", out.gauge);
        assert!((out.gauge.lower - 0.5).abs() < 1e-6, "{:?}", out.gauge);
    }

    #[test]
    fn dual_lower_bound_example() {
        let f = project_to_m(&Form::<f64>::monomial(&[2, 2], 1.0)).unwrap();
        let d = Form::<f64>::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![0, 2], -1.0)]).unwrap();
        let g = d.multiply(&d).unwrap();
        let lb = gauge_linpowers_lower(&f, &[g]).unwrap();
        assert!((lb.value - 3.0 / 8.0).abs() < 1e-12);
        assert!((gauge_nonneg(&f).unwrap().value - 1.0 / 8.0).abs() < 1e-12);
        let bad = Form::<f64>::monomial(&[1, 1], 1.0).multiply(&Form::monomial(&[2, 0], 1.0)).unwrap();
        assert!(matches!(gauge_linpowers_lower(&f, &[bad]), Err(Error::UncertifiedWitness { .. })));
    }

    #[test]
    fn bracket_is_coherent_and_nested() {
        let f = project_to_m(
            &Form::<f64>::from_terms(3, 4, &[(vec![3, 1, 0], 1.0), (vec![1, 1, 2], -0.7), (vec![0, 4, 0], 0.4)])
                .unwrap(),
        )
        .unwrap();
        let out = gauge_linpowers(&f, &LinPowersConfig::default()).unwrap();
        let g = out.gauge;
        assert!(g.lower <= g.upper + 1e-9);
        assert!(g.upper - g.lower <= 1e-4 * g.upper, "{g:?}");
        let s = gauge_sos(&f, 1e-8).unwrap();
        assert!(s.lower <= g.upper + 1e-7);
        let grid: Vec<Vec<f64>> = sphere_points(3, 600).chunks(3).map(|c| c.to_vec()).collect();
        let coarse = gauge_linpowers_upper(&f, &grid, 1e-8).unwrap();
        assert!(coarse.value >= g.lower - 1e-9);
    }
}
