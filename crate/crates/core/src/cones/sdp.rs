//! The SOS gauge as one semidefinite program, solved by clarabel:
//! minimize t subject to f + t·r^{2k} = 𝒜(Q), Q ⪰ 0.
//!
//! The dual is a functional z with 𝒜*(z) ⪰ 0 and z(r^{2k}) = 1, whose value
//! −z(f) bounds the gauge from below.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT::PSDTriangleConeT,
    SupportedConeT::ZeroConeT,
};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sos::{repair_witness, GramMap};
use super::{check_mean_zero, Certificate, GaugeMethod, GaugeResult};
use crate::error::{Error, Result};
use crate::linalg::{project_psd, sym_eigen};
use crate::poly::{r_power, Form};

/// Constraint matrix shared by every solve at one (n, k).
struct SdpStructure {
    a: CscMatrix<f64>,
    /// (a, b) with a ≤ b in clarabel's column-major upper-triangle order.
    svec: Vec<(usize, usize)>,
    r: Vec<f64>,
}

fn structure(n: usize, k: u32) -> Arc<SdpStructure> {
    type Cache = RwLock<HashMap<(usize, u32), Arc<SdpStructure>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(s) = cache.read().expect("sdp cache poisoned").get(&(n, k)) {
        return Arc::clone(s);
    }
    let map = GramMap::get(n, k);
    let dk = map.dk;
    let mut svec = Vec::with_capacity(dk * (dk + 1) / 2);
    for b in 0..dk {
        for a in 0..=b {
            svec.push((a, b));
        }
    }
    let r = r_power::<f64>(n, k).coeffs().to_vec();
    let rows = map.d2k + svec.len();
    let cols = 1 + svec.len();
    // column-major triplets
    let mut colptr = vec![0usize];
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    for (g, &rv) in r.iter().enumerate() {
        if rv != 0.0 {
            rowval.push(g);
            nzval.push(-rv);
        }
    }
    colptr.push(rowval.len());
    let sqrt2 = std::f64::consts::SQRT_2;
    for (j, &(a, b)) in svec.iter().enumerate() {
        let g = map.pairs[a * dk + b];
        let c = map.coef[a * dk + b];
        rowval.push(g);
        nzval.push(if a == b { c } else { sqrt2 * c });
        rowval.push(map.d2k + j);
        nzval.push(-1.0);
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(rows, cols, colptr, rowval, nzval);
    let s = Arc::new(SdpStructure { a, svec, r });
    cache.write().expect("sdp cache poisoned").entry((n, k)).or_insert(s).clone()
}

/// Repaired primal and dual information from one SDP solve.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdpSosSolution {
    /// Solver's optimal t.
    pub t: f64,
    /// Gauge lower bound from the repaired dual functional.
    pub lower: f64,
    /// Gauge upper bound with an exactly PSD Gram matrix for f + upper·r^{2k}.
    #[serde(skip)]
    pub gram: DMatrix<f64>,
    pub upper: f64,
    pub functional: Vec<f64>,
    pub status: String,
}

pub(crate) fn solve_sos_sdp(f: &Form<f64>) -> Result<SdpSosSolution> {
    if f.degree() % 2 == 1 || f.degree() == 0 {
        return Err(Error::OddDegree("gauge_sos", f.degree()));
    }
    let n = f.n();
    let k = f.degree() / 2;
    let map = GramMap::get(n, k);
    let st = structure(n, k);
    let dk = map.dk;
    let nsvec = st.svec.len();
    let p = CscMatrix::<f64>::zeros((1 + nsvec, 1 + nsvec));
    let mut q = vec![0.0; 1 + nsvec];
    q[0] = 1.0;
    let mut b = f.coeffs().to_vec();
    b.extend(std::iter::repeat(0.0).take(nsvec));
    let cones = [ZeroConeT(map.d2k), PSDTriangleConeT(dk)];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_gap_abs(1e-10)
        .tol_gap_rel(1e-10)
        .tol_feas(1e-10)
        .build()
        .map_err(|e| Error::Numerical(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, &q, &st.a, &b, &cones, settings).map_err(|e| Error::Numerical(format!("{e:?}")))?;
    solver.solve();
    let status = solver.solution.status;
    if !matches!(status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
        return Err(Error::Numerical(format!("SDP solver status {status:?}")));
    }
    let x = &solver.solution.x;
    let t = x[0];
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut gram = DMatrix::zeros(dk, dk);
    for (j, &(a, bb)) in st.svec.iter().enumerate() {
        let v = if a == bb { x[1 + j] } else { x[1 + j] * inv_sqrt2 };
        gram[(a, bb)] = v;
        gram[(bb, a)] = v;
    }
    // absorb the equality residual into a multiple of the Gram matrix of r^{2k}
    let gram_psd = project_psd(&gram);
    let image = map.apply(&gram_psd);
    let residual: Vec<f64> = (0..map.d2k)
        .map(|g| f.coeffs()[g] + t * st.r[g] - image[g])
        .collect();
    let q_res = map.least_norm(&residual);
    let q_r = map.least_norm(&st.r);
    let lr = q_r
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gram matrix of r^2k not positive definite".into()))?
        .l();
    let lri = lr.try_inverse().ok_or_else(|| Error::Numerical("singular factor".into()))?;
    let rel = sym_eigen(&(&lri * &q_res * lri.transpose())).0[0];
    let delta = (-rel).max(0.0) * (1.0 + 1e-9);
    let upper = t + delta;
    let gram_upper = gram_psd + q_res + q_r * delta;

    let z: Vec<f64> = solver.solution.z[..map.d2k].to_vec();
    let fc = f.coeffs();
    let (lower, functional) = match repair_witness(&map, &z, fc, f64::NEG_INFINITY)? {
        Some(w) => (-w.pairing, w.functional),
        None => (f64::NEG_INFINITY, z),
    };
    Ok(SdpSosSolution {
        t,
        lower,
        upper,
        gram: gram_upper,
        functional,
        status: format!("{status:?}"),
    })
}

/// Gauge of S̃q at f ∈ M.
pub fn gauge_sos(f: &Form<f64>, _tol: f64) -> Result<GaugeResult> {
    check_mean_zero(f, 1e-10)?;
    if f.is_zero() {
        return Ok(GaugeResult::zero());
    }
    let sol = solve_sos_sdp(f)?;
    let lower = sol.lower.max(0.0);
    let upper = sol.upper.max(lower);
    Ok(GaugeResult {
        value: sol.t.clamp(lower, upper),
        lower,
        upper,
        method: GaugeMethod::SdpInteriorPoint,
        certificate: Some(Certificate::Gram(
            (0..sol.gram.nrows()).map(|i| sol.gram.row(i).iter().copied().collect()).collect(),
        )),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::gauge_nonneg;
    use crate::metrics::project_to_m;

    #[test]
    fn hilbert_case_matches_nonneg() {
        let h4 = project_to_m(&Form::<f64>::monomial(&[4, 0, 0], 1.0)).unwrap();
        let g = gauge_sos(&h4, 1e-8).unwrap();
        assert!((g.value - 0.2).abs() < 1e-7, "{g:?}");
        assert!(g.lower <= g.value && g.value <= g.upper);
        assert!(g.upper - g.lower < 1e-6);
        let f = project_to_m(
            &Form::<f64>::from_terms(3, 4, &[(vec![3, 1, 0], 1.0), (vec![1, 1, 2], -0.7), (vec![0, 4, 0], 0.4)])
                .unwrap(),
        )
        .unwrap();
        let gs = gauge_sos(&f, 1e-8).unwrap();
        let gn = gauge_nonneg(&f).unwrap();
        assert!((gs.value - gn.value).abs() < 1e-6, "{} {}", gs.value, gn.value);
    }

    #[test]
    fn certificate_reconstructs_shifted_form() {
        let f = project_to_m(&Form::<f64>::from_terms(2, 4, &[(vec![2, 2], 1.0)]).unwrap()).unwrap();
        let g = gauge_sos(&f, 1e-8).unwrap();
        let Some(Certificate::Gram(q)) = g.certificate else { panic!() };
        let q = DMatrix::from_fn(q.len(), q.len(), |i, j| q[i][j]);
        assert!(sym_eigen(&q).0[0] >= -1e-12);
        let rebuilt = crate::cones::gram_to_form(2, 2, &q).unwrap();
        let target = f.try_add(&r_power::<f64>(2, 2).scale(&g.upper)).unwrap();
        assert!((&rebuilt - &target).norm_coeffs() < 1e-9);
        assert!((g.value - 1.0 / 8.0).abs() < 1e-7);
    }
}
