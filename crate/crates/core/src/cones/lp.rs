//! Dense primal-dual interior point method (Mehrotra predictor-corrector) for
//! min cᵀx s.t. Ax = b, x ≥ 0 with few rows and many columns. Each iteration
//! factors the rows×rows normal matrix A diag(x/s) Aᵀ.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

pub(crate) struct DenseLp {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub objective: f64,
}

const MAX_ITER: usize = 120;

fn max_step(v: &DVector<f64>, dv: &DVector<f64>) -> f64 {
    v.iter().zip(dv.iter()).fold(1.0f64, |a, (&vi, &di)| if di < 0.0 { a.min(-vi / di) } else { a })
}

fn normal_factor(a: &DMatrix<f64>, d: &DVector<f64>) -> Option<Cholesky<f64, Dyn>> {
    let mut ad = a.clone();
    for (j, mut col) in ad.column_iter_mut().enumerate() {
        col *= d[j].sqrt();
    }
    let mut m = &ad * ad.transpose();
    let reg = 1e-14 * m.diagonal().max().max(1e-300);
    for i in 0..m.nrows() {
        m[(i, i)] += reg;
    }
    m.cholesky()
}

fn normal_solve(a: &DMatrix<f64>, d: &DVector<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    normal_factor(a, d).map(|c| c.solve(rhs))
}

/// Least-squares correction of the primal residual on the support of x.
fn clean_up(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>, tol: f64) -> Option<DVector<f64>> {
    let xmax = x.amax();
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 1e-9 * xmax).collect();
    let ab = DMatrix::from_fn(a.nrows(), support.len(), |i, j| a[(i, support[j])]);
    let rp = b - a * x;
    let delta = ab.svd(true, true).solve(&rp, 1e-13).ok()?;
    let mut xc = x.clone();
    for (j, &i) in support.iter().enumerate() {
        xc[i] += delta[j];
    }
    if xc.iter().any(|&v| v < 0.0) {
        return None;
    }
    ((b - a * &xc).norm() < tol).then_some(xc)
}

/// Returns None when the iteration does not reach `tol` (in particular on
/// infeasible or unbounded problems); callers fall back to a general solver.
/// Once complementarity has vanished the primal residual is accepted down to
/// about 3e-2·√tol, which is where the normal equations stop improving it.
pub(crate) fn solve_dense_lp(a: &DMatrix<f64>, b: &DVector<f64>, c: &DVector<f64>, tol: f64) -> Option<DenseLp> {
    let n = a.ncols();
    let at = a.transpose();
    // starting point
    let ones = DVector::from_element(n, 1.0);
    let x0 = at.clone() * normal_solve(a, &ones, b)?;
    let y0 = normal_solve(a, &ones, &(a * c))?;
    let s0 = c - &at * &y0;
    let dx = (-1.5 * x0.min()).max(0.0);
    let ds = (-1.5 * s0.min()).max(0.0);
    let mut x = x0.add_scalar(dx);
    let mut s = s0.add_scalar(ds);
    let xs = x.dot(&s);
    let dx = 0.5 * xs / s.sum().max(1e-300);
    let ds = 0.5 * xs / x.sum().max(1e-300);
    x = x.add_scalar(dx + 1e-8);
    s = s.add_scalar(ds + 1e-8);
    let mut y = y0;
    let bnorm = 1.0 + b.norm();
    let cnorm = 1.0 + c.norm();
    for _ in 0..MAX_ITER {
        let rp = b - a * &x;
        let rd = c - &at * &y - &s;
        let mu = x.dot(&s) / n as f64;
        let pobj = c.dot(&x);
        let dobj = b.dot(&y);
        if rp.norm() / bnorm < tol && rd.norm() / cnorm < tol && (pobj - dobj).abs() / (1.0 + pobj.abs()) < tol {
            return Some(DenseLp { x, y, objective: pobj });
        }
        if mu < 1e-16 * (1.0 + pobj.abs()) && rd.norm() / cnorm < tol {
            if let Some(xc) = clean_up(a, b, &x, tol * bnorm) {
                let objective = c.dot(&xc);
                if (objective - dobj).abs() / (1.0 + objective.abs()) < tol.sqrt() {
                    return Some(DenseLp { x: xc, y, objective });
                }
            }
            // precision floor of the normal equations
            let loose = tol.sqrt() * 0.03;
            if rp.norm() / bnorm < loose && (pobj - dobj).abs() / (1.0 + pobj.abs()) < loose {
                return Some(DenseLp { x, y, objective: pobj });
            }
        }
        if !mu.is_finite() || x.amax() > 1e14 || s.amax() > 1e14 {
            return None;
        }
        let d = x.component_div(&s);
        let chol = normal_factor(a, &d)?;
        let solve = |rxs: &DVector<f64>| -> Option<(DVector<f64>, DVector<f64>, DVector<f64>)> {
            let rhs = &rp - a * rxs.component_div(&s) + a * d.component_mul(&rd);
            let dy = chol.solve(&rhs);
            let dsv = &rd - &at * &dy;
            let dxv = (rxs - x.component_mul(&dsv)).component_div(&s);
            Some((dxv, dy, dsv))
        };
        // predictor
        let rxs = -x.component_mul(&s);
        let (dxa, _, dsa) = solve(&rxs)?;
        let ap = max_step(&x, &dxa);
        let ad = max_step(&s, &dsa);
        let mu_aff = (&x + ap * &dxa).dot(&(&s + ad * &dsa)) / n as f64;
        let mut sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);
        // keep complementarity from collapsing ahead of primal feasibility
        let prel = rp.norm() / bnorm;
        if prel > tol && mu < prel * 1e-3 {
            sigma = sigma.max(0.5);
        }
        // corrector
        let rxs = &rxs - dxa.component_mul(&dsa) + DVector::from_element(n, sigma * mu);
        let (dxv, dy, dsv) = solve(&rxs)?;
        let ap = (0.99 * max_step(&x, &dxv)).min(1.0);
        let ad = (0.99 * max_step(&s, &dsv)).min(1.0);
        x += ap * dxv;
        y += ad * dy;
        s += ad * dsv;
    }
    None
}
