//! Fast evaluation of forms and extremisation over the unit sphere.
//!
//! The search evaluates the form on a fixed quasi-uniform point set, then runs
//! projected gradient descent (Armijo backtracking, Barzilai–Borwein step
//! guesses) from the best candidates, and finishes with a few Riemannian
//! Newton steps. It is a heuristic: the returned value is attained at the
//! returned point, but a lower minimum elsewhere is not excluded.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::poly::{Form, MonomialBasis};

/// A form compiled for repeated floating-point evaluation.
#[derive(Clone, Debug)]
pub struct CompiledForm {
    n: usize,
    degree: u32,
    coeffs: Vec<f64>,
    exps: Vec<u32>,
}

impl CompiledForm {
    pub fn new(f: &Form<f64>) -> Self {
        let basis = MonomialBasis::get(f.n(), f.degree());
        let mut coeffs = Vec::new();
        let mut exps = Vec::new();
        for (i, &c) in f.coeffs().iter().enumerate() {
            if c != 0.0 {
                coeffs.push(c);
                exps.extend_from_slice(basis.monomial(i).entries());
            }
        }
        Self {
            n: f.n(),
            degree: f.degree(),
            coeffs,
            exps,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn powers(&self, x: &[f64], table: &mut Vec<f64>) {
        let d = self.degree as usize + 1;
        table.clear();
        table.resize(self.n * d, 1.0);
        for i in 0..self.n {
            for e in 1..d {
                table[i * d + e] = table[i * d + e - 1] * x[i];
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let mut table = Vec::new();
        self.value_with(x, &mut table)
    }

    fn value_with(&self, x: &[f64], table: &mut Vec<f64>) -> f64 {
        self.powers(x, table);
        let d = self.degree as usize + 1;
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * self.n..(t + 1) * self.n];
            let mut term = c;
            for i in 0..self.n {
                term *= table[i * d + e[i] as usize];
            }
            acc += term;
        }
        acc
    }

    /// Value and Euclidean gradient.
    pub fn value_grad(&self, x: &[f64], grad: &mut [f64]) -> f64 {
        let mut table = Vec::new();
        self.powers(x, &mut table);
        let d = self.degree as usize + 1;
        let n = self.n;
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut prefix = vec![1.0; n + 1];
        let mut factors = vec![1.0; n];
        let mut acc = 0.0;
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            for i in 0..n {
                factors[i] = table[i * d + e[i] as usize];
                prefix[i + 1] = prefix[i] * factors[i];
            }
            acc += c * prefix[n];
            let mut suffix = 1.0;
            for i in (0..n).rev() {
                if e[i] > 0 {
                    let others = prefix[i] * suffix;
                    grad[i] += c * f64::from(e[i]) * table[i * d + e[i] as usize - 1] * others;
                }
                suffix *= factors[i];
            }
        }
        acc
    }

    /// Euclidean Hessian.
    pub fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut h = DMatrix::zeros(n, n);
        for (t, &c) in self.coeffs.iter().enumerate() {
            let e = &self.exps[t * n..(t + 1) * n];
            for i in 0..n {
                for j in i..n {
                    let mut term = c;
                    for (k, &ek) in e.iter().enumerate() {
                        let mut p = ek as i64;
                        let mut mult = 1.0;
                        if k == i {
                            mult *= p as f64;
                            p -= 1;
                        }
                        if k == j {
                            mult *= p as f64;
                            p -= 1;
                        }
                        if p < 0 {
                            term = 0.0;
                            break;
                        }
                        term *= mult * x[k].powi(p as i32);
                    }
                    h[(i, j)] += term;
                    if i != j {
                        h[(j, i)] += term;
                    }
                }
            }
        }
        h
    }
}

/// Result of a sphere search.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereExtremum {
    pub value: f64,
    pub point: Vec<f64>,
}

/// Multi-start configuration for extremising a form on the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SphereSearch {
    /// Size of the quasi-uniform evaluation grid.
    pub starts: usize,
    /// Number of best grid points used as descent starts.
    pub refine: usize,
    /// Projected-gradient steps per start.
    pub steps: usize,
    /// Riemannian Newton polishing steps on the final point.
    pub newton_steps: usize,
}

impl Default for SphereSearch {
    fn default() -> Self {
        Self {
            starts: 2000,
            refine: 32,
            steps: 50,
            newton_steps: 8,
        }
    }
}

impl SphereSearch {
    /// Lighter setting for per-sample gauges inside Monte Carlo loops.
    pub fn sampling(n: usize) -> Self {
        Self {
            starts: (96 * n).max(256),
            refine: 6,
            steps: 60,
            newton_steps: 4,
        }
    }

    pub fn minimize(&self, f: &CompiledForm) -> SphereExtremum {
        let n = f.n();
        let points = sphere_points(n, self.starts.max(1));
        let mut table = Vec::new();
        let mut scored: Vec<(f64, usize)> = (0..points.len() / n)
            .map(|i| (f.value_with(&points[i * n..(i + 1) * n], &mut table), i))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut best = SphereExtremum {
            value: f64::INFINITY,
            point: vec![0.0; n],
        };
        for &(_, i) in scored.iter().take(self.refine.max(1)) {
            let x0 = &points[i * n..(i + 1) * n];
            let (value, point) = descend(f, x0, self.steps);
            if value < best.value {
                best = SphereExtremum { value, point };
            }
        }
        if self.newton_steps > 0 {
            let (value, point) = newton_polish(f, &best.point, self.newton_steps);
            if value <= best.value {
                best = SphereExtremum { value, point };
            }
        }
        best
    }

    /// Distinct local minima found from the refined starts, best first.
    pub fn minimize_many(&self, f: &CompiledForm) -> Vec<SphereExtremum> {
        self.minimize_many_from(f, &[])
    }

    /// As `minimize_many`, with extra descent starts supplied by the caller.
    pub fn minimize_many_from(&self, f: &CompiledForm, extra: &[Vec<f64>]) -> Vec<SphereExtremum> {
        let n = f.n();
        let points = sphere_points(n, self.starts.max(1));
        let mut table = Vec::new();
        let mut scored: Vec<(f64, usize)> = (0..points.len() / n)
            .map(|i| (f.value_with(&points[i * n..(i + 1) * n], &mut table), i))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0));
        let starts = scored
            .iter()
            .take(self.refine.max(1))
            .map(|&(_, i)| &points[i * n..(i + 1) * n])
            .chain(extra.iter().map(|v| v.as_slice()));
        let mut found: Vec<SphereExtremum> = Vec::new();
        for x0 in starts {
            let (mut value, mut point) = descend(f, x0, self.steps);
            if self.newton_steps > 0 {
                let (v, p) = newton_polish(f, &point, self.newton_steps);
                if v <= value {
                    value = v;
                    point = p;
                }
            }
            let duplicate = found.iter().any(|e| {
                let dot: f64 = e.point.iter().zip(&point).map(|(a, b)| a * b).sum();
                dot.abs() > 1.0 - 1e-8
            });
            if !duplicate {
                found.push(SphereExtremum { value, point });
            }
        }
        found.sort_by(|a, b| a.value.total_cmp(&b.value));
        found
    }

    pub fn maximize(&self, f: &CompiledForm) -> SphereExtremum {
        let neg = CompiledForm {
            n: f.n,
            degree: f.degree,
            coeffs: f.coeffs.iter().map(|c| -c).collect(),
            exps: f.exps.clone(),
        };
        let mut e = self.minimize(&neg);
        e.value = -e.value;
        e
    }

    pub fn min_form(&self, f: &Form<f64>) -> SphereExtremum {
        self.minimize(&CompiledForm::new(f))
    }

    pub fn max_form(&self, f: &Form<f64>) -> SphereExtremum {
        self.maximize(&CompiledForm::new(f))
    }

    /// max |f| on the sphere.
    pub fn max_abs(&self, f: &Form<f64>) -> SphereExtremum {
        let c = CompiledForm::new(f);
        let hi = self.maximize(&c);
        let lo = self.minimize(&c);
        if hi.value >= -lo.value {
            hi
        } else {
            SphereExtremum {
                value: -lo.value,
                point: lo.point,
            }
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

fn tangent(x: &[f64], g: &[f64]) -> Vec<f64> {
    let xg: f64 = x.iter().zip(g).map(|(a, b)| a * b).sum();
    g.iter().zip(x).map(|(gi, xi)| gi - xg * xi).collect()
}

fn descend(f: &CompiledForm, x0: &[f64], steps: usize) -> (f64, Vec<f64>) {
    let n = f.n();
    let mut x = x0.to_vec();
    normalize(&mut x);
    let mut g = vec![0.0; n];
    let mut fx = f.value_grad(&x, &mut g);
    let mut rg = tangent(&x, &g);
    let scale = g.iter().map(|v| v.abs()).fold(0.0, f64::max).max(fx.abs()).max(1e-300);
    let mut step = 1.0 / (f64::from(f.degree().max(1)) * scale);
    let mut table = Vec::new();
    for _ in 0..steps {
        let rg2: f64 = rg.iter().map(|v| v * v).sum();
        if rg2.sqrt() <= 1e-15 * scale {
            break;
        }
        let mut accepted = false;
        let mut y = vec![0.0; n];
        let mut fy;
        for _ in 0..40 {
            for i in 0..n {
                y[i] = x[i] - step * rg[i];
            }
            normalize(&mut y);
            fy = f.value_with(&y, &mut table);
            if fy <= fx - 1e-4 * step * rg2 {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let mut gy = vec![0.0; n];
        fy = f.value_grad(&y, &mut gy);
        let rgy = tangent(&y, &gy);
        // Barzilai–Borwein guess for the next step
        let sx: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        let sg: Vec<f64> = rgy.iter().zip(&rg).map(|(a, b)| a - b).collect();
        let ss: f64 = sx.iter().map(|v| v * v).sum();
        let sy: f64 = sx.iter().zip(&sg).map(|(a, b)| a * b).sum();
        step = if sy > 0.0 { (ss / sy).min(1e6 * step) } else { step * 2.0 };
        x = y;
        fx = fy;
        rg = rgy;
    }
    (fx, x)
}

fn tangent_basis(x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut cols = DMatrix::zeros(n, n + 1);
    for i in 0..n {
        cols[(i, 0)] = x[i];
        cols[(i, i + 1)] = 1.0;
    }
    let q = cols.qr().q();
    q.columns(1, n - 1).into_owned()
}

fn newton_polish(f: &CompiledForm, x0: &[f64], steps: usize) -> (f64, Vec<f64>) {
    let n = f.n();
    let mut x = x0.to_vec();
    normalize(&mut x);
    let mut g = vec![0.0; n];
    let mut fx = f.value_grad(&x, &mut g);
    if n < 2 {
        return (fx, x);
    }
    for _ in 0..steps {
        let u = tangent_basis(&x);
        let xg: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
        let h = f.hessian(&x);
        let hr = u.transpose() * &h * &u - DMatrix::identity(n - 1, n - 1) * xg;
        let gr = u.transpose() * DVector::from_column_slice(&g);
        if gr.norm() == 0.0 {
            break;
        }
        let Some(chol) = hr.clone().cholesky() else { break };
        let eta = -chol.solve(&gr);
        let mut y: Vec<f64> = (0..n).map(|i| x[i] + (&u * &eta)[i]).collect();
        normalize(&mut y);
        let mut gy = vec![0.0; n];
        let fy = f.value_grad(&y, &mut gy);
        if fy > fx {
            break;
        }
        let done = fx - fy <= 1e-16 * fx.abs().max(1e-300);
        x = y;
        fx = fy;
        g = gy;
        if done {
            break;
        }
    }
    (fx, x)
}

/// Deterministic quasi-uniform points on S^{n−1}, flattened row by row.
///
/// Circle: equally spaced angles. Two-sphere: Fibonacci lattice. Higher
/// dimensions: normalised Gaussian vectors from a fixed-seed generator.
pub fn sphere_points(n: usize, count: usize) -> Arc<Vec<f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(usize, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(p) = cache.read().expect("point cache poisoned").get(&(n, count)) {
        return Arc::clone(p);
    }
    let pts = Arc::new(build_points(n, count));
    cache
        .write()
        .expect("point cache poisoned")
        .entry((n, count))
        .or_insert(pts)
        .clone()
}

fn build_points(n: usize, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * count);
    match n {
        1 => {
            for i in 0..count {
                out.push(if i % 2 == 0 { 1.0 } else { -1.0 });
            }
        }
        2 => {
            for i in 0..count {
                let t = std::f64::consts::TAU * (i as f64 + 0.5) / count as f64;
                out.extend_from_slice(&[t.cos(), t.sin()]);
            }
        }
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            for i in 0..count {
                let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
                let r = (1.0 - z * z).sqrt();
                let t = golden * i as f64;
                out.extend_from_slice(&[r * t.cos(), r * t.sin(), z]);
            }
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
            for _ in 0..count {
                let mut v = uniform_sphere_point(n, &mut rng);
                normalize(&mut v);
                out.extend_from_slice(&v);
            }
        }
    }
    out
}

pub fn uniform_sphere_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        if normalize(&mut v) > 1e-12 {
            return v;
        }
    }
}

/// Haar-random rotation (determinant +1).
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// The action A·f = f(A⁻¹x) = f(Aᵀx) of a rotation on a form.
pub fn rotate_form(f: &Form<f64>, a: &DMatrix<f64>) -> Form<f64> {
    let n = f.n();
    let m: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(j, i)]).collect()).collect();
    f.compose_linear(&m).expect("rotation matches variable count")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::r_power;

    #[test]
    fn gradient_matches_finite_differences() {
        let f = Form::<f64>::from_terms(
            3,
            4,
            &[(vec![4, 0, 0], 1.5), (vec![1, 2, 1], -2.0), (vec![0, 1, 3], 0.7)],
        )
        .unwrap();
        let c = CompiledForm::new(&f);
        let x = [0.3, -0.5, 0.8];
        let mut g = [0.0; 3];
        let v = c.value_grad(&x, &mut g);
        assert!((v - f.eval(&x)).abs() < 1e-14);
        let h = 1e-6;
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (c.value(&xp) - c.value(&xm)) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-7, "component {i}");
        }
        let hess = c.hessian(&x);
        for i in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let mut gp = [0.0; 3];
            let mut gm = [0.0; 3];
            c.value_grad(&xp, &mut gp);
            c.value_grad(&xm, &mut gm);
            for j in 0..3 {
                assert!(((gp[j] - gm[j]) / (2.0 * h) - hess[(j, i)]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn finds_known_extrema() {
        let s = SphereSearch::default();
        let x1sq = Form::<f64>::monomial(&[2, 0, 0], 1.0);
        let lo = s.min_form(&x1sq);
        assert!(lo.value.abs() < 1e-12);
        assert!((lo.point.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        let hi = s.max_form(&x1sq);
        assert!((hi.value - 1.0).abs() < 1e-12);
        let r4 = r_power::<f64>(4, 2);
        assert!((s.min_form(&r4).value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_rotation(4, &mut rng);
        assert!((&a * a.transpose() - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((a.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_sets_are_unit() {
        for n in 2..7 {
            let pts = sphere_points(n, 50);
            for p in pts.chunks(n) {
                let norm: f64 = p.iter().map(|v| v * v).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }
}
