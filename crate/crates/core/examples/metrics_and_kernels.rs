//! The integral, gradient and apolar inner products, orthonormal bases of M,
//! and the reproducing kernel q_v.
//!
//!     cargo run --example metrics_and_kernels

use conelab::metrics::{
    apolar_ip, dim_m, evaluation_kernel, gradient_ip, integral_ip, orthonormal_basis, MetricKind, Space,
};
use conelab::poly::Form;
use conelab::scalar::{rational, Rational};

fn main() -> conelab::Result<()> {
    let x1x2 = Form::<Rational>::monomial(&[1, 1, 0], rational(1, 1));
    println!("x1·x2 in three variables:");
    println!("  integral ⟨f,f⟩  = {}", integral_ip(&x1x2, &x1x2)?);
    println!("  gradient ⟨f,f⟩_G = {}", gradient_ip(&x1x2, &x1x2)?);
    println!("  apolar ⟨f,f⟩_d  = {}", apolar_ip(&x1x2, &x1x2)?);

    for metric in MetricKind::ALL {
        let b = orthonormal_basis(3, 4, Space::MeanZero, metric)?;
        println!("{metric:?} basis of M for (3,4): dim {} (D_M = {}), defect {:.1e}", b.dim(), dim_m(3, 4), b.orthonormality_defect());
    }

    // ⟨q_v, f⟩ = f(v) for f in M, and ‖q_v‖₂ = √D_M
    let v = [0.0, 0.6, 0.8];
    let q = evaluation_kernel(&v, 3, 4)?;
    let b = orthonormal_basis(3, 4, Space::MeanZero, MetricKind::Integral)?;
    let f = b.element(3);
    println!("⟨q_v, f⟩ = {:.12}, f(v) = {:.12}", integral_ip(&q, &f)?, f.eval(&v));
    println!("‖q_v‖₂ = {:.12}, √14 = {:.12}", integral_ip(&q, &q)?.sqrt(), 14f64.sqrt());
    Ok(())
}
