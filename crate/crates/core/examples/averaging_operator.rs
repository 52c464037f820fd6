//! The averaging operator T, its spectrum on harmonic levels, catalecticants,
//! and the projection identity behind the dual-SOS inclusion.
//!
//!     cargo run --example averaging_operator [n] [2k]

use conelab::apolarity::{
    catalecticant, duality_identity_holds, projection_identity_residual, t_constant, t_matrix, t_spectrum,
    top_eigenvalue,
};
use conelab::metrics::{orthonormal_basis, MetricKind, Space};
use conelab::poly::gaussian_form;
use rand::SeedableRng;

fn main() -> conelab::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u32>().expect("integer argument"));
    let n = args.next().unwrap_or(3) as usize;
    let two_k = args.next().unwrap_or(4);

    println!("c = ∫ x1^{two_k} dσ = {}", t_constant(n, two_k));
    println!("⟨Tf,g⟩_d = (2k)!⟨f,g⟩ exactly: {}", duality_identity_holds(&t_matrix(n, two_k)?));
    println!("eigenvalues of T/c by level:");
    for row in t_spectrum(n, two_k)? {
        println!("  d={} {} ({:.6})", row.d, row.eigenvalue, row.eigenvalue_f64);
    }
    println!("closed form at d=k: {}", top_eigenvalue(n, two_k / 2));

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let b = orthonormal_basis(n, two_k, Space::MeanZero, MetricKind::Integral)?;
    let f = gaussian_form(n, two_k, &b.basis, &mut rng);
    let h = catalecticant(&f, MetricKind::Integral)?;
    let ev = h.eigenvalues();
    println!("integral catalecticant of a random f in M: λ ∈ [{:.4}, {:.4}], trace {:.1e}", ev[0], ev[ev.len() - 1], ev.iter().sum::<f64>());

    let low = orthonormal_basis(n, two_k / 2, Space::Full, MetricKind::Integral)?;
    let q = gaussian_form(n, two_k / 2, &low.basis, &mut rng);
    println!("projection identity residual: {:.2e}", projection_identity_residual(&q)?);
    Ok(())
}
