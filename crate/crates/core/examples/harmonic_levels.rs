//! Harmonic decomposition of a form and the gradient/integral ratio on each
//! level, with the dimension and volume-radius comparisons built from them.
//!
//!     cargo run --example harmonic_levels [n] [k]

use conelab::harmonic::{dimension_ratio, gradient_ball_volume_ratio, harmonic_decompose, metric_ratio_table};
use conelab::poly::{Form, PolyFile};
use conelab::scalar::{rational, Rational};

fn main() -> conelab::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<u32>().expect("integer argument"));
    let n = args.next().unwrap_or(3) as usize;
    let k = args.next().unwrap_or(2);

    let mut e = vec![0u32; n];
    e[0] = 2 * k;
    let f = Form::<Rational>::monomial(&e, rational(1, 1));
    let dec = harmonic_decompose(&f)?;
    for (d, h) in &dec.components {
        println!("level d={d}: h = {}", PolyFile::from_rational(h).to_json().replace(['\n', ' '], ""));
    }
    assert_eq!(dec.reconstruct(), f);

    let table = metric_ratio_table(n, k, 7)?;
    println!("\n d  dim   measured    formula");
    for r in &table.rows {
        println!("{:2} {:4} {:10.6} {:10.6}", r.d, r.dim, r.measured, r.formula);
    }
    println!("min over d ≥ 1: {:.6} at d={} (lemma value {:.6})", table.measured_min, table.measured_argmin, table.lemma_min);

    let dr = dimension_ratio(n, k);
    println!("\nD_H/D_M = {}/{} = {:.6}, bound {:.6}, holds: {}", dr.d_h, dr.d_m, dr.ratio, dr.bound, dr.bound_holds);
    let g = gradient_ball_volume_ratio(n, k);
    println!("(Vol B_M/Vol B_G)^(1/D_M) = {:.6}, bound {:.6}, holds: {}", g.value, g.lemma_bound, g.bound_holds);
    Ok(())
}
