//! Gauges of the three cone sections at one form, with their certificates.
//!
//!     cargo run --release --example cone_gauges

use conelab::cones::{gauge_linpowers, gauge_nonneg, gauge_sos, support_sos, LinPowersConfig};
use conelab::volume::sample_uniform_sm;
use rand::SeedableRng;

fn main() -> conelab::Result<()> {
    let f = conelab::report::example_poly_file().to_f64()?;
    println!("f = x1^4 − r^4/5");
    println!("  C~   {:?}", gauge_nonneg(&f)?.value);
    println!("  Sq~  {:?}", gauge_sos(&f, 1e-8)?.value);
    let lf = gauge_linpowers(&f, &LinPowersConfig::default())?;
    println!("  Lf~  [{:.8}, {:.8}] after {} rounds, {} directions", lf.gauge.lower, lf.gauge.upper, lf.rounds, lf.directions);

    // uniform points of the unit sphere of M
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for (n, two_k) in [(2usize, 6u32), (3, 4), (4, 4)] {
        let g = sample_uniform_sm(n, two_k, &mut rng)?;
        let c = gauge_nonneg(&g)?;
        let s = gauge_sos(&g, 1e-8)?;
        let l = gauge_linpowers(&g, &LinPowersConfig::sampling(n))?.gauge;
        println!(
            "random f at ({n},{two_k}): C~ {:.5}  Sq~ [{:.5}, {:.5}]  Lf~ [{:.5}, {:.5}]  Sq~° {:.5}",
            c.value,
            s.lower,
            s.upper,
            l.lower,
            l.upper,
            support_sos(&g)?
        );
    }
    Ok(())
}
