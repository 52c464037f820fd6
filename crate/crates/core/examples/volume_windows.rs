//! Monte Carlo normalized volumes of C~, Sq~ and Lf~ against their explicit
//! windows.
//!
//!     cargo run --release --example volume_windows [n] [samples]

use conelab::volume::{body_volume, bound_table, window_check, Body, VolumeConfig};

fn main() -> conelab::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n = args.next().unwrap_or(3);
    let samples = args.next().unwrap_or(1000);
    let table = bound_table(n, 4)?;
    for body in [Body::Nonneg, Body::Sos, Body::Linpowers] {
        let cfg = VolumeConfig::new(samples.min(VolumeConfig::default_samples(body)), 42);
        let est = body_volume(body, n, 4, &cfg)?;
        let w = window_check(&est, &table)?;
        println!(
            "{:4} value {:.4} CI [{:.4}, {:.4}] Jensen {:.4} tail {:.2}  window [{:.5}, {:.3}] inside {}",
            est.body, est.value, est.ci_low, est.ci_high, est.jensen_bound, est.tail_share, w.lower, w.upper, w.inside()
        );
    }
    Ok(())
}
