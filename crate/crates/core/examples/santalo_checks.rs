//! Blaschke–Santaló product for Sq~ and its polar, and the B_∞ versus C~ ratio.
//!
//!     cargo run --release --example santalo_checks [samples]

use conelab::volume::{santalo_and_rogers_shephard_checks, VolumeConfig};

fn main() -> conelab::Result<()> {
    let samples = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let r = santalo_and_rogers_shephard_checks(3, 4, &VolumeConfig::new(samples, 42))?;
    println!("Vol Sq~ {:.4}, Vol Sq~° {:.4} (normalized)", r.sos.value, r.sos_polar.value);
    println!("product {:.4} CI [{:.4}, {:.4}] ≤ 1: {}", r.product, r.product_ci[0], r.product_ci[1], r.santalo_holds);
    println!("B_∞/C~ {:.4} CI [{:.4}, {:.4}] ≥ 1/4: {}", r.ratio, r.ratio_ci[0], r.ratio_ci[1], r.rogers_shephard_holds);
    Ok(())
}
