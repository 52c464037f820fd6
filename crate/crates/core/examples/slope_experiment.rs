//! Log-log slope of the normalized volume in n at fixed degree.
//!
//!     cargo run --release --example slope_experiment [nonneg|sos|linpowers] [n_max] [samples]

use conelab::cones::Cone;
use conelab::volume::{slope_experiment, VolumeConfig};

fn main() -> conelab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cone = match args.first().map(String::as_str).unwrap_or("nonneg") {
        "sos" => Cone::Sos,
        "linpowers" => Cone::Linpowers,
        _ => Cone::Nonneg,
    };
    let n_max = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let samples = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(500);
    let fit = slope_experiment(cone, 2, 3..=n_max, &VolumeConfig::new(samples, 42))?;
    for p in &fit.points {
        println!("n={} volume {:.4} (CI [{:.4}, {:.4}])", p.n, p.fitted_value, p.estimate.ci_low, p.estimate.ci_high);
    }
    println!("slope {:.3} ± {:.3}, asymptotic exponent {}", fit.slope, fit.std_error.unwrap_or(f64::NAN), fit.theory_slope);
    Ok(())
}
