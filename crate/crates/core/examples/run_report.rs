//! Building a run configuration in code and reading the structured report.
//!
//!     cargo run --release --example run_report

use conelab::report::{run, Command, RunConfig};

fn main() {
    let cfg = RunConfig::new(Command::Verify, 3, 2);
    let report = run(&cfg).expect("valid config");
    for c in &report.checks {
        println!("[{}] {}", if c.passed { "pass" } else { "FAIL" }, c.anchor);
    }
    println!("status {:?}", report.status);

    let mut cfg = RunConfig::new(Command::Bounds, 6, 4);
    cfg.seed = 1;
    let report = run(&cfg).expect("valid config");
    print!("{}", conelab::report::to_csv(&report));
}
