//! Prints the strategy x policy table for both shipped configs.

use audit_game::runner::{run_sweep, shipped, SweepConfig};
use audit_game::Registry;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let registry = Registry::builtin();
    for (label, yaml) in [("default", shipped::DEFAULT), ("attrition", shipped::ATTRITION)] {
        let config = SweepConfig::from_yaml(yaml, registry)?;
        let result = run_sweep(registry, &config)?;
        println!("== {label} config ({} ms)", result.elapsed.as_millis());
        println!(
            "{:<16} {:<22} {:>16} {:>6} {:>6} {:>12} {:>10}",
            "strategy", "policy", "gap", "tau_u", "tau_b", "W", "C"
        );
        for c in &result.cells {
            println!(
                "{:<16} {:<22} {:>+8.3} ± {:.3} {:>6.1} {:>6.1} {:>6.0} ± {:<3.0} {:>6.1}",
                c.strategy, c.policy, c.gap.mean, c.gap.se, c.tau_d_uncorr.mean, c.tau_d_bonf.mean,
                c.welfare.mean, c.welfare.se, c.coverage.mean
            );
        }
    }
    Ok(())
}
