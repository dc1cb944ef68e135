//! Sweep the per-slot budget and watch final utilities grow with it.
//!
//! ```bash
//! cargo run --release --example budget_sweep
//! ```

use coerr::config::ExperimentConfig;
use coerr::sim::run_experiment;

fn main() -> anyhow::Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.horizon = 1200;
    cfg.replications = 5;
    cfg.policies = vec!["oracle".into(), "coerr".into(), "random".into()];

    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "budget", "oracle", "coerr", "random"
    );
    for budget in [4.0, 8.0, 12.0] {
        let mut point = cfg.clone();
        point.budget = budget;
        let output = run_experiment(&point)?;
        println!(
            "{budget:>6} {:>14.0} {:>14.0} {:>14.0}",
            output.mean_final_utility("oracle"),
            output.mean_final_utility("coerr"),
            output.mean_final_utility("random")
        );
    }
    Ok(())
}
