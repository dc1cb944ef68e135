//! Compare COERR under nested rental sets, including the where-only
//! COERR-OR2 variant that can merely switch a fixed capacity on or off.
//! Richer rental sets loosen the per-slot constraint and should never hurt.
//!
//! ```bash
//! cargo run --release --example rental_set_sweep
//! ```

use coerr::config::ExperimentConfig;
use coerr::sim::run_experiment;

fn main() -> anyhow::Result<()> {
    let mut base = ExperimentConfig::default();
    base.horizon = 1200;
    base.replications = 5;

    let mut results = Vec::new();
    for (label, rental_set, policy) in [
        ("F={0,2,4,6}", vec![0.0, 2.0, 4.0, 6.0], "coerr"),
        ("F={0,2,4}", vec![0.0, 2.0, 4.0], "coerr"),
        ("OR2 (0 or 2)", vec![0.0, 2.0, 4.0, 6.0], "coerr-or2"),
    ] {
        let mut cfg = base.clone();
        cfg.sbs.rental_set = rental_set;
        cfg.policies = vec![policy.to_string()];
        let output = run_experiment(&cfg)?;
        results.push((label, output.mean_final_utility(policy)));
    }

    println!("{:<14} {:>14}", "rental set", "mean utility");
    for (label, utility) in &results {
        println!("{label:<14} {utility:>14.0}");
    }
    Ok(())
}
