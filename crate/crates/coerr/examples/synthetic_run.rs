//! Full synthetic experiment: COERR against the benchmark policies with
//! common random numbers, reporting per-replication final utilities and the
//! shape of COERR's cumulative regret.
//!
//! ```bash
//! cargo run --release --example synthetic_run [horizon] [replications]
//! ```

use coerr::config::ExperimentConfig;
use coerr::sim::run_experiment;

fn main() -> anyhow::Result<()> {
    let horizon: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(900);
    let replications: usize = std::env::args()
        .nth(2)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(5);

    let mut cfg = ExperimentConfig::default();
    cfg.horizon = horizon;
    cfg.replications = replications;
    cfg.policies = vec![
        "oracle".into(),
        "coerr".into(),
        "cucb".into(),
        "random".into(),
    ];

    let started = std::time::Instant::now();
    let output = run_experiment(&cfg)?;
    println!(
        "{replications} replications × {horizon} slots in {:.1?}\n",
        started.elapsed()
    );

    println!(
        "{:<8} {:>14} {:>14}",
        "policy", "mean utility", "mean regret"
    );
    for name in &output.policy_names {
        println!(
            "{:<8} {:>14.0} {:>14.0}",
            name,
            output.mean_final_utility(name),
            output.mean_final_regret(name)
        );
    }

    // Per-replication final utilities, to see the ordering stability.
    println!("\nper-replication final utilities:");
    for rep in &output.replications {
        let mut line = format!("rep {:>2}:", rep.rep);
        for name in &output.policy_names {
            line.push_str(&format!(" {name}={:.0}", rep.run.final_utility(name)));
        }
        println!("{line}");
    }

    // Slope of COERR's mean cumulative regret over the two horizon halves.
    let curve = output.mean_regret_curve("coerr");
    let half = curve.len() / 2;
    let slope_first = (curve[half - 1] - curve[0]) / (half as f64 - 1.0);
    let slope_second = (curve[curve.len() - 1] - curve[half - 1]) / (curve.len() - half) as f64;
    println!(
        "\ncoerr mean regret: R(T/2) = {:.0}, R(T) = {:.0}",
        curve[half - 1],
        curve[curve.len() - 1]
    );
    println!("slope first half {slope_first:.2}, second half {slope_second:.2}");
    Ok(())
}
