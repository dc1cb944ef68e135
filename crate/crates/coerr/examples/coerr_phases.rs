//! Drive a single COERR replication and inspect its phase schedule:
//! how long exploration lasts, when exploitation takes over, and how many
//! context cells actually get materialized.
//!
//! ```bash
//! cargo run --release --example coerr_phases [horizon]
//! ```

use std::sync::Arc;

use coerr::config::ExperimentConfig;
use coerr::policy::{design_parameters, CoerrPolicy, Feedback, Phase, Policy, SlotView};
use coerr::sim::ExperimentEnv;

fn main() -> anyhow::Result<()> {
    let horizon: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(2700);

    let mut cfg = ExperimentConfig::default();
    cfg.horizon = horizon;
    let params = cfg.designed_params();
    println!(
        "designed parameters: h_T = {}, cells/SBS = {}, control exponent = {:.3}",
        params.cells_per_dim,
        params.partition_cells(),
        params.control_exponent
    );

    let env = ExperimentEnv::prepare(&cfg)?;
    let model = Arc::new(env.model.clone());
    let mut policy = CoerrPolicy::new(
        "coerr",
        Arc::clone(&model),
        design_parameters(horizon, cfg.alpha, cfg.context_dim),
        cfg.solver,
    )?;

    let source = env.source(0);
    for t in 1..=horizon {
        let contexts = source.contexts(t);
        let demands = source.demands(t, &contexts);
        let view = SlotView {
            t,
            contexts: &contexts,
            true_means: None,
        };
        let (decision, _) = policy.decide(&view)?;
        let utility = model.total_utility(&decision, &demands)?;
        policy.observe(&Feedback {
            decision: &decision,
            demands: &demands,
            utility,
        })?;
    }

    let (explore, semi, exploit) = policy.phase_counts();
    println!("phases over {horizon} slots: explore {explore}, semi-explore {semi}, exploit {exploit}");
    println!(
        "materialized cells: {} (ceiling {})",
        policy.bank().materialized_cells(),
        model.n_sbs() as u64 * params.partition_cells()
    );

    // Last slot of each phase kind, to see when exploration tails off.
    for phase in [Phase::Explore, Phase::SemiExplore] {
        let last = policy
            .audits()
            .iter()
            .rev()
            .find(|a| a.phase == phase)
            .map(|a| a.slot);
        println!("last {phase} slot: {last:?}");
    }

    // A few sample decisions around the phase transition.
    for &t in &[1u64, 2, 50, 200, 800, horizon] {
        if let Some(a) = policy.audits().iter().find(|a| a.slot == t) {
            println!(
                "slot {:>5}: {:<12} under-explored {:?} decision {}",
                a.slot,
                a.phase.to_string(),
                a.under_explored,
                a.decision
            );
        }
    }
    Ok(())
}
