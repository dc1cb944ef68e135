//! Experiment engine: the slot loop, regret accounting, and the regret
//! bound used for overlay plots.
//!
//! All policies in one run see identical context and demand sequences
//! (common random numbers); the per-replication FNV fingerprint of those
//! sequences is part of the output so matched runs can be verified byte for
//! byte. Regret is accounted against the oracle decision — the exact
//! optimizer of the true expected demands — evaluated on the *same realized*
//! demands as the policy's decision; averaging over replications estimates
//! the expected regret.

pub mod synthetic;
pub mod trace;

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentConfig, Mode};
use crate::estimator::{CellIndex, Partition};
use crate::kcg::{build_kcg, solution_to_decision, KcgError, Solver};
use crate::model::{EdgeModel, ModelError, RentalDecision};
use crate::policy::{Feedback, Phase, Policy, PolicyError, SlotView};
use crate::rng::Fnv1a;
use synthetic::SyntheticModel;
use trace::{SlotSeries, TraceError};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Trace(#[from] TraceError),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error(transparent)]
    Kcg(#[from] KcgError),

    #[error("policy '{policy}' failed at slot {slot}: {source}")]
    Policy {
        policy: String,
        slot: u64,
        #[source]
        source: PolicyError,
    },

    #[error("policy '{policy}' emitted an infeasible decision at slot {slot}")]
    InfeasibleDecision { policy: String, slot: u64 },

    #[error("config error: {0}")]
    Config(String),
}

// ---------------------------------------------------------------------------
// Records and series
// ---------------------------------------------------------------------------

/// One policy's outcome in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: u64,
    pub policy: String,
    /// COERR-family phase tag; `None` for phaseless policies.
    pub phase: Option<Phase>,
    pub decision: RentalDecision,
    pub spend: f64,
    /// Realized utility of `decision` under the slot's realized demands.
    pub utility: f64,
    /// Realized utility of the oracle decision under the same demands.
    pub oracle_utility: f64,
    /// Running Σ (oracle − policy); per-slot increments may be negative.
    pub cum_regret: f64,
    /// Running Σ (oracle/δ − policy) for the configured δ.
    pub cum_delta_regret: f64,
}

impl SlotRecord {
    pub const CSV_HEADER: &'static str =
        "slot,policy,phase,spend,utility,oracle_utility,cum_regret,cum_delta_regret,decision";

    pub fn csv_row(&self) -> String {
        let phase = self
            .phase
            .map_or_else(|| "-".to_string(), |p| p.to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.slot,
            self.policy,
            phase,
            self.spend,
            self.utility,
            self.oracle_utility,
            self.cum_regret,
            self.cum_delta_regret,
            self.decision
        )
    }
}

/// Cumulative (δ-)regret over the slots of one policy.
#[derive(Debug, Clone)]
pub struct RegretSeries {
    pub delta: f64,
    pub cumulative: Vec<f64>,
}

impl RegretSeries {
    pub fn final_value(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Cumulative Σ (oracle − policy) over `records` (one policy's slice, in
/// slot order).
pub fn regret_series(records: &[SlotRecord]) -> RegretSeries {
    delta_regret_series(records, 1.0)
}

/// Cumulative Σ (oracle/δ − policy).
pub fn delta_regret_series(records: &[SlotRecord], delta: f64) -> RegretSeries {
    let mut cumulative = Vec::with_capacity(records.len());
    let mut sum = 0.0;
    for r in records {
        sum += r.oracle_utility / delta - r.utility;
        cumulative.push(sum);
    }
    RegretSeries { delta, cumulative }
}

// ---------------------------------------------------------------------------
// Regret bound (leading order)
// ---------------------------------------------------------------------------

/// Leading-order regret bound `constant · T^exponent · ln T` with
/// `exponent = (2α + D)/(3α + D)` and
/// `constant = 2^D · N · B · λ_max · d_max / w_min`.
#[derive(Debug, Clone, Copy)]
pub struct RegretBound {
    pub exponent: f64,
    pub constant: f64,
}

impl RegretBound {
    pub fn leading_order(&self, t: f64) -> f64 {
        if t <= 1.0 {
            return 0.0;
        }
        self.constant * t.powf(self.exponent) * t.ln()
    }
}

pub fn regret_bound(alpha: f64, dim: usize, model: &EdgeModel) -> RegretBound {
    let d = dim as f64;
    let exponent = (2.0 * alpha + d) / (3.0 * alpha + d);
    let constant = 2f64.powi(dim as i32)
        * model.n_sbs() as f64
        * model.budget.value()
        * model.max_admission_cap()
        * model.task.max_delay
        / model.min_nonzero_price();
    RegretBound { exponent, constant }
}

// ---------------------------------------------------------------------------
// Demand sources
// ---------------------------------------------------------------------------

/// Where a run's contexts, demands, and true means come from.
pub enum DemandSource<'a> {
    Synthetic {
        model: &'a SyntheticModel,
        replication: u64,
    },
    Trace {
        series: &'a SlotSeries,
        /// Hindsight per-(SBS, cell) means for the oracle.
        means: &'a [BTreeMap<CellIndex, f64>],
        partition: Partition,
    },
}

impl DemandSource<'_> {
    pub fn contexts(&self, t: u64) -> Vec<Vec<f64>> {
        match self {
            DemandSource::Synthetic { model, replication } => model.contexts_at(*replication, t),
            DemandSource::Trace { series, .. } => series.contexts[(t - 1) as usize].clone(),
        }
    }

    pub fn demands(&self, t: u64, contexts: &[Vec<f64>]) -> Vec<f64> {
        match self {
            DemandSource::Synthetic { model, replication } => {
                model.demands_at(*replication, t, contexts)
            }
            DemandSource::Trace { series, .. } => series.demands[(t - 1) as usize].clone(),
        }
    }

    pub fn true_means(&self, t: u64, contexts: &[Vec<f64>]) -> Vec<f64> {
        match self {
            DemandSource::Synthetic { model, .. } => model.means_at(contexts),
            DemandSource::Trace {
                means, partition, ..
            } => {
                let _ = t;
                contexts
                    .iter()
                    .enumerate()
                    .map(|(n, x)| {
                        let cell = partition.locate(x).expect("trace contexts in range");
                        means[n].get(&cell).copied().unwrap_or(0.0)
                    })
                    .collect()
            }
        }
    }

    pub fn available_slots(&self) -> Option<u64> {
        match self {
            DemandSource::Synthetic { .. } => None,
            DemandSource::Trace { series, .. } => Some(series.n_slots() as u64),
        }
    }
}

// ---------------------------------------------------------------------------
// The slot loop
// ---------------------------------------------------------------------------

/// Outcome of one replication: records in slot-major, policy-minor order
/// plus the fingerprint of the context/demand streams.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub records: Vec<SlotRecord>,
    pub crn_hash: u64,
}

impl SingleRun {
    /// Records of one policy, in slot order.
    pub fn policy_records(&self, name: &str) -> Vec<&SlotRecord> {
        self.records.iter().filter(|r| r.policy == name).collect()
    }

    pub fn final_utility(&self, name: &str) -> f64 {
        self.policy_records(name).iter().map(|r| r.utility).sum()
    }

    pub fn final_regret(&self, name: &str) -> f64 {
        self.policy_records(name)
            .last()
            .map_or(0.0, |r| r.cum_regret)
    }
}

/// Drive every policy through `horizon` slots against one demand source.
/// The oracle reference decision is recomputed each slot with `oracle_solver`
/// (exact by default) on the true means and evaluated on realized demands.
pub fn run_single(
    model: &EdgeModel,
    policies: &mut [Box<dyn Policy>],
    source: &DemandSource<'_>,
    horizon: u64,
    oracle_solver: Solver,
    delta: f64,
) -> Result<SingleRun, SimError> {
    let mut records = Vec::with_capacity(horizon as usize * policies.len());
    let mut cum_regret = vec![0.0; policies.len()];
    let mut cum_delta_regret = vec![0.0; policies.len()];
    let mut hash = Fnv1a::new();

    for t in 1..=horizon {
        let contexts = source.contexts(t);
        let demands = source.demands(t, &contexts);
        let means = source.true_means(t, &contexts);

        hash.write_u64(t);
        for x in &contexts {
            for &v in x {
                hash.write_f64(v);
            }
        }
        for &d in &demands {
            hash.write_f64(d);
        }

        let oracle_inst = build_kcg(model, &means, &[])?;
        let oracle_sol = oracle_solver.solve(&oracle_inst)?;
        let oracle_dec = solution_to_decision(&oracle_inst, &oracle_sol, model.n_sbs());
        let oracle_utility = model.total_utility(&oracle_dec, &demands)?;

        let view = SlotView {
            t,
            contexts: &contexts,
            true_means: Some(&means),
        };
        for (i, policy) in policies.iter_mut().enumerate() {
            let (decision, phase) = policy.decide(&view).map_err(|source| SimError::Policy {
                policy: policy.name().to_string(),
                slot: t,
                source,
            })?;
            if !model.check_feasible(&decision) {
                return Err(SimError::InfeasibleDecision {
                    policy: policy.name().to_string(),
                    slot: t,
                });
            }
            let spend = model.decision_cost(&decision);
            let utility = model.total_utility(&decision, &demands)?;
            cum_regret[i] += oracle_utility - utility;
            cum_delta_regret[i] += oracle_utility / delta - utility;
            policy
                .observe(&Feedback {
                    decision: &decision,
                    demands: &demands,
                    utility,
                })
                .map_err(|source| SimError::Policy {
                    policy: policy.name().to_string(),
                    slot: t,
                    source,
                })?;
            records.push(SlotRecord {
                slot: t,
                policy: policy.name().to_string(),
                phase,
                decision,
                spend,
                utility,
                oracle_utility,
                cum_regret: cum_regret[i],
                cum_delta_regret: cum_delta_regret[i],
            });
        }
    }

    Ok(SingleRun {
        records,
        crn_hash: hash.finish(),
    })
}

// ---------------------------------------------------------------------------
// Experiment orchestration
// ---------------------------------------------------------------------------

/// One replication's results inside a full experiment.
#[derive(Debug, Clone)]
pub struct Replication {
    pub rep: u64,
    pub run: SingleRun,
}

/// A full experiment: all replications of one configuration.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub horizon: u64,
    pub policy_names: Vec<String>,
    pub replications: Vec<Replication>,
}

impl RunOutput {
    /// Mean cumulative-regret curve of one policy across replications.
    pub fn mean_regret_curve(&self, policy: &str) -> Vec<f64> {
        let mut curve = vec![0.0; self.horizon as usize];
        for rep in &self.replications {
            for (i, r) in rep.run.policy_records(policy).iter().enumerate() {
                curve[i] += r.cum_regret;
            }
        }
        let n = self.replications.len().max(1) as f64;
        curve.iter_mut().for_each(|v| *v /= n);
        curve
    }

    pub fn mean_final_utility(&self, policy: &str) -> f64 {
        let n = self.replications.len().max(1) as f64;
        self.replications
            .iter()
            .map(|r| r.run.final_utility(policy))
            .sum::<f64>()
            / n
    }

    pub fn mean_final_regret(&self, policy: &str) -> f64 {
        let n = self.replications.len().max(1) as f64;
        self.replications
            .iter()
            .map(|r| r.run.final_regret(policy))
            .sum::<f64>()
            / n
    }
}

/// Prepared demand environment of one experiment configuration: the edge
/// model plus whichever demand source the mode calls for. Lets the CLI and
/// tests drive replications without repeating trace ingestion.
pub struct ExperimentEnv {
    pub model: EdgeModel,
    pub horizon: u64,
    pub oracle_solver: Solver,
    pub delta: f64,
    synth: Option<SyntheticModel>,
    trace_data: Option<TraceData>,
}

struct TraceData {
    series: SlotSeries,
    means: Vec<BTreeMap<CellIndex, f64>>,
    partition: Partition,
}

impl ExperimentEnv {
    pub fn prepare(cfg: &ExperimentConfig) -> Result<Self, SimError> {
        let model = cfg.build_model().map_err(|e| SimError::Config(e.to_string()))?;
        let oracle_solver = if cfg.solver.is_exact() {
            cfg.solver
        } else {
            Solver::BranchAndBound
        };
        let delta = cfg.delta.unwrap_or(1.0);

        match cfg.mode {
            Mode::Synthetic => {
                let synth = cfg
                    .build_synthetic()
                    .map_err(|e| SimError::Config(e.to_string()))?;
                Ok(Self {
                    model,
                    horizon: cfg.horizon,
                    oracle_solver,
                    delta,
                    synth: Some(synth),
                    trace_data: None,
                })
            }
            Mode::Trace => {
                let section = cfg
                    .trace
                    .as_ref()
                    .ok_or_else(|| SimError::Config("trace mode needs a [trace] section".into()))?;
                let trace = trace::load_trace(&section.path)?;
                let site_map = section
                    .site_map
                    .clone()
                    .unwrap_or_else(|| trace::default_site_map(&trace));
                let (mut series, report) =
                    trace::aggregate_slots(&trace, section.slot_seconds, &site_map, cfg.n_sbs())?;
                trace::build_contexts(&mut series, cfg.context_dim)?;
                if !report.unmapped.is_empty() {
                    eprintln!(
                        "warning: {} events at unmapped sites: {:?}",
                        report.total_events - report.mapped_events,
                        report.unmapped.keys().collect::<Vec<_>>()
                    );
                }
                let horizon = cfg.horizon.min(series.n_slots() as u64);
                let params = cfg.designed_params();
                let partition = Partition::new(params.cells_per_dim, params.dim)
                    .map_err(|e| SimError::Config(e.to_string()))?;
                let means = trace::cell_means(&series, &partition);
                Ok(Self {
                    model,
                    horizon,
                    oracle_solver,
                    delta,
                    synth: None,
                    trace_data: Some(TraceData {
                        series,
                        means,
                        partition,
                    }),
                })
            }
        }
    }

    /// Demand source of one replication.
    pub fn source(&self, replication: u64) -> DemandSource<'_> {
        match (&self.synth, &self.trace_data) {
            (Some(model), _) => DemandSource::Synthetic { model, replication },
            (None, Some(data)) => DemandSource::Trace {
                series: &data.series,
                means: &data.means,
                partition: data.partition,
            },
            (None, None) => unreachable!("prepare() always fills one source"),
        }
    }

    pub fn synthetic(&self) -> Option<&SyntheticModel> {
        self.synth.as_ref()
    }
}

/// Run every replication of the configured experiment. Replications are
/// independent and run in parallel; outputs are ordered by replication
/// index, so results are identical regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, SimError> {
    let env = ExperimentEnv::prepare(cfg)?;
    let reps: Result<Vec<Replication>, SimError> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let mut policies = cfg
                .build_policies(&env.model, rep)
                .map_err(|e| SimError::Config(e.to_string()))?;
            let run = run_single(
                &env.model,
                &mut policies,
                &env.source(rep),
                env.horizon,
                env.oracle_solver,
                env.delta,
            )?;
            Ok(Replication { rep, run })
        })
        .collect();
    Ok(RunOutput {
        horizon: env.horizon,
        policy_names: cfg.policies.clone(),
        replications: reps?,
    })
}
