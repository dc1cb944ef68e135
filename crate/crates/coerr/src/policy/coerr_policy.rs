//! The COERR policy: context-aware online edge resource rental.
//!
//! Each slot is one of three phases, determined by the set of
//! *under-explored* SBSs — those whose current context cell has been seen
//! fewer than `K(t)` times (a never-seen cell always counts as
//! under-explored, which covers `K(1) = 0`):
//!
//! - **explore** — the minimal rentals of all under-explored SBSs already
//!   exceed the budget: rent `f_min` at as many of the cheapest
//!   under-explored SBSs as fit.
//! - **semi-explore** — budget remains after renting `f_min` at every
//!   under-explored SBS: pin those rentals and optimize the rest via the
//!   knapsack subproblem on current estimates.
//! - **exploit** — nothing under-explored: optimize the full rental on
//!   estimates alone.
//!
//! Demand is observed at every SBS with a nonzero rental, in any phase, and
//! folded into the per-(SBS, cell) estimator bank.

use std::sync::Arc;

use crate::estimator::{partition_point, CellIndex, EstimatorBank, Partition};
use crate::kcg::{build_kcg, solution_to_decision, Solver};
use crate::model::{EdgeModel, RentalDecision};

use super::{Feedback, Phase, Policy, PolicyError, SlotView};

// ---------------------------------------------------------------------------
// Parameter design
// ---------------------------------------------------------------------------

/// Horizon-designed COERR inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoerrParams {
    /// Time horizon `T` the parameters were designed for.
    pub horizon: u64,
    /// Hölder exponent of the demand-vs-context smoothness assumption.
    pub alpha: f64,
    /// Context dimension `D`.
    pub dim: usize,
    /// Cells per dimension, `⌈T^{1/(3α+D)}⌉`.
    pub cells_per_dim: u32,
    /// Exponent of the control function, `2α/(3α+D)`.
    pub control_exponent: f64,
}

impl CoerrParams {
    /// Cells of the designed partition per SBS, `h_T^D`.
    pub fn partition_cells(&self) -> u64 {
        u64::from(self.cells_per_dim).pow(self.dim as u32)
    }
}

/// Design `h_T` and the control-function exponent from the horizon.
pub fn design_parameters(horizon: u64, alpha: f64, dim: usize) -> CoerrParams {
    assert!(horizon >= 1 && alpha > 0.0 && dim >= 1);
    let denom = 3.0 * alpha + dim as f64;
    let raw = (horizon as f64).powf(1.0 / denom);
    // powf can land a hair above an exact integer root; don't let the
    // ceiling inflate the grid in that case.
    let cells_per_dim = if (raw - raw.round()).abs() < 1e-9 {
        raw.round() as u32
    } else {
        raw.ceil() as u32
    };
    CoerrParams {
        horizon,
        alpha,
        dim,
        cells_per_dim: cells_per_dim.max(1),
        control_exponent: 2.0 * alpha / denom,
    }
}

/// Control function `K(t) = t^z · ln t`; `K(1) = 0`.
pub fn control_threshold(t: u64, params: &CoerrParams) -> f64 {
    assert!(t >= 1);
    let t = t as f64;
    t.powf(params.control_exponent) * t.ln()
}

/// Length of the `j`-th doubling phase (1-based): `2^{j-1} · T₁`.
pub fn doubling_phase_length(phase: u32, initial_horizon: u64) -> u64 {
    assert!(phase >= 1 && initial_horizon >= 1);
    initial_horizon << (phase - 1)
}

// ---------------------------------------------------------------------------
// Phase machinery
// ---------------------------------------------------------------------------

/// SBS indices whose current cell counter is below the threshold; a zero
/// counter is under-explored regardless of the threshold.
pub fn under_explored_set(bank: &EstimatorBank, cells: &[CellIndex], threshold: f64) -> Vec<usize> {
    cells
        .iter()
        .enumerate()
        .filter(|(n, cell)| {
            let count = bank.count(*n, cell);
            count == 0 || (count as f64) < threshold
        })
        .map(|(n, _)| n)
        .collect()
}

/// Pure-exploration selection: add under-explored SBSs cheapest-first
/// (ties to the lowest index) while their minimal rentals fit the budget.
pub fn explore_select(under_explored: &[usize], model: &EdgeModel) -> Vec<usize> {
    let mut order: Vec<usize> = under_explored.to_vec();
    order.sort_by(|&a, &b| {
        model.sbss[a]
            .min_rental_cost()
            .total_cmp(&model.sbss[b].min_rental_cost())
            .then(a.cmp(&b))
    });
    let mut selected = Vec::new();
    let mut spent = 0.0;
    for n in order {
        let cost = model.sbss[n].min_rental_cost();
        if spent + cost <= model.budget.value() {
            spent += cost;
            selected.push(n);
        } else {
            break;
        }
    }
    selected.sort_unstable();
    selected
}

/// Per-slot audit entry kept for invariant checks and phase statistics.
#[derive(Debug, Clone)]
pub struct CoerrAudit {
    pub slot: u64,
    pub phase: Phase,
    pub under_explored: Vec<usize>,
    pub cells: Vec<CellIndex>,
    pub decision: RentalDecision,
}

struct PendingSlot {
    cells: Vec<CellIndex>,
}

/// COERR with a horizon-designed partition and estimator bank.
pub struct CoerrPolicy {
    name: String,
    model: Arc<EdgeModel>,
    params: CoerrParams,
    partition: Partition,
    bank: EstimatorBank,
    solver: Solver,
    t: u64,
    demand_clip: f64,
    clipped_observations: u64,
    pending: Option<PendingSlot>,
    audits: Vec<CoerrAudit>,
}

impl CoerrPolicy {
    pub fn new(
        name: impl Into<String>,
        model: Arc<EdgeModel>,
        params: CoerrParams,
        solver: Solver,
    ) -> Result<Self, PolicyError> {
        let partition = Partition::new(params.cells_per_dim, params.dim)?;
        let demand_clip = model.max_admission_cap();
        Ok(Self {
            name: name.into(),
            model,
            params,
            partition,
            bank: EstimatorBank::new(0),
            solver,
            t: 1,
            demand_clip,
            clipped_observations: 0,
            pending: None,
            audits: Vec::new(),
        }
        .reset_bank())
    }

    /// COERR-ORX: rent either nothing or exactly `capacity` at each SBS.
    /// Errs if any SBS does not offer `capacity`.
    pub fn fixed_capacity(
        name: impl Into<String>,
        model: &EdgeModel,
        capacity: f64,
        params: CoerrParams,
        solver: Solver,
    ) -> Result<Self, PolicyError> {
        for (n, sbs) in model.sbss.iter().enumerate() {
            if capacity <= 0.0 || !sbs.contains(capacity) {
                return Err(PolicyError::CapacityNotOffered { capacity, sbs: n });
            }
        }
        let restricted = model.with_rental_set(&[0.0, capacity])?;
        Self::new(name, Arc::new(restricted), params, solver)
    }

    fn reset_bank(mut self) -> Self {
        self.bank = EstimatorBank::new(self.model.n_sbs());
        self
    }

    pub fn params(&self) -> &CoerrParams {
        &self.params
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn bank(&self) -> &EstimatorBank {
        &self.bank
    }

    pub fn audits(&self) -> &[CoerrAudit] {
        &self.audits
    }

    /// Observations clipped down to the demand range before recording.
    pub fn clipped_observations(&self) -> u64 {
        self.clipped_observations
    }

    pub fn phase_counts(&self) -> (u64, u64, u64) {
        let mut counts = (0, 0, 0);
        for a in &self.audits {
            match a.phase {
                Phase::Explore => counts.0 += 1,
                Phase::SemiExplore => counts.1 += 1,
                Phase::Exploit => counts.2 += 1,
            }
        }
        counts
    }

    /// Demand estimate per SBS for the given cells: sample mean where
    /// experience exists, 0 for empty cells (those are necessarily
    /// under-explored and only appear pinned to their minimal rental).
    fn estimates(&self, cells: &[CellIndex]) -> Vec<f64> {
        cells
            .iter()
            .enumerate()
            .map(|(n, cell)| self.bank.estimate(n, cell).unwrap_or(0.0))
            .collect()
    }
}

impl Policy for CoerrPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError> {
        let cells = slot
            .contexts
            .iter()
            .map(|x| partition_point(x, &self.partition))
            .collect::<Result<Vec<_>, _>>()?;
        let threshold = control_threshold(self.t, &self.params);
        let under = under_explored_set(&self.bank, &cells, threshold);

        let (decision, phase) = if under.is_empty() {
            // Exploitation: optimize on estimates alone.
            let estimates = self.estimates(&cells);
            let inst = build_kcg(&self.model, &estimates, &[])?;
            let sol = self.solver.solve(&inst)?;
            (
                solution_to_decision(&inst, &sol, self.model.n_sbs()),
                Phase::Exploit,
            )
        } else {
            let min_cost: f64 = under
                .iter()
                .map(|&n| self.model.sbss[n].min_rental_cost())
                .sum();
            if min_cost >= self.model.budget.value() {
                // Pure exploration: cheapest minimal rentals first.
                let selected = explore_select(&under, &self.model);
                let mut dec = RentalDecision::zeros(self.model.n_sbs());
                for &n in &selected {
                    dec.0[n] = self.model.sbss[n].f_min;
                }
                (dec, Phase::Explore)
            } else {
                // Semi-exploration: pin minimal rentals at under-explored
                // SBSs, optimize the remaining budget.
                let forced: Vec<(usize, f64)> = under
                    .iter()
                    .map(|&n| (n, self.model.sbss[n].f_min))
                    .collect();
                let estimates = self.estimates(&cells);
                let inst = build_kcg(&self.model, &estimates, &forced)?;
                let sol = self.solver.solve(&inst)?;
                (
                    solution_to_decision(&inst, &sol, self.model.n_sbs()),
                    Phase::SemiExplore,
                )
            }
        };

        self.audits.push(CoerrAudit {
            slot: self.t,
            phase,
            under_explored: under,
            cells: cells.clone(),
            decision: decision.clone(),
        });
        self.pending = Some(PendingSlot { cells });
        Ok((decision, Some(phase)))
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        let pending = self.pending.take().ok_or(PolicyError::ObserveBeforeDecide)?;
        for n in feedback.decision.rented() {
            let mut demand = feedback.demands[n];
            if demand > self.demand_clip {
                demand = self.demand_clip;
                self.clipped_observations += 1;
            }
            self.bank.record(n, &pending.cells[n], demand);
        }
        self.t += 1;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Doubling-trick wrapper
// ---------------------------------------------------------------------------

/// Runs COERR over doubling phases for an unknown horizon: phase `j` lasts
/// `2^{j-1} · T₁` slots and restarts COERR from scratch with parameters
/// designed for that length.
pub struct DoublingCoerr {
    name: String,
    model: Arc<EdgeModel>,
    alpha: f64,
    dim: usize,
    solver: Solver,
    initial_horizon: u64,
    phase_index: u32,
    slots_left_in_phase: u64,
    inner: CoerrPolicy,
}

impl DoublingCoerr {
    pub fn new(
        name: impl Into<String>,
        model: Arc<EdgeModel>,
        alpha: f64,
        dim: usize,
        initial_horizon: u64,
        solver: Solver,
    ) -> Result<Self, PolicyError> {
        let name = name.into();
        let params = design_parameters(initial_horizon, alpha, dim);
        let inner = CoerrPolicy::new(name.clone(), Arc::clone(&model), params, solver)?;
        Ok(Self {
            name,
            model,
            alpha,
            dim,
            solver,
            initial_horizon,
            phase_index: 1,
            slots_left_in_phase: initial_horizon,
            inner,
        })
    }

    pub fn phase_index(&self) -> u32 {
        self.phase_index
    }

    pub fn inner(&self) -> &CoerrPolicy {
        &self.inner
    }

    fn advance_phase(&mut self) -> Result<(), PolicyError> {
        self.phase_index += 1;
        let len = doubling_phase_length(self.phase_index, self.initial_horizon);
        self.slots_left_in_phase = len;
        let params = design_parameters(len, self.alpha, self.dim);
        self.inner = CoerrPolicy::new(self.name.clone(), Arc::clone(&self.model), params, self.solver)?;
        Ok(())
    }
}

impl Policy for DoublingCoerr {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, slot: &SlotView<'_>) -> Result<(RentalDecision, Option<Phase>), PolicyError> {
        if self.slots_left_in_phase == 0 {
            self.advance_phase()?;
        }
        self.inner.decide(slot)
    }

    fn observe(&mut self, feedback: &Feedback<'_>) -> Result<(), PolicyError> {
        self.inner.observe(feedback)?;
        self.slots_left_in_phase -= 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Budget, CloudConfig, SbsConfig, TaskProfile};

    fn table_model(n: usize, budget: f64) -> Arc<EdgeModel> {
        Arc::new(
            EdgeModel::new(
                TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
                CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
                (0..n)
                    .map(|id| {
                        SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6)
                            .unwrap()
                    })
                    .collect(),
                Budget::new(budget).unwrap(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn design_parameters_reference() {
        let p = design_parameters(2700, 1.0, 2);
        assert_eq!(p.cells_per_dim, 5);
        assert!((p.control_exponent - 0.4).abs() < 1e-12);

        assert_eq!(design_parameters(1, 1.0, 2).cells_per_dim, 1);
        // Exact integer roots are not inflated by the ceiling: 32^(1/5) = 2.
        assert_eq!(design_parameters(32, 1.0, 2).cells_per_dim, 2);
    }

    #[test]
    fn control_threshold_values() {
        let p = design_parameters(2700, 1.0, 2);
        assert_eq!(control_threshold(1, &p), 0.0);
        let k = control_threshold(2700, &p);
        assert!((k - 186.3).abs() < 0.1, "K(2700) = {k}");
        // Monotone increasing past t = 1.
        let ks: Vec<f64> = (1..50).map(|t| control_threshold(t, &p)).collect();
        assert!(ks.windows(2).all(|w| w[1] > w[0] || w[0] == 0.0));
    }

    #[test]
    fn doubling_lengths() {
        assert_eq!(doubling_phase_length(1, 100), 100);
        assert_eq!(doubling_phase_length(3, 100), 400);
        let total: u64 = (1..=5).map(|j| doubling_phase_length(j, 100)).sum();
        assert_eq!(total, (2u64.pow(5) - 1) * 100);
    }

    #[test]
    fn under_explored_rules() {
        let bank_empty = EstimatorBank::new(2);
        let cells = vec![CellIndex(vec![0, 0]), CellIndex(vec![1, 1])];
        // Zero counters are under-explored even at threshold 0.
        assert_eq!(under_explored_set(&bank_empty, &cells, 0.0), vec![0, 1]);

        let mut bank = EstimatorBank::new(2);
        for _ in 0..5 {
            bank.record(1, &cells[1], 10.0);
        }
        assert_eq!(under_explored_set(&bank, &cells, 3.0), vec![0]);
        for _ in 0..5 {
            bank.record(0, &cells[0], 10.0);
        }
        assert!(under_explored_set(&bank, &cells, 3.0).is_empty());
    }

    #[test]
    fn explore_select_greedy_order() {
        // Heterogeneous prices: w(f_min) = (3, 2, 4).
        let sbss: Vec<SbsConfig> = [3.0, 2.0, 4.0]
            .iter()
            .enumerate()
            .map(|(id, &price)| {
                SbsConfig::linear(id, vec![0.0, 1.0], 2e9, price, 150.0, 5e6).unwrap()
            })
            .collect();
        let model = EdgeModel::new(
            TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
            CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
            sbss,
            Budget::new(6.0).unwrap(),
        )
        .unwrap();
        let s = explore_select(&[0, 1, 2], &model);
        assert_eq!(s, vec![0, 1]); // cost 2 + 3 = 5; adding SBS 2 would reach 9

        let zero_budget = model.with_budget(Budget::new(0.0).unwrap());
        assert!(explore_select(&[0, 1, 2], &zero_budget).is_empty());
    }

    #[test]
    fn explore_select_tie_breaks_by_index() {
        let model = table_model(5, 8.0);
        // All w(f_min) = 2; budget fits exactly 4.
        let s = explore_select(&[0, 1, 2, 3, 4], &model);
        assert_eq!(s, vec![0, 1, 2, 3]);
    }

    #[test]
    fn first_slot_explores_everything() {
        let model = table_model(5, 8.0);
        let params = design_parameters(2700, 1.0, 2);
        let mut policy =
            CoerrPolicy::new("coerr", Arc::clone(&model), params, Solver::BranchAndBound).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 5];
        let (dec, phase) = policy
            .decide(&SlotView {
                t: 1,
                contexts: &contexts,
                true_means: None,
            })
            .unwrap();
        // Σ w(f_min) = 10 ≥ B = 8 → pure exploration of the 4 cheapest.
        assert_eq!(phase, Some(Phase::Explore));
        assert_eq!(dec.0, vec![2.0, 2.0, 2.0, 2.0, 0.0]);
        assert!(model.check_feasible(&dec));

        // Only rented SBSs record observations.
        let demands = vec![100.0; 5];
        let utility = model.total_utility(&dec, &demands).unwrap();
        policy
            .observe(&Feedback {
                decision: &dec,
                demands: &demands,
                utility,
            })
            .unwrap();
        let cell = policy.partition().locate(&[0.5, 0.5]).unwrap();
        for n in 0..4 {
            assert_eq!(policy.bank().count(n, &cell), 1);
        }
        assert_eq!(policy.bank().count(4, &cell), 0);
    }

    #[test]
    fn semi_explore_pins_min_rentals() {
        let model = table_model(2, 8.0);
        let params = design_parameters(2700, 1.0, 2);
        let mut policy =
            CoerrPolicy::new("coerr", Arc::clone(&model), params, Solver::BranchAndBound).unwrap();

        // t = 1: both cells empty, Σ w(f_min) = 4 < B = 8 → semi-explore
        // with both SBSs pinned to f_min; no free group remains.
        let contexts = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let view = SlotView {
            t: 1,
            contexts: &contexts,
            true_means: None,
        };
        let (dec, phase) = policy.decide(&view).unwrap();
        assert_eq!(phase, Some(Phase::SemiExplore));
        assert_eq!(dec.0, vec![2.0, 2.0]);
        let demands = vec![400.0, 400.0];
        let utility = model.total_utility(&dec, &demands).unwrap();
        policy
            .observe(&Feedback {
                decision: &dec,
                demands: &demands,
                utility,
            })
            .unwrap();

        // t = 2: SBS 0 lands in a fresh cell (under-explored), SBS 1 stays
        // in its visited cell with count 1 ≥ K(2) ≈ 0.91 (explored). Semi-
        // exploration pins f_0 = f_min and optimizes SBS 1 over the
        // remaining budget 6: with demand estimate 400 the best affordable
        // rental is f = 6.
        let moved = vec![vec![0.9, 0.9], vec![0.5, 0.5]];
        let (dec2, phase2) = policy
            .decide(&SlotView {
                t: 2,
                contexts: &moved,
                true_means: None,
            })
            .unwrap();
        assert_eq!(phase2, Some(Phase::SemiExplore));
        assert_eq!(dec2.0[0], 2.0, "under-explored SBS pinned to f_min");
        assert_eq!(dec2.0[1], 6.0, "explored SBS optimized over the rest");
        assert!(model.check_feasible(&dec2));
        assert_eq!(policy.audits()[1].under_explored, vec![0]);
    }

    #[test]
    fn exploit_when_counters_exceed_threshold() {
        let model = table_model(2, 8.0);
        // Tiny horizon keeps K(t) small: K(2) < 2 for T = 4.
        let params = design_parameters(4, 1.0, 2);
        let mut policy =
            CoerrPolicy::new("coerr", Arc::clone(&model), params, Solver::BranchAndBound).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 2];
        let demands = vec![400.0, 400.0];

        for t in 1..=3u64 {
            let view = SlotView {
                t,
                contexts: &contexts,
                true_means: None,
            };
            let (dec, _) = policy.decide(&view).unwrap();
            let utility = model.total_utility(&dec, &demands).unwrap();
            policy
                .observe(&Feedback {
                    decision: &dec,
                    demands: &demands,
                    utility,
                })
                .unwrap();
        }
        let (dec, phase) = policy
            .decide(&SlotView {
                t: 4,
                contexts: &contexts,
                true_means: None,
            })
            .unwrap();
        // K(4) = 4^{0.4}·ln 4 ≈ 2.42 < 3 visits.
        assert_eq!(phase, Some(Phase::Exploit));
        assert!(!dec.is_all_zero());
        assert!(model.check_feasible(&dec));
    }

    #[test]
    fn exploit_with_zero_estimates_rents_nothing() {
        let model = table_model(2, 8.0);
        let params = design_parameters(4, 1.0, 2);
        let mut policy =
            CoerrPolicy::new("coerr", Arc::clone(&model), params, Solver::BranchAndBound).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 2];
        let demands = vec![0.0, 0.0];
        for t in 1..=6u64 {
            let view = SlotView {
                t,
                contexts: &contexts,
                true_means: None,
            };
            let (dec, _) = policy.decide(&view).unwrap();
            let utility = model.total_utility(&dec, &demands).unwrap();
            policy
                .observe(&Feedback {
                    decision: &dec,
                    demands: &demands,
                    utility,
                })
                .unwrap();
        }
        // Zero demand estimates make every item worthless: whenever the
        // policy exploits, it rents nothing.
        let exploit_slots: Vec<_> = policy
            .audits()
            .iter()
            .filter(|a| a.phase == Phase::Exploit)
            .collect();
        assert!(!exploit_slots.is_empty());
        assert!(exploit_slots.iter().all(|a| a.decision.is_all_zero()));
    }

    #[test]
    fn observe_requires_decide() {
        let model = table_model(2, 8.0);
        let params = design_parameters(4, 1.0, 2);
        let mut policy =
            CoerrPolicy::new("coerr", model, params, Solver::BranchAndBound).unwrap();
        let dec = RentalDecision::zeros(2);
        let err = policy
            .observe(&Feedback {
                decision: &dec,
                demands: &[0.0, 0.0],
                utility: 0.0,
            })
            .unwrap_err();
        assert!(matches!(err, PolicyError::ObserveBeforeDecide));
    }

    #[test]
    fn fixed_capacity_variant() {
        let model = table_model(3, 8.0);
        let params = design_parameters(100, 1.0, 2);
        let orx =
            CoerrPolicy::fixed_capacity("coerr-or2", &model, 2.0, params, Solver::BranchAndBound)
                .unwrap();
        assert_eq!(orx.model.sbss[0].rental_set, vec![0.0, 2.0]);

        let err = CoerrPolicy::fixed_capacity("coerr-or3", &model, 3.0, params, Solver::BranchAndBound)
            .err()
            .unwrap();
        assert!(matches!(err, PolicyError::CapacityNotOffered { .. }));
    }

    #[test]
    fn fixed_capacity_or6_rents_at_most_one() {
        let model = table_model(5, 8.0);
        let params = design_parameters(50, 1.0, 2);
        let mut orx =
            CoerrPolicy::fixed_capacity("coerr-or6", &model, 6.0, params, Solver::BranchAndBound)
                .unwrap();
        let contexts = vec![vec![0.5, 0.5]; 5];
        let demands = vec![500.0; 5];
        for t in 1..=10u64 {
            let view = SlotView {
                t,
                contexts: &contexts,
                true_means: None,
            };
            let (dec, _) = orx.decide(&view).unwrap();
            assert!(dec.rented().count() <= 1, "w(6) = 6, B = 8");
            let utility = orx.model.total_utility(&dec, &demands).unwrap();
            orx.observe(&Feedback {
                decision: &dec,
                demands: &demands,
                utility,
            })
            .unwrap();
        }
    }

    #[test]
    fn doubling_restarts_with_longer_designs() {
        let model = table_model(2, 8.0);
        let mut wrapper =
            DoublingCoerr::new("coerr-doubling", model, 1.0, 2, 4, Solver::BranchAndBound).unwrap();
        let contexts = vec![vec![0.5, 0.5]; 2];
        let demands = vec![100.0, 100.0];
        let h1 = wrapper.inner().params().cells_per_dim;
        for t in 1..=12u64 {
            let view = SlotView {
                t,
                contexts: &contexts,
                true_means: None,
            };
            let (dec, _) = wrapper.decide(&view).unwrap();
            let utility = wrapper.inner().model.total_utility(&dec, &demands).unwrap();
            wrapper
                .observe(&Feedback {
                    decision: &dec,
                    demands: &demands,
                    utility,
                })
                .unwrap();
        }
        // Phases: 4 + 8 slots consumed → now in phase 3 territory next decide.
        assert_eq!(wrapper.phase_index(), 2);
        let params_phase2 = wrapper.inner().params();
        assert_eq!(params_phase2.horizon, 8);
        assert!(params_phase2.cells_per_dim >= h1);
        // Inner state restarted: slot counter reset to phase-local time.
        assert!(wrapper.inner().audits().len() <= 8);
    }
}
