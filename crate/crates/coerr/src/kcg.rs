//! Per-slot knapsack with conflict graph.
//!
//! Every (SBS, nonzero capacity) pair is an item; items of the same SBS
//! conflict pairwise, so the conflict graph is a disjoint union of per-SBS
//! cliques and the problem is a multiple-choice knapsack: pick at most one
//! item per group subject to the budget, maximizing total value. Forced
//! `(group, capacity)` pairs pin a group to exactly that item — used to
//! guarantee minimal rentals at under-explored SBSs.
//!
//! Four solvers share the same contract: exhaustive enumeration (the
//! correctness oracle), a pseudo-polynomial DP over integral weights,
//! branch-and-bound with a fractional relaxation bound, and a density
//! greedy that serves as the pluggable δ-approximation. Exact solvers break
//! value ties toward the lexicographically smallest chosen-id set, so equal
//! inputs reproduce equal outputs across runs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::EdgeModel;

/// Items solvable by brute force before the enumeration cap trips.
pub const BRUTE_FORCE_CAP: usize = 20;

/// Default budget quantum for the DP solver (reference tariffs are integral).
pub const DP_QUANTUM: f64 = 1.0;

const DP_MAX_CAPACITY: u64 = 50_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum KcgError {
    #[error("too large for brute force: {items} items exceeds cap {cap}")]
    TooLargeForBruteForce { items: usize, cap: usize },

    #[error("DP requires integral weights: item {id} has weight {weight} (quantum {quantum})")]
    NonIntegralWeight { id: usize, weight: f64, quantum: f64 },

    #[error("scaled budget {0} too large for DP")]
    DpBudgetTooLarge(u64),

    #[error("infeasible exploration: forced items cost {forced} but budget is {budget}")]
    InfeasibleExploration { forced: f64, budget: f64 },

    #[error("forced pair (group {group}, capacity {capacity}) matches no item")]
    ForcedItemMissing { group: usize, capacity: f64 },

    #[error("group {0} is forced more than once")]
    DuplicateForcedGroup(usize),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid demand estimates: {0}")]
    InvalidEstimates(String),

    #[error("unknown solver '{0}' (expected bb, dp, bruteforce, or greedy)")]
    UnknownSolver(String),
}

/// One candidate rental: SBS `group` at `capacity` units.
#[derive(Debug, Clone, PartialEq)]
pub struct KcgItem {
    pub id: usize,
    pub group: usize,
    pub capacity: f64,
    /// Budget cost `w(capacity)`.
    pub weight: f64,
    /// Estimated utility of this rental.
    pub value: f64,
}

/// Immutable problem instance.
#[derive(Debug, Clone)]
pub struct KcgInstance {
    items: Vec<KcgItem>,
    budget: f64,
    forced: Vec<(usize, f64)>,
    n_groups: usize,
}

impl KcgInstance {
    pub fn new(
        mut items: Vec<KcgItem>,
        budget: f64,
        forced: Vec<(usize, f64)>,
    ) -> Result<Self, KcgError> {
        if !(budget.is_finite() && budget >= 0.0) {
            return Err(KcgError::InvalidInstance(format!(
                "budget {budget} must be finite and >= 0"
            )));
        }
        items.sort_by_key(|it| it.id);
        for pair in items.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(KcgError::InvalidInstance(format!(
                    "duplicate item id {}",
                    pair[0].id
                )));
            }
        }
        for it in &items {
            if !(it.weight.is_finite() && it.weight >= 0.0) || !it.value.is_finite() {
                return Err(KcgError::InvalidInstance(format!(
                    "item {} has weight {} / value {}",
                    it.id, it.weight, it.value
                )));
            }
        }
        let n_groups = items.iter().map(|it| it.group + 1).max().unwrap_or(0);

        let mut seen_groups = Vec::new();
        let mut forced_weight = 0.0;
        for &(group, capacity) in &forced {
            if seen_groups.contains(&group) {
                return Err(KcgError::DuplicateForcedGroup(group));
            }
            seen_groups.push(group);
            let item = items
                .iter()
                .find(|it| it.group == group && it.capacity == capacity)
                .ok_or(KcgError::ForcedItemMissing { group, capacity })?;
            forced_weight += item.weight;
        }
        if forced_weight > budget {
            return Err(KcgError::InfeasibleExploration {
                forced: forced_weight,
                budget,
            });
        }

        Ok(Self {
            items,
            budget,
            forced,
            n_groups,
        })
    }

    pub fn items(&self) -> &[KcgItem] {
        &self.items
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn forced(&self) -> &[(usize, f64)] {
        &self.forced
    }

    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn item(&self, id: usize) -> Option<&KcgItem> {
        self.items
            .binary_search_by_key(&id, |it| it.id)
            .ok()
            .map(|i| &self.items[i])
    }

    /// Ids of the pinned items, ascending.
    pub fn forced_item_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .forced
            .iter()
            .map(|&(g, c)| {
                self.items
                    .iter()
                    .find(|it| it.group == g && it.capacity == c)
                    .expect("validated at construction")
                    .id
            })
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Canonical value of a selection: sum in ascending-id order.
    pub fn selection_value(&self, ids: &[usize]) -> f64 {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        sorted
            .iter()
            .map(|&id| self.item(id).expect("unknown id").value)
            .sum()
    }

    pub fn selection_weight(&self, ids: &[usize]) -> f64 {
        let mut sorted = ids.to_vec();
        sorted.sort_unstable();
        sorted
            .iter()
            .map(|&id| self.item(id).expect("unknown id").weight)
            .sum()
    }

    /// Budget, one-per-group, and forced-inclusion feasibility of a selection.
    pub fn is_feasible_selection(&self, ids: &[usize]) -> bool {
        let mut groups: Vec<usize> = Vec::with_capacity(ids.len());
        for &id in ids {
            let Some(it) = self.item(id) else {
                return false;
            };
            if groups.contains(&it.group) {
                return false;
            }
            groups.push(it.group);
        }
        self.selection_weight(ids) <= self.budget
            && self.forced_item_ids().iter().all(|id| ids.contains(id))
    }
}

/// Solver output: chosen item ids (ascending), canonical value and weight.
#[derive(Debug, Clone, PartialEq)]
pub struct KcgSolution {
    pub chosen: Vec<usize>,
    pub value: f64,
    pub weight: f64,
    /// Whether the producing solver is exact.
    pub exact: bool,
    /// Claimed approximation ratio; `Some(1.0)` for exact solvers, `None`
    /// when the ratio has not been measured against an exact solver.
    pub delta: Option<f64>,
}

/// Build the per-slot instance from demand estimates: one item per
/// (SBS, nonzero capacity) with weight `w_n(f)` and value
/// `min(λ̂_n, cap_n(f)) · Δ_n(f)`.
pub fn build_kcg(
    model: &EdgeModel,
    estimates: &[f64],
    forced: &[(usize, f64)],
) -> Result<KcgInstance, KcgError> {
    if estimates.len() != model.n_sbs() {
        return Err(KcgError::InvalidEstimates(format!(
            "{} estimates for {} SBSs",
            estimates.len(),
            model.n_sbs()
        )));
    }
    if let Some(bad) = estimates.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(KcgError::InvalidEstimates(format!(
            "estimate {bad} must be finite and >= 0"
        )));
    }
    let mut items = Vec::new();
    let mut id = 0;
    for (n, sbs) in model.sbss.iter().enumerate() {
        for &capacity in sbs.nonzero_capacities() {
            items.push(KcgItem {
                id,
                group: n,
                capacity,
                weight: sbs.price_of(capacity),
                value: model.sbs_utility(n, capacity, estimates[n]),
            });
            id += 1;
        }
    }
    KcgInstance::new(items, model.budget.value(), forced.to_vec())
}

/// Turn a solution into the rental decision it encodes.
pub fn solution_to_decision(
    inst: &KcgInstance,
    solution: &KcgSolution,
    n_sbs: usize,
) -> crate::model::RentalDecision {
    let mut dec = crate::model::RentalDecision::zeros(n_sbs);
    for &id in &solution.chosen {
        let item = inst.item(id).expect("solution ids come from the instance");
        dec.0[item.group] = item.capacity;
    }
    dec
}

// ---------------------------------------------------------------------------
// shared preparation
// ---------------------------------------------------------------------------

struct Prepared<'a> {
    pinned_ids: Vec<usize>,
    /// Non-pinned groups, ascending group id; items in id order.
    free_groups: Vec<Vec<&'a KcgItem>>,
    budget_left: f64,
}

fn prepare(inst: &KcgInstance) -> Prepared<'_> {
    let pinned_ids = inst.forced_item_ids();
    let pinned_weight = inst.selection_weight(&pinned_ids);
    let pinned_groups: Vec<usize> = inst.forced.iter().map(|&(g, _)| g).collect();
    // items() is id-sorted, so each per-group list comes out id-ascending.
    let mut by_group: std::collections::BTreeMap<usize, Vec<&KcgItem>> =
        std::collections::BTreeMap::new();
    for it in inst.items() {
        if pinned_groups.contains(&it.group) {
            continue;
        }
        by_group.entry(it.group).or_default().push(it);
    }
    Prepared {
        pinned_ids,
        free_groups: by_group.into_values().collect(),
        budget_left: inst.budget - pinned_weight,
    }
}

fn finish(inst: &KcgInstance, prep: &Prepared<'_>, free_ids: &[usize], exact: bool) -> KcgSolution {
    let mut chosen = prep.pinned_ids.clone();
    chosen.extend_from_slice(free_ids);
    chosen.sort_unstable();
    KcgSolution {
        value: inst.selection_value(&chosen),
        weight: inst.selection_weight(&chosen),
        chosen,
        exact,
        delta: if exact { Some(1.0) } else { None },
    }
}

/// `(value, ids)` comparison: higher value wins, ties go to the
/// lexicographically smallest id set.
fn better(value: f64, ids: &[usize], best_value: f64, best_ids: &[usize]) -> bool {
    value > best_value || (value == best_value && ids < best_ids)
}

// ---------------------------------------------------------------------------
// brute force (oracle)
// ---------------------------------------------------------------------------

/// Exhaustive per-group enumeration; the correctness oracle for the other
/// solvers. Errs above [`BRUTE_FORCE_CAP`] items.
pub fn solve_brute_force(inst: &KcgInstance) -> Result<KcgSolution, KcgError> {
    solve_brute_force_capped(inst, BRUTE_FORCE_CAP)
}

pub fn solve_brute_force_capped(inst: &KcgInstance, cap: usize) -> Result<KcgSolution, KcgError> {
    if inst.items().len() > cap {
        return Err(KcgError::TooLargeForBruteForce {
            items: inst.items().len(),
            cap,
        });
    }
    let prep = prepare(inst);
    let mut best_ids: Vec<usize> = Vec::new();
    let mut best_value = 0.0;
    let mut stack_ids: Vec<usize> = Vec::new();

    fn recurse(
        prep: &Prepared<'_>,
        depth: usize,
        spent: f64,
        value: f64,
        stack_ids: &mut Vec<usize>,
        best_value: &mut f64,
        best_ids: &mut Vec<usize>,
    ) {
        if depth == prep.free_groups.len() {
            if better(value, stack_ids, *best_value, best_ids) {
                *best_value = value;
                *best_ids = stack_ids.clone();
            }
            return;
        }
        // Skip this group.
        recurse(prep, depth + 1, spent, value, stack_ids, best_value, best_ids);
        for item in &prep.free_groups[depth] {
            if spent + item.weight <= prep.budget_left {
                stack_ids.push(item.id);
                recurse(
                    prep,
                    depth + 1,
                    spent + item.weight,
                    value + item.value,
                    stack_ids,
                    best_value,
                    best_ids,
                );
                stack_ids.pop();
            }
        }
    }

    recurse(
        &prep,
        0,
        0.0,
        0.0,
        &mut stack_ids,
        &mut best_value,
        &mut best_ids,
    );
    Ok(finish(inst, &prep, &best_ids, true))
}

// ---------------------------------------------------------------------------
// dynamic programming
// ---------------------------------------------------------------------------

/// Pseudo-polynomial DP over (group, residual budget) with the default
/// budget quantum of one unit. Requires integral weights after scaling.
pub fn solve_exact_dp(inst: &KcgInstance) -> Result<KcgSolution, KcgError> {
    solve_exact_dp_quantized(inst, DP_QUANTUM)
}

pub fn solve_exact_dp_quantized(inst: &KcgInstance, quantum: f64) -> Result<KcgSolution, KcgError> {
    if !(quantum.is_finite() && quantum > 0.0) {
        return Err(KcgError::InvalidInstance(format!(
            "quantum {quantum} must be finite and > 0"
        )));
    }
    let prep = prepare(inst);
    let scale = |id: usize, weight: f64| -> Result<u64, KcgError> {
        let scaled = weight / quantum;
        let rounded = scaled.round();
        if (scaled - rounded).abs() > 1e-9 {
            return Err(KcgError::NonIntegralWeight {
                id,
                weight,
                quantum,
            });
        }
        Ok(rounded as u64)
    };
    for group in &prep.free_groups {
        for item in group {
            scale(item.id, item.weight)?;
        }
    }
    let capacity = (prep.budget_left / quantum + 1e-9).floor() as u64;
    if capacity > DP_MAX_CAPACITY {
        return Err(KcgError::DpBudgetTooLarge(capacity));
    }
    let capacity = capacity as usize;

    #[derive(Clone)]
    struct Cell {
        value: f64,
        ids: Vec<usize>,
    }
    let mut dp = vec![
        Cell {
            value: 0.0,
            ids: Vec::new(),
        };
        capacity + 1
    ];

    for group in &prep.free_groups {
        let mut next = dp.clone(); // keeping the group empty
        for b in 0..=capacity {
            for item in group {
                let w = scale(item.id, item.weight).expect("validated above") as usize;
                if w > b {
                    continue;
                }
                let base = &dp[b - w];
                let value = base.value + item.value;
                if value > next[b].value
                    || (value == next[b].value && {
                        let mut ids = base.ids.clone();
                        ids.push(item.id);
                        ids.sort_unstable();
                        ids < next[b].ids
                    })
                {
                    let mut ids = base.ids.clone();
                    ids.push(item.id);
                    ids.sort_unstable();
                    next[b] = Cell { value, ids };
                }
            }
        }
        dp = next;
    }

    Ok(finish(inst, &prep, &dp[capacity].ids, true))
}

// ---------------------------------------------------------------------------
// branch and bound
// ---------------------------------------------------------------------------

/// Exact branch-and-bound over per-group choices. The upper bound at a node
/// is the fractional relaxation of the remaining groups' positive-value
/// items by value-per-weight; pruning is strict, so value ties still reach
/// the deterministic tie-break.
pub fn solve_branch_and_bound(inst: &KcgInstance) -> Result<KcgSolution, KcgError> {
    let prep = prepare(inst);

    // Per-suffix item lists sorted by density for the relaxation bound.
    let n_groups = prep.free_groups.len();
    let mut suffix: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n_groups + 1];
    for g in (0..n_groups).rev() {
        let mut items: Vec<(f64, f64)> = suffix[g + 1].clone();
        for item in &prep.free_groups[g] {
            if item.value > 0.0 {
                items.push((item.weight, item.value));
            }
        }
        items.sort_by(|a, b| density(b).total_cmp(&density(a)));
        suffix[g] = items;
    }

    fn density(entry: &(f64, f64)) -> f64 {
        if entry.0 > 0.0 {
            entry.1 / entry.0
        } else {
            f64::INFINITY
        }
    }

    fn fractional_bound(items: &[(f64, f64)], mut budget: f64) -> f64 {
        let mut bound = 0.0;
        for &(w, v) in items {
            if w <= 0.0 {
                bound += v;
            } else if w <= budget {
                bound += v;
                budget -= w;
            } else {
                if budget > 0.0 {
                    bound += v * budget / w;
                }
                break;
            }
        }
        bound
    }

    struct Search<'a, 'b> {
        prep: &'b Prepared<'a>,
        suffix: Vec<Vec<(f64, f64)>>,
        best_value: f64,
        best_ids: Vec<usize>,
        have_best: bool,
    }

    impl Search<'_, '_> {
        fn dfs(&mut self, depth: usize, spent: f64, value: f64, ids: &mut Vec<usize>) {
            if depth == self.prep.free_groups.len() {
                if !self.have_best || better(value, ids, self.best_value, &self.best_ids) {
                    self.best_value = value;
                    self.best_ids = ids.clone();
                    self.have_best = true;
                }
                return;
            }
            if self.have_best {
                let ub = value + fractional_bound(&self.suffix[depth], self.prep.budget_left - spent);
                if ub < self.best_value {
                    return;
                }
            }
            // Highest-value options first to tighten the incumbent early.
            let mut order: Vec<&KcgItem> = self.prep.free_groups[depth]
                .iter()
                .filter(|it| spent + it.weight <= self.prep.budget_left)
                .copied()
                .collect();
            order.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.id.cmp(&b.id)));
            for item in order {
                ids.push(item.id);
                self.dfs(depth + 1, spent + item.weight, value + item.value, ids);
                ids.pop();
            }
            // Skip the group.
            self.dfs(depth + 1, spent, value, ids);
        }
    }

    let mut search = Search {
        prep: &prep,
        suffix,
        best_value: 0.0,
        best_ids: Vec::new(),
        have_best: false,
    };
    let mut ids = Vec::new();
    search.dfs(0, 0.0, 0.0, &mut ids);
    let mut best = search.best_ids;
    best.sort_unstable();
    Ok(finish(inst, &prep, &best, true))
}

// ---------------------------------------------------------------------------
// greedy (δ-approximation)
// ---------------------------------------------------------------------------

/// Density greedy: after pinning forced items, repeatedly pick the feasible
/// item with the highest value-per-weight, replacing a same-group choice
/// only when the value strictly improves and the budget allows. The ratio is
/// left unverified; use [`measure_delta`] to measure it against an exact
/// solver.
pub fn solve_greedy(inst: &KcgInstance) -> Result<KcgSolution, KcgError> {
    let prep = prepare(inst);
    // chosen[g] = index into free_groups[g]
    let mut chosen: Vec<Option<usize>> = vec![None; prep.free_groups.len()];
    let mut spent = 0.0;

    loop {
        let mut pick: Option<(f64, usize, usize, usize)> = None; // (density, id, group, idx)
        for (g, group) in prep.free_groups.iter().enumerate() {
            for (idx, item) in group.iter().enumerate() {
                if chosen[g] == Some(idx) {
                    continue;
                }
                let feasible = match chosen[g] {
                    None => item.value > 0.0 && spent + item.weight <= prep.budget_left,
                    Some(cur_idx) => {
                        let cur = group[cur_idx];
                        item.value > cur.value
                            && spent - cur.weight + item.weight <= prep.budget_left
                    }
                };
                if !feasible {
                    continue;
                }
                let density = if item.weight > 0.0 {
                    item.value / item.weight
                } else {
                    f64::INFINITY
                };
                let candidate = (density, item.id, g, idx);
                let replace = match &pick {
                    None => true,
                    Some((best_d, best_id, _, _)) => {
                        density > *best_d || (density == *best_d && item.id < *best_id)
                    }
                };
                if replace {
                    pick = Some(candidate);
                }
            }
        }
        let Some((_, _, g, idx)) = pick else {
            break;
        };
        if let Some(prev) = chosen[g] {
            spent -= prep.free_groups[g][prev].weight;
        }
        spent += prep.free_groups[g][idx].weight;
        chosen[g] = Some(idx);
    }

    let mut free_ids: Vec<usize> = chosen
        .iter()
        .enumerate()
        .filter_map(|(g, c)| c.map(|idx| prep.free_groups[g][idx].id))
        .collect();
    free_ids.sort_unstable();
    Ok(finish(inst, &prep, &free_ids, false))
}

/// Run greedy and branch-and-bound on the same instance; return the greedy
/// solution stamped with its measured approximation ratio `optimum / value`
/// (1 when greedy matches or the optimum is non-positive).
pub fn measure_delta(inst: &KcgInstance) -> Result<(KcgSolution, f64), KcgError> {
    let exact = solve_branch_and_bound(inst)?;
    let mut greedy = solve_greedy(inst)?;
    let ratio = if exact.value <= greedy.value || exact.value <= 0.0 {
        1.0
    } else if greedy.value > 0.0 {
        exact.value / greedy.value
    } else {
        f64::INFINITY
    };
    greedy.delta = Some(ratio);
    Ok((greedy, ratio))
}

// ---------------------------------------------------------------------------
// solver selection
// ---------------------------------------------------------------------------

/// Sub-problem solver choice, as exposed on the CLI and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Solver {
    #[serde(rename = "bb")]
    BranchAndBound,
    #[serde(rename = "dp")]
    ExactDp,
    #[serde(rename = "bruteforce")]
    BruteForce,
    #[serde(rename = "greedy")]
    Greedy,
}

impl Solver {
    pub fn solve(&self, inst: &KcgInstance) -> Result<KcgSolution, KcgError> {
        match self {
            Solver::BranchAndBound => solve_branch_and_bound(inst),
            Solver::ExactDp => solve_exact_dp(inst),
            Solver::BruteForce => solve_brute_force(inst),
            Solver::Greedy => solve_greedy(inst),
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Solver::Greedy)
    }
}

impl std::str::FromStr for Solver {
    type Err = KcgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bb" => Ok(Solver::BranchAndBound),
            "dp" => Ok(Solver::ExactDp),
            "bruteforce" => Ok(Solver::BruteForce),
            "greedy" => Ok(Solver::Greedy),
            other => Err(KcgError::UnknownSolver(other.to_string())),
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Solver::BranchAndBound => "bb",
            Solver::ExactDp => "dp",
            Solver::BruteForce => "bruteforce",
            Solver::Greedy => "greedy",
        };
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Budget, CloudConfig, EdgeModel, SbsConfig, TaskProfile};
    use approx::assert_relative_eq;
    use rand::Rng;

    fn item(id: usize, group: usize, weight: f64, value: f64) -> KcgItem {
        KcgItem {
            id,
            group,
            capacity: id as f64,
            weight,
            value,
        }
    }

    /// Spec'd 3-item example: optimum is {1, 3} with value 7 at weight 5.
    fn three_item_instance() -> KcgInstance {
        KcgInstance::new(
            vec![
                item(1, 1, 2.0, 3.0),
                item(2, 1, 4.0, 5.0),
                item(3, 2, 3.0, 4.0),
            ],
            5.0,
            vec![],
        )
        .unwrap()
    }

    fn table_model(n: usize, budget: f64) -> EdgeModel {
        EdgeModel::new(
            TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
            CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
            (0..n)
                .map(|id| {
                    SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6).unwrap()
                })
                .collect(),
            Budget::new(budget).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn build_kcg_item_layout() {
        let model = EdgeModel::new(
            TaskProfile::new(8e6, 1e9, 10.0).unwrap(),
            CloudConfig::new(2e10, 2e6, 1e8, 0.05).unwrap(),
            (0..2)
                .map(|id| SbsConfig::linear(id, vec![0.0, 2.0, 4.0], 2e9, 1.0, 150.0, 5e6).unwrap())
                .collect(),
            Budget::new(8.0).unwrap(),
        )
        .unwrap();
        let inst = build_kcg(&model, &[400.0, 100.0], &[]).unwrap();
        assert_eq!(inst.items().len(), 4);
        assert_eq!(inst.n_groups(), 2);
        // Item 0 is (SBS 0, f = 2): cap 300 of 400 demanded, Δ(2) = 2.33.
        assert_relative_eq!(inst.items()[0].value, 699.0, max_relative = 1e-12);
        assert_eq!(inst.items()[0].weight, 2.0);
    }

    #[test]
    fn build_kcg_zero_estimates_pick_nothing() {
        let model = table_model(3, 8.0);
        let inst = build_kcg(&model, &[0.0, 0.0, 0.0], &[]).unwrap();
        assert!(inst.items().iter().all(|it| it.value <= 0.0));
        let sol = solve_brute_force(&inst).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn build_kcg_rejects_bad_estimates() {
        let model = table_model(2, 8.0);
        assert!(build_kcg(&model, &[1.0], &[]).is_err());
        assert!(build_kcg(&model, &[1.0, f64::NAN], &[]).is_err());
        assert!(build_kcg(&model, &[1.0, -2.0], &[]).is_err());
    }

    #[test]
    fn forced_budget_overflow_is_infeasible_exploration() {
        let model = table_model(2, 3.0);
        let err = build_kcg(&model, &[10.0, 10.0], &[(0, 2.0), (1, 2.0)]).unwrap_err();
        assert!(matches!(err, KcgError::InfeasibleExploration { .. }));
    }

    #[test]
    fn brute_force_three_items() {
        let sol = solve_brute_force(&three_item_instance()).unwrap();
        assert_eq!(sol.chosen, vec![1, 3]);
        assert_eq!(sol.value, 7.0);
        assert_eq!(sol.weight, 5.0);
        assert!(sol.exact);
        assert_eq!(sol.delta, Some(1.0));
    }

    #[test]
    fn brute_force_zero_budget_and_negative_values() {
        let inst = KcgInstance::new(vec![item(1, 1, 1.0, 5.0)], 0.0, vec![]).unwrap();
        let sol = solve_brute_force(&inst).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.value, 0.0);

        let neg = KcgInstance::new(vec![item(1, 1, 1.0, -2.0)], 5.0, vec![]).unwrap();
        let sol = solve_brute_force(&neg).unwrap();
        assert!(sol.chosen.is_empty());
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn brute_force_cap() {
        let items: Vec<KcgItem> = (0..21).map(|i| item(i, i, 1.0, 1.0)).collect();
        let inst = KcgInstance::new(items, 5.0, vec![]).unwrap();
        assert!(matches!(
            solve_brute_force(&inst),
            Err(KcgError::TooLargeForBruteForce { items: 21, cap: 20 })
        ));
    }

    #[test]
    fn dp_matches_brute_force_on_three_items() {
        let inst = three_item_instance();
        let dp = solve_exact_dp(&inst).unwrap();
        let bf = solve_brute_force(&inst).unwrap();
        assert_eq!(dp.value, bf.value);
        assert_eq!(dp.chosen, bf.chosen);
    }

    #[test]
    fn dp_all_zero_values() {
        let inst = KcgInstance::new(
            vec![item(1, 1, 2.0, 0.0), item(2, 2, 1.0, 0.0)],
            5.0,
            vec![],
        )
        .unwrap();
        let sol = solve_exact_dp(&inst).unwrap();
        assert_eq!(sol.value, 0.0);
        assert!(sol.chosen.is_empty());
    }

    #[test]
    fn dp_rejects_non_integral_weights() {
        let inst = KcgInstance::new(vec![item(1, 1, 1.5, 3.0)], 5.0, vec![]).unwrap();
        assert!(matches!(
            solve_exact_dp(&inst),
            Err(KcgError::NonIntegralWeight { id: 1, .. })
        ));
        // but works at a finer quantum
        assert!(solve_exact_dp_quantized(&inst, 0.5).is_ok());
    }

    #[test]
    fn dp_on_reference_model_matches_brute_force() {
        let model = table_model(5, 8.0);
        let inst = build_kcg(&model, &[1e6; 5], &[]).unwrap();
        let dp = solve_exact_dp(&inst).unwrap();
        let bf = solve_brute_force(&inst).unwrap();
        assert_eq!(dp.value, bf.value);
    }

    #[test]
    fn branch_and_bound_three_items() {
        let bb = solve_branch_and_bound(&three_item_instance()).unwrap();
        assert_eq!(bb.chosen, vec![1, 3]);
        assert_eq!(bb.value, 7.0);
    }

    #[test]
    fn branch_and_bound_all_too_heavy() {
        let inst = KcgInstance::new(
            vec![item(1, 1, 9.0, 5.0), item(2, 2, 9.0, 5.0)],
            5.0,
            vec![],
        )
        .unwrap();
        let sol = solve_branch_and_bound(&inst).unwrap();
        assert!(sol.chosen.is_empty());
    }

    #[test]
    fn forced_items_always_kept() {
        let inst = KcgInstance::new(
            vec![
                item(1, 1, 2.0, -5.0), // forced despite negative value
                item(2, 1, 4.0, 50.0),
                item(3, 2, 3.0, 4.0),
            ],
            5.0,
            vec![(1, 1.0)],
        )
        .unwrap();
        for solver in [
            Solver::BruteForce,
            Solver::ExactDp,
            Solver::BranchAndBound,
            Solver::Greedy,
        ] {
            let sol = solver.solve(&inst).unwrap();
            assert!(sol.chosen.contains(&1), "{solver} dropped the forced item");
            assert!(!sol.chosen.contains(&2), "{solver} double-filled the group");
            assert!(inst.is_feasible_selection(&sol.chosen));
        }
    }

    #[test]
    fn greedy_three_items_and_single_group() {
        let g = solve_greedy(&three_item_instance()).unwrap();
        assert_eq!(g.value, 7.0);
        assert!(!g.exact);
        assert_eq!(g.delta, None);

        // Single group: greedy ends at the best affordable item.
        let inst = KcgInstance::new(
            vec![item(1, 1, 2.0, 3.0), item(2, 1, 4.0, 5.0)],
            5.0,
            vec![],
        )
        .unwrap();
        let g = solve_greedy(&inst).unwrap();
        assert_eq!(g.chosen, vec![2]);
        assert_eq!(g.value, 5.0);
    }

    #[test]
    fn measured_delta_bounds_optimum() {
        let (sol, delta) = measure_delta(&three_item_instance()).unwrap();
        assert_eq!(delta, 1.0);
        assert_eq!(sol.delta, Some(1.0));

        let mut rng = crate::rng::stream(7, &[99]);
        for _ in 0..200 {
            let inst = random_instance(&mut rng);
            let (g, delta) = measure_delta(&inst).unwrap();
            let opt = solve_brute_force(&inst).unwrap().value;
            assert!(delta.is_finite());
            assert!(delta * g.value >= opt - 1e-9);
        }
    }

    fn random_instance(rng: &mut impl Rng) -> KcgInstance {
        let n_items = rng.random_range(1..=12);
        let n_groups = rng.random_range(1..=4usize);
        let items: Vec<KcgItem> = (0..n_items)
            .map(|i| KcgItem {
                id: i,
                group: rng.random_range(0..n_groups),
                capacity: i as f64 + 1.0,
                weight: rng.random_range(1..=6) as f64,
                value: rng.random_range(0.0..100.0),
            })
            .collect();
        let budget = rng.random_range(0..=15) as f64;

        // Random forced set that stays within budget.
        let mut forced = Vec::new();
        let mut forced_weight = 0.0;
        let mut groups_seen = Vec::new();
        if rng.random_bool(0.4) {
            for it in &items {
                if groups_seen.contains(&it.group) {
                    continue;
                }
                if forced_weight + it.weight <= budget && rng.random_bool(0.3) {
                    forced.push((it.group, it.capacity));
                    forced_weight += it.weight;
                    groups_seen.push(it.group);
                }
            }
        }
        KcgInstance::new(items, budget, forced).unwrap()
    }

    #[test]
    fn randomized_oracle_equivalence() {
        let mut rng = crate::rng::stream(13, &[5]);
        for round in 0..300 {
            let inst = random_instance(&mut rng);
            let bf = solve_brute_force(&inst).unwrap();
            let dp = solve_exact_dp(&inst).unwrap();
            let bb = solve_branch_and_bound(&inst).unwrap();
            assert_eq!(bf.value, dp.value, "dp mismatch in round {round}");
            assert_eq!(bf.value, bb.value, "bb mismatch in round {round}");
            for sol in [&bf, &dp, &bb] {
                assert!(inst.is_feasible_selection(&sol.chosen));
            }
        }
    }

    #[test]
    fn budget_monotonicity() {
        let mut rng = crate::rng::stream(99, &[1]);
        for _ in 0..100 {
            let inst = random_instance(&mut rng);
            let bigger = KcgInstance::new(
                inst.items().to_vec(),
                inst.budget() + 3.0,
                inst.forced().to_vec(),
            )
            .unwrap();
            let v1 = solve_branch_and_bound(&inst).unwrap().value;
            let v2 = solve_branch_and_bound(&bigger).unwrap().value;
            assert!(v2 >= v1);
        }
    }

    #[test]
    fn solver_parsing() {
        assert_eq!("bb".parse::<Solver>().unwrap(), Solver::BranchAndBound);
        assert_eq!("dp".parse::<Solver>().unwrap(), Solver::ExactDp);
        assert_eq!("bruteforce".parse::<Solver>().unwrap(), Solver::BruteForce);
        assert_eq!("greedy".parse::<Solver>().unwrap(), Solver::Greedy);
        assert!("simplex".parse::<Solver>().is_err());
        assert!(!Solver::Greedy.is_exact());
        assert_eq!(Solver::BranchAndBound.to_string(), "bb");
    }

    #[test]
    fn forced_pair_must_exist() {
        let err = KcgInstance::new(vec![item(1, 1, 2.0, 3.0)], 5.0, vec![(1, 9.0)]).unwrap_err();
        assert!(matches!(err, KcgError::ForcedItemMissing { .. }));
        let err = KcgInstance::new(
            vec![item(1, 1, 2.0, 3.0), item(2, 1, 3.0, 4.0)],
            9.0,
            vec![(1, 1.0), (1, 2.0)],
        )
        .unwrap_err();
        assert!(matches!(err, KcgError::DuplicateForcedGroup(1)));
    }
}
