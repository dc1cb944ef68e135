//! Self-check suites behind `coerr validate`.
//!
//! Four independent suites: solver oracle-equivalence on random knapsack
//! instances, a Monte-Carlo check of the Hoeffding tail bound, the Hölder
//! smoothness check of the synthetic generator, and the closed-form
//! arm/hypercube counts of the reference setup.

use rand::Rng;

use crate::estimator::hoeffding_tail;
use crate::kcg::{
    measure_delta, solve_branch_and_bound, solve_brute_force, solve_exact_dp, KcgInstance, KcgItem,
};
use crate::model::{Budget, CloudConfig, EdgeModel, SbsConfig, TaskProfile};
use crate::policy::{design_parameters, enumerate_arms, DEFAULT_ARM_CAP};
use crate::rng::stream;
use crate::sim::synthetic::{check_holder, SyntheticModel};

/// Outcome of one suite.
#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl SuiteResult {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Reference model: `n` homogeneous SBSs with the standard tariff.
pub fn reference_model(n: usize, budget: f64) -> EdgeModel {
    EdgeModel::new(
        TaskProfile::new(8e6, 1e9, 10.0).expect("valid task"),
        CloudConfig::new(2e10, 2e6, 1e8, 0.05).expect("valid cloud"),
        (0..n)
            .map(|id| {
                SbsConfig::linear(id, vec![0.0, 2.0, 4.0, 6.0], 2e9, 1.0, 150.0, 5e6)
                    .expect("valid sbs")
            })
            .collect(),
        Budget::new(budget).expect("valid budget"),
    )
    .expect("valid model")
}

/// One random instance of the solver-equivalence distribution: ≤ 12 items,
/// integral weights 1–6, values 0–100, budget 0–15, sometimes a forced set.
pub fn random_kcg_instance(rng: &mut impl Rng) -> KcgInstance {
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
    KcgInstance::new(items, budget, forced).expect("generated instance is valid")
}

/// Outcome of the solver-equivalence suite.
#[derive(Debug, Clone, Default)]
pub struct EquivalenceStats {
    pub instances: usize,
    pub mismatches: usize,
    pub infeasible: usize,
    pub worst_delta: f64,
    pub delta_violations: usize,
}

/// Branch-and-bound and DP must match brute force exactly on every
/// instance, all solutions must be feasible, and the measured greedy ratio
/// must bound the optimum.
pub fn solver_equivalence(instances: usize, seed: u64) -> EquivalenceStats {
    let mut rng = stream(seed, &[0xE0]);
    let mut stats = EquivalenceStats {
        instances,
        worst_delta: 1.0,
        ..Default::default()
    };
    for _ in 0..instances {
        let inst = random_kcg_instance(&mut rng);
        let bf = solve_brute_force(&inst).expect("within cap");
        let dp = solve_exact_dp(&inst).expect("integral weights");
        let bb = solve_branch_and_bound(&inst).expect("always solves");
        if bf.value != dp.value || bf.value != bb.value {
            stats.mismatches += 1;
        }
        for sol in [&bf, &dp, &bb] {
            if !inst.is_feasible_selection(&sol.chosen) {
                stats.infeasible += 1;
            }
        }
        let (greedy, delta) = measure_delta(&inst).expect("greedy solves");
        if !inst.is_feasible_selection(&greedy.chosen) {
            stats.infeasible += 1;
        }
        if !delta.is_finite() || delta * greedy.value < bf.value - 1e-9 {
            stats.delta_violations += 1;
        }
        if delta.is_finite() && delta > stats.worst_delta {
            stats.worst_delta = delta;
        }
    }
    stats
}

/// Outcome of one Monte-Carlo tail check.
#[derive(Debug, Clone)]
pub struct PacResult {
    pub count: u64,
    pub epsilon: f64,
    pub violation_rate: f64,
    /// Two-sided Hoeffding bound `2·exp(-2Cε²/λ_max²)`.
    pub bound: f64,
    /// Bound plus a 3σ binomial allowance on the trial count.
    pub threshold: f64,
    pub passed: bool,
}

/// Estimate `Pr(|mean − μ| > ε)` for sample means of `count` i.i.d. demands
/// uniform on `[0, demand_range]` and compare against the two-sided
/// Hoeffding bound.
pub fn pac_check(count: u64, epsilon: f64, demand_range: f64, trials: u64, seed: u64) -> PacResult {
    let mut rng = stream(seed, &[0xAC, count, epsilon.to_bits()]);
    let mu = demand_range / 2.0;
    let mut violations = 0u64;
    for _ in 0..trials {
        let mut sum = 0.0;
        for _ in 0..count {
            sum += rng.random_range(0.0..demand_range);
        }
        if (sum / count as f64 - mu).abs() > epsilon {
            violations += 1;
        }
    }
    let violation_rate = violations as f64 / trials as f64;
    let bound = 2.0 * hoeffding_tail(epsilon, count, demand_range);
    let p = bound.min(1.0);
    let threshold = bound + 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    PacResult {
        count,
        epsilon,
        violation_rate,
        bound,
        threshold,
        passed: violation_rate <= threshold,
    }
}

/// The grid of PAC checks exercised by `validate` and the acceptance suite.
pub fn pac_grid(trials: u64, seed: u64) -> Vec<PacResult> {
    let mut out = Vec::new();
    for &count in &[10u64, 50, 200] {
        for &epsilon in &[15.0, 30.0] {
            out.push(pac_check(count, epsilon, 300.0, trials, seed));
        }
    }
    out
}

/// Closed-form reference counts: feasible arms per SBS count and the
/// hypercube ceilings `N·h_T^D`.
pub fn reference_counts() -> Vec<(usize, usize, u64)> {
    let params = design_parameters(2700, 1.0, 2);
    [5usize, 8, 10]
        .iter()
        .map(|&n| {
            let model = reference_model(n, 8.0);
            let arms = enumerate_arms(&model, DEFAULT_ARM_CAP)
                .map(|t| t.len())
                .unwrap_or(0);
            let cells = n as u64 * params.partition_cells();
            (n, arms, cells)
        })
        .collect()
}

/// Run all suites with moderate sizes.
pub fn run_all(seed: u64) -> Vec<SuiteResult> {
    let mut results = Vec::new();

    let eq = solver_equivalence(300, seed);
    results.push(SuiteResult::new(
        "kcg-oracle-equivalence",
        eq.mismatches == 0 && eq.infeasible == 0 && eq.delta_violations == 0,
        format!(
            "{} instances, {} mismatches, {} infeasible, worst greedy δ {:.4}",
            eq.instances, eq.mismatches, eq.infeasible, eq.worst_delta
        ),
    ));

    let pac = pac_grid(10_000, seed);
    let pac_ok = pac.iter().all(|r| r.passed);
    let worst = pac
        .iter()
        .map(|r| r.violation_rate - r.threshold)
        .fold(f64::NEG_INFINITY, f64::max);
    results.push(SuiteResult::new(
        "estimator-pac-bound",
        pac_ok,
        format!("{} grid points, worst margin {worst:.5}", pac.len()),
    ));

    let synth = SyntheticModel::generate(5, 2, 900.0, 60.0, 900.0, 1.0, seed, 5, 4);
    let holder = check_holder(&synth, 2000, 1.0);
    results.push(SuiteResult::new(
        "synthetic-holder-condition",
        holder.passed(),
        format!(
            "{} pairs, worst ratio {:.4}",
            holder.pairs_checked, holder.worst_ratio
        ),
    ));

    let counts = reference_counts();
    let expected = [(5usize, 121usize, 125u64), (8, 487, 200), (10, 991, 250)];
    let counts_ok = counts
        .iter()
        .zip(&expected)
        .all(|(got, want)| got == want);
    results.push(SuiteResult::new(
        "reference-counts",
        counts_ok,
        format!("{counts:?}"),
    ));

    results
}
