//! Contextual-combinatorial bandit laboratory for budget-constrained edge
//! resource rental.
//!
//! An application service provider rents processor capacity at small-cell
//! base stations (SBSs) slot by slot, under a per-slot budget, without
//! knowing the service demand each site will receive. This crate bundles:
//!
//! - [`model`] — the delay/utility model of the edge system: uplink rates,
//!   edge and cloud service delays, delay reductions, per-SBS and total
//!   utility, and feasibility of rental decisions.
//! - [`kcg`] — the per-slot knapsack-with-conflict-graph subproblem (one
//!   clique per SBS, i.e. a multiple-choice knapsack) with brute-force,
//!   dynamic-programming, branch-and-bound, and greedy solvers.
//! - [`estimator`] — hypercube partitioning of the context space and
//!   per-(SBS, cell) demand estimation with Hoeffding tail bounds.
//! - [`policy`] — the COERR online rental policy (explore / semi-explore /
//!   exploit phases, doubling-trick wrapper) and benchmark policies:
//!   Oracle, CUCB, LinUCB, Random, and the fixed-capacity COERR-ORX variant.
//! - [`sim`] — trace ingestion, synthetic demand generation, the experiment
//!   loop with common random numbers, regret and δ-regret series, and the
//!   leading-order regret bound used for curve overlays.
//! - [`config`] / [`cli`] — declarative experiment configuration and the
//!   `coerr` command-line front end (`run`, `sweep`, `solve-kcg`,
//!   `validate`, `snapshot-estimator`).
//!
//! Start with the runnable examples (`cargo run --example synthetic_run`)
//! or the README for the CLI workflow.

pub mod cli;
pub mod config;
pub mod estimator;
pub mod kcg;
pub mod model;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod validate;

pub use estimator::{CellIndex, CellStats, EstimatorBank, Partition};
pub use kcg::{KcgInstance, KcgItem, KcgSolution, Solver};
pub use model::{Budget, CloudConfig, EdgeModel, RentalDecision, SbsConfig, TaskProfile};
pub use policy::{Phase, Policy};
