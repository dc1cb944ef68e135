//! Command-line front end.
//!
//! Subcommands: `run` (one experiment, result CSVs per replication plus a
//! summary), `sweep` (same experiment across budget / rental-set / SBS-count
//! values), `solve-kcg` (one knapsack instance from CSV), `validate`
//! (self-check suites), and `snapshot-estimator` (COERR's per-cell demand
//! estimates as CSV).
//!
//! Exit codes: 0 success, 1 failed validation or runtime error, 2 config or
//! I/O error.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::kcg::{measure_delta, KcgInstance, KcgItem, Solver};
use crate::policy::{enumerate_arms, CoerrPolicy, Policy, DEFAULT_ARM_CAP};
use crate::sim::{run_experiment, ExperimentEnv, RunOutput, SlotRecord};
use crate::validate;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "coerr",
    version,
    about = "Budget-constrained edge resource rental: bandit policies, knapsack solvers, experiment harness"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the configured experiment and write result CSVs.
    Run(RunArgs),
    /// Run the experiment once per value of a swept axis.
    Sweep(SweepArgs),
    /// Solve a knapsack-with-conflict-graph instance given as CSV.
    SolveKcg(SolveKcgArgs),
    /// Run the self-check suites and print a pass/fail matrix.
    Validate(ValidateArgs),
    /// Run COERR alone and export its estimator bank as CSV.
    SnapshotEstimator(SnapshotArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the horizon T.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    pub replications: Option<usize>,
    /// Override the policy roster (comma-separated names).
    #[arg(long, value_delimiter = ',')]
    pub policies: Option<Vec<String>>,
    /// Override the subproblem solver: bb, dp, bruteforce, or greedy.
    #[arg(long, value_parser = parse_solver)]
    pub solver: Option<Solver>,
    /// Override the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Swept axis: budget, rental-set, or n-sbs.
    #[arg(long)]
    pub axis: SweepAxis,
    /// Axis values. budget/n-sbs: comma-separated numbers; rental-set:
    /// semicolon-separated capacity lists, e.g. "0,2;0,2,4;0,2,4,6".
    #[arg(long)]
    pub values: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    Budget,
    RentalSet,
    NSbs,
}

#[derive(Debug, Args)]
pub struct SolveKcgArgs {
    /// Instance CSV with header `id,group,weight,value`.
    #[arg(long)]
    pub items: PathBuf,
    /// Knapsack budget.
    #[arg(long)]
    pub budget: f64,
    /// Solver: bb, dp, bruteforce, or greedy (greedy also reports its
    /// measured ratio).
    #[arg(long, value_parser = parse_solver, default_value = "bb")]
    pub solver: Solver,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Seed for the randomized suites.
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SnapshotArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_solver(s: &str) -> Result<Solver, String> {
    s.parse().map_err(|e: crate::kcg::KcgError| e.to_string())
}

/// Entry point used by the binary; maps errors to exit codes.
pub fn execute(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::SolveKcg(args) => cmd_solve_kcg(args),
        Command::Validate(args) => cmd_validate(args),
        Command::SnapshotEstimator(args) => cmd_snapshot(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn load_config(path: &Path) -> Result<ExperimentConfig> {
    ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

fn apply_overrides(cfg: &mut ExperimentConfig, args: &RunArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(horizon) = args.horizon {
        cfg.horizon = horizon;
    }
    if let Some(reps) = args.replications {
        cfg.replications = reps;
    }
    if let Some(policies) = &args.policies {
        cfg.policies = policies.clone();
    }
    if let Some(solver) = args.solver {
        cfg.solver = solver;
    }
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate().map_err(|e| anyhow!(e.to_string()))
}

fn comment_line(cfg: &ExperimentConfig, rep: Option<u64>, crn: Option<u64>) -> String {
    let mut line = format!(
        "# seed={} config_hash={:016x} version={VERSION}",
        cfg.seed,
        cfg.hash()
    );
    if let Some(rep) = rep {
        line.push_str(&format!(" rep={rep}"));
    }
    if let Some(crn) = crn {
        line.push_str(&format!(" crn_hash={crn:016x}"));
    }
    line
}

fn write_results(cfg: &ExperimentConfig, out_dir: &Path, output: &RunOutput) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("creating output dir {}", out_dir.display()))?;
    for rep in &output.replications {
        let path = out_dir.join(format!("results_rep{:03}.csv", rep.rep));
        let mut file = fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        writeln!(file, "{}", comment_line(cfg, Some(rep.rep), Some(rep.run.crn_hash)))?;
        writeln!(file, "{}", SlotRecord::CSV_HEADER)?;
        for record in &rep.run.records {
            writeln!(file, "{}", record.csv_row())?;
        }
    }

    let path = out_dir.join("summary.csv");
    let mut file = fs::File::create(&path)?;
    writeln!(file, "{}", comment_line(cfg, None, None))?;
    writeln!(file, "rep,policy,final_utility,final_regret,final_delta_regret")?;
    for rep in &output.replications {
        for name in &output.policy_names {
            let records = rep.run.policy_records(name);
            let utility: f64 = records.iter().map(|r| r.utility).sum();
            let regret = records.last().map_or(0.0, |r| r.cum_regret);
            let delta_regret = records.last().map_or(0.0, |r| r.cum_delta_regret);
            writeln!(file, "{},{name},{utility},{regret},{delta_regret}", rep.rep)?;
        }
    }
    Ok(())
}

fn print_summary(output: &RunOutput) {
    println!(
        "{:<12} {:>16} {:>16}",
        "policy", "mean final utility", "mean final regret"
    );
    for name in &output.policy_names {
        println!(
            "{:<12} {:>16.1} {:>16.1}",
            name,
            output.mean_final_utility(name),
            output.mean_final_regret(name)
        );
    }
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let mut cfg = load_config(&args.config)?;
    apply_overrides(&mut cfg, &args)?;
    let output = run_experiment(&cfg).map_err(|e| anyhow!(e.to_string()))?;
    let out_dir = cfg.output_dir.clone();
    write_results(&cfg, &out_dir, &output)?;
    println!(
        "{} replications × {} slots × {} policies → {}",
        output.replications.len(),
        output.horizon,
        output.policy_names.len(),
        out_dir.display()
    );
    print_summary(&output);
    Ok(0)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let base = load_config(&args.config)?;
    let out_dir = args.out.clone().unwrap_or_else(|| base.output_dir.clone());
    fs::create_dir_all(&out_dir)?;

    struct Point {
        label: String,
        cfg: ExperimentConfig,
    }
    let mut points = Vec::new();
    match args.axis {
        SweepAxis::Budget => {
            for v in args.values.split(',') {
                let budget: f64 = v.trim().parse().context("budget values must be numbers")?;
                let mut cfg = base.clone();
                cfg.budget = budget;
                points.push(Point {
                    label: format!("{budget}"),
                    cfg,
                });
            }
        }
        SweepAxis::RentalSet => {
            for set in args.values.split(';') {
                let capacities: Vec<f64> = set
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .context("rental-set values must be capacity lists like 0,2,4")?;
                let mut cfg = base.clone();
                cfg.sbs.rental_set = {
                    let mut s: Vec<f64> = capacities;
                    if !s.contains(&0.0) {
                        s.push(0.0);
                    }
                    s.sort_by(f64::total_cmp);
                    s.dedup();
                    s
                };
                points.push(Point {
                    label: cfg
                        .sbs
                        .rental_set
                        .iter()
                        .map(|v| v.to_string())
                        .collect::<Vec<_>>()
                        .join("|"),
                    cfg,
                });
            }
        }
        SweepAxis::NSbs => {
            for v in args.values.split(',') {
                let n: usize = v.trim().parse().context("n-sbs values must be integers")?;
                let mut cfg = base.clone();
                cfg.sbs.count = n;
                points.push(Point {
                    label: format!("{n}"),
                    cfg,
                });
            }
        }
    }

    let axis_name = match args.axis {
        SweepAxis::Budget => "budget",
        SweepAxis::RentalSet => "rental_set",
        SweepAxis::NSbs => "n_sbs",
    };

    let path = out_dir.join(format!("sweep_{axis_name}.csv"));
    let mut file = fs::File::create(&path)?;
    writeln!(file, "{}", comment_line(&base, None, None))?;
    writeln!(
        file,
        "axis,value,arms,rep,policy,final_utility,final_regret"
    )?;

    for point in &mut points {
        if let Some(seed) = args.seed {
            point.cfg.seed = seed;
        }
        point.cfg.validate().map_err(|e| anyhow!(e.to_string()))?;
        let model = point.cfg.build_model().map_err(|e| anyhow!(e.to_string()))?;
        let arms = enumerate_arms(&model, DEFAULT_ARM_CAP)
            .map(|t| t.len().to_string())
            .unwrap_or_default();
        let output = run_experiment(&point.cfg).map_err(|e| anyhow!(e.to_string()))?;
        println!("--- {axis_name} = {} ---", point.label);
        print_summary(&output);
        for rep in &output.replications {
            for name in &output.policy_names {
                let records = rep.run.policy_records(name);
                let utility: f64 = records.iter().map(|r| r.utility).sum();
                let regret = records.last().map_or(0.0, |r| r.cum_regret);
                writeln!(
                    file,
                    "{axis_name},{},{arms},{},{name},{utility},{regret}",
                    point.label, rep.rep
                )?;
            }
        }
    }
    println!("sweep written to {}", path.display());
    Ok(0)
}

// ---------------------------------------------------------------------------
// solve-kcg
// ---------------------------------------------------------------------------

/// Parse an instance CSV with header `id,group,weight,value`.
pub fn load_kcg_csv(path: &Path, budget: f64) -> Result<KcgInstance> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut items = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(anyhow!(
                "{} line {line}: expected 4 columns (id,group,weight,value)",
                path.display()
            ));
        }
        let parse_field = |i: usize, name: &str| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| anyhow!("{} line {line}: bad {name} '{}': {e}", path.display(), &record[i]))
        };
        let id = parse_field(0, "id")? as usize;
        let group = parse_field(1, "group")? as usize;
        items.push(KcgItem {
            id,
            group,
            capacity: id as f64,
            weight: parse_field(2, "weight")?,
            value: parse_field(3, "value")?,
        });
    }
    KcgInstance::new(items, budget, Vec::new()).map_err(|e| anyhow!(e.to_string()))
}

fn cmd_solve_kcg(args: SolveKcgArgs) -> Result<i32> {
    let inst = load_kcg_csv(&args.items, args.budget)?;
    let solution = if args.solver == Solver::Greedy {
        let (sol, delta) = measure_delta(&inst).map_err(|e| anyhow!(e.to_string()))?;
        println!("delta: {delta}");
        sol
    } else {
        args.solver.solve(&inst).map_err(|e| anyhow!(e.to_string()))?
    };
    println!(
        "chosen: {}",
        solution
            .chosen
            .iter()
            .map(|id| id.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("value: {}", solution.value);
    println!("weight: {}", solution.weight);
    Ok(0)
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(args: ValidateArgs) -> Result<i32> {
    let results = validate::run_all(args.seed);
    let mut all_passed = true;
    println!("{:<28} {:<6} detail", "suite", "result");
    for r in &results {
        println!(
            "{:<28} {:<6} {}",
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        all_passed &= r.passed;
    }
    Ok(if all_passed { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// snapshot-estimator
// ---------------------------------------------------------------------------

fn cmd_snapshot(args: SnapshotArgs) -> Result<i32> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
        cfg.validate().map_err(|e| anyhow!(e.to_string()))?;
    }
    let env = ExperimentEnv::prepare(&cfg).map_err(|e| anyhow!(e.to_string()))?;
    let mut policy = CoerrPolicy::new(
        "coerr",
        std::sync::Arc::new(env.model.clone()),
        cfg.designed_params(),
        cfg.solver,
    )
    .map_err(|e| anyhow!(e.to_string()))?;

    let source = env.source(0);
    for t in 1..=env.horizon {
        let contexts = source.contexts(t);
        let demands = source.demands(t, &contexts);
        let view = crate::policy::SlotView {
            t,
            contexts: &contexts,
            true_means: None,
        };
        let (decision, _) = policy.decide(&view).map_err(|e| anyhow!(e.to_string()))?;
        let utility = env
            .model
            .total_utility(&decision, &demands)
            .map_err(|e| anyhow!(e.to_string()))?;
        policy
            .observe(&crate::policy::Feedback {
                decision: &decision,
                demands: &demands,
                utility,
            })
            .map_err(|e| anyhow!(e.to_string()))?;
    }

    if policy.clipped_observations() > 0 {
        eprintln!(
            "warning: {} observations clipped to the demand range bound",
            policy.clipped_observations()
        );
    }

    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut buf = Vec::new();
    writeln!(buf, "{}", comment_line(&cfg, Some(0), None))?;
    policy
        .bank()
        .snapshot_csv(cfg.context_dim, &mut buf)
        .context("writing snapshot")?;
    fs::write(&args.out, buf)?;
    println!(
        "{} materialized cells → {}",
        policy.bank().materialized_cells(),
        args.out.display()
    );
    Ok(0)
}

// ---------------------------------------------------------------------------

/// Site map helper shared by examples: sorted site ids onto 0..N.
pub fn site_map_from_sorted(sites: &[&str]) -> BTreeMap<String, usize> {
    sites
        .iter()
        .enumerate()
        .map(|(i, s)| (s.to_string(), i))
        .collect()
}
