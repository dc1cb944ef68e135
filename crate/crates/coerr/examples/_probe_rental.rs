//! scratch probe
use coerr::config::ExperimentConfig;
use coerr::sim::run_experiment;

fn main() -> anyhow::Result<()> {
    let horizon: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2700);
    let reps: usize = std::env::args().nth(2).map(|s| s.parse()).transpose()?.unwrap_or(10);
    let mut base = ExperimentConfig::default();
    base.horizon = horizon;
    base.replications = reps;

    let mut per_rep: Vec<Vec<f64>> = vec![vec![]; reps];
    for (rental_set, policy) in [
        (vec![0.0, 2.0, 4.0, 6.0], "coerr"),
        (vec![0.0, 2.0, 4.0], "coerr"),
        (vec![0.0, 2.0, 4.0, 6.0], "coerr-or2"),
    ] {
        let mut cfg = base.clone();
        cfg.sbs.rental_set = rental_set;
        cfg.policies = vec![policy.to_string()];
        let out = run_experiment(&cfg)?;
        for (i, rep) in out.replications.iter().enumerate() {
            per_rep[i].push(rep.run.final_utility(policy));
        }
    }
    let mut wins1 = 0; let mut wins2 = 0;
    for (i, vals) in per_rep.iter().enumerate() {
        let ok1 = vals[0] >= vals[1];
        let ok2 = vals[1] >= vals[2];
        if ok1 { wins1 += 1; }
        if ok2 { wins2 += 1; }
        println!("rep {i:>2}: full={:.0} mid={:.0} or2={:.0}  full>=mid:{ok1} mid>=or2:{ok2}", vals[0], vals[1], vals[2]);
    }
    println!("full>=mid in {wins1}/{reps}; mid>=or2 in {wins2}/{reps}");
    Ok(())
}
