//! scratch probe
use coerr::config::ExperimentConfig;
use coerr::sim::run_experiment;

fn main() -> anyhow::Result<()> {
    let mut base = ExperimentConfig::default();
    base.horizon = 2700;
    base.replications = 10;
    base.policies = vec!["oracle".into()];

    let mut per_rep: Vec<Vec<f64>> = vec![vec![]; 10];
    for rental_set in [vec![0.0, 2.0, 4.0, 6.0], vec![0.0, 2.0, 4.0]] {
        let mut cfg = base.clone();
        cfg.sbs.rental_set = rental_set;
        let out = run_experiment(&cfg)?;
        for (i, rep) in out.replications.iter().enumerate() {
            per_rep[i].push(rep.run.final_utility("oracle"));
        }
    }
    let mut wins = 0;
    for (i, vals) in per_rep.iter().enumerate() {
        let ok = vals[0] >= vals[1];
        if ok { wins += 1; }
        println!("rep {i:>2}: full={:.0} mid={:.0} diff={:.0} {ok}", vals[0], vals[1], vals[0]-vals[1]);
    }
    println!("oracle full>=mid in {wins}/10");
    Ok(())
}
