//! One graph, five ways of entering it.

use proxgraph::bench::{run_queries, IndexRef, WorkloadConfig};
use proxgraph::build::{build_ii, BuildParams};
use proxgraph::oracle::ground_truth;
use proxgraph::seeds::{assign_level, build_seed_index, SeedStrategy};
use proxgraph::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};

fn main() -> proxgraph::Result<()> {
    println!("levels for M=32: xi=1 -> {}, xi=1/16 -> {}, xi=1/300 -> {}", assign_level(1.0, 32)?, assign_level(1.0 / 16.0, 32)?, assign_level(1.0 / 300.0, 32)?);

    let ds = gen_powerlaw(&SyntheticSpec { n: 20_000, d: 24, a: 0.0, seed: 5 })?;
    let qs = make_noise_queries(&ds, 100, 0.002, 6)?;
    let gt = ground_truth(&ds, &qs, 10)?;
    let b = build_ii(&ds, &BuildParams { max_degree: 24, beam_width: 96, ..Default::default() })?;

    for ss in ["sf", "md", "ks:k=32", "ks:k=8,medoid=1", "kd:trees=2,visits=256,seeds=16", "sn:M=24"] {
        let ss: SeedStrategy = ss.parse()?;
        let seeds = build_seed_index(&ds, &b.graph, ss, 11)?;
        let index = IndexRef::Single { graph: &b.graph, seeds: &seeds };
        print!("{:<40}", ss.to_string());
        for l in [10, 40] {
            let recs = run_queries(index, &ds, &qs, &gt, 10, l, 1, &WorkloadConfig::default())?;
            let recall = recs.iter().map(|r| r.recall).sum::<f64>() / recs.len() as f64;
            let calls = recs.iter().map(|r| r.dist_calcs).sum::<u64>() as f64 / recs.len() as f64;
            print!("  L={l}: recall {recall:.3}, calls {calls:>6.0}");
        }
        println!();
    }
    Ok(())
}
