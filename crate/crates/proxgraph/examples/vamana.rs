//! Two refinement passes over a random graph with relaxed pruning.

use proxgraph::bench::{run_queries, IndexRef, WorkloadConfig};
use proxgraph::build::{build_ii, build_vamana2r, BuildParams};
use proxgraph::oracle::ground_truth;
use proxgraph::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};
use proxgraph::{NdStrategy, SeedStrategy};

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 16, a: 0.0, seed: 8 })?;
    let qs = make_noise_queries(&ds, 100, 0.001, 9)?;
    let gt = ground_truth(&ds, &qs, 10)?;
    let p = BuildParams { max_degree: 24, beam_width: 64, nd: NdStrategy::rrnd(1.2)?, ss: SeedStrategy::Md, ..Default::default() };

    for (name, b) in [("vamana2r", build_vamana2r(&ds, &p)?), ("ii", build_ii(&ds, &p)?)] {
        let index = IndexRef::Single { graph: &b.graph, seeds: &b.seeds };
        let recs = run_queries(index, &ds, &qs, &gt, 10, 30, 1, &WorkloadConfig::default())?;
        let recall = recs.iter().map(|r| r.recall).sum::<f64>() / recs.len() as f64;
        println!(
            "{name:<9} build calls {:>10}, mean degree {:.1}, recall@10 (L=30) {recall:.3}",
            b.stats.dist_calcs,
            b.graph.degree_stats().mean
        );
    }
    Ok(())
}
