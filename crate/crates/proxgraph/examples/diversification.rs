//! The four neighbor-list pruning rules on one candidate list, and their
//! pruning ratios over a whole build.

use proxgraph::build::{build_ii, BuildParams};
use proxgraph::diversify::{prune, pruning_ratio, NdStrategy};
use proxgraph::metrics::DistanceCounter;
use proxgraph::search::Neighbor;
use proxgraph::vecdata::{gen_powerlaw, SyntheticSpec};
use proxgraph::Dataset;

fn main() -> proxgraph::Result<()> {
    // A center at the origin and four candidates in the plane.
    let pts = Dataset::from_rows(&[[0.0f32, 0.0], [1.0, 0.0], [1.1, 0.3], [0.0, 1.5], [1.6, -1.2]])?;
    let mut c = DistanceCounter::new();
    let mut cands: Vec<Neighbor> =
        (1..5).map(|id| Neighbor { id, dist: c.dist(pts.row(0), pts.row(id as usize)) }).collect();
    cands.sort_by(Neighbor::cmp_by_dist);

    let rules = [NdStrategy::NoNd, NdStrategy::Rnd, NdStrategy::rrnd(1.3)?, NdStrategy::mond(60.0)?];
    for nd in rules {
        let kept = prune(&cands, 4, nd, &pts, &mut c)?;
        let ids: Vec<u32> = kept.iter().map(|n| n.id).collect();
        println!("{:<16} keeps {ids:?}  ratio {:.2}", nd.to_string(), pruning_ratio(cands.len(), kept.len())?);
    }

    let ds = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 32, a: 0.0, seed: 3 })?;
    for nd in rules {
        let p = BuildParams { max_degree: 24, beam_width: 64, nd, ..Default::default() };
        let b = build_ii(&ds, &p)?;
        println!(
            "{:<16} build: mean ratio {:.4}, corpus ratio {:.4}, mean out-degree {:.1}",
            nd.to_string(),
            b.stats.prune.mean_ratio(),
            b.stats.prune.corpus_ratio(),
            b.graph.degree_stats().mean
        );
    }
    Ok(())
}
