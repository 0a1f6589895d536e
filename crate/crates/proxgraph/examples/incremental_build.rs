//! Build a graph by incremental insertion and query it at several beam widths.

use proxgraph::build::{build_ii, BuildParams};
use proxgraph::oracle::ground_truth;
use proxgraph::search::{search_graph, BeamScratch};
use proxgraph::seeds::{compute_medoid, derive_seed};
use proxgraph::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};
use proxgraph::NdStrategy;

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 20_000, d: 16, a: 0.0, seed: 1 })?;
    let qs = make_noise_queries(&ds, 100, 0.001, 2)?;
    let gt = ground_truth(&ds, &qs, 10)?;

    let p = BuildParams { max_degree: 24, beam_width: 96, nd: NdStrategy::Rnd, ..Default::default() };
    let b = build_ii(&ds, &p)?;
    let deg = b.graph.degree_stats();
    println!(
        "built {} nodes in {} ms with {} distance calls; out-degree min/mean/max {}/{:.1}/{}",
        ds.len(),
        b.stats.wall_ms,
        b.stats.dist_calcs,
        deg.min,
        deg.mean,
        deg.max
    );
    println!("reachable from medoid: {:.4}", b.graph.reachable_fraction(compute_medoid(&ds)));

    let mut scratch = BeamScratch::new(ds.len());
    for l in [10, 20, 40, 80, 160] {
        let (mut hits, mut calls) = (0usize, 0u64);
        for i in 0..qs.len() {
            let (res, st) = search_graph(&b.graph, &b.seeds, &ds, qs.query(i), 10, l, derive_seed(9, i as u64), &mut scratch)?;
            hits += res.iter().filter(|r| gt.row(i).iter().any(|t| t.id == r.id)).count();
            calls += st.dist_calcs;
        }
        println!("L={l:<4} recall@10 {:.3}  dist calcs/query {:.0}", hits as f64 / 1000.0, calls as f64 / 100.0);
    }
    Ok(())
}
