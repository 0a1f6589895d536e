//! Partition with k-means, build one graph per cell, probe the nearest cells.

use proxgraph::build::{build_dc, BuildParams};
use proxgraph::oracle::ground_truth;
use proxgraph::search::search_partitioned;
use proxgraph::seeds::derive_seed;
use proxgraph::vecdata::{gen_clustered, make_noise_queries, ClusterSpec};

fn main() -> proxgraph::Result<()> {
    let ds = gen_clustered(&ClusterSpec { n: 20_000, d: 16, clusters: 12, std_dev: 0.06, seed: 3 })?;
    let qs = make_noise_queries(&ds, 100, 0.001, 4)?;
    let gt = ground_truth(&ds, &qs, 10)?;
    let p = BuildParams { max_degree: 16, beam_width: 64, ..Default::default() };
    let (index, stats) = build_dc(&ds, 8, &p)?;
    let sizes: Vec<usize> = index.partitions.iter().map(|x| x.members.len()).collect();
    println!("8 partitions, sizes {sizes:?}, {} distance calls", stats.dist_calcs);

    for nprobe in [1, 2, 4, 8] {
        let (mut hits, mut calls) = (0usize, 0u64);
        for i in 0..qs.len() {
            let (res, st) = search_partitioned(&index, &ds, qs.query(i), 10, 40, nprobe, derive_seed(1, i as u64))?;
            hits += res.iter().filter(|r| gt.row(i).iter().any(|t| t.id == r.id)).count();
            calls += st.dist_calcs;
        }
        println!("nprobe={nprobe}: recall@10 {:.3}, calls/query {:.0}", hits as f64 / 1000.0, calls as f64 / 100.0);
    }
    Ok(())
}
