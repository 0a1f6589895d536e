//! Local intrinsic dimensionality and relative contrast of two workloads.

use proxgraph::metrics::{dataset_complexity, lid, query_hardness};
use proxgraph::vecdata::{gen_clustered, gen_powerlaw, make_noise_queries, ClusterSpec, SyntheticSpec};
use proxgraph::Dataset;

fn main() -> proxgraph::Result<()> {
    println!("LID of distances (1, 2) with k=2: {:.6}", lid(&[1.0, 2.0], 2)?);
    let line = Dataset::new(3, 1, vec![0.0, 1.0, 3.0])?;
    if let Some(h) = query_hardness(&line, &[0.4], 2)? {
        println!("q=0.4 over {{0, 1, 3}}: LID {:.4}, LRC {:.4}", h.lid, h.lrc);
    }

    let uniform = gen_powerlaw(&SyntheticSpec { n: 20_000, d: 32, a: 0.0, seed: 1 })?;
    let blobs = gen_clustered(&ClusterSpec { n: 20_000, d: 32, clusters: 10, std_dev: 0.05, seed: 1 })?;
    for (name, ds) in [("uniform", &uniform), ("10 blobs", &blobs)] {
        for sigma2 in [0.0001, 0.01] {
            let qs = make_noise_queries(ds, 100, sigma2, 2)?;
            let c = dataset_complexity(ds, &qs, 100)?;
            println!(
                "{name:<9} sigma^2={sigma2:<7} mean LID {:>6.2}  mean LRC {:>6.3}  excluded {}",
                c.mean_lid,
                c.mean_lrc,
                c.excluded()
            );
        }
    }
    Ok(())
}
