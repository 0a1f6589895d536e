//! Exact k-NN by brute force, saved as ivecs/fvecs.

use proxgraph::oracle::{exact_knn, ground_truth, GroundTruth};
use proxgraph::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 20_000, d: 24, a: 0.0, seed: 7 })?;
    let qs = make_noise_queries(&ds, 50, 0.002, 8)?;

    let one = exact_knn(&ds, qs.query(0), 5)?;
    println!("query 0:");
    for nb in &one {
        println!("  id {:>6}  dist {:.5}", nb.id, nb.dist);
    }

    let gt = ground_truth(&ds, &qs, 100)?;
    let dir = std::env::temp_dir().join("proxgraph-gt");
    std::fs::create_dir_all(&dir)?;
    let (ids, dists) = (dir.join("gt.ivecs"), dir.join("gt.fvecs"));
    gt.save(&ids, &dists)?;
    let back = GroundTruth::load(&ids, &dists)?;
    assert_eq!(back, gt);
    println!("{} rows of {} neighbors saved to {}", gt.len(), gt.k, dir.display());
    Ok(())
}
