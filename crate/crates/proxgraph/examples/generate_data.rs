//! Synthetic datasets and hard queries, written to and read back from fvecs.

use proxgraph::vecdata::{
    gen_clustered, gen_powerlaw, load_vectors, make_noise_queries, save_vectors, ClusterSpec, SyntheticSpec, VecFormat,
};

fn main() -> proxgraph::Result<()> {
    let dir = std::env::temp_dir().join("proxgraph-generate");
    std::fs::create_dir_all(&dir)?;

    for a in [0.0, 1.0, 5.0] {
        let ds = gen_powerlaw(&SyntheticSpec { n: 5000, d: 16, a, seed: 1 })?;
        let mean = ds.values().iter().map(|&v| v as f64).sum::<f64>() / ds.values().len() as f64;
        println!("power-law a={a}: {} x {}, mean coordinate {mean:.3}", ds.len(), ds.dim());
    }

    let blobs = gen_clustered(&ClusterSpec { n: 5000, d: 16, clusters: 8, std_dev: 0.05, seed: 2 })?;
    let path = dir.join("blobs.fvecs");
    save_vectors(&path, &blobs, VecFormat::Fvecs)?;
    let back = load_vectors(&path, VecFormat::Fvecs)?;
    assert_eq!(back, blobs);
    println!("clustered data round-tripped through {}", path.display());

    for sigma2 in [0.0, 0.001, 0.01] {
        let qs = make_noise_queries(&blobs, 100, sigma2, 3)?;
        let shift: f64 = (0..qs.len())
            .map(|i| {
                let q = qs.query(i);
                blobs.rows().map(|r| proxgraph::metrics::l2_sq(q, r)).fold(f32::INFINITY, f32::min).sqrt() as f64
            })
            .sum::<f64>()
            / qs.len() as f64;
        println!("noise sigma^2={sigma2}: mean distance to nearest base point {shift:.4}");
    }
    Ok(())
}
