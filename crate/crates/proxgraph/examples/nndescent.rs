//! Neighborhood propagation refining a random graph toward the exact k-NN graph.

use proxgraph::build::{knng_recall, NnDescent};
use proxgraph::oracle::knn_graph_truth;
use proxgraph::vecdata::{gen_powerlaw, SyntheticSpec};

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 5000, d: 8, a: 0.0, seed: 4 })?;
    let truth = knn_graph_truth(&ds, 10)?;
    let mut nd = NnDescent::random_init(&ds, 10, 1)?;
    println!("round 0: knng recall {:.4}", knng_recall(&nd.to_graph(), &truth, 10)?);
    for round in 1..=20 {
        let changed = nd.iterate(&ds);
        let recall = knng_recall(&nd.to_graph(), &truth, 10)?;
        println!("round {round}: {changed:>5} lists changed, knng recall {recall:.4}, {} distance calls so far", nd.dist_calcs());
        if changed == 0 {
            break;
        }
    }
    Ok(())
}
