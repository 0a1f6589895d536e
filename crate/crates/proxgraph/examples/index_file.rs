//! Persist an index with its seed state and query the reloaded copy.

use proxgraph::build::{build_ii, BuildParams, Builder};
use proxgraph::index_file::{IndexBody, IndexFile, IndexHeader};
use proxgraph::search::{search_graph, BeamScratch};
use proxgraph::vecdata::{gen_powerlaw, SyntheticSpec};

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 5000, d: 12, a: 0.0, seed: 6 })?;
    let p = BuildParams { max_degree: 16, beam_width: 48, ss: "sn:M=16".parse()?, ..Default::default() };
    let b = build_ii(&ds, &p)?;
    let file = IndexFile {
        header: IndexHeader {
            n: ds.len(),
            d: ds.dim(),
            max_degree: p.max_degree,
            builder: Builder::Ii,
            nd: p.nd,
            ss: p.ss,
            params: format!("Lbuild={} seed={}", p.beam_width, p.seed),
        },
        body: IndexBody::Single { graph: b.graph, seeds: Some(b.seeds) },
    };
    let path = std::env::temp_dir().join("proxgraph-example.pxg");
    file.save(&path)?;
    let loaded = IndexFile::load(&path)?;
    assert_eq!(loaded, file);
    println!("{} bytes, header {:?}", std::fs::metadata(&path)?.len(), loaded.header);

    let IndexBody::Single { graph, seeds: Some(seeds) } = &loaded.body else { unreachable!() };
    let (res, stats) = search_graph(graph, seeds, &ds, ds.row(42), 5, 32, 0, &mut BeamScratch::new(ds.len()))?;
    println!("neighbors of row 42: {:?}", res.iter().map(|n| n.id).collect::<Vec<_>>());
    println!("{} distance calls, {} hops", stats.dist_calcs, stats.hops);
    Ok(())
}
