//! A timed sweep over beam widths, emitted as CSV plus a gnuplot script.

use proxgraph::bench::{gnuplot_script, run_workload, write_csv, IndexRef, RunMeta, WorkloadConfig};
use proxgraph::build::{build_ii, BuildParams};
use proxgraph::oracle::ground_truth;
use proxgraph::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};

fn main() -> proxgraph::Result<()> {
    let ds = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 16, a: 0.0, seed: 2 })?;
    let qs = make_noise_queries(&ds, 100, 0.001, 3)?;
    let gt = ground_truth(&ds, &qs, 10)?;
    let p = BuildParams { max_degree: 16, beam_width: 64, ..Default::default() };
    let b = build_ii(&ds, &p)?;
    let meta = RunMeta {
        dataset: "uniform16".into(),
        builder: "ii".into(),
        nd: p.nd.to_string(),
        ss: p.ss.to_string(),
        r: p.max_degree,
        l_build: p.beam_width,
        seed: p.seed,
    };
    let recs = run_workload(
        IndexRef::Single { graph: &b.graph, seeds: &b.seeds },
        &meta,
        &ds,
        &qs,
        &gt,
        10,
        &[10, 20, 40, 80, 160, ds.len()],
        &[1],
        &WorkloadConfig::default(),
    )?;
    write_csv(std::io::stdout().lock(), &recs)?;

    let dir = std::env::temp_dir().join("proxgraph-bench");
    std::fs::create_dir_all(&dir)?;
    let csv = dir.join("sweep.csv");
    write_csv(std::fs::File::create(&csv)?, &recs)?;
    let script = gnuplot_script(&csv.display().to_string(), &dir.join("sweep.png").display().to_string(), &recs);
    std::fs::write(dir.join("sweep.gp"), script)?;
    eprintln!("wrote {} and sweep.gp", csv.display());
    Ok(())
}
