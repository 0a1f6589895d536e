//! Recall measurement and timed workload sweeps emitting CSV.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::index_file::IndexBody;
use crate::oracle::GroundTruth;
use crate::search::{search_graph, search_partitioned, BeamScratch, Neighbor, SearchStats};
use crate::seeds::{derive_seed, SeedIndex};
use crate::vecdata::{Dataset, QuerySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecallMode {
    /// A returned id counts only if it is one of the true `k` ids.
    #[default]
    Ids,
    /// A returned id counts if its distance is within `1e-6` (relative) of
    /// the true `k`-th distance, so equidistant duplicates are not penalized.
    Tolerance,
}

/// Fraction of the true `k` nearest neighbors present in the first `k` returned entries.
pub fn recall(returned: &[Neighbor], truth: &[Neighbor], k: usize, mode: RecallMode) -> Result<f64> {
    if k == 0 || truth.len() < k {
        return Err(Error::param(format!("truth row has {} entries, k={k}", truth.len())));
    }
    if returned.len() < k {
        return Err(Error::param(format!("result has {} entries, k={k}", returned.len())));
    }
    let truth = &truth[..k];
    let hits = match mode {
        RecallMode::Ids => returned[..k].iter().filter(|r| truth.iter().any(|t| t.id == r.id)).count(),
        RecallMode::Tolerance => {
            let bound = truth[k - 1].dist as f64 * (1.0 + 1e-6);
            returned[..k].iter().filter(|r| r.dist as f64 <= bound).count()
        }
    };
    Ok(hits as f64 / k as f64)
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub dataset: String,
    pub n: usize,
    pub d: usize,
    pub builder: String,
    pub nd: String,
    pub ss: String,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "L_build")]
    pub l_build: usize,
    pub k: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub nprobe: usize,
    pub recall: f64,
    pub dist_calcs: f64,
    pub hops: f64,
    pub qps: f64,
    pub wall_ms_total: f64,
    pub seed: u64,
}

/// Columns copied verbatim into every record.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunMeta {
    pub dataset: String,
    pub builder: String,
    pub nd: String,
    pub ss: String,
    pub r: usize,
    pub l_build: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadConfig {
    pub reps: usize,
    /// Fastest and slowest repetitions dropped from the timing mean (each side).
    pub trim: usize,
    pub mode: RecallMode,
    /// Base of the per-query seeds.
    pub query_seed: u64,
}

impl Default for WorkloadConfig {
    fn default() -> Self {
        WorkloadConfig { reps: 6, trim: 2, mode: RecallMode::Ids, query_seed: 7 }
    }
}

/// A searchable index borrowed for a workload.
#[derive(Debug, Clone, Copy)]
pub enum IndexRef<'a> {
    Single { graph: &'a Graph, seeds: &'a SeedIndex },
    Partitioned(&'a crate::graph::PartitionedIndex),
}

impl<'a> IndexRef<'a> {
    pub fn from_body(body: &'a IndexBody) -> Result<Self> {
        match body {
            IndexBody::Single { graph, seeds: Some(seeds) } => Ok(IndexRef::Single { graph, seeds }),
            IndexBody::Single { seeds: None, .. } => Err(Error::Data("index carries no seed state".into())),
            IndexBody::Partitioned(pi) => Ok(IndexRef::Partitioned(pi)),
        }
    }
}

/// Per-query outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryRecord {
    pub query: usize,
    pub recall: f64,
    pub dist_calcs: u64,
    pub hops: u64,
    pub wall_ns: u64,
}

/// Runs every query once, in order. Query `i` uses seed `derive_seed(query_seed, i)`.
pub fn run_queries(
    index: IndexRef<'_>,
    ds: &Dataset,
    qs: &QuerySet,
    gt: &GroundTruth,
    k: usize,
    beam_width: usize,
    nprobe: usize,
    cfg: &WorkloadConfig,
) -> Result<Vec<QueryRecord>> {
    check_inputs(ds, qs, gt, k)?;
    let mut scratch = BeamScratch::new(ds.len());
    (0..qs.len())
        .map(|i| {
            let q = qs.query(i);
            let seed = derive_seed(cfg.query_seed, i as u64);
            let (res, stats): (Vec<Neighbor>, SearchStats) = match index {
                IndexRef::Single { graph, seeds } => {
                    search_graph(graph, seeds, ds, q, k, beam_width, seed, &mut scratch)?
                }
                IndexRef::Partitioned(pi) => search_partitioned(pi, ds, q, k, beam_width, nprobe, seed)?,
            };
            Ok(QueryRecord {
                query: i,
                recall: recall(&res, gt.row(i), k, cfg.mode)?,
                dist_calcs: stats.dist_calcs,
                hops: stats.hops,
                wall_ns: stats.wall_ns,
            })
        })
        .collect()
}

fn check_inputs(ds: &Dataset, qs: &QuerySet, gt: &GroundTruth, k: usize) -> Result<()> {
    qs.check_dim(ds)?;
    if gt.len() != qs.len() {
        return Err(Error::param(format!("ground truth has {} rows for {} queries", gt.len(), qs.len())));
    }
    if gt.k < k {
        return Err(Error::param(format!("ground truth holds {} neighbors, k={k}", gt.k)));
    }
    Ok(())
}

/// Sweeps the `(L, nprobe)` grid. Each point is run `cfg.reps` times;
/// recall and distance counts must agree across repetitions, and the
/// reported time is the mean after trimming `cfg.trim` runs from each end.
pub fn run_workload(
    index: IndexRef<'_>,
    meta: &RunMeta,
    ds: &Dataset,
    qs: &QuerySet,
    gt: &GroundTruth,
    k: usize,
    l_grid: &[usize],
    nprobe_grid: &[usize],
    cfg: &WorkloadConfig,
) -> Result<Vec<RunRecord>> {
    if l_grid.is_empty() || nprobe_grid.is_empty() {
        return Err(Error::param("empty parameter grid"));
    }
    if cfg.reps == 0 || 2 * cfg.trim >= cfg.reps {
        return Err(Error::param(format!("cannot trim {} runs from each end of {}", cfg.trim, cfg.reps)));
    }
    if qs.is_empty() {
        return Err(Error::param("no queries"));
    }
    check_inputs(ds, qs, gt, k)?;
    let nprobes: &[usize] = match index {
        IndexRef::Single { .. } => &[1],
        IndexRef::Partitioned(_) => nprobe_grid,
    };
    let nq = qs.len() as f64;
    let mut out = Vec::new();
    for &nprobe in nprobes {
        for &l in l_grid {
            let mut times = Vec::with_capacity(cfg.reps);
            let mut first: Option<(Vec<f64>, Vec<u64>, u64)> = None;
            for _ in 0..cfg.reps {
                let start = Instant::now();
                let recs = run_queries(index, ds, qs, gt, k, l, nprobe, cfg)?;
                times.push(start.elapsed().as_secs_f64());
                let key = (
                    recs.iter().map(|r| r.recall).collect::<Vec<_>>(),
                    recs.iter().map(|r| r.dist_calcs).collect::<Vec<_>>(),
                    recs.iter().map(|r| r.hops).sum::<u64>(),
                );
                match &first {
                    None => first = Some(key),
                    Some(f) if *f != key => {
                        return Err(Error::Data(format!("L={l} nprobe={nprobe}: repetitions disagree")));
                    }
                    Some(_) => {}
                }
            }
            let (recalls, dists, hops) = first.expect("at least one repetition");
            let secs = trimmed_mean(&mut times, cfg.trim);
            out.push(RunRecord {
                dataset: meta.dataset.clone(),
                n: ds.len(),
                d: ds.dim(),
                builder: meta.builder.clone(),
                nd: meta.nd.clone(),
                ss: meta.ss.clone(),
                r: meta.r,
                l_build: meta.l_build,
                k,
                l,
                nprobe,
                recall: recalls.iter().sum::<f64>() / nq,
                dist_calcs: dists.iter().sum::<u64>() as f64 / nq,
                hops: hops as f64 / nq,
                qps: if secs > 0.0 { nq / secs } else { f64::INFINITY },
                wall_ms_total: secs * 1e3,
                seed: meta.seed,
            });
        }
    }
    Ok(out)
}

fn trimmed_mean(times: &mut [f64], trim: usize) -> f64 {
    times.sort_by(f64::total_cmp);
    let kept = &times[trim..times.len() - trim];
    kept.iter().sum::<f64>() / kept.len() as f64
}

/// Writes records with a header row.
pub fn write_csv<T: Serialize>(w: impl Write, rows: &[T]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}

/// A gnuplot script drawing mean distance calculations against recall,
/// one curve per `(builder, nd, ss)` combination present in `rows`.
pub fn gnuplot_script(csv_path: &str, png_path: &str, rows: &[RunRecord]) -> String {
    let mut series: Vec<(String, String, String)> =
        rows.iter().map(|r| (r.builder.clone(), r.nd.clone(), r.ss.clone())).collect();
    series.sort();
    series.dedup();
    let mut s = format!(
        "set datafile separator ','\nset terminal pngcairo size 900,600\nset output '{png_path}'\n\
         set xlabel 'recall'\nset ylabel 'distance calculations'\nset logscale y\nset key left top\n"
    );
    let plots: Vec<String> = series
        .iter()
        .map(|(b, nd, ss)| {
            format!(
                "'{csv_path}' using (strcol(4) eq '{b}' && strcol(5) eq '{nd}' && strcol(6) eq '{ss}' ? $12 : 1/0):13 \
                 every ::1 with linespoints title '{b} {nd} {ss}'"
            )
        })
        .collect();
    s.push_str("plot ");
    s.push_str(&plots.join(", \\\n     "));
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_ii, BuildParams};
    use crate::oracle::{exact_knn, ground_truth};
    use crate::vecdata::{gen_powerlaw, make_noise_queries, SyntheticSpec};

    fn nb(ids: &[u32]) -> Vec<Neighbor> {
        ids.iter().map(|&id| Neighbor { id, dist: id as f32 }).collect()
    }

    #[test]
    fn recall_counts_ids() {
        let t = nb(&(0..10).collect::<Vec<_>>());
        assert_eq!(recall(&t, &t, 10, RecallMode::Ids).unwrap(), 1.0);
        let r = nb(&[0, 1, 2, 3, 4, 5, 6, 7, 20, 21]);
        assert_eq!(recall(&r, &t, 10, RecallMode::Ids).unwrap(), 0.8);
        assert!(recall(&r, &t[..5], 10, RecallMode::Ids).is_err());
    }

    #[test]
    fn tolerance_mode_forgives_duplicates() {
        // Twenty points on a line; point 9 is duplicated as point 19.
        let mut v: Vec<f32> = (0..19).map(|i| i as f32).collect();
        v.push(9.0);
        let ds = Dataset::new(20, 1, v).unwrap();
        let truth = exact_knn(&ds, &[0.0], 10).unwrap();
        assert_eq!(truth[9].id, 9);
        let mut got = truth.clone();
        got[9] = Neighbor { id: 19, dist: 9.0 };
        assert!(recall(&got, &truth, 10, RecallMode::Ids).unwrap() < 1.0);
        assert_eq!(recall(&got, &truth, 10, RecallMode::Tolerance).unwrap(), 1.0);
    }

    #[test]
    fn workload_matches_single_calls_and_repeats() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 1000, d: 8, a: 0.0, seed: 3 }).unwrap();
        let qs = make_noise_queries(&ds, 20, 0.01, 4).unwrap();
        let gt = ground_truth(&ds, &qs, 10).unwrap();
        let b = build_ii(&ds, &BuildParams { max_degree: 12, beam_width: 32, ..Default::default() }).unwrap();
        let index = IndexRef::Single { graph: &b.graph, seeds: &b.seeds };
        let cfg = WorkloadConfig::default();
        let meta = RunMeta { dataset: "toy".into(), ..Default::default() };
        let recs = run_workload(index, &meta, &ds, &qs, &gt, 10, &[10], &[1], &cfg).unwrap();
        let singles = run_queries(index, &ds, &qs, &gt, 10, 10, 1, &cfg).unwrap();
        let mean = singles.iter().map(|r| r.recall).sum::<f64>() / 20.0;
        assert_eq!(recs[0].recall, mean);
        let again = run_workload(index, &meta, &ds, &qs, &gt, 10, &[10], &[1], &cfg).unwrap();
        assert_eq!(again[0].recall, recs[0].recall);
        assert_eq!(again[0].dist_calcs, recs[0].dist_calcs);
        assert!(run_workload(index, &meta, &ds, &qs, &gt, 10, &[], &[1], &cfg).is_err());

        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(
            "dataset,n,d,builder,nd,ss,R,L_build,k,L,nprobe,recall,dist_calcs,hops,qps,wall_ms_total,seed\n"
        ));
        assert!(gnuplot_script("a.csv", "a.png", &recs).contains("plot '"));
    }

    #[test]
    fn trimming() {
        let mut t = vec![6.0, 1.0, 5.0, 2.0, 4.0, 3.0];
        assert_eq!(trimmed_mean(&mut t, 2), 3.5);
    }
}
