use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use proxgraph::bench::{self, IndexRef, RecallMode, RunMeta, WorkloadConfig};
use proxgraph::build::{self, BuildParams, Builder, InsertOrder, NpParams};
use proxgraph::index_file::{IndexBody, IndexFile, IndexHeader};
use proxgraph::metrics::dataset_complexity;
use proxgraph::oracle::ground_truth;
use proxgraph::seeds::{build_seed_index, SeedStrategy};
use proxgraph::vecdata::{
    gen_clustered, gen_powerlaw, load_vectors, make_noise_queries, save_vectors, ClusterSpec, Provenance, SyntheticSpec,
    VecFormat,
};
use proxgraph::{Dataset, Error, GroundTruth, NdStrategy, QuerySet, Result};

/// Graph-based approximate nearest-neighbor toolkit.
///
/// Every long flag can also be set from a `--config` file of `key=value`
/// lines (`#` starts a comment); flags on the command line win.
#[derive(Parser, Debug)]
#[command(name = "proxgraph", version, args_override_self = true)]
struct Cli {
    /// key=value file supplying defaults for any flag
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate synthetic vectors or noisy queries
    Gen(GenArgs),
    /// Exact ground truth by brute force
    Gt(GtArgs),
    /// Build an index
    Build(BuildArgs),
    /// Run queries once, one CSV row per query
    Search(SearchArgs),
    /// Timed parameter sweep, one CSV row per grid point
    Bench(BenchArgs),
    /// Mean LID and LRC of a workload
    Stats(StatsArgs),
}

#[derive(Args, Debug)]
struct VecIo {
    /// Rows of a headerless raw f32 file
    #[arg(long)]
    raw_n: Option<usize>,
    /// Dimension of a headerless raw f32 file
    #[arg(long)]
    raw_d: Option<usize>,
}

impl VecIo {
    fn format(&self, path: &Path) -> Result<VecFormat> {
        if let (Some(n), Some(d)) = (self.raw_n, self.raw_d) {
            return Ok(VecFormat::RawF32 { n, d });
        }
        VecFormat::from_path(path)
            .ok_or_else(|| Error::Parameter(format!("cannot infer vector format of {}", path.display())))
    }

    fn load(&self, path: &Path) -> Result<Dataset> {
        load_vectors(path, self.format(path)?)
    }
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    d: usize,
    /// Power-law exponent (0 = uniform)
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Gaussian blobs instead of power-law data when > 0
    #[arg(long, default_value_t = 0)]
    clusters: usize,
    #[arg(long, default_value_t = 0.05)]
    std_dev: f64,
    /// Derive `n` noisy queries from this base file instead
    #[arg(long)]
    noise_from: Option<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    sigma2: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    io: VecIo,
}

#[derive(Args, Debug)]
struct GtArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long)]
    out_ids: PathBuf,
    #[arg(long)]
    out_dists: PathBuf,
    #[command(flatten)]
    io: VecIo,
}

#[derive(Args, Debug)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// ii | np | dc | vamana2r
    #[arg(long, default_value = "ii")]
    builder: Builder,
    #[arg(long = "R", default_value_t = 32)]
    r: usize,
    #[arg(long = "Lbuild", default_value_t = 128)]
    l_build: usize,
    /// nond | rnd | rrnd:alpha=1.3 | mond:theta=60
    #[arg(long, default_value = "rnd")]
    nd: NdStrategy,
    /// sf | md | ks:k=32 | kd:trees=1,visits=512 | sn:M=32
    #[arg(long, default_value = "ks:k=32")]
    ss: SeedStrategy,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// dataset | shuffled
    #[arg(long, default_value = "shuffled")]
    order: String,
    /// Partition count for dc
    #[arg(long, default_value_t = 4)]
    partitions: usize,
    /// Propagation rounds for np (its k is R)
    #[arg(long, default_value_t = 10)]
    iters: usize,
    /// Build statistics CSV (stdout when absent)
    #[arg(long)]
    stats: Option<PathBuf>,
    #[command(flatten)]
    io: VecIo,
}

#[derive(Args, Debug)]
struct QueryArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Ground-truth ids (ivecs); distances are read from the sibling given by --gt-dists
    #[arg(long)]
    gt: PathBuf,
    #[arg(long)]
    gt_dists: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 7)]
    query_seed: u64,
    /// Count equidistant ties at the k-th distance as hits
    #[arg(long)]
    tolerance: bool,
    /// Output CSV (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    io: VecIo,
}

#[derive(Args, Debug)]
struct SearchArgs {
    #[command(flatten)]
    q: QueryArgs,
    #[arg(long = "L", default_value_t = 100)]
    l: usize,
    #[arg(long, default_value_t = 1)]
    nprobe: usize,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    q: QueryArgs,
    /// Comma-separated beam widths
    #[arg(long = "L", default_value = "10,20,40,80,160", value_delimiter = ',')]
    l: Vec<usize>,
    /// Comma-separated probe counts (partitioned indexes)
    #[arg(long, default_value = "1", value_delimiter = ',')]
    nprobe: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    reps: usize,
    #[arg(long, default_value_t = 2)]
    trim: usize,
    /// Tag written to the dataset column
    #[arg(long, default_value = "data")]
    dataset: String,
    /// Also write a gnuplot script next to the CSV
    #[arg(long)]
    gnuplot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StatsArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 100)]
    k: usize,
    #[arg(long, default_value = "data")]
    dataset: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    io: VecIo,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn peak_mem_bytes() -> u64 {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("VmHWM:"))
                .and_then(|l| l.split_whitespace().nth(1)?.parse::<u64>().ok())
        })
        .map_or(0, |kb| kb * 1024)
}

fn gen(a: GenArgs) -> Result<()> {
    let format = a.io.format(&a.out)?;
    let ds = match &a.noise_from {
        Some(base) => make_noise_queries(&a.io.load(base)?, a.n, a.sigma2, a.seed)?.vectors,
        None if a.clusters > 0 => {
            gen_clustered(&ClusterSpec { n: a.n, d: a.d, clusters: a.clusters, std_dev: a.std_dev, seed: a.seed })?
        }
        None => gen_powerlaw(&SyntheticSpec { n: a.n, d: a.d, a: a.a, seed: a.seed })?,
    };
    save_vectors(&a.out, &ds, format)
}

fn gt(a: GtArgs) -> Result<()> {
    let ds = a.io.load(&a.data)?;
    let qs = QuerySet::new(a.io.load(&a.queries)?, Provenance::File);
    ground_truth(&ds, &qs, a.k)?.save(&a.out_ids, &a.out_dists)
}

#[derive(Serialize)]
struct BuildRow {
    builder: String,
    n: usize,
    d: usize,
    #[serde(rename = "R")]
    r: usize,
    #[serde(rename = "Lbuild")]
    l_build: usize,
    nd: String,
    ss: String,
    dist_calcs: u64,
    wall_ms: u64,
    peak_mem_bytes: u64,
}

fn build_cmd(a: BuildArgs) -> Result<()> {
    let ds = a.io.load(&a.data)?;
    let order = match a.order.as_str() {
        "dataset" => InsertOrder::Dataset,
        "shuffled" => InsertOrder::Shuffled,
        o => return Err(Error::Parameter(format!("unknown insertion order '{o}'"))),
    };
    let p = BuildParams { max_degree: a.r, beam_width: a.l_build, nd: a.nd, ss: a.ss, seed: a.seed, order };
    let (body, stats) = match a.builder {
        Builder::Ii => {
            let b = build::build_ii(&ds, &p)?;
            (IndexBody::Single { graph: b.graph, seeds: Some(b.seeds) }, b.stats)
        }
        Builder::Vamana2r => {
            let b = build::build_vamana2r(&ds, &p)?;
            (IndexBody::Single { graph: b.graph, seeds: Some(b.seeds) }, b.stats)
        }
        Builder::Np => {
            let (graph, stats) = build::nndescent_with_stats(&ds, &NpParams { k: a.r, iters: a.iters, seed: a.seed })?;
            let seeds = build_seed_index(&ds, &graph, a.ss, a.seed)?;
            (IndexBody::Single { graph, seeds: Some(seeds) }, stats)
        }
        Builder::Dc => {
            let (pi, stats) = build::build_dc(&ds, a.partitions, &p)?;
            (IndexBody::Partitioned(pi), stats)
        }
    };
    let params = format!(
        "Lbuild={} seed={} order={} partitions={} iters={}",
        a.l_build, a.seed, a.order, a.partitions, a.iters
    );
    let header =
        IndexHeader { n: ds.len(), d: ds.dim(), max_degree: a.r, builder: a.builder, nd: a.nd, ss: a.ss, params };
    IndexFile { header, body }.save(&a.out)?;
    let row = BuildRow {
        builder: a.builder.to_string(),
        n: ds.len(),
        d: ds.dim(),
        r: a.r,
        l_build: a.l_build,
        nd: a.nd.to_string(),
        ss: a.ss.to_string(),
        dist_calcs: stats.dist_calcs,
        wall_ms: stats.wall_ms,
        peak_mem_bytes: peak_mem_bytes(),
    };
    bench::write_csv(output(&a.stats)?, &[row])
}

struct Loaded {
    ds: Dataset,
    qs: QuerySet,
    gt: GroundTruth,
    index: IndexFile,
}

fn load_query_inputs(a: &QueryArgs) -> Result<Loaded> {
    let ds = a.io.load(&a.data)?;
    let qs = QuerySet::new(a.io.load(&a.queries)?, Provenance::File);
    let gt = GroundTruth::load(&a.gt, &a.gt_dists)?;
    let index = IndexFile::load(&a.index)?;
    if index.header.n != ds.len() || index.header.d != ds.dim() {
        return Err(Error::Data(format!(
            "index built for {}x{}, data is {}x{}",
            index.header.n,
            index.header.d,
            ds.len(),
            ds.dim()
        )));
    }
    Ok(Loaded { ds, qs, gt, index })
}

fn workload_cfg(a: &QueryArgs) -> WorkloadConfig {
    WorkloadConfig {
        mode: if a.tolerance { RecallMode::Tolerance } else { RecallMode::Ids },
        query_seed: a.query_seed,
        ..Default::default()
    }
}

fn search_cmd(a: SearchArgs) -> Result<()> {
    let l = load_query_inputs(&a.q)?;
    let index = IndexRef::from_body(&l.index.body)?;
    let recs = bench::run_queries(index, &l.ds, &l.qs, &l.gt, a.q.k, a.l, a.nprobe, &workload_cfg(&a.q))?;
    bench::write_csv(output(&a.q.out)?, &recs)
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let l = load_query_inputs(&a.q)?;
    let h = &l.index.header;
    let seed = h
        .params
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("seed=")?.parse().ok())
        .unwrap_or(0);
    let l_build = h
        .params
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("Lbuild=")?.parse().ok())
        .unwrap_or(0);
    let meta = RunMeta {
        dataset: a.dataset.clone(),
        builder: h.builder.to_string(),
        nd: h.nd.to_string(),
        ss: h.ss.to_string(),
        r: h.max_degree,
        l_build,
        seed,
    };
    let cfg = WorkloadConfig { reps: a.reps, trim: a.trim, ..workload_cfg(&a.q) };
    let index = IndexRef::from_body(&l.index.body)?;
    let recs = bench::run_workload(index, &meta, &l.ds, &l.qs, &l.gt, a.q.k, &a.l, &a.nprobe, &cfg)?;
    bench::write_csv(output(&a.q.out)?, &recs)?;
    if let Some(script) = &a.gnuplot {
        let csv = a.q.out.as_ref().map_or("bench.csv".into(), |p| p.display().to_string());
        let png = Path::new(&csv).with_extension("png").display().to_string();
        std::fs::write(script, bench::gnuplot_script(&csv, &png, &recs))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct StatsRow {
    dataset: String,
    k: usize,
    mean_lid: f64,
    mean_lrc: f64,
    excluded: usize,
}

fn stats_cmd(a: StatsArgs) -> Result<()> {
    let ds = a.io.load(&a.data)?;
    let qs = QuerySet::new(a.io.load(&a.queries)?, Provenance::File);
    let c = dataset_complexity(&ds, &qs, a.k)?;
    let row = StatsRow { dataset: a.dataset, k: a.k, mean_lid: c.mean_lid, mean_lrc: c.mean_lrc, excluded: c.excluded() };
    bench::write_csv(output(&a.out)?, &[row])
}

/// Splices `--key=value` pairs from the config file in right after the
/// subcommand name, so explicit flags (which come later) override them.
fn with_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut config = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => config = Some(it.next().ok_or_else(|| Error::Parameter("--config needs a path".into()))?),
            Some(s) if s.starts_with("--config=") => config = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = config else { return Ok(rest) };
    let text = std::fs::read_to_string(&path)?;
    let Some(pos) = rest.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 1) else {
        return Ok(rest);
    };
    let sub = rest[pos].to_string_lossy().into_owned();
    let cmd = Cli::command();
    let sub_cmd = cmd.find_subcommand(&sub);
    let accepted: Vec<String> = sub_cmd
        .map(|c| c.get_arguments().filter_map(|a| a.get_long().map(str::to_owned)).collect())
        .unwrap_or_default();
    let all: Vec<String> = cmd
        .get_subcommands()
        .flat_map(|c| c.get_arguments().filter_map(|a| a.get_long().map(str::to_owned)).collect::<Vec<_>>())
        .collect();
    let mut injected = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("config line {}: expected key=value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if accepted.iter().any(|a| a == k) {
            if v == "true" {
                injected.push(OsString::from(format!("--{k}")));
            } else if v != "false" {
                injected.push(OsString::from(format!("--{k}={v}")));
            }
        } else if !all.iter().any(|a| a == k) {
            return Err(Error::Parameter(format!("config line {}: unknown key '{k}'", no + 1)));
        }
    }
    rest.splice(pos + 1..pos + 1, injected);
    Ok(rest)
}

fn run() -> Result<()> {
    let args = with_config(std::env::args_os().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match cli.cmd {
        Cmd::Gen(a) => gen(a),
        Cmd::Gt(a) => gt(a),
        Cmd::Build(a) => build_cmd(a),
        Cmd::Search(a) => search_cmd(a),
        Cmd::Bench(a) => bench_cmd(a),
        Cmd::Stats(a) => stats_cmd(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("proxgraph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
