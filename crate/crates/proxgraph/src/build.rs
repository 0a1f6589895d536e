//! Graph construction: incremental insertion, neighborhood propagation
//! (NNDescent), divide-and-conquer, and a two-pass refinement preset.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::diversify::{prune, NdStrategy, PruneStats};
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, PartitionedIndex, VectorStore};
use crate::metrics::{l2_sq, DistanceCounter};
use crate::oracle::GroundTruth;
use crate::search::{traverse, BeamScratch, Neighbor};
use crate::seeds::{
    build_seed_index, centroid, compute_medoid, derive_seed, merge_candidates, with_neighbors, KdForest, SeedIndex,
    SeedStrategy, StackedNsw,
};
use crate::vecdata::{sample_ids, Dataset};

/// Order in which incremental insertion visits the dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InsertOrder {
    Dataset,
    Shuffled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    /// Maximum out-degree `R`.
    pub max_degree: usize,
    /// Construction beam width.
    pub beam_width: usize,
    pub nd: NdStrategy,
    pub ss: SeedStrategy,
    pub seed: u64,
    pub order: InsertOrder,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            max_degree: 32,
            beam_width: 128,
            nd: NdStrategy::Rnd,
            ss: SeedStrategy::KS_DEFAULT,
            seed: 42,
            order: InsertOrder::Shuffled,
        }
    }
}

impl BuildParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_degree < 2 || self.beam_width < self.max_degree {
            return Err(Error::param(format!(
                "need L_build >= R >= 2, got R={} L_build={}",
                self.max_degree, self.beam_width
            )));
        }
        self.ss.validate()
    }
}

/// Counters gathered while building.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct BuildStats {
    pub dist_calcs: u64,
    pub wall_ms: u64,
    pub prune: PruneStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltGraph {
    pub graph: Graph,
    pub seeds: SeedIndex,
    pub stats: BuildStats,
}

/// Shared state for adding reverse arcs.
pub(crate) struct LinkCtx<'a, S: VectorStore + ?Sized> {
    pub graph: &'a mut Graph,
    pub store: &'a S,
    pub nd: NdStrategy,
    pub counter: &'a mut DistanceCounter,
    pub prune_stats: &'a mut PruneStats,
}

/// Adds `y -> node` for every `y` in `targets`. A full list is re-pruned
/// with the context's rule over its old neighbors plus `node`.
pub(crate) fn link_reverse<S: VectorStore + ?Sized>(ctx: &mut LinkCtx<'_, S>, node: u32, targets: &[u32]) {
    let cap = ctx.graph.max_degree();
    for &y in targets {
        if ctx.graph.try_push(y, node) {
            continue;
        }
        let center = ctx.store.vector(y);
        let mut cands: Vec<Neighbor> = ctx
            .graph
            .neighbors(y)
            .iter()
            .chain(std::iter::once(&node))
            .map(|&v| Neighbor { id: v, dist: ctx.counter.dist(center, ctx.store.vector(v)) })
            .collect();
        cands.sort_by(Neighbor::cmp_by_dist);
        let kept = prune(&cands, cap, ctx.nd, ctx.store, ctx.counter).expect("sorted candidates");
        ctx.prune_stats.record(cands.len(), kept.len());
        let ids: Vec<u32> = kept.iter().map(|n| n.id).collect();
        ctx.graph.set_neighbors(y, &ids).expect("pruned list is valid");
    }
}

/// Prunes `cands` into the out-list of `node` and adds the reverse arcs.
fn connect<S: VectorStore + ?Sized>(
    graph: &mut Graph,
    store: &S,
    node: u32,
    cands: &[Neighbor],
    nd: NdStrategy,
    counter: &mut DistanceCounter,
    prune_stats: &mut PruneStats,
) {
    let kept = prune(cands, graph.max_degree(), nd, store, counter).expect("sorted candidates");
    prune_stats.record(cands.len(), kept.len());
    let ids: Vec<u32> = kept.iter().map(|n| n.id).collect();
    graph.set_neighbors(node, &ids).expect("pruned list is valid");
    let mut ctx = LinkCtx { graph, store, nd, counter, prune_stats };
    link_reverse(&mut ctx, node, &ids);
}

fn insertion_order(n: usize, p: &BuildParams, first: Option<u32>) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    if p.order == InsertOrder::Shuffled {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(p.seed));
    }
    if let Some(f) = first {
        let pos = order.iter().position(|&v| v == f).expect("entry id in range");
        order[..=pos].rotate_right(1);
    }
    order
}

/// Incremental insertion: each node is connected through a beam search on
/// the graph built so far, its candidates diversified with `p.nd`, and
/// arcs added in both directions.
pub fn build_ii(ds: &Dataset, p: &BuildParams) -> Result<BuiltGraph> {
    p.validate()?;
    let start = Instant::now();
    let n = ds.len();
    let mut counter = DistanceCounter::new();
    let mut prune_stats = PruneStats::default();

    let (fixed, medoid) = match p.ss {
        SeedStrategy::Sf => (Some(ChaCha8Rng::seed_from_u64(derive_seed(p.seed, u64::MAX)).random_range(0..n as u32)), None),
        SeedStrategy::Md => (Some(compute_medoid(ds)), None),
        SeedStrategy::Ks { with_medoid: true, .. } => {
            let m = compute_medoid(ds);
            (None, Some(m))
        }
        _ => (None, None),
    };
    let order = insertion_order(n, p, fixed.or(medoid));

    let mut kd = match p.ss {
        SeedStrategy::Kd { trees, leaf_size, max_visits, seeds } => {
            Some(KdForest::build(ds, trees, leaf_size, max_visits, seeds, p.seed))
        }
        _ => None,
    };
    let mut sn = match p.ss {
        SeedStrategy::Sn { m } => Some(StackedNsw::with_levels(StackedNsw::draw_levels(n, m, p.seed)?, m)),
        _ => None,
    };
    let mut layer_prune = PruneStats::default();

    let mut graph = Graph::new(n, p.max_degree);
    let mut inserted = vec![false; n];
    let mut scratch = BeamScratch::new(n);
    let mut upper_scratch = BeamScratch::default();

    for (i, &x) in order.iter().enumerate() {
        let q = ds.row(x as usize);
        let sn_entry = match sn.as_mut() {
            Some(sn) => sn.insert(ds, x, p.beam_width, &mut upper_scratch, &mut counter, &mut layer_prune),
            None => None,
        };
        if i == 0 {
            inserted[x as usize] = true;
            continue;
        }
        let seeds: Vec<u32> = match p.ss {
            SeedStrategy::Sf | SeedStrategy::Md => with_neighbors(&graph, order[0]),
            SeedStrategy::Ks { count, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.seed, i as u64));
                let mut s: Vec<u32> = medoid.into_iter().collect();
                let picks = index::sample(&mut rng, i, count.min(i));
                s.extend(picks.into_iter().map(|j| order[j]).filter(|&v| Some(v) != medoid));
                s
            }
            SeedStrategy::Kd { .. } => {
                let forest = kd.as_mut().expect("kd forest built");
                let mut s: Vec<u32> = forest
                    .search(ds, q, n, &mut counter)
                    .into_iter()
                    .map(|nb| nb.id)
                    .filter(|&v| inserted[v as usize])
                    .take(forest.seeds)
                    .collect();
                if s.is_empty() {
                    s.push(order[0]);
                }
                s
            }
            SeedStrategy::Sn { .. } => with_neighbors(&graph, sn_entry.unwrap_or(order[0])),
        };
        let t = traverse(&graph, ds, &seeds, q, p.beam_width, &mut scratch, &mut counter, true);
        let cands = merge_candidates(&t.candidates, &t.expanded, x);
        connect(&mut graph, ds, x, &cands, p.nd, &mut counter, &mut prune_stats);
        inserted[x as usize] = true;
    }

    let seeds = match p.ss {
        SeedStrategy::Sf | SeedStrategy::Md => SeedIndex::Fixed { strategy: p.ss, entry: order[0] },
        SeedStrategy::Ks { count, .. } => SeedIndex::Ks { count, medoid },
        SeedStrategy::Kd { .. } => SeedIndex::Kd(kd.take().expect("kd forest built")),
        SeedStrategy::Sn { .. } => {
            let mut sn = sn.take().expect("stacked layers built");
            sn.finish();
            SeedIndex::Sn(sn)
        }
    };
    Ok(BuiltGraph {
        graph,
        seeds,
        stats: BuildStats { dist_calcs: counter.calls(), wall_ms: start.elapsed().as_millis() as u64, prune: prune_stats },
    })
}

/// Two refinement passes over a random base graph with out-degree
/// `min(ceil(log2 n), R)`: the first prunes with RND, the second with
/// `p.nd`. Entries come from the medoid; the returned seed index follows `p.ss`.
pub fn build_vamana2r(ds: &Dataset, p: &BuildParams) -> Result<BuiltGraph> {
    p.validate()?;
    let start = Instant::now();
    let n = ds.len();
    let mut counter = DistanceCounter::new();
    let mut prune_stats = PruneStats::default();
    let mut graph = random_graph(n, ((n as f64).log2().ceil() as usize).clamp(1, p.max_degree), p.max_degree, p.seed);
    let medoid = compute_medoid(ds);
    let mut scratch = BeamScratch::new(n);

    for (pass, nd) in [NdStrategy::Rnd, p.nd].into_iter().enumerate() {
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(p.seed, pass as u64)));
        for &x in &order {
            let q = ds.row(x as usize);
            let seeds = with_neighbors(&graph, medoid);
            let t = traverse(&graph, ds, &seeds, q, p.beam_width, &mut scratch, &mut counter, true);
            let existing: Vec<Neighbor> = graph
                .neighbors(x)
                .iter()
                .map(|&v| Neighbor { id: v, dist: counter.dist(q, ds.row(v as usize)) })
                .collect();
            let mut cands = merge_candidates(&t.candidates, &t.expanded, x);
            cands.extend(existing);
            cands.sort_by(Neighbor::cmp_by_dist);
            cands.dedup_by_key(|nb| nb.id);
            connect(&mut graph, ds, x, &cands, nd, &mut counter, &mut prune_stats);
        }
    }
    let seeds = match p.ss {
        SeedStrategy::Md => SeedIndex::Fixed { strategy: SeedStrategy::Md, entry: medoid },
        other => build_seed_index(ds, &graph, other, p.seed)?,
    };
    Ok(BuiltGraph {
        graph,
        seeds,
        stats: BuildStats { dist_calcs: counter.calls(), wall_ms: start.elapsed().as_millis() as u64, prune: prune_stats },
    })
}

/// Each node gets `degree` distinct random out-neighbors.
pub fn random_graph(n: usize, degree: usize, max_degree: usize, seed: u64) -> Graph {
    let mut g = Graph::new(n, max_degree.max(degree));
    let degree = degree.min(n.saturating_sub(1));
    for u in 0..n as u32 {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, u as u64));
        let picks: Vec<u32> = index::sample(&mut rng, n - 1, degree)
            .into_iter()
            .map(|v| if v as u32 >= u { v as u32 + 1 } else { v as u32 })
            .collect();
        g.set_neighbors(u, &picks).expect("distinct non-self picks");
    }
    g
}

/// Parameters of neighborhood propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NpParams {
    pub k: usize,
    pub iters: usize,
    pub seed: u64,
}

/// Iterative k-NN graph refinement.
///
/// Every round, each node `u` introduces all pairs of nodes in its
/// neighborhood (out-neighbors together with the nodes pointing at it) to
/// one another; every list then keeps its `k` closest entries. Rounds are
/// bulk-synchronous: proposals are computed from the lists as they stood at
/// the start of the round.
#[derive(Debug, Clone, PartialEq)]
pub struct NnDescent {
    k: usize,
    lists: Vec<Vec<Neighbor>>,
    counter: DistanceCounter,
}

impl NnDescent {
    /// `k` distinct random neighbors per node.
    pub fn random_init(ds: &Dataset, k: usize, seed: u64) -> Result<Self> {
        let n = ds.len();
        if k == 0 || k >= n {
            return Err(Error::param(format!("need 1 <= k < n, got k={k} n={n}")));
        }
        let g = random_graph(n, k, k, seed);
        let mut counter = DistanceCounter::new();
        let lists = (0..n as u32)
            .map(|u| {
                let mut l: Vec<Neighbor> = g
                    .neighbors(u)
                    .iter()
                    .map(|&v| Neighbor { id: v, dist: counter.dist(ds.row(u as usize), ds.row(v as usize)) })
                    .collect();
                l.sort_by(Neighbor::cmp_by_dist);
                l
            })
            .collect();
        Ok(NnDescent { k, lists, counter })
    }

    /// Starts from explicit lists (ids only); distances are computed here.
    pub fn from_lists(ds: &Dataset, lists: &[Vec<u32>]) -> Result<Self> {
        let n = ds.len();
        if lists.len() != n {
            return Err(Error::param("one list per node required"));
        }
        let k = lists.first().map_or(0, Vec::len);
        if k == 0 || k >= n {
            return Err(Error::param(format!("need 1 <= k < n, got k={k} n={n}")));
        }
        let mut counter = DistanceCounter::new();
        let mut out = Vec::with_capacity(n);
        for (u, l) in lists.iter().enumerate() {
            let mut ids = l.clone();
            ids.sort_unstable();
            ids.dedup();
            if l.len() != k || ids.len() != k || ids.iter().any(|&v| v as usize == u || v as usize >= n) {
                return Err(Error::param(format!("node {u}: need {k} distinct valid neighbors")));
            }
            let mut nl: Vec<Neighbor> = l
                .iter()
                .map(|&v| Neighbor { id: v, dist: counter.dist(ds.row(u), ds.row(v as usize)) })
                .collect();
            nl.sort_by(Neighbor::cmp_by_dist);
            out.push(nl);
        }
        Ok(NnDescent { k, lists: out, counter })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dist_calcs(&self) -> u64 {
        self.counter.calls()
    }

    /// Current distance to each node's k-th neighbor.
    pub fn kth_distances(&self) -> Vec<f32> {
        self.lists.iter().map(|l| l[self.k - 1].dist).collect()
    }

    /// One propagation round. Returns how many lists changed.
    pub fn iterate(&mut self, ds: &Dataset) -> usize {
        let n = self.lists.len();
        let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, l) in self.lists.iter().enumerate() {
            for nb in l {
                reverse[nb.id as usize].push(u as u32);
            }
        }
        let per_node: Vec<(Vec<(u32, Neighbor)>, DistanceCounter)> = (0..n)
            .into_par_iter()
            .map(|u| {
                let mut local: Vec<u32> = self.lists[u].iter().map(|nb| nb.id).chain(reverse[u].iter().copied()).collect();
                local.sort_unstable();
                local.dedup();
                let mut c = DistanceCounter::new();
                let mut props = Vec::with_capacity(local.len() * local.len());
                for (a, &x) in local.iter().enumerate() {
                    for &y in &local[a + 1..] {
                        let d = c.dist(ds.row(x as usize), ds.row(y as usize));
                        props.push((x, Neighbor { id: y, dist: d }));
                        props.push((y, Neighbor { id: x, dist: d }));
                    }
                }
                (props, c)
            })
            .collect();

        let mut buckets: Vec<Vec<Neighbor>> = vec![Vec::new(); n];
        for (props, c) in per_node {
            self.counter.merge(&c);
            for (target, nb) in props {
                buckets[target as usize].push(nb);
            }
        }
        let k = self.k;
        self.lists
            .par_iter_mut()
            .zip(buckets)
            .map(|(list, mut bucket)| {
                bucket.extend(list.iter().copied());
                bucket.sort_by(Neighbor::cmp_by_dist);
                bucket.dedup_by_key(|nb| nb.id);
                bucket.truncate(k);
                if bucket != *list {
                    *list = bucket;
                    1
                } else {
                    0
                }
            })
            .sum()
    }

    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::new(self.lists.len(), self.k);
        for (u, l) in self.lists.iter().enumerate() {
            let ids: Vec<u32> = l.iter().map(|nb| nb.id).collect();
            g.set_neighbors(u as u32, &ids).expect("valid k-NN list");
        }
        g
    }
}

/// Random initialization refined for `p.iters` rounds or until a round
/// changes nothing.
pub fn nndescent(ds: &Dataset, p: &NpParams) -> Result<Graph> {
    Ok(nndescent_with_stats(ds, p)?.0)
}

pub fn nndescent_with_stats(ds: &Dataset, p: &NpParams) -> Result<(Graph, BuildStats)> {
    let start = Instant::now();
    let mut nd = NnDescent::random_init(ds, p.k, p.seed)?;
    for _ in 0..p.iters {
        if nd.iterate(ds) == 0 {
            break;
        }
    }
    let stats = BuildStats { dist_calcs: nd.dist_calcs(), wall_ms: start.elapsed().as_millis() as u64, ..Default::default() };
    Ok((nd.to_graph(), stats))
}

/// Mean fraction of each node's true `k` nearest neighbors present in its out-list.
pub fn knng_recall(g: &Graph, truth: &GroundTruth, k: usize) -> Result<f64> {
    if truth.k != k || k == 0 {
        return Err(Error::param(format!("truth holds k={}, asked for k={k}", truth.k)));
    }
    if truth.len() != g.len() {
        return Err(Error::param(format!("truth covers {} nodes, graph has {}", truth.len(), g.len())));
    }
    let hits: usize = (0..g.len())
        .map(|u| {
            let out = g.neighbors(u as u32);
            truth.row(u).iter().filter(|nb| out.contains(&nb.id)).count()
        })
        .sum();
    Ok(hits as f64 / (g.len() * k) as f64)
}

/// Seeded Lloyd iterations: at most `max_iters`, or until no centroid moves
/// more than `tol`. Returns the cluster of every row.
pub fn kmeans(ds: &Dataset, p: usize, seed: u64, max_iters: usize, tol: f32) -> Result<Vec<u32>> {
    if p == 0 || p > ds.len() {
        return Err(Error::param(format!("partition count {p} must be in 1..={}", ds.len())));
    }
    let d = ds.dim();
    let mut centers: Vec<f32> = sample_ids(ds.len(), p, seed)?
        .iter()
        .flat_map(|&i| ds.row(i as usize).to_vec())
        .collect();
    let mut assign = vec![0u32; ds.len()];
    for _ in 0..max_iters {
        assign = ds
            .rows()
            .collect::<Vec<_>>()
            .par_iter()
            .map(|row| nearest_center(&centers, d, row))
            .collect();
        let mut sums = vec![0f64; p * d];
        let mut counts = vec![0usize; p];
        for (row, &c) in ds.rows().zip(&assign) {
            counts[c as usize] += 1;
            for (s, &v) in sums[c as usize * d..][..d].iter_mut().zip(row) {
                *s += v as f64;
            }
        }
        let mut moved = 0f32;
        for c in 0..p {
            if counts[c] == 0 {
                continue;
            }
            let new: Vec<f32> = sums[c * d..][..d].iter().map(|&s| (s / counts[c] as f64) as f32).collect();
            moved = moved.max(l2_sq(&new, &centers[c * d..][..d]).sqrt());
            centers[c * d..][..d].copy_from_slice(&new);
        }
        if moved < tol {
            break;
        }
    }
    Ok(assign)
}

fn nearest_center(centers: &[f32], d: usize, row: &[f32]) -> u32 {
    let mut best = (f32::INFINITY, 0u32);
    for (c, center) in centers.chunks_exact(d).enumerate() {
        let dist = l2_sq(row, center);
        if dist < best.0 {
            best = (dist, c as u32);
        }
    }
    best.1
}

/// Moves rows into partitions smaller than `min_size`, each time taking the
/// row closest to the small partition's centroid from a partition that can spare one.
fn rebalance(ds: &Dataset, assign: &mut [u32], p: usize, min_size: usize) -> Result<()> {
    if p * min_size > ds.len() {
        return Err(Error::param(format!(
            "{} rows cannot fill {p} partitions of at least {min_size}",
            ds.len()
        )));
    }
    let mut sizes = vec![0usize; p];
    for &a in assign.iter() {
        sizes[a as usize] += 1;
    }
    while let Some(small) = (0..p).find(|&c| sizes[c] < min_size) {
        let ids: Vec<u32> = (0..ds.len() as u32).filter(|&i| assign[i as usize] == small as u32).collect();
        let center = if ids.is_empty() {
            // Empty cluster: anchor on the first row of the largest partition.
            let big = (0..p).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap_or(0);
            let first = assign.iter().position(|&a| a as usize == big).unwrap_or(0);
            ds.row(first).to_vec()
        } else {
            centroid(ds, &ids)
        };
        let donor = (0..ds.len())
            .filter(|&i| assign[i] as usize != small && sizes[assign[i] as usize] > min_size)
            .min_by(|&a, &b| l2_sq(ds.row(a), &center).total_cmp(&l2_sq(ds.row(b), &center)).then(a.cmp(&b)))
            .ok_or_else(|| Error::param("no partition can donate rows"))?;
        sizes[assign[donor] as usize] -= 1;
        assign[donor] = small as u32;
        sizes[small] += 1;
    }
    Ok(())
}

/// Iteration cap and centroid-movement tolerance of the partitioning k-means.
pub const KMEANS_ITERS: usize = 20;
pub const KMEANS_TOL: f32 = 1e-4;

/// Divide and conquer: k-means into `partitions` disjoint cells, then an
/// independent incremental-insertion graph per cell (built in parallel).
pub fn build_dc(ds: &Dataset, partitions: usize, p: &BuildParams) -> Result<(PartitionedIndex, BuildStats)> {
    p.validate()?;
    let start = Instant::now();
    let mut assign = kmeans(ds, partitions, p.seed, KMEANS_ITERS, KMEANS_TOL)?;
    if partitions > 1 {
        rebalance(ds, &mut assign, partitions, p.max_degree + 1)?;
    }
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); partitions];
    for (i, &a) in assign.iter().enumerate() {
        members[a as usize].push(i as u32);
    }
    if let Some(empty) = members.iter().position(Vec::is_empty) {
        return Err(Error::param(format!("partition {empty} ended up empty")));
    }
    let built: Vec<(Partition, BuildStats)> = members
        .into_par_iter()
        .map(|m| {
            let sub = ds.select(&m)?;
            let b = build_ii(&sub, p)?;
            let c = centroid(ds, &m);
            Ok((Partition { members: m, centroid: c, graph: b.graph, seeds: b.seeds }, b.stats))
        })
        .collect::<Result<_>>()?;
    let mut stats = BuildStats::default();
    let mut parts = Vec::with_capacity(built.len());
    for (part, s) in built {
        stats.dist_calcs += s.dist_calcs;
        stats.prune.merge(&s.prune);
        parts.push(part);
    }
    stats.wall_ms = start.elapsed().as_millis() as u64;
    Ok((PartitionedIndex::new(parts, ds.len())?, stats))
}

/// Construction paradigm selector used by the index container and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builder {
    Ii,
    Np,
    Dc,
    Vamana2r,
}

impl fmt::Display for Builder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Builder::Ii => "ii",
            Builder::Np => "np",
            Builder::Dc => "dc",
            Builder::Vamana2r => "vamana2r",
        })
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ii" => Ok(Builder::Ii),
            "np" => Ok(Builder::Np),
            "dc" => Ok(Builder::Dc),
            "vamana2r" => Ok(Builder::Vamana2r),
            _ => Err(Error::param(format!("unknown builder '{s}'"))),
        }
    }
}
