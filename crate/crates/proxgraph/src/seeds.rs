//! Seed selection: where a beam search enters the graph.
//!
//! Five strategies are supported:
//!
//! * `sf`: one random node fixed at build time, plus its out-neighbors.
//! * `md`: the (approximate) medoid, plus its out-neighbors.
//! * `ks`: `k` fresh random nodes per query, optionally led by the medoid.
//! * `kd`: nearest points met by a budgeted depth-first walk over
//!   randomized K-D trees.
//! * `sn`: greedy descent through a stack of sparse navigable layers, ending
//!   at a base-layer node that is returned together with its out-neighbors.

use std::collections::HashSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::build::{link_reverse, LinkCtx};
use crate::codec::*;
use crate::diversify::{prune, NdStrategy, PruneStats};
use crate::error::{Error, Result};
use crate::graph::{Graph, SubsetView, VectorStore};
use crate::metrics::{l2_sq, DistanceCounter};
use crate::search::{traverse, BeamScratch, Neighbor};
use crate::vecdata::Dataset;

/// Mixes a base seed with an ordinal into an independent stream seed.
pub fn derive_seed(base: u64, ordinal: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ ordinal.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed-selection strategy and its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedStrategy {
    Sf,
    Md,
    Ks { count: usize, with_medoid: bool },
    Kd { trees: usize, leaf_size: usize, max_visits: usize, seeds: usize },
    Sn { m: usize },
}

impl SeedStrategy {
    pub const KS_DEFAULT: SeedStrategy = SeedStrategy::Ks { count: 32, with_medoid: false };
    pub const KD_DEFAULT: SeedStrategy = SeedStrategy::Kd { trees: 1, leaf_size: 32, max_visits: 512, seeds: 16 };
    pub const SN_DEFAULT: SeedStrategy = SeedStrategy::Sn { m: 32 };

    pub fn tag(&self) -> &'static str {
        match self {
            SeedStrategy::Sf => "sf",
            SeedStrategy::Md => "md",
            SeedStrategy::Ks { .. } => "ks",
            SeedStrategy::Kd { .. } => "kd",
            SeedStrategy::Sn { .. } => "sn",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SeedStrategy::Ks { count, .. } if count == 0 => Err(Error::param("ks needs k >= 1")),
            SeedStrategy::Kd { trees, leaf_size, max_visits, seeds }
                if trees == 0 || leaf_size == 0 || max_visits == 0 || seeds == 0 =>
            {
                Err(Error::param("kd parameters must all be >= 1"))
            }
            SeedStrategy::Sn { m } if m < 4 => Err(Error::param(format!("sn needs M >= 4, got {m}"))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for SeedStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SeedStrategy::Sf => f.write_str("sf"),
            SeedStrategy::Md => f.write_str("md"),
            SeedStrategy::Ks { count, with_medoid: false } => write!(f, "ks:k={count}"),
            SeedStrategy::Ks { count, with_medoid: true } => write!(f, "ks:k={count},medoid=1"),
            SeedStrategy::Kd { trees, leaf_size, max_visits, seeds } => {
                write!(f, "kd:trees={trees},leaf={leaf_size},visits={max_visits},seeds={seeds}")
            }
            SeedStrategy::Sn { m } => write!(f, "sn:M={m}"),
        }
    }
}

impl FromStr for SeedStrategy {
    type Err = Error;

    /// Parses `sf`, `md`, `ks:k=32[,medoid=1]`, `kd:trees=1,visits=512[,leaf=32,seeds=16]`, `sn:M=32`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let mut opts: Vec<(&str, usize)> = Vec::new();
        for kv in args.split(',').filter(|p| !p.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected key=value, got '{kv}' in '{s}'")))?;
            let v = v.parse().map_err(|_| Error::param(format!("bad integer '{v}' in '{s}'")))?;
            opts.push((k, v));
        }
        let allowed: &[&str] = match kind {
            "sf" | "md" => &[],
            "ks" => &["k", "medoid"],
            "kd" => &["trees", "leaf", "visits", "seeds"],
            "sn" => &["M", "m"],
            _ => return Err(Error::param(format!("unknown seed strategy '{s}'"))),
        };
        if let Some((bad, _)) = opts.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(Error::param(format!("unknown option '{bad}' in '{s}'")));
        }
        let get = |key: &str, default: usize| {
            opts.iter().rev().find(|(k, _)| k.eq_ignore_ascii_case(key)).map_or(default, |&(_, v)| v)
        };
        let strategy = match kind {
            "sf" => SeedStrategy::Sf,
            "md" => SeedStrategy::Md,
            "ks" => SeedStrategy::Ks { count: get("k", 32), with_medoid: get("medoid", 0) != 0 },
            "kd" => SeedStrategy::Kd {
                trees: get("trees", 1),
                leaf_size: get("leaf", 32),
                max_visits: get("visits", 512),
                seeds: get("seeds", 16),
            },
            _ => SeedStrategy::Sn { m: get("M", 32) },
        };
        strategy.validate()?;
        Ok(strategy)
    }
}

/// Maximum level of a node in the stacked layers: `floor(-ln(xi) / ln(M/2))`.
pub fn assign_level(xi: f64, m: usize) -> Result<usize> {
    if !(xi > 0.0 && xi <= 1.0) {
        return Err(Error::param(format!("xi must be in (0, 1], got {xi}")));
    }
    if m < 4 {
        return Err(Error::param(format!("M must be >= 4, got {m}")));
    }
    let level = (-xi.ln() / (m as f64 / 2.0).ln()).floor();
    Ok(level.max(0.0) as usize)
}

/// Row nearest to the arithmetic centroid, ties to the smaller id.
pub fn compute_medoid(ds: &Dataset) -> u32 {
    let centroid = centroid(ds, (0..ds.len() as u32).collect::<Vec<_>>().as_slice());
    nearest_row(ds, &centroid)
}

pub(crate) fn centroid(ds: &Dataset, ids: &[u32]) -> Vec<f32> {
    let mut acc = vec![0f64; ds.dim()];
    for &i in ids {
        for (a, &v) in acc.iter_mut().zip(ds.row(i as usize)) {
            *a += v as f64;
        }
    }
    acc.iter().map(|&a| (a / ids.len().max(1) as f64) as f32).collect()
}

fn nearest_row(ds: &Dataset, target: &[f32]) -> u32 {
    let mut best = (f32::INFINITY, 0u32);
    for (i, row) in ds.rows().enumerate() {
        let d = l2_sq(row, target);
        if d < best.0 {
            best = (d, i as u32);
        }
    }
    best.1
}

#[derive(Debug, Clone, PartialEq)]
enum KdNode {
    Split { dim: u32, value: f32, left: u32, right: u32 },
    Leaf { start: u32, end: u32 },
}

/// One randomized K-D tree; leaves reference ranges of `perm`.
#[derive(Debug, Clone, PartialEq)]
pub struct KdTree {
    nodes: Vec<KdNode>,
    perm: Vec<u32>,
}

const KD_TOP_DIMS: usize = 5;
const KD_VARIANCE_SAMPLE: usize = 128;

impl KdTree {
    pub fn build<S: VectorStore + ?Sized>(store: &S, leaf_size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tree = KdTree { nodes: Vec::new(), perm: (0..store.count() as u32).collect() };
        let n = tree.perm.len();
        tree.split(store, 0, n, leaf_size.max(1), &mut rng);
        tree
    }

    fn split<S: VectorStore + ?Sized>(
        &mut self,
        store: &S,
        start: usize,
        end: usize,
        leaf_size: usize,
        rng: &mut ChaCha8Rng,
    ) -> u32 {
        let me = self.nodes.len() as u32;
        if end - start <= leaf_size {
            self.nodes.push(KdNode::Leaf { start: start as u32, end: end as u32 });
            return me;
        }
        let ids = &mut self.perm[start..end];
        let d = store.vector(ids[0]).len();
        // Variance per dimension over an evenly strided sample.
        let step = (ids.len() / KD_VARIANCE_SAMPLE).max(1);
        let mut mean = vec![0f64; d];
        let mut sq = vec![0f64; d];
        let mut cnt = 0f64;
        for &id in ids.iter().step_by(step) {
            for (j, &v) in store.vector(id).iter().enumerate() {
                mean[j] += v as f64;
                sq[j] += (v as f64) * (v as f64);
            }
            cnt += 1.0;
        }
        let mut dims: Vec<(f64, usize)> =
            (0..d).map(|j| (sq[j] / cnt - (mean[j] / cnt).powi(2), j)).collect();
        dims.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let top = KD_TOP_DIMS.min(d);
        let dim = dims[rng.random_range(0..top)].1;

        let mid = ids.len() / 2;
        ids.select_nth_unstable_by(mid, |&a, &b| {
            store.vector(a)[dim].total_cmp(&store.vector(b)[dim]).then(a.cmp(&b))
        });
        let value = store.vector(ids[mid])[dim];

        self.nodes.push(KdNode::Split { dim: dim as u32, value, left: 0, right: 0 });
        let left = self.split(store, start, start + mid, leaf_size, rng);
        let right = self.split(store, start + mid, end, leaf_size, rng);
        if let KdNode::Split { left: l, right: r, .. } = &mut self.nodes[me as usize] {
            *l = left;
            *r = right;
        }
        me
    }

    fn leaf(&self, node: u32) -> Option<&[u32]> {
        match self.nodes[node as usize] {
            KdNode::Leaf { start, end } => Some(&self.perm[start as usize..end as usize]),
            KdNode::Split { .. } => None,
        }
    }

    /// Ids in the first leaf a depth-first descent toward `q` reaches.
    pub fn first_leaf(&self, q: &[f32]) -> &[u32] {
        let mut node = 0u32;
        loop {
            match self.nodes[node as usize] {
                KdNode::Leaf { .. } => return self.leaf(node).unwrap_or(&[]),
                KdNode::Split { dim, value, left, right } => {
                    node = if q[dim as usize] < value { left } else { right };
                }
            }
        }
    }

    /// Depth-first walk, near side first, evaluating leaf points until the
    /// budget runs out.
    fn walk<S: VectorStore + ?Sized>(
        &self,
        store: &S,
        q: &[f32],
        budget: &mut usize,
        seen: &mut HashSet<u32>,
        found: &mut Vec<Neighbor>,
        counter: &mut DistanceCounter,
    ) {
        let mut stack = vec![0u32];
        while let Some(node) = stack.pop() {
            if *budget == 0 {
                return;
            }
            match self.nodes[node as usize] {
                KdNode::Split { dim, value, left, right } => {
                    let (near, far) = if q[dim as usize] < value { (left, right) } else { (right, left) };
                    stack.push(far);
                    stack.push(near);
                }
                KdNode::Leaf { start, end } => {
                    for &id in &self.perm[start as usize..end as usize] {
                        if *budget == 0 {
                            return;
                        }
                        if seen.insert(id) {
                            *budget -= 1;
                            found.push(Neighbor { id, dist: counter.dist(q, store.vector(id)) });
                        }
                    }
                }
            }
        }
    }

    fn write_to(&self, w: &mut impl Write) -> Result<()> {
        put_u32s(w, &self.perm)?;
        put_u64(w, self.nodes.len() as u64)?;
        for node in &self.nodes {
            match *node {
                KdNode::Split { dim, value, left, right } => {
                    put_u8(w, 0)?;
                    put_u32(w, dim)?;
                    put_f32(w, value)?;
                    put_u32(w, left)?;
                    put_u32(w, right)?;
                }
                KdNode::Leaf { start, end } => {
                    put_u8(w, 1)?;
                    put_u32(w, start)?;
                    put_u32(w, end)?;
                }
            }
        }
        Ok(())
    }

    fn read_from(r: &mut impl Read) -> Result<Self> {
        let perm = get_u32s(r)?;
        let count = get_u64(r)? as usize;
        let mut nodes = Vec::with_capacity(count.min(perm.len() * 2 + 1));
        for _ in 0..count {
            let node = match get_u8(r)? {
                0 => KdNode::Split { dim: get_u32(r)?, value: get_f32(r)?, left: get_u32(r)?, right: get_u32(r)? },
                1 => KdNode::Leaf { start: get_u32(r)?, end: get_u32(r)? },
                t => return Err(Error::Format(format!("bad kd node tag {t}"))),
            };
            nodes.push(node);
        }
        for node in &nodes {
            let ok = match *node {
                KdNode::Split { left, right, .. } => (left as usize) < count && (right as usize) < count,
                KdNode::Leaf { start, end } => start <= end && (end as usize) <= perm.len(),
            };
            if !ok {
                return Err(Error::Format("kd tree node out of range".into()));
            }
        }
        if nodes.is_empty() {
            return Err(Error::Format("empty kd tree".into()));
        }
        Ok(KdTree { nodes, perm })
    }
}

/// A forest of randomized K-D trees sharing one visit budget.
#[derive(Debug, Clone, PartialEq)]
pub struct KdForest {
    pub trees: Vec<KdTree>,
    pub leaf_size: usize,
    pub max_visits: usize,
    pub seeds: usize,
}

impl KdForest {
    pub fn build<S: VectorStore + ?Sized>(
        store: &S,
        trees: usize,
        leaf_size: usize,
        max_visits: usize,
        seeds: usize,
        seed: u64,
    ) -> Self {
        let trees = (0..trees).map(|t| KdTree::build(store, leaf_size, derive_seed(seed, t as u64))).collect();
        KdForest { trees, leaf_size, max_visits, seeds }
    }

    /// Up to `want` closest points found within the visit budget, ascending.
    pub fn search<S: VectorStore + ?Sized>(
        &self,
        store: &S,
        q: &[f32],
        want: usize,
        counter: &mut DistanceCounter,
    ) -> Vec<Neighbor> {
        let mut seen = HashSet::new();
        let mut found = Vec::new();
        let per_tree = (self.max_visits / self.trees.len()).max(1);
        for tree in &self.trees {
            let mut budget = per_tree;
            tree.walk(store, q, &mut budget, &mut seen, &mut found, counter);
        }
        found.sort_by(Neighbor::cmp_by_dist);
        found.truncate(want);
        found
    }
}

/// One upper layer: a graph over the sorted global ids in `members`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub members: Vec<u32>,
    pub graph: Graph,
}

impl Layer {
    fn local(&self, global: u32) -> Option<u32> {
        self.members.binary_search(&global).ok().map(|i| i as u32)
    }
}

/// Stacked navigable layers above the base graph. `layers[0]` is level 1.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedNsw {
    pub m: usize,
    pub levels: Vec<u8>,
    pub layers: Vec<Layer>,
    pub top_entry: Option<u32>,
    top_level: usize,
}

const MAX_LEVEL: usize = 16;

/// Beam width used when upper layers are built on their own.
pub const SN_LAYER_BEAM: usize = 64;

impl StackedNsw {
    /// Draws a level for each of `n` nodes.
    pub fn draw_levels(n: usize, m: usize, seed: u64) -> Result<Vec<u8>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let xi = 1.0 - rng.random::<f64>();
                Ok(assign_level(xi, m)?.min(MAX_LEVEL) as u8)
            })
            .collect()
    }

    /// Empty layers sized for the given levels; nodes are linked by [`insert`](Self::insert).
    pub fn with_levels(levels: Vec<u8>, m: usize) -> Self {
        let top = levels.iter().copied().max().unwrap_or(0) as usize;
        let cap = (m / 2).max(2);
        let layers = (1..=top)
            .map(|l| {
                let members: Vec<u32> =
                    (0..levels.len() as u32).filter(|&i| levels[i as usize] as usize >= l).collect();
                let graph = Graph::new(members.len(), cap);
                Layer { members, graph }
            })
            .collect();
        StackedNsw { m, levels, layers, top_entry: None, top_level: 0 }
    }

    /// Assembles an index from prebuilt layers.
    pub fn from_layers(m: usize, levels: Vec<u8>, layers: Vec<Layer>, top_entry: u32) -> Result<Self> {
        let top_level = levels.get(top_entry as usize).copied().ok_or_else(|| Error::param("top entry out of range"))? as usize;
        if layers.len() != levels.iter().copied().max().unwrap_or(0) as usize || top_level != layers.len() {
            return Err(Error::param("layer count must match the maximum level of the top entry"));
        }
        for (i, layer) in layers.iter().enumerate() {
            let want: Vec<u32> = (0..levels.len() as u32).filter(|&v| levels[v as usize] as usize > i).collect();
            if layer.members != want || layer.graph.len() != want.len() {
                return Err(Error::param(format!("layer {} membership disagrees with levels", i + 1)));
            }
        }
        Ok(StackedNsw { m, levels, layers, top_entry: Some(top_entry), top_level })
    }

    /// Builds the layers over `ds` by inserting every node with level > 0, in id order.
    pub fn build(ds: &Dataset, m: usize, seed: u64, beam: usize, counter: &mut DistanceCounter) -> Result<Self> {
        let levels = Self::draw_levels(ds.len(), m, seed)?;
        let mut sn = Self::with_levels(levels, m);
        let mut scratch = BeamScratch::default();
        let mut discard = PruneStats::default();
        for v in 0..ds.len() as u32 {
            if sn.levels[v as usize] > 0 || sn.top_entry.is_none() {
                sn.insert(ds, v, beam, &mut scratch, counter, &mut discard);
            }
        }
        sn.finish();
        Ok(sn)
    }

    pub fn top_level(&self) -> usize {
        self.top_level
    }

    fn greedy<S: VectorStore + ?Sized>(
        &self,
        layer: usize,
        store: &S,
        q: &[f32],
        start: u32,
        counter: &mut DistanceCounter,
    ) -> u32 {
        let l = &self.layers[layer - 1];
        let mut cur = l.local(start).expect("descent node missing from layer");
        let mut cur_d = counter.dist(q, store.vector(start));
        loop {
            let mut moved = false;
            for &v in l.graph.neighbors(cur) {
                let d = counter.dist(q, store.vector(l.members[v as usize]));
                if d < cur_d {
                    cur = v;
                    cur_d = d;
                    moved = true;
                }
            }
            if !moved {
                return l.members[cur as usize];
            }
        }
    }

    /// Greedy 1-best descent from the top entry to level 1. Returns the
    /// global id reached (the top entry itself when there are no layers).
    pub fn descend<S: VectorStore + ?Sized>(&self, store: &S, q: &[f32], counter: &mut DistanceCounter) -> Option<u32> {
        let mut cur = self.top_entry?;
        for layer in (1..=self.top_level).rev() {
            cur = self.greedy(layer, store, q, cur, counter);
        }
        Some(cur)
    }

    /// Same as [`descend`](Self::descend) but also reports the node visited at every level.
    pub fn descent_path<S: VectorStore + ?Sized>(&self, store: &S, q: &[f32], counter: &mut DistanceCounter) -> Vec<u32> {
        let Some(mut cur) = self.top_entry else { return Vec::new() };
        let mut path = vec![cur];
        for layer in (1..=self.top_level).rev() {
            cur = self.greedy(layer, store, q, cur, counter);
            path.push(cur);
        }
        path
    }

    /// Links `v` into every layer up to its level. Returns the node reached
    /// at level 1 (or the top entry when no upper layer exists yet), which
    /// serves as the base-layer entry for `v`.
    pub fn insert(
        &mut self,
        ds: &Dataset,
        v: u32,
        beam: usize,
        scratch: &mut BeamScratch,
        counter: &mut DistanceCounter,
        prune_stats: &mut PruneStats,
    ) -> Option<u32> {
        let level = self.levels[v as usize] as usize;
        let Some(top) = self.top_entry else {
            self.top_entry = Some(v);
            self.top_level = level;
            return None;
        };
        let q = ds.row(v as usize);
        let mut cur = top;
        for layer in (level + 1..=self.top_level).rev() {
            cur = self.greedy(layer, ds, q, cur, counter);
        }
        for layer in (1..=level.min(self.top_level)).rev() {
            let l = &mut self.layers[layer - 1];
            let view = SubsetView { ds, members: &l.members };
            let entry = l.local(cur).expect("entry missing from layer");
            let t = traverse(&l.graph, &view, &[entry], q, beam, scratch, counter, true);
            let me = l.local(v).expect("inserted node missing from layer");
            let cands = merge_candidates(&t.candidates, &t.expanded, me);
            cur = l.members[cands[0].id as usize];
            let cap = l.graph.max_degree();
            let kept = prune(&cands, cap, NdStrategy::Rnd, &view, counter).expect("sorted candidates");
            prune_stats.record(cands.len(), kept.len());
            let ids: Vec<u32> = kept.iter().map(|n| n.id).collect();
            l.graph.set_neighbors(me, &ids).expect("valid pruned list");
            let mut ctx = LinkCtx { graph: &mut l.graph, store: &view, nd: NdStrategy::Rnd, counter, prune_stats };
            link_reverse(&mut ctx, me, &ids);
        }
        if level > self.top_level {
            self.top_entry = Some(v);
            self.top_level = level;
        }
        if self.top_level == 0 {
            Some(top)
        } else {
            Some(cur)
        }
    }

    /// Pins the top entry to the smallest id among the highest-level nodes.
    pub fn finish(&mut self) {
        let top = self.levels.iter().copied().max().unwrap_or(0);
        if let Some(first) = self.levels.iter().position(|&l| l == top) {
            if self.top_entry.is_some() {
                self.top_entry = Some(first as u32);
                self.top_level = top as usize;
            }
        }
    }

    fn write_to(&self, w: &mut impl Write) -> Result<()> {
        put_u32(w, self.m as u32)?;
        put_u32(w, self.top_entry.unwrap_or(u32::MAX))?;
        put_u64(w, self.levels.len() as u64)?;
        w.write_all(&self.levels)?;
        put_u32(w, self.layers.len() as u32)?;
        for layer in &self.layers {
            put_u32s(w, &layer.members)?;
            layer.graph.write_to(w)?;
        }
        Ok(())
    }

    fn read_from(r: &mut impl Read) -> Result<Self> {
        let m = get_u32(r)? as usize;
        let top = get_u32(r)?;
        let n = get_u64(r)? as usize;
        if n > 1 << 32 {
            return Err(Error::Format("implausible level table".into()));
        }
        let mut levels = vec![0u8; n];
        r.read_exact(&mut levels)?;
        let count = get_u32(r)? as usize;
        let mut layers = Vec::with_capacity(count.min(MAX_LEVEL));
        for _ in 0..count {
            let members = get_u32s(r)?;
            let graph = Graph::read_from(r)?;
            layers.push(Layer { members, graph });
        }
        if top == u32::MAX {
            return Ok(Self::with_levels(levels, m));
        }
        Self::from_layers(m, levels, layers, top).map_err(|e| Error::Format(e.to_string()))
    }
}

/// Expanded nodes and final beam merged into one ascending, duplicate-free
/// candidate list, excluding `exclude`.
pub(crate) fn merge_candidates(beam: &[Neighbor], expanded: &[Neighbor], exclude: u32) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = beam.iter().chain(expanded).copied().filter(|n| n.id != exclude).collect();
    all.sort_by(Neighbor::cmp_by_dist);
    all.dedup_by_key(|n| n.id);
    all
}

/// Strategy state needed at query time.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedIndex {
    /// `sf` and `md`: a fixed entry node.
    Fixed { strategy: SeedStrategy, entry: u32 },
    Ks { count: usize, medoid: Option<u32> },
    Kd(KdForest),
    Sn(StackedNsw),
}

impl SeedIndex {
    pub fn strategy(&self) -> SeedStrategy {
        match self {
            SeedIndex::Fixed { strategy, .. } => *strategy,
            SeedIndex::Ks { count, medoid } => SeedStrategy::Ks { count: *count, with_medoid: medoid.is_some() },
            SeedIndex::Kd(f) => SeedStrategy::Kd {
                trees: f.trees.len(),
                leaf_size: f.leaf_size,
                max_visits: f.max_visits,
                seeds: f.seeds,
            },
            SeedIndex::Sn(sn) => SeedStrategy::Sn { m: sn.m },
        }
    }

    /// Entry ids for one query, duplicate-free. `query_seed` drives the
    /// random strategies so concurrent queries stay reproducible.
    pub fn select<S: VectorStore + ?Sized>(
        &self,
        graph: &Graph,
        store: &S,
        q: &[f32],
        query_seed: u64,
        counter: &mut DistanceCounter,
    ) -> Vec<u32> {
        let n = graph.len();
        match self {
            SeedIndex::Fixed { entry, .. } => with_neighbors(graph, *entry),
            SeedIndex::Ks { count, medoid } => {
                let mut rng = ChaCha8Rng::seed_from_u64(query_seed);
                let mut out: Vec<u32> = medoid.iter().copied().collect();
                let target = out.len() + (*count).min(n - out.len());
                let draws = index::sample(&mut rng, n, (target + 1).min(n));
                for p in draws.into_iter().map(|p| p as u32) {
                    if out.len() == target {
                        break;
                    }
                    if Some(p) != *medoid {
                        out.push(p);
                    }
                }
                out
            }
            SeedIndex::Kd(forest) => {
                let found = forest.search(store, q, forest.seeds.min(n), counter);
                found.into_iter().map(|nb| nb.id).collect()
            }
            SeedIndex::Sn(sn) => match sn.descend(store, q, counter) {
                Some(entry) => with_neighbors(graph, entry),
                None => vec![0],
            },
        }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        match self {
            SeedIndex::Fixed { strategy, entry } => {
                put_u8(w, if *strategy == SeedStrategy::Sf { 0 } else { 1 })?;
                put_u32(w, *entry)
            }
            SeedIndex::Ks { count, medoid } => {
                put_u8(w, 2)?;
                put_u32(w, *count as u32)?;
                put_u32(w, medoid.unwrap_or(u32::MAX))
            }
            SeedIndex::Kd(f) => {
                put_u8(w, 3)?;
                put_u32(w, f.leaf_size as u32)?;
                put_u32(w, f.max_visits as u32)?;
                put_u32(w, f.seeds as u32)?;
                put_u32(w, f.trees.len() as u32)?;
                f.trees.iter().try_for_each(|t| t.write_to(w))
            }
            SeedIndex::Sn(sn) => {
                put_u8(w, 4)?;
                sn.write_to(w)
            }
        }
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        Ok(match get_u8(r)? {
            0 => SeedIndex::Fixed { strategy: SeedStrategy::Sf, entry: get_u32(r)? },
            1 => SeedIndex::Fixed { strategy: SeedStrategy::Md, entry: get_u32(r)? },
            2 => {
                let count = get_u32(r)? as usize;
                let m = get_u32(r)?;
                SeedIndex::Ks { count, medoid: (m != u32::MAX).then_some(m) }
            }
            3 => {
                let leaf_size = get_u32(r)? as usize;
                let max_visits = get_u32(r)? as usize;
                let seeds = get_u32(r)? as usize;
                let count = get_u32(r)? as usize;
                let trees = (0..count).map(|_| KdTree::read_from(r)).collect::<Result<Vec<_>>>()?;
                if trees.is_empty() {
                    return Err(Error::Format("kd forest without trees".into()));
                }
                SeedIndex::Kd(KdForest { trees, leaf_size, max_visits, seeds })
            }
            4 => SeedIndex::Sn(StackedNsw::read_from(r)?),
            t => return Err(Error::Format(format!("unknown seed index tag {t}"))),
        })
    }

    /// Checks that every stored id fits a graph of `n` nodes.
    pub fn check(&self, n: usize) -> Result<()> {
        let ok = match self {
            SeedIndex::Fixed { entry, .. } => (*entry as usize) < n,
            SeedIndex::Ks { medoid, .. } => medoid.is_none_or(|m| (m as usize) < n),
            SeedIndex::Kd(f) => f.trees.iter().all(|t| t.perm.len() == n && t.perm.iter().all(|&i| (i as usize) < n)),
            SeedIndex::Sn(sn) => sn.levels.len() == n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Format(format!("seed index does not fit a {n}-node graph")))
        }
    }
}

pub(crate) fn with_neighbors(graph: &Graph, entry: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(graph.degree(entry) + 1);
    out.push(entry);
    out.extend_from_slice(graph.neighbors(entry));
    out
}

/// Builds the query-time seed state for `strategy` over a finished graph.
pub fn build_seed_index(ds: &Dataset, graph: &Graph, strategy: SeedStrategy, seed: u64) -> Result<SeedIndex> {
    strategy.validate()?;
    if graph.len() != ds.len() {
        return Err(Error::param(format!("graph has {} nodes, dataset {}", graph.len(), ds.len())));
    }
    Ok(match strategy {
        SeedStrategy::Sf => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            SeedIndex::Fixed { strategy, entry: rng.random_range(0..ds.len() as u32) }
        }
        SeedStrategy::Md => SeedIndex::Fixed { strategy, entry: compute_medoid(ds) },
        SeedStrategy::Ks { count, with_medoid } => {
            SeedIndex::Ks { count, medoid: with_medoid.then(|| compute_medoid(ds)) }
        }
        SeedStrategy::Kd { trees, leaf_size, max_visits, seeds } => {
            SeedIndex::Kd(KdForest::build(ds, trees, leaf_size, max_visits, seeds, seed))
        }
        SeedStrategy::Sn { m } => {
            let mut counter = DistanceCounter::new();
            SeedIndex::Sn(StackedNsw::build(ds, m, seed, SN_LAYER_BEAM, &mut counter)?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vecdata::{gen_clustered, gen_powerlaw, ClusterSpec, SyntheticSpec};

    #[test]
    fn level_assignment() {
        assert_eq!(assign_level(1.0, 4).unwrap(), 0);
        assert_eq!(assign_level(1.0, 64).unwrap(), 0);
        assert_eq!(assign_level(0.25, 4).unwrap(), 2);
        assert_eq!(assign_level(1.0 / 16.0, 32).unwrap(), 1);
        assert!(assign_level(0.0, 32).is_err());
        assert!(assign_level(-0.5, 32).is_err());
        assert!(assign_level(0.5, 3).is_err());
    }

    #[test]
    fn medoid_examples() {
        let line = Dataset::new(3, 1, vec![0.0, 1.0, 3.0]).unwrap();
        assert_eq!(compute_medoid(&line), 1);
        assert_eq!(compute_medoid(&Dataset::new(1, 2, vec![5.0, 5.0]).unwrap()), 0);
        let square = Dataset::from_rows(&[[0.0f32, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]).unwrap();
        assert_eq!(compute_medoid(&square), 0);
    }

    #[test]
    fn medoid_is_exact_on_one_gaussian() {
        let ds = gen_clustered(&ClusterSpec { n: 200, d: 4, clusters: 1, std_dev: 1.0, seed: 11 }).unwrap();
        let exact = (0..ds.len())
            .map(|i| {
                let s: f64 = ds.rows().map(|r| (l2_sq(ds.row(i), r) as f64).sqrt()).sum();
                (s, i as u32)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .unwrap()
            .1;
        assert_eq!(compute_medoid(&ds), exact);
    }

    #[test]
    fn kd_descent_on_a_line() {
        let ds = Dataset::new(8, 1, (0..8).map(|i| i as f32).collect()).unwrap();
        let tree = KdTree::build(&ds, 1, 3);
        assert_eq!(tree.first_leaf(&[3.4]), &[3]);
        let mut perm = tree.perm.clone();
        perm.sort_unstable();
        assert_eq!(perm, (0..8).collect::<Vec<u32>>());
    }

    #[test]
    fn kd_forest_respects_budget_and_finds_near_points() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 2000, d: 4, a: 0.0, seed: 2 }).unwrap();
        let forest = KdForest::build(&ds, 2, 16, 128, 8, 5);
        for t in &forest.trees {
            let mut p = t.perm.clone();
            p.sort_unstable();
            assert_eq!(p, (0..2000).collect::<Vec<u32>>());
        }
        let q = ds.row(17).to_vec();
        let mut c = DistanceCounter::new();
        let got = forest.search(&ds, &q, 8, &mut c);
        assert!(c.calls() <= 128);
        assert_eq!(got.len(), 8);
        assert_eq!(got[0].id, 17);
        assert!(got.windows(2).all(|w| w[0].dist <= w[1].dist));
    }

    fn ring_graph(n: u32) -> Graph {
        let lists: Vec<Vec<u32>> = (0..n).map(|u| vec![(u + 1) % n, (u + n - 1) % n]).collect();
        Graph::from_lists(&lists, 2).unwrap()
    }

    #[test]
    fn fixed_and_random_selection() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 1000, d: 3, a: 0.0, seed: 9 }).unwrap();
        let g = ring_graph(1000);
        let mut c = DistanceCounter::new();

        let sf = build_seed_index(&ds, &g, SeedStrategy::Sf, 4).unwrap();
        let a = sf.select(&g, &ds, ds.row(1), 1, &mut c);
        let b = sf.select(&g, &ds, ds.row(2), 2, &mut c);
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);

        let ks = build_seed_index(&ds, &g, SeedStrategy::Ks { count: 10, with_medoid: false }, 4).unwrap();
        let a = ks.select(&g, &ds, ds.row(1), 77, &mut c);
        let mut uniq = a.clone();
        uniq.sort_unstable();
        uniq.dedup();
        assert_eq!(uniq.len(), 10);
        assert_eq!(a, ks.select(&g, &ds, ds.row(1), 77, &mut c));
        assert_ne!(a, ks.select(&g, &ds, ds.row(1), 78, &mut c));

        let big = SeedIndex::Ks { count: 5000, medoid: Some(3) };
        let all = big.select(&g, &ds, ds.row(0), 1, &mut c);
        assert_eq!(all.len(), 1000);
        assert_eq!(all[0], 3);
        assert_eq!(c.calls(), 0);
    }

    #[test]
    fn ks_draws_are_uniform() {
        let n = 100;
        let ds = gen_powerlaw(&SyntheticSpec { n, d: 2, a: 0.0, seed: 1 }).unwrap();
        let g = ring_graph(n as u32);
        let ks = SeedIndex::Ks { count: 10, medoid: None };
        let mut freq = vec![0u32; n];
        let mut c = DistanceCounter::new();
        let queries = 10_000;
        for i in 0..queries {
            for id in ks.select(&g, &ds, ds.row(0), derive_seed(5, i), &mut c) {
                freq[id as usize] += 1;
            }
        }
        // Each query includes a given id with probability 0.1.
        let mean = queries as f64 * 0.1;
        let sigma = (queries as f64 * 0.1 * 0.9).sqrt();
        for (id, &f) in freq.iter().enumerate() {
            assert!((f as f64 - mean).abs() <= 3.0 * sigma, "id {id}: {f}");
        }
    }

    #[test]
    fn sn_with_zero_levels_is_a_fixed_entry() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 50, d: 2, a: 0.0, seed: 1 }).unwrap();
        let g = ring_graph(50);
        let mut sn = StackedNsw::with_levels(vec![0; 50], 8);
        let mut scratch = BeamScratch::default();
        let mut c = DistanceCounter::new();
        let mut ps = PruneStats::default();
        for v in 0..50 {
            sn.insert(&ds, v, 16, &mut scratch, &mut c, &mut ps);
        }
        sn.finish();
        assert!(sn.layers.is_empty());
        let si = SeedIndex::Sn(sn);
        assert_eq!(si.select(&g, &ds, ds.row(30), 0, &mut c), vec![0, 1, 49]);
        assert_eq!(si.select(&g, &ds, ds.row(10), 9, &mut c), vec![0, 1, 49]);
    }

    fn toy_stack() -> (Dataset, Graph, StackedNsw) {
        // Points 0..7 on a line; nodes 0 and 6 also live in layer 1.
        let ds = Dataset::new(8, 1, (0..8).map(|i| i as f32).collect()).unwrap();
        let base = Graph::from_lists(
            &(0..8u32).map(|u| [u.wrapping_sub(1), u + 1].into_iter().filter(|&v| v < 8).collect()).collect::<Vec<_>>(),
            2,
        )
        .unwrap();
        let mut levels = vec![0u8; 8];
        levels[0] = 1;
        levels[6] = 1;
        let layer = Layer { members: vec![0, 6], graph: Graph::from_lists(&[vec![1], vec![0]], 2).unwrap() };
        let sn = StackedNsw::from_layers(8, levels, vec![layer], 0).unwrap();
        (ds, base, sn)
    }

    #[test]
    fn sn_two_layer_trace() {
        let (ds, base, sn) = toy_stack();
        let mut c = DistanceCounter::new();
        assert_eq!(sn.descent_path(&ds, &[5.4], &mut c), vec![0, 6]);
        // d(q,0), d(q,6), then d(q,0) again from node 6.
        assert_eq!(c.calls(), 3);
        let si = SeedIndex::Sn(sn);
        let mut c = DistanceCounter::new();
        assert_eq!(si.select(&base, &ds, &[5.4], 0, &mut c), vec![6, 5, 7]);
        assert_eq!(si.select(&base, &ds, &[1.2], 0, &mut c), vec![0, 1]);
    }

    #[test]
    fn sn_build_keeps_layers_nested() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 3000, d: 8, a: 0.0, seed: 4 }).unwrap();
        let mut c = DistanceCounter::new();
        let sn = StackedNsw::build(&ds, 8, 3, SN_LAYER_BEAM, &mut c).unwrap();
        assert!(!sn.layers.is_empty());
        for pair in sn.layers.windows(2) {
            assert!(pair[1].members.iter().all(|m| pair[0].members.binary_search(m).is_ok()));
        }
        let top = sn.top_entry.unwrap();
        assert_eq!(sn.levels[top as usize] as usize, sn.layers.len());
        for layer in &sn.layers {
            assert!(layer.graph.degree_stats().max <= 4);
            if layer.members.len() > 1 {
                assert!(layer.graph.degree_stats().min >= 1);
            }
        }
        // Level frequencies decay geometrically with ratio 1/(M/2).
        let l1 = sn.layers[0].members.len() as f64 / 3000.0;
        assert!((l1 - 0.25).abs() < 0.03, "{l1}");
    }

    #[test]
    fn seed_index_roundtrip() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 500, d: 4, a: 0.0, seed: 4 }).unwrap();
        let g = ring_graph(500);
        for s in ["sf", "md", "ks:k=8,medoid=1", "kd:trees=3,leaf=8,visits=64,seeds=4", "sn:M=6"] {
            let si = build_seed_index(&ds, &g, s.parse().unwrap(), 2).unwrap();
            let mut buf = Vec::new();
            si.write_to(&mut buf).unwrap();
            let back = SeedIndex::read_from(&mut buf.as_slice()).unwrap();
            assert_eq!(back, si, "{s}");
            back.check(500).unwrap();
            assert!(back.check(10).is_err() || matches!(back, SeedIndex::Ks { medoid: None, .. }));
        }
    }

    #[test]
    fn strategy_strings() {
        for s in ["sf", "md", "ks:k=32,medoid=0", "kd:trees=1,leaf=32,visits=512,seeds=16", "sn:M=32"] {
            let parsed: SeedStrategy = s.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<SeedStrategy>().unwrap(), parsed);
        }
        assert_eq!("ks:k=32".parse::<SeedStrategy>().unwrap(), SeedStrategy::KS_DEFAULT);
        assert_eq!("kd:trees=1,visits=512".parse::<SeedStrategy>().unwrap(), SeedStrategy::KD_DEFAULT);
        assert_eq!("sn:M=32".parse::<SeedStrategy>().unwrap(), SeedStrategy::SN_DEFAULT);
        assert!("ks:k=0".parse::<SeedStrategy>().is_err());
        assert!("sn:M=3".parse::<SeedStrategy>().is_err());
        assert!("xx".parse::<SeedStrategy>().is_err());
        assert!("kd:bogus=1".parse::<SeedStrategy>().is_err());
    }
}
