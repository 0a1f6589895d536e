//! Beam search over a proximity graph, and its multi-partition variant.
//!
//! The candidate set is a single sorted buffer of capacity `L`. Every node's
//! distance is evaluated at most once per query; a node evicted from the
//! buffer is never re-admitted.

use std::cmp::Ordering;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{Graph, PartitionedIndex, VectorStore};
use crate::metrics::DistanceCounter;
use crate::seeds::{derive_seed, SeedIndex};
use crate::vecdata::Dataset;

/// A node id with its distance to some reference point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub dist: f32,
}

impl Neighbor {
    /// Ascending distance, ties to the smaller id.
    #[inline]
    pub fn cmp_by_dist(a: &Neighbor, b: &Neighbor) -> Ordering {
        a.dist.total_cmp(&b.dist).then(a.id.cmp(&b.id))
    }
}

/// Per-query instrumentation.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct SearchStats {
    /// Distance evaluations, including those spent on seed selection.
    pub dist_calcs: u64,
    /// Nodes expanded.
    pub hops: u64,
    pub wall_ns: u64,
    pub seeds_used: u64,
}

impl SearchStats {
    pub fn add(&mut self, other: &SearchStats) {
        self.dist_calcs += other.dist_calcs;
        self.hops += other.hops;
        self.wall_ns += other.wall_ns;
        self.seeds_used += other.seeds_used;
    }
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    dist: f32,
    id: u32,
    expanded: bool,
}

impl Slot {
    #[inline]
    fn key_lt(&self, dist: f32, id: u32) -> bool {
        match self.dist.total_cmp(&dist) {
            Ordering::Less => true,
            Ordering::Equal => self.id < id,
            Ordering::Greater => false,
        }
    }
}

/// Reusable per-thread search state: the candidate buffer and an
/// epoch-stamped visited table.
#[derive(Debug, Default, Clone)]
pub struct BeamScratch {
    stamps: Vec<u32>,
    epoch: u32,
    buf: Vec<Slot>,
}

impl BeamScratch {
    pub fn new(n: usize) -> Self {
        BeamScratch { stamps: vec![0; n], epoch: 0, buf: Vec::new() }
    }

    fn begin(&mut self, n: usize) {
        if self.stamps.len() < n {
            self.stamps.resize(n, 0);
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamps.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.buf.clear();
    }

    /// Marks `id` visited; returns false if it already was.
    #[inline]
    fn visit(&mut self, id: u32) -> bool {
        let s = &mut self.stamps[id as usize];
        if *s == self.epoch {
            false
        } else {
            *s = self.epoch;
            true
        }
    }

    /// Inserts into the sorted buffer, keeping at most `cap`. Returns the
    /// insertion position, or `None` when the entry did not make the cut.
    #[inline]
    fn offer(&mut self, id: u32, dist: f32, cap: usize) -> Option<usize> {
        if self.buf.len() == cap && self.buf[cap - 1].key_lt(dist, id) {
            return None;
        }
        let pos = self.buf.partition_point(|s| s.key_lt(dist, id));
        if self.buf.len() == cap {
            self.buf.pop();
        }
        self.buf.insert(pos, Slot { dist, id, expanded: false });
        Some(pos)
    }
}

/// Output of the raw traversal.
#[derive(Debug, Default, Clone)]
pub struct Traversal {
    /// Final candidate buffer, ascending.
    pub candidates: Vec<Neighbor>,
    /// Expanded nodes in expansion order.
    pub expanded: Vec<Neighbor>,
    pub hops: u64,
}

/// Beam search without argument validation or timing.
///
/// Seeds are assumed in range and are deduplicated here. `counter` sees one
/// call per distinct node evaluated.
pub fn traverse<S: VectorStore + ?Sized>(
    graph: &Graph,
    store: &S,
    seeds: &[u32],
    q: &[f32],
    beam_width: usize,
    scratch: &mut BeamScratch,
    counter: &mut DistanceCounter,
    keep_expanded: bool,
) -> Traversal {
    scratch.begin(graph.len());
    let mut out = Traversal::default();
    for &s in seeds {
        if scratch.visit(s) {
            let d = counter.dist(q, store.vector(s));
            scratch.offer(s, d, beam_width);
        }
    }
    let mut cursor = 0;
    loop {
        while cursor < scratch.buf.len() && scratch.buf[cursor].expanded {
            cursor += 1;
        }
        if cursor == scratch.buf.len() {
            break;
        }
        let cur = &mut scratch.buf[cursor];
        cur.expanded = true;
        let (pid, pdist) = (cur.id, cur.dist);
        out.hops += 1;
        if keep_expanded {
            out.expanded.push(Neighbor { id: pid, dist: pdist });
        }
        let mut next = cursor + 1;
        for &v in graph.neighbors(pid) {
            if !scratch.visit(v) {
                continue;
            }
            let d = counter.dist(q, store.vector(v));
            if let Some(pos) = scratch.offer(v, d, beam_width) {
                next = next.min(pos);
            }
        }
        cursor = next.min(scratch.buf.len());
    }
    out.candidates = scratch.buf.iter().map(|s| Neighbor { id: s.id, dist: s.dist }).collect();
    out
}

fn validate(n: usize, seeds: &[u32], k: usize, beam_width: usize) -> Result<()> {
    if k == 0 || beam_width < k {
        return Err(Error::param(format!("need 1 <= k <= L, got k={k} L={beam_width}")));
    }
    if seeds.is_empty() {
        return Err(Error::param("beam search needs at least one seed"));
    }
    if let Some(bad) = seeds.iter().find(|&&s| s as usize >= n) {
        return Err(Error::param(format!("seed {bad} out of range for {n} nodes")));
    }
    Ok(())
}

/// The `k` best nodes found by a beam of width `beam_width` started at `seeds`.
pub fn beam_search<S: VectorStore + ?Sized>(
    graph: &Graph,
    store: &S,
    seeds: &[u32],
    q: &[f32],
    k: usize,
    beam_width: usize,
) -> Result<(Vec<Neighbor>, SearchStats)> {
    let mut scratch = BeamScratch::new(graph.len());
    beam_search_with(graph, store, seeds, q, k, beam_width, &mut scratch)
}

pub fn beam_search_with<S: VectorStore + ?Sized>(
    graph: &Graph,
    store: &S,
    seeds: &[u32],
    q: &[f32],
    k: usize,
    beam_width: usize,
    scratch: &mut BeamScratch,
) -> Result<(Vec<Neighbor>, SearchStats)> {
    validate(graph.len(), seeds, k, beam_width)?;
    let start = Instant::now();
    let mut counter = DistanceCounter::new();
    let t = traverse(graph, store, seeds, q, beam_width, scratch, &mut counter, false);
    let mut result = t.candidates;
    result.truncate(k);
    let stats = SearchStats {
        dist_calcs: counter.calls(),
        hops: t.hops,
        wall_ns: start.elapsed().as_nanos() as u64,
        seeds_used: seeds.len() as u64,
    };
    Ok((result, stats))
}

/// Seed selection followed by beam search; seed-selection distance calls
/// are included in the returned statistics.
pub fn search_graph(
    graph: &Graph,
    seeds: &SeedIndex,
    ds: &Dataset,
    q: &[f32],
    k: usize,
    beam_width: usize,
    query_seed: u64,
    scratch: &mut BeamScratch,
) -> Result<(Vec<Neighbor>, SearchStats)> {
    let start = Instant::now();
    let mut seed_counter = DistanceCounter::new();
    let entry = seeds.select(graph, ds, q, query_seed, &mut seed_counter);
    let (res, mut stats) = beam_search_with(graph, ds, &entry, q, k, beam_width, scratch)?;
    stats.dist_calcs += seed_counter.calls();
    stats.wall_ns = start.elapsed().as_nanos() as u64;
    Ok((res, stats))
}

/// Probes the `nprobe` partitions whose centroids are closest to `q` and
/// merges their answers into a global top-`k`.
pub fn search_partitioned(
    index: &PartitionedIndex,
    ds: &Dataset,
    q: &[f32],
    k: usize,
    beam_width: usize,
    nprobe: usize,
    query_seed: u64,
) -> Result<(Vec<Neighbor>, SearchStats)> {
    if nprobe == 0 || nprobe > index.len() {
        return Err(Error::param(format!("nprobe must be in 1..={}, got {nprobe}", index.len())));
    }
    if k == 0 || beam_width < k {
        return Err(Error::param(format!("need 1 <= k <= L, got k={k} L={beam_width}")));
    }
    let start = Instant::now();
    let mut counter = DistanceCounter::new();
    let mut ranked: Vec<Neighbor> = index
        .partitions
        .iter()
        .enumerate()
        .map(|(p, part)| Neighbor { id: p as u32, dist: counter.dist(q, &part.centroid) })
        .collect();
    ranked.sort_by(Neighbor::cmp_by_dist);

    let mut stats = SearchStats { dist_calcs: counter.calls(), ..Default::default() };
    let mut merged = Vec::new();
    for (rank, p) in ranked.iter().take(nprobe).enumerate() {
        let part = &index.partitions[p.id as usize];
        let view = index.view(ds, p.id as usize);
        let mut seed_counter = DistanceCounter::new();
        let entry = part.seeds.select(&part.graph, &view, q, derive_seed(query_seed, rank as u64), &mut seed_counter);
        let (res, s) = beam_search(&part.graph, &view, &entry, q, k, beam_width)?;
        stats.add(&s);
        stats.dist_calcs += seed_counter.calls();
        merged.extend(res.into_iter().map(|nb| Neighbor { id: part.members[nb.id as usize], dist: nb.dist }));
    }
    merged.sort_by(Neighbor::cmp_by_dist);
    merged.truncate(k);
    stats.wall_ns = start.elapsed().as_nanos() as u64;
    Ok((merged, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_knn;
    use crate::vecdata::{gen_powerlaw, SyntheticSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::cell::RefCell;
    use std::collections::HashSet;

    fn path_graph() -> (Graph, Dataset) {
        let lists: Vec<Vec<u32>> = (0..5u32)
            .map(|u| [u.wrapping_sub(1), u + 1].into_iter().filter(|&v| v < 5).collect())
            .collect();
        let ds = Dataset::new(5, 1, vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        (Graph::from_lists(&lists, 2).unwrap(), ds)
    }

    #[test]
    fn path_trace() {
        let (g, ds) = path_graph();
        let (res, stats) = beam_search(&g, &ds, &[0], &[4.2], 1, 2).unwrap();
        assert_eq!(res.len(), 1);
        assert_eq!(res[0].id, 4);
        assert_eq!(stats.hops, 5);
        assert_eq!(stats.dist_calcs, 5);

        let mut c = DistanceCounter::new();
        let t = traverse(&g, &ds, &[0], &[4.2], 2, &mut BeamScratch::new(5), &mut c, true);
        assert_eq!(t.expanded.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn complete_graph_is_exact() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 60, d: 5, a: 0.0, seed: 1 }).unwrap();
        let lists: Vec<Vec<u32>> = (0..60u32).map(|u| (0..60).filter(|&v| v != u).collect()).collect();
        let g = Graph::from_lists(&lists, 59).unwrap();
        let q = [0.3, 0.1, 0.9, 0.5, 0.5];
        let (res, _) = beam_search(&g, &ds, &[17], &q, 10, 60).unwrap();
        assert_eq!(res, exact_knn(&ds, &q, 10).unwrap());
    }

    #[test]
    fn parameter_errors() {
        let (g, ds) = path_graph();
        assert!(beam_search(&g, &ds, &[0], &[1.0], 3, 2).is_err());
        assert!(beam_search(&g, &ds, &[], &[1.0], 1, 2).is_err());
        assert!(beam_search(&g, &ds, &[9], &[1.0], 1, 2).is_err());
    }

    /// Store wrapper that records every id whose vector is read.
    struct Spy<'a> {
        ds: &'a Dataset,
        seen: RefCell<Vec<u32>>,
    }

    impl VectorStore for Spy<'_> {
        fn vector(&self, id: u32) -> &[f32] {
            self.seen.borrow_mut().push(id);
            self.ds.row(id as usize)
        }
        fn count(&self) -> usize {
            self.ds.len()
        }
    }

    #[test]
    fn counts_unique_evaluations() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 400, d: 8, a: 0.0, seed: 2 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let lists: Vec<Vec<u32>> = (0..400u32)
            .map(|u| {
                let mut l: Vec<u32> = (0..12).map(|_| rng.random_range(0..400)).filter(|&v| v != u).collect();
                l.sort_unstable();
                l.dedup();
                l
            })
            .collect();
        let g = Graph::from_lists(&lists, 12).unwrap();
        for i in 0..20 {
            let q: Vec<f32> = (0..8).map(|_| rng.random()).collect();
            let spy = Spy { ds: &ds, seen: RefCell::new(Vec::new()) };
            let (_, stats) = beam_search(&g, &spy, &[i, i + 1, i], &q, 5, 20).unwrap();
            let seen = spy.seen.into_inner();
            let unique: HashSet<u32> = seen.iter().copied().collect();
            assert_eq!(seen.len(), unique.len());
            assert_eq!(stats.dist_calcs as usize, unique.len());
            assert!(stats.hops <= stats.dist_calcs);
        }
    }

    #[test]
    fn best_distance_never_worsens() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 300, d: 4, a: 0.0, seed: 5 }).unwrap();
        let lists: Vec<Vec<u32>> = (0..300u32)
            .map(|u| {
                let mut l = vec![(u + 1) % 300, (u * 7 + 3) % 300];
                l.dedup();
                l.retain(|&v| v != u);
                l
            })
            .collect();
        let g = Graph::from_lists(&lists, 2).unwrap();
        let mut c = DistanceCounter::new();
        let t = traverse(&g, &ds, &[0], &[0.5, 0.5, 0.5, 0.5], 8, &mut BeamScratch::new(300), &mut c, true);
        let mut best = f32::INFINITY;
        let mut prev = f32::INFINITY;
        for nb in &t.expanded {
            best = best.min(nb.dist);
            assert!(best <= prev);
            prev = best;
        }
    }
}
