//! Capped-degree directed proximity graph.

use std::collections::VecDeque;
use std::io::{Read, Write};

use crate::codec::*;
use crate::error::{Error, Result};
use crate::seeds::SeedIndex;
use crate::vecdata::Dataset;

/// Directed graph over nodes `0..n` with out-degree at most `max_degree`.
///
/// Adjacency lives in one flat array with a fixed stride of `max_degree`
/// slots per node plus an explicit length per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    max_degree: usize,
    lens: Vec<u32>,
    slots: Vec<u32>,
}

impl Graph {
    pub fn new(n: usize, max_degree: usize) -> Self {
        Graph { max_degree, lens: vec![0; n], slots: vec![0; n * max_degree] }
    }

    /// Builds a graph from explicit adjacency lists, checking every invariant.
    pub fn from_lists(lists: &[Vec<u32>], max_degree: usize) -> Result<Self> {
        let mut g = Graph::new(lists.len(), max_degree);
        for (u, l) in lists.iter().enumerate() {
            g.set_neighbors(u as u32, l)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.lens.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.lens.is_empty()
    }

    #[inline]
    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    #[inline]
    pub fn neighbors(&self, u: u32) -> &[u32] {
        let u = u as usize;
        let start = u * self.max_degree;
        &self.slots[start..start + self.lens[u] as usize]
    }

    #[inline]
    pub fn degree(&self, u: u32) -> usize {
        self.lens[u as usize] as usize
    }

    pub fn edge_count(&self) -> usize {
        self.lens.iter().map(|&l| l as usize).sum()
    }

    /// Replaces the out-list of `u`.
    pub fn set_neighbors(&mut self, u: u32, list: &[u32]) -> Result<()> {
        let n = self.len();
        if list.len() > self.max_degree {
            return Err(Error::param(format!(
                "node {u}: {} neighbors exceed cap {}",
                list.len(),
                self.max_degree
            )));
        }
        for (i, &v) in list.iter().enumerate() {
            if v == u || v as usize >= n || list[..i].contains(&v) {
                return Err(Error::param(format!("node {u}: invalid neighbor {v}")));
            }
        }
        let start = u as usize * self.max_degree;
        let row = &mut self.slots[start..start + self.max_degree];
        row[..list.len()].copy_from_slice(list);
        row[list.len()..].fill(0);
        self.lens[u as usize] = list.len() as u32;
        Ok(())
    }

    /// Appends `u -> v` if there is room and the arc is new. Returns whether
    /// the list now contains `v`.
    pub fn try_push(&mut self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        if self.neighbors(u).contains(&v) {
            return true;
        }
        let len = self.lens[u as usize] as usize;
        if len == self.max_degree {
            return false;
        }
        self.slots[u as usize * self.max_degree + len] = v;
        self.lens[u as usize] += 1;
        true
    }

    /// Nodes reachable from any of `sources` along directed arcs (sources included).
    pub fn reachable_count(&self, sources: &[u32]) -> usize {
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !seen[s as usize] {
                seen[s as usize] = true;
                queue.push_back(s);
            }
        }
        let mut count = queue.len();
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count
    }

    pub fn reachable_fraction(&self, entry: u32) -> f64 {
        self.reachable_count(&[entry]) as f64 / self.len() as f64
    }

    pub fn degree_stats(&self) -> DegreeStats {
        if self.is_empty() {
            return DegreeStats { min: 0, mean: 0.0, max: 0 };
        }
        let min = self.lens.iter().copied().min().unwrap_or(0) as usize;
        let max = self.lens.iter().copied().max().unwrap_or(0) as usize;
        DegreeStats { min, mean: self.edge_count() as f64 / self.len() as f64, max }
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        put_u64(w, self.len() as u64)?;
        put_u32(w, self.max_degree as u32)?;
        for u in 0..self.len() as u32 {
            let nb = self.neighbors(u);
            put_u32(w, nb.len() as u32)?;
            for &v in nb {
                put_u32(w, v)?;
            }
        }
        Ok(())
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let n = get_u64(r)? as usize;
        let max_degree = get_u32(r)? as usize;
        if n.checked_mul(max_degree).is_none_or(|s| s > 1 << 34) {
            return Err(Error::Format(format!("implausible graph shape {n}x{max_degree}")));
        }
        let mut g = Graph::new(n, max_degree);
        let mut buf = Vec::with_capacity(max_degree);
        for u in 0..n as u32 {
            let len = get_u32(r)? as usize;
            if len > max_degree {
                return Err(Error::Format(format!("node {u}: degree {len} over cap {max_degree}")));
            }
            buf.clear();
            for _ in 0..len {
                buf.push(get_u32(r)?);
            }
            g.set_neighbors(u, &buf).map_err(|e| Error::Format(e.to_string()))?;
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    pub min: usize,
    pub mean: f64,
    pub max: usize,
}

/// One cell of a divide-and-conquer index.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Local id -> global id, ascending.
    pub members: Vec<u32>,
    pub centroid: Vec<f32>,
    /// Graph over local ids.
    pub graph: Graph,
    pub seeds: SeedIndex,
}

/// Disjoint partitions of a dataset, each with its own graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedIndex {
    pub partitions: Vec<Partition>,
    /// Global id -> (partition, local id).
    pub locate: Vec<(u32, u32)>,
}

impl PartitionedIndex {
    pub fn new(partitions: Vec<Partition>, n: usize) -> Result<Self> {
        let mut locate = vec![(u32::MAX, u32::MAX); n];
        for (p, part) in partitions.iter().enumerate() {
            if part.members.is_empty() {
                return Err(Error::param(format!("partition {p} is empty")));
            }
            if part.graph.len() != part.members.len() {
                return Err(Error::param(format!("partition {p}: graph size mismatch")));
            }
            for (local, &g) in part.members.iter().enumerate() {
                let slot = locate
                    .get_mut(g as usize)
                    .ok_or_else(|| Error::param(format!("member {g} out of range")))?;
                if slot.0 != u32::MAX {
                    return Err(Error::param(format!("id {g} appears in two partitions")));
                }
                *slot = (p as u32, local as u32);
            }
        }
        if let Some(missing) = locate.iter().position(|s| s.0 == u32::MAX) {
            return Err(Error::param(format!("id {missing} is not covered by any partition")));
        }
        Ok(PartitionedIndex { partitions, locate })
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    /// View of one partition's vectors addressed by local id.
    pub fn view<'a>(&'a self, ds: &'a Dataset, p: usize) -> SubsetView<'a> {
        SubsetView { ds, members: &self.partitions[p].members }
    }
}

/// Anything that maps node ids to vectors.
pub trait VectorStore {
    fn vector(&self, id: u32) -> &[f32];
    fn count(&self) -> usize;
}

impl VectorStore for Dataset {
    #[inline]
    fn vector(&self, id: u32) -> &[f32] {
        self.row(id as usize)
    }

    fn count(&self) -> usize {
        self.len()
    }
}

/// Rows of a dataset re-addressed through a local-to-global id list.
#[derive(Debug, Clone, Copy)]
pub struct SubsetView<'a> {
    pub ds: &'a Dataset,
    pub members: &'a [u32],
}

impl VectorStore for SubsetView<'_> {
    #[inline]
    fn vector(&self, id: u32) -> &[f32] {
        self.ds.row(self.members[id as usize] as usize)
    }

    fn count(&self) -> usize {
        self.members.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete(n: u32) -> Graph {
        let lists: Vec<Vec<u32>> = (0..n).map(|u| (0..n).filter(|&v| v != u).collect()).collect();
        Graph::from_lists(&lists, n as usize - 1).unwrap()
    }

    #[test]
    fn reachability() {
        assert_eq!(complete(6).reachable_fraction(3), 1.0);

        let mut lists = vec![Vec::new(); 10];
        for base in [0u32, 5] {
            for u in base..base + 5 {
                lists[u as usize] = (base..base + 5).filter(|&v| v != u).collect();
            }
        }
        let g = Graph::from_lists(&lists, 4).unwrap();
        assert_eq!(g.reachable_fraction(2), 0.5);
        assert_eq!(g.reachable_count(&[2, 7]), 10);
    }

    #[test]
    fn degree_aggregates() {
        assert_eq!(Graph::new(0, 4).degree_stats(), DegreeStats { min: 0, mean: 0.0, max: 0 });
        let mut lists = vec![Vec::new(); 5];
        lists[0] = vec![1, 2, 3, 4];
        let s = Graph::from_lists(&lists, 4).unwrap().degree_stats();
        assert_eq!((s.min, s.max), (0, 4));
        assert!((s.mean - 0.8).abs() < 1e-12);
    }

    #[test]
    fn invariants_enforced() {
        let mut g = Graph::new(3, 2);
        assert!(g.set_neighbors(0, &[0]).is_err());
        assert!(g.set_neighbors(0, &[1, 1]).is_err());
        assert!(g.set_neighbors(0, &[1, 2, 1]).is_err());
        assert!(g.set_neighbors(0, &[3]).is_err());
        assert!(g.try_push(0, 1));
        assert!(g.try_push(0, 1));
        assert!(g.try_push(0, 2));
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert!(!g.try_push(1, 1));
        g.set_neighbors(1, &[2, 0]).unwrap();
        assert!(!g.try_push(1, 0) || g.neighbors(1).contains(&0));
    }

    #[test]
    fn serialization_keeps_order() {
        let g = Graph::from_lists(&[vec![2, 1], vec![], vec![0]], 3).unwrap();
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        assert_eq!(Graph::read_from(&mut buf.as_slice()).unwrap(), g);
    }
}
