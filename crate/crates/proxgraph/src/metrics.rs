//! Euclidean distance with call counting, and the LID / LRC hardness measures.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle;
use crate::vecdata::{Dataset, QuerySet};

/// Squared Euclidean distance. Uncounted; callers go through a
/// [`DistanceCounter`] whenever the evaluation must show up in statistics.
#[inline]
pub fn l2_sq(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0f32; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for i in 0..8 {
            let t = x[i] - y[i];
            acc[i] += t * t;
        }
    }
    let mut sum: f32 = acc.iter().sum();
    for (x, y) in ca.remainder().iter().zip(cb.remainder()) {
        let t = x - y;
        sum += t * t;
    }
    sum
}

/// Counts full distance evaluations.
///
/// Each worker owns one; per-worker counters are combined with [`merge`](Self::merge).
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DistanceCounter {
    calls: u64,
}

impl DistanceCounter {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn reset(&mut self) {
        self.calls = 0;
    }

    pub fn merge(&mut self, other: &DistanceCounter) {
        self.calls += other.calls;
    }

    /// Euclidean distance between equal-length vectors, counted once.
    #[inline]
    pub fn dist(&mut self, a: &[f32], b: &[f32]) -> f32 {
        self.calls += 1;
        l2_sq(a, b).sqrt()
    }
}

/// Dimension-checked Euclidean distance.
pub fn euclidean(a: &[f32], b: &[f32], counter: &mut DistanceCounter) -> Result<f32> {
    if a.len() != b.len() {
        return Err(Error::param(format!("dimension mismatch: {} vs {}", a.len(), b.len())));
    }
    Ok(counter.dist(a, b))
}

/// Local intrinsic dimensionality from the `k` ascending nearest-neighbor
/// distances of a point: `-(1/k * sum ln(d_i / d_k))^-1`, natural log.
///
/// Returns `f64::INFINITY` when every distance equals the k-th one.
pub fn lid(sorted_dists: &[f32], k: usize) -> Result<f64> {
    if k < 2 {
        return Err(Error::param(format!("LID needs k >= 2, got {k}")));
    }
    if sorted_dists.len() < k {
        return Err(Error::param(format!("LID needs {k} distances, got {}", sorted_dists.len())));
    }
    let dists = &sorted_dists[..k];
    if let Some(bad) = dists.iter().find(|&&d| !(d > 0.0)) {
        return Err(Error::param(format!("LID needs positive distances, got {bad}")));
    }
    if dists.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::param("LID distances must be ascending"));
    }
    let kth = dists[k - 1] as f64;
    let sum: f64 = dists.iter().map(|&d| (d as f64 / kth).ln()).sum();
    if sum == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-(k as f64) / sum)
}

/// Local relative contrast: mean distance over k-th nearest distance.
pub fn lrc(mean_dist: f64, kth_dist: f64) -> Result<f64> {
    if !(kth_dist > 0.0) {
        return Err(Error::param(format!("LRC needs a positive k-th distance, got {kth_dist}")));
    }
    Ok(mean_dist / kth_dist)
}

/// Per-query hardness of one query against a dataset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryHardness {
    pub lid: f64,
    pub lrc: f64,
}

/// Exact LID and LRC of one query. `None` when the query coincides with a
/// data point (nearest distance 0), which both measures cannot handle.
pub fn query_hardness(ds: &Dataset, q: &[f32], k: usize) -> Result<Option<QueryHardness>> {
    if q.len() != ds.dim() {
        return Err(Error::param(format!("query dimension {} != {}", q.len(), ds.dim())));
    }
    let all: Vec<f32> = ds.rows().map(|r| l2_sq(q, r).sqrt()).collect();
    let mean = all.iter().map(|&d| d as f64).sum::<f64>() / all.len() as f64;
    let knn = oracle::exact_knn(ds, q, k)?;
    if knn[0].dist <= 0.0 {
        return Ok(None);
    }
    let dists: Vec<f32> = knn.iter().map(|nb| nb.dist).collect();
    Ok(Some(QueryHardness { lid: lid(&dists, k)?, lrc: lrc(mean, dists[k - 1] as f64)? }))
}

/// Workload-level averages of LID and LRC.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complexity {
    pub mean_lid: f64,
    pub mean_lrc: f64,
    /// Queries that coincide with a data point and were skipped entirely.
    pub skipped_queries: usize,
    /// Queries whose LID was infinite and left out of `mean_lid`.
    pub infinite_lid: usize,
}

impl Complexity {
    /// Total number of queries missing from the LID mean.
    pub fn excluded(&self) -> usize {
        self.skipped_queries + self.infinite_lid
    }
}

pub fn dataset_complexity(ds: &Dataset, queries: &QuerySet, k: usize) -> Result<Complexity> {
    queries.check_dim(ds)?;
    let per_query: Vec<Option<QueryHardness>> = (0..queries.len())
        .into_par_iter()
        .map(|i| query_hardness(ds, queries.query(i), k))
        .collect::<Result<_>>()?;

    let mut skipped = 0;
    let mut infinite = 0;
    let (mut lid_sum, mut lid_n) = (0.0, 0usize);
    let (mut lrc_sum, mut lrc_n) = (0.0, 0usize);
    for h in per_query {
        let Some(h) = h else {
            skipped += 1;
            continue;
        };
        if h.lid.is_finite() {
            lid_sum += h.lid;
            lid_n += 1;
        } else {
            infinite += 1;
        }
        lrc_sum += h.lrc;
        lrc_n += 1;
    }
    let mean = |s: f64, c: usize| if c == 0 { f64::NAN } else { s / c as f64 };
    Ok(Complexity {
        mean_lid: mean(lid_sum, lid_n),
        mean_lrc: mean(lrc_sum, lrc_n),
        skipped_queries: skipped,
        infinite_lid: infinite,
    })
}
