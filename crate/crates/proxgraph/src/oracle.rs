//! Brute-force exact k-NN: the ground truth every recall number is scored against.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metrics::l2_sq;
use crate::search::Neighbor;
use crate::vecdata::{Dataset, QuerySet};

/// The `k` nearest rows of `ds` to `q`, ascending by distance, ties to the smaller id.
pub fn exact_knn(ds: &Dataset, q: &[f32], k: usize) -> Result<Vec<Neighbor>> {
    exact_knn_excluding(ds, q, k, None)
}

/// Like [`exact_knn`] but never returns `exclude`.
pub fn exact_knn_excluding(
    ds: &Dataset,
    q: &[f32],
    k: usize,
    exclude: Option<u32>,
) -> Result<Vec<Neighbor>> {
    if q.len() != ds.dim() {
        return Err(Error::param(format!("query dimension {} != {}", q.len(), ds.dim())));
    }
    let available = ds.len() - usize::from(exclude.is_some_and(|e| (e as usize) < ds.len()));
    if k == 0 || k > available {
        return Err(Error::param(format!("k={k} must be in 1..={available}")));
    }
    let mut all: Vec<Neighbor> = ds
        .rows()
        .enumerate()
        .filter(|&(i, _)| Some(i as u32) != exclude)
        .map(|(i, r)| Neighbor { id: i as u32, dist: l2_sq(q, r).sqrt() })
        .collect();
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, Neighbor::cmp_by_dist);
        all.truncate(k);
    }
    all.sort_unstable_by(Neighbor::cmp_by_dist);
    Ok(all)
}

/// Exact answers for a whole workload.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub k: usize,
    pub rows: Vec<Vec<Neighbor>>,
}

impl GroundTruth {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Neighbor] {
        &self.rows[i]
    }

    /// Writes ids as `ivecs` and distances as `fvecs`, one record per query.
    pub fn save(&self, ids_path: impl AsRef<Path>, dists_path: impl AsRef<Path>) -> Result<()> {
        let mut ids = BufWriter::new(File::create(ids_path.as_ref())?);
        let mut dists = BufWriter::new(File::create(dists_path.as_ref())?);
        self.write(&mut ids, &mut dists)?;
        ids.flush()?;
        dists.flush()?;
        Ok(())
    }

    pub fn write(&self, ids: &mut impl Write, dists: &mut impl Write) -> Result<()> {
        for row in &self.rows {
            ids.write_i32::<LittleEndian>(row.len() as i32)?;
            dists.write_i32::<LittleEndian>(row.len() as i32)?;
            for nb in row {
                ids.write_i32::<LittleEndian>(nb.id as i32)?;
                dists.write_f32::<LittleEndian>(nb.dist)?;
            }
        }
        Ok(())
    }

    pub fn load(ids_path: impl AsRef<Path>, dists_path: impl AsRef<Path>) -> Result<Self> {
        let ids = BufReader::new(File::open(ids_path.as_ref())?);
        let dists = BufReader::new(File::open(dists_path.as_ref())?);
        Self::read(ids, dists)
    }

    pub fn read(mut ids: impl Read, mut dists: impl Read) -> Result<Self> {
        let mut rows = Vec::new();
        let mut k = None;
        loop {
            let kid = match ids.read_i32::<LittleEndian>() {
                Ok(v) => v,
                Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(e.into()),
            };
            let kd = dists.read_i32::<LittleEndian>()?;
            if kid <= 0 || kid != kd || k.is_some_and(|k| k != kid as usize) {
                return Err(Error::Format(format!(
                    "ground-truth record {}: headers {kid}/{kd} inconsistent",
                    rows.len()
                )));
            }
            k = Some(kid as usize);
            let mut row = Vec::with_capacity(kid as usize);
            for _ in 0..kid {
                let id = ids.read_i32::<LittleEndian>()?;
                let dist = dists.read_f32::<LittleEndian>()?;
                if id < 0 {
                    return Err(Error::Format(format!("negative id {id} in ground truth")));
                }
                row.push(Neighbor { id: id as u32, dist });
            }
            rows.push(row);
        }
        let mut probe = [0u8; 1];
        if dists.read(&mut probe)? != 0 {
            return Err(Error::Format("distance file has more records than id file".into()));
        }
        let k = k.ok_or_else(|| Error::Format("empty ground-truth files".into()))?;
        Ok(GroundTruth { k, rows })
    }
}

pub fn ground_truth(ds: &Dataset, qs: &QuerySet, k: usize) -> Result<GroundTruth> {
    qs.check_dim(ds)?;
    let rows = (0..qs.len())
        .into_par_iter()
        .map(|i| exact_knn(ds, qs.query(i), k))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroundTruth { k, rows })
}

/// The exact k-NN graph of `ds`: row `i` lists the `k` nearest other rows.
pub fn knn_graph_truth(ds: &Dataset, k: usize) -> Result<GroundTruth> {
    let rows = (0..ds.len())
        .into_par_iter()
        .map(|i| exact_knn_excluding(ds, ds.row(i), k, Some(i as u32)))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroundTruth { k, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{euclidean, DistanceCounter};
    use crate::vecdata::{gen_powerlaw, sample_ids, Provenance, SyntheticSpec};
    use std::collections::BinaryHeap;

    /// Second scan: bounded max-heap over (squared f64 distance, id), walking rows backwards.
    fn heap_knn(ds: &Dataset, q: &[f32], k: usize) -> Vec<u32> {
        let mut heap: BinaryHeap<(u64, u32)> = BinaryHeap::new();
        for i in (0..ds.len()).rev() {
            let d = ds.row(i).iter().zip(q).map(|(&a, &b)| ((a - b) * (a - b)) as f64).sum::<f64>();
            // Non-negative floats order like their bit patterns.
            heap.push(((d as f32).to_bits() as u64, i as u32));
            if heap.len() > k {
                heap.pop();
            }
        }
        let mut v = heap.into_sorted_vec();
        v.sort();
        v.into_iter().map(|(_, id)| id).collect()
    }

    #[test]
    fn tiny_line() {
        let ds = Dataset::new(3, 2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0]).unwrap();
        let r = exact_knn(&ds, &[0.6, 0.0], 1).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].id, 1);
        assert!((r[0].dist - 0.4).abs() < 1e-6);
        let all = exact_knn(&ds, &[0.6, 0.0], 3).unwrap();
        assert_eq!(all.iter().map(|n| n.id).collect::<Vec<_>>(), vec![1, 0, 2]);
        assert!(exact_knn(&ds, &[0.6, 0.0], 4).is_err());
    }

    #[test]
    fn ties_break_by_id() {
        let ds = Dataset::new(4, 1, vec![1.0, -1.0, 1.0, -1.0]).unwrap();
        let r = exact_knn(&ds, &[0.0], 3).unwrap();
        assert_eq!(r.iter().map(|n| n.id).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn matches_independent_scan() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 500, d: 16, a: 0.0, seed: 3 }).unwrap();
        let qs = gen_powerlaw(&SyntheticSpec { n: 20, d: 16, a: 0.0, seed: 4 }).unwrap();
        let mut c = DistanceCounter::new();
        for q in qs.rows() {
            let got = exact_knn(&ds, q, 10).unwrap();
            assert_eq!(got.iter().map(|n| n.id).collect::<Vec<_>>(), heap_knn(&ds, q, 10));
            for w in got.windows(2) {
                assert!(w[0].dist <= w[1].dist);
            }
            for nb in &got {
                let d = euclidean(q, ds.row(nb.id as usize), &mut c).unwrap();
                assert!((nb.dist - d).abs() <= 1e-5 * d.max(1e-12));
            }
        }
    }

    #[test]
    fn table_rows_and_roundtrip() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 8, a: 0.0, seed: 1 }).unwrap();
        let qs = gen_powerlaw(&SyntheticSpec { n: 100, d: 8, a: 0.0, seed: 2 }).unwrap();
        let qs = QuerySet::new(qs, Provenance::Synthetic { a: 0.0 });
        let gt = ground_truth(&ds, &qs, 10).unwrap();
        assert_eq!(gt.len(), 100);
        for i in sample_ids(100, 5, 77).unwrap() {
            let i = i as usize;
            assert_eq!(gt.row(i), exact_knn(&ds, qs.query(i), 10).unwrap().as_slice());
        }

        let one = QuerySet::new(qs.vectors.select(&[0]).unwrap(), Provenance::File);
        let gt1 = ground_truth(&ds, &one, 10).unwrap();
        assert_eq!(gt1.row(0), gt.row(0));

        let (mut ids, mut dists) = (Vec::new(), Vec::new());
        gt.write(&mut ids, &mut dists).unwrap();
        let back = GroundTruth::read(ids.as_slice(), dists.as_slice()).unwrap();
        assert_eq!(back, gt);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let ds = Dataset::new(2, 2, vec![0.0; 4]).unwrap();
        let qs = QuerySet::new(Dataset::new(1, 3, vec![0.0; 3]).unwrap(), Provenance::File);
        assert!(matches!(ground_truth(&ds, &qs, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn self_excluded_truth() {
        let ds = Dataset::new(4, 1, vec![0.0, 1.0, 3.0, 7.0]).unwrap();
        let gt = knn_graph_truth(&ds, 1).unwrap();
        let ids: Vec<u32> = gt.rows.iter().map(|r| r[0].id).collect();
        assert_eq!(ids, vec![1, 0, 1, 2]);
    }
}
