//! Neighborhood diversification: geometric rules that thin a node's
//! distance-sorted candidate list down to at most `R` neighbors.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::VectorStore;
use crate::metrics::DistanceCounter;
use crate::search::Neighbor;

/// Which diversification rule to apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NdStrategy {
    /// Keep the `R` closest candidates.
    NoNd,
    /// Keep `j` iff `d(q,j) < d(i,j)` for every kept `i`.
    Rnd,
    /// Keep `j` iff `d(q,j) < alpha * d(i,j)` for every kept `i`.
    Rrnd { alpha: f32 },
    /// Keep `j` iff the angle `i-q-j` exceeds `theta_deg` for every kept `i`.
    Mond { theta_deg: f32 },
}

impl NdStrategy {
    pub fn rrnd(alpha: f32) -> Result<Self> {
        if !(alpha >= 1.0) || !alpha.is_finite() {
            return Err(Error::param(format!("RRND alpha must be >= 1, got {alpha}")));
        }
        Ok(NdStrategy::Rrnd { alpha })
    }

    pub fn mond(theta_deg: f32) -> Result<Self> {
        if !(theta_deg >= 60.0) || theta_deg >= 180.0 {
            return Err(Error::param(format!("MOND theta must be in [60, 180), got {theta_deg}")));
        }
        Ok(NdStrategy::Mond { theta_deg })
    }

    /// Short tag used in index headers and CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            NdStrategy::NoNd => "nond",
            NdStrategy::Rnd => "rnd",
            NdStrategy::Rrnd { .. } => "rrnd",
            NdStrategy::Mond { .. } => "mond",
        }
    }

    /// Whether an already-kept neighbor `i` blocks candidate `j`, given
    /// `d(q,j)`, `d(q,i)` and `d(i,j)`. Ties count as blocked.
    #[inline]
    pub fn blocks(&self, q_to_j: f32, q_to_i: f32, i_to_j: f32) -> bool {
        match *self {
            NdStrategy::NoNd => false,
            NdStrategy::Rnd => !(q_to_j < i_to_j),
            NdStrategy::Rrnd { alpha } => !(q_to_j < alpha * i_to_j),
            NdStrategy::Mond { theta_deg } => {
                let (a, b, c) = (q_to_i as f64, q_to_j as f64, i_to_j as f64);
                if a == 0.0 || b == 0.0 {
                    return true;
                }
                // Law of cosines at the center q. Angles within 1e-12 (in
                // cosine) of theta count as equal, so exact ties reject.
                let cos = (a * a + b * b - c * c) / (2.0 * a * b);
                !(cos < (theta_deg as f64).to_radians().cos() - 1e-12)
            }
        }
    }
}

impl fmt::Display for NdStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NdStrategy::Rrnd { alpha } => write!(f, "rrnd:alpha={alpha}"),
            NdStrategy::Mond { theta_deg } => write!(f, "mond:theta={theta_deg}"),
            other => f.write_str(other.tag()),
        }
    }
}

impl FromStr for NdStrategy {
    type Err = Error;

    /// Parses `nond`, `rnd`, `rrnd[:alpha=A]` or `mond[:theta=T]`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let value = |key: &str, default: f32| -> Result<f32> {
            if args.is_empty() {
                return Ok(default);
            }
            let (k, v) = args
                .split_once('=')
                .ok_or_else(|| Error::param(format!("expected {key}=<value> in '{s}'")))?;
            if k != key {
                return Err(Error::param(format!("unknown option '{k}' in '{s}'")));
            }
            v.parse().map_err(|_| Error::param(format!("bad number '{v}' in '{s}'")))
        };
        match kind {
            "nond" if args.is_empty() => Ok(NdStrategy::NoNd),
            "rnd" if args.is_empty() => Ok(NdStrategy::Rnd),
            "rrnd" => NdStrategy::rrnd(value("alpha", 1.3)?),
            "mond" => NdStrategy::mond(value("theta", 60.0)?),
            _ => Err(Error::param(format!("unknown diversification strategy '{s}'"))),
        }
    }
}

/// Greedy diversification of `candidates` (ascending by distance to `center`).
///
/// Scans in order and keeps a candidate iff no already-kept node blocks it,
/// stopping once `max_degree` are kept. Every inter-candidate distance goes
/// through `counter`.
pub fn prune<S: VectorStore + ?Sized>(
    candidates: &[Neighbor],
    max_degree: usize,
    strategy: NdStrategy,
    store: &S,
    counter: &mut DistanceCounter,
) -> Result<Vec<Neighbor>> {
    if cfg!(debug_assertions) && candidates.windows(2).any(|w| w[0].dist > w[1].dist) {
        return Err(Error::param("prune candidates must be sorted by distance"));
    }
    let mut kept: Vec<Neighbor> = Vec::with_capacity(max_degree.min(candidates.len()));
    if let NdStrategy::NoNd = strategy {
        kept.extend(candidates.iter().take(max_degree).copied());
        return Ok(kept);
    }
    for cand in candidates {
        if kept.len() == max_degree {
            break;
        }
        let v = store.vector(cand.id);
        let blocked = kept.iter().any(|k| {
            let i_to_j = counter.dist(store.vector(k.id), v);
            strategy.blocks(cand.dist, k.dist, i_to_j)
        });
        if !blocked {
            kept.push(*cand);
        }
    }
    Ok(kept)
}

/// Fractional shrinkage of a candidate list: `(candidates - kept) / candidates`.
pub fn pruning_ratio(candidate_count: usize, kept_count: usize) -> Result<f64> {
    if candidate_count == 0 {
        return Err(Error::param("pruning ratio undefined for an empty candidate list"));
    }
    if kept_count > candidate_count {
        return Err(Error::param(format!("kept {kept_count} exceeds candidates {candidate_count}")));
    }
    Ok((candidate_count - kept_count) as f64 / candidate_count as f64)
}

/// Running totals over many prune calls.
#[derive(Debug, Default, Clone, Copy, PartialEq)]
pub struct PruneStats {
    pub calls: u64,
    pub candidates: u64,
    pub kept: u64,
    ratio_sum: f64,
}

impl PruneStats {
    pub fn record(&mut self, candidate_count: usize, kept_count: usize) {
        if let Ok(r) = pruning_ratio(candidate_count, kept_count) {
            self.calls += 1;
            self.candidates += candidate_count as u64;
            self.kept += kept_count as u64;
            self.ratio_sum += r;
        }
    }

    /// Mean of the per-call ratios.
    pub fn mean_ratio(&self) -> f64 {
        if self.calls == 0 {
            0.0
        } else {
            self.ratio_sum / self.calls as f64
        }
    }

    /// Ratio of the summed list sizes.
    pub fn corpus_ratio(&self) -> f64 {
        if self.candidates == 0 {
            0.0
        } else {
            (self.candidates - self.kept) as f64 / self.candidates as f64
        }
    }

    pub fn merge(&mut self, other: &PruneStats) {
        self.calls += other.calls;
        self.candidates += other.candidates;
        self.kept += other.kept;
        self.ratio_sum += other.ratio_sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::l2_sq;
    use crate::vecdata::Dataset;
    use proptest::prelude::*;

    /// Center at row 0, candidates at rows 1.. (already sorted by the caller).
    fn run(points: &[[f32; 2]], strategy: NdStrategy) -> Vec<u32> {
        let ds = Dataset::from_rows(points).unwrap();
        let cands: Vec<Neighbor> = (1..points.len() as u32)
            .map(|id| Neighbor { id, dist: l2_sq(ds.row(0), ds.row(id as usize)).sqrt() })
            .collect();
        let mut c = DistanceCounter::new();
        prune(&cands, 10, strategy, &ds, &mut c).unwrap().iter().map(|n| n.id).collect()
    }

    fn polar(deg: f32, r: f32) -> [f32; 2] {
        let t = deg.to_radians();
        [r * t.cos(), r * t.sin()]
    }

    #[test]
    fn worked_geometry() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.2, 0.9], [-2.0, 0.0]];
        assert_eq!(run(&pts, NdStrategy::Rnd), vec![1, 3]);
        assert_eq!(run(&pts, NdStrategy::rrnd(2.0).unwrap()), vec![1, 2, 3]);
        assert_eq!(run(&pts, NdStrategy::NoNd), vec![1, 2, 3]);

        let pts = [[0.0, 0.0], [1.0, 0.0], polar(50.0, 1.2), polar(70.0, 1.3)];
        assert_eq!(run(&pts, NdStrategy::mond(60.0).unwrap()), vec![1, 3]);
    }

    #[test]
    fn first_candidate_always_kept() {
        for s in [NdStrategy::NoNd, NdStrategy::Rnd, NdStrategy::Rrnd { alpha: 1.5 }, NdStrategy::Mond { theta_deg: 90.0 }] {
            assert_eq!(run(&[[0.0, 0.0], [5.0, 5.0]], s), vec![1]);
        }
    }

    #[test]
    fn unsorted_rejected_and_cap_respected() {
        let ds = Dataset::from_rows(&[[0.0f32], [1.0], [2.0], [3.0]]).unwrap();
        let mut c = DistanceCounter::new();
        let bad = [Neighbor { id: 2, dist: 2.0 }, Neighbor { id: 1, dist: 1.0 }];
        assert!(prune(&bad, 4, NdStrategy::Rnd, &ds, &mut c).is_err());
        let good = [Neighbor { id: 1, dist: 1.0 }, Neighbor { id: 2, dist: 2.0 }, Neighbor { id: 3, dist: 3.0 }];
        assert_eq!(prune(&good, 2, NdStrategy::NoNd, &ds, &mut c).unwrap().len(), 2);
        assert_eq!(c.calls(), 0);
    }

    #[test]
    fn boundary_ties_reject() {
        assert!(NdStrategy::Rnd.blocks(1.0, 0.5, 1.0));
        assert!(NdStrategy::Rrnd { alpha: 2.0 }.blocks(2.0, 0.5, 1.0));
        // Equilateral triangle: the angle is exactly 60 degrees.
        assert!(NdStrategy::Mond { theta_deg: 60.0 }.blocks(1.0, 1.0, 1.0));
        assert!(NdStrategy::Mond { theta_deg: 60.0 }.blocks(1.0, 0.0, 1.0));
    }

    #[test]
    fn parsing() {
        assert_eq!("nond".parse::<NdStrategy>().unwrap(), NdStrategy::NoNd);
        assert_eq!("rnd".parse::<NdStrategy>().unwrap(), NdStrategy::Rnd);
        assert_eq!("rrnd:alpha=1.3".parse::<NdStrategy>().unwrap(), NdStrategy::Rrnd { alpha: 1.3 });
        assert_eq!("mond:theta=60".parse::<NdStrategy>().unwrap(), NdStrategy::Mond { theta_deg: 60.0 });
        assert!("rrnd:alpha=0.5".parse::<NdStrategy>().is_err());
        assert!("mond:theta=45".parse::<NdStrategy>().is_err());
        assert!("rnd:alpha=2".parse::<NdStrategy>().is_err());
        assert!("hnsw".parse::<NdStrategy>().is_err());
        for s in ["nond", "rnd", "rrnd:alpha=1.3", "mond:theta=72.5"] {
            assert_eq!(s.parse::<NdStrategy>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn ratios() {
        assert!((pruning_ratio(100, 80).unwrap() - 0.2).abs() < 1e-12);
        assert_eq!(pruning_ratio(100, 100).unwrap(), 0.0);
        assert!(pruning_ratio(0, 0).is_err());
        assert!(pruning_ratio(3, 4).is_err());

        let mut s = PruneStats::default();
        s.record(10, 5);
        s.record(30, 30);
        assert!((s.mean_ratio() - 0.25).abs() < 1e-12);
        assert!((s.corpus_ratio() - 0.125).abs() < 1e-12);
    }

    fn sorted_instance(raw: Vec<Vec<f32>>) -> (Dataset, Vec<Neighbor>) {
        let ds = Dataset::from_rows(&raw).unwrap();
        let mut cands: Vec<Neighbor> = (1..raw.len() as u32)
            .map(|id| Neighbor { id, dist: l2_sq(ds.row(0), ds.row(id as usize)).sqrt() })
            .filter(|n| n.dist > 0.0)
            .collect();
        cands.sort_by(Neighbor::cmp_by_dist);
        (ds, cands)
    }

    #[test]
    fn wide_mond_rejects_what_rnd_keeps() {
        // Right angle at q, equal legs: j is nearer to q than to i.
        let (a, b, c) = (1.0f32, 1.0f32, 2f32.sqrt());
        assert!(!NdStrategy::Rnd.blocks(b, a, c));
        assert!(NdStrategy::Mond { theta_deg: 100.0 }.blocks(b, a, c));
    }

    proptest! {
        #[test]
        fn output_is_capped_subsequence(
            raw in prop::collection::vec(prop::collection::vec(-5.0f32..5.0, 3), 2..40),
            cap in 1usize..12,
            which in 0usize..4,
        ) {
            let (ds, cands) = sorted_instance(raw);
            let s = [NdStrategy::NoNd, NdStrategy::Rnd, NdStrategy::Rrnd { alpha: 1.3 }, NdStrategy::Mond { theta_deg: 60.0 }][which];
            let mut c = DistanceCounter::new();
            let kept = prune(&cands, cap, s, &ds, &mut c).unwrap();
            prop_assert!(kept.len() <= cap);
            let mut it = cands.iter();
            for k in &kept {
                prop_assert!(it.any(|c| c == k));
            }
            let again = prune(&cands, cap, s, &ds, &mut DistanceCounter::new()).unwrap();
            prop_assert_eq!(kept, again);
        }

        #[test]
        fn alpha_one_is_rnd(raw in prop::collection::vec(prop::collection::vec(-5.0f32..5.0, 4), 2..40)) {
            let (ds, cands) = sorted_instance(raw);
            let mut c = DistanceCounter::new();
            let a = prune(&cands, 16, NdStrategy::Rnd, &ds, &mut c).unwrap();
            let b = prune(&cands, 16, NdStrategy::Rrnd { alpha: 1.0 }, &ds, &mut c).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn relaxed_rules_never_reject_more(
            a in 0.01f32..10.0, extra in 0.0f32..10.0, angle in 0.0f64..180.0,
            alpha in 1.0f32..3.0, theta in 1.0f32..=60.0,
        ) {
            // d(q,i) = a <= d(q,j) = b, angle at q between them. The MOND
            // implication only holds up to 60 degrees.
            let b = a + extra;
            let c = ((a as f64).powi(2) + (b as f64).powi(2)
                - 2.0 * a as f64 * b as f64 * angle.to_radians().cos()).max(0.0).sqrt() as f32;
            let rnd = NdStrategy::Rnd.blocks(b, a, c);
            if (NdStrategy::Rrnd { alpha }).blocks(b, a, c) {
                prop_assert!(rnd);
            }
            if (NdStrategy::Mond { theta_deg: theta }).blocks(b, a, c) {
                prop_assert!(rnd);
            }
        }
    }
}
