//! Vector datasets and query workloads: the SIFT-style `*vecs` containers,
//! raw float dumps, and seeded synthetic generators.

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;
use std::str::FromStr;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

/// Dense row-major matrix of `n` vectors with `d` single-precision coordinates.
///
/// Row `i` is the point with id `i`. Construction rejects empty matrices and
/// non-finite values, so downstream code never has to.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    values: Vec<f32>,
}

impl Dataset {
    pub fn new(n: usize, d: usize, values: Vec<f32>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::param(format!("dataset must be non-empty, got n={n} d={d}")));
        }
        if values.len() != n * d {
            return Err(Error::param(format!(
                "expected {} values for {n}x{d}, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!(
                "non-finite value {} at row {} column {}",
                values[pos],
                pos / d,
                pos % d
            )));
        }
        Ok(Dataset { n, d, values })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(Error::param(format!("row {i} has dimension {}, expected {d}", row.len())));
            }
            values.extend_from_slice(row);
        }
        Dataset::new(rows.len(), d, values)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.values.chunks_exact(self.d)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Copies the listed rows, in the given order, into a new dataset.
    pub fn select(&self, ids: &[u32]) -> Result<Dataset> {
        let mut values = Vec::with_capacity(ids.len() * self.d);
        for &id in ids {
            if id as usize >= self.n {
                return Err(Error::param(format!("row id {id} out of range for n={}", self.n)));
            }
            values.extend_from_slice(self.row(id as usize));
        }
        Dataset::new(ids.len(), self.d, values)
    }
}

/// Where a query workload came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    File,
    /// Base rows perturbed by Gaussian noise; `rows[i]` is the base id behind query `i`.
    Noise { sigma2: f64, rows: Vec<u32> },
    Synthetic { a: f64 },
}

/// A set of query vectors together with how they were produced.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySet {
    pub vectors: Dataset,
    pub provenance: Provenance,
}

impl QuerySet {
    pub fn new(vectors: Dataset, provenance: Provenance) -> Self {
        QuerySet { vectors, provenance }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }

    pub fn query(&self, i: usize) -> &[f32] {
        self.vectors.row(i)
    }

    pub fn check_dim(&self, ds: &Dataset) -> Result<()> {
        if self.dim() != ds.dim() {
            return Err(Error::param(format!(
                "query dimension {} does not match dataset dimension {}",
                self.dim(),
                ds.dim()
            )));
        }
        Ok(())
    }
}

/// On-disk vector container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VecFormat {
    Fvecs,
    Bvecs,
    /// `ivecs` records widened to floats.
    Ivecs,
    /// Headerless little-endian floats; shape must be supplied out of band.
    RawF32 { n: usize, d: usize },
}

impl FromStr for VecFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fvecs" => Ok(VecFormat::Fvecs),
            "bvecs" => Ok(VecFormat::Bvecs),
            "ivecs" => Ok(VecFormat::Ivecs),
            "raw" | "raw-f32" => Err(Error::param("raw-f32 needs explicit n and d")),
            other => Err(Error::param(format!("unknown vector format '{other}'"))),
        }
    }
}

impl VecFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<VecFormat> {
        match path.extension()?.to_str()? {
            "fvecs" => Some(VecFormat::Fvecs),
            "bvecs" => Some(VecFormat::Bvecs),
            "ivecs" => Some(VecFormat::Ivecs),
            _ => None,
        }
    }
}

pub fn load_vectors(path: impl AsRef<Path>, format: VecFormat) -> Result<Dataset> {
    let file = File::open(path.as_ref())?;
    read_vectors(BufReader::new(file), format)
}

pub fn read_vectors(mut r: impl Read, format: VecFormat) -> Result<Dataset> {
    if let VecFormat::RawF32 { n, d } = format {
        let mut values = vec![0f32; n * d];
        r.read_f32_into::<LittleEndian>(&mut values)?;
        let mut probe = [0u8; 1];
        if r.read(&mut probe)? != 0 {
            return Err(Error::Format(format!("raw-f32 file holds more than {n}x{d} values")));
        }
        return Dataset::new(n, d, values);
    }

    let mut dim: Option<usize> = None;
    let mut values = Vec::new();
    let mut n = 0usize;
    loop {
        let header = match r.read_i32::<LittleEndian>() {
            Ok(v) => v,
            Err(e) if e.kind() == ErrorKind::UnexpectedEof => break,
            Err(e) => return Err(e.into()),
        };
        if header <= 0 {
            return Err(Error::Format(format!("record {n}: invalid dimension header {header}")));
        }
        let header = header as usize;
        match dim {
            None => dim = Some(header),
            Some(d) if d != header => {
                return Err(Error::Format(format!(
                    "record {n}: dimension header {header} differs from {d}"
                )))
            }
            Some(_) => {}
        }
        let start = values.len();
        values.resize(start + header, 0.0);
        let row = &mut values[start..];
        match format {
            VecFormat::Fvecs => r.read_f32_into::<LittleEndian>(row)?,
            VecFormat::Bvecs => {
                let mut bytes = vec![0u8; header];
                r.read_exact(&mut bytes)?;
                for (dst, b) in row.iter_mut().zip(bytes) {
                    *dst = b as f32;
                }
            }
            VecFormat::Ivecs => {
                for dst in row.iter_mut() {
                    *dst = r.read_i32::<LittleEndian>()? as f32;
                }
            }
            VecFormat::RawF32 { .. } => unreachable!(),
        }
        n += 1;
    }
    let d = dim.ok_or_else(|| Error::Format("file contains no records".into()))?;
    Dataset::new(n, d, values)
}

pub fn save_vectors(path: impl AsRef<Path>, ds: &Dataset, format: VecFormat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    write_vectors(&mut w, ds, format)?;
    w.flush()?;
    Ok(())
}

pub fn write_vectors(w: &mut impl Write, ds: &Dataset, format: VecFormat) -> Result<()> {
    let d = ds.dim();
    for (i, row) in ds.rows().enumerate() {
        match format {
            VecFormat::RawF32 { .. } => {}
            _ => w.write_i32::<LittleEndian>(d as i32)?,
        }
        match format {
            VecFormat::Fvecs | VecFormat::RawF32 { .. } => {
                for &v in row {
                    w.write_f32::<LittleEndian>(v)?;
                }
            }
            VecFormat::Bvecs => {
                for &v in row {
                    if v.fract() != 0.0 || !(0.0..=255.0).contains(&v) {
                        return Err(Error::Data(format!("row {i}: value {v} does not fit a byte")));
                    }
                    w.write_u8(v as u8)?;
                }
            }
            VecFormat::Ivecs => {
                for &v in row {
                    if v.fract() != 0.0 || v.abs() > 16_777_216.0 {
                        return Err(Error::Data(format!("row {i}: value {v} is not an exact integer")));
                    }
                    w.write_i32::<LittleEndian>(v as i32)?;
                }
            }
        }
    }
    Ok(())
}

/// Parameters of the power-law generator.
///
/// Each coordinate is drawn with density proportional to `x^a` on `[0, 1)`,
/// so `a = 0` is the uniform distribution and larger exponents pile mass
/// up near 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub a: f64,
    pub seed: u64,
}

pub fn gen_powerlaw(spec: &SyntheticSpec) -> Result<Dataset> {
    if !(spec.a >= 0.0) || !spec.a.is_finite() {
        return Err(Error::param(format!("power-law exponent must be >= 0, got {}", spec.a)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let inv = 1.0 / (spec.a + 1.0);
    let values = (0..spec.n * spec.d)
        .map(|_| {
            let u: f64 = rng.random();
            if spec.a == 0.0 {
                u as f32
            } else {
                u.powf(inv) as f32
            }
        })
        .collect();
    Dataset::new(spec.n, spec.d, values)
}

/// Isotropic Gaussian blobs around centers drawn uniformly from `[0, 1)^d`.
/// Points are assigned to clusters round-robin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSpec {
    pub n: usize,
    pub d: usize,
    pub clusters: usize,
    pub std_dev: f64,
    pub seed: u64,
}

pub fn gen_clustered(spec: &ClusterSpec) -> Result<Dataset> {
    if spec.clusters == 0 {
        return Err(Error::param("need at least one cluster"));
    }
    let normal = Normal::new(0.0, spec.std_dev)
        .map_err(|e| Error::param(format!("invalid standard deviation: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<f64> = (0..spec.clusters * spec.d).map(|_| rng.random()).collect();
    let mut values = Vec::with_capacity(spec.n * spec.d);
    for i in 0..spec.n {
        let c = &centers[(i % spec.clusters) * spec.d..][..spec.d];
        values.extend(c.iter().map(|&m| (m + normal.sample(&mut rng)) as f32));
    }
    Dataset::new(spec.n, spec.d, values)
}

/// Hard queries: `m` distinct base rows, each coordinate perturbed by `N(0, sigma2)`.
pub fn make_noise_queries(base: &Dataset, m: usize, sigma2: f64, seed: u64) -> Result<QuerySet> {
    if m == 0 || m > base.len() {
        return Err(Error::param(format!("query count {m} must be in 1..={}", base.len())));
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() {
        return Err(Error::param(format!("noise variance must be >= 0, got {sigma2}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<u32> = index::sample(&mut rng, base.len(), m).into_iter().map(|i| i as u32).collect();
    let normal = Normal::new(0.0, sigma2.sqrt()).map_err(|e| Error::param(e.to_string()))?;
    let mut values = Vec::with_capacity(m * base.dim());
    for &r in &rows {
        let row = base.row(r as usize);
        if sigma2 == 0.0 {
            values.extend_from_slice(row);
        } else {
            values.extend(row.iter().map(|&v| (v as f64 + normal.sample(&mut rng)) as f32));
        }
    }
    Ok(QuerySet::new(Dataset::new(m, base.dim(), values)?, Provenance::Noise { sigma2, rows }))
}

/// `m` distinct row ids drawn without replacement.
pub fn sample_ids(n: usize, m: usize, seed: u64) -> Result<Vec<u32>> {
    if m > n {
        return Err(Error::param(format!("cannot sample {m} rows from {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(index::sample(&mut rng, n, m).into_iter().map(|i| i as u32).collect())
}

pub fn sample_subset(ds: &Dataset, m: usize, seed: u64) -> Result<Dataset> {
    ds.select(&sample_ids(ds.len(), m, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn mean_and_skew(ds: &Dataset, col: usize) -> (f64, f64) {
        let xs: Vec<f64> = ds.rows().map(|r| r[col] as f64).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let m3 = xs.iter().map(|x| (x - mean).powi(3)).sum::<f64>() / n;
        (mean, m3 / var.powf(1.5))
    }

    #[test]
    fn reads_single_fvecs_record() {
        let mut bytes = 2i32.to_le_bytes().to_vec();
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend(2.0f32.to_le_bytes());
        let ds = read_vectors(Cursor::new(bytes), VecFormat::Fvecs).unwrap();
        assert_eq!((ds.len(), ds.dim()), (1, 2));
        assert_eq!(ds.values(), &[1.0, 2.0]);
    }

    #[test]
    fn inconsistent_header_is_format_error() {
        let mut bytes = 1i32.to_le_bytes().to_vec();
        bytes.extend(1.0f32.to_le_bytes());
        bytes.extend(2i32.to_le_bytes());
        bytes.extend([0u8; 8]);
        let err = read_vectors(Cursor::new(bytes), VecFormat::Fvecs).unwrap_err();
        assert!(matches!(err, Error::Format(_)), "{err}");
    }

    #[test]
    fn truncated_record_is_io_error() {
        let mut bytes = 3i32.to_le_bytes().to_vec();
        bytes.extend(1.0f32.to_le_bytes());
        let err = read_vectors(Cursor::new(bytes), VecFormat::Fvecs).unwrap_err();
        assert!(matches!(err, Error::Io(_)), "{err}");
    }

    #[test]
    fn nan_is_data_error() {
        let mut bytes = 1i32.to_le_bytes().to_vec();
        bytes.extend(f32::NAN.to_le_bytes());
        let err = read_vectors(Cursor::new(bytes), VecFormat::Fvecs).unwrap_err();
        assert!(matches!(err, Error::Data(_)), "{err}");
    }

    #[test]
    fn bvecs_widen_to_floats() {
        let mut bytes = 3i32.to_le_bytes().to_vec();
        bytes.extend([0u8, 7, 255]);
        let ds = read_vectors(Cursor::new(bytes), VecFormat::Bvecs).unwrap();
        assert_eq!(ds.values(), &[0.0, 7.0, 255.0]);
    }

    #[test]
    fn raw_needs_exact_size() {
        let bytes: Vec<u8> = [1.0f32, 2.0, 3.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        let err = read_vectors(Cursor::new(bytes.clone()), VecFormat::RawF32 { n: 1, d: 2 }).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        let err = read_vectors(Cursor::new(bytes.clone()), VecFormat::RawF32 { n: 2, d: 2 }).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
        let ds = read_vectors(Cursor::new(bytes), VecFormat::RawF32 { n: 3, d: 1 }).unwrap();
        assert_eq!(ds.len(), 3);
    }

    #[test]
    fn empty_file_rejected() {
        assert!(matches!(read_vectors(Cursor::new(vec![]), VecFormat::Fvecs), Err(Error::Format(_))));
    }

    #[test]
    fn uniform_generator_mean_and_determinism() {
        let spec = SyntheticSpec { n: 10_000, d: 8, a: 0.0, seed: 7 };
        let ds = gen_powerlaw(&spec).unwrap();
        for c in 0..8 {
            let (mean, _) = mean_and_skew(&ds, c);
            assert!((0.48..=0.52).contains(&mean), "column {c} mean {mean}");
        }
        assert_eq!(ds, gen_powerlaw(&spec).unwrap());
    }

    #[test]
    fn larger_exponent_is_more_skewed() {
        let flat = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 8, a: 0.0, seed: 7 }).unwrap();
        let steep = gen_powerlaw(&SyntheticSpec { n: 10_000, d: 8, a: 50.0, seed: 7 }).unwrap();
        for c in 0..8 {
            let (_, s0) = mean_and_skew(&flat, c);
            let (_, s50) = mean_and_skew(&steep, c);
            // Mass piles up against 1, so the tail is on the left; magnitude grows.
            assert!(s50.abs() > s0.abs(), "column {c}: |{s50}| <= |{s0}|");
        }
    }

    #[test]
    fn negative_exponent_rejected() {
        let err = gen_powerlaw(&SyntheticSpec { n: 4, d: 2, a: -1.0, seed: 0 }).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn zero_noise_is_row_selection() {
        let base = gen_powerlaw(&SyntheticSpec { n: 300, d: 4, a: 0.0, seed: 1 }).unwrap();
        let qs = make_noise_queries(&base, 20, 0.0, 9).unwrap();
        let Provenance::Noise { rows, .. } = &qs.provenance else { panic!() };
        for (i, &r) in rows.iter().enumerate() {
            assert_eq!(qs.query(i), base.row(r as usize));
        }
        assert_eq!(qs, make_noise_queries(&base, 20, 0.0, 9).unwrap());
    }

    #[test]
    fn noise_energy_matches_variance() {
        let base = gen_powerlaw(&SyntheticSpec { n: 1000, d: 128, a: 0.0, seed: 2 }).unwrap();
        let sigma2 = 0.05;
        let qs = make_noise_queries(&base, 100, sigma2, 3).unwrap();
        let Provenance::Noise { rows, .. } = &qs.provenance else { panic!() };
        let total: f64 = rows
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                qs.query(i)
                    .iter()
                    .zip(base.row(r as usize))
                    .map(|(a, b)| ((a - b) as f64).powi(2))
                    .sum::<f64>()
            })
            .sum();
        let mean = total / 100.0;
        let expect = 128.0 * sigma2;
        assert!((mean - expect).abs() < 0.2 * expect, "{mean} vs {expect}");
    }

    #[test]
    fn too_many_queries_rejected() {
        let base = gen_powerlaw(&SyntheticSpec { n: 5, d: 2, a: 0.0, seed: 2 }).unwrap();
        assert!(matches!(make_noise_queries(&base, 6, 0.1, 0), Err(Error::Parameter(_))));
        assert!(matches!(sample_subset(&base, 6, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn sampling() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 1000, d: 3, a: 0.0, seed: 4 }).unwrap();
        let all = sample_ids(1000, 1000, 5).unwrap();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..1000).collect::<Vec<u32>>());

        let one = sample_subset(&ds, 1, 5).unwrap();
        assert!(ds.rows().any(|r| r == one.row(0)));

        let mut a = sample_ids(1000, 100, 1).unwrap();
        let mut b = sample_ids(1000, 100, 2).unwrap();
        a.sort_unstable();
        b.sort_unstable();
        assert_ne!(a, b);
    }
}
