//! On-disk index container.
//!
//! Layout (little-endian): magic `PXGI`, format version, `n`, `d`, `R`,
//! builder / ND / SS tags as strings, a free-form parameter string, then
//! the body. A single-graph body is the adjacency followed by an optional
//! seed-index blob; a partitioned body stores each partition's members,
//! centroid, adjacency and seed index.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::build::Builder;
use crate::codec::*;
use crate::diversify::NdStrategy;
use crate::error::{Error, Result};
use crate::graph::{Graph, Partition, PartitionedIndex};
use crate::seeds::{SeedIndex, SeedStrategy};

const MAGIC: &[u8; 4] = b"PXGI";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexHeader {
    pub n: usize,
    pub d: usize,
    pub max_degree: usize,
    pub builder: Builder,
    pub nd: NdStrategy,
    pub ss: SeedStrategy,
    /// Remaining build parameters as `key=value` pairs.
    pub params: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum IndexBody {
    Single { graph: Graph, seeds: Option<SeedIndex> },
    Partitioned(PartitionedIndex),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexFile {
    pub header: IndexHeader,
    pub body: IndexBody,
}

impl IndexFile {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }

    pub fn write_to(&self, w: &mut impl Write) -> Result<()> {
        let h = &self.header;
        w.write_all(MAGIC)?;
        put_u32(w, VERSION)?;
        put_u64(w, h.n as u64)?;
        put_u32(w, h.d as u32)?;
        put_u32(w, h.max_degree as u32)?;
        put_str(w, &h.builder.to_string())?;
        put_str(w, &h.nd.to_string())?;
        put_str(w, &h.ss.to_string())?;
        put_str(w, &h.params)?;
        match &self.body {
            IndexBody::Single { graph, seeds } => {
                put_u8(w, 0)?;
                graph.write_to(w)?;
                match seeds {
                    Some(s) => {
                        put_u8(w, 1)?;
                        s.write_to(w)
                    }
                    None => put_u8(w, 0),
                }
            }
            IndexBody::Partitioned(pi) => {
                put_u8(w, 1)?;
                put_u32(w, pi.partitions.len() as u32)?;
                for part in &pi.partitions {
                    put_u32s(w, &part.members)?;
                    put_f32s(w, &part.centroid)?;
                    part.graph.write_to(w)?;
                    part.seeds.write_to(w)?;
                }
                Ok(())
            }
        }
    }

    pub fn read_from(r: &mut impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("not an index file".into()));
        }
        let version = get_u32(r)?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported index version {version}")));
        }
        let fmt = |e: Error| Error::Format(e.to_string());
        let n = get_u64(r)? as usize;
        let d = get_u32(r)? as usize;
        let max_degree = get_u32(r)? as usize;
        let builder = get_str(r)?.parse().map_err(fmt)?;
        let nd = get_str(r)?.parse().map_err(fmt)?;
        let ss = get_str(r)?.parse().map_err(fmt)?;
        let params = get_str(r)?;
        let header = IndexHeader { n, d, max_degree, builder, nd, ss, params };
        let body = match get_u8(r)? {
            0 => {
                let graph = Graph::read_from(r)?;
                if graph.len() != n {
                    return Err(Error::Format(format!("header says {n} nodes, graph has {}", graph.len())));
                }
                let seeds = match get_u8(r)? {
                    0 => None,
                    1 => {
                        let s = SeedIndex::read_from(r)?;
                        s.check(n)?;
                        Some(s)
                    }
                    t => return Err(Error::Format(format!("bad seed flag {t}"))),
                };
                IndexBody::Single { graph, seeds }
            }
            1 => {
                let p = get_u32(r)? as usize;
                let mut parts = Vec::with_capacity(p.min(1 << 16));
                for _ in 0..p {
                    let members = get_u32s(r)?;
                    let centroid = get_f32s(r)?;
                    if centroid.len() != d {
                        return Err(Error::Format("centroid dimension mismatch".into()));
                    }
                    let graph = Graph::read_from(r)?;
                    let seeds = SeedIndex::read_from(r)?;
                    seeds.check(graph.len())?;
                    parts.push(Partition { members, centroid, graph, seeds });
                }
                IndexBody::Partitioned(PartitionedIndex::new(parts, n).map_err(fmt)?)
            }
            t => return Err(Error::Format(format!("unknown index body {t}"))),
        };
        Ok(IndexFile { header, body })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::{build_dc, build_ii, BuildParams};
    use crate::vecdata::{gen_powerlaw, SyntheticSpec};

    fn roundtrip(f: &IndexFile) -> IndexFile {
        let mut buf = Vec::new();
        f.write_to(&mut buf).unwrap();
        IndexFile::read_from(&mut buf.as_slice()).unwrap()
    }

    #[test]
    fn single_and_partitioned_roundtrip() {
        let ds = gen_powerlaw(&SyntheticSpec { n: 300, d: 4, a: 0.0, seed: 1 }).unwrap();
        for ss in ["sf", "ks:k=4,medoid=1", "kd:trees=2,leaf=8,visits=32,seeds=4", "sn:M=8"] {
            let p = BuildParams { max_degree: 8, beam_width: 16, ss: ss.parse().unwrap(), ..Default::default() };
            let b = build_ii(&ds, &p).unwrap();
            let header = IndexHeader {
                n: 300,
                d: 4,
                max_degree: 8,
                builder: Builder::Ii,
                nd: p.nd,
                ss: p.ss,
                params: "L_build=16 seed=42".into(),
            };
            let f = IndexFile { header: header.clone(), body: IndexBody::Single { graph: b.graph, seeds: Some(b.seeds) } };
            assert_eq!(roundtrip(&f), f);
            if ss == "sf" {
                let (pi, _) = build_dc(&ds, 3, &p).unwrap();
                let f = IndexFile { header: IndexHeader { builder: Builder::Dc, ..header }, body: IndexBody::Partitioned(pi) };
                assert_eq!(roundtrip(&f), f);
            }
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(matches!(IndexFile::read_from(&mut &b"NOPE0000"[..]), Err(Error::Format(_))));
        assert!(matches!(IndexFile::read_from(&mut &b"PXGI"[..]), Err(Error::Io(_))));
    }
}
