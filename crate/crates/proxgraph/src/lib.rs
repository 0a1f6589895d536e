//! Graph-based approximate nearest-neighbor search assembled from
//! interchangeable parts.
//!
//! An index is a capped-degree directed [`Graph`] over a [`Dataset`], built
//! by incremental insertion ([`build::build_ii`]), neighborhood propagation
//! ([`build::nndescent`]) or divide-and-conquer ([`build::build_dc`]). Each
//! builder prunes candidate neighbor lists with a [`NdStrategy`] and enters
//! the graph through a [`SeedStrategy`]. Queries run the classic beam search
//! with full distance-call instrumentation, and [`bench`] drives parameter
//! sweeps that report recall against an exact brute-force [`oracle`].

pub mod bench;
pub mod build;
pub mod diversify;
pub mod error;
pub mod graph;
pub mod index_file;
pub mod metrics;
pub mod oracle;
pub mod search;
pub mod seeds;
pub mod vecdata;

mod codec;

pub use crate::diversify::NdStrategy;
pub use crate::error::{Error, Result};
pub use crate::graph::{Graph, PartitionedIndex};
pub use crate::metrics::DistanceCounter;
pub use crate::oracle::GroundTruth;
pub use crate::search::{Neighbor, SearchStats};
pub use crate::seeds::{SeedIndex, SeedStrategy};
pub use crate::vecdata::{Dataset, QuerySet};
