//! LDPC codes: degree distributions, graph construction, encoding,
//! sum-product decoding, alist exchange and the coded MIMO chain.

pub mod alist;
pub mod chain;
pub mod decoder;
pub mod degree;
pub mod encoder;
pub mod graph;

pub use alist::{parse_alist, write_alist};
pub use chain::{coded_wer, ChainConfig, ChainScheme, Detector, Interleaver};
pub use decoder::{decode_sum_product, DecodeOutcome, SumProductDecoder};
pub use degree::{realize, DegreeDistributions, DegreeSequence};
pub use encoder::SystematicEncoder;
pub use graph::{build_graph, Construction, TannerGraph};

use crate::error::Result;
use crate::rng::SeedStream;

/// A parity-check graph with its systematic encoder.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    pub graph: TannerGraph,
    pub encoder: SystematicEncoder,
}

impl LdpcCode {
    pub fn from_graph(graph: TannerGraph) -> Result<Self> {
        let encoder = SystematicEncoder::new(&graph)?;
        Ok(LdpcCode { graph, encoder })
    }

    pub fn n(&self) -> usize {
        self.graph.n_vars()
    }

    pub fn k(&self) -> usize {
        self.encoder.k()
    }

    pub fn rate(&self) -> f64 {
        self.encoder.rate()
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        self.encoder.encode(info)
    }
}

/// Realizes `dd` on `n_b` variable nodes, builds the graph and derives the
/// encoder. The same seed always gives the same code.
pub fn build_code(n_b: usize, dd: &DegreeDistributions, seed: u64, method: Construction) -> Result<LdpcCode> {
    let seq = realize(dd, n_b)?;
    LdpcCode::from_graph(build_graph(&seq, SeedStream::new(seed), method)?)
}
