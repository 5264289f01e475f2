//! Systematic encoding from the reduced row echelon form of `H` over GF(2).

use super::graph::TannerGraph;
use crate::error::{Error, Result};

fn words(bits: usize) -> usize {
    bits.div_ceil(64)
}

fn get(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn set(row: &mut [u64], i: usize) {
    row[i / 64] |= 1 << (i % 64);
}

/// Information bits sit at `info_positions`; each parity position is a fixed
/// GF(2) combination of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicEncoder {
    n: usize,
    info_positions: Vec<usize>,
    parity_positions: Vec<usize>,
    /// One packed row over the `k` information bits per parity position.
    parity_rows: Vec<Vec<u64>>,
}

impl SystematicEncoder {
    /// Gaussian elimination on `H`; redundant checks are dropped, so
    /// `k = n − rank(H)`.
    pub fn new(graph: &TannerGraph) -> Result<Self> {
        let n = graph.n_vars();
        let w = words(n);
        let mut rows: Vec<Vec<u64>> = (0..graph.n_checks())
            .map(|c| {
                let mut r = vec![0u64; w];
                for &v in graph.check(c) {
                    set(&mut r, v);
                }
                r
            })
            .collect();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for col in 0..n {
            if rank == rows.len() {
                break;
            }
            let Some(p) = (rank..rows.len()).find(|&r| get(&rows[r], col)) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && get(row, col) {
                    for (a, b) in row.iter_mut().zip(&pivot) {
                        *a ^= b;
                    }
                }
            }
            pivots.push(col);
            rank += 1;
        }
        rows.truncate(rank);
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        if info_positions.is_empty() {
            return Err(Error::Domain("parity-check matrix has full column rank: no information bits".into()));
        }
        let k = info_positions.len();
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut packed = vec![0u64; words(k)];
                for (j, &c) in info_positions.iter().enumerate() {
                    if get(row, c) {
                        set(&mut packed, j);
                    }
                }
                packed
            })
            .collect();
        Ok(SystematicEncoder {
            n,
            info_positions,
            parity_positions: pivots,
            parity_rows,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n as f64
    }

    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                got: info.len(),
            });
        }
        let mut packed = vec![0u64; words(self.k())];
        let mut cw = vec![0u8; self.n];
        for (j, (&b, &pos)) in info.iter().zip(&self.info_positions).enumerate() {
            if b & 1 == 1 {
                set(&mut packed, j);
                cw[pos] = 1;
            }
        }
        for (row, &pos) in self.parity_rows.iter().zip(&self.parity_positions) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            cw[pos] = (ones & 1) as u8;
        }
        Ok(cw)
    }

    /// The information bits carried by `codeword`.
    pub fn extract(&self, codeword: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| codeword[p]).collect()
    }
}
