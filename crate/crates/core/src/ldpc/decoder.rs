//! Flooding sum-product decoding with tanh-rule check updates.
//!
//! LLRs are `ln P(0) / P(1)`.

use super::graph::TannerGraph;
use crate::error::{Error, Result};

/// Bound on `|Π tanh|` so that check messages stay finite (about ±36.7).
const TANH_LIMIT: f64 = 1.0 - f64::EPSILON;
const MSG_LIMIT: f64 = 60.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutcome {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Decoder state that survives between calls, so decoding can resume after
/// the channel LLRs are refreshed.
#[derive(Debug, Clone)]
pub struct SumProductDecoder<'g> {
    graph: &'g TannerGraph,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    posterior: Vec<f64>,
    hard: Vec<u8>,
    scratch: Vec<f64>,
}

impl<'g> SumProductDecoder<'g> {
    pub fn new(graph: &'g TannerGraph) -> Self {
        SumProductDecoder {
            graph,
            c2v: vec![0.0; graph.n_edges()],
            v2c: vec![0.0; graph.n_edges()],
            posterior: vec![0.0; graph.n_vars()],
            hard: vec![0; graph.n_vars()],
            scratch: Vec::new(),
        }
    }

    pub fn reset(&mut self) {
        self.c2v.fill(0.0);
    }

    /// Runs up to `max_iters` iterations on `channel`. With `early_exit`
    /// it stops at the first iteration whose hard decisions satisfy every
    /// check. Returns (converged, iterations run).
    pub fn iterate(&mut self, channel: &[f64], max_iters: usize, early_exit: bool) -> Result<(bool, usize)> {
        let g = self.graph;
        if channel.len() != g.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: g.n_vars(),
                got: channel.len(),
            });
        }
        if channel.iter().any(|l| l.is_nan()) {
            return Err(Error::NonFinite {
                context: "channel LLRs".into(),
            });
        }
        let mut converged = false;
        for it in 1..=max_iters {
            for (v, &ch) in channel.iter().enumerate() {
                let edges = g.var_edges(v);
                let total = ch + edges.iter().map(|&e| self.c2v[e]).sum::<f64>();
                for &e in edges {
                    self.v2c[e] = (total - self.c2v[e]).clamp(-MSG_LIMIT, MSG_LIMIT);
                }
            }
            for c in 0..g.n_checks() {
                let range = g.check_edges(c);
                let t = &mut self.scratch;
                t.clear();
                t.extend(self.v2c[range.clone()].iter().map(|l| (0.5 * l).tanh()));
                // product of the others by a forward and a backward sweep
                let d = t.len();
                let mut fwd = 1.0;
                let out = &mut self.c2v[range];
                for i in 0..d {
                    out[i] = fwd;
                    fwd *= t[i];
                }
                let mut bwd = 1.0;
                for i in (0..d).rev() {
                    let p = (out[i] * bwd).clamp(-TANH_LIMIT, TANH_LIMIT);
                    out[i] = 2.0 * p.atanh();
                    bwd *= t[i];
                }
            }
            for (v, &ch) in channel.iter().enumerate() {
                let post = ch + g.var_edges(v).iter().map(|&e| self.c2v[e]).sum::<f64>();
                self.posterior[v] = post;
                self.hard[v] = u8::from(post < 0.0);
            }
            converged = g.is_codeword(&self.hard);
            if converged && early_exit {
                return Ok((true, it));
            }
        }
        Ok((converged, max_iters))
    }

    pub fn hard_decisions(&self) -> &[u8] {
        &self.hard
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    /// Sum of incoming check messages per variable: posterior minus channel.
    pub fn extrinsic(&self) -> Vec<f64> {
        (0..self.graph.n_vars())
            .map(|v| self.graph.var_edges(v).iter().map(|&e| self.c2v[e]).sum())
            .collect()
    }
}

/// Decodes one word from scratch with early exit.
pub fn decode_sum_product(graph: &TannerGraph, channel_llrs: &[f64], max_iters: usize) -> Result<DecodeOutcome> {
    let mut dec = SumProductDecoder::new(graph);
    let (converged, iterations) = dec.iterate(channel_llrs, max_iters.max(1), true)?;
    Ok(DecodeOutcome {
        bits: dec.hard.clone(),
        converged,
        iterations,
    })
}
