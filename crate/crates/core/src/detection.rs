//! Hard ML detection, list sphere decoding and max-log soft demapping.
//!
//! LLRs follow `L = ln P(b = 0) / P(b = 1)`: positive values favor bit 0.
//! With unit-variance complex noise the log-likelihood of a candidate `x` is
//! `−‖y − H x‖²`, and a prior LLR vector contributes `(1 − 2 b_j) L_j / 2`
//! per bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complex_to_real, CMatrix};
use crate::modulation::VectorAlphabet;

/// LLR magnitude used when one hypothesis has no list support.
pub const LLR_SATURATION: f64 = 40.0;

/// Alphabets up to this size are searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

#[derive(Debug, Clone, Copy)]
pub struct DetectionProblem<'a> {
    pub y: &'a [Complex64],
    pub h_eff: &'a CMatrix,
    pub alphabet: &'a VectorAlphabet,
    /// A-priori LLRs, one per alphabet bit.
    pub priors: Option<&'a [f64]>,
}

impl<'a> DetectionProblem<'a> {
    pub fn new(y: &'a [Complex64], h_eff: &'a CMatrix, alphabet: &'a VectorAlphabet) -> Result<Self> {
        if y.len() != h_eff.rows() {
            return Err(Error::DimensionMismatch {
                expected: h_eff.rows(),
                got: y.len(),
            });
        }
        if alphabet.dim() != h_eff.cols() {
            return Err(Error::DimensionMismatch {
                expected: h_eff.cols(),
                got: alphabet.dim(),
            });
        }
        Ok(DetectionProblem {
            y,
            h_eff,
            alphabet,
            priors: None,
        })
    }

    pub fn with_priors(mut self, priors: &'a [f64]) -> Result<Self> {
        if priors.len() != self.alphabet.bits() {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet.bits(),
                got: priors.len(),
            });
        }
        self.priors = Some(priors);
        Ok(self)
    }

    /// `‖y − H x_idx‖²`.
    pub fn metric(&self, idx: usize) -> f64 {
        let x = self.alphabet.vector(idx);
        let h = self.h_eff;
        let mut d = 0.0;
        for (r, yr) in self.y.iter().enumerate() {
            let mut acc = *yr;
            for (hv, xv) in h.row(r).iter().zip(x) {
                acc -= hv * xv;
            }
            d += acc.norm_sqr();
        }
        d
    }

    /// Log-prior of vector `idx` up to a constant.
    pub fn log_prior(&self, idx: usize) -> f64 {
        match self.priors {
            None => 0.0,
            Some(l) => l
                .iter()
                .enumerate()
                .map(|(j, lj)| if self.alphabet.bit(idx, j) == 0 { 0.5 * lj } else { -0.5 * lj })
                .sum(),
        }
    }
}

/// Candidates in ascending `(metric, index)` order.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub entries: Vec<(usize, f64)>,
    pub capacity: usize,
}

impl CandidateList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn cmp_entry(a: &(usize, f64), b: &(usize, f64)) -> std::cmp::Ordering {
    a.1.total_cmp(&b.1).then(a.0.cmp(&b.0))
}

/// Minimum-distance vector; ties go to the lowest index.
pub fn ml_detect(p: &DetectionProblem) -> Result<usize> {
    if p.alphabet.is_empty() {
        return Err(Error::Domain("empty alphabet".into()));
    }
    if p.alphabet.len() > EXHAUSTIVE_LIMIT {
        return Ok(sphere_list(p, 1).entries[0].0);
    }
    let mut best = (0, p.metric(0));
    for idx in 1..p.alphabet.len() {
        let d = p.metric(idx);
        if d < best.1 {
            best = (idx, d);
        }
    }
    Ok(best.0)
}

/// Every alphabet vector with its metric, sorted.
pub fn exhaustive_list(p: &DetectionProblem) -> CandidateList {
    let mut entries: Vec<(usize, f64)> = (0..p.alphabet.len()).map(|i| (i, p.metric(i))).collect();
    entries.sort_by(cmp_entry);
    CandidateList {
        capacity: entries.len(),
        entries,
    }
}

/// The `capacity` smallest-metric vectors.
pub fn sphere_list(p: &DetectionProblem, capacity: usize) -> CandidateList {
    let capacity = capacity.max(1);
    if capacity >= p.alphabet.len() {
        return exhaustive_list(p);
    }
    match SphereSearch::new(p, capacity) {
        Some(mut s) => {
            s.run();
            let mut entries = s.found;
            entries.sort_by(cmp_entry);
            CandidateList { entries, capacity }
        }
        None => {
            let mut l = exhaustive_list(p);
            l.entries.truncate(capacity);
            l.capacity = capacity;
            l
        }
    }
}

/// Depth-first Schnorr–Euchner enumeration over the real-valued lattice
/// `y_r = H_r x_r + w_r`, triangularized by Householder QR.
struct SphereSearch<'p, 'a> {
    p: &'p DetectionProblem<'a>,
    capacity: usize,
    /// Upper-triangular `R`, row-major `k x k`.
    r: Vec<f64>,
    qty: Vec<f64>,
    k: usize,
    /// Real dimension of each search coordinate.
    dims: Vec<usize>,
    levels: Vec<Vec<f64>>,
    fixed_pos: Vec<usize>,
    found: Vec<(usize, f64)>,
    radius: f64,
    /// `‖y‖²` outside the span of the triangular system.
    resid: f64,
}

impl<'p, 'a> SphereSearch<'p, 'a> {
    fn new(p: &'p DetectionProblem<'a>, capacity: usize) -> Option<Self> {
        let all_levels = p.alphabet.real_levels();
        let h = p.h_eff.to_real();
        let mut yr = complex_to_real(p.y);
        // single-level coordinates are fixed: move them to the observation
        let mut dims = Vec::new();
        let fixed_pos = vec![0usize; all_levels.len()];
        for (d, lv) in all_levels.iter().enumerate() {
            if lv.len() == 1 {
                for (i, y) in yr.iter_mut().enumerate() {
                    *y -= h[(i, d)] * lv[0];
                }
            } else {
                dims.push(d);
            }
        }
        let n = h.rows();
        let k = dims.len();
        if k == 0 || k > n {
            return None;
        }
        // column-major working copy of the kept columns
        let mut a: Vec<Vec<f64>> = dims.iter().map(|&d| (0..n).map(|i| h[(i, d)]).collect()).collect();
        for j in 0..k {
            let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let alpha = if a[j][j] > 0.0 { -norm } else { norm };
            let mut v: Vec<f64> = a[j][j..].to_vec();
            v[0] -= alpha;
            let vn: f64 = v.iter().map(|x| x * x).sum();
            if vn == 0.0 {
                continue;
            }
            for col in a.iter_mut().skip(j) {
                let dot: f64 = v.iter().zip(&col[j..]).map(|(x, y)| x * y).sum();
                let f = 2.0 * dot / vn;
                for (c, vi) in col[j..].iter_mut().zip(&v) {
                    *c -= f * vi;
                }
            }
            let dot: f64 = v.iter().zip(&yr[j..]).map(|(x, y)| x * y).sum();
            let f = 2.0 * dot / vn;
            for (c, vi) in yr[j..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        }
        let mut r = vec![0.0; k * k];
        for (j, col) in a.iter().enumerate() {
            for i in 0..=j {
                r[i * k + j] = col[i];
            }
        }
        let levels = dims.iter().map(|&d| all_levels[d].clone()).collect();
        Some(SphereSearch {
            p,
            capacity,
            r,
            qty: yr[..k].to_vec(),
            resid: yr[k..].iter().map(|v| v * v).sum(),
            k,
            dims,
            levels,
            fixed_pos,
            found: Vec::with_capacity(capacity + 1),
            radius: f64::INFINITY,
        })
    }

    fn run(&mut self) {
        let mut choice = vec![0usize; self.k];
        let mut x = vec![0.0; self.k];
        self.descend(self.k, 0.0, &mut choice, &mut x);
    }

    fn descend(&mut self, level: usize, partial: f64, choice: &mut [usize], x: &mut [f64]) {
        if level == 0 {
            self.leaf(choice);
            return;
        }
        let i = level - 1;
        let k = self.k;
        let mut b = self.qty[i];
        for (j, xj) in x.iter().enumerate().take(k).skip(level) {
            b -= self.r[i * k + j] * xj;
        }
        let rii = self.r[i * k + i];
        let mut order: Vec<(f64, usize)> = self.levels[i]
            .iter()
            .enumerate()
            .map(|(li, &v)| ((b - rii * v).powi(2), li))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, li) in order {
            let d = partial + inc;
            if d > self.bound() {
                break;
            }
            choice[i] = li;
            x[i] = self.levels[i][li];
            self.descend(i, d, choice, x);
        }
    }

    fn bound(&self) -> f64 {
        self.radius * (1.0 + 1e-9) + 1e-12
    }

    fn leaf(&mut self, choice: &[usize]) {
        for (c, &d) in choice.iter().zip(&self.dims) {
            self.fixed_pos[d] = *c;
        }
        let idx = self.p.alphabet.index_of_levels(&self.fixed_pos);
        let entry = (idx, self.p.metric(idx));
        if self.found.len() < self.capacity {
            self.found.push(entry);
        } else {
            let (worst, _) = self
                .found
                .iter()
                .enumerate()
                .max_by(|a, b| cmp_entry(a.1, b.1))
                .expect("list is full");
            if cmp_entry(&entry, &self.found[worst]).is_lt() {
                self.found[worst] = entry;
            } else {
                return;
            }
        }
        if self.found.len() == self.capacity {
            // the residual outside the triangular system is common to all
            // candidates, so only the in-system distance is comparable
            let worst = self.found.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            self.radius = (worst - self.resid).max(0.0);
        }
    }
}

/// A-posteriori max-log LLRs, saturated at `±LLR_SATURATION`.
pub fn soft_llr(p: &DetectionProblem, list: &CandidateList) -> Vec<f64> {
    max_log_llr(p.alphabet, list.entries.iter().copied(), p.priors)
}

/// Max-log LLRs from `(index, ‖y − c‖²)` pairs over any subset of `alphabet`.
pub fn max_log_llr(alphabet: &VectorAlphabet, entries: impl IntoIterator<Item = (usize, f64)>, priors: Option<&[f64]>) -> Vec<f64> {
    let bits = alphabet.bits();
    let mut min0 = vec![f64::INFINITY; bits];
    let mut min1 = vec![f64::INFINITY; bits];
    for (idx, d) in entries {
        let cost = match priors {
            None => d,
            Some(l) => {
                d - l
                    .iter()
                    .enumerate()
                    .map(|(j, lj)| if alphabet.bit(idx, j) == 0 { 0.5 * lj } else { -0.5 * lj })
                    .sum::<f64>()
            }
        };
        for b in 0..bits {
            let slot = if alphabet.bit(idx, b) == 0 { &mut min0[b] } else { &mut min1[b] };
            if cost < *slot {
                *slot = cost;
            }
        }
    }
    min0.iter()
        .zip(&min1)
        .map(|(m0, m1)| match (m0.is_finite(), m1.is_finite()) {
            (true, true) => (m1 - m0).clamp(-LLR_SATURATION, LLR_SATURATION),
            (true, false) => LLR_SATURATION,
            (false, true) => -LLR_SATURATION,
            (false, false) => 0.0,
        })
        .collect()
}
