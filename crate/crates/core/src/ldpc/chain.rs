//! Coded transmission over a quasi-static MIMO channel with iterative
//! detection and decoding, producing word error rates.
//!
//! Per codeword: random information bits, systematic encoding, a fixed
//! seeded bit interleaver, mapping to symbol vectors, precoding, one channel
//! draw, then rounds of soft detection and sum-product decoding. After every
//! `detect_every` decoder iterations the detector runs again with the
//! decoder's extrinsic LLRs as priors, until the word checks or the
//! iteration budget is spent.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::decoder::SumProductDecoder;
use super::LdpcCode;
use crate::detection::{max_log_llr, soft_llr, sphere_list, DetectionProblem, LLR_SATURATION};
use crate::error::{Error, Result};
use crate::information::PointCloud;
use crate::linalg::{real_to_complex, CMatrix};
use crate::modulation::VectorAlphabet;
use crate::precoding::{make_schedule, ScheduleKind, SpaceTimeCode, StcKind};
use crate::randmat::{effective_map, sample_channel};
use crate::rng::SeedStream;
use crate::stats::MonteCarloEstimate;

const INFO_TAG: u64 = 0x696e_666f;
const CHANNEL_TAG: u64 = 0x6368_616e;
const PRECODER_TAG: u64 = 0x7072_6563;
const NOISE_TAG: u64 = 0x6e6f_6973;

/// A fixed permutation `out[i] = in[perm[i]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    /// Uniformly random permutation of `n` positions.
    pub fn new(n: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut SeedStream::new(seed).rng());
        Interleaver { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn invert<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            out[p] = x[i];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainScheme {
    NoPrecoding,
    /// `N` Haar precoders over contiguous segments of the codeword.
    EmiN(usize),
    /// A fresh Haar precoder every channel use.
    Emi,
    Stc(StcKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    Exhaustive,
    /// List sphere decoder keeping the `capacity` best candidates.
    Sphere { capacity: usize },
}

#[derive(Debug, Clone)]
pub struct ChainConfig<'a> {
    pub code: &'a LdpcCode,
    /// Per-use alphabet of `n_t`-dimensional symbol vectors.
    pub alphabet: VectorAlphabet,
    pub n_r: usize,
    pub scheme: ChainScheme,
    pub detector: Detector,
    pub gammas: Vec<f64>,
    pub n_words: u64,
    pub interleaver_seed: u64,
    pub seed: u64,
    /// Decoder iterations in total.
    pub max_iters: usize,
    /// Decoder iterations between detection rounds.
    pub detect_every: usize,
}

impl<'a> ChainConfig<'a> {
    pub fn new(code: &'a LdpcCode, alphabet: VectorAlphabet, n_r: usize, scheme: ChainScheme) -> Self {
        ChainConfig {
            code,
            alphabet,
            n_r,
            scheme,
            detector: Detector::Exhaustive,
            gammas: Vec::new(),
            n_words: 0,
            interleaver_seed: 0,
            seed: 0,
            max_iters: 100,
            detect_every: 10,
        }
    }
}

/// Fixed per-experiment pieces derived from the configuration.
struct Prepared {
    /// Alphabet of one detection slot: a channel use, or a whole block.
    slot_alphabet: VectorAlphabet,
    slots: usize,
    channel_uses: usize,
    stc: Option<SpaceTimeCode>,
    interleaver: Interleaver,
}

fn prepare(cfg: &ChainConfig) -> Result<Prepared> {
    let n_b = cfg.code.n();
    if cfg.n_r == 0 {
        return Err(Error::config("n_r", "must be positive"));
    }
    if cfg.max_iters == 0 || cfg.detect_every == 0 {
        return Err(Error::config("max_iters", "iteration counts must be positive"));
    }
    if cfg.gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::config("snr_grid", "SNRs must be positive and finite"));
    }
    let (slot_alphabet, stc, uses_per_slot) = match cfg.scheme {
        ChainScheme::Stc(kind) => {
            let code = SpaceTimeCode::from_kind(kind);
            if cfg.alphabet.dim() != code.n_t {
                return Err(Error::config("scheme", format!("{kind:?} needs {} transmit antennas", code.n_t)));
            }
            let block = VectorAlphabet::product(cfg.alphabet.scalar().clone(), code.symbols_per_block)?;
            let k = code.k;
            (block, Some(code), k)
        }
        ChainScheme::EmiN(0) => return Err(Error::config("scheme", "EMI-N needs N >= 1")),
        _ => (cfg.alphabet.clone(), None, 1),
    };
    if let Detector::Sphere { capacity } = cfg.detector {
        if capacity == 0 {
            return Err(Error::config("detector", "sphere capacity must be positive"));
        }
        if stc.as_ref().is_some_and(|c| c.kind == StcKind::Alamouti) {
            return Err(Error::config("detector", "the sphere detector has no real-linear path; use exhaustive"));
        }
    }
    if slot_alphabet.len() > crate::detection::EXHAUSTIVE_LIMIT && cfg.detector == Detector::Exhaustive {
        return Err(Error::config("detector", "alphabet too large for exhaustive detection"));
    }
    let m = slot_alphabet.bits();
    if !n_b.is_multiple_of(m) {
        return Err(Error::config("n_b", format!("{m} bits per slot do not divide N_b = {n_b}")));
    }
    let slots = n_b / m;
    if let ChainScheme::EmiN(n) = cfg.scheme {
        if n > slots {
            return Err(Error::config("scheme", format!("EMI-{n} exceeds the {slots} channel uses")));
        }
    }
    Ok(Prepared {
        slot_alphabet,
        slots,
        channel_uses: slots * uses_per_slot,
        stc,
        interleaver: Interleaver::new(n_b, cfg.interleaver_seed),
    })
}

/// One codeword's random draws, shared by every SNR.
struct Word {
    info: Vec<u8>,
    symbols: Vec<usize>,
    sigma: Vec<f64>,
    /// `V_t` for each distinct precoder and the slot → precoder map.
    v_ts: Vec<CMatrix>,
    table_of_slot: Vec<usize>,
    /// Unit-variance real Gaussian samples for every slot coordinate.
    noise: Vec<f64>,
}

fn draw_word(cfg: &ChainConfig, prep: &Prepared, w: u64) -> Result<Word> {
    let stream = SeedStream::new(cfg.seed).child(w);
    let code = cfg.code;
    let mut rng = stream.child(INFO_TAG).rng();
    let info: Vec<u8> = (0..code.k()).map(|_| u8::from(rng.random::<bool>())).collect();
    let cw = code.encode(&info)?;
    let bits = prep.interleaver.apply(&cw);
    let m = prep.slot_alphabet.bits();
    let symbols = bits
        .chunks_exact(m)
        .map(|b| prep.slot_alphabet.index_of_bits(b))
        .collect::<Result<Vec<_>>>()?;
    let n_t = cfg.alphabet.dim();
    let ch = sample_channel(n_t, cfg.n_r, &mut stream.child(CHANNEL_TAG).rng())?;
    let v_h = ch.v.adjoint();
    let (v_ts, table_of_slot) = match cfg.scheme {
        ChainScheme::NoPrecoding | ChainScheme::Stc(_) => (vec![v_h], vec![0; prep.slots]),
        ChainScheme::EmiN(n) => {
            let s = make_schedule(ScheduleKind::EmiN(n), n_t, prep.channel_uses, stream.child(PRECODER_TAG))?;
            let v = (0..s.segments())
                .map(|k| Ok(&v_h * &s.segment_matrix(k)?))
                .collect::<Result<Vec<_>>>()?;
            (v, (0..prep.slots).map(|t| s.segment_of(t)).collect())
        }
        ChainScheme::Emi => {
            let s = make_schedule(ScheduleKind::Emi, n_t, prep.channel_uses, stream.child(PRECODER_TAG))?;
            let v = (0..prep.slots)
                .map(|t| Ok(&v_h * &s.matrix(t)?))
                .collect::<Result<Vec<_>>>()?;
            (v, (0..prep.slots).collect())
        }
    };
    let r = ch.sigma.len();
    let slot_dim = 2 * r * prep.stc.as_ref().map_or(1, |c| c.k);
    let mut nrng = stream.child(NOISE_TAG).rng();
    let noise = (0..slot_dim * prep.slots)
        .map(|_| rng_normal(&mut nrng) * std::f64::consts::FRAC_1_SQRT_2)
        .collect();
    Ok(Word {
        info,
        symbols,
        sigma: ch.sigma,
        v_ts,
        table_of_slot,
        noise,
    })
}

fn rng_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Decodes one word at SNR `gamma`; true on any information-bit error.
fn word_error(cfg: &ChainConfig, prep: &Prepared, word: &Word, gamma: f64) -> Result<bool> {
    let maps: Vec<CMatrix> = word.v_ts.iter().map(|v| effective_map(&word.sigma, v, gamma)).collect();
    let tables: Vec<PointCloud> = match &prep.stc {
        Some(code) => {
            let a = maps[0].block_diag_repeat(code.k);
            vec![PointCloud::from_real_map(&(&a.to_real() * &code.generator), &prep.slot_alphabet)?]
        }
        None => maps
            .iter()
            .map(|h| PointCloud::from_map(h, &prep.slot_alphabet))
            .collect::<Result<_>>()?,
    };
    let dim = tables[0].dim();
    let ys: Vec<Vec<f64>> = (0..prep.slots)
        .map(|s| {
            let c = tables[word.table_of_slot[s]].point(word.symbols[s]);
            c.iter().zip(&word.noise[s * dim..(s + 1) * dim]).map(|(a, b)| a + b).collect()
        })
        .collect();
    let m = prep.slot_alphabet.bits();
    let n_b = cfg.code.n();
    let detect = |priors: &[f64]| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n_b);
        for (s, y) in ys.iter().enumerate() {
            let pr = &priors[s * m..(s + 1) * m];
            let t = word.table_of_slot[s];
            let app = match (cfg.detector, &prep.stc) {
                (Detector::Sphere { capacity }, None) => {
                    let yc = real_to_complex(y);
                    let p = DetectionProblem::new(&yc, &maps[t], &prep.slot_alphabet)?.with_priors(pr)?;
                    soft_llr(&p, &sphere_list(&p, capacity))
                }
                _ => {
                    let table = &tables[t];
                    let entries = (0..table.len()).map(|k| (k, sq_dist(y, table.point(k))));
                    max_log_llr(&prep.slot_alphabet, entries, Some(pr))
                }
            };
            out.extend(app.iter().zip(pr).map(|(a, p)| (a - p).clamp(-LLR_SATURATION, LLR_SATURATION)));
        }
        Ok(out)
    };
    let mut dec = SumProductDecoder::new(&cfg.code.graph);
    let mut priors = vec![0.0; n_b];
    let mut used = 0;
    loop {
        let channel = prep.interleaver.invert(&detect(&priors)?);
        let budget = cfg.detect_every.min(cfg.max_iters - used);
        let (ok, it) = dec.iterate(&channel, budget, true)?;
        used += it;
        if ok || used >= cfg.max_iters {
            break;
        }
        let ext: Vec<f64> = dec
            .extrinsic()
            .iter()
            .map(|l| l.clamp(-LLR_SATURATION, LLR_SATURATION))
            .collect();
        priors = prep.interleaver.apply(&ext);
    }
    Ok(cfg.code.encoder.extract(dec.hard_decisions()) != word.info)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Word error rate at every SNR in `cfg.gammas`, from one common set of
/// codewords, channels and noise draws.
pub fn coded_wer(cfg: &ChainConfig) -> Result<Vec<MonteCarloEstimate>> {
    let prep = prepare(cfg)?;
    if cfg.n_words == 0 {
        return Err(Error::config("n_trials", "need at least one codeword"));
    }
    let counts = (0..cfg.n_words)
        .into_par_iter()
        .map(|w| -> Result<Vec<u64>> {
            let word = draw_word(cfg, &prep, w)?;
            cfg.gammas
                .iter()
                .map(|&g| Ok(u64::from(word_error(cfg, &prep, &word, g)?)))
                .collect()
        })
        .try_reduce(
            || vec![0; cfg.gammas.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(counts
        .into_iter()
        .map(|h| MonteCarloEstimate::proportion(h, cfg.n_words, cfg.seed))
        .collect())
}
