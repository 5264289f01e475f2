//! Discrete-input mutual information, its temporal mean under random
//! precoding, outage probability and diversity slopes.
//!
//! Every estimator reduces to a real point cloud `{c_k}` observed in noise
//! with variance 1/2 per real dimension, so the likelihood of `c_j` given `y`
//! is proportional to `exp(−‖y − c_j‖²)`. The mutual information is
//! estimated as `log2 |C| − E[H(posterior of c | y = c_k + w)]`, averaging
//! over the transmitted point `k` and seeded noise samples `w` shared by all
//! points.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::detection::{sphere_list, DetectionProblem};
use crate::error::{Error, Result};
use crate::linalg::{complex_to_real, real_to_complex, CMatrix, RMatrix};
use crate::modulation::VectorAlphabet;
use crate::precoding::{SpaceTimeCode, StcKind};
use crate::randmat::{effective_map, sample_channel, sample_haar_unitary, ChannelRealization};
use crate::rng::SeedStream;
use crate::stats::{least_squares_slope, MonteCarloEstimate};

/// Terms more than this many nats below the best are dropped from
/// log-sum-exp evaluations.
const PRUNE_NATS: f64 = 50.0;

const NOISE_TAG: u64 = 0x6e6f_6973;
const PRECODER_TAG: u64 = 0x7072_6563;
const CHANNEL_TAG: u64 = 0x6368_616e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MiConfig {
    /// Noise samples per point for the expectation over `w` (antithetic pairs).
    pub noise_samples: usize,
    /// List size for the inner sum; 0 sums over the whole alphabet.
    pub sphere_capacity: usize,
    pub seed: u64,
}

impl Default for MiConfig {
    fn default() -> Self {
        MiConfig {
            noise_samples: 64,
            sphere_capacity: 0,
            seed: 0,
        }
    }
}

impl MiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.noise_samples == 0 {
            return Err(Error::Domain("noise_samples must be at least 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        MiConfig { seed, ..self }
    }
}

/// Noise vectors with i.i.d. `N(0, 1/2)` coordinates, drawn as `±w` pairs.
#[derive(Debug, Clone)]
pub struct NoiseBank {
    dim: usize,
    samples: Vec<f64>,
    max_norm: f64,
}

impl NoiseBank {
    pub fn new(dim: usize, count: usize, stream: SeedStream) -> Self {
        let mut rng = stream.rng();
        let mut samples = Vec::with_capacity(count * dim);
        while samples.len() < count * dim {
            let w: Vec<f64> = (0..dim)
                .map(|_| rng.sample::<f64, _>(StandardNormal) * std::f64::consts::FRAC_1_SQRT_2)
                .collect();
            samples.extend_from_slice(&w);
            if samples.len() < count * dim {
                samples.extend(w.iter().map(|v| -v));
            }
        }
        let max_norm = samples
            .chunks_exact(dim.max(1))
            .map(|w| w.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max);
        NoiseBank { dim, samples, max_norm }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.samples.len() / self.dim.max(1)
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.dim)
    }
}

/// Entropy in nats of the distribution `∝ exp(−b_j)` given shifted exponents
/// with minimum zero.
fn entropy_from_exponents(b: impl Iterator<Item = f64>) -> f64 {
    let mut z = 0.0;
    let mut zb = 0.0;
    for v in b {
        if v < PRUNE_NATS {
            let e = (-v).exp();
            z += e;
            zb += e * v;
        }
    }
    z.ln() + zb / z
}

/// Noiseless received points in a real space.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 || coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidDimension(format!("{} coordinates in dimension {dim}", coords.len())));
        }
        Ok(PointCloud { dim, coords })
    }

    /// Images `H x` of every alphabet vector, in real coordinates.
    pub fn from_map(h: &CMatrix, alphabet: &VectorAlphabet) -> Result<Self> {
        if h.cols() != alphabet.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.cols(),
                got: alphabet.dim(),
            });
        }
        let mut coords = Vec::with_capacity(alphabet.len() * 2 * h.rows());
        for x in alphabet.iter() {
            coords.extend(complex_to_real(&h.mul_vec(x)));
        }
        Self::new(2 * h.rows(), coords)
    }

    /// Images `B z` of real input vectors (interleaved re/im of each vector).
    pub fn from_real_map(b: &RMatrix, alphabet: &VectorAlphabet) -> Result<Self> {
        if b.cols() != 2 * alphabet.dim() {
            return Err(Error::DimensionMismatch {
                expected: b.cols(),
                got: 2 * alphabet.dim(),
            });
        }
        let mut coords = Vec::with_capacity(alphabet.len() * b.rows());
        for x in alphabet.iter() {
            coords.extend(b.mul_vec(&complex_to_real(x)));
        }
        Self::new(b.rows(), coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.coords[k * self.dim..(k + 1) * self.dim]
    }

    fn sq_dist(&self, a: usize, b: usize) -> f64 {
        self.point(a).iter().zip(self.point(b)).map(|(x, y)| (x - y) * (x - y)).sum()
    }

    /// Mean posterior entropy in nats over all points and noise samples.
    pub fn mean_posterior_entropy(&self, bank: &NoiseBank) -> Result<f64> {
        if bank.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bank.dim(),
            });
        }
        let n = self.len();
        if n == 1 || bank.is_empty() {
            return Ok(0.0);
        }
        let precompute = n <= 1024;
        let dist: Vec<f64> = if precompute {
            let mut d = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..a {
                    let v = self.sq_dist(a, b);
                    d[a * n + b] = v;
                    d[b * n + a] = v;
                }
            }
            d
        } else {
            Vec::new()
        };
        let dmin2 = if precompute {
            (0..n)
                .flat_map(|a| (0..a).map(move |b| (a, b)))
                .map(|(a, b)| dist[a * n + b])
                .fold(f64::INFINITY, f64::min)
        } else {
            f64::INFINITY
        };
        // every cross term is pruned for every sample: the posterior is a point mass
        let w = bank.max_norm;
        let dmin = dmin2.sqrt();
        if precompute && dmin >= w + (w * w + PRUNE_NATS).sqrt() {
            return Ok(0.0);
        }

        let mut proj = vec![0.0; n];
        let mut a = vec![0.0; n];
        let mut total = 0.0;
        for w in bank.iter() {
            for (j, p) in proj.iter_mut().enumerate() {
                *p = self.point(j).iter().zip(w).map(|(c, v)| c * v).sum();
            }
            for k in 0..n {
                let mut amin = f64::INFINITY;
                for j in 0..n {
                    let d = if precompute { dist[k * n + j] } else { self.sq_dist(k, j) };
                    let v = d + 2.0 * (proj[k] - proj[j]);
                    a[j] = v;
                    amin = amin.min(v);
                }
                total += entropy_from_exponents(a.iter().map(|v| v - amin));
            }
        }
        let h = total / (n * bank.len()) as f64;
        if !h.is_finite() {
            return Err(Error::NonFinite {
                context: "posterior entropy".into(),
            });
        }
        Ok(h)
    }

    /// `log2 |C| − E[H]` in bits.
    pub fn mutual_information(&self, bank: &NoiseBank) -> Result<f64> {
        let m = (self.len() as f64).log2();
        let mi = m - self.mean_posterior_entropy(bank)? / std::f64::consts::LN_2;
        debug_assert!((-1e-6..=m + 1e-6).contains(&mi), "MI {mi} outside [0, {m}]");
        Ok(mi)
    }
}

impl PointCloud {
    /// Largest mutual information over input distributions on the cloud,
    /// by Blahut–Arimoto with the expectation over noise taken on `bank`.
    /// Returns the capacity in bits and the optimizing distribution.
    pub fn max_mutual_information(&self, bank: &NoiseBank, max_iters: usize, tol_bits: f64) -> Result<(f64, Vec<f64>)> {
        if bank.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: bank.dim(),
            });
        }
        let n = self.len();
        let mut p = vec![1.0 / n as f64; n];
        let mut div = vec![0.0; n];
        let mut lower = 0.0;
        for _ in 0..max_iters.max(1) {
            // D_k = E_w[−ln Σ_j p_j exp(−(‖c_k + w − c_j‖² − ‖w‖²))]
            for (k, dk) in div.iter_mut().enumerate() {
                let mut acc = 0.0;
                for w in bank.iter() {
                    let a: Vec<f64> = (0..n)
                        .map(|j| {
                            self.point(k)
                                .iter()
                                .zip(self.point(j))
                                .zip(w)
                                .map(|((ck, cj), wi)| {
                                    let d = ck - cj + wi;
                                    d * d - wi * wi
                                })
                                .sum()
                        })
                        .collect();
                    let amin = a.iter().zip(&p).filter(|(_, pj)| **pj > 0.0).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
                    let z: f64 = a.iter().zip(&p).map(|(v, pj)| pj * (-(v - amin)).exp()).sum();
                    acc += amin - z.ln();
                }
                *dk = acc / bank.len() as f64;
            }
            lower = p.iter().zip(&div).map(|(pk, dk)| pk * dk).sum::<f64>();
            let upper = div.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lower.is_finite() && upper.is_finite()) {
                return Err(Error::NonFinite {
                    context: "Blahut-Arimoto divergence".into(),
                });
            }
            if (upper - lower) / std::f64::consts::LN_2 < tol_bits {
                break;
            }
            let dmax = upper;
            for (pk, dk) in p.iter_mut().zip(&div) {
                *pk *= (dk - dmax).exp();
            }
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
        }
        Ok((lower / std::f64::consts::LN_2, p))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("SNR must be positive and finite, got {gamma}")));
    }
    Ok(())
}

pub(crate) fn noise_bank(dim: usize, cfg: &MiConfig) -> NoiseBank {
    NoiseBank::new(dim, cfg.noise_samples, SeedStream::new(cfg.seed).child(NOISE_TAG))
}

/// `I(z; y)` in bits per channel use for `y = √γ Σ V_t z + w`.
pub fn mutual_information(
    sigma: &[f64],
    v_t: &CMatrix,
    alphabet: &VectorAlphabet,
    gamma: f64,
    cfg: &MiConfig,
) -> Result<f64> {
    check_gamma(gamma)?;
    cfg.validate()?;
    let h = effective_map(sigma, v_t, gamma);
    if cfg.sphere_capacity > 0 && cfg.sphere_capacity < alphabet.len() {
        return listed_mutual_information(&h, alphabet, cfg.sphere_capacity, &noise_bank(2 * h.rows(), cfg));
    }
    PointCloud::from_map(&h, alphabet)?.mutual_information(&noise_bank(2 * h.rows(), cfg))
}

/// Same estimator as the point-cloud path, with the posterior restricted to
/// the `capacity` nearest alphabet images returned by the list sphere
/// decoder for each observation.
pub fn listed_mutual_information(h: &CMatrix, alphabet: &VectorAlphabet, capacity: usize, bank: &NoiseBank) -> Result<f64> {
    if bank.dim() != 2 * h.rows() {
        return Err(Error::DimensionMismatch {
            expected: 2 * h.rows(),
            got: bank.dim(),
        });
    }
    let images: Vec<Vec<_>> = alphabet.iter().map(|x| h.mul_vec(x)).collect();
    let mut total = 0.0;
    for img in &images {
        for w in bank.iter() {
            let y: Vec<_> = img.iter().zip(real_to_complex(w)).map(|(c, v)| c + v).collect();
            let p = DetectionProblem::new(&y, h, alphabet)?;
            let list = sphere_list(&p, capacity);
            let dmin = list.entries[0].1;
            total += entropy_from_exponents(list.entries.iter().map(|e| e.1 - dmin));
        }
    }
    let hbar = total / (images.len() * bank.len()) as f64;
    if !hbar.is_finite() {
        return Err(Error::NonFinite {
            context: "listed posterior entropy".into(),
        });
    }
    Ok((alphabet.len() as f64).log2() - hbar / std::f64::consts::LN_2)
}

/// Mean of the mutual information over `n_precoders` Haar-distributed `V_t`.
pub fn emi_mean_mi(sigma: &[f64], alphabet: &VectorAlphabet, gamma: f64, n_precoders: usize, cfg: &MiConfig) -> Result<f64> {
    if n_precoders == 0 {
        return Err(Error::Domain("n_precoders must be at least 1".into()));
    }
    let stream = SeedStream::new(cfg.seed).child(PRECODER_TAG);
    let mut sum = 0.0;
    for p in 0..n_precoders as u64 {
        let v = sample_haar_unitary(alphabet.dim(), &mut stream.child(p).rng())?;
        sum += mutual_information(sigma, &v, alphabet, gamma, cfg)?;
    }
    Ok(sum / n_precoders as f64)
}

/// Block mutual information of a space-time code, in bits per channel use.
pub fn stc_mutual_information(
    code: &SpaceTimeCode,
    block_alphabet: &VectorAlphabet,
    sigma: &[f64],
    v_t: &CMatrix,
    gamma: f64,
    cfg: &MiConfig,
) -> Result<f64> {
    check_gamma(gamma)?;
    cfg.validate()?;
    if v_t.cols() != code.n_t || block_alphabet.dim() != code.symbols_per_block {
        return Err(Error::DimensionMismatch {
            expected: code.n_t,
            got: v_t.cols(),
        });
    }
    let a = effective_map(sigma, v_t, gamma).block_diag_repeat(code.k);
    let b = &a.to_real() * &code.generator;
    let cloud = PointCloud::from_real_map(&b, block_alphabet)?;
    Ok(cloud.mutual_information(&noise_bank(b.rows(), cfg))? / code.k as f64)
}

/// How the per-channel mean MI is formed in an outage experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutageScheme {
    /// No precoding: `V_t = V†`.
    NoPrecoding,
    /// Mean over `N` Haar precoders.
    EmiN(usize),
    /// Mean over `n_precoders` Haar precoders, approximating per-use redraw.
    Emi { n_precoders: usize },
    Stc(StcKind),
}

/// Everything an outage trial needs that does not depend on the channel.
#[derive(Debug, Clone)]
pub struct OutageSetup {
    pub scheme: OutageScheme,
    pub alphabet: VectorAlphabet,
    pub n_r: usize,
    stc: Option<(SpaceTimeCode, VectorAlphabet)>,
}

impl OutageSetup {
    pub fn new(scheme: OutageScheme, alphabet: VectorAlphabet, n_r: usize) -> Result<Self> {
        if n_r == 0 {
            return Err(Error::InvalidDimension("n_r must be positive".into()));
        }
        let stc = match scheme {
            OutageScheme::Stc(kind) => {
                let code = SpaceTimeCode::from_kind(kind);
                if alphabet.dim() != code.n_t {
                    return Err(Error::Unsupported(format!("{kind:?} needs {} transmit antennas", code.n_t)));
                }
                let block = VectorAlphabet::product(alphabet.scalar().clone(), code.symbols_per_block)?;
                Some((code, block))
            }
            OutageScheme::EmiN(0) | OutageScheme::Emi { n_precoders: 0 } => {
                return Err(Error::Domain("precoder count must be at least 1".into()));
            }
            _ => None,
        };
        Ok(OutageSetup {
            scheme,
            alphabet,
            n_r,
            stc,
        })
    }

    pub fn n_t(&self) -> usize {
        self.alphabet.dim()
    }

    /// Largest supported spectral efficiency.
    pub fn max_rate(&self) -> f64 {
        match &self.stc {
            Some((code, block)) => block.bits() as f64 / code.k as f64,
            None => self.alphabet.bits() as f64,
        }
    }

    /// Scheme-appropriate mean MI for one channel realization.
    pub fn channel_mi(&self, ch: &ChannelRealization, gamma: f64, cfg: &MiConfig, stream: SeedStream) -> Result<f64> {
        let cfg = cfg.with_seed(stream.child(NOISE_TAG).key());
        let v_h = ch.v.adjoint();
        let mean_over = |n: usize| -> Result<f64> {
            let ps = stream.child(PRECODER_TAG);
            let mut sum = 0.0;
            for p in 0..n as u64 {
                let v = sample_haar_unitary(self.n_t(), &mut ps.child(p).rng())?;
                sum += mutual_information(&ch.sigma, &v, &self.alphabet, gamma, &cfg)?;
            }
            Ok(sum / n as f64)
        };
        match self.scheme {
            OutageScheme::NoPrecoding => mutual_information(&ch.sigma, &v_h, &self.alphabet, gamma, &cfg),
            OutageScheme::EmiN(n) => mean_over(n),
            OutageScheme::Emi { n_precoders } => mean_over(n_precoders),
            OutageScheme::Stc(_) => {
                let (code, block) = self.stc.as_ref().expect("space-time setup");
                stc_mutual_information(code, block, &ch.sigma, &v_h, gamma, &cfg)
            }
        }
    }

    /// Draws channel `trial` and evaluates its MI at every SNR in `gammas`.
    pub fn trial_mis(&self, trial: u64, gammas: &[f64], cfg: &MiConfig) -> Result<Vec<f64>> {
        let stream = SeedStream::new(cfg.seed).child(trial);
        let ch = sample_channel(self.n_t(), self.n_r, &mut stream.child(CHANNEL_TAG).rng())?;
        gammas.iter().map(|&g| self.channel_mi(&ch, g, cfg, stream)).collect()
    }
}

/// Outage estimates at several SNRs from one common set of channel draws.
pub fn outage_curve(setup: &OutageSetup, rate: f64, gammas: &[f64], n_channels: u64, cfg: &MiConfig) -> Result<Vec<MonteCarloEstimate>> {
    cfg.validate()?;
    for &g in gammas {
        check_gamma(g)?;
    }
    if rate > setup.max_rate() {
        log::warn!("rate {rate} exceeds the alphabet limit {}; outage is certain", setup.max_rate());
        return Ok(gammas
            .iter()
            .map(|_| MonteCarloEstimate::proportion(n_channels, n_channels, cfg.seed))
            .collect());
    }
    if rate <= 0.0 {
        return Err(Error::Domain(format!("rate must be positive, got {rate}")));
    }
    let counts = (0..n_channels)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            Ok(setup
                .trial_mis(t, gammas, cfg)?
                .iter()
                .map(|&mi| u64::from(mi < rate))
                .collect())
        })
        .try_reduce(
            || vec![0; gammas.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(counts
        .into_iter()
        .map(|h| MonteCarloEstimate::proportion(h, n_channels, cfg.seed))
        .collect())
}

/// `Pr(mean MI < rate)` at one SNR.
pub fn outage_probability(setup: &OutageSetup, rate: f64, gamma: f64, n_channels: u64, cfg: &MiConfig) -> Result<MonteCarloEstimate> {
    Ok(outage_curve(setup, rate, &[gamma], n_channels, cfg)?[0])
}

/// Least-squares slope of `−log10 P` against `log10 γ`.
pub fn diversity_slope(points: &[(f64, MonteCarloEstimate)]) -> Result<f64> {
    let mut x = Vec::with_capacity(points.len());
    let mut y = Vec::with_capacity(points.len());
    for (g, e) in points {
        if !(e.value > 0.0 && e.ci_low > 0.0) {
            return Err(Error::Domain(format!("estimate at γ = {g} is not bounded away from zero")));
        }
        x.push(g.log10());
        y.push(-e.value.log10());
    }
    least_squares_slope(&x, &y)
}
