//! Bad and corrupt precoders: classification, corruption probabilities,
//! Beta-law checks for Haar projections, and high-SNR MI ceilings of bad
//! 2x2 QPSK precoders.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::information::{noise_bank, MiConfig, NoiseBank, PointCloud};
use crate::linalg::CMatrix;
use crate::modulation::{build_qam, build_vector_alphabet, VectorAlphabet};
use crate::randmat::{effective_map, sample_haar_unitary};
use crate::rng::SeedStream;
use crate::stats::{ks_statistic, MonteCarloEstimate};

const UNITARY_TOL: f64 = 1e-9;

/// The distinct nonzero differences `z − z′` of an alphabet, one per `±` pair.
#[derive(Debug, Clone)]
pub struct DifferenceSpectrum {
    dim: usize,
    alphabet_len: usize,
    diffs: Vec<Complex64>,
}

impl DifferenceSpectrum {
    pub fn new(alphabet: &VectorAlphabet) -> Self {
        let dim = alphabet.dim();
        let key = |d: &[Complex64]| -> Vec<(i64, i64)> {
            d.iter().map(|z| ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)).collect()
        };
        let mut seen = std::collections::HashSet::new();
        let mut diffs = Vec::new();
        for (i, z) in alphabet.iter().enumerate() {
            for zp in alphabet.iter().take(i) {
                let d: Vec<Complex64> = z.iter().zip(zp).map(|(a, b)| a - b).collect();
                let neg: Vec<Complex64> = d.iter().map(|v| -v).collect();
                if !seen.contains(&key(&neg)) && seen.insert(key(&d)) {
                    diffs.extend(d);
                }
            }
        }
        DifferenceSpectrum {
            dim,
            alphabet_len: alphabet.len(),
            diffs,
        }
    }

    /// Ordered pairs `(z, z′)`, `z′ ≠ z`.
    pub fn pair_count(&self) -> usize {
        self.alphabet_len * (self.alphabet_len - 1)
    }

    pub fn len(&self) -> usize {
        self.diffs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    pub fn difference(&self, k: usize) -> &[Complex64] {
        &self.diffs[k * self.dim..(k + 1) * self.dim]
    }

    /// A difference of smallest norm.
    pub fn shortest(&self) -> &[Complex64] {
        let k = (0..self.len())
            .min_by(|&a, &b| norm2(self.difference(a)).total_cmp(&norm2(self.difference(b))))
            .expect("non-empty spectrum");
        self.difference(k)
    }

    /// `s = V d` for every stored difference.
    pub fn s_vectors(&self, v: &CMatrix) -> Vec<Vec<Complex64>> {
        (0..self.len()).map(|k| v.mul_vec(self.difference(k))).collect()
    }
}

fn norm2(d: &[Complex64]) -> f64 {
    d.iter().map(|z| z.norm_sqr()).sum()
}

/// Threshold-free summary of a precoder: each field is the smallest value of
/// the statistic whose comparison against a threshold decides membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorruptStatistics {
    /// `min_d min_{i ≤ r} |s_i|`.
    pub min_component: f64,
    /// `min_d max_{i > 1} |s_i|`.
    pub c1: f64,
    /// `min_d max_{i ≤ n_r} |s_i|`.
    pub c2: f64,
    /// `min_d min_{i ≤ r} |s_i|²`.
    pub c3: f64,
    /// `min_d max_i |s_i|`: positive when no `s` vanishes entirely.
    pub all_components: f64,
}

pub fn corrupt_statistics(v: &CMatrix, spectrum: &DifferenceSpectrum, n_r: usize) -> Result<CorruptStatistics> {
    let n_t = v.rows();
    if v.cols() != spectrum.dim || n_t != spectrum.dim {
        return Err(Error::DimensionMismatch {
            expected: spectrum.dim,
            got: v.cols(),
        });
    }
    if n_r == 0 {
        return Err(Error::InvalidDimension("n_r must be positive".into()));
    }
    let dev = v.unitarity_deviation();
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let r = n_t.min(n_r);
    let mut st = CorruptStatistics {
        min_component: f64::INFINITY,
        c1: f64::INFINITY,
        c2: f64::INFINITY,
        c3: f64::INFINITY,
        all_components: f64::INFINITY,
    };
    let mut mags = vec![0.0; n_t];
    for k in 0..spectrum.len() {
        let d = spectrum.difference(k);
        for (i, m) in mags.iter_mut().enumerate() {
            *m = v.row(i).iter().zip(d).map(|(a, b)| a * b).sum::<Complex64>().norm();
        }
        let min_r = mags[..r].iter().copied().fold(f64::INFINITY, f64::min);
        st.min_component = st.min_component.min(min_r);
        st.c3 = st.c3.min(min_r * min_r);
        if n_t > 1 {
            st.c1 = st.c1.min(mags[1..].iter().copied().fold(0.0, f64::max));
        }
        st.c2 = st.c2.min(mags[..n_r.min(n_t)].iter().copied().fold(0.0, f64::max));
        st.all_components = st.all_components.min(mags.iter().copied().fold(0.0, f64::max));
    }
    Ok(st)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorruptSet {
    Sc1,
    Sc2,
    Sc3,
}

/// Membership test on precomputed statistics.
pub fn in_set(st: &CorruptStatistics, set: CorruptSet, gamma: f64, p: f64) -> bool {
    let t = gamma.powf(-0.5);
    match set {
        CorruptSet::Sc1 => st.c1 <= t,
        CorruptSet::Sc2 => st.c2 <= t,
        CorruptSet::Sc3 => st.c3 <= gamma.ln().powf(-p),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub difference: Vec<Complex64>,
    /// Zero-based components that fell below the threshold.
    pub components: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorruptVerdict {
    pub is_bad: bool,
    pub in_s_c1: bool,
    pub in_s_c2: bool,
    pub in_s_c3: bool,
    /// The first difference that made the precoder bad or corrupt, if any.
    pub witness: Option<Witness>,
}

/// Exhaustive pair scan of `V` against the bad and corrupt set definitions.
pub fn classify_precoder(
    v: &CMatrix,
    alphabet: &VectorAlphabet,
    n_r: usize,
    gamma: f64,
    p: f64,
    tol: f64,
) -> Result<CorruptVerdict> {
    if !(gamma > 1.0) || !(p > 0.0) || !(tol >= 0.0) {
        return Err(Error::Domain(format!("need γ > 1, p > 0, tol ≥ 0; got {gamma}, {p}, {tol}")));
    }
    let spectrum = DifferenceSpectrum::new(alphabet);
    let st = corrupt_statistics(v, &spectrum, n_r)?;
    let n_t = v.rows();
    let r = n_t.min(n_r);
    let t = gamma.powf(-0.5);
    let t3 = gamma.ln().powf(-p / 2.0);
    let witness = (0..spectrum.len()).find_map(|k| {
        let d = spectrum.difference(k);
        let s = v.mul_vec(d);
        let below = |lim: f64, range: std::ops::Range<usize>| -> Vec<usize> { range.filter(|&i| s[i].norm() <= lim).collect() };
        let candidates = [
            below(tol, 0..r),
            if n_t > 1 && below(t, 1..n_t).len() == n_t - 1 { below(t, 1..n_t) } else { Vec::new() },
            if below(t, 0..r).len() == r { below(t, 0..r) } else { Vec::new() },
            below(t3, 0..r),
        ];
        candidates.into_iter().find(|c| !c.is_empty()).map(|components| Witness {
            difference: d.to_vec(),
            components,
        })
    });
    Ok(CorruptVerdict {
        is_bad: st.min_component <= tol,
        in_s_c1: n_t > 1 && in_set(&st, CorruptSet::Sc1, gamma, p),
        in_s_c2: in_set(&st, CorruptSet::Sc2, gamma, p),
        in_s_c3: in_set(&st, CorruptSet::Sc3, gamma, p),
        witness,
    })
}

/// Set probabilities at several SNRs from one common set of Haar draws.
#[allow(clippy::too_many_arguments)]
pub fn estimate_pcp_curve(
    n_t: usize,
    n_r: usize,
    gammas: &[f64],
    set: CorruptSet,
    n_trials: u64,
    alphabet: &VectorAlphabet,
    p: f64,
    seed: u64,
) -> Result<Vec<MonteCarloEstimate>> {
    if alphabet.dim() != n_t {
        return Err(Error::DimensionMismatch {
            expected: n_t,
            got: alphabet.dim(),
        });
    }
    if gammas.iter().any(|g| !(*g > 1.0)) {
        return Err(Error::Domain("corrupt-set thresholds need γ > 1".into()));
    }
    let spectrum = DifferenceSpectrum::new(alphabet);
    let root = SeedStream::new(seed);
    let counts = (0..n_trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let v = sample_haar_unitary(n_t, &mut root.child(t).rng())?;
            let st = corrupt_statistics(&v, &spectrum, n_r)?;
            Ok(gammas.iter().map(|&g| u64::from(in_set(&st, set, g, p))).collect())
        })
        .try_reduce(
            || vec![0; gammas.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    let est: Vec<MonteCarloEstimate> = counts
        .into_iter()
        .map(|h| MonteCarloEstimate::proportion(h, n_trials, seed))
        .collect();
    for (g, e) in gammas.iter().zip(&est) {
        if e.hits() < 10 {
            log::warn!("only {} corrupt draws at γ = {g}; the estimate is unreliable", e.hits());
        }
    }
    Ok(est)
}

pub fn estimate_pcp(
    n_t: usize,
    n_r: usize,
    gamma: f64,
    set: CorruptSet,
    n_trials: u64,
    alphabet: &VectorAlphabet,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    Ok(estimate_pcp_curve(n_t, n_r, &[gamma], set, n_trials, alphabet, 2.0, seed)?[0])
}

/// Pairwise corruption probability for the shortest difference `d`, using
/// the unit-vector statistic `v = V d / ‖d‖` (uniform on the sphere).
#[allow(clippy::too_many_arguments)]
pub fn single_pair_pcp(n_t: usize, n_r: usize, gammas: &[f64], set: CorruptSet, n_trials: u64, alphabet: &VectorAlphabet, p: f64, seed: u64) -> Result<Vec<MonteCarloEstimate>> {
    let spectrum = DifferenceSpectrum::new(alphabet);
    let d = spectrum.shortest().to_vec();
    let dn = norm2(&d).sqrt();
    let unit: Vec<Complex64> = d.iter().map(|z| z / dn).collect();
    let r = n_t.min(n_r);
    let root = SeedStream::new(seed);
    let counts = (0..n_trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let v = sample_haar_unitary(n_t, &mut root.child(t).rng())?.mul_vec(&unit);
            let mags: Vec<f64> = v.iter().map(|z| z.norm() * dn).collect();
            Ok(gammas
                .iter()
                .map(|&g| {
                    let th = g.powf(-0.5);
                    u64::from(match set {
                        CorruptSet::Sc1 => mags[1..].iter().all(|&m| m <= th),
                        CorruptSet::Sc2 => mags[..n_r.min(n_t)].iter().all(|&m| m <= th),
                        CorruptSet::Sc3 => mags[..r].iter().any(|&m| m * m <= g.ln().powf(-p)),
                    })
                })
                .collect())
        })
        .try_reduce(
            || vec![0; gammas.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(counts
        .into_iter()
        .map(|h| MonteCarloEstimate::proportion(h, n_trials, seed))
        .collect())
}

/// Beta CDF; closed forms when either shape parameter is 1.
pub fn beta_cdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!("beta_cdf({x}, {a}, {b})")));
    }
    Ok(if a == 1.0 {
        1.0 - (1.0 - x).powf(b)
    } else if b == 1.0 {
        x.powf(a)
    } else {
        statrs::function::beta::beta_reg(a, b, x)
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaTailReport {
    pub n_t: usize,
    pub draws: u64,
    /// KS distance of `|v_1|²` (unit vector `V e_1`) from `Beta(1, n_t − 1)`.
    pub ks_statistic: f64,
    /// `Pr(|v_1|² ≤ x)` measured and predicted at `x = 0.01`.
    pub tail_x: f64,
    pub empirical_tail: f64,
    pub exact_tail: f64,
}

/// Checks the squared-magnitude law of one coordinate of a Haar column.
pub fn beta_tail_check(n_t: usize, draws: u64, seed: u64) -> Result<BetaTailReport> {
    if n_t < 2 {
        return Err(Error::InvalidDimension(format!("Beta check needs n_t ≥ 2, got {n_t}")));
    }
    let root = SeedStream::new(seed);
    let mut samples = (0..draws)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let v = sample_haar_unitary(n_t, &mut root.child(t).rng())?;
            Ok(v[(0, 0)].norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    let b = (n_t - 1) as f64;
    let tail_x = 0.01;
    let empirical_tail = samples.iter().filter(|&&x| x <= tail_x).count() as f64 / draws as f64;
    let ks = ks_statistic(&mut samples, |x| beta_cdf(x.clamp(0.0, 1.0), 1.0, b).unwrap_or(0.0));
    Ok(BetaTailReport {
        n_t,
        draws,
        ks_statistic: ks,
        tail_x,
        empirical_tail,
        exact_tail: beta_cdf(tail_x, 1.0, b)?,
    })
}

fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// A member of one of the five bad 2x2 QPSK families, with free phases
/// drawn from `rng`.
pub fn bad_precoder_family<R: Rng + ?Sized>(family: u8, rng: &mut R) -> Result<CMatrix> {
    let mut ang = || rng.random::<f64>() * 2.0 * std::f64::consts::PI;
    let (rho, psi) = (ang(), ang());
    let k = (rng.random::<u32>() % 4) as f64 * std::f64::consts::FRAC_PI_2;
    let q = std::f64::consts::FRAC_PI_4;
    let pi = std::f64::consts::PI;
    let z = Complex64::new(0.0, 0.0);
    let (s2, s3) = (std::f64::consts::FRAC_1_SQRT_2, 1.0 / 3f64.sqrt());
    let r2 = 2f64.sqrt();
    let m = match family {
        1 => CMatrix::from_rows(&[vec![z, cis(rho)], vec![cis(psi), z]]),
        2 => CMatrix::from_rows(&[vec![cis(rho), z], vec![z, cis(psi)]]),
        3 => CMatrix::from_rows(&[
            vec![cis(rho) * s2, cis(rho + pi + k) * s2],
            vec![cis(psi) * s2, cis(psi + k) * s2],
        ]),
        4 => CMatrix::from_rows(&[
            vec![cis(rho) * s3, cis(rho + q + k) * (r2 * s3)],
            vec![cis(psi) * (r2 * s3), cis(psi + q + k + pi) * s3],
        ]),
        5 => CMatrix::from_rows(&[
            vec![cis(rho) * (r2 * s3), cis(rho + q + k) * s3],
            vec![cis(psi) * s3, cis(psi + q + k + pi) * (r2 * s3)],
        ]),
        _ => return Err(Error::Unsupported(format!("bad precoder family {family}; expected 1 to 5"))),
    };
    debug_assert!(m.is_unitary(1e-12));
    Ok(m)
}

fn bad_family_cloud(family: u8, gamma_high: f64, cfg: &MiConfig) -> Result<(PointCloud, NoiseBank)> {
    if gamma_high < 1e4 {
        return Err(Error::Domain(format!("ceiling needs γ ≥ 1e4, got {gamma_high}")));
    }
    cfg.validate()?;
    let alphabet = build_vector_alphabet(build_qam(4)?, 2, 2)?;
    let v = bad_precoder_family(family, &mut SeedStream::new(cfg.seed).child(u64::from(family)).rng())?;
    let h = effective_map(&[1.0, 0.0], &v, gamma_high);
    let cloud = PointCloud::from_map(&h, &alphabet)?;
    Ok((cloud, noise_bank(2 * h.rows(), cfg)))
}

/// Largest achievable MI of a bad family member when one eigenmode has
/// faded away (`Σ = diag(1, 0)`): the capacity over input distributions,
/// which at high SNR tends to log2 of the number of distinct images.
pub fn bad_precoder_mi_ceiling(family: u8, gamma_high: f64, cfg: &MiConfig) -> Result<f64> {
    let (cloud, bank) = bad_family_cloud(family, gamma_high, cfg)?;
    Ok(cloud.max_mutual_information(&bank, 500, 1e-4)?.0)
}

/// The same quantity with uniformly used QPSK inputs.
pub fn bad_precoder_uniform_mi(family: u8, gamma_high: f64, cfg: &MiConfig) -> Result<f64> {
    let (cloud, bank) = bad_family_cloud(family, gamma_high, cfg)?;
    cloud.mutual_information(&bank)
}
