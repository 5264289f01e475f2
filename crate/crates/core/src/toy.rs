//! The real two-branch rotation example: BPSK pairs rotated by `Q(θ)` and
//! sent over two independent Rayleigh gains with real noise `N(0, 1/2)`.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::information::{noise_bank, MiConfig, PointCloud};
use crate::rng::SeedStream;
use crate::stats::MonteCarloEstimate;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// BPSK pairs `z ∈ {±1}²`.
const INPUTS: [[f64; 2]; 4] = [[1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyChannel {
    pub beta: [f64; 2],
    pub theta: f64,
    pub gamma: f64,
}

impl ToyChannel {
    /// Validates gains and SNR; `θ` is reduced to `[0, 2π)`.
    pub fn new(beta: [f64; 2], theta: f64, gamma: f64) -> Result<Self> {
        if beta.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Domain(format!("fading gains must be non-negative, got {beta:?}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) || !theta.is_finite() {
            return Err(Error::Domain(format!("invalid SNR {gamma} or angle {theta}")));
        }
        Ok(ToyChannel {
            beta,
            theta: theta.rem_euclid(TWO_PI),
            gamma,
        })
    }

    /// Noiseless received points `√γ β ∘ Q(θ) z`.
    pub fn point_cloud(&self) -> PointCloud {
        let (s, c) = self.theta.sin_cos();
        let g = self.gamma.sqrt();
        let coords = INPUTS
            .iter()
            .flat_map(|z| {
                [
                    g * self.beta[0] * (c * z[0] - s * z[1]),
                    g * self.beta[1] * (s * z[0] + c * z[1]),
                ]
            })
            .collect();
        PointCloud::new(2, coords).expect("four points in the plane")
    }
}

/// `I(z; y | β, θ)` in bits, between 0 and 2.
pub fn toy_mutual_information(ch: &ToyChannel, cfg: &MiConfig) -> Result<f64> {
    cfg.validate()?;
    ch.point_cloud().mutual_information(&noise_bank(2, cfg))
}

/// Rayleigh gain with `E[β²] = 1` by inversion, `β = √(−ln u)`.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u: f64 = 1.0 - rng.random::<f64>();
    (-u.ln()).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThetaMode {
    Fixed(f64),
    /// Uniform on `[0, 2π)`, drawn once per channel realization.
    RandomUniform,
}

/// Outage estimates for spectral efficiency `2 R_c` at several SNRs, from a
/// common set of `(β, θ)` draws.
pub fn toy_outage_curve(mode: ThetaMode, r_c: f64, gammas: &[f64], n_trials: u64, cfg: &MiConfig) -> Result<Vec<MonteCarloEstimate>> {
    if !(r_c > 0.0 && r_c <= 1.0) {
        return Err(Error::Domain(format!("coding rate must lie in (0, 1], got {r_c}")));
    }
    cfg.validate()?;
    let rate = 2.0 * r_c;
    let root = SeedStream::new(cfg.seed);
    let counts = (0..n_trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<u64>> {
            let stream = root.child(t);
            let mut rng = stream.rng();
            let beta = [sample_rayleigh(&mut rng), sample_rayleigh(&mut rng)];
            let theta = match mode {
                ThetaMode::Fixed(th) => th,
                ThetaMode::RandomUniform => rng.random::<f64>() * TWO_PI,
            };
            let trial_cfg = cfg.with_seed(stream.key());
            gammas
                .iter()
                .map(|&g| Ok(u64::from(toy_mutual_information(&ToyChannel::new(beta, theta, g)?, &trial_cfg)? < rate)))
                .collect()
        })
        .try_reduce(
            || vec![0; gammas.len()],
            |a, b| Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        )?;
    Ok(counts
        .into_iter()
        .map(|h| MonteCarloEstimate::proportion(h, n_trials, cfg.seed))
        .collect())
}

pub fn toy_outage(mode: ThetaMode, r_c: f64, gamma: f64, n_trials: u64, cfg: &MiConfig) -> Result<MonteCarloEstimate> {
    Ok(toy_outage_curve(mode, r_c, &[gamma], n_trials, cfg)?[0])
}

/// `min |s_i|` over components and distinct input pairs, with
/// `s = Q(θ)(z − z′)` and `z ∈ {±a}²`.
pub fn min_difference_component(theta: f64, amplitude: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut best = f64::INFINITY;
    for (i, z) in INPUTS.iter().enumerate() {
        for zp in &INPUTS[..i] {
            let d = [amplitude * (z[0] - zp[0]), amplitude * (z[1] - zp[1])];
            best = best.min((c * d[0] - s * d[1]).abs()).min((s * d[0] + c * d[1]).abs());
        }
    }
    best
}
