//! Random channel and precoder matrices.
//!
//! Channels are drawn with i.i.d. `CN(0,1)` entries and decomposed as
//! `H = U Σ V†`. Haar-distributed unitaries come from the QR factorization of
//! a complex Gaussian matrix whose triangular factor has a positive real
//! diagonal (Gram-Schmidt on the columns yields exactly that factorization).

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{gram_schmidt_columns, svd, CMatrix};
use crate::rng::complex_normal;

/// Draws a unitary matrix uniformly with respect to the Haar measure.
pub fn sample_haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("unitary dimension must be at least 1".into()));
    }
    loop {
        let mut g = CMatrix::from_fn(n, n, |_, _| complex_normal(rng));
        if gram_schmidt_columns(&mut g) {
            debug_assert!(g.unitarity_deviation() < 1e-10);
            return Ok(g);
        }
    }
}

/// One quasi-static channel draw and its singular value decomposition.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub n_t: usize,
    pub n_r: usize,
    /// `n_r x n_t` path gains.
    pub h: CMatrix,
    /// `n_r x n_r` unitary.
    pub u: CMatrix,
    /// The `min(n_t, n_r)` singular values, non-increasing.
    pub sigma: Vec<f64>,
    /// `n_t x n_t` unitary.
    pub v: CMatrix,
}

impl ChannelRealization {
    /// Decomposes a given channel matrix.
    pub fn from_matrix(h: CMatrix) -> Result<Self> {
        let (n_r, n_t) = (h.rows(), h.cols());
        if n_r == 0 || n_t == 0 {
            return Err(Error::InvalidDimension("channel needs at least one antenna per side".into()));
        }
        let d = svd(&h);
        let ch = ChannelRealization {
            n_t,
            n_r,
            h,
            u: d.u,
            sigma: d.singular_values,
            v: d.v,
        };
        debug_assert!(ch.reconstruction_error() < 1e-10);
        Ok(ch)
    }

    pub fn min_dim(&self) -> usize {
        self.n_t.min(self.n_r)
    }

    /// `‖U Σ V† − H‖_F`.
    pub fn reconstruction_error(&self) -> f64 {
        let mut s = CMatrix::zeros(self.n_r, self.n_t);
        for (i, v) in self.sigma.iter().enumerate() {
            s[(i, i)] = (*v).into();
        }
        (&(&(&self.u * &s) * &self.v.adjoint()) - &self.h).frobenius_norm()
    }
}

/// Draws `H` with i.i.d. unit-variance circularly-symmetric Gaussian entries.
pub fn sample_channel<R: Rng + ?Sized>(n_t: usize, n_r: usize, rng: &mut R) -> Result<ChannelRealization> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidDimension(format!("channel {n_t}x{n_r}")));
    }
    let h = CMatrix::from_fn(n_r, n_t, |_, _| complex_normal(rng));
    ChannelRealization::from_matrix(h)
}

/// Normalized fading gains `α_i = −log σ_i² / log γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingGains {
    /// Same order as the singular values, hence non-decreasing; `+∞` where
    /// the singular value is zero.
    pub alpha: Vec<f64>,
    pub gamma: f64,
    /// Marks the entries of `alpha` that are the zero-gain sentinel.
    pub zero_gain: Vec<bool>,
}

pub fn normalized_fading_gains(ch: &ChannelRealization, gamma: f64) -> Result<FadingGains> {
    fading_gains_from_sigma(&ch.sigma, gamma)
}

/// Same as [`normalized_fading_gains`] for bare singular values.
pub fn fading_gains_from_sigma(sigma: &[f64], gamma: f64) -> Result<FadingGains> {
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!("fading gains need gamma > 1, got {gamma}")));
    }
    let lg = gamma.ln();
    let mut alpha = Vec::with_capacity(sigma.len());
    let mut zero_gain = Vec::with_capacity(sigma.len());
    for &s in sigma {
        if s <= 0.0 {
            alpha.push(f64::INFINITY);
            zero_gain.push(true);
        } else {
            alpha.push(-(s * s).ln() / lg);
            zero_gain.push(false);
        }
    }
    Ok(FadingGains {
        alpha,
        gamma,
        zero_gain,
    })
}

/// The square parallel channel left after discarding noise-only receive
/// dimensions (tall `H`) or the null space of `Σ` (fat `H`).
#[derive(Debug, Clone)]
pub struct ReducedChannel {
    pub n_t: usize,
    /// Diagonal of the `r x r` effective `Σ`, `r = min(n_t, n_r)`.
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl ReducedChannel {
    /// Number of components of `x_t = V_t z_t` that reach the receiver.
    pub fn active(&self) -> usize {
        self.sigma.len()
    }

    /// `√γ Σ_eff V_t` restricted to the active rows: the linear map from the
    /// precoder input `z_t` to the noiseless reduced observation.
    pub fn effective_map(&self, v_t: &CMatrix, gamma: f64) -> CMatrix {
        effective_map(&self.sigma, v_t, gamma)
    }
}

/// `√γ diag(σ) V_t`, keeping the `σ.len()` top rows of `V_t`.
pub fn effective_map(sigma: &[f64], v_t: &CMatrix, gamma: f64) -> CMatrix {
    let g = gamma.sqrt();
    CMatrix::from_fn(sigma.len(), v_t.cols(), |r, c| v_t[(r, c)] * (g * sigma[r]))
}

pub fn reduce_channel(ch: &ChannelRealization) -> ReducedChannel {
    ReducedChannel {
        n_t: ch.n_t,
        sigma: ch.sigma.clone(),
        v: ch.v.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;
    use crate::stats::{ks_statistic, ks_two_sample};

    #[test]
    fn zero_dimension_rejected() {
        let mut rng = SeedStream::new(0).rng();
        assert!(matches!(sample_haar_unitary(0, &mut rng), Err(Error::InvalidDimension(_))));
        assert!(sample_channel(0, 2, &mut rng).is_err());
    }

    #[test]
    fn haar_is_unitary() {
        let mut rng = SeedStream::new(11).rng();
        for n in 1..=4 {
            for _ in 0..200 {
                assert!(sample_haar_unitary(n, &mut rng).unwrap().unitarity_deviation() < 1e-10);
            }
        }
    }

    #[test]
    fn scalar_haar_phase_is_uniform() {
        let mut rng = SeedStream::new(12).rng();
        let mut phases: Vec<f64> = (0..100_000)
            .map(|_| {
                let u = sample_haar_unitary(1, &mut rng).unwrap()[(0, 0)];
                assert!((u.norm() - 1.0).abs() < 1e-12);
                u.arg().rem_euclid(std::f64::consts::TAU)
            })
            .collect();
        let d = ks_statistic(&mut phases, |x| x / std::f64::consts::TAU);
        let p = crate::stats::kolmogorov_survival(d * (phases.len() as f64).sqrt());
        assert!(p > 0.01, "KS p = {p}");
    }

    #[test]
    fn left_invariance_first_entry() {
        let mut rng = SeedStream::new(13).rng();
        let d = sample_haar_unitary(3, &mut rng).unwrap();
        let n = 100_000;
        let mut plain: Vec<f64> = (0..n)
            .map(|_| sample_haar_unitary(3, &mut rng).unwrap()[(0, 0)].norm())
            .collect();
        let mut rotated: Vec<f64> = (0..n)
            .map(|_| (&d * &sample_haar_unitary(3, &mut rng).unwrap())[(0, 0)].norm())
            .collect();
        let (_, p) = ks_two_sample(&mut plain, &mut rotated);
        assert!(p > 0.01, "p = {p}");
    }

    #[test]
    fn haar_is_a_bijection_on_vectors() {
        let mut rng = SeedStream::new(14).rng();
        for _ in 0..1000 {
            let u = sample_haar_unitary(3, &mut rng).unwrap();
            let b1: Vec<_> = (0..3).map(|_| complex_normal(&mut rng)).collect();
            let b2: Vec<_> = (0..3).map(|_| complex_normal(&mut rng)).collect();
            let sep: f64 = b1.iter().zip(&b2).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            let img: f64 = u
                .mul_vec(&b1)
                .iter()
                .zip(u.mul_vec(&b2))
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(img > 1e-12 * sep);
        }
    }

    #[test]
    fn scalar_channel_singular_value() {
        let mut rng = SeedStream::new(15).rng();
        for _ in 0..100 {
            let ch = sample_channel(1, 1, &mut rng).unwrap();
            assert!((ch.sigma[0] - ch.h[(0, 0)].norm()).abs() < 1e-14);
        }
    }

    #[test]
    fn channel_invariants_hold_for_all_shapes() {
        let mut rng = SeedStream::new(16).rng();
        for (t, r) in [(1, 1), (2, 2), (2, 3), (3, 2), (3, 1), (3, 3)] {
            for _ in 0..100 {
                let ch = sample_channel(t, r, &mut rng).unwrap();
                assert!(ch.reconstruction_error() < 1e-10);
                assert!(ch.u.unitarity_deviation() < 1e-10);
                assert!(ch.v.unitarity_deviation() < 1e-10);
                assert_eq!(ch.sigma.len(), t.min(r));
                assert!(ch.sigma.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn channel_entry_power_and_trace_identity() {
        let mut rng = SeedStream::new(17).rng();
        let n = 1_000_000;
        let mut entry = [0.0f64; 4];
        let mut trace = 0.0;
        for _ in 0..n {
            let ch = sample_channel(2, 2, &mut rng).unwrap();
            for (i, z) in ch.h.as_slice().iter().enumerate() {
                entry[i] += z.norm_sqr();
            }
            trace += ch.sigma.iter().map(|s| s * s).sum::<f64>();
        }
        for e in entry {
            assert!((e / n as f64 - 1.0).abs() < 0.01);
        }
        assert!((trace / n as f64 - 4.0).abs() < 0.02);
    }

    #[test]
    fn fading_gain_examples() {
        let g = fading_gains_from_sigma(&[1.0], 50.0).unwrap();
        assert_eq!(g.alpha[0], 0.0);
        let gamma: f64 = 1e3;
        let g = fading_gains_from_sigma(&[(1.0 / gamma).sqrt()], gamma).unwrap();
        assert!((g.alpha[0] - 1.0).abs() < 1e-12);
        let g = fading_gains_from_sigma(&[2.0, 0.5], 100.0).unwrap();
        let expect = 4f64.ln() / 100f64.ln();
        assert!((g.alpha[0] + expect).abs() < 1e-12);
        assert!((g.alpha[1] - expect).abs() < 1e-12);
        assert!((expect - std::f64::consts::LOG10_2).abs() < 1e-12);
    }

    #[test]
    fn fading_gain_sentinel_and_domain() {
        let g = fading_gains_from_sigma(&[1.0, 0.0], 10.0).unwrap();
        assert!(g.alpha[1].is_infinite() && g.zero_gain[1] && !g.zero_gain[0]);
        assert!(fading_gains_from_sigma(&[1.0], 1.0).is_err());
        assert!(fading_gains_from_sigma(&[1.0], 0.5).is_err());
    }

    #[test]
    fn fading_gains_roundtrip_sigma() {
        let mut rng = SeedStream::new(18).rng();
        for _ in 0..100 {
            let ch = sample_channel(2, 3, &mut rng).unwrap();
            let gamma = 37.0;
            let g = normalized_fading_gains(&ch, gamma).unwrap();
            assert!(g.alpha.windows(2).all(|w| w[0] <= w[1]));
            for (a, s) in g.alpha.iter().zip(&ch.sigma) {
                let back = gamma.powf(-a);
                assert!((back - s * s).abs() <= 1e-10 * s * s);
            }
        }
    }

    #[test]
    fn reductions() {
        let mut rng = SeedStream::new(19).rng();
        let ch = sample_channel(2, 2, &mut rng).unwrap();
        assert_eq!(reduce_channel(&ch).sigma, ch.sigma);
        let ch = sample_channel(2, 3, &mut rng).unwrap();
        let red = reduce_channel(&ch);
        assert_eq!(red.active(), 2);
        // the third row of U† H is pure null space
        let proj = &ch.u.adjoint() * &ch.h;
        assert!(proj.row(2).iter().all(|z| z.norm() < 1e-10));
        let ch = sample_channel(3, 1, &mut rng).unwrap();
        let red = reduce_channel(&ch);
        assert_eq!(red.active(), 1);
        let m = red.effective_map(&CMatrix::identity(3), 4.0);
        assert_eq!((m.rows(), m.cols()), (1, 3));
    }
}
