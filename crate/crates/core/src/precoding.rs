//! Unitary precoder schedules and reference space-time block codes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{complex_to_real, real_to_complex, CMatrix, RMatrix};
use crate::randmat::sample_haar_unitary;
use crate::rng::SeedStream;

/// How `P_t` evolves over the channel uses of one codeword.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleKind {
    Identity,
    /// One Haar matrix for the whole codeword.
    FixedRandom,
    /// A fresh Haar matrix for each of `N` contiguous segments.
    EmiN(usize),
    /// A fresh Haar matrix every channel use.
    Emi,
    /// Real 2x2 rotation by the given angle in radians.
    ToyRotation(f64),
}

/// A deterministic precoder sequence `P_0, ..., P_{N_c - 1}`.
#[derive(Debug, Clone)]
pub struct PrecoderSchedule {
    kind: ScheduleKind,
    n_t: usize,
    n_c: usize,
    seed: SeedStream,
    matrices: Vec<CMatrix>,
    segment_len: usize,
}

pub fn make_schedule(kind: ScheduleKind, n_t: usize, n_c: usize, seed: SeedStream) -> Result<PrecoderSchedule> {
    if n_t == 0 || n_c == 0 {
        return Err(Error::InvalidDimension(format!("n_t = {n_t}, N_c = {n_c}")));
    }
    let mut segment_len = n_c;
    let matrices = match kind {
        ScheduleKind::Identity => vec![CMatrix::identity(n_t)],
        ScheduleKind::FixedRandom => vec![sample_haar_unitary(n_t, &mut seed.child(0).rng())?],
        ScheduleKind::EmiN(n) => {
            if n == 0 || n > n_c {
                return Err(Error::Domain(format!("EMI-N needs 1 <= N <= N_c, got N = {n}, N_c = {n_c}")));
            }
            segment_len = n_c / n;
            (0..n as u64)
                .map(|s| sample_haar_unitary(n_t, &mut seed.child(s).rng()))
                .collect::<Result<_>>()?
        }
        ScheduleKind::Emi => {
            segment_len = 1;
            Vec::new()
        }
        ScheduleKind::ToyRotation(theta) => {
            if n_t != 2 {
                return Err(Error::Unsupported(format!("rotation precoder needs n_t = 2, got {n_t}")));
            }
            vec![rotation(theta)]
        }
    };
    Ok(PrecoderSchedule {
        kind,
        n_t,
        n_c,
        seed,
        matrices,
        segment_len,
    })
}

/// `[[cos θ, −sin θ], [sin θ, cos θ]]`.
pub fn rotation(theta: f64) -> CMatrix {
    let (s, c) = theta.sin_cos();
    CMatrix::from_rows(&[vec![c.into(), (-s).into()], vec![s.into(), c.into()]])
}

impl PrecoderSchedule {
    pub fn kind(&self) -> ScheduleKind {
        self.kind
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_c(&self) -> usize {
        self.n_c
    }

    /// Number of distinct segments; `N_c` for the EMI code.
    pub fn segments(&self) -> usize {
        match self.kind {
            ScheduleKind::EmiN(n) => n,
            ScheduleKind::Emi => self.n_c,
            _ => 1,
        }
    }

    /// Segment holding channel use `t`. A remainder of `N_c mod N` uses
    /// belongs to the last segment.
    pub fn segment_of(&self, t: usize) -> usize {
        (t / self.segment_len).min(self.segments() - 1)
    }

    /// Channel uses `[start, end)` of segment `s`.
    pub fn segment_range(&self, s: usize) -> (usize, usize) {
        let start = s * self.segment_len;
        let end = if s + 1 == self.segments() {
            self.n_c
        } else {
            start + self.segment_len
        };
        (start, end)
    }

    pub fn segment_matrix(&self, s: usize) -> Result<CMatrix> {
        if s >= self.segments() {
            return Err(Error::Domain(format!("segment {s} of {}", self.segments())));
        }
        match self.kind {
            ScheduleKind::Emi => sample_haar_unitary(self.n_t, &mut self.seed.child(s as u64).rng()),
            ScheduleKind::EmiN(_) => Ok(self.matrices[s].clone()),
            _ => Ok(self.matrices[0].clone()),
        }
    }

    /// `P_t`.
    pub fn matrix(&self, t: usize) -> Result<CMatrix> {
        if t >= self.n_c {
            return Err(Error::Domain(format!("channel use {t} outside codeword of {}", self.n_c)));
        }
        self.segment_matrix(self.segment_of(t))
    }
}

/// `x̃_t = P_t z_t`.
pub fn precode(schedule: &PrecoderSchedule, t: usize, z: &[Complex64]) -> Result<Vec<Complex64>> {
    if z.len() != schedule.n_t() {
        return Err(Error::DimensionMismatch {
            expected: schedule.n_t(),
            got: z.len(),
        });
    }
    Ok(schedule.matrix(t)?.mul_vec(z))
}

/// Upper bound on the coding rate for which EMI-N keeps full diversity.
pub fn max_rate_bound_emi_n(n: u64, n_t: usize) -> f64 {
    let n = n as f64;
    1.0 - 1.0 / n + 1.0 / (n_t as f64 * n)
}

/// Reference space-time codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StcKind {
    Alamouti,
    Golden,
}

/// A linear dispersion code on `n_t` antennas and `k` channel uses.
///
/// The generator acts on the interleaved real/imaginary parts of the input
/// symbols and yields the real embedding of `vec(X)` (columns of `X` are
/// channel uses), which lets conjugating codes share the linear machinery.
#[derive(Debug, Clone)]
pub struct SpaceTimeCode {
    pub kind: StcKind,
    pub n_t: usize,
    pub k: usize,
    pub symbols_per_block: usize,
    pub generator: RMatrix,
}

impl SpaceTimeCode {
    pub fn alamouti() -> Self {
        // vec(X) = (a, b, −b*, a*) with z = (a_re, a_im, b_re, b_im).
        let rows = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![0.0, 0.0, -1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, -1.0, 0.0, 0.0],
        ];
        SpaceTimeCode {
            kind: StcKind::Alamouti,
            n_t: 2,
            k: 2,
            symbols_per_block: 2,
            generator: RMatrix::from_rows(&rows),
        }
    }

    pub fn golden() -> Self {
        let sq5 = 5f64.sqrt();
        let theta = (1.0 + sq5) / 2.0;
        let theta_b = (1.0 - sq5) / 2.0;
        let i = Complex64::i();
        let alpha = Complex64::new(1.0, 1.0 - theta);
        let alpha_b = Complex64::new(1.0, 1.0 - theta_b);
        let z = Complex64::new(0.0, 0.0);
        let s = 1.0 / sq5;
        let m = CMatrix::from_rows(&[
            vec![alpha * s, alpha * theta * s, z, z],
            vec![z, z, i * alpha_b * s, i * alpha_b * theta_b * s],
            vec![z, z, alpha * s, alpha * theta * s],
            vec![alpha_b * s, alpha_b * theta_b * s, z, z],
        ]);
        SpaceTimeCode {
            kind: StcKind::Golden,
            n_t: 2,
            k: 2,
            symbols_per_block: 4,
            generator: m.to_real(),
        }
    }

    pub fn from_kind(kind: StcKind) -> Self {
        match kind {
            StcKind::Alamouti => Self::alamouti(),
            StcKind::Golden => Self::golden(),
        }
    }

    /// `vec(X)`: the `n_t` entries of each channel use, in time order.
    pub fn encode(&self, z: &[Complex64]) -> Result<Vec<Complex64>> {
        if z.len() != self.symbols_per_block {
            return Err(Error::DimensionMismatch {
                expected: self.symbols_per_block,
                got: z.len(),
            });
        }
        Ok(real_to_complex(&self.generator.mul_vec(&complex_to_real(z))))
    }

    /// The block as an `n_t x k` matrix.
    pub fn encode_matrix(&self, z: &[Complex64]) -> Result<CMatrix> {
        let v = self.encode(z)?;
        Ok(CMatrix::from_fn(self.n_t, self.k, |r, c| v[c * self.n_t + r]))
    }

    /// Expected transmit energy per channel use for unit-energy symbols.
    pub fn energy_per_use(&self) -> f64 {
        let g = &self.generator;
        let total: f64 = g.as_slice().iter().map(|x| x * x).sum();
        // each real input coordinate carries variance 1/2
        total / 2.0 / self.k as f64
    }
}

pub fn alamouti_encode(z: &[Complex64]) -> Result<CMatrix> {
    SpaceTimeCode::alamouti().encode_matrix(z)
}

pub fn golden_encode(z: &[Complex64]) -> Result<CMatrix> {
    SpaceTimeCode::golden().encode_matrix(z)
}
