//! Scalar QAM constellations and Cartesian vector alphabets.
//!
//! Square QAM is built as the product of two Gray-labeled PAM axes. A point's
//! label is `gray(i_I) << b_Q | gray(i_Q)` and points are stored in label
//! order, so a label is also the point's index. Vector alphabets concatenate
//! component labels, first component most significant, which makes the
//! vector index equal to its bit pattern read MSB first.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: usize) -> usize {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// A unit-energy scalar constellation with Gray labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    bits_i: usize,
    bits_q: usize,
    levels_i: Vec<f64>,
    levels_q: Vec<f64>,
}

impl Constellation {
    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Points indexed by label.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Ascending in-phase amplitudes.
    pub fn levels_i(&self) -> &[f64] {
        &self.levels_i
    }

    /// Ascending quadrature amplitudes (`[0.0]` for BPSK).
    pub fn levels_q(&self) -> &[f64] {
        &self.levels_q
    }

    /// Label of the point at axis positions `(i, q)`.
    pub fn label_of_levels(&self, i: usize, q: usize) -> usize {
        (gray(i) << self.bits_q) | gray(q)
    }

    /// Axis positions of a label.
    pub fn levels_of_label(&self, label: usize) -> (usize, usize) {
        let mask = (1 << self.bits_q) - 1;
        (gray_inverse(label >> self.bits_q), gray_inverse(label & mask))
    }

    pub fn average_energy(&self) -> f64 {
        self.points.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.size() as f64
    }

    /// Label bits of a point, MSB first.
    pub fn label_bits(&self, label: usize) -> Vec<u8> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|b| ((label >> b) & 1) as u8)
            .collect()
    }
}

/// Square M-QAM with unit average energy; `M = 2` gives BPSK `{+1, −1}`.
pub fn build_qam(m: usize) -> Result<Constellation> {
    let (bits_i, bits_q) = match m {
        2 => (1, 0),
        4 => (1, 1),
        16 => (2, 2),
        64 => (3, 3),
        _ => return Err(Error::Unsupported(format!("constellation size {m}; expected 2, 4, 16 or 64"))),
    };
    let pam = |bits: usize| -> Vec<f64> {
        let l = 1usize << bits;
        (0..l).map(|i| 2.0 * i as f64 - (l as f64 - 1.0)).collect()
    };
    let raw_i = pam(bits_i);
    let raw_q = if bits_q == 0 { vec![0.0] } else { pam(bits_q) };
    let energy = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64;
    let scale = 1.0 / (energy(&raw_i) + energy(&raw_q)).sqrt();
    let levels_i: Vec<f64> = raw_i.iter().map(|x| x * scale).collect();
    let levels_q: Vec<f64> = raw_q.iter().map(|x| x * scale).collect();

    let mut points = vec![Complex64::new(0.0, 0.0); m];
    for (i, &re) in levels_i.iter().enumerate() {
        for (q, &im) in levels_q.iter().enumerate() {
            points[(gray(i) << bits_q) | gray(q)] = Complex64::new(re, im);
        }
    }
    Ok(Constellation {
        points,
        bits_per_symbol: bits_i + bits_q,
        bits_i,
        bits_q,
        levels_i,
        levels_q,
    })
}

/// Cartesian product alphabet for one channel use (or one code block).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorAlphabet {
    scalar: Constellation,
    dim: usize,
    active: usize,
    scale: f64,
    vectors: Vec<Complex64>,
}

impl VectorAlphabet {
    /// `dim` components of which the first `active` carry QAM symbols scaled
    /// by `scale`; the remaining components are structurally zero.
    pub fn new(scalar: Constellation, dim: usize, active: usize, scale: f64) -> Result<Self> {
        if active == 0 || active > dim {
            return Err(Error::InvalidDimension(format!("{active} active of {dim} components")));
        }
        let bits = active * scalar.bits_per_symbol();
        if bits > 20 {
            return Err(Error::Unsupported(format!("vector alphabet of 2^{bits} points")));
        }
        let size = 1usize << bits;
        let bps = scalar.bits_per_symbol();
        let mask = scalar.size() - 1;
        let mut vectors = vec![Complex64::new(0.0, 0.0); size * dim];
        for idx in 0..size {
            for c in 0..active {
                let label = (idx >> (bps * (active - 1 - c))) & mask;
                vectors[idx * dim + c] = scalar.point(label) * scale;
            }
        }
        Ok(VectorAlphabet {
            scalar,
            dim,
            active,
            scale,
            vectors,
        })
    }

    /// Plain product of `n` copies of the constellation (space-time blocks).
    pub fn product(scalar: Constellation, n: usize) -> Result<Self> {
        Self::new(scalar, n, n, 1.0)
    }

    pub fn scalar(&self) -> &Constellation {
        &self.scalar
    }

    pub fn len(&self) -> usize {
        self.vectors.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> usize {
        self.active
    }

    pub fn zero_pad(&self) -> usize {
        self.dim - self.active
    }

    /// Amplitude scale on the active components.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Bits per vector.
    pub fn bits(&self) -> usize {
        self.active * self.scalar.bits_per_symbol()
    }

    pub fn vector(&self, idx: usize) -> &[Complex64] {
        &self.vectors[idx * self.dim..(idx + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.vectors.chunks_exact(self.dim)
    }

    /// Bit `b` (0 = MSB) of vector `idx`.
    pub fn bit(&self, idx: usize, b: usize) -> u8 {
        ((idx >> (self.bits() - 1 - b)) & 1) as u8
    }

    pub fn index_of_bits(&self, bits: &[u8]) -> Result<usize> {
        if bits.len() != self.bits() {
            return Err(Error::DimensionMismatch {
                expected: self.bits(),
                got: bits.len(),
            });
        }
        Ok(bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1)))
    }

    pub fn bits_of_index(&self, idx: usize) -> Vec<u8> {
        (0..self.bits()).map(|b| self.bit(idx, b)).collect()
    }

    /// Mean of `‖z‖²` over the alphabet.
    pub fn average_energy(&self) -> f64 {
        self.vectors.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.len() as f64
    }

    /// Amplitude levels of each real coordinate (re/im interleaved), in
    /// ascending order. Structurally-zero components have the single level 0.
    pub fn real_levels(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * self.dim);
        for c in 0..self.dim {
            if c < self.active {
                out.push(self.scalar.levels_i().iter().map(|x| x * self.scale).collect());
                out.push(self.scalar.levels_q().iter().map(|x| x * self.scale).collect());
            } else {
                out.push(vec![0.0]);
                out.push(vec![0.0]);
            }
        }
        out
    }

    /// Vector index from the level position chosen on each real coordinate.
    pub fn index_of_levels(&self, levels: &[usize]) -> usize {
        debug_assert_eq!(levels.len(), 2 * self.dim);
        let bps = self.scalar.bits_per_symbol();
        (0..self.active).fold(0usize, |acc, c| {
            (acc << bps) | self.scalar.label_of_levels(levels[2 * c], levels[2 * c + 1])
        })
    }
}

/// Alphabet for one channel use of a full-rate space-only code: QAM on the
/// `min(n_t, n_r)` leading components; when `n_r < n_t` the rest are zero and
/// the active ones are scaled to mean-square magnitude `n_t / n_r`.
pub fn build_vector_alphabet(c: Constellation, n_t: usize, n_r: usize) -> Result<VectorAlphabet> {
    if n_t == 0 || n_r == 0 {
        return Err(Error::InvalidDimension(format!("{n_t}x{n_r} antennas")));
    }
    if n_r < n_t {
        VectorAlphabet::new(c, n_t, n_r, (n_t as f64 / n_r as f64).sqrt())
    } else {
        VectorAlphabet::new(c, n_t, n_t, 1.0)
    }
}

/// Maps `alphabet.bits()` bits to the corresponding symbol vector.
pub fn map_bits<'a>(bits: &[u8], alphabet: &'a VectorAlphabet) -> Result<&'a [Complex64]> {
    Ok(alphabet.vector(alphabet.index_of_bits(bits)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_points() {
        let c = build_qam(2).unwrap();
        let mut re: Vec<f64> = c.points().iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert_eq!(re, vec![-1.0, 1.0]);
        assert!(c.points().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn qpsk_points() {
        let c = build_qam(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for z in c.points() {
            assert!((z.re.abs() - h).abs() < 1e-15 && (z.im.abs() - h).abs() < 1e-15);
        }
        assert!((c.average_energy() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unit_energy_and_distinct() {
        for m in [2, 4, 16, 64] {
            let c = build_qam(m).unwrap();
            assert_eq!(c.size(), m);
            assert!((c.average_energy() - 1.0).abs() < 1e-12);
            for i in 0..m {
                for j in 0..i {
                    assert!((c.point(i) - c.point(j)).norm() > 1e-6);
                }
            }
        }
    }

    #[test]
    fn unsupported_sizes() {
        for m in [0, 1, 3, 8, 32, 128] {
            assert!(build_qam(m).is_err(), "{m}");
        }
    }

    #[test]
    fn gray_neighbors_differ_in_one_bit() {
        for m in [4, 16, 64] {
            let c = build_qam(m).unwrap();
            let pts = c.points();
            let dmin = (0..m)
                .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| (pts[i] - pts[j]).norm())
                .fold(f64::INFINITY, f64::min);
            for i in 0..m {
                for j in 0..m {
                    if i != j && (pts[i] - pts[j]).norm() < dmin * 1.001 {
                        assert_eq!((i ^ j).count_ones(), 1, "M={m} labels {i} {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn label_level_roundtrip() {
        let c = build_qam(16).unwrap();
        for label in 0..16 {
            let (i, q) = c.levels_of_label(label);
            assert_eq!(c.label_of_levels(i, q), label);
            assert_eq!(c.point(label).re, c.levels_i()[i]);
            assert_eq!(c.point(label).im, c.levels_q()[q]);
        }
    }

    #[test]
    fn vector_alphabet_sizes() {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        assert_eq!((a.len(), a.dim(), a.bits()), (16, 2, 4));
        let a = build_vector_alphabet(build_qam(2).unwrap(), 1, 1).unwrap();
        assert_eq!((a.len(), a.bits()), (2, 1));
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 1).unwrap();
        assert_eq!((a.len(), a.bits(), a.zero_pad()), (4, 2, 1));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for v in a.iter() {
            assert_eq!(v[1], Complex64::new(0.0, 0.0));
            assert!((v[0].re.abs() - h * 2f64.sqrt()).abs() < 1e-12);
        }
        // tall channels use all transmit components
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 3).unwrap();
        assert_eq!((a.len(), a.zero_pad()), (16, 0));
    }

    #[test]
    fn transmit_energy_equals_n_t() {
        for (m, t, r) in [(4, 2, 2), (4, 2, 1), (4, 3, 1), (16, 2, 2), (4, 3, 3), (2, 1, 1), (16, 3, 2)] {
            let a = build_vector_alphabet(build_qam(m).unwrap(), t, r).unwrap();
            assert!((a.average_energy() - t as f64).abs() < 1e-9, "{m} {t}x{r}");
        }
    }

    #[test]
    fn map_demap_exhaustive() {
        for (m, t, r) in [(4, 2, 2), (16, 2, 2), (4, 3, 3), (4, 2, 1), (2, 1, 1), (4, 4, 4)] {
            let a = build_vector_alphabet(build_qam(m).unwrap(), t, r).unwrap();
            assert!(a.bits() <= 8);
            let mut seen = std::collections::HashSet::new();
            for idx in 0..a.len() {
                let bits = a.bits_of_index(idx);
                let v = map_bits(&bits, &a).unwrap();
                assert_eq!(a.index_of_bits(&bits).unwrap(), idx);
                let key: Vec<(i64, i64)> = v.iter().map(|z| ((z.re * 1e9) as i64, (z.im * 1e9) as i64)).collect();
                assert!(seen.insert(key));
            }
        }
    }

    #[test]
    fn all_zero_bits_and_component_energy() {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        let v = map_bits(&[0, 0, 0, 0], &a).unwrap();
        assert_eq!(a.bits_of_index(a.index_of_bits(&[0, 0, 0, 0]).unwrap()), vec![0, 0, 0, 0]);
        assert!(v.iter().all(|z| (z.norm_sqr() - 1.0).abs() < 1e-12));
        for v in a.iter() {
            assert!(v.iter().all(|z| (z.norm_sqr() - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn wrong_bit_count() {
        let a = build_vector_alphabet(build_qam(4).unwrap(), 2, 2).unwrap();
        assert!(matches!(
            map_bits(&[0, 1, 0], &a),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn level_indexing_matches_vectors() {
        let a = build_vector_alphabet(build_qam(16).unwrap(), 2, 1).unwrap();
        let levels = a.real_levels();
        for idx in 0..a.len() {
            let v = a.vector(idx);
            let pos: Vec<usize> = v
                .iter()
                .flat_map(|z| [z.re, z.im])
                .zip(&levels)
                .map(|(x, lv)| lv.iter().position(|l| (l - x).abs() < 1e-12).unwrap())
                .collect();
            assert_eq!(a.index_of_levels(&pos), idx);
        }
    }
}
