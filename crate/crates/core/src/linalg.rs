//! Small dense complex and real matrices.
//!
//! Channel and precoder matrices never exceed a handful of rows, so a flat
//! row-major buffer with straightforward loops is all that is needed.

use num_complex::Complex64;
use std::ops::{Index, IndexMut, Mul};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row slices; panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        CMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn diag(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Keeps the first `n` rows.
    pub fn top_rows(&self, n: usize) -> Self {
        assert!(n <= self.rows);
        CMatrix {
            rows: n,
            cols: self.cols,
            data: self.data[..n * self.cols].to_vec(),
        }
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance between `A†A` and the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let g = &self.adjoint() * self;
        let n = g.rows;
        (&g - &Self::identity(n)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.rows == self.cols && self.unitarity_deviation() <= tol
    }

    /// Kronecker product `I_k ⊗ self`.
    pub fn block_diag_repeat(&self, k: usize) -> Self {
        let mut m = Self::zeros(self.rows * k, self.cols * k);
        for b in 0..k {
            for r in 0..self.rows {
                for c in 0..self.cols {
                    m[(b * self.rows + r, b * self.cols + c)] = self[(r, c)];
                }
            }
        }
        m
    }

    /// Real embedding: complex entry `a` at (r, c) becomes the 2x2 block
    /// `[[re a, -im a], [im a, re a]]`, with real and imaginary parts of each
    /// complex coordinate interleaved.
    pub fn to_real(&self) -> RMatrix {
        let mut m = RMatrix::zeros(2 * self.rows, 2 * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let a = self[(r, c)];
                m[(2 * r, 2 * c)] = a.re;
                m[(2 * r, 2 * c + 1)] = -a.im;
                m[(2 * r + 1, 2 * c)] = a.im;
                m[(2 * r + 1, 2 * c + 1)] = a.re;
            }
        }
        m
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

impl std::ops::Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = RMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "mul_vec dimension");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: f64) -> Self {
        RMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &RMatrix {
    type Output = RMatrix;
    fn mul(self, rhs: &RMatrix) -> RMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension");
        let mut out = RMatrix::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                for c in 0..rhs.cols {
                    out.data[r * rhs.cols + c] += a * rhs[(k, c)];
                }
            }
        }
        out
    }
}

/// Interleaves real and imaginary parts.
pub fn complex_to_real(v: &[Complex64]) -> Vec<f64> {
    v.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn real_to_complex(v: &[f64]) -> Vec<Complex64> {
    v.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
}

/// Orthonormalizes the columns of a square matrix in place (modified
/// Gram-Schmidt). The implied triangular factor has a positive real
/// diagonal. Returns false if a column is numerically dependent.
pub(crate) fn gram_schmidt_columns(m: &mut CMatrix) -> bool {
    let (rows, cols) = (m.rows, m.cols);
    for j in 0..cols {
        for i in 0..j {
            let proj: Complex64 = (0..rows).map(|r| m[(r, i)].conj() * m[(r, j)]).sum();
            for r in 0..rows {
                let q = m[(r, i)];
                m[(r, j)] -= q * proj;
            }
        }
        let norm = (0..rows).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return false;
        }
        for r in 0..rows {
            m[(r, j)] /= norm;
        }
    }
    true
}

/// Singular value decomposition `A = U diag(s) V†` with singular values
/// sorted in non-increasing order and square unitary `U`, `V`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v: CMatrix,
}

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 60;

/// One-sided (Hestenes) Jacobi SVD.
///
/// Column pairs of `A` are rotated until mutually orthogonal to relative
/// tolerance 1e-12; the accumulated rotations form `V`, the column norms are
/// the singular values and the normalized columns span `U`. `U` is completed
/// to a full unitary basis where `A` has fewer nonzero columns than rows.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut v = CMatrix::identity(n);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut g = ZERO;
                for r in 0..m {
                    let ap = w[(r, p)];
                    let aq = w[(r, q)];
                    alpha += ap.norm_sqr();
                    beta += aq.norm_sqr();
                    g += ap.conj() * aq;
                }
                let gabs = g.norm();
                if gabs <= JACOBI_TOL * (alpha * beta).sqrt() || gabs < 1e-300 {
                    continue;
                }
                rotated = true;
                let phase = g / gabs;
                let zeta = (beta - alpha) / (2.0 * gabs);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let pc = phase.conj();
                for r in 0..m {
                    let ap = w[(r, p)];
                    let bq = w[(r, q)] * pc;
                    w[(r, p)] = ap * c - bq * s;
                    w[(r, q)] = ap * s + bq * c;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)] * pc;
                    v[(r, p)] = vp * c - vq * s;
                    v[(r, q)] = vp * s + vq * c;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..n)
        .map(|c| (0..m).map(|r| w[(r, c)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps ties in column order
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(std::cmp::Ordering::Equal));

    let k = m.min(n);
    let scale = norms.iter().cloned().fold(0.0, f64::max);
    let v_sorted = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    let mut singular_values = Vec::with_capacity(k);
    let mut u = CMatrix::zeros(m, m);
    let mut filled = 0;
    for (c, &col) in order.iter().take(k).enumerate() {
        let s = norms[col];
        if s > 1e-14 * scale.max(1e-300) {
            for r in 0..m {
                u[(r, c)] = w[(r, col)] / s;
            }
            singular_values.push(s);
            filled += 1;
        } else {
            singular_values.push(0.0);
        }
    }
    complete_basis(&mut u, filled);
    Svd {
        u,
        singular_values,
        v: v_sorted,
    }
}

/// Fills columns `filled..` of `u` with an orthonormal completion of the
/// first `filled` columns, drawn from the standard basis.
fn complete_basis(u: &mut CMatrix, filled: usize) {
    let m = u.rows;
    let mut next = filled;
    let mut e = 0;
    while next < m && e < m {
        let mut cand: Vec<Complex64> = (0..m).map(|r| if r == e { ONE } else { ZERO }).collect();
        for _pass in 0..2 {
            for j in 0..next {
                let proj: Complex64 = (0..m).map(|r| u[(r, j)].conj() * cand[r]).sum();
                for r in 0..m {
                    cand[r] -= u[(r, j)] * proj;
                }
            }
        }
        let norm = cand.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for r in 0..m {
                u[(r, next)] = cand[r] / norm;
            }
            next += 1;
        }
        e += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal, SeedStream};

    fn random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = SeedStream::new(seed).rng();
        CMatrix::from_fn(rows, cols, |_, _| complex_normal(&mut rng))
    }

    fn reconstruct(s: &Svd, rows: usize, cols: usize) -> CMatrix {
        let mut sigma = CMatrix::zeros(rows, cols);
        for (i, v) in s.singular_values.iter().enumerate() {
            sigma[(i, i)] = Complex64::new(*v, 0.0);
        }
        &(&s.u * &sigma) * &s.v.adjoint()
    }

    #[test]
    fn svd_reconstructs_all_shapes() {
        for (rows, cols) in [(1, 1), (2, 2), (3, 3), (2, 3), (3, 2), (1, 3), (3, 1), (4, 4)] {
            for seed in 0..50 {
                let a = random(rows, cols, seed);
                let s = svd(&a);
                let err = (&reconstruct(&s, rows, cols) - &a).frobenius_norm();
                assert!(err < 1e-10, "{rows}x{cols} seed {seed}: {err}");
                assert!(s.u.unitarity_deviation() < 1e-10);
                assert!(s.v.unitarity_deviation() < 1e-10);
                assert!(s.singular_values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn svd_of_rank_deficient_matrix() {
        let col = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.25)];
        let a = CMatrix::from_fn(2, 2, |r, c| col[r] * (c as f64 + 1.0));
        let s = svd(&a);
        assert!(s.singular_values[1].abs() < 1e-12);
        assert!(s.u.unitarity_deviation() < 1e-10);
        assert!((&reconstruct(&s, 2, 2) - &a).frobenius_norm() < 1e-10);
    }

    #[test]
    fn gram_schmidt_yields_unitary() {
        let mut a = random(3, 3, 9);
        assert!(gram_schmidt_columns(&mut a));
        assert!(a.unitarity_deviation() < 1e-12);
    }

    #[test]
    fn real_embedding_matches_complex_product() {
        let a = random(2, 3, 4);
        let x = random(3, 1, 5).column(0);
        let y = a.mul_vec(&x);
        let yr = a.to_real().mul_vec(&complex_to_real(&x));
        for (c, r) in y.iter().zip(real_to_complex(&yr)) {
            assert!((c - r).norm() < 1e-12);
        }
    }
}
