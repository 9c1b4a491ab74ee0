//! Complex band matrices and an LU factorization with partial pivoting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Square complex matrix whose entries vanish outside `-lower <= col - row <= upper`.
///
/// Storage is diagonal-major: diagonal `o` (from `-lower` to `upper`) is a
/// vector indexed by row. Slots that fall outside the matrix are kept at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandedMatrix {
    size: usize,
    lower: usize,
    upper: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn zeros(size: usize, lower: usize, upper: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Size("band matrix must have size >= 1".into()));
        }
        let lower = lower.min(size - 1);
        let upper = upper.min(size - 1);
        Ok(Self {
            size,
            lower,
            upper,
            data: vec![ZERO; (lower + upper + 1) * size],
        })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut m = Self::zeros(size, 0, 0)?;
        m.data.iter_mut().for_each(|v| *v = Complex64::new(1.0, 0.0));
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lower_bandwidth(&self) -> usize {
        self.lower
    }

    pub fn upper_bandwidth(&self) -> usize {
        self.upper
    }

    /// Storage bandwidth, `max(lower, upper)`.
    pub fn bandwidth(&self) -> usize {
        self.lower.max(self.upper)
    }

    #[inline]
    fn slot(&self, row: usize, col: usize) -> Option<usize> {
        if row >= self.size || col >= self.size {
            return None;
        }
        let offset = col as isize - row as isize;
        if offset < -(self.lower as isize) || offset > self.upper as isize {
            return None;
        }
        Some((offset + self.lower as isize) as usize * self.size + row)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.slot(row, col).map_or(ZERO, |s| self.data[s])
    }

    /// Writes an entry inside the band. Panics outside it.
    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let s = self
            .slot(row, col)
            .unwrap_or_else(|| panic!("({row}, {col}) lies outside the band"));
        self.data[s] = value;
    }

    #[inline]
    pub fn add_at(&mut self, row: usize, col: usize, value: Complex64) {
        let s = self
            .slot(row, col)
            .unwrap_or_else(|| panic!("({row}, {col}) lies outside the band"));
        self.data[s] += value;
    }

    /// Column range `[lo, hi)` of the band in `row`.
    #[inline]
    pub fn row_span(&self, row: usize) -> (usize, usize) {
        (row.saturating_sub(self.lower), (row + self.upper + 1).min(self.size))
    }

    /// `self += scale * other`; `other` must fit in this band.
    pub fn add_scaled(&mut self, scale: Complex64, other: &BandedMatrix) -> Result<()> {
        if other.size != self.size || other.lower > self.lower || other.upper > self.upper {
            return Err(Error::Size(format!(
                "cannot add a {}x{} (-{}, +{}) band into a {}x{} (-{}, +{}) band",
                other.size, other.size, other.lower, other.upper, self.size, self.size, self.lower, self.upper
            )));
        }
        for row in 0..self.size {
            let (lo, hi) = other.row_span(row);
            for col in lo..hi {
                let v = other.get(row, col);
                if v != ZERO {
                    self.add_at(row, col, scale * v);
                }
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    /// Sets every entry of rows `from..size` to zero.
    pub fn zero_rows_from(&mut self, from: usize) {
        for row in from..self.size {
            let (lo, hi) = self.row_span(row);
            for col in lo..hi {
                self.set(row, col, ZERO);
            }
        }
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> BandedMatrix {
        let mut out = self.clone();
        out.scale(Complex64::new(-1.0, 0.0));
        for i in 0..self.size {
            out.add_at(i, i, Complex64::new(1.0, 0.0));
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "dimension mismatch");
        let mut out = vec![ZERO; self.size];
        self.for_each_diagonal(|offset, rows, diag| {
            for row in rows {
                out[row] += diag[row] * x[(row as isize + offset) as usize];
            }
        });
        out
    }

    /// `self^H x`.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.size, "dimension mismatch");
        let mut out = vec![ZERO; self.size];
        self.for_each_diagonal(|offset, rows, diag| {
            for row in rows {
                out[(row as isize + offset) as usize] += diag[row].conj() * x[row];
            }
        });
        out
    }

    /// `(p A + conj(p) A^H) x / 2` for a unit phase `p`.
    pub fn hermitian_part_matvec(&self, phase: Complex64, x: &[Complex64], out: &mut [Complex64]) {
        assert_eq!(x.len(), self.size, "dimension mismatch");
        out.iter_mut().for_each(|v| *v = ZERO);
        let (p, pc) = (phase * 0.5, phase.conj() * 0.5);
        self.for_each_diagonal(|offset, rows, diag| {
            for row in rows {
                let col = (row as isize + offset) as usize;
                let a = diag[row];
                out[row] += p * a * x[col];
                out[col] += pc * a.conj() * x[row];
            }
        });
    }

    fn for_each_diagonal(&self, mut visit: impl FnMut(isize, std::ops::Range<usize>, &[Complex64])) {
        let n = self.size as isize;
        for (i, diag) in self.data.chunks_exact(self.size).enumerate() {
            let offset = i as isize - self.lower as isize;
            let lo = (-offset).max(0) as usize;
            let hi = (n - offset.max(0)) as usize;
            visit(offset, lo..hi, diag);
        }
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.size)
            .map(|row| {
                let (lo, hi) = self.row_span(row);
                (lo..hi).map(|col| self.get(row, col).norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|row - col|` over entries with magnitude above `threshold`.
    pub fn effective_bandwidth(&self, threshold: f64) -> usize {
        let mut bw = 0;
        for row in 0..self.size {
            let (lo, hi) = self.row_span(row);
            for col in lo..hi {
                if self.get(row, col).norm() > threshold {
                    bw = bw.max(row.abs_diff(col));
                }
            }
        }
        bw
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.size)
            .map(|row| (0..self.size).map(|col| self.get(row, col)).collect())
            .collect()
    }

    /// Leading principal `m x m` block.
    pub fn leading_block(&self, m: usize) -> Result<BandedMatrix> {
        if m == 0 || m > self.size {
            return Err(Error::Size(format!("leading block {m} of a size {} matrix", self.size)));
        }
        let mut out = BandedMatrix::zeros(m, self.lower, self.upper)?;
        for row in 0..m {
            let (lo, hi) = out.row_span(row);
            for col in lo..hi {
                out.set(row, col, self.get(row, col));
            }
        }
        Ok(out)
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::factor(self)
    }
}

/// LU factors of a band matrix with row interchanges (LAPACK `gbtrf` layout:
/// column-major with `2 * lower + upper + 1` rows, the extra `lower` rows
/// absorbing fill from pivoting).
#[derive(Debug, Clone)]
pub struct BandedLu {
    size: usize,
    lower: usize,
    upper: usize,
    ld: usize,
    ab: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    pub fn factor(matrix: &BandedMatrix) -> Result<Self> {
        let n = matrix.size;
        let (kl, ku) = (matrix.lower, matrix.upper);
        let ld = 2 * kl + ku + 1;
        let mut lu = Self {
            size: n,
            lower: kl,
            upper: ku,
            ld,
            ab: vec![ZERO; ld * n],
            pivots: vec![0; n],
        };
        let mut scale = 0.0f64;
        for row in 0..n {
            let (lo, hi) = matrix.row_span(row);
            for col in lo..hi {
                let v = matrix.get(row, col);
                scale = scale.max(v.norm());
                let idx = lu.idx(row, col);
                lu.ab[idx] = v;
            }
        }
        let tiny = f64::EPSILON * scale;
        let reach = kl + ku;
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.ab[lu.idx(k, k)].norm();
            for i in k + 1..=last_row {
                let v = lu.ab[lu.idx(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > tiny) {
                return Err(Error::Singular { step: k, pivot: best });
            }
            lu.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.idx(k, j), lu.idx(p, j));
                    lu.ab.swap(a, b);
                }
            }
            let pivot = lu.ab[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                if lu.ab[ik] == ZERO {
                    continue;
                }
                let l = lu.ab[ik] / pivot;
                lu.ab[ik] = l;
                for j in k + 1..=last_col {
                    let kj = lu.ab[lu.idx(k, j)];
                    if kj != ZERO {
                        let ij = lu.idx(i, j);
                        lu.ab[ij] -= l * kj;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, row: usize, col: usize) -> usize {
        (self.lower + self.upper + row - col) + col * self.ld
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Solves `A x = rhs` in place.
    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        assert_eq!(x.len(), self.size, "dimension mismatch");
        let n = self.size;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk == ZERO {
                continue;
            }
            for i in k + 1..=(k + self.lower).min(n - 1) {
                x[i] -= self.ab[self.idx(i, k)] * xk;
            }
        }
        let reach = self.lower + self.upper;
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                acc -= self.ab[self.idx(k, j)] * x[j];
            }
            x[k] = acc / self.ab[self.idx(k, k)];
        }
    }

    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Normwise backward error `||A x - b||_inf / (||A||_inf ||x||_inf + ||b||_inf)`.
pub fn backward_error(a: &BandedMatrix, x: &[Complex64], b: &[Complex64]) -> f64 {
    let ax = a.matvec(x);
    let r = ax.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max);
    let xn = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let bn = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let denom = a.inf_norm() * xn + bn;
    if denom == 0.0 {
        0.0
    } else {
        r / denom
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_band(n: usize, kl: usize, ku: usize, seed: u64, diag: f64) -> BandedMatrix {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let mut m = BandedMatrix::zeros(n, kl, ku).unwrap();
        for row in 0..n {
            let (lo, hi) = m.row_span(row);
            for col in lo..hi {
                let mut v = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                if row == col {
                    v += diag;
                }
                m.set(row, col, v);
            }
        }
        m
    }

    #[test]
    fn storage_semantics() {
        let mut m = BandedMatrix::zeros(5, 1, 2).unwrap();
        m.set(0, 2, c(3.0, 0.0));
        m.set(4, 3, c(0.0, 1.0));
        assert_eq!(m.get(0, 2), c(3.0, 0.0));
        assert_eq!(m.get(4, 3), c(0.0, 1.0));
        assert_eq!(m.get(0, 3), ZERO);
        assert_eq!(m.get(3, 0), ZERO);
        assert_eq!(m.bandwidth(), 2);
        assert_eq!(m.effective_bandwidth(0.0), 2);
        assert!(BandedMatrix::zeros(0, 0, 0).is_err());
        // bandwidths are clamped below the size
        assert_eq!(BandedMatrix::zeros(3, 7, 7).unwrap().bandwidth(), 2);
    }

    #[test]
    fn identity_minus_and_rows() {
        let mut m = random_band(6, 2, 1, 3, 0.0);
        let im = m.identity_minus();
        assert_eq!(im.get(2, 2), c(1.0, 0.0) - m.get(2, 2));
        m.zero_rows_from(4);
        assert_eq!(m.get(4, 3), ZERO);
        assert_eq!(m.get(5, 5), ZERO);
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        let mut m = BandedMatrix::zeros(3, 1, 1).unwrap();
        m.set(0, 1, c(1.0, 0.0));
        m.set(1, 0, c(1.0, 0.0));
        m.set(1, 2, c(2.0, 0.0));
        m.set(2, 1, c(1.0, 0.0));
        m.set(2, 2, c(1.0, 0.0));
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        let x = m.lu().unwrap().solve(&b);
        assert!(backward_error(&m, &x, &b) < 1e-15);
    }

    #[test]
    fn singular_is_reported() {
        let m = BandedMatrix::zeros(4, 1, 1).unwrap();
        assert!(matches!(m.lu(), Err(Error::Singular { .. })));
    }

    #[test]
    fn products_match_dense() {
        let m = random_band(9, 3, 2, 11, 0.0);
        let x: Vec<_> = (0..9).map(|i| c(i as f64 * 0.3, 1.0 - i as f64)).collect();
        let dense = m.to_dense();
        let y = m.matvec(&x);
        let z = m.adjoint_matvec(&x);
        let phase = Complex64::from_polar(1.0, 0.7);
        let mut h = vec![ZERO; 9];
        m.hermitian_part_matvec(phase, &x, &mut h);
        for i in 0..9 {
            let yi: Complex64 = (0..9).map(|j| dense[i][j] * x[j]).sum();
            let zi: Complex64 = (0..9).map(|j| dense[j][i].conj() * x[j]).sum();
            let hi: Complex64 = (0..9)
                .map(|j| (phase * dense[i][j] + phase.conj() * dense[j][i].conj()) * 0.5 * x[j])
                .sum();
            assert!((y[i] - yi).norm() < 1e-14);
            assert!((z[i] - zi).norm() < 1e-14);
            assert!((h[i] - hi).norm() < 1e-14);
        }
    }

    #[test]
    fn identity_solve() {
        let id = BandedMatrix::identity(7).unwrap();
        let b: Vec<_> = (0..7).map(|i| c(i as f64, -1.0)).collect();
        assert_eq!(id.lu().unwrap().solve(&b), b);
    }

    proptest! {
        #[test]
        fn random_band_solves_to_small_residual(
            n in 1usize..60, kl in 0usize..6, ku in 0usize..6, seed in 0u64..1000
        ) {
            let m = random_band(n, kl, ku, seed, 0.5);
            let b: Vec<_> = (0..n).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
            match m.lu() {
                Ok(lu) => {
                    let x = lu.solve(&b);
                    prop_assert!(backward_error(&m, &x, &b) < 1e-12);
                }
                Err(Error::Singular { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
