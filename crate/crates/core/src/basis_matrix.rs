//! Legendre basis matrices `B^(d)_M`, the coefficient matrices of
//! `p_d(t) Θ(t - s)`, and the Θ-matrix `T_M`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::triple_product::{hankel_entry, toeplitz_entry, triple_product};

fn check_size(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::Size("basis matrix size must be >= 1".into()))
    } else {
        Ok(())
    }
}

/// Entry `b^(d)_{k,l}` straight from the triple products.
pub fn basis_entry(d: usize, k: usize, l: usize) -> f64 {
    if k.abs_diff(l) > d + 1 {
        return 0.0;
    }
    if l == 0 {
        return triple_product(d, k, 1) / 3f64.sqrt() + triple_product(d, k, 0);
    }
    let up = triple_product(d, k, l + 1) / ((2 * l + 3) as f64).sqrt();
    let down = triple_product(d, k, l - 1) / ((2 * l - 1) as f64).sqrt();
    (up - down) / ((2 * l + 1) as f64).sqrt()
}

/// `B^(d)_M` entry by entry from the triple products. Bandwidth `d + 1`.
pub fn basis_matrix_dense(d: usize, m: usize) -> Result<BandedMatrix> {
    check_size(m)?;
    let mut out = BandedMatrix::zeros(m, d + 1, d + 1)?;
    for k in 0..m {
        let (lo, hi) = out.row_span(k);
        for l in lo..hi {
            out.set(k, l, Complex64::new(basis_entry(d, k, l), 0.0));
        }
    }
    Ok(out)
}

/// Hankel/Toeplitz factorization of `B^(d)_M`:
///
/// `B = sqrt(2d+1) * (C̃ ∘ ((H ∘ T) Z))`
///
/// where `H` and `T` are the `(M+1) x (M+1)` Hankel and symmetric Toeplitz
/// matrices generated by `h(d, b + c)` and `t(d, |b - c|)` with their last
/// row dropped, `C̃_{k,l} = sqrt(2k+1)/sqrt(2l+1)` and `Z` is the
/// `(M+1) x M` difference operator. Generators are indexed with `m = M`, the
/// largest index of the `(M+1)`-sized factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuredBasisFactors {
    pub degree: usize,
    pub size: usize,
    /// First column of `H`: `h(d, γ)` for `γ = 0..=M` (zero for `γ < d`).
    pub hankel_col: Vec<f64>,
    /// Last row of `H`: `h(d, γ)` for `γ = M..=2M`.
    pub hankel_row: Vec<f64>,
    /// First column of `T`: `t(d, α)` for `α = 0..=M` (zero for `α > d`).
    pub toeplitz_col: Vec<f64>,
}

impl StructuredBasisFactors {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        check_size(m)?;
        Ok(Self {
            degree: d,
            size: m,
            hankel_col: (0..=m).map(|g| hankel_entry(d, g)).collect(),
            hankel_row: (m..=2 * m).map(|g| hankel_entry(d, g)).collect(),
            toeplitz_col: (0..=m).map(|a| toeplitz_entry(d, a)).collect(),
        })
    }

    #[inline]
    pub fn hankel(&self, gamma: usize) -> f64 {
        if gamma <= self.size {
            self.hankel_col[gamma]
        } else {
            self.hankel_row[gamma - self.size]
        }
    }

    #[inline]
    pub fn toeplitz(&self, alpha: usize) -> f64 {
        self.toeplitz_col.get(alpha).copied().unwrap_or(0.0)
    }

    /// `(H ∘ T)_{b,c}` for `b, c <= M`.
    #[inline]
    pub fn hadamard(&self, b: usize, c: usize) -> f64 {
        self.hankel(b + c) * self.toeplitz(b.abs_diff(c))
    }

    #[inline]
    pub fn scaling(k: usize, l: usize) -> f64 {
        ((2 * k + 1) as f64 / (2 * l + 1) as f64).sqrt()
    }

    /// Entry `(j, l)` of the `(M+1) x M` difference operator `Z`.
    #[inline]
    pub fn difference(j: usize, l: usize) -> f64 {
        match (j, l) {
            (0 | 1, 0) => 1.0,
            (j, l) if l > 0 && j + 1 == l => -1.0,
            (j, l) if l > 0 && j == l + 1 => 1.0,
            _ => 0.0,
        }
    }

    /// Numbers held by the generators of this degree.
    pub fn storage_len(&self) -> usize {
        self.hankel_col.len() + self.hankel_row.len() + self.toeplitz_col.len()
    }

    /// Entry `(k, l)` of `B^(d)_M` from the factors.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        let lead = ((2 * self.degree + 1) as f64).sqrt() * Self::scaling(k, l);
        let z_times = if l == 0 {
            self.hadamard(k, 1) + self.hadamard(k, 0)
        } else {
            self.hadamard(k, l + 1) - self.hadamard(k, l - 1)
        };
        lead * z_times
    }

    /// Builds `B^(d)_M` from the factors.
    pub fn materialize(&self) -> BandedMatrix {
        let bw = self.degree + 1;
        let mut out = BandedMatrix::zeros(self.size, bw, bw).expect("size checked at construction");
        for k in 0..self.size {
            let (lo, hi) = out.row_span(k);
            for l in lo..hi {
                out.set(k, l, Complex64::new(self.entry(k, l), 0.0));
            }
        }
        out
    }
}

pub fn basis_matrix_structured(d: usize, m: usize) -> Result<StructuredBasisFactors> {
    StructuredBasisFactors::new(d, m)
}

/// Numbers needed to hold the factors of `B^(0..=n)_M` plus the shared `C̃`.
pub fn structured_storage_count(n: usize, m: usize) -> Result<usize> {
    let mut total = m * m;
    for d in 0..=n {
        total += StructuredBasisFactors::new(d, m)?.storage_len();
    }
    Ok(total)
}

/// Coefficient matrix of the Heaviside kernel `Θ(t - s)`: `sqrt(2) B^(0)_M`.
pub fn theta_matrix(m: usize) -> Result<BandedMatrix> {
    let mut t = StructuredBasisFactors::new(0, m)?.materialize();
    t.scale(Complex64::new(std::f64::consts::SQRT_2, 0.0));
    Ok(t)
}

/// Upper bound `3d + 2` on `||B^(d)||_inf`.
pub fn basis_matrix_inf_norm_bound(d: usize) -> f64 {
    (3 * d + 2) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::phi_vector;
    use crate::quadrature::GaussLegendre;

    // b^(d)_{k,l} = ∫ p_d(τ) p_k(τ) ∫_{-1}^τ p_l(ρ) dρ dτ, inner integral
    // by a mapped Gauss rule, outer by another.
    fn brute_entry(d: usize, k: usize, l: usize) -> f64 {
        let outer = GaussLegendre::new((d + k + l) / 2 + 4);
        let inner = GaussLegendre::new(l / 2 + 3);
        let top = d.max(k).max(l) + 1;
        outer
            .nodes
            .iter()
            .zip(&outer.weights)
            .map(|(&tau, &w)| {
                let p = phi_vector(top, tau).unwrap();
                let half = (tau + 1.0) / 2.0;
                let prim: f64 = inner
                    .nodes
                    .iter()
                    .zip(&inner.weights)
                    .map(|(&x, &v)| v * half * phi_vector(l + 1, -1.0 + half * (x + 1.0)).unwrap()[l])
                    .sum();
                w * p[d] * p[k] * prim
            })
            .sum()
    }

    #[test]
    fn degree_zero_entries() {
        let b = basis_matrix_dense(0, 4).unwrap();
        assert!((b.get(0, 0).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.get(0, 1).re + 1.0 / 6f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn dense_matches_brute_force() {
        for d in 0..6 {
            for k in 0..12 {
                for l in 0..12 {
                    let got = basis_entry(d, k, l);
                    let want = brute_entry(d, k, l);
                    assert!((got - want).abs() < 1e-13, "d={d} k={k} l={l}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn band_is_exact() {
        let b = basis_matrix_dense(3, 30).unwrap();
        assert_eq!(b.bandwidth(), 4);
        for k in 0..30usize {
            for l in 0..30 {
                if k.abs_diff(l) > 4 {
                    assert_eq!(basis_entry(3, k, l).to_bits(), 0f64.to_bits());
                }
            }
        }
        assert_eq!(b.effective_bandwidth(0.0), 4);
    }

    #[test]
    fn structured_matches_dense() {
        for (d, m) in [(0usize, 5usize), (7, 64), (1, 1), (2, 3)] {
            let dense = basis_matrix_dense(d, m).unwrap();
            let fast = basis_matrix_structured(d, m).unwrap().materialize();
            for k in 0..m {
                for l in 0..m {
                    assert!((dense.get(k, l) - fast.get(k, l)).norm() < 1e-13, "d={d} ({k},{l})");
                }
            }
        }
    }

    #[test]
    fn structured_matches_dense_up_to_degree_30() {
        let m = 80;
        for d in 0..=30 {
            let f = StructuredBasisFactors::new(d, m).unwrap();
            for k in 0..m {
                for l in k.saturating_sub(d + 1)..(k + d + 2).min(m) {
                    assert!((f.entry(k, l) - basis_entry(d, k, l)).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn generator_layout() {
        let f = StructuredBasisFactors::new(3, 10).unwrap();
        // leading zero block of length d in the Hankel column
        assert!(f.hankel_col[..3].iter().all(|&v| v == 0.0));
        assert!(f.hankel_col[3] > 0.0);
        // Toeplitz column vanishes past the degree
        assert!(f.toeplitz_col[4..].iter().all(|&v| v == 0.0));
        // odd degree: odd offsets only
        assert_eq!(f.toeplitz_col[0], 0.0);
        assert!(f.toeplitz_col[1] > 0.0);
        assert_eq!(f.hankel_row[0], f.hankel(10));
    }

    #[test]
    fn storage_count() {
        let (n, m) = (20, 200);
        let got = structured_storage_count(n, m).unwrap();
        let claim = 3 * (n + 1) * m + m * m;
        assert!(got >= claim && got - claim <= 3 * (n + 1));
    }

    #[test]
    fn theta_is_tridiagonal() {
        let t = theta_matrix(40).unwrap();
        assert_eq!(t.bandwidth(), 1);
        assert!((t.get(0, 0).re - 1.0).abs() < 1e-15);
        assert!((t.get(0, 1).re + 1.0 / 3f64.sqrt()).abs() < 1e-15);
        let t1 = theta_matrix(1).unwrap();
        assert!((t1.get(0, 0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inf_norm_bound_holds() {
        for d in [0usize, 1, 2, 5, 17, 40] {
            let b = basis_matrix_structured(d, 300).unwrap().materialize();
            assert!(b.inf_norm() <= basis_matrix_inf_norm_bound(d));
        }
    }
}
