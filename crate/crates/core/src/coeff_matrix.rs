//! The banded coefficient matrix `F^(N)_M = sum_{d<=N} alpha_d B^(d)_M`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::basis_matrix::basis_matrix_inf_norm_bound;
use crate::error::{Error, Result};
use crate::legendre::LegendreSeries;
use crate::triple_product::{hankel_entry, toeplitz_entry};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffMatrix {
    pub matrix: BandedMatrix,
    /// The series `alpha_0..alpha_N` that was summed.
    pub series: LegendreSeries,
    pub n: usize,
    pub m: usize,
    /// Whether the last `N + 1` rows have been zeroed.
    pub underlined: bool,
    pub warnings: Vec<String>,
}

impl CoeffMatrix {
    pub fn get(&self, k: usize, l: usize) -> Complex64 {
        self.matrix.get(k, l)
    }
}

/// Sums `alpha_d B^(d)_M` over the whole series.
///
/// Uses the Hankel/Toeplitz form of the basis matrices: with
/// `W_{k,c} = sum_d alpha_d sqrt(2d+1) h(d, k+c) t(d, |k-c|)` every entry of
/// `F` is a scaled difference of two entries of `W`.
pub fn assemble(series: &LegendreSeries, m: usize) -> Result<CoeffMatrix> {
    if m == 0 {
        return Err(Error::Size("coefficient matrix size must be >= 1".into()));
    }
    let n = series.degree();
    let mut warnings = Vec::new();
    if m <= n + 2 {
        warnings.push(format!(
            "matrix size M = {m} does not exceed N + 2 = {}; the truncated problem is poorly resolved",
            n + 2
        ));
    }
    let alpha = &series.coeffs;
    let scaled: Vec<Complex64> = alpha
        .iter()
        .enumerate()
        .map(|(d, a)| a * ((2 * d + 1) as f64).sqrt())
        .collect();
    let active: Vec<usize> = (0..=n).filter(|&d| alpha[d] != ZERO).collect();

    // h(d, γ) for γ < 2M + 1 and t(d, α) for α <= d, flattened by degree.
    let gamma_len = 2 * m + 1;
    let mut hank = vec![0.0; (n + 1) * gamma_len];
    let mut toep = vec![0.0; (n + 1) * (n + 1)];
    for &d in &active {
        for g in (d..gamma_len).step_by(2) {
            hank[d * gamma_len + g] = hankel_entry(d, g);
        }
        for a in ((d % 2)..=d).step_by(2) {
            toep[d * (n + 1) + a] = toeplitz_entry(d, a);
        }
    }

    // W restricted to the band |k - c| <= N, rows k < M, columns c <= M.
    let wb = n;
    let width = 2 * wb + 1;
    let mut w = vec![ZERO; m * width];
    for k in 0..m {
        let lo = k.saturating_sub(wb);
        let hi = (k + wb).min(m);
        for c in lo..=hi {
            let a = k.abs_diff(c);
            let g = k + c;
            let mut acc = ZERO;
            let mut d = a;
            while d <= n {
                let coef = scaled[d];
                if coef != ZERO {
                    acc += coef * (hank[d * gamma_len + g] * toep[d * (n + 1) + a]);
                }
                d += 2;
            }
            w[k * width + (c + wb - k)] = acc;
        }
    }
    let w_at = |k: usize, c: usize| -> Complex64 {
        if k.abs_diff(c) > wb {
            ZERO
        } else {
            w[k * width + (c + wb - k)]
        }
    };

    let bw = n + 1;
    let mut matrix = BandedMatrix::zeros(m, bw, bw)?;
    for k in 0..m {
        let sk = ((2 * k + 1) as f64).sqrt();
        let (lo, hi) = matrix.row_span(k);
        for l in lo..hi {
            let v = if l == 0 {
                (w_at(k, 1) + w_at(k, 0)) * sk
            } else {
                (w_at(k, l + 1) - w_at(k, l - 1)) * (sk / ((2 * l + 1) as f64).sqrt())
            };
            matrix.set(k, l, v);
        }
    }
    Ok(CoeffMatrix {
        matrix,
        series: series.clone(),
        n,
        m,
        underlined: false,
        warnings,
    })
}

/// Default truncation tolerance: machine epsilon times `sum |alpha_d|`.
pub fn default_tolerance(series: &LegendreSeries) -> f64 {
    f64::EPSILON * series.l1_norm()
}

/// Bound on `||F - F^(N)||_inf`: `sum_{d>N} |alpha_d| (3d + 2)` over the
/// stored coefficients, plus the fitted geometric tail `C rho^(-d-1) (3d+2)`
/// beyond them.
pub fn tail_bound(series: &LegendreSeries, n: usize) -> f64 {
    let stored: f64 = series
        .coeffs
        .iter()
        .enumerate()
        .skip(n + 1)
        .map(|(d, a)| a.norm() * basis_matrix_inf_norm_bound(d))
        .sum();
    stored + geometric_tail(series, series.len().max(n + 1))
}

fn geometric_tail(series: &LegendreSeries, from: usize) -> f64 {
    let Some((c, rho)) = series.geometric_decay() else {
        return 0.0;
    };
    let mut sum = 0.0;
    let mut d = from;
    loop {
        let term = c * rho.powf(-(d as f64) - 1.0) * basis_matrix_inf_norm_bound(d);
        sum += term;
        if !(term > sum * 1e-17) || d > from + 1_000_000 {
            break;
        }
        d += 1;
    }
    sum
}

/// Smallest `N` with `tail_bound(series, N) <= delta`, capped at the stored
/// degree.
pub fn bandwidth_for_tolerance(series: &LegendreSeries, delta: f64) -> usize {
    let len = series.len();
    let beyond = geometric_tail(series, len);
    let mut tail = beyond;
    // tail holds sum over d > n; walk n downwards from the top.
    let mut best = len - 1;
    for n in (0..len).rev() {
        if tail <= delta {
            best = n;
        } else {
            break;
        }
        tail += series.coeffs[n].norm() * basis_matrix_inf_norm_bound(n);
    }
    best
}

/// Zeroes the last `N + 1` rows of `F`.
pub fn underline_truncate(f: &CoeffMatrix) -> Result<CoeffMatrix> {
    if f.m <= f.n + 1 {
        return Err(Error::Size(format!(
            "underline truncation needs M > N + 1 (M = {}, N = {})",
            f.m, f.n
        )));
    }
    let mut out = f.clone();
    out.matrix.zero_rows_from(f.m - f.n - 1);
    out.underlined = true;
    Ok(out)
}

/// Zeroes the last row of the Θ-matrix.
pub fn underline_theta(t: &BandedMatrix) -> BandedMatrix {
    let mut out = t.clone();
    out.zero_rows_from(t.size() - 1);
    out
}
