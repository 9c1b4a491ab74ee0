//! Solvability and truncation diagnostics: numerical radius, decay of the
//! inverse, effective bandwidths and error metrics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::coeff_matrix::assemble;
use crate::error::{Error, Result};
use crate::legendre::{equidistant_nodes, LegendreSeries};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Coefficient sum below which the field of values of `F` is conjectured to
/// stay inside a disk of radius 0.87.
pub const CONJECTURE_THRESHOLD: f64 = 1.1494;

/// `max_k sum_l (|a_kl| + |a_lk|) / 2`, an upper bound on the numerical radius.
pub fn numerical_radius_bound(a: &BandedMatrix) -> f64 {
    let n = a.size();
    let mut sums = vec![0.0f64; n];
    for k in 0..n {
        let (lo, hi) = a.row_span(k);
        for l in lo..hi {
            let v = a.get(k, l).norm() / 2.0;
            sums[k] += v;
            sums[l] += v;
        }
    }
    sums.into_iter().fold(0.0, f64::max)
}

/// Largest eigenvalue of the Hermitian part of `e^{-iθ} A`, with its Ritz vector.
pub fn hermitian_part_max_eigen(
    a: &BandedMatrix,
    theta: f64,
    start: Option<&[Complex64]>,
) -> Result<(f64, Vec<Complex64>)> {
    let phase = Complex64::from_polar(1.0, -theta);
    lanczos_largest(a.size(), |x, y| a.hermitian_part_matvec(phase, x, y), start)
}

/// Lower estimate of the numerical radius `max_θ λ_max((e^{-iθ}A + e^{iθ}A^H)/2)`
/// on a grid of `theta_count` angles followed by a golden-section refinement
/// around the best one.
pub fn numerical_radius_estimate(a: &BandedMatrix, theta_count: usize) -> Result<f64> {
    if theta_count < 8 {
        return Err(Error::InvalidArgument(format!("theta_count = {theta_count} must be at least 8")));
    }
    if a.inf_norm() == 0.0 {
        return Ok(0.0);
    }
    let step = std::f64::consts::TAU / theta_count as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    let mut warm: Option<Vec<Complex64>> = None;
    for i in 0..theta_count {
        let theta = i as f64 * step;
        let (lam, vec) = hermitian_part_max_eigen(a, theta, warm.as_deref())?;
        if lam > best.0 {
            best = (lam, theta);
        }
        warm = Some(vec);
    }
    let (_, vec) = hermitian_part_max_eigen(a, best.1, None)?;
    let mut warm = vec;
    let eval = |theta: f64, warm: &mut Vec<Complex64>| -> Result<f64> {
        let (lam, v) = hermitian_part_max_eigen(a, theta, Some(warm))?;
        *warm = v;
        Ok(lam)
    };
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best.1 - step, best.1 + step);
    let mut x1 = hi - golden * (hi - lo);
    let mut x2 = lo + golden * (hi - lo);
    let mut f1 = eval(x1, &mut warm)?;
    let mut f2 = eval(x2, &mut warm)?;
    let mut top = best.0.max(f1).max(f2);
    for _ in 0..30 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = eval(x1, &mut warm)?;
            top = top.max(f1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = eval(x2, &mut warm)?;
            top = top.max(f2);
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(top.max(0.0))
}

/// `||A||_2 / 2`, a lower bound on the numerical radius (`ν(A) >= ||A||_2 / 2`).
pub fn half_spectral_norm(a: &BandedMatrix) -> Result<f64> {
    if a.inf_norm() == 0.0 {
        return Ok(0.0);
    }
    let (sq, _) = lanczos_largest(
        a.size(),
        |x, y| {
            let ax = a.matvec(x);
            y.copy_from_slice(&a.adjoint_matvec(&ax));
        },
        None,
    )?;
    Ok(sq.max(0.0).sqrt() / 2.0)
}

fn deterministic_start(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let x = k as f64;
            Complex64::new(1.0 + 0.5 * (0.7 * x).sin(), 0.3 * (1.3 * x).cos())
        })
        .collect()
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lanczos with full reorthogonalization for the largest eigenvalue of a
/// Hermitian operator given by `apply(x, y)`: `y = A x`.
pub fn lanczos_largest(
    n: usize,
    mut apply: impl FnMut(&[Complex64], &mut [Complex64]),
    start: Option<&[Complex64]>,
) -> Result<(f64, Vec<Complex64>)> {
    const MAX_ITER: usize = 800;
    const CHECK_EVERY: usize = 8;
    let mut q0 = match start {
        Some(s) if s.len() == n && norm(s) > 0.0 => {
            // nudge the warm start so it is never exactly orthogonal to the target
            let fresh = deterministic_start(n);
            let (ns, nf) = (norm(s), norm(&fresh));
            s.iter().zip(&fresh).map(|(a, b)| a / ns + b * (1e-3 / nf)).collect()
        }
        _ => deterministic_start(n),
    };
    let nq = norm(&q0);
    q0.iter_mut().for_each(|v| *v /= nq);

    let mut basis: Vec<Vec<Complex64>> = vec![q0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![ZERO; n];
    let mut scale = 0.0f64;
    let mut last: Option<f64> = None;
    let limit = n.min(MAX_ITER);
    for j in 0..limit {
        apply(&basis[j], &mut w);
        let alpha = dot(&basis[j], &w).re;
        alphas.push(alpha);
        for (x, q) in w.iter_mut().zip(&basis[j]) {
            *x -= q * alpha;
        }
        if j > 0 {
            let b = betas[j - 1];
            for (x, q) in w.iter_mut().zip(&basis[j - 1]) {
                *x -= q * b;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let h = dot(q, &w);
                for (x, qi) in w.iter_mut().zip(q) {
                    *x -= qi * h;
                }
            }
        }
        let beta = norm(&w);
        scale = scale.max(alpha.abs()).max(beta);
        let exhausted = beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) || j + 1 == n;
        if exhausted || (j + 1) % CHECK_EVERY == 0 || j + 1 == limit {
            let (theta, s) = tridiagonal_largest(&alphas, &betas);
            let residual = beta * s.last().map_or(0.0, |v| v.abs());
            let settled = last.is_some_and(|prev| (theta - prev).abs() <= 1e-14 * scale);
            if exhausted || residual <= 1e-10 * scale || settled {
                let mut ritz = vec![ZERO; n];
                for (q, &c) in basis.iter().zip(&s) {
                    for (r, qi) in ritz.iter_mut().zip(q) {
                        *r += qi * c;
                    }
                }
                return Ok((theta, ritz));
            }
            last = Some(theta);
        }
        betas.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    Err(Error::NoConvergence {
        what: "Lanczos iteration for the numerical radius",
        limit,
        unit: "iterations",
    })
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal `a`
/// and off-diagonal `b`, plus a unit eigenvector.
fn tridiagonal_largest(a: &[f64], b: &[f64]) -> (f64, Vec<f64>) {
    let n = a.len();
    let b = &b[..n - 1];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { b[i - 1].abs() } else { 0.0 } + if i + 1 < n { b[i].abs() } else { 0.0 };
        lo = lo.min(a[i] - r);
        hi = hi.max(a[i] + r);
    }
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    // Sturm count of eigenvalues strictly below x
    let below = |x: f64| -> usize {
        let mut count = 0;
        let mut d = 1.0f64;
        for i in 0..n {
            let off = if i > 0 { b[i - 1] * b[i - 1] } else { 0.0 };
            d = a[i] - x - if i > 0 { off / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * span;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut l, mut h) = (lo, hi);
    while h - l > 4.0 * f64::EPSILON * span.max(l.abs()).max(h.abs()) {
        let mid = 0.5 * (l + h);
        if mid <= l || mid >= h {
            break;
        }
        if below(mid) == n {
            h = mid;
        } else {
            l = mid;
        }
    }
    let lam = 0.5 * (l + h);
    (lam, tridiagonal_eigvec(a, b, lam + 2.0 * f64::EPSILON * span))
}

// Inverse iteration with the Thomas algorithm plus partial pivoting.
fn tridiagonal_eigvec(a: &[f64], b: &[f64], shift: f64) -> Vec<f64> {
    let n = a.len();
    if n == 1 {
        return vec![1.0];
    }
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    for _ in 0..3 {
        // rows hold (diag, upper, upper2) after elimination
        let mut d: Vec<f64> = a.iter().map(|x| x - shift).collect();
        let mut u: Vec<f64> = b.to_vec();
        u.push(0.0);
        let mut u2 = vec![0.0; n];
        let mut lsub: Vec<f64> = b.to_vec();
        let mut rhs = v.clone();
        for i in 0..n - 1 {
            if lsub[i].abs() > d[i].abs() {
                // swap rows i and i+1
                let (di, ui, u2i, ri) = (d[i], u[i], u2[i], rhs[i]);
                d[i] = lsub[i];
                u[i] = d[i + 1];
                u2[i] = u[i + 1];
                rhs[i] = rhs[i + 1];
                lsub[i] = di;
                d[i + 1] = ui;
                u[i + 1] = u2i;
                rhs[i + 1] = ri;
            }
            if d[i] == 0.0 {
                d[i] = f64::EPSILON;
            }
            let m = lsub[i] / d[i];
            d[i + 1] -= m * u[i];
            u[i + 1] -= m * u2[i];
            rhs[i + 1] -= m * rhs[i];
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = f64::EPSILON;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            if i + 1 < n {
                acc -= u[i] * x[i + 1];
            }
            if i + 2 < n {
                acc -= u2[i] * x[i + 2];
            }
            x[i] = acc / d[i];
        }
        let nx = x.iter().map(|z| z * z).sum::<f64>().sqrt();
        if !(nx.is_finite() && nx > 0.0) {
            break;
        }
        v = x.into_iter().map(|z| z / nx).collect();
    }
    v
}

/// Decay of `|(I - F)^{-1}|` away from the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    /// `profile[j]`: largest magnitude on the diagonals at distance `j`.
    pub profile: Vec<f64>,
    /// Rate `mu` and constant `c` of `c * mu^(j / (N + 1))`, when a fit exists.
    pub mu: Option<f64>,
    pub c: Option<f64>,
    /// Band scale `N + 1` used for the fit.
    pub band_scale: usize,
    /// Largest distance whose profile exceeds the threshold.
    pub bandwidth: usize,
    pub threshold: f64,
}

impl DecayProfile {
    fn from_profile(profile: Vec<f64>, band_scale: usize, threshold: f64) -> Self {
        let bandwidth = band_of(&profile, threshold);
        let pts: Vec<(f64, f64)> = profile
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 1e-290)
            .map(|(j, &v)| (j as f64 / band_scale as f64, v.ln()))
            .collect();
        let (mut mu, mut c) = (None, None);
        if pts.len() >= 2 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            let slope = sxy / sxx;
            if slope.is_finite() {
                let lc = pts.iter().map(|p| p.1 - slope * p.0).fold(f64::NEG_INFINITY, f64::max);
                mu = Some(slope.exp());
                c = Some(lc.exp());
            }
        }
        Self {
            profile,
            mu,
            c,
            band_scale,
            bandwidth,
            threshold,
        }
    }

    /// The fitted bound at distance `j`.
    pub fn bound(&self, j: usize) -> Option<f64> {
        Some(self.c? * self.mu?.powf(j as f64 / self.band_scale as f64))
    }
}

fn band_of(profile: &[f64], threshold: f64) -> usize {
    profile.iter().rposition(|&v| v > threshold).unwrap_or(0)
}

/// Columns `cols` of the inverse of `a`.
pub fn inverse_columns(a: &BandedMatrix, cols: impl IntoIterator<Item = usize>) -> Result<Vec<(usize, Vec<Complex64>)>> {
    let lu = a.lu()?;
    let n = a.size();
    Ok(cols
        .into_iter()
        .map(|j| {
            let mut e = vec![ZERO; n];
            e[j] = Complex64::new(1.0, 0.0);
            lu.solve_in_place(&mut e);
            (j, e)
        })
        .collect())
}

/// Per-diagonal maxima of `|B^{-1}|`.
pub fn inverse_profile(b: &BandedMatrix) -> Result<Vec<f64>> {
    let n = b.size();
    let mut profile = vec![0.0f64; n];
    for (j, col) in inverse_columns(b, 0..n)? {
        for (i, v) in col.iter().enumerate() {
            let d = i.abs_diff(j);
            profile[d] = profile[d].max(v.norm());
        }
    }
    Ok(profile)
}

/// Decay profile of `(I - F)^{-1}` for a coefficient matrix whose series has
/// degree `n`; the bandwidth is taken at the absolute level `delta`.
pub fn resolvent_decay_profile(f: &BandedMatrix, n: usize, delta: f64) -> Result<DecayProfile> {
    let profile = inverse_profile(&f.identity_minus())?;
    Ok(DecayProfile::from_profile(profile, n + 1, delta))
}

/// Bandwidth of the inverse of `I - F` at level `delta`, estimated from a few
/// probe columns away from the matrix boundary.
pub fn probe_inverse_bandwidth(f: &BandedMatrix, delta: f64) -> Result<usize> {
    let n = f.size();
    let probes: Vec<usize> = [n / 8, n / 4, n / 2, (3 * n) / 4]
        .into_iter()
        .filter(|&j| j < n)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut band = 0;
    for (j, col) in inverse_columns(&f.identity_minus(), probes)? {
        for (i, v) in col.iter().enumerate() {
            if v.norm() > delta {
                band = band.max(i.abs_diff(j));
            }
        }
    }
    Ok(band)
}

/// Bandwidth at level `delta` of the leading `lead x lead` block of `D^{-1}`,
/// where `D` is the block of `I - F^(N)` below and right of the leading
/// `m x m` block. The infinite block is replaced by one of size `extra`.
pub fn trailing_block_bandwidth(
    series: &LegendreSeries,
    m: usize,
    extra: usize,
    lead: usize,
    delta: f64,
) -> Result<usize> {
    if lead == 0 || lead > extra {
        return Err(Error::InvalidArgument(format!("leading block {lead} must lie in 1..={extra}")));
    }
    let big = assemble(series, m + extra)?.matrix.identity_minus();
    let bw = big.bandwidth();
    let mut d = BandedMatrix::zeros(extra, bw, bw)?;
    for k in 0..extra {
        let (lo, hi) = d.row_span(k);
        for l in lo..hi {
            d.set(k, l, big.get(m + k, m + l));
        }
    }
    let mut profile = vec![0.0f64; lead];
    for (j, col) in inverse_columns(&d, 0..lead)? {
        for (i, v) in col.iter().take(lead).enumerate() {
            let dist = i.abs_diff(j);
            profile[dist] = profile[dist].max(v.norm());
        }
    }
    Ok(band_of(&profile, delta))
}

/// `M - N - K - 2`, or 0 when that is not positive.
pub fn predicted_accurate_entries(m: usize, n: usize, k: usize) -> usize {
    m.saturating_sub(n + k + 2)
}

/// Number of leading entries of `approx` within `tol` of `reference`.
pub fn accurate_prefix(approx: &[Complex64], reference: &[Complex64], tol: f64) -> usize {
    approx
        .iter()
        .zip(reference)
        .position(|(a, b)| (a - b).norm() > tol)
        .unwrap_or(approx.len().min(reference.len()))
}

/// Relative max-norm error of `approx` against `exact` on `10 m` equidistant
/// nodes of [-1, 1].
pub fn err_f(approx: &LegendreSeries, exact: &dyn Fn(f64) -> Complex64, m: usize) -> f64 {
    err_f_on(approx, exact, 10 * m)
}

pub fn err_f_on(approx: &LegendreSeries, exact: &dyn Fn(f64) -> Complex64, nodes: usize) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for t in equidistant_nodes(nodes) {
        let u = exact(t);
        num = num.max((u - crate::legendre::clenshaw(&approx.coeffs, t)).norm());
        den = den.max(u.norm());
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Elementwise `|c - ĉ| / max|c|`, the shorter vector padded with zeros.
pub fn err_c(approx: &[Complex64], exact: &[Complex64]) -> Result<Vec<f64>> {
    let scale = exact.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::ZeroReference);
    }
    let len = approx.len().max(exact.len());
    Ok((0..len)
        .map(|i| {
            let a = approx.get(i).copied().unwrap_or(ZERO);
            let e = exact.get(i).copied().unwrap_or(ZERO);
            (a - e).norm() / scale
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConjectureCheck {
    pub coefficient_sum: f64,
    pub satisfied: bool,
}

/// Compares `sum |alpha_d|` with [`CONJECTURE_THRESHOLD`]. Advisory only.
pub fn conjecture_check(series: &LegendreSeries) -> ConjectureCheck {
    let s = series.l1_norm();
    ConjectureCheck {
        coefficient_sum: s,
        satisfied: s <= CONJECTURE_THRESHOLD,
    }
}
