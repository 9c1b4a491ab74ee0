//! Orthonormal Legendre polynomials `p_k` (with `∫ p_k p_l = δ_kl` on [-1, 1]),
//! expansion of functions into that basis, evaluation and chopping of series.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// A complex-valued coefficient function of a real variable.
pub type ScalarFn = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// Slack allowed on the [-1, 1] domain check.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Largest number of Chebyshev samples tried by [`expand_function`].
pub const DEFAULT_SAMPLE_CAP: usize = 100_000;

fn check_domain(t: f64) -> Result<()> {
    if t.is_nan() || t.abs() > 1.0 + DOMAIN_SLACK {
        Err(Error::Domain { t })
    } else {
        Ok(())
    }
}

/// Recurrence coefficients for `p_{k+1} = a_k t p_k - b_k p_{k-1}`.
#[inline]
fn recurrence(k: usize) -> (f64, f64) {
    let kf = k as f64;
    let a = ((2.0 * kf + 1.0) * (2.0 * kf + 3.0)).sqrt() / (kf + 1.0);
    let b = if k == 0 {
        0.0
    } else {
        kf / (kf + 1.0) * ((2.0 * kf + 3.0) / (2.0 * kf - 1.0)).sqrt()
    };
    (a, b)
}

/// `p_k(t)`, computed from the classical recurrence and scaled by `sqrt((2k+1)/2)`.
pub fn eval_legendre(k: usize, t: f64) -> Result<f64> {
    check_domain(t)?;
    let t = t.clamp(-1.0, 1.0);
    let (mut p0, mut p1) = (1.0, t);
    if k == 0 {
        return Ok(std::f64::consts::FRAC_1_SQRT_2);
    }
    for j in 1..k {
        let jf = j as f64;
        let p2 = ((2.0 * jf + 1.0) * t * p1 - jf * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    Ok(p1 * ((2.0 * k as f64 + 1.0) / 2.0).sqrt())
}

/// `[p_0(t), ..., p_{m-1}(t)]`.
pub fn phi_vector(m: usize, t: f64) -> Result<Vec<f64>> {
    if m == 0 {
        return Err(Error::Size("phi vector needs m >= 1".into()));
    }
    check_domain(t)?;
    let t = t.clamp(-1.0, 1.0);
    let mut out = Vec::with_capacity(m);
    fill_orthonormal(t, m, |k, v| {
        debug_assert_eq!(k, out.len());
        out.push(v)
    });
    Ok(out)
}

/// Calls `sink(k, p_k(t))` for `k = 0..m`.
#[inline]
fn fill_orthonormal(t: f64, m: usize, mut sink: impl FnMut(usize, f64)) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..m {
        sink(k, cur);
        let (a, b) = recurrence(k);
        let next = a * t * cur - b * prev;
        prev = cur;
        cur = next;
    }
}

/// Legendre coefficients of a function together with the interval it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreSeries {
    pub coeffs: Vec<Complex64>,
    pub interval: (f64, f64),
}

impl LegendreSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        Self::on_interval(coeffs, (-1.0, 1.0))
    }

    pub fn on_interval(coeffs: Vec<Complex64>, interval: (f64, f64)) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("a series needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidArgument("series coefficients must be finite".into()));
        }
        Ok(Self { coeffs, interval })
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest stored degree.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> Result<Complex64> {
        eval_series(self, t)
    }

    /// `sum_d |alpha_d|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Keeps degrees `0..=degree`.
    pub fn truncated(&self, degree: usize) -> Self {
        let keep = (degree + 1).min(self.coeffs.len());
        Self {
            coeffs: self.coeffs[..keep].to_vec(),
            interval: self.interval,
        }
    }

    /// Least-squares fit of `|alpha_d| ~ C rho^(-d-1)` over the coefficients
    /// above the rounding floor; the constant is then raised so the bound holds
    /// for every stored coefficient. Returns `(C, rho)`, or `None` if fewer than
    /// two usable coefficients exist or no decay is visible.
    pub fn geometric_decay(&self) -> Option<(f64, f64)> {
        let max = self.max_abs();
        if max == 0.0 {
            return None;
        }
        let floor = max * 1e3 * f64::EPSILON;
        let pts: Vec<(f64, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > floor)
            .map(|(d, c)| (d as f64 + 1.0, c.norm().ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let slope = sxy / sxx;
        if slope >= 0.0 || !slope.is_finite() {
            return None;
        }
        let rho = (-slope).exp();
        let log_c = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(d, c)| c.norm().ln() + (d as f64 + 1.0) * rho.ln())
            .fold(f64::NEG_INFINITY, f64::max);
        Some((log_c.exp(), rho))
    }
}

/// Stable Clenshaw summation of `sum alpha_d p_d(t)`.
pub fn eval_series(series: &LegendreSeries, t: f64) -> Result<Complex64> {
    check_domain(t)?;
    Ok(clenshaw(&series.coeffs, t.clamp(-1.0, 1.0)))
}

pub(crate) fn clenshaw(coeffs: &[Complex64], t: f64) -> Complex64 {
    let n = coeffs.len();
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        let (a, _) = recurrence(k);
        let (_, b_next) = recurrence(k + 1);
        let b0 = coeffs[k] + b1 * (a * t) - b2 * b_next;
        b2 = b1;
        b1 = b0;
    }
    b1 * std::f64::consts::FRAC_1_SQRT_2
}

/// Smallest `k` such that every coefficient from `k` on is at most
/// `tol * max|coeffs|`. Returns the full length when the tail never drops
/// that low (including the all-zero case, which returns 1).
pub fn chop_series(coeffs: &[Complex64], tol: f64) -> usize {
    let n = coeffs.len();
    let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return n.min(1);
    }
    let threshold = tol * max;
    let mut k = n;
    while k > 0 && coeffs[k - 1].norm() <= threshold {
        k -= 1;
    }
    if k == n {
        n
    } else {
        k
    }
}

/// Legendre coefficients of `f` on [-1, 1].
///
/// The length is picked adaptively: `f` is sampled at 17, 33, 65, ...
/// Chebyshev points until the Chebyshev coefficients show a plateau below
/// `tol` (see [`chebyshev::plateau_chop`]). The chopped Chebyshev interpolant
/// is then projected onto the Legendre basis with a Gauss–Legendre rule that
/// integrates it exactly, so the series has as many terms as the interpolant.
pub fn expand_function(f: &dyn Fn(f64) -> Complex64, tol: f64) -> Result<LegendreSeries> {
    expand_function_capped(f, tol, DEFAULT_SAMPLE_CAP)
}

/// [`expand_function`] with an explicit cap on the number of samples.
pub fn expand_function_capped(
    f: &dyn Fn(f64) -> Complex64,
    tol: f64,
    sample_cap: usize,
) -> Result<LegendreSeries> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must lie in (0, 1)")));
    }
    let tol = tol.max(f64::EPSILON);
    let mut n = 17;
    let cheb = loop {
        if n > sample_cap {
            return Err(Error::NoConvergence {
                what: "Legendre expansion (input may not be analytic)",
                limit: sample_cap,
                unit: "samples",
            });
        }
        let values: Vec<Complex64> = chebyshev::chebyshev_points(n).into_iter().map(f).collect();
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("function returned a non-finite value".into()));
        }
        let coeffs = chebyshev::values_to_coeffs(&values);
        let cut = chebyshev::plateau_chop(&coeffs, tol);
        if cut < n {
            break coeffs[..cut].to_vec();
        }
        n = 2 * n - 1;
    };
    let coeffs = chebyshev_to_legendre(&cheb);
    LegendreSeries::new(coeffs)
}

/// Exact (up to rounding) Legendre coefficients of `sum c_k T_k`.
pub fn chebyshev_to_legendre(cheb: &[Complex64]) -> Vec<Complex64> {
    let len = cheb.len();
    let rule = gauss_legendre(len + 1);
    let mut out = vec![Complex64::new(0.0, 0.0); len];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = chebyshev::eval_chebyshev(cheb, x) * w;
        fill_orthonormal(x, len, |k, p| out[k] += v * p);
    }
    out
}

/// Legendre coefficients `0..m` of `f` by an `n`-point Gauss–Legendre rule,
/// without any chopping. Accurate when `f` is resolved by degree `2n - m`.
pub fn project_with_rule(f: &dyn Fn(f64) -> Complex64, m: usize, n: usize) -> Vec<Complex64> {
    let rule = gauss_legendre(n);
    let mut out = vec![Complex64::new(0.0, 0.0); m];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(x) * w;
        fill_orthonormal(x, m, |k, p| out[k] += v * p);
    }
    out
}

/// Sample points on [-1, 1] with the values of some function there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalGrid {
    pub nodes: Vec<f64>,
    pub values: Vec<Complex64>,
}

impl EvalGrid {
    /// `count` equidistant nodes including both endpoints.
    pub fn equidistant(count: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let nodes = equidistant_nodes(count);
        let values = nodes.iter().map(|&t| f(t)).collect();
        Self { nodes, values }
    }

    pub fn of_series(series: &LegendreSeries, count: usize) -> Self {
        Self::equidistant(count, |t| clenshaw(&series.coeffs, t))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub(crate) fn equidistant_nodes(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let h = 2.0 / (count - 1) as f64;
            (0..count)
                .map(|i| if i + 1 == count { 1.0 } else { -1.0 + h * i as f64 })
                .collect()
        }
    }
}
