//! End-to-end solve of `du/dt = f(t) u(t)`, `u(start) = 1`: expand `f`,
//! assemble the banded coefficient matrix, solve `(I - F) x = φ_M(-1)` and
//! map `x` to the Legendre coefficients of the solution with `T`.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    self, conjecture_check, err_c, err_f, half_spectral_norm, numerical_radius_bound, numerical_radius_estimate,
    probe_inverse_bandwidth, ConjectureCheck,
};
use crate::banded::{backward_error, BandedMatrix};
use crate::basis_matrix::theta_matrix;
use crate::coeff_matrix::{
    assemble, bandwidth_for_tolerance, default_tolerance, underline_theta, underline_truncate, CoeffMatrix,
};
use crate::error::{Error, Result};
use crate::legendre::{chop_series, expand_function, phi_vector, LegendreSeries, ScalarFn};

/// Largest matrix size tried by [`auto_size`].
pub const MAX_AUTO_SIZE: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Interval {
    /// Already on [-1, 1] with `u(-1) = 1`.
    Reference,
    /// On `[start, end]` with `u(start) = 1`.
    Span { start: f64, end: f64 },
}

impl Interval {
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Interval::Reference => (-1.0, 1.0),
            Interval::Span { start, end } => (start, end),
        }
    }

    /// Maps `t` in [-1, 1] into the interval.
    pub fn from_reference(&self, t: f64) -> f64 {
        let (a, b) = self.bounds();
        a + (t + 1.0) * (b - a) / 2.0
    }
}

#[derive(Clone)]
pub struct OdeProblem {
    pub name: String,
    pub f: ScalarFn,
    pub interval: Interval,
    pub exact: Option<ScalarFn>,
    /// Target accuracy of the solution coefficients.
    pub tol: f64,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("interval", &self.interval)
            .field("exact", &self.exact.is_some())
            .field("tol", &self.tol)
            .finish()
    }
}

impl OdeProblem {
    pub fn on_reference(name: impl Into<String>, f: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            f: Arc::new(f),
            interval: Interval::Reference,
            exact: None,
            tol: 1e-14,
        }
    }

    pub fn on_span(
        name: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        start: f64,
        end: f64,
    ) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::InvalidArgument(format!("interval [{start}, {end}] must have end > start")));
        }
        Ok(Self {
            interval: Interval::Span { start, end },
            ..Self::on_reference(name, f)
        })
    }

    pub fn with_exact(mut self, exact: impl Fn(f64) -> Complex64 + Send + Sync + 'static) -> Self {
        self.exact = Some(Arc::new(exact));
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

/// The same problem on [-1, 1]: `f̃(t) = (b - a)/2 f(a + (t + 1)(b - a)/2)`,
/// exact solution composed with the same map.
pub fn rescale_to_reference(problem: &OdeProblem) -> OdeProblem {
    let interval = problem.interval;
    let Interval::Span { start, end } = interval else {
        return problem.clone();
    };
    let jac = (end - start) / 2.0;
    let f = Arc::clone(&problem.f);
    let exact = problem.exact.as_ref().map(|u| {
        let u = Arc::clone(u);
        Arc::new(move |t: f64| u(interval.from_reference(t))) as ScalarFn
    });
    OdeProblem {
        name: problem.name.clone(),
        f: Arc::new(move |t: f64| f(interval.from_reference(t)) * jac),
        interval: Interval::Reference,
        exact,
        tol: problem.tol,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Zero the last `N + 1` rows of `F` and the last row of `T`.
    pub underline: bool,
    /// Relative tolerance of the expansion of `f̃`.
    pub expansion_tol: f64,
    /// Absolute tolerance for choosing `N`; `None` uses eps * sum |alpha_d|.
    pub band_tol: Option<f64>,
    /// Compute the numerical radius estimate and bounds.
    pub radius: bool,
    pub theta_count: usize,
    /// Estimate the inverse bandwidth `K` from probe columns.
    pub inverse_bandwidth: bool,
    /// Compute `err_f` / `err_c` when an exact solution is known.
    pub error_metrics: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            underline: true,
            expansion_tol: f64::EPSILON,
            band_tol: None,
            radius: false,
            theta_count: 64,
            inverse_bandwidth: false,
            error_metrics: true,
        }
    }
}

impl SolveOptions {
    /// Every diagnostic switched on.
    pub fn full() -> Self {
        Self {
            radius: true,
            inverse_bandwidth: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub problem: String,
    pub m: usize,
    pub n: usize,
    /// Legendre coefficients `ĉ` of the solution on [-1, 1]; the interval
    /// field records the original time interval.
    pub coeffs: LegendreSeries,
    pub x_hat: Vec<Complex64>,
    pub underlined: bool,
    /// `sum_{d<=N} |alpha_d|` with the conjecture flag.
    pub conjecture: ConjectureCheck,
    pub k_est: Option<usize>,
    pub nu_bound: Option<f64>,
    pub nu_estimate: Option<f64>,
    /// `||F||_2 / 2`, a lower bound on the numerical radius.
    pub nu_half_norm: Option<f64>,
    pub chopped_len: usize,
    pub plateau_found: bool,
    pub err_f: Option<f64>,
    pub err_c: Option<f64>,
    /// Normwise backward error of the banded solve.
    pub residual: f64,
    pub initial_value: Complex64,
    pub initial_value_ok: bool,
    pub warnings: Vec<String>,
    pub elapsed_seconds: f64,
}

impl SolveReport {
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        self.coeffs.eval(t)
    }

    /// Coefficients kept after chopping.
    pub fn chopped(&self) -> &[Complex64] {
        &self.coeffs.coeffs[..self.chopped_len]
    }
}

/// Solves `(I - F) x = rhs` with a banded LU; returns `x` and the backward error.
pub fn solve_system(f: &CoeffMatrix, rhs: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
    if rhs.len() != f.m {
        return Err(Error::Size(format!("right-hand side has length {}, expected {}", rhs.len(), f.m)));
    }
    let a = f.matrix.identity_minus();
    let x = a.lu()?.solve(rhs);
    let be = backward_error(&a, &x, rhs);
    Ok((x, be))
}

/// Solves `(I - F) x = φ` and forms `c = T x` through the smooth part
/// `y = x - φ`.
///
/// `φ = φ_M(-1)` holds the coefficients of a point mass at -1, so `x` carries
/// entries of size `sqrt(k)` that `T` cancels down to the solution
/// coefficients. Away from the last rows the products are known exactly:
/// `F φ` is the coefficient vector of `f̃` and `T φ = sqrt(2) e_0`. Solving
/// `(I - F) y = F φ` and adding `T φ` back keeps the cancellation out of
/// floating point.
fn solve_split_form(
    system: &CoeffMatrix,
    theta: &BandedMatrix,
    series: &LegendreSeries,
    phi: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
    let m = system.m;
    let exact_rows = m.saturating_sub(series.len());
    let mut rhs = system.matrix.matvec(phi);
    for (k, v) in rhs.iter_mut().enumerate().take(exact_rows) {
        *v = series.coeffs.get(k).copied().unwrap_or_default();
    }
    let (y, _) = solve_system(system, &rhs)?;
    let mut c = theta.matvec(&y);
    let mut t_phi = theta.matvec(phi);
    for (k, v) in t_phi.iter_mut().enumerate().take(m - 1) {
        *v = if k == 0 { Complex64::new(std::f64::consts::SQRT_2, 0.0) } else { Complex64::new(0.0, 0.0) };
    }
    for (ck, tk) in c.iter_mut().zip(&t_phi) {
        *ck += tk;
    }
    let x: Vec<Complex64> = y.iter().zip(phi).map(|(a, b)| a + b).collect();
    let residual = backward_error(&system.matrix.identity_minus(), &x, phi);
    Ok((x, c, residual))
}

/// The truncated expansion of `f̃` used for a solve.
pub fn prepare_series(reference: &OdeProblem, opts: &SolveOptions) -> Result<LegendreSeries> {
    let f = Arc::clone(&reference.f);
    let series = expand_function(&move |t| f(t), opts.expansion_tol)?;
    let delta = opts.band_tol.unwrap_or_else(|| default_tolerance(&series));
    let n = bandwidth_for_tolerance(&series, delta);
    Ok(series.truncated(n))
}

/// Number of meaningful trailing coefficients: the underlined `T` has a zero
/// last row, which is excluded from chopping.
fn chop_window(c: &[Complex64], underlined: bool) -> &[Complex64] {
    if underlined && c.len() > 1 {
        &c[..c.len() - 1]
    } else {
        c
    }
}

pub fn solve_ode(problem: &OdeProblem, m: usize, opts: &SolveOptions) -> Result<SolveReport> {
    let clock = Instant::now();
    let reference = rescale_to_reference(problem);
    let series = prepare_series(&reference, opts)?;
    solve_with_series(problem, &reference, &series, m, opts, clock)
}

fn solve_with_series(
    problem: &OdeProblem,
    reference: &OdeProblem,
    series: &LegendreSeries,
    m: usize,
    opts: &SolveOptions,
    clock: Instant,
) -> Result<SolveReport> {
    let n = series.degree();
    let full = assemble(series, m)?;
    let mut warnings = full.warnings.clone();
    let system = if opts.underline { underline_truncate(&full)? } else { full.clone() };
    let phi: Vec<Complex64> = phi_vector(m, -1.0)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let theta = theta_matrix(m)?;
    let theta = if opts.underline { underline_theta(&theta) } else { theta };
    let (x, c, residual) = solve_split_form(&system, &theta, series, &phi)?;
    let window = chop_window(&c, opts.underline);
    let chopped_len = chop_series(window, problem.tol);
    let plateau_found = chopped_len < window.len();
    if !plateau_found {
        warnings.push(format!(
            "no coefficient plateau below {:e}; M = {m} is probably too small",
            problem.tol
        ));
    }
    let coeffs = LegendreSeries::on_interval(c, problem.interval.bounds())?;
    let initial_value = coeffs.eval(-1.0)?;
    let initial_value_ok = (initial_value - 1.0).norm() <= 1e3 * problem.tol;
    if !initial_value_ok {
        warnings.push(format!("solution at the initial time is {initial_value}, not 1"));
    }

    let (mut nu_bound, mut nu_estimate, mut nu_half_norm) = (None, None, None);
    if opts.radius {
        nu_bound = Some(numerical_radius_bound(&full.matrix));
        nu_estimate = Some(numerical_radius_estimate(&full.matrix, opts.theta_count)?);
        nu_half_norm = Some(half_spectral_norm(&full.matrix)?);
    }
    let k_est = if opts.inverse_bandwidth {
        Some(probe_inverse_bandwidth(&full.matrix, problem.tol)?)
    } else {
        None
    };

    let (mut ef, mut ec) = (None, None);
    if opts.error_metrics {
        if let Some(exact) = &reference.exact {
            ef = Some(err_f(&coeffs, exact.as_ref(), m));
            let u = Arc::clone(exact);
            let exact_series = expand_function(&move |t| u(t), f64::EPSILON)?;
            let mut exact_c = exact_series.coeffs;
            exact_c.resize(m, Complex64::new(0.0, 0.0));
            ec = err_c(&coeffs.coeffs, &exact_c).ok().map(|v| v.into_iter().fold(0.0, f64::max));
        }
    }

    Ok(SolveReport {
        problem: problem.name.clone(),
        m,
        n,
        coeffs,
        x_hat: x,
        underlined: opts.underline,
        conjecture: conjecture_check(series),
        k_est,
        nu_bound,
        nu_estimate,
        nu_half_norm,
        chopped_len,
        plateau_found,
        err_f: ef,
        err_c: ec,
        residual,
        initial_value,
        initial_value_ok,
        warnings,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    })
}

/// Doubles `M` from `max(4(N + 2), 64)` until the computed coefficients show
/// a plateau below `delta_sol` that can be trusted. A plateau is accepted
/// outright when the chop point does not exceed `M - N - K - 3`, with `K` the
/// probed inverse bandwidth at `delta_sol`. Otherwise the solve is repeated
/// at `2M` and `M` is accepted if the kept coefficients agree to `delta_sol`.
pub fn auto_size(problem: &OdeProblem, delta_sol: f64) -> Result<usize> {
    auto_size_with(problem, delta_sol, &SolveOptions::default())
}

pub fn auto_size_with(problem: &OdeProblem, delta_sol: f64, opts: &SolveOptions) -> Result<usize> {
    if !(delta_sol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {delta_sol} must be positive")));
    }
    let reference = rescale_to_reference(problem).with_tol(delta_sol);
    let series = prepare_series(&reference, opts)?;
    let n = series.degree();
    let probe_opts = SolveOptions {
        radius: false,
        inverse_bandwidth: false,
        error_metrics: false,
        ..opts.clone()
    };
    let solve = |m: usize| solve_with_series(&reference, &reference, &series, m, &probe_opts, Instant::now());
    let mut m = (4 * (n + 2)).max(64);
    let mut current = solve(m)?;
    while 2 * m <= MAX_AUTO_SIZE {
        if current.plateau_found {
            let full = assemble(&series, m)?;
            let k = probe_inverse_bandwidth(&full.matrix, delta_sol)?;
            if current.chopped_len + n + k + 3 <= m {
                return Ok(m);
            }
        }
        let next = solve(2 * m)?;
        if current.plateau_found {
            let keep = current.chopped_len;
            let scale = current.coeffs.max_abs();
            let agree = current.coeffs.coeffs[..keep]
                .iter()
                .zip(&next.coeffs.coeffs)
                .all(|(a, b)| (a - b).norm() <= delta_sol * scale);
            if agree {
                return Ok(m);
            }
        }
        m *= 2;
        current = next;
    }
    Err(Error::NoConvergence {
        what: "automatic matrix size selection",
        limit: MAX_AUTO_SIZE,
        unit: "rows",
    })
}

/// Picks `M` with [`auto_size`] at the problem tolerance and solves.
pub fn solve_auto(problem: &OdeProblem, opts: &SolveOptions) -> Result<SolveReport> {
    let m = auto_size_with(problem, problem.tol, opts)?;
    solve_ode(problem, m, opts)
}

/// Solution pieced together from equal subintervals, each solved with the
/// value carried over from the previous one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSolution {
    pub breaks: Vec<f64>,
    pub reports: Vec<SolveReport>,
    /// `u` at the start of each piece.
    pub scales: Vec<Complex64>,
}

impl SplitSolution {
    /// `u(tau)` for `tau` in the original interval.
    pub fn eval(&self, tau: f64) -> Result<Complex64> {
        let last = self.reports.len() - 1;
        let j = self.breaks[1..].iter().position(|&b| tau <= b).unwrap_or(last);
        let (a, b) = (self.breaks[j], self.breaks[j + 1]);
        let t = 2.0 * (tau - a) / (b - a) - 1.0;
        Ok(self.scales[j] * self.reports[j].eval(t.clamp(-1.0, 1.0))?)
    }
}

/// Splits a problem on `[start, end]` into `pieces` equal parts.
pub fn solve_split(problem: &OdeProblem, pieces: usize, m: usize, opts: &SolveOptions) -> Result<SplitSolution> {
    if pieces == 0 {
        return Err(Error::InvalidArgument("the number of pieces must be at least 1".into()));
    }
    let (a, b) = problem.interval.bounds();
    let breaks: Vec<f64> = (0..=pieces)
        .map(|j| if j == pieces { b } else { a + (b - a) * j as f64 / pieces as f64 })
        .collect();
    let mut reports = Vec::with_capacity(pieces);
    let mut scales = Vec::with_capacity(pieces);
    let mut carry = Complex64::new(1.0, 0.0);
    for j in 0..pieces {
        let (s, e) = (breaks[j], breaks[j + 1]);
        let f = Arc::clone(&problem.f);
        let mut piece = OdeProblem::on_span(format!("{} [{j}]", problem.name), move |t| f(t), s, e)?;
        piece.tol = problem.tol;
        if let Some(u) = &problem.exact {
            let u = Arc::clone(u);
            let u0 = u(s);
            piece.exact = Some(Arc::new(move |t| u(t) / u0));
        }
        let report = solve_ode(&piece, m, opts)?;
        scales.push(carry);
        carry *= report.eval(1.0)?;
        reports.push(report);
    }
    Ok(SplitSolution { breaks, reports, scales })
}

pub use analysis::predicted_accurate_entries;
