//! Chebyshev interpolation at second-kind points and the plateau-based chopping
//! rule used to pick the length of an interpolant automatically.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Second-kind Chebyshev points `cos(pi j / (n - 1))`, from +1 down to -1.
pub fn chebyshev_points(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let m = (n - 1) as f64;
    (0..n)
        .map(|j| {
            // sin form is symmetric and exact at the midpoint.
            (std::f64::consts::PI * (m - 2.0 * j as f64) / (2.0 * m)).sin()
        })
        .collect()
}

/// Coefficients of the degree `n - 1` interpolant through `values` sampled at
/// [`chebyshev_points`], computed with a DCT-I via FFT.
pub fn values_to_coeffs(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    if n == 1 {
        return values.to_vec();
    }
    let len = 2 * (n - 1);
    let mut buf: Vec<Complex64> = Vec::with_capacity(len);
    buf.extend_from_slice(values);
    buf.extend(values[1..n - 1].iter().rev());
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    let scale = 1.0 / (n - 1) as f64;
    let mut coeffs: Vec<Complex64> = buf[..n].iter().map(|v| v * scale).collect();
    coeffs[0] *= 0.5;
    coeffs[n - 1] *= 0.5;
    coeffs
}

/// Clenshaw evaluation of `sum c_k T_k(x)`.
pub fn eval_chebyshev(coeffs: &[Complex64], x: f64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().skip(1).rev() {
        let b0 = c + b1 * (2.0 * x) - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or_default() + b1 * x - b2
}

/// Plateau detection on a coefficient sequence (Aurentz & Trefethen's
/// "standard chop"). Returns the number of coefficients to keep; returns
/// `coeffs.len()` when no plateau is found.
pub fn plateau_chop(coeffs: &[Complex64], tol: f64) -> usize {
    let n = coeffs.len();
    if tol >= 1.0 {
        return 1;
    }
    if n < 17 {
        return n;
    }
    let mut envelope: Vec<f64> = coeffs.iter().map(|c| c.norm()).collect();
    for j in (0..n - 1).rev() {
        envelope[j] = envelope[j].max(envelope[j + 1]);
    }
    if envelope[0] == 0.0 {
        return 1;
    }
    let head = envelope[0];
    envelope.iter_mut().for_each(|e| *e /= head);

    // 1-based indices below mirror the reference description.
    let at = |e: &[f64], j: usize| e[j - 1];
    let mut plateau_point = 0;
    let mut j2 = 0;
    for j in 2..=n {
        j2 = (1.25 * j as f64 + 5.0).round() as usize;
        if j2 > n {
            return n;
        }
        let e1 = at(&envelope, j);
        let e2 = at(&envelope, j2);
        let r = 3.0 * (1.0 - e1.ln() / tol.ln());
        if e1 == 0.0 || e2 / e1 > r {
            plateau_point = j - 1;
            break;
        }
    }
    if at(&envelope, plateau_point) == 0.0 {
        return plateau_point;
    }
    let floor = tol.powf(7.0 / 6.0);
    let j3 = envelope.iter().filter(|&&e| e >= floor).count();
    if j3 < j2 {
        j2 = j3 + 1;
        envelope[j2 - 1] = floor;
    }
    let ramp = -tol.log10() / 3.0;
    let mut best = f64::INFINITY;
    let mut d = 1;
    for (i, e) in envelope[..j2].iter().enumerate() {
        let frac = if j2 > 1 { i as f64 / (j2 - 1) as f64 } else { 0.0 };
        let v = e.log10() + ramp * frac;
        if v < best {
            best = v;
            d = i + 1;
        }
    }
    d.saturating_sub(1).max(1)
}
