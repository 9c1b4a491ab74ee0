//! Integrals of products of three Legendre polynomials and the Hankel/Toeplitz
//! generator functions they factor into.
//!
//! Everything is expressed through the normalized central binomial
//! `A(m) = binom(2m, m) / 4^m = prod_{j=1..m} (2j - 1) / (2j)`, which stays in
//! `(0, 1]` for every `m`. This avoids the overflow of the raw binomial form
//! and the cancellation of large log-factorials at high degree.

use std::sync::{OnceLock, RwLock};

/// Degrees of a triple product `∫ p_a p_b p_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TripleIndex {
    pub a: usize,
    pub b: usize,
    pub c: usize,
}

impl TripleIndex {
    pub fn new(a: usize, b: usize, c: usize) -> Self {
        Self { a, b, c }
    }

    /// Selection rules: even total degree and the triangle inequalities.
    pub fn is_admissible(&self) -> bool {
        let (a, b, c) = (self.a, self.b, self.c);
        (a + b + c) % 2 == 0 && a <= b + c && b <= a + c && c <= a + b
    }

    /// Half the total degree, `(a + b + c) / 2`.
    pub fn half_sum(&self) -> usize {
        (self.a + self.b + self.c) / 2
    }

    pub fn alpha(&self) -> usize {
        self.b.abs_diff(self.c)
    }
}

fn table() -> &'static RwLock<Vec<f64>> {
    static TABLE: OnceLock<RwLock<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![1.0]))
}

/// `A(m) = binom(2m, m) / 4^m`, from a shared table that grows on demand.
pub fn central_binomial_ratio(m: usize) -> f64 {
    {
        let t = table().read().expect("binomial table poisoned");
        if let Some(&v) = t.get(m) {
            return v;
        }
    }
    let mut t = table().write().expect("binomial table poisoned");
    let target = (m + 1).max(2 * t.len());
    while t.len() < target {
        let j = t.len() as f64;
        let next = t[t.len() - 1] * (2.0 * j - 1.0) / (2.0 * j);
        t.push(next);
    }
    t[m]
}

/// `∫_{-1}^{1} p_a p_b p_c` for orthonormal Legendre polynomials. Returns
/// exactly `0.0` when a selection rule forbids the triple.
pub fn triple_product(a: usize, b: usize, c: usize) -> f64 {
    let idx = TripleIndex::new(a, b, c);
    if !idx.is_admissible() {
        return 0.0;
    }
    let s = idx.half_sum();
    let scale = ((2 * a + 1) as f64 * (2 * b + 1) as f64 * (2 * c + 1) as f64).sqrt()
        / (std::f64::consts::SQRT_2 * (2 * s + 1) as f64);
    scale * central_binomial_ratio(s - a) * central_binomial_ratio(s - b) * central_binomial_ratio(s - c)
        / central_binomial_ratio(s)
}

/// Same integral for the polynomials normalized by `P_k(1) = 1`.
pub fn triple_product_normalized(a: usize, b: usize, c: usize) -> f64 {
    let idx = TripleIndex::new(a, b, c);
    if !idx.is_admissible() {
        return 0.0;
    }
    let s = idx.half_sum();
    2.0 / (2 * s + 1) as f64
        * central_binomial_ratio(s - a)
        * central_binomial_ratio(s - b)
        * central_binomial_ratio(s - c)
        / central_binomial_ratio(s)
}

/// Hankel generator `h(a, gamma)` with `gamma = b + c`. Zero outside
/// `gamma >= a`, `a + gamma` even.
pub fn hankel_entry(a: usize, gamma: usize) -> f64 {
    if gamma < a || (a + gamma) % 2 == 1 {
        return 0.0;
    }
    let m = (gamma - a) / 2;
    central_binomial_ratio(m) / (central_binomial_ratio(m + a) * (a + gamma + 1) as f64)
}

/// Toeplitz generator `t(a, alpha)` with `alpha = |b - c|`. Zero outside
/// `alpha <= a`, `a + alpha` even.
pub fn toeplitz_entry(a: usize, alpha: usize) -> f64 {
    if alpha > a || (a + alpha) % 2 == 1 {
        return 0.0;
    }
    std::f64::consts::FRAC_1_SQRT_2
        * central_binomial_ratio((a + alpha) / 2)
        * central_binomial_ratio((a - alpha) / 2)
}
