//! Independent references for tests: Fourier coefficients of
//! `f̃(t) Θ(t - s)` by quadrature, and solutions of the scalar ODE.
//!
//! The scalar equation is solved exactly by `u(t) = exp(∫ f)`. That shortcut
//! relies on scalars commuting and does not carry over to systems.

use num_complex::Complex64;

use crate::error::Result;
use crate::legendre::phi_vector;
use crate::quadrature::{gauss_legendre, integrate_adaptive};
use crate::solver::OdeProblem;

const QUAD_TOL: f64 = 1e-13;
const MAX_NODES: usize = 1 << 16;

/// `∫_{-1}^{τ} p_l(ρ) dρ` in closed form.
pub fn legendre_primitive(l: usize, tau: f64) -> Result<f64> {
    let p = phi_vector(l + 2, tau)?;
    Ok(if l == 0 {
        p[1] / 3f64.sqrt() + p[0]
    } else {
        (p[l + 1] / ((2 * l + 3) as f64).sqrt() - p[l - 1] / ((2 * l - 1) as f64).sqrt()) / ((2 * l + 1) as f64).sqrt()
    })
}

/// `f_{k,l} = ∫ f̃(τ) p_k(τ) [∫_{-1}^{τ} p_l(ρ) dρ] dτ`, outer integral by
/// adaptive Gauss–Legendre.
pub fn fourier_coeff_reference(f: &dyn Fn(f64) -> Complex64, k: usize, l: usize) -> Result<Complex64> {
    integrate_adaptive(
        |tau| {
            let pk = phi_vector(k + 1, tau).expect("node inside [-1, 1]")[k];
            let prim = legendre_primitive(l, tau).expect("node inside [-1, 1]");
            f(tau) * (pk * prim)
        },
        -1.0,
        1.0,
        QUAD_TOL,
        MAX_NODES,
    )
}

/// The same coefficient by a tensor Gauss rule over the triangle `s < t`,
/// with no closed forms at all.
pub fn fourier_coeff_brute_force(f: &dyn Fn(f64) -> Complex64, k: usize, l: usize, nodes: usize) -> Complex64 {
    let rule = gauss_legendre(nodes);
    let mut total = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let pk = phi_vector(k + 1, x).expect("node inside [-1, 1]")[k];
        let half = (x + 1.0) / 2.0;
        let inner: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&y, &v)| v * phi_vector(l + 1, -1.0 + half * (y + 1.0)).expect("inside")[l])
            .sum::<f64>()
            * half;
        total += f(x) * (w * pk * inner);
    }
    total
}

/// `u(t)` in the problem's own variable: the registered solution if there is
/// one, otherwise `exp(∫_start^t f)`.
pub fn reference_solution(problem: &OdeProblem, t: f64) -> Result<Complex64> {
    match &problem.exact {
        Some(u) => Ok(u(t)),
        None => quadrature_solution(problem, t),
    }
}

/// `exp(∫_start^t f)` by adaptive quadrature, ignoring any registered solution.
pub fn quadrature_solution(problem: &OdeProblem, t: f64) -> Result<Complex64> {
    let (a, _) = problem.interval.bounds();
    if t == a {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let f = &problem.f;
    Ok(integrate_adaptive(|x| f(x), a, t, QUAD_TOL, MAX_NODES)?.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis_matrix::basis_entry;
    use crate::problems;
    use rand::{Rng, SeedableRng};

    #[test]
    fn primitive_matches_quadrature() {
        for l in 0..8 {
            for tau in [-1.0, -0.4, 0.3, 1.0] {
                let half = (tau + 1.0) / 2.0;
                let rule = gauss_legendre(12);
                let q: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(&y, &w)| w * half * phi_vector(l + 1, -1.0 + half * (y + 1.0)).unwrap()[l])
                    .sum();
                assert!((legendre_primitive(l, tau).unwrap() - q).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn basis_matrix_entries() {
        let p0 = |_t: f64| Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let v = fourier_coeff_reference(&p0, 0, 0).unwrap();
        assert!((v.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-14);
        for d in 0..=8usize {
            let pd = move |t: f64| Complex64::new(phi_vector(d + 1, t).unwrap()[d], 0.0);
            for k in 0..14usize {
                for l in 0..14usize {
                    let got = fourier_coeff_reference(&pd, k, l).unwrap();
                    if k.abs_diff(l) > d + 1 {
                        assert!(got.norm() < 1e-13);
                    } else {
                        assert!((got.re - basis_entry(d, k, l)).abs() < 1e-12, "d={d} k={k} l={l}");
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_cross_check() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..3 {
            let d = rng.gen_range(0..6usize);
            let k = rng.gen_range(0..10usize);
            let l = rng.gen_range(0..10usize);
            let pd = move |t: f64| Complex64::new(phi_vector(d + 1, t).unwrap()[d], 0.0);
            let a = fourier_coeff_reference(&pd, k, l).unwrap();
            let b = fourier_coeff_brute_force(&pd, k, l, 24);
            assert!((a - b).norm() < 1e-12, "d={d} k={k} l={l}");
            assert!((a.re - basis_entry(d, k, l)).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_matches_analytic_solutions() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let cases = [
            problems::toy(5.0, 10.0),
            problems::poly(25.0),
            problems::nmr(0.05, 3450.0, 3450.0, 5000.0, 1e-2),
        ];
        for p in &cases {
            let (a, b) = p.interval.bounds();
            for _ in 0..100 {
                let t = rng.gen_range(a..=b);
                let exact = reference_solution(p, t).unwrap();
                let quad = quadrature_solution(p, t).unwrap();
                assert!((exact - quad).norm() < 1e-12, "{} at {t}", p.name);
            }
        }
    }

    #[test]
    fn zero_function_reference() {
        let p = crate::solver::OdeProblem::on_reference("z", |_| Complex64::new(0.0, 0.0));
        assert_eq!(reference_solution(&p, 0.4).unwrap(), Complex64::new(1.0, 0.0));
    }
}
