//! Cross-module invariants of the solver and its diagnostics.

use legstar::analysis::{
    numerical_radius_bound, numerical_radius_estimate, predicted_accurate_entries, probe_inverse_bandwidth,
};
use legstar::basis_matrix::basis_matrix_structured;
use legstar::coeff_matrix::assemble;
use legstar::problems;
use legstar::solver::{prepare_series, rescale_to_reference, solve_auto, solve_ode, OdeProblem, SolveOptions};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn cases() -> Vec<(OdeProblem, usize)> {
    vec![
        (problems::toy(1.0, 1.0), 60),
        (problems::toy(5.0, 1.0), 100),
        (problems::poly(25.0), 400),
        (problems::nmr(0.05, 3450.0, 3450.0, 6.0e-3, 1.0e-3), 120),
    ]
}

#[test]
fn radius_estimate_below_bound() {
    for (p, m) in cases() {
        let series = prepare_series(&rescale_to_reference(&p), &SolveOptions::default()).unwrap();
        let f = assemble(&series, m).unwrap();
        let nu = numerical_radius_estimate(&f.matrix, 32).unwrap();
        let bound = numerical_radius_bound(&f.matrix);
        assert!(nu <= bound + 1e-10, "{}: {nu} > {bound}", p.name);
    }
}

#[test]
fn large_basis_matrices_stay_below_radius_limit() {
    for d in [0usize, 1, 3, 10, 40, 100] {
        let b = basis_matrix_structured(d, 500).unwrap().materialize();
        let nu = numerical_radius_estimate(&b, 32).unwrap();
        assert!(nu <= 0.89, "d = {d}: {nu}");
    }
}

#[test]
fn predicted_entries_match_a_larger_solve() {
    for (p, m) in cases() {
        let opts = SolveOptions::default();
        let series = prepare_series(&rescale_to_reference(&p), &opts).unwrap();
        let f = assemble(&series, m).unwrap();
        let k = probe_inverse_bandwidth(&f.matrix, 1e-13).unwrap();
        let small = solve_ode(&p, m, &opts).unwrap();
        let large = solve_ode(&p, 4 * m, &opts).unwrap();
        let keep = predicted_accurate_entries(m, small.n, k);
        for i in 0..keep {
            let diff = (small.x_hat[i] - large.x_hat[i]).norm();
            assert!(diff <= 1e-12, "{}: entry {i} of {keep} off by {diff:e}", p.name);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn constant_coefficient_matches_exponential(re in -1.0f64..0.2, im in -1.0f64..1.0, t in -1.0f64..1.0) {
        let a = c(re, im);
        let r = solve_ode(&problems::constant(a), 40, &SolveOptions::default()).unwrap();
        let want = (a * (t + 1.0)).exp();
        prop_assert!((r.eval(t).unwrap() - want).norm() <= 1e-12);
        prop_assert!((r.initial_value - 1.0).norm() <= 1e-12);
    }

    #[test]
    fn auto_sized_toy_reaches_tolerance(omega in 0.5f64..4.0, beta in 0.2f64..1.5) {
        let p = problems::toy(omega, beta).with_tol(1e-12);
        let r = solve_auto(&p, &SolveOptions::default()).unwrap();
        prop_assert!((r.eval(-1.0).unwrap() - 1.0).norm() <= 1e-12);
        prop_assert!(r.err_f.unwrap() <= 1e-10);
    }
}
