//! Built-in test problems with known solutions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::OdeProblem;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `f̃(t) = -i (ω/β) sin(ω(t + 1))` on [-1, 1], with
/// `u(t) = exp(-(i/β)(1 - cos(ωt + ω)))`.
pub fn toy(omega: f64, beta: f64) -> OdeProblem {
    OdeProblem::on_reference(format!("toy(omega={omega}, beta={beta})"), move |t| {
        -I * (omega / beta * (omega * (t + 1.0)).sin())
    })
    .with_exact(move |t| (-I / beta * (1.0 - (omega * t + omega).cos())).exp())
}

/// `f(τ) = -iτ` on `[0, t_end]`, with `u(τ) = exp(-iτ²/2)`.
pub fn poly(t_end: f64) -> OdeProblem {
    OdeProblem::on_span(format!("poly(tend={t_end})"), |tau| -I * tau, 0.0, t_end)
        .expect("positive t_end")
        .with_exact(|tau| (-I * (tau * tau / 2.0)).exp())
}

/// `f(τ) = -2πi(α + β cos(2πντ) + γ cos(4πντ))` on `[0, t_end]`.
pub fn nmr(alpha: f64, beta: f64, gamma: f64, nu: f64, t_end: f64) -> OdeProblem {
    OdeProblem::on_span(
        format!("nmr(alpha={alpha}, beta={beta}, gamma={gamma}, nu={nu}, tend={t_end})"),
        move |tau| -2.0 * PI * I * (alpha + beta * (2.0 * PI * nu * tau).cos() + gamma * (4.0 * PI * nu * tau).cos()),
        0.0,
        t_end,
    )
    .expect("positive t_end")
    .with_exact(move |tau| {
        let phase = alpha * tau
            + beta * (2.0 * PI * nu * tau).sin() / (2.0 * PI * nu)
            + gamma * (4.0 * PI * nu * tau).sin() / (4.0 * PI * nu);
        (-2.0 * PI * I * phase).exp()
    })
}

/// `f̃ = c` on [-1, 1], with `u(t) = exp(c (t + 1))`.
pub fn constant(c: Complex64) -> OdeProblem {
    OdeProblem::on_reference(format!("constant({c})"), move |_| c).with_exact(move |t| (c * (t + 1.0)).exp())
}

pub fn zero() -> OdeProblem {
    OdeProblem::on_reference("zero", |_| Complex64::new(0.0, 0.0)).with_exact(|_| Complex64::new(1.0, 0.0))
}

/// Parameters of the built-in problems; unset fields take the defaults of
/// the respective experiment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuiltinParams {
    pub omega: Option<f64>,
    pub beta: Option<f64>,
    pub nu: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub tend: Option<f64>,
}

pub const BUILTIN_NAMES: [&str; 4] = ["toy", "poly", "nmr", "zero"];

/// Looks up a built-in problem by name.
pub fn builtin(name: &str, p: &BuiltinParams) -> Result<OdeProblem> {
    let positive = |v: f64, what: &str| {
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::InvalidArgument(format!("{what} must be positive, got {v}")))
        }
    };
    match name {
        "toy" => Ok(toy(p.omega.unwrap_or(5.0), positive(p.beta.unwrap_or(10.0), "beta")?)),
        "poly" => Ok(poly(positive(p.tend.unwrap_or(25.0), "tend")?)),
        "nmr" => Ok(nmr(
            p.alpha.unwrap_or(0.05),
            p.beta.unwrap_or(3450.0),
            p.gamma.unwrap_or(3450.0),
            positive(p.nu.unwrap_or(5000.0), "nu")?,
            positive(p.tend.unwrap_or(1e-2), "tend")?,
        )),
        "zero" => Ok(zero()),
        other => Err(Error::InvalidArgument(format!(
            "unknown builtin problem '{other}' (expected one of {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}
