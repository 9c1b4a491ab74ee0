//! Problem and run settings from flags and an optional JSON file.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, ValueEnum};
use legstar::problems::{self, BuiltinParams};
use legstar::solver::{OdeProblem, SolveOptions};
use serde::{Deserialize, Serialize};

use crate::expr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by `solve` and `diagnose`. Every field can also come from
/// `--config`; a flag given on the command line wins.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemArgs {
    /// Built-in problem: toy, poly, nmr or zero.
    #[arg(long, conflicts_with = "f")]
    pub builtin: Option<String>,
    /// f(t) as an expression in t, e.g. "-i*sin(t+1)".
    #[arg(long, allow_hyphen_values = true)]
    pub f: Option<String>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// End of the time interval [0, tend]. For --f without --tend the
    /// problem lives on [-1, 1].
    #[arg(long)]
    pub tend: Option<f64>,
    /// Size of the truncated system.
    #[arg(long = "M", id = "M")]
    #[serde(rename = "M", alias = "m")]
    pub m: Option<usize>,
    /// Pick M by doubling until the coefficients converge.
    #[arg(long)]
    pub auto_size: bool,
    /// Target accuracy of the solution.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Solve the plain truncated system.
    #[arg(long)]
    pub no_underline: bool,
    /// Split the interval into this many equal pieces.
    #[arg(long)]
    pub split: Option<usize>,
    /// Output directory; without it results go to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the above settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl ProblemArgs {
    /// Fills unset fields from the `--config` file, if any.
    pub fn resolve(self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let file = load(&path)?;
        // a problem named on the command line replaces the file's problem
        let (builtin, f) = if self.builtin.is_some() || self.f.is_some() {
            (self.builtin, self.f)
        } else {
            (file.builtin, file.f)
        };
        Ok(Self {
            builtin,
            f,
            omega: self.omega.or(file.omega),
            beta: self.beta.or(file.beta),
            nu: self.nu.or(file.nu),
            alpha: self.alpha.or(file.alpha),
            gamma: self.gamma.or(file.gamma),
            tend: self.tend.or(file.tend),
            m: self.m.or(file.m),
            auto_size: self.auto_size || file.auto_size,
            tol: self.tol.or(file.tol),
            no_underline: self.no_underline || file.no_underline,
            split: self.split.or(file.split),
            out: self.out.or(file.out),
            format: self.format.or(file.format),
            config: Some(path),
        })
    }

    pub fn problem(&self) -> anyhow::Result<OdeProblem> {
        let mut problem = match (&self.builtin, &self.f) {
            (Some(_), Some(_)) => bail!("give either --builtin or --f, not both"),
            (None, None) => bail!("no problem given: use --builtin NAME or --f EXPR"),
            (Some(name), None) => {
                let params = BuiltinParams {
                    omega: self.omega,
                    beta: self.beta,
                    nu: self.nu,
                    alpha: self.alpha,
                    gamma: self.gamma,
                    tend: self.tend,
                };
                problems::builtin(name, &params).map_err(|e| anyhow!("{e}"))?
            }
            (None, Some(src)) => {
                let e = expr::parse(src).map_err(|e| anyhow!("--f: {e}"))?;
                let name = format!("f(t) = {src}");
                match self.tend {
                    Some(tend) => OdeProblem::on_span(name, move |t| e.eval(t), 0.0, tend).map_err(|e| anyhow!("{e}"))?,
                    None => OdeProblem::on_reference(name, move |t| e.eval(t)),
                }
            }
        };
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                bail!("--tol must be positive, got {tol}");
            }
            problem = problem.with_tol(tol);
        }
        Ok(problem)
    }

    pub fn options(&self) -> SolveOptions {
        SolveOptions { underline: !self.no_underline, radius: true, ..SolveOptions::default() }
    }

    /// M from the flags, or `None` when auto sizing is requested.
    pub fn size(&self) -> anyhow::Result<Option<usize>> {
        match (self.m, self.auto_size) {
            (Some(_), true) => bail!("give either --M or --auto-size, not both"),
            (None, false) => bail!("no system size: use --M N or --auto-size"),
            (Some(m), false) => Ok(Some(m)),
            (None, true) => Ok(None),
        }
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

fn load(path: &Path) -> anyhow::Result<ProblemArgs> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
