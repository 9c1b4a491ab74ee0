//! `legstar`: solve scalar linear ODEs with the Legendre coefficient-matrix
//! method, print diagnostics, and regenerate the reference experiments.

mod config;
mod expr;
mod output;
mod reproduce;

use std::path::Path;
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use legstar::analysis::{
    conjecture_check, half_spectral_norm, numerical_radius_bound, numerical_radius_estimate,
    predicted_accurate_entries, probe_inverse_bandwidth,
};
use legstar::coeff_matrix::assemble;
use legstar::solver::{self, prepare_series, rescale_to_reference, Interval, OdeProblem, SolveReport};
use num_complex::Complex64;
use serde::Serialize;

use config::{Format, ProblemArgs};
use reproduce::TableId;

#[derive(Debug, Parser)]
#[command(name = "legstar", version, about = "Legendre coefficient-matrix solver for du/dt = f(t) u, u(start) = 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one problem and write coefficients, a solution grid and a report.
    Solve(ProblemArgs),
    /// Numerical radius, bandwidths and the coefficient-sum condition, without solving.
    Diagnose(ProblemArgs),
    /// Recompute one of the reference tables next to the published values.
    Reproduce {
        #[arg(long, value_enum)]
        table: TableId,
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Exit status 2 for bad input, 3 for a numerical failure.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Numerical(anyhow::Error),
    Io(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Numerical(e) | Failure::Io(e) => e,
        }
    }
}

impl From<legstar::Error> for Failure {
    fn from(e: legstar::Error) -> Self {
        match e {
            legstar::Error::InvalidArgument(_) | legstar::Error::Size(_) => Failure::Config(anyhow!(e)),
            _ => Failure::Numerical(anyhow!(e)),
        }
    }
}

fn config<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Config)
}

fn io<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Io)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Reproduce { table, out, format } => reproduce::run(table, out.as_deref(), format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            ExitCode::from(f.code())
        }
    }
}

/// `count` equidistant points of the problem's own interval.
fn grid(interval: &Interval, count: usize) -> Vec<f64> {
    let (a, b) = interval.bounds();
    (0..count)
        .map(|j| if j + 1 == count { b } else { a + (b - a) * j as f64 / (count - 1).max(1) as f64 })
        .collect()
}

fn emit(out: Option<&Path>, name: &str, contents: &str, to_stdout: bool) -> Result<(), Failure> {
    match out {
        Some(dir) => io(output::write(dir, name, contents)),
        None => {
            if to_stdout {
                io(output::print(contents))?;
            }
            Ok(())
        }
    }
}

fn summary(r: &SolveReport) -> String {
    let mut s = format!("{}: M = {}, N = {}, residual = {:.3e}", r.problem, r.m, r.n, r.residual);
    if let Some(e) = r.err_f {
        s += &format!(", err_f = {e:.4e}");
    }
    if let Some(e) = r.err_c {
        s += &format!(", err_c = {e:.4e}");
    }
    s
}

fn solve(args: ProblemArgs) -> Result<(), Failure> {
    let args = config(args.resolve())?;
    let problem = config(args.problem())?;
    let size = config(args.size())?;
    let opts = args.options();
    let format = args.format();
    let out = args.out.as_deref();
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };

    if let Some(pieces) = args.split {
        let Some(m) = size else {
            return Err(Failure::Config(anyhow!("--split needs an explicit --M")));
        };
        let sol = solver::solve_split(&problem, pieces, m, &opts)?;
        let mut coeffs = output::Table::new(vec!["piece", "index", "re", "im"]);
        for (j, r) in sol.reports.iter().enumerate() {
            for (k, c) in r.coeffs.coeffs.iter().enumerate() {
                coeffs.push(vec![j.into(), k.into(), c.re.into(), c.im.into()]);
            }
        }
        let points: Vec<(f64, Complex64)> =
            grid(&problem.interval, 10 * m).into_iter().map(|t| Ok((t, sol.eval(t)?))).collect::<Result<_, legstar::Error>>()?;
        emit(out, &format!("coefficients.{ext}"), &io(coeffs.render(format))?, format == Format::Csv)?;
        emit(out, &format!("solution.{ext}"), &io(output::grid_table(&points).render(format))?, false)?;
        emit(out, "report.json", &io(output::json_text(&sol))?, format == Format::Json)?;
        for r in &sol.reports {
            eprintln!("{}", summary(r));
        }
        return Ok(());
    }

    let report = match size {
        Some(m) => solver::solve_ode(&problem, m, &opts)?,
        None => solver::solve_auto(&problem, &opts)?,
    };
    let points: Vec<(f64, Complex64)> = grid(&Interval::Reference, 10 * report.m)
        .into_iter()
        .map(|t| Ok((problem.interval.from_reference(t), report.eval(t)?)))
        .collect::<Result<_, legstar::Error>>()?;
    emit(out, &format!("coefficients.{ext}"), &io(output::coefficient_table(&report.coeffs.coeffs).render(format))?, format == Format::Csv)?;
    emit(out, &format!("solution.{ext}"), &io(output::grid_table(&points).render(format))?, false)?;
    emit(out, "report.json", &io(output::json_text(&report))?, format == Format::Json)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("{}", summary(&report));
    Ok(())
}

#[derive(Debug, Serialize)]
struct Diagnostics {
    problem: String,
    interval: (f64, f64),
    m: usize,
    n: usize,
    coefficient_sum: f64,
    conjecture_satisfied: bool,
    nu_bound: Option<f64>,
    nu_estimate: Option<f64>,
    nu_half_norm: Option<f64>,
    k_est: Option<usize>,
    predicted_accurate_entries: Option<usize>,
    notes: Vec<String>,
}

fn diagnose(args: ProblemArgs) -> Result<(), Failure> {
    let args = config(args.resolve())?;
    let problem: OdeProblem = config(args.problem())?;
    let opts = args.options();
    let reference = rescale_to_reference(&problem);
    let series = prepare_series(&reference, &opts)?;
    let n = series.degree();
    let m = args.m.unwrap_or((4 * (n + 2)).max(64));
    let f = assemble(&series, m)?;
    let check = conjecture_check(&series);
    let mut notes = Vec::new();
    let mut keep = |r: legstar::Result<f64>, what: &str| match r {
        Ok(v) => Some(v),
        Err(e) => {
            notes.push(format!("{what}: {e}"));
            None
        }
    };
    let nu_estimate = keep(numerical_radius_estimate(&f.matrix, 64), "numerical radius estimate");
    let nu_half_norm = keep(half_spectral_norm(&f.matrix), "spectral norm");
    let k_est = match probe_inverse_bandwidth(&f.matrix, problem.tol) {
        Ok(k) => Some(k),
        Err(e) => {
            notes.push(format!("inverse bandwidth: {e}"));
            None
        }
    };
    if !check.satisfied {
        notes.push(format!(
            "sum |alpha_d| = {:.4} exceeds {}: existence of the solution is not guaranteed by this test, but the solve usually still succeeds",
            check.coefficient_sum,
            legstar::analysis::CONJECTURE_THRESHOLD
        ));
    }
    notes.extend(f.warnings.iter().cloned());
    let d = Diagnostics {
        problem: problem.name.clone(),
        interval: problem.interval.bounds(),
        m,
        n,
        coefficient_sum: check.coefficient_sum,
        conjecture_satisfied: check.satisfied,
        nu_bound: Some(numerical_radius_bound(&f.matrix)),
        nu_estimate,
        nu_half_norm,
        k_est,
        predicted_accurate_entries: k_est.map(|k| predicted_accurate_entries(m, n, k)),
        notes,
    };
    emit(args.out.as_deref(), "diagnostics.json", &io(output::json_text(&d))?, true)
}
