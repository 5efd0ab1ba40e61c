#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! `mvstable`: projection functions, multivariate stable densities and
//! oracle checks from the command line.
//!
//! Exit codes: 0 ok, 1 check failure, 2 usage or parse error, 3 numerical
//! non-convergence, 4 degenerate measure.

mod measure_file;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mvstable_core::density::{make_sphere_rule, SphereRule, SphereRuleKind};
use mvstable_core::projection::g_direct;
use mvstable_core::spectral::convert_measure;
use mvstable_core::verify::{density_suite, kernel_suite, projection_suite, CheckReport};
use mvstable_core::{density_grid, g_eval, Error, GQuery, Lattice, OneDimRep, Representation, Route, ToleranceSpec};

use measure_file::MeasureFile;

const THREADS_VAR: &str = "MVSTABLE_THREADS";

#[derive(Parser)]
#[command(name = "mvstable", version, about = "Multivariate stable densities via one-dimensional projections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the projection function g over a range of v.
    #[command(allow_negative_numbers = true)]
    G {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        d: u32,
        #[arg(long, default_value = "A")]
        rep: OneDimRep,
        #[arg(long = "v-from")]
        v_from: f64,
        #[arg(long = "v-to")]
        v_to: f64,
        #[arg(long = "v-step")]
        v_step: f64,
        /// Relative tolerance; the absolute one is 1% of it.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Add the direct-integration value and the absolute difference.
        #[arg(long)]
        oracle: bool,
    },
    /// Evaluate a density on a rectangular lattice.
    Density {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long, default_value = "auto")]
        route: Route,
        /// `x0:x1:step[,y0:y1:step,...]`, one axis per dimension.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        /// Circle points (d = 2), polar nodes (d = 3) or random points (d ≥ 4).
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Re-express a measure file in the other representation.
    Convert {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        to: Representation,
    },
    /// Run an oracle cross-check grid.
    Check {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Suite {
    Kernel,
    Projection,
    Density,
}

/// A failed command: exit code and message for standard error.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NonFinite { .. } => 3,
            Error::Degenerate(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        if let Some(core) = e.downcast_ref::<Error>() {
            let mut f = Failure::from(core.clone());
            f.message = format!("{e:#}");
            return f;
        }
        Failure::usage(format!("{e:#}"))
    }
}

/// Output plus an optional trailing failure (data is still printed).
type Outcome = Result<(String, Option<Failure>), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message);
        return ExitCode::from(f.code);
    }
    let outcome = match cli.command {
        Command::G {
            alpha,
            beta,
            d,
            rep,
            v_from,
            v_to,
            v_step,
            tol,
            oracle,
        } => cmd_g(alpha, beta, d, rep, (v_from, v_to, v_step), tol, oracle),
        Command::Density {
            measure,
            route,
            grid,
            nodes,
            seed,
            tol,
        } => cmd_density(&measure, route, &grid, nodes, seed, tol),
        Command::Convert { measure, to } => cmd_convert(&measure, to),
        Command::Check { suite, tol } => cmd_check(suite, tol),
    };
    let (text, trailing) = match outcome {
        Ok(v) => v,
        Err(f) => (String::new(), Some(f)),
    };
    let mut out = std::io::stdout().lock();
    if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
        return ExitCode::from(2);
    }
    match trailing {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn tolerance(tol: f64) -> Result<ToleranceSpec, Failure> {
    let d = ToleranceSpec::default();
    ToleranceSpec::new(tol, tol * 1e-2, d.max_subdivisions).map_err(Failure::from)
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmd_g(alpha: f64, beta: f64, d: u32, rep: OneDimRep, range: (f64, f64, f64), tol: f64, oracle: bool) -> Outcome {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Failure::usage(format!("--alpha must lie in (0, 2), got {alpha}")));
    }
    if !(beta.abs() <= 1.0) {
        return Err(Failure::usage(format!("--beta must lie in [-1, 1], got {beta}")));
    }
    if d < 1 {
        return Err(Failure::usage("--d must be at least 1"));
    }
    let spec = tolerance(tol)?;
    let axis = Lattice::new(vec![range]).map_err(|e| Failure::usage(format!("v range: {e}")))?;
    let vs = axis.axis_values(0);
    let oracle_tol = ToleranceSpec::new(1e-11, 1e-13, 400_000)?;

    use rayon::prelude::*;
    let rows = vs
        .par_iter()
        .map(|&v| {
            let q = GQuery::new(v, beta, alpha, d, rep)?;
            let g = g_eval(&q, &spec)?;
            let direct = if oracle { Some(g_direct(&q, &oracle_tol)?) } else { None };
            Ok((v, g, direct))
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let mut out = String::from("v,value,err_est,method");
    if oracle {
        out.push_str(",direct,abs_diff");
    }
    out.push('\n');
    let mut failed = 0;
    for (v, g, direct) in rows {
        write!(out, "{},{},{},{}", num(v), num(g.value), num(g.err_est), g.method.tag()).unwrap();
        if let Some(dir) = direct {
            write!(out, ",{},{}", num(dir), num((g.value - dir).abs())).unwrap();
        }
        out.push('\n');
        failed += usize::from(!g.converged);
    }
    let trailing = (failed > 0).then(|| Failure {
        code: 3,
        message: format!("{failed} row(s) did not reach the requested tolerance"),
    });
    Ok((out, trailing))
}

fn parse_grid(spec: &str) -> Result<Vec<(f64, f64, f64)>, Failure> {
    spec.split(',')
        .enumerate()
        .map(|(i, axis)| {
            let parts: Vec<&str> = axis.split(':').collect();
            if parts.len() != 3 {
                return Err(Failure::usage(format!("--grid axis {i}: expected start:stop:step, got {axis:?}")));
            }
            let mut vals = [0.0; 3];
            for (slot, (name, text)) in vals.iter_mut().zip(["start", "stop", "step"].iter().zip(&parts)) {
                *slot = text
                    .trim()
                    .parse()
                    .map_err(|_| Failure::usage(format!("--grid axis {i}: {name} {text:?} is not a number")))?;
            }
            Ok((vals[0], vals[1], vals[2]))
        })
        .collect()
}

fn sphere_rule(d: usize, nodes: Option<usize>, seed: u64) -> Result<SphereRule, Failure> {
    match nodes {
        None => SphereRule::default_for(d, seed),
        Some(n) => {
            let kind = match d {
                2 => SphereRuleKind::TrapezoidD2,
                3 => SphereRuleKind::GaussProductD3,
                _ => SphereRuleKind::MonteCarlo,
            };
            make_sphere_rule(d, n, kind, seed)
        }
    }
    .map_err(|e| Failure::usage(format!("--nodes: {e}")))
}

fn load_measure(path: &std::path::Path) -> Result<mvstable_core::DiscreteSpectralMeasure, Failure> {
    let file = MeasureFile::read(path)?;
    Ok(file.to_measure(|w| eprintln!("warning: {w}"))?)
}

fn cmd_density(measure: &std::path::Path, route: Route, grid: &str, nodes: Option<usize>, seed: u64, tol: f64) -> Outcome {
    let m = load_measure(measure)?;
    let axes = parse_grid(grid)?;
    if axes.len() != m.dim() {
        return Err(Failure::usage(format!(
            "--grid has {} axes but the measure has dimension {}",
            axes.len(),
            m.dim()
        )));
    }
    let lattice = Lattice::new(axes).map_err(|e| Failure::usage(format!("--grid: {e}")))?;
    let rule = sphere_rule(m.dim(), nodes, seed)?;
    let spec = tolerance(tol)?;
    let rows = density_grid(&lattice, &m, route, &rule, &spec)?;

    let mut out = String::new();
    for i in 1..=m.dim() {
        write!(out, "x{i},").unwrap();
    }
    out.push_str("value,err_est,route\n");
    let mut failed = 0;
    for (x, r) in rows {
        for c in x {
            write!(out, "{},", num(c)).unwrap();
        }
        writeln!(out, "{},{},{}", num(r.value), num(r.err_est), r.route_used).unwrap();
        failed += usize::from(!r.converged);
    }
    let trailing = (failed > 0).then(|| Failure {
        code: 3,
        message: format!("{failed} row(s) did not reach the requested tolerance"),
    });
    Ok((out, trailing))
}

fn cmd_convert(measure: &std::path::Path, to: Representation) -> Outcome {
    let m = load_measure(measure)?;
    if m.alpha() == 1.0 && m.rep() != to {
        eprintln!("note: at alpha = 1 the (A) and (M) shifts coincide; only the tag changes");
    }
    let converted = convert_measure(&m, to)?;
    Ok((MeasureFile::from_measure(&converted).to_json(), None))
}

fn report_text(report: &CheckReport, tol: f64) -> String {
    let failures = report.failures().count();
    let mut out = String::new();
    writeln!(
        out,
        "suite {}: {} cases, {} failed (tol {tol:e})",
        report.suite,
        report.cases.len(),
        failures
    )
    .unwrap();
    out.push_str("worst cases (error / allowed):\n");
    for c in report.worst(5) {
        writeln!(
            out,
            "  {} {}: value {:.16e}, reference {:.16e}, error {:.3e} / {:.3e}",
            if c.passed() { "ok  " } else { "FAIL" },
            c.label,
            c.value,
            c.reference,
            c.error(),
            c.allowed
        )
        .unwrap();
    }
    writeln!(out, "{}", if report.passed() { "PASS" } else { "FAIL" }).unwrap();
    out
}

fn cmd_check(suite: Suite, tol: f64) -> Outcome {
    if !(tol > 0.0) {
        return Err(Failure::usage(format!("--tol must be positive, got {tol}")));
    }
    let report = match suite {
        Suite::Kernel => kernel_suite(tol),
        Suite::Projection => projection_suite(tol),
        Suite::Density => density_suite(tol),
    }?;
    let text = report_text(&report, tol);
    let trailing = (!report.passed()).then(|| Failure {
        code: 1,
        message: format!("{} suite failed", report.suite),
    });
    Ok((text, trailing))
}
