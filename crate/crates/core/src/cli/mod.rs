//! Command-line front end. The `geoquant` binary calls [`main_entry`].
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 for
//! numerical or domain failures.

mod output;

pub use output::{write_records, Field, Format, Record};

use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::dsl::{parse_expression, parse_metric_config, preset, Expr, MetricSpec};
use crate::error::{Error, Result};
use crate::geometry::{christoffel, metric_at, scalar_curvature};
use crate::grid::{
    build_grid, eigen_spectrum, hamiltonian_matrix, inner, norm, Axis, Boundary, Evolver, Grid, Potential,
};
use crate::ordering::{curvature_coefficient, quantum_potential, OrderingRule};
use crate::propagator::convergence_study;
use crate::units::Units;

#[derive(Debug, Parser)]
#[command(name = "geoquant", version, about = "Ordering-dependent quantization on Riemannian charts")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Preset name (e.g. sphere-2:1, flat-polar-2) or path to a metric file.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// weyl, rivier, new, or explicit weights "wW,wR".
    #[arg(long, global = true)]
    pub rule: Option<String>,
    /// Points separated by ';', coordinates by ',' (constant expressions allowed).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub points: Option<String>,
    /// Nodes per axis, e.g. 64x128.
    #[arg(long, global = true)]
    pub grid: Option<String>,
    /// Grid bounds per axis, e.g. "0:pi,0:2*pi".
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, global = true)]
    pub time: Option<f64>,
    /// Slice counts for pathint, comma separated.
    #[arg(long, global = true)]
    pub slices: Option<String>,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub mass: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for randomly drawn points when --points is absent.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Metric determinant, Christoffel symbols and scalar curvature.
    Geometry {
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Quantum potential breakdown per ordering rule.
    Potential {
        #[arg(long, default_value_t = 5)]
        samples: usize,
    },
    /// Curvature coefficients bracket/R in normal coordinates.
    Coefficient {
        #[arg(long, default_value_t = 3)]
        samples: usize,
        /// Finite-difference step for the pulled-back metric.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Lowest eigenvalues of the grid Hamiltonian.
    Spectrum {
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// rule (quantum potential of --rule), dewitt, or none.
        #[arg(long, default_value = "rule")]
        potential: String,
    },
    /// Crank–Nicolson evolution with norm, fidelity and energy reports.
    Evolve {
        /// Initial wavefunction as an expression in x1..xn.
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, default_value_t = 200)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        reports: usize,
        #[arg(long, default_value = "rule")]
        potential: String,
    },
    /// Time-sliced propagators against direct evolution on a periodic line.
    Pathint {
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, default_value_t = 20000)]
        oracle_steps: usize,
    },
}

/// Parses arguments, runs, prints, and maps failures to exit codes.
pub fn main_entry() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        3
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let records = execute(cli)?;
    write_records(out, &records, cli.common.format).map_err(|e| Error::Io {
        path: "<stdout>".into(),
        source: e,
    })
}

/// Runs the command and returns its records.
pub fn execute(cli: &Cli) -> Result<Vec<Record>> {
    let c = &cli.common;
    if !(c.hbar > 0.0 && c.mass > 0.0) {
        return Err(Error::config("--hbar and --mass must be positive"));
    }
    let units = Units::new(c.hbar, c.mass);
    let spec = load_metric(c.metric.as_deref().ok_or_else(|| Error::config("--metric is required"))?)?;
    match &cli.command {
        Command::Geometry { samples } => cmd_geometry(&spec, &points(c, &spec, *samples)?),
        Command::Potential { samples } => cmd_potential(&spec, &rules(c)?, &points(c, &spec, *samples)?, units),
        Command::Coefficient { samples, step } => {
            cmd_coefficient(&spec, &rules(c)?, &points(c, &spec, *samples)?, *step)
        }
        Command::Spectrum { count, potential } => {
            let grid = grid_from(c, &spec, 32, false)?;
            cmd_spectrum(&spec, &grid, &potential_from(potential, c)?, *count, units)
        }
        Command::Evolve {
            psi,
            steps,
            reports,
            potential,
        } => {
            let grid = grid_from(c, &spec, 32, false)?;
            let psi = match psi {
                Some(t) => parse_expression(t, spec.dim())?,
                None => default_packet(&grid)?,
            };
            let pot = potential_from(potential, c)?;
            cmd_evolve(&spec, &grid, &pot, &psi, c.time.unwrap_or(1.0), *steps, *reports, units)
        }
        Command::Pathint { psi, oracle_steps } => {
            let grid = grid_from(c, &spec, 64, true)?;
            let psi = parse_expression(psi.as_deref().unwrap_or("exp(cos(x1 - 1))"), spec.dim())?;
            let slices = match &c.slices {
                Some(s) => parse_list(s)?,
                None => vec![4, 8, 16, 32],
            };
            let rule = OrderingRule::parse(c.rule.as_deref().unwrap_or("new"))?;
            cmd_pathint(&spec, &grid, &rule, &psi, c.time.unwrap_or(0.1), &slices, *oracle_steps, units)
        }
    }
}

/// Preset name or metric file path.
pub fn load_metric(arg: &str) -> Result<MetricSpec> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        return parse_metric_config(&text);
    }
    if arg.ends_with(".toml") || arg.contains('/') || arg.contains('\\') {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: io::Error::new(io::ErrorKind::NotFound, "metric file not found"),
        });
    }
    preset(arg)
}

fn constant(text: &str) -> Result<f64> {
    let e = parse_expression(text.trim(), 0)?;
    e.constant_value()
        .ok_or_else(|| Error::config(format!("'{text}' is not a constant")))
}

fn parse_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("bad integer '{s}' in '{text}'")))
        })
        .collect()
}

fn rules(c: &Common) -> Result<Vec<OrderingRule>> {
    match &c.rule {
        Some(r) => Ok(vec![OrderingRule::parse(r)?]),
        None => Ok(OrderingRule::presets().to_vec()),
    }
}

fn potential_from(kind: &str, c: &Common) -> Result<Potential> {
    match kind {
        "rule" => Ok(Potential::Ordering(OrderingRule::parse(c.rule.as_deref().unwrap_or("new"))?)),
        "dewitt" => Ok(Potential::DeWitt),
        "none" => Ok(Potential::Zero),
        other => Err(Error::config(format!("unknown potential '{other}' (rule, dewitt, none)"))),
    }
}

/// Explicit points, or `samples` random points drawn inside the chart.
fn points(c: &Common, spec: &MetricSpec, samples: usize) -> Result<Vec<Vec<f64>>> {
    let n = spec.dim();
    if let Some(text) = &c.points {
        return text
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|p| {
                let v: Vec<f64> = p.split(',').map(constant).collect::<Result<_>>()?;
                if v.len() != n {
                    return Err(Error::config(format!("point '{p}' has {} coordinates, metric has {n}", v.len())));
                }
                Ok(v)
            })
            .collect();
    }
    let mut rng = StdRng::seed_from_u64(c.seed);
    Ok((0..samples)
        .map(|_| {
            spec.ranges()
                .iter()
                .map(|r| {
                    let (lo, hi) = match (r.lo.is_finite(), r.hi.is_finite()) {
                        (true, true) if r.periodic => (r.lo, r.hi),
                        (true, true) => {
                            let w = r.hi - r.lo;
                            (r.lo + 0.1 * w, r.hi - 0.1 * w)
                        }
                        (true, false) => (r.lo + 0.5, r.lo + 3.0),
                        (false, true) => (r.hi - 3.0, r.hi - 0.5),
                        (false, false) => (-2.0, 2.0),
                    };
                    rng.gen_range(lo..hi)
                })
                .collect()
        })
        .collect())
}

fn grid_error(e: Error) -> Error {
    match e {
        Error::Grid(m) => Error::Config(m),
        other => other,
    }
}

/// Grid from --grid/--range; periodic chart coordinates (or every axis when
/// `periodic`) are periodic axes, other axes get Dirichlet walls, or
/// zero-flux walls where the metric degenerates on the wall (polar axes, poles).
fn grid_from(c: &Common, spec: &MetricSpec, default_points: usize, periodic: bool) -> Result<Grid> {
    let n = spec.dim();
    let sizes: Vec<usize> = match &c.grid {
        Some(g) => g
            .split('x')
            .map(|s| s.trim().parse::<usize>().map_err(|_| Error::config(format!("bad grid '{g}'"))))
            .collect::<Result<_>>()?,
        None => vec![default_points; n],
    };
    if sizes.len() != n {
        return Err(Error::config(format!("--grid gives {} sizes for dimension {n}", sizes.len())));
    }
    let bounds: Vec<Option<(f64, f64)>> = match &c.range {
        Some(r) => {
            let parts: Vec<&str> = r.split(',').collect();
            if parts.len() != n {
                return Err(Error::config(format!("--range gives {} intervals for dimension {n}", parts.len())));
            }
            parts
                .iter()
                .map(|p| {
                    let (a, b) = p
                        .split_once(':')
                        .ok_or_else(|| Error::config(format!("interval '{p}' must be lo:hi")))?;
                    Ok(Some((constant(a)?, constant(b)?)))
                })
                .collect::<Result<_>>()?
        }
        None => vec![None; n],
    };
    let axes = |wall: Boundary| -> Vec<Axis> {
        (0..n)
            .map(|d| {
                let b = if periodic || spec.ranges()[d].periodic { Boundary::Periodic } else { wall };
                Axis {
                    points: sizes[d],
                    bounds: bounds[d],
                    boundary: b,
                }
            })
            .collect()
    };
    match build_grid(spec, &axes(Boundary::Dirichlet)) {
        Err(Error::NotPositiveDefinite { .. }) => build_grid(spec, &axes(Boundary::Neumann)).map_err(grid_error),
        other => other.map_err(grid_error),
    }
}

/// Gaussian centred in the grid box, width a sixth of each side.
fn default_packet(grid: &Grid) -> Result<Expr> {
    let terms: Vec<String> = (0..grid.dim())
        .map(|d| {
            let (lo, hi) = grid.bounds(d);
            let (c, w) = (0.5 * (lo + hi), (hi - lo) / 6.0);
            format!("((x{} - {c:?})/{w:?})^2", d + 1)
        })
        .collect();
    Ok(parse_expression(&format!("exp(-0.5*({}))", terms.join(" + ")), grid.dim())?)
}

pub fn cmd_geometry(spec: &MetricSpec, pts: &[Vec<f64>]) -> Result<Vec<Record>> {
    let n = spec.dim();
    pts.iter()
        .map(|p| {
            let mv = metric_at(spec, p)?;
            let ch = christoffel(spec, p)?;
            let mut r = Record::new().point(p).num("det", mv.det).num("R", scalar_curvature(spec, p)?);
            for k in 0..n {
                for i in 0..n {
                    for j in i..n {
                        r = r.num(&format!("G{}_{}{}", k + 1, i + 1, j + 1), ch.get(k, i, j));
                    }
                }
            }
            Ok(r)
        })
        .collect()
}

pub fn cmd_potential(spec: &MetricSpec, rules: &[OrderingRule], pts: &[Vec<f64>], units: Units) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for p in pts {
        for rule in rules {
            let b = quantum_potential(spec, rule, p, units)?;
            out.push(
                Record::new()
                    .point(p)
                    .text("rule", rule.label.clone())
                    .num("term_div", b.term_div)
                    .num("term_dd", b.term_dd)
                    .num("term_gg", b.term_gg)
                    .num("bracket", b.bracket)
                    .num("V_q", b.v_q),
            );
        }
    }
    Ok(out)
}

/// bracket/R expected at a normal origin: 1/4 per unit Weyl weight, 1/3 per
/// unit Rivier weight.
pub fn reference_coefficient(rule: &OrderingRule) -> f64 {
    rule.w_weyl / 4.0 + rule.w_rivier / 3.0
}

pub fn cmd_coefficient(
    spec: &MetricSpec,
    rules: &[OrderingRule],
    pts: &[Vec<f64>],
    step: Option<f64>,
) -> Result<Vec<Record>> {
    let mut out = Vec::new();
    for p in pts {
        for rule in rules {
            let c = curvature_coefficient(spec, p, rule, step)?;
            let reference = reference_coefficient(rule);
            let r = Record::new()
                .point(p)
                .text("rule", rule.label.clone())
                .num("R", c.scalar_curvature)
                .num("bracket", c.bracket);
            out.push(if c.flagged {
                r.text("status", "R below threshold")
            } else {
                r.num("coefficient", c.value)
                    .num("reference", reference)
                    .num("deviation", c.value - reference)
            });
        }
    }
    Ok(out)
}

pub fn cmd_spectrum(
    spec: &MetricSpec,
    grid: &Grid,
    potential: &Potential,
    count: usize,
    units: Units,
) -> Result<Vec<Record>> {
    let op = hamiltonian_matrix(spec, potential, grid, units)?;
    let ev = eigen_spectrum(&op, count)?;
    Ok(ev
        .iter()
        .enumerate()
        .map(|(i, e)| {
            Record::new()
                .int("index", i as i64)
                .text("potential", potential.label())
                .num("eigenvalue", *e)
        })
        .collect())
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_evolve(
    spec: &MetricSpec,
    grid: &Grid,
    potential: &Potential,
    psi: &Expr,
    t: f64,
    steps: usize,
    reports: usize,
    units: Units,
) -> Result<Vec<Record>> {
    if steps == 0 || reports == 0 || !(t > 0.0) {
        return Err(Error::config("evolve needs --time > 0, --steps ≥ 1 and --reports ≥ 1"));
    }
    let op = hamiltonian_matrix(spec, potential, grid, units)?;
    let w = grid.weights();
    let psi0: Vec<Complex64> = grid.sample(|x| Complex64::new(psi.eval(x), 0.0));
    if psi0.iter().any(|v| !v.re.is_finite()) {
        return Err(Error::Domain {
            node: psi.to_string(),
            reason: "initial wavefunction not finite on the grid",
        });
    }
    let n0 = norm(&w, &psi0);
    if n0 == 0.0 {
        return Err(Error::config("initial wavefunction vanishes on the grid"));
    }
    let dt = t / steps as f64;
    let ev = Evolver::new(&op, dt, units.hbar)?;
    let energy = |p: &[Complex64]| inner(&w, p, &op.apply(p)).re / inner(&w, p, p).re;
    let mut out = Vec::new();
    let mut psi_t = psi0.clone();
    let mut done = 0;
    let record = |step: usize, p: &[Complex64]| {
        let nt = norm(&w, p);
        let overlap = inner(&w, &psi0, p).norm() / (n0 * nt);
        Record::new()
            .int("step", step as i64)
            .num("t", step as f64 * dt)
            .num("norm", nt / n0)
            .num("fidelity", overlap * overlap)
            .num("energy", energy(p))
    };
    out.push(record(0, &psi_t));
    for k in 1..=reports {
        let target = (k * steps) / reports;
        psi_t = ev.run(&psi_t, target - done);
        done = target;
        out.push(record(done, &psi_t));
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_pathint(
    spec: &MetricSpec,
    grid: &Grid,
    rule: &OrderingRule,
    psi: &Expr,
    t: f64,
    slices: &[usize],
    oracle_steps: usize,
    units: Units,
) -> Result<Vec<Record>> {
    if slices.is_empty() || slices.contains(&0) {
        return Err(Error::config("--slices must list positive integers"));
    }
    let mut psi0: Vec<Complex64> = grid.sample(|x| Complex64::new(psi.eval(x), 0.0));
    let n0 = norm(&grid.weights(), &psi0);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::Domain {
            node: psi.to_string(),
            reason: "initial wavefunction not normalizable on the grid",
        });
    }
    psi0.iter_mut().for_each(|v| *v /= n0);
    let report = convergence_study(spec, rule, grid, t, slices, &psi0, oracle_steps, units).map_err(grid_error)?;
    let mut out: Vec<Record> = report
        .slices
        .iter()
        .zip(&report.distances)
        .map(|(n, d)| {
            Record::new()
                .text("rule", rule.label.clone())
                .int("N", *n as i64)
                .num("epsilon", t / *n as f64)
                .num("distance", *d)
        })
        .collect();
    if slices.len() >= 2 {
        out.push(
            Record::new()
                .text("rule", rule.label.clone())
                .num("order", report.order)
                .flag("monotone", report.monotone),
        );
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("geoquant").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn polar_new_potential_record() {
        let r = execute(&cli(&["potential", "--metric", "flat-polar-2", "--rule", "new", "--points", "2.0,0"])).unwrap();
        match r[0].get("V_q") {
            Some(Field::Num(v)) => assert!((v - 1.0 / 32.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_file_is_config_error() {
        let e = execute(&cli(&["geometry", "--metric", "/nonexistent/metric.toml"])).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("/nonexistent/metric.toml"));
    }

    #[test]
    fn explicit_weights_match_preset() {
        let a = execute(&cli(&["potential", "--metric", "sphere-2:1", "--rule", "2,-1", "--points", "1,0.3"])).unwrap();
        let b = execute(&cli(&["potential", "--metric", "sphere-2:1", "--rule", "new", "--points", "1,0.3"])).unwrap();
        assert_eq!(a[0].get("V_q"), b[0].get("V_q"));
    }

    #[test]
    fn random_points_are_seeded() {
        let a = execute(&cli(&["geometry", "--metric", "hyperbolic-2", "--seed", "7"])).unwrap();
        let b = execute(&cli(&["geometry", "--metric", "hyperbolic-2", "--seed", "7"])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }
}
