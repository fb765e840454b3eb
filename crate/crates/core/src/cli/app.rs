//! The `ksreduce` command line.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::Zero;
use serde_json::{json, Value};

use super::format::{format_coeff, format_operator};
use super::parse::{parse_coeff, parse_operator, parse_rational};
use super::report::{rat, Report};
use crate::error::{Error, Result};
use crate::hydrogen::admissible_energies;
use crate::ksfib::{
    descend, fiber_constant_oracle, fiber_pairing_constant, fiber_period, is_in_centralizer, project,
    projectability_witness, pullback, standard_test_pairs, Point4, QuadratureSpec,
};
use crate::opalgebra::{verify_degree_bound, Chart, Coeff};
use crate::spectral::x3_kernel_dimension;
use crate::symmetry::structure_constants;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ChartArg {
    R3,
    R4,
}

impl From<ChartArg> for Chart {
    fn from(c: ChartArg) -> Chart {
        match c {
            ChartArg::R3 => Chart::R3,
            ChartArg::R4 => Chart::R4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ksreduce", version, about = "Operator reduction along the Kustaanheimo-Stiefel fibration")]
struct Cli {
    /// Machine-readable output.
    #[arg(long, global = true)]
    json: bool,
    /// Write the report to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Chart of operator literals (r3: x1 x2 x3 r, r4: y1 y2 y3 y0 R).
    #[arg(long, global = true, value_enum)]
    chart: Option<ChartArg>,
    /// Largest oscillator level for matrix computations.
    #[arg(long, global = true, env = "KSREDUCE_NMAX", default_value_t = 8)]
    nmax: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print [A, B].
    Commutator { a: String, b: String },
    /// Syntactic degree, optionally checked against the commutator characterization.
    Degree {
        op: String,
        #[arg(long, value_name = "K")]
        verify: Option<u32>,
    },
    /// Centralizer and jet tests for a 4D operator.
    CheckProjectable { op: String },
    /// Restriction of a 4D operator to fiber-invariant functions.
    Project { op: String },
    /// Pull a 3D coefficient back to the 4D chart.
    Pullback { f: String },
    /// Push a fiber-invariant 4D coefficient down to the 3D chart.
    Descend { f: String },
    /// Admissible energies and their hydrogen levels.
    Spectrum {
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long = "max-n")]
        max_n: u32,
        /// Also compute exact X3-kernel multiplicities (up to the level cap).
        #[arg(long)]
        verify: bool,
    },
    /// Dimension of the fiber-invariant part of one oscillator level.
    KernelDim {
        #[arg(long)]
        level: u32,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
    /// so(4) closure of the selected generators on one level.
    SymmetryCheck {
        #[arg(long)]
        level: u32,
        #[arg(long, allow_hyphen_values = true)]
        k: String,
    },
    /// Numerical fiber constant of the invariant pairing.
    FiberConstant {
        /// Quadrature nodes per axis.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
}

fn is_usage(e: &Error) -> bool {
    matches!(
        e,
        Error::Parse { .. }
            | Error::UnknownCoordinate { .. }
            | Error::ChartMismatch { .. }
            | Error::InvalidArgument(_)
            | Error::Unsupported(_)
    )
}

/// Parse `args`, run the command and write the report. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let report = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return if is_usage(&e) { EXIT_USAGE } else { EXIT_VERIFICATION };
        }
    };
    let text = if cli.json {
        serde_json::to_string_pretty(&report.to_json()).expect("report serializes") + "\n"
    } else {
        report.to_text()
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => print!("{text}"),
    }
    if report.passed() {
        EXIT_OK
    } else {
        EXIT_VERIFICATION
    }
}

fn require_chart(cli: &Cli, expected: Chart) -> Result<Chart> {
    match cli.chart.map(Chart::from) {
        Some(c) if c != expected => Err(Error::ChartMismatch { left: expected, right: c }),
        _ => Ok(expected),
    }
}

fn cap(cli: &Cli, level: u32) -> Result<()> {
    if level > cli.nmax {
        return Err(Error::InvalidArgument(format!("level {level} exceeds the cap KSREDUCE_NMAX={}", cli.nmax)));
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<Report> {
    let chart = cli.chart.map(Chart::from).unwrap_or(Chart::R4);
    match &cli.command {
        Command::Commutator { a, b } => {
            let c = parse_operator(a, chart)?.commutator(&parse_operator(b, chart)?)?;
            let text = format_operator(&c);
            let mut r = Report::new("commutator").input("a", a.as_str()).input("b", b.as_str()).input("chart", chart.name());
            r.result = json!({ "commutator": text });
            r.line(text);
            Ok(r)
        }
        Command::Degree { op, verify } => {
            let d = parse_operator(op, chart)?;
            let mut r = Report::new("degree").input("op", op.as_str()).input("chart", chart.name());
            r.line(format!("degree {}", d.degree()));
            let mut result = json!({ "degree": d.degree() });
            if let Some(k) = verify {
                let probes: Vec<Coeff> = (0..chart.dim()).map(|i| Coeff::coord(chart, i)).collect();
                let holds = verify_degree_bound(&d, *k, &probes)?;
                result["bound_holds"] = json!(holds);
                r = r.input("verify", *k);
                r.verdict(&format!("degree bound {k}"), holds, None);
            }
            r.result = result;
            Ok(r)
        }
        Command::CheckProjectable { op } => {
            let chart = require_chart(cli, Chart::R4)?;
            let d = parse_operator(op, chart)?;
            let centralizer = is_in_centralizer(&d)?;
            let witness = projectability_witness(&d)?;
            let mut r = Report::new("check-projectable").input("op", op.as_str());
            r.line(format!("commutes with X3: {}", if centralizer { "yes" } else { "no" }));
            r.line(format!("projectable: {}", if witness.is_none() { "yes" } else { "no" }));
            r.result = json!({
                "centralizer": centralizer,
                "projectable": witness.is_none(),
                "witness": witness.as_ref().map(|(p, res)| json!({"probe": format_coeff(p), "residual": format_coeff(res)})),
            });
            let detail = witness.map(|(p, res)| format!("X3 of the image of {} is {}", format_coeff(&p), format_coeff(&res)));
            r.verdict("projectable", detail.is_none(), detail);
            Ok(r)
        }
        Command::Project { op } => {
            let chart = require_chart(cli, Chart::R4)?;
            let d = parse_operator(op, chart)?;
            let mut r = Report::new("project").input("op", op.as_str());
            match project(&d) {
                Ok(p) => {
                    let text = format_operator(&p);
                    r.result = json!({ "projected": text });
                    r.line(text);
                    r.verdict("projectable", true, None);
                }
                Err(Error::NotProjectable { probe, residual }) => {
                    r.result = json!({ "witness": {"probe": probe, "residual": residual} });
                    r.verdict("projectable", false, Some(format!("X3 of the image of {probe} is {residual}")));
                }
                Err(e) => return Err(e),
            }
            Ok(r)
        }
        Command::Pullback { f } => {
            let chart = require_chart(cli, Chart::R3)?;
            let c = pullback(&parse_coeff(f, chart)?)?;
            let text = format_coeff(&c);
            let mut r = Report::new("pullback").input("f", f.as_str());
            r.result = json!({ "pullback": text });
            r.line(text);
            Ok(r)
        }
        Command::Descend { f } => {
            let chart = require_chart(cli, Chart::R4)?;
            let c = parse_coeff(f, chart)?;
            let mut r = Report::new("descend").input("f", f.as_str());
            match descend(&c) {
                Ok(d) => {
                    let text = format_coeff(&d);
                    r.result = json!({ "descended": text });
                    r.line(text);
                    r.verdict("descends", true, None);
                }
                Err(e @ (Error::NotFiberInvariant { .. } | Error::NotDescendable(_))) => {
                    r.result = json!({ "error": e.to_string() });
                    r.verdict("descends", false, Some(e.to_string()));
                }
                Err(e) => return Err(e),
            }
            Ok(r)
        }
        Command::Spectrum { k, max_n, verify } => {
            let kq = parse_rational(k)?;
            let mut table = admissible_energies(&kq, *max_n)?;
            if *verify {
                table.verify_kernel_dims(cli.nmax.min(*max_n))?;
            }
            let mut r = Report::new("spectrum").input("k", rat(&kq)).input("max_n", *max_n).input("verify", *verify);
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|row| {
                    json!({
                        "n": row.n,
                        "energy": rat(&row.energy),
                        "omega": rat(&row.omega),
                        "projectable": row.projectable,
                        "hydrogen_level": row.hydrogen_level.as_ref().map(|(m, e)| json!({"m": m, "energy": rat(e)})),
                        "kernel_dim": row.kernel_dim,
                    })
                })
                .collect();
            for row in &table.rows {
                let mut l = format!(
                    "N={:<3} E={:<10} w={:<8} {}",
                    row.n,
                    super::format::format_rational(&row.energy),
                    super::format::format_rational(&row.omega),
                    if row.projectable { "proj" } else { "not" }
                );
                if let Some((m, _)) = row.hydrogen_level {
                    l.push_str(&format!(" m={m}"));
                }
                if let Some(d) = row.kernel_dim {
                    l.push_str(&format!(" dim={d}"));
                }
                r.line(l.trim_end().to_string());
            }
            r.result = json!({ "rows": rows });
            if *verify {
                r.verdict("multiplicities (m+1)^2", table.kernel_dims_match_hydrogen(), None);
            }
            Ok(r)
        }
        Command::KernelDim { level, k } => {
            cap(cli, *level)?;
            let kq = parse_rational(k)?;
            let dim = x3_kernel_dimension(*level, &kq)?;
            let expected = if level % 2 == 0 { ((level / 2 + 1) * (level / 2 + 1)) as usize } else { 0 };
            let mut r = Report::new("kernel-dim").input("level", *level).input("k", rat(&kq));
            r.result = json!({ "dimension": dim, "hydrogen_degeneracy": expected });
            r.line(dim.to_string());
            r.verdict("matches hydrogen degeneracy", dim == expected, Some(format!("expected {expected}")));
            Ok(r)
        }
        Command::SymmetryCheck { level, k } => {
            cap(cli, *level)?;
            let kq = parse_rational(k)?;
            let rep = structure_constants(*level, &kq)?;
            let mut r = Report::new("symmetry-check").input("level", *level).input("k", rat(&kq));
            let names = ["L1", "L2", "L3", "D1", "D2", "D3"];
            let mut brackets = Vec::new();
            for i in 0..6 {
                for j in i + 1..6 {
                    let terms: Vec<String> = (0..6)
                        .filter(|&kk| !rep.constants[i][j][kk].is_zero())
                        .map(|kk| format!("{} {}", super::format::format_rational(&rep.constants[i][j][kk]), names[kk]))
                        .collect();
                    let rhs = if terms.is_empty() { "0".to_string() } else { terms.join(" + ") };
                    r.line(format!("[{}, {}] = {}", names[i], names[j], rhs));
                    let coeffs: Vec<Value> = rep.constants[i][j].iter().map(rat).collect();
                    brackets.push(json!({"left": names[i], "right": names[j], "coefficients": coeffs}));
                }
            }
            let opt = |c: &Option<crate::opalgebra::Q>| c.as_ref().map(rat);
            r.result = json!({
                "dimension": rep.dimension,
                "omega": rat(&rep.omega),
                "energy": rat(&rep.energy),
                "rank": rep.rank,
                "brackets": brackets,
                "max_residual": rat(&rep.max_residual),
                "ll": opt(&rep.ll.constant),
                "ld": opt(&rep.ld.constant),
                "dd": opt(&rep.dd.constant),
                "dd_ratio": opt(&rep.dd_ratio()),
            });
            r.line(format!("eigenspace dimension {} at E={}", rep.dimension, super::format::format_rational(&rep.energy)));
            if let Some(lambda) = rep.dd_ratio() {
                r.line(format!("[D,D]/[L,L] ratio {}", super::format::format_rational(&lambda)));
            }
            r.verdict("commutes with H_osc", rep.commutes_with_hamiltonian, None);
            r.verdict("closes in the span", rep.closes(), Some(format!("residual {}", rep.max_residual)));
            r.verdict("epsilon structure constants", rep.epsilon_pattern(), None);
            Ok(r)
        }
        Command::FiberConstant { samples } => {
            let spec = QuadratureSpec { nodes: *samples, ..QuadratureSpec::default() };
            let mut values = Vec::new();
            let mut pairs_json = Vec::new();
            for (f, g) in standard_test_pairs() {
                let c = fiber_pairing_constant(&f, &g, &spec)?;
                pairs_json.push(json!({"f": format_coeff(&f), "g": format_coeff(&g), "constant": c}));
                values.push(c);
            }
            let p = Point4([0.3, -0.7, 0.5, 1.1]);
            let oracle = fiber_constant_oracle(p, 4096)?;
            let period = fiber_period(p, 4096)?;
            let spread = pairwise_spread(&values);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let mut r = Report::new("fiber-constant").input("samples", *samples);
            r.exact = false;
            for v in &pairs_json {
                r.line(format!("<{}, {}>: c = {:.12}", v["f"].as_str().unwrap_or(""), v["g"].as_str().unwrap_or(""), v["constant"]));
            }
            r.line(format!("mean c = {mean:.12}"));
            r.line(format!("fiber oracle = {oracle:.12}, fiber period = {period:.12}"));
            r.result = json!({
                "pairs": pairs_json,
                "mean": mean,
                "max_pairwise_relative_difference": spread,
                "fiber_oracle": oracle,
                "fiber_period": period,
            });
            r.verdict("pairwise agreement 1e-4", spread <= 1e-4, Some(format!("max relative difference {spread:.3e}")));
            let rel = ((mean - oracle) / oracle).abs();
            r.verdict("matches fiber oracle 1e-3", rel <= 1e-3, Some(format!("relative difference {rel:.3e}")));
            Ok(r)
        }
    }
}

/// Largest relative difference over all pairs of values.
pub fn pairwise_spread(values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max(((a - b) / a.abs().max(b.abs())).abs());
        }
    }
    worst
}
