//! The `glasscert` command-line tool.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input or contract
//! violation, 3 a cycle violates a hypothesis of the return-map theorem.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::graph::{
    build_graph, cycle_id, cycle_properties, export_dot, find_deterministic_cycles, Cycle, CycleProperties, WallClass,
};
use crate::model::{parse_network, DomainIndex, Network, ValidationReport};
use crate::return_map::{certify, ReturnMapAnalysis};
use crate::simulate::{events_json, run, sample, write_csv, TerminalReason, DEFAULT_MAX_EVENTS};
use crate::tolerances::Tolerances;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ASSUMPTION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "glasscert",
    version,
    about = "Limit-cycle certification for piecewise-affine gene networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Dot,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check genericity and box invariance of a model.
    Validate {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: ReportFormat,
    },
    /// Print the transition graph.
    Graph {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: GraphFormat,
        /// Cycle id or comma-separated domain list to draw in bold.
        #[arg(long)]
        highlight: Option<String>,
    },
    /// Decide the fate of trajectories following one deterministic cycle.
    Certify {
        model: PathBuf,
        /// Cycle id or comma-separated domain list; optional when the model
        /// has a single deterministic cycle.
        #[arg(long)]
        cycle: Option<String>,
        /// Fixed-point tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Exact event-driven simulation with CSV sampling.
    Simulate {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        x0: Vec<f64>,
        #[arg(long)]
        t_max: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Events JSON destination.
        #[arg(long)]
        events: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_EVENTS)]
        max_events: usize,
    },
    /// Full report: validation, graph, cycles and their certification.
    Analyze {
        model: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
    },
}

/// Failure carrying its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            Error::AssumptionViolated(_) => EXIT_ASSUMPTION,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Serialize)]
pub struct ValidationSummary {
    pub ok: bool,
    pub domains: usize,
    pub issues: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    /// Wall counts keyed by `transparent`, `black`, `white`.
    pub walls: BTreeMap<String, usize>,
    pub interior_equilibria: Vec<DomainIndex>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub id: String,
    pub domains: Vec<DomainIndex>,
    pub properties: CycleProperties,
    pub analysis: Option<ReturnMapAnalysis>,
    /// Why `analysis` is absent.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub model_digest: String,
    pub tolerances: Tolerances,
    pub validation: ValidationSummary,
    pub graph: GraphStats,
    pub cycles: Vec<CycleReport>,
}

/// Hex SHA-256 of a model file's text, as reported in analysis output.
pub fn model_digest(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

struct Loaded {
    net: Network,
    digest: String,
}

fn load(path: &Path) -> CliResult<Loaded> {
    let text = fs::read_to_string(path).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot read {}: {e}", path.display()),
    })?;
    let digest = model_digest(&text);
    Ok(Loaded {
        net: parse_network(&text)?,
        digest,
    })
}

fn tolerances(fixed_point: Option<f64>) -> CliResult<Tolerances> {
    let mut tol = Tolerances::from_env()?;
    if let Some(v) = fixed_point {
        if !(v.is_finite() && v > 0.0) {
            return Err(CliError::input(format!("--tol must be positive, got {v}")));
        }
        tol.fixed_point = v;
    }
    Ok(tol)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Finds a cycle by id or by a comma-separated domain list in any rotation.
pub fn resolve_cycle<'a>(cycles: &'a [Cycle], key: &str) -> CliResult<&'a Cycle> {
    let key = key.trim();
    let by_id = cycles.iter().find(|c| c.id == key);
    if let Some(c) = by_id {
        return Ok(c);
    }
    if key.contains(',') {
        let mut domains: Vec<DomainIndex> = key
            .split(',')
            .map(|s| s.trim().parse::<DomainIndex>())
            .collect::<crate::Result<_>>()
            .map_err(CliError::from)?;
        if let Some(min) = (0..domains.len()).min_by_key(|&i| &domains[i]) {
            domains.rotate_left(min);
        }
        let id = cycle_id(&domains);
        if let Some(c) = cycles.iter().find(|c| c.id == id) {
            return Ok(c);
        }
    }
    Err(CliError::input(format!("unknown cycle {key:?}")))
}

fn validation_text(report: &ValidationReport) -> String {
    let mut out = format!(
        "{}: {} domains checked\n",
        if report.ok { "ok" } else { "invalid" },
        report.domains.len()
    );
    for issue in &report.issues {
        out.push_str(&format!("  {issue}\n"));
    }
    out
}

fn graph_stats(net: &Network) -> GraphStats {
    let g = build_graph(net);
    let mut walls = BTreeMap::new();
    for w in &g.walls {
        let key = match w.class {
            WallClass::Transparent { .. } => "transparent",
            WallClass::Black => "black",
            WallClass::White => "white",
        };
        *walls.entry(key.to_string()).or_insert(0) += 1;
    }
    GraphStats {
        nodes: g.nodes.len(),
        edges: g.edges.len(),
        walls,
        interior_equilibria: g.interior_equilibria.clone(),
    }
}

fn cycle_report(net: &Network, c: &Cycle, tol: &Tolerances) -> CycleReport {
    let (analysis, error) = match certify(net, c, tol) {
        Ok(a) => (Some(a), None),
        Err(e) => (None, Some(e.to_string())),
    };
    CycleReport {
        id: c.id.clone(),
        domains: c.domains.clone(),
        properties: cycle_properties(net, c, tol),
        analysis,
        error,
    }
}

/// Builds the full report; cycles are certified concurrently.
pub fn analyze(net: &Network, digest: &str, tol: &Tolerances) -> AnalysisReport {
    let validation = net.validate(tol);
    let cycles = find_deterministic_cycles(&build_graph(net));
    let reports: Vec<CycleReport> = cycles.par_iter().map(|c| cycle_report(net, c, tol)).collect();
    AnalysisReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        model_digest: digest.to_string(),
        tolerances: *tol,
        validation: ValidationSummary {
            ok: validation.ok,
            domains: validation.domains.len(),
            issues: validation.issues,
        },
        graph: graph_stats(net),
        cycles: reports,
    }
}

#[derive(Serialize)]
struct CertifyOutput<'a> {
    tool_version: &'a str,
    model_digest: &'a str,
    cycle: &'a str,
    domains: &'a [DomainIndex],
    properties: CycleProperties,
    analysis: ReturnMapAnalysis,
}

#[derive(Serialize)]
struct SimulateSummary {
    terminal: TerminalReason,
    t_end: f64,
    events: usize,
    samples: usize,
    final_domain: Option<DomainIndex>,
    final_state: Vec<f64>,
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError {
        code: EXIT_IO,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> CliResult<i32> {
    let io = |e: std::io::Error| CliError {
        code: EXIT_IO,
        message: e.to_string(),
    };
    match cmd {
        Command::Validate { model, format } => {
            let loaded = load(&model)?;
            let report = loaded.net.validate(&tolerances(None)?);
            let text = match format {
                ReportFormat::Json => to_json(&report),
                ReportFormat::Text => validation_text(&report),
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
            Ok(if report.ok { EXIT_OK } else { EXIT_INPUT })
        }
        Command::Graph {
            model,
            format,
            highlight,
        } => {
            let loaded = load(&model)?;
            let g = build_graph(&loaded.net);
            let cycles = find_deterministic_cycles(&g);
            let chosen = highlight.as_deref().map(|k| resolve_cycle(&cycles, k)).transpose()?;
            let text = match format {
                GraphFormat::Dot => export_dot(&g, chosen),
                GraphFormat::Json => {
                    #[derive(Serialize)]
                    struct GraphJson<'a> {
                        graph: &'a crate::graph::TransitionGraph,
                        cycles: &'a [Cycle],
                        highlight: Option<&'a str>,
                    }
                    to_json(&GraphJson {
                        graph: &g,
                        cycles: &cycles,
                        highlight: chosen.map(|c| c.id.as_str()),
                    })
                }
            };
            stdout.write_all(text.as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Certify { model, cycle, tol } => {
            let loaded = load(&model)?;
            let tol = tolerances(tol)?;
            let cycles = find_deterministic_cycles(&build_graph(&loaded.net));
            let c = match cycle.as_deref() {
                Some(key) => resolve_cycle(&cycles, key)?,
                None => match cycles.as_slice() {
                    [only] => only,
                    [] => return Err(CliError::input("model has no deterministic cycle")),
                    _ => {
                        let ids: Vec<&str> = cycles.iter().map(|c| c.id.as_str()).collect();
                        return Err(CliError::input(format!(
                            "model has {} deterministic cycles, choose one with --cycle: {}",
                            cycles.len(),
                            ids.join(", ")
                        )));
                    }
                },
            };
            let analysis = certify(&loaded.net, c, &tol)?;
            let out = CertifyOutput {
                tool_version: env!("CARGO_PKG_VERSION"),
                model_digest: &loaded.digest,
                cycle: &c.id,
                domains: &c.domains,
                properties: cycle_properties(&loaded.net, c, &tol),
                analysis,
            };
            stdout.write_all(to_json(&out).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
        Command::Simulate {
            model,
            x0,
            t_max,
            dt,
            out,
            events,
            max_events,
        } => {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(CliError::input(format!("--dt must be positive, got {dt}")));
            }
            let loaded = load(&model)?;
            let tol = tolerances(None)?;
            let traj = run(&loaded.net, &x0, t_max, max_events, &tol)?;
            let samples = sample(&traj, &loaded.net, dt);
            let mut csv = Vec::new();
            write_csv(&samples, &mut csv).map_err(io)?;
            if let Some(path) = &events {
                let mut text = events_json(&traj);
                text.push('\n');
                write_file(path, text.as_bytes())?;
            }
            match &out {
                Some(path) => {
                    write_file(path, &csv)?;
                    let summary = SimulateSummary {
                        terminal: traj.terminal,
                        t_end: traj.t_end,
                        events: traj.events.len(),
                        samples: samples.len(),
                        final_domain: loaded.net.domain_of(&traj.final_state, &tol).ok(),
                        final_state: traj.final_state.clone(),
                    };
                    stdout.write_all(to_json(&summary).as_bytes()).map_err(io)?;
                }
                None => stdout.write_all(&csv).map_err(io)?,
            }
            Ok(EXIT_OK)
        }
        Command::Analyze { model, tol } => {
            let loaded = load(&model)?;
            let tol = tolerances(tol)?;
            let report = analyze(&loaded.net, &loaded.digest, &tol);
            stdout.write_all(to_json(&report).as_bytes()).map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(rendered.as_bytes());
            } else {
                let _ = stdout.write_all(rendered.as_bytes());
            }
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}
