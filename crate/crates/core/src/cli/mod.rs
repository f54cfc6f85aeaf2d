//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 input-file error, 3 SLO violation.

pub mod config;
pub mod files;
pub mod presets;

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::geom::{PhysicalConstants, ShellParams};
use crate::orbitsim::{self, SimConfig};
use crate::wplace::{self, Placement, SloSpec};
use config::Config;
use files::{PlacementFile, SeriesWriter};

#[derive(Debug, Parser)]
#[command(
    name = "leoplace",
    version,
    about = "Resource placement on LEO satellite shells"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in shells.
    Shells,
    /// Compute a placement for a shell and SLO.
    Place(PlaceArgs),
    /// Simulate the distance from every satellite to its assigned resource.
    Simulate(SimulateArgs),
    /// Check a simulated series against an SLO.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    /// Built-in shell name (see `shells`).
    #[arg(long, required_unless_present = "config")]
    pub shell: Option<String>,
    /// key = value file; its keys override the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `hops:<n>`, `max:<v>ms|km` or `mean:<v>ms|km`.
    #[arg(long)]
    pub slo: String,
    #[arg(long, short)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub placement: PathBuf,
    /// Aggregate CSV output.
    #[arg(long, short)]
    pub out: PathBuf,
    /// Also write per-satellite distances to this CSV.
    #[arg(long)]
    pub per_node: Option<PathBuf>,
    /// Seconds; defaults to one orbital period.
    #[arg(long)]
    pub duration: Option<f64>,
    /// Seconds between samples; defaults to 10.
    #[arg(long)]
    pub step: Option<f64>,
    /// One day at one-second steps.
    #[arg(long, conflicts_with_all = ["duration", "step"])]
    pub full_day: bool,
    /// Reads `sim.duration_s` and `sim.step_s`; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Aggregate CSV from `simulate`.
    #[arg(long)]
    pub csv: PathBuf,
    /// Per-node CSV; required for mean SLOs.
    #[arg(long)]
    pub per_node: Option<PathBuf>,
    #[arg(long)]
    pub slo: String,
    /// Slack added to the bound, e.g. a placement's epsilon bound.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance_km: f64,
}

/// A failed command and its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Usage(String),
    Input(String),
    Violation(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Violation(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Violation(m) => m,
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let stdout = std::io::stdout();
    match run(cli.command, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("leoplace: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> CmdResult {
    match command {
        Command::Shells => shells(out),
        Command::Place(a) => place(&a, out),
        Command::Simulate(a) => simulate(&a, out),
        Command::Verify(a) => verify(&a, out),
    }
}

fn emit(out: &mut dyn Write, line: std::fmt::Arguments) -> CmdResult {
    writeln!(out, "{line}").map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

fn shells(out: &mut dyn Write) -> CmdResult {
    emit(
        out,
        format_args!("name\tplanes\tsats_per_plane\taltitude_km\tinclination_deg"),
    )?;
    for p in &presets::PRESETS {
        let s = p.params;
        emit(
            out,
            format_args!(
                "{}\t{}\t{}\t{}\t{}",
                p.name, s.planes, s.sats_per_plane, s.altitude_km, s.inclination_deg
            ),
        )?;
    }
    Ok(())
}

fn resolve_shell(
    name: Option<&str>,
    config: Option<&Path>,
) -> Result<(ShellParams, PhysicalConstants), Failure> {
    let base = match name {
        Some(n) => Some(
            presets::find(n)
                .ok_or_else(|| {
                    let known: Vec<_> = presets::PRESETS.iter().map(|p| p.name).collect();
                    Failure::Usage(format!(
                        "unknown shell '{n}', expected one of {}",
                        known.join(", ")
                    ))
                })?
                .params,
        ),
        None => None,
    };
    let cfg = match config {
        Some(path) => Config::load(path).map_err(Failure::Input)?,
        None => Config::default(),
    };
    let shell = cfg.shell(base).map_err(Failure::Input)?;
    let consts = cfg.constants().map_err(Failure::Input)?;
    Ok((shell, consts))
}

fn parse_slo(s: &str) -> Result<SloSpec, Failure> {
    s.parse()
        .map_err(|e: crate::Error| Failure::Usage(e.to_string()))
}

fn place(a: &PlaceArgs, out: &mut dyn Write) -> CmdResult {
    let slo = parse_slo(&a.slo)?;
    let (shell, consts) = resolve_shell(a.shell.as_deref(), a.config.as_deref())?;
    let placement = wplace::placement_for_slo(&shell, &slo, &consts)
        .map_err(|e| Failure::Usage(format!("cannot place for {slo}: {e}")))?;
    let file = PlacementFile::new(&shell, &consts, &slo, &placement);
    file.write(&a.out).map_err(Failure::Input)?;

    emit(out, format_args!("resources: {}", placement.len()))?;
    emit(
        out,
        format_args!("epsilon_bound_km: {}", placement.epsilon_bound_km()),
    )?;
    if let Placement::Weighted(w) = &placement {
        emit(
            out,
            format_args!("max_assigned_km: {}", w.max_distance_km()),
        )?;
    }
    Ok(())
}

fn simulate(a: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let file = PlacementFile::read(&a.placement).map_err(Failure::Input)?;
    let assignment = file.assignment().map_err(Failure::Input)?;
    let cfg = match &a.config {
        Some(path) => Config::load(path).map_err(Failure::Input)?,
        None => Config::default(),
    };
    let mut sim = if a.full_day {
        SimConfig::full_day()
    } else {
        SimConfig::one_period(&file.shell, &file.constants)
    };
    if !a.full_day {
        if let Some(d) = a.duration.or(cfg.duration_s) {
            sim.duration_s = d;
        }
        if let Some(s) = a.step.or(cfg.step_s) {
            sim.step_s = s;
        }
    }
    sim.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let per_node = a.per_node.as_deref().map(|p| (p, assignment.dims()));
    let mut writer = SeriesWriter::create(&a.out, per_node).map_err(Failure::Input)?;
    let mut write_err = None;
    orbitsim::simulate(&file.shell, &file.constants, &assignment, &sim, |s| {
        if write_err.is_none() {
            write_err = writer.push(&s).err();
        }
    })
    .map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(e) = write_err {
        return Err(Failure::Input(e));
    }
    let rows = writer.finish().map_err(Failure::Input)?;
    emit(out, format_args!("rows: {rows}"))
}

fn verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let slo = parse_slo(&a.slo)?;
    if !(a.tolerance_km.is_finite() && a.tolerance_km >= 0.0) {
        return Err(Failure::Usage(format!(
            "tolerance must be a non-negative distance, got {}",
            a.tolerance_km
        )));
    }
    // Verification uses the default speed of light for ms bounds.
    let consts = PhysicalConstants::default();
    let bound = slo
        .bound_km(&consts)
        .map_err(|e| Failure::Usage(e.to_string()))?
        .ok_or_else(|| {
            Failure::Usage(format!(
                "{slo} is a hop target; verify checks distance SLOs (max:/mean:)"
            ))
        })?;
    let aggregate = files::read_aggregate(&a.csv).map_err(Failure::Input)?;

    let worst = match slo {
        SloSpec::MaxDistance(_) => aggregate.iter().map(|r| r.max_km).fold(0.0, f64::max),
        SloSpec::MeanDistance(_) => {
            let path = a.per_node.as_deref().ok_or_else(|| {
                Failure::Input(format!(
                    "{slo} needs per-node distances; pass --per-node with the file from simulate --per-node"
                ))
            })?;
            worst_node_mean(&files::read_per_node(path).map_err(Failure::Input)?)
        }
        SloSpec::Hops(_) => unreachable!("hop SLOs have no distance bound"),
    };

    let limit = bound + a.tolerance_km;
    let margin = limit - worst;
    emit(out, format_args!("slo: {slo}"))?;
    emit(out, format_args!("bound_km: {bound}"))?;
    emit(out, format_args!("tolerance_km: {}", a.tolerance_km))?;
    emit(out, format_args!("worst_km: {worst}"))?;
    emit(
        out,
        format_args!("exceedance_km: {}", (worst - bound).max(0.0)),
    )?;
    emit(out, format_args!("margin_km: {margin}"))?;
    if margin >= 0.0 {
        emit(out, format_args!("verdict: adherent"))
    } else {
        emit(out, format_args!("verdict: violated"))?;
        Err(Failure::Violation(format!(
            "{slo} violated: worst {worst} km exceeds {limit} km"
        )))
    }
}

/// Largest time-averaged distance of any node.
fn worst_node_mean(rows: &[files::NodeRow]) -> f64 {
    let mut acc: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
    for r in rows {
        let e = acc.entry((r.plane, r.slot)).or_insert((0.0, 0));
        e.0 += r.distance_km;
        e.1 += 1;
    }
    acc.values()
        .map(|(sum, n)| sum / *n as f64)
        .fold(0.0, f64::max)
}
