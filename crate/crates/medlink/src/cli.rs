//! The `medlink` command line.

use std::ffi::OsString;
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use medlink_core::linksim::{DropReason, PathSampleSet};
use medlink_core::model::{set_parameter, Mode, PathSpec, Profiles, Scenario};
use medlink_core::pathcomposer::{
    analytic_breakdowns, analytic_path_delay, compare, simulate_replication, summarize, sweep,
    ContentionMode, PathDelayReport, DEFAULT_THRESHOLD,
};
use medlink_core::Error;
use rayon::prelude::*;

use crate::report::{self, Format};
use crate::scenario_file::{check, parse_parameter, LoadError};
use crate::sources::{base_profiles, read_scenario, SourceError};

#[derive(Debug, Parser)]
#[command(
    name = "medlink",
    version,
    about = "Delay analysis and simulation of multi-hop body-area-network paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the technology profiles (built-in and from MEDLINK_PROFILE_DIR).
    Profiles(OutputArgs),
    /// Per-link and end-to-end analytic delay.
    Analyze(RunArgs),
    /// Seeded discrete-event simulation, one row per delivered packet.
    Simulate(RunArgs),
    /// Analytic delay against simulated statistics.
    Compare(RunArgs),
    /// Evaluate the scenario over a list of parameter values.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Simulate,
    Compare,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ContentionArg {
    #[value(name = "expected_backoff")]
    ExpectedBackoff,
    #[value(name = "literal_eq11")]
    LiteralEq11,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Scenario file, or `builtin:path1`, `builtin:path2`, `builtin:path3`.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Packets offered per device.
    #[arg(long)]
    packets: Option<u32>,
    #[arg(long)]
    replications: Option<u32>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long = "contention-mode", value_enum, default_value = "expected_backoff")]
    contention_mode: ContentionArg,
    /// Override a scenario parameter, e.g. `traffic.payload=60B`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Dotted parameter name, e.g. `traffic.payload`.
    #[arg(long)]
    param: String,
    /// Comma-separated values, in the parameter's units.
    #[arg(long, allow_hyphen_values = true)]
    values: String,
}

/// A failure reported as `code: message` lines with an exit status.
#[derive(Debug)]
pub struct CliError {
    pub lines: Vec<String>,
    pub exit: u8,
}

impl CliError {
    fn usage(code: &str, message: impl std::fmt::Display) -> Self {
        CliError {
            lines: vec![format!("{code}: {message}")],
            exit: 1,
        }
    }

    fn internal(code: &str, message: impl std::fmt::Display) -> Self {
        CliError {
            lines: vec![format!("{code}: {message}")],
            exit: 2,
        }
    }
}

impl From<SourceError> for CliError {
    fn from(e: SourceError) -> Self {
        CliError {
            lines: e.lines(),
            exit: 1,
        }
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError {
            lines: e.lines(),
            exit: 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Invalid(v) => {
                return CliError {
                    lines: v.iter().map(ToString::to_string).collect(),
                    exit: 1,
                }
            }
            Error::WrongKind { .. } => return CliError::internal("profile.wrong_kind", &e),
            Error::ShapeMismatch { .. } => return CliError::internal("compare.shape_mismatch", &e),
            Error::UnsupportedBe { .. } => "contention.literal.unsupported_be",
            Error::DegenerateLiteral { .. } => "contention.literal.degenerate",
            Error::IntractableEnumeration { .. } => "contention.enumeration.intractable",
            Error::EmptySamples => "stats.empty",
            Error::UnknownParameter(_) => "parameter.unknown",
            Error::TypeMismatch { .. } => "parameter.type_mismatch",
            Error::UnknownProfile(_) => "link.profile.unknown",
        };
        CliError::usage(code, e)
    }
}

/// Run the command line `args` (program name first). Returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return 0;
            }
            let rendered = e.render().to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "usage.invalid: {}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    let result = catch_unwind(AssertUnwindSafe(|| execute(&cli)))
        .unwrap_or_else(|_| Err(CliError::internal("internal.panic", "unexpected internal failure")));
    let output = match &cli.command {
        Command::Profiles(o) => o,
        Command::Analyze(r) | Command::Simulate(r) | Command::Compare(r) => &r.output,
        Command::Sweep(s) => &s.run.output,
    };
    let text = match result {
        Ok(text) => text,
        Err(e) => {
            for line in e.lines {
                let _ = writeln!(stderr, "{line}");
            }
            return e.exit;
        }
    };
    let written = match &output.out {
        Some(path) => std::fs::write(path, &text)
            .map_err(|err| CliError::internal("io.write", format!("cannot write {}: {err}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|err| CliError::internal("io.write", err)),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            for line in e.lines {
                let _ = writeln!(stderr, "{line}");
            }
            e.exit
        }
    }
}

fn execute(cli: &Cli) -> Result<String, CliError> {
    let base = base_profiles()?;
    match &cli.command {
        Command::Profiles(o) => Ok(report::profiles(&base, o.format)),
        Command::Analyze(r) => {
            let s = prepare(r, &base)?;
            analyze(&s, &base, r)
        }
        Command::Simulate(r) => {
            let s = prepare(r, &base)?;
            simulate(&s, &base, r)
        }
        Command::Compare(r) => {
            let s = prepare(r, &base)?;
            compare_paths(&s, &base, r)
        }
        Command::Sweep(a) => {
            let s = prepare(&a.run, &base)?;
            let values = a
                .values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| parse_parameter(&a.param, v))
                .collect::<Result<Vec<_>, _>>()?;
            let mode = contention_mode(a.run.contention_mode);
            let rows = sweep(&s, &base, &a.param, &values, mode)?;
            let out = report::SweepOutput {
                parameter: a.param.clone(),
                contention_mode: mode.as_str(),
                rows,
            };
            Ok(report::sweep(&out, a.run.output.format))
        }
    }
}

fn contention_mode(arg: ContentionArg) -> ContentionMode {
    match arg {
        ContentionArg::ExpectedBackoff => ContentionMode::ExpectedBackoff,
        ContentionArg::LiteralEq11 => ContentionMode::LiteralEq11,
    }
}

/// Load the scenario, apply `--set` overrides and flags in order, re-validate.
fn prepare(r: &RunArgs, base: &Profiles) -> Result<Scenario, CliError> {
    let mut s = read_scenario(&r.scenario, base)?;
    for item in &r.set {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage("override.format", format!("`{item}` is not KEY=VALUE")))?;
        let key = key.trim();
        let value = parse_parameter(key, value)?;
        set_parameter(&mut s, base, key, &value)?;
    }
    if let Some(seed) = r.seed {
        s.seed = seed;
    }
    if let Some(n) = r.packets {
        s.traffic.packet_count = n;
    }
    if let Some(n) = r.replications {
        s.replications = n;
    }
    if let Some(m) = r.mode {
        s.mode = match m {
            ModeArg::Analytic => Mode::Analytic,
            ModeArg::Simulate => Mode::Simulate,
            ModeArg::Compare => Mode::Compare,
        };
    }
    check(&s, base)?;
    Ok(s)
}

fn analyze(s: &Scenario, base: &Profiles, r: &RunArgs) -> Result<String, CliError> {
    let profiles = s.resolve_profiles(base);
    let mode = contention_mode(r.contention_mode);
    let mut paths = Vec::new();
    for path in &s.paths {
        let breakdowns = analytic_breakdowns(path, &profiles, &s.traffic, mode)?;
        let totals: Vec<f64> = breakdowns.iter().map(|b| b.total).collect();
        paths.push(report::AnalyzePath {
            path: path.id.clone(),
            links: path
                .links
                .iter()
                .zip(breakdowns)
                .map(|(l, breakdown)| report::AnalyzeLink {
                    index: l.index,
                    profile: l.profile_id.clone(),
                    breakdown,
                })
                .collect(),
            report: PathDelayReport::from_hops(&totals),
        });
    }
    let out = report::AnalyzeOutput {
        contention_mode: mode.as_str(),
        paths,
    };
    Ok(report::analyze(&out, r.output.format))
}

/// Every replication of `path`, run in parallel and kept in replication order.
fn replications(s: &Scenario, profiles: &Profiles, path: &PathSpec) -> Result<Vec<PathSampleSet>, Error> {
    (0..s.replications)
        .into_par_iter()
        .map(|i| simulate_replication(s, profiles, path, i))
        .collect()
}

fn simulate(s: &Scenario, base: &Profiles, r: &RunArgs) -> Result<String, CliError> {
    let profiles = s.resolve_profiles(base);
    let mut paths = Vec::new();
    for path in &s.paths {
        let sets = replications(s, &profiles, path)?;
        let packets: Vec<report::PacketRow> = sets
            .iter()
            .enumerate()
            .flat_map(|(rep, set)| {
                set.per_packet.iter().map(move |p| report::PacketRow {
                    replication: rep as u32,
                    packet_id: p.packet,
                    d1: p.report.d1,
                    d2: p.report.d2,
                    d3: p.report.d3,
                    d_total: p.report.d_total,
                })
            })
            .collect();
        let column = |f: fn(&report::PacketRow) -> f64| summarize(&packets.iter().map(f).collect::<Vec<_>>()).ok();
        let link_delay = [column(|p| p.d1), column(|p| p.d2), column(|p| p.d3)];
        let links = path
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let per_link = sets.iter().map(|set| &set.per_link[i]);
                let sum = |f: &dyn Fn(&medlink_core::linksim::LinkSampleSet) -> u64| per_link.clone().map(f).sum();
                report::LinkSummary {
                    index: l.index,
                    profile: l.profile_id.clone(),
                    offered: sum(&|x| x.offered),
                    delivered: sum(&|x| x.delivered()),
                    dropped_oversize: sum(&|x| x.dropped_for(DropReason::Oversize)),
                    dropped_channel_access: sum(&|x| x.dropped_for(DropReason::ChannelAccessFailure)),
                    dropped_retry_limit: sum(&|x| x.dropped_for(DropReason::RetryLimit)),
                    collisions: sum(&|x| x.collisions),
                    delay: link_delay[i],
                }
            })
            .collect();
        paths.push(report::SimulatePath {
            path: path.id.clone(),
            links,
            total: column(|p| p.d_total),
            packets,
        });
    }
    let out = report::SimulateOutput {
        seed: s.seed,
        replications: s.replications,
        packet_count: s.traffic.packet_count,
        paths,
    };
    Ok(report::simulate(&out, r.output.format))
}

fn compare_paths(s: &Scenario, base: &Profiles, r: &RunArgs) -> Result<String, CliError> {
    let profiles = s.resolve_profiles(base);
    let mode = contention_mode(r.contention_mode);
    let mut paths = Vec::new();
    for path in &s.paths {
        let analytic = analytic_path_delay(path, &profiles, &s.traffic, mode)?;
        let sets = replications(s, &profiles, path)?;
        let report = compare(&analytic, &sets, DEFAULT_THRESHOLD).map_err(|e| match e {
            Error::EmptySamples => CliError::usage(
                "stats.empty",
                format!("no packet crossed path `{}`; nothing to compare", path.id),
            ),
            e => e.into(),
        })?;
        paths.push(report::ComparePath {
            path: path.id.clone(),
            report,
        });
    }
    let out = report::CompareOutput {
        contention_mode: mode.as_str(),
        seed: s.seed,
        replications: s.replications,
        paths,
    };
    Ok(report::compare(&out, r.output.format))
}
