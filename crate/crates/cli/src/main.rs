mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use arbiterlab::report::Envelope;

#[derive(Parser, Debug)]
#[command(
    name = "arbiterlab",
    version,
    about = "Arbiter, Milnor invariant and percolation experiments"
)]
pub struct Cli {
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true, env = "ARBITERLAB_THREADS")]
    threads: Option<usize>,
    /// `key = value` file of flags for the subcommand; flags given here win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Validate the configuration and stop.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Top,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Top {
    /// GF(2) linear algebra.
    #[command(subcommand)]
    Gf2(Gf2Cmd),
    /// Built-in cell complexes.
    #[command(subcommand)]
    Complexes(ComplexCmd),
    /// Arbiter axiom checks.
    #[command(subcommand)]
    Arbiters(ArbiterCmd),
    /// Dyadic model pieces and partial arbiters.
    #[command(subcommand)]
    Dyadic(DyadicCmd),
    /// Magnus expansions, Milnor invariants and Bing doubling.
    #[command(subcommand)]
    Milnor(MilnorCmd),
    /// Voronoi percolation crossing experiment.
    Percolate(PercolateArgs),
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "sub", rename_all = "kebab-case")]
pub enum Gf2Cmd {
    /// Random consistency checks of rank, kernel and column space.
    Selftest(Gf2Args),
}

#[derive(Args, Debug, Serialize)]
pub struct Gf2Args {
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 64)]
    pub max_size: usize,
    #[arg(long)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplexKind {
    Rp2,
    S2,
    Rp3,
    Torus,
    Grid,
    Generic,
}

#[derive(Args, Debug, Serialize)]
pub struct ComplexArgs {
    #[arg(long, value_enum)]
    pub kind: ComplexKind,
    /// Dimension, for grids and generic cubes.
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// Cells per side, for grids, tori and generic cubes.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "sub", rename_all = "kebab-case")]
pub enum ComplexCmd {
    /// Cells, boundary maps and face tags as JSON.
    Build(ComplexArgs),
    /// Z/2 Betti numbers and the boundary-squared check.
    Homology(ComplexArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Surface {
    Rp2,
    S2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymmetryArg {
    Full,
    Sampled,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "sub", rename_all = "kebab-case")]
pub enum ArbiterCmd {
    /// Duality of the homological arbiter on the 6-vertex projective plane.
    Rp2 {
        /// Also search for every consistent assignment.
        #[arg(long)]
        enumerate: bool,
        /// Use symmetry alone, without shelling moves.
        #[arg(long)]
        no_shelling: bool,
    },
    /// Power-set axioms of the cube arbiter on random colorings.
    Cube {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SymmetryArg::Full)]
        symmetry: SymmetryArg,
        #[arg(long, default_value_t = 3)]
        enlargements: usize,
    },
    /// Multiarbiter axioms on every top-cell set of the minimal RP^3.
    Rp3,
    /// Consistent arbiter tables on a small surface.
    Enumerate {
        #[arg(long, value_enum, default_value_t = Surface::Rp2)]
        surface: Surface,
        #[arg(long)]
        no_shelling: bool,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "sub", rename_all = "kebab-case")]
pub enum DyadicCmd {
    /// Order two words, or a word and a ray written `stem:period`.
    Compare { left: String, right: String },
    /// Greedy consistency and case replay of a partial arbiter.
    Consistency {
        #[arg(long)]
        ray: String,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// A model piece on which two partial arbiters disagree.
    Distinguish { first: String, second: String },
}

#[derive(Args, Debug, Serialize)]
pub struct LinkSource {
    /// Doubling pattern such as `(H (d 1))`; the Hopf link when omitted.
    #[arg(long, conflicts_with = "link_file")]
    pub pattern: Option<String>,
    /// Link presentation, one `meridian: longitude` line per component.
    #[arg(long)]
    pub link_file: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "sub", rename_all = "kebab-case")]
pub enum MilnorCmd {
    /// Truncated Magnus expansion of a word like `m1 m2 M1 M2`.
    Expand {
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 3)]
        q: usize,
    },
    /// A non-repeating invariant; the last index names the longitude.
    Mu {
        #[command(flatten)]
        link: LinkSource,
        /// Comma separated meridian indices.
        #[arg(long, value_delimiter = ',', required = true)]
        seq: Vec<usize>,
        /// Truncation degree; defaults to the sequence length minus one.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Bing double one component.
    Double {
        #[command(flatten)]
        link: LinkSource,
        #[arg(long)]
        component: usize,
    },
    /// First nonzero non-repeating invariant of a doubling pattern.
    Certify {
        #[arg(long)]
        pattern: String,
        /// Truncation degree; defaults to the component count minus one.
        #[arg(long)]
        q: Option<usize>,
    },
    /// Whether a word survives a generalized Milnor quotient.
    Quotient {
        #[arg(long, value_enum, default_value_t = SystemArg::BingCell)]
        system: SystemArg,
        /// Extra commuting pair `i,j`; repeatable.
        #[arg(long = "commute", value_parser = parse_pair)]
        commute: Vec<(usize, usize)>,
        /// Target word; the Bing-cell commutator when omitted.
        #[arg(long)]
        target: Option<String>,
        #[arg(long, default_value_t = 4)]
        q: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemArg {
    BingCell,
    Empty,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected i,j, got `{s}`"))?;
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisModeArg {
    Own,
    Any,
}

#[derive(Args, Debug, Serialize)]
pub struct PercolateArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 200.0)]
    pub intensity: f64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Number of colors; defaults to `d`.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = AxisModeArg::Own)]
    pub axis_mode: AxisModeArg,
}

/// What a subcommand produced.
pub struct Report {
    pub pass: bool,
    pub result: serde_json::Value,
    pub csv: Option<String>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Usage(String),
    /// The computation hit an inconsistency: exit 1.
    Internal(String),
}

fn with_override(cmd: clap::Command) -> clap::Command {
    cmd.args_override_self(true).mut_subcommands(with_override)
}

fn command() -> clap::Command {
    with_override(Cli::command())
}

/// Parses `argv`, folding in the config file when one is named.
fn parse(argv: Vec<OsString>) -> Result<Cli, clap::Error> {
    let argv: Vec<String> = argv
        .into_iter()
        .map(|s| s.to_string_lossy().into_owned())
        .collect();
    let named = argv.iter().any(|a| a == "--config" || a.starts_with("--config="));
    if !named {
        return Cli::from_arg_matches(&command().try_get_matches_from(&argv)?);
    }
    // Required flags may live in the file, so the first pass only locates it.
    let first = command().ignore_errors(true).try_get_matches_from(&argv)?;
    let matches = match first.get_one::<PathBuf>("config") {
        None => command().try_get_matches_from(&argv)?,
        Some(path) => {
            let usage = |msg: String| command().error(clap::error::ErrorKind::ValueValidation, msg);
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let pairs = config::parse(&text).map_err(|e| usage(e.0))?;
            let path = config::subcommand_path(&first);
            let flags = config::to_flags(&command(), &first, &path, &pairs).map_err(|e| usage(e.0))?;
            command().try_get_matches_from(config::splice(&argv, &path, flags))?
        }
    };
    Cli::from_arg_matches(&matches)
}

fn command_name(top: &Top) -> String {
    let value = serde_json::to_value(top).expect("arguments serialize");
    let head = value["command"].as_str().unwrap_or_default().to_string();
    match value.get("sub").and_then(|s| s.as_str()) {
        Some(sub) => format!("{head} {sub}"),
        None => head,
    }
}

fn write_out(cli: &Cli, body: &str) -> Result<(), String> {
    match &cli.output {
        Some(path) => std::fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn envelope(name: &str, pass: bool, result: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope::new(name, pass, result)).expect("json");
    s.push('\n');
    s
}

fn main() -> ExitCode {
    let cli = match parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let name = command_name(&cli.command);
    if cli.emit == Emit::Csv && !matches!(cli.command, Top::Percolate(_)) {
        eprintln!("error: --emit csv is only available for percolate");
        return ExitCode::from(2);
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
    }
    let threads = cli
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let outcome = if cli.dry_run {
        commands::validate(&cli.command).map(|()| Report {
            pass: true,
            result: serde_json::json!({ "dry_run": true, "config": &cli.command }),
            csv: None,
        })
    } else {
        pool.install(|| commands::run(&cli.command))
    };
    match outcome {
        Ok(report) => {
            let body = match (&report.csv, cli.emit) {
                (Some(csv), Emit::Csv) => csv.clone(),
                _ => envelope(&name, report.pass, report.result),
            };
            if let Err(e) = write_out(&cli, &body) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(if report.pass { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            let body = envelope(&name, false, serde_json::json!({ "error": msg }));
            let _ = write_out(&cli, &body);
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn names_join_the_subcommand_path() {
        let cli = parse(
            ["arbiterlab", "milnor", "expand", "--word", "m1"]
                .map(OsString::from)
                .to_vec(),
        )
        .unwrap();
        assert_eq!(command_name(&cli.command), "milnor expand");
        let cli = parse(
            ["arbiterlab", "percolate", "--seed", "1"]
                .map(OsString::from)
                .to_vec(),
        )
        .unwrap();
        assert_eq!(command_name(&cli.command), "percolate");
    }

    #[test]
    fn repeated_flags_keep_the_last() {
        let cli = parse(
            ["arbiterlab", "percolate", "--seed", "1", "--d", "3", "--d", "2"]
                .map(OsString::from)
                .to_vec(),
        )
        .unwrap();
        let Top::Percolate(p) = cli.command else { panic!() };
        assert_eq!(p.d, 2);
    }
}
