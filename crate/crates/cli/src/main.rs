//! `stabnet`: seeded experiments on random stabilizer tensor networks.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use stabnet::NetworkGraph;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "stabnet", version, about = "Random stabilizer tensor network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the invariant suite; exits nonzero naming the first violated invariant.
    Verify(VerifyArgs),
    /// Boundary entropies against minimal cuts, for every boundary region.
    Rt(Common),
    /// GHZ content of regions A, B, C, one row per trial.
    Ghz(Common),
    /// Four-party entropy accounting for regions A, B, C, D.
    Fourpartite(Common),
    /// Spin-model ground state and third-moment prediction, with optional sampling.
    Spinmodel(Common),
    /// Second and third moment checks for `--qudits` qudits of dimension `-p`.
    Moments(MomentsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Shape {
    Star,
    Cross,
    Grid2x2,
    Ring,
    Path,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Graph JSON file.
    #[arg(long, conflicts_with = "shape")]
    graph: Option<PathBuf>,
    /// Built-in graph used when no file is given.
    #[arg(long, value_enum)]
    shape: Option<Shape>,
    /// Override the prime.
    #[arg(short = 'p', long = "prime")]
    p: Option<u32>,
    /// Override the bond exponent N.
    #[arg(short = 'N', long = "bond")]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Worker threads (all cores if absent). Does not change the output.
    #[arg(long)]
    pub workers: Option<usize>,
}

impl Common {
    /// Loads the graph, falling back to `default` when neither a file nor a
    /// shape is given, and applies the `-p`/`-N` overrides.
    pub fn graph(&self, default: Shape) -> Result<NetworkGraph> {
        let g = match (&self.graph, self.shape) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                NetworkGraph::from_json(&text)?
            }
            (None, shape) => builtin(shape.unwrap_or(default))?,
        };
        let (p, n) = (self.p.unwrap_or(g.p()), self.n.unwrap_or(g.bond_exponent()));
        Ok(g.with_params(p, n)?)
    }
}

fn builtin(shape: Shape) -> Result<NetworkGraph> {
    Ok(match shape {
        Shape::Star => NetworkGraph::star(2, 2, 3)?,
        Shape::Cross => NetworkGraph::star(3, 3, 4)?,
        Shape::Grid2x2 => NetworkGraph::grid2x2(5, 2)?,
        Shape::Ring => NetworkGraph::ring(3, 2, 3)?,
        Shape::Path => NetworkGraph::path(3, 2, 2)?,
    })
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Corrupt an internal table before checking (exercises failure reporting).
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<verify::Fault>,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    #[command(flatten)]
    common: Common,
    /// Number of qudits per replica.
    #[arg(long, default_value_t = 2)]
    qudits: usize,
    /// Random Clifford words for the commutant check.
    #[arg(long, default_value_t = 20)]
    words: usize,
}

fn run(cli: Cli) -> Result<ExitCode> {
    let (report, common, failure) = match cli.command {
        Command::Verify(args) => {
            let (report, failure) = verify::run(&args.common, args.inject_fault)?;
            (report, args.common, failure)
        }
        Command::Rt(c) => (commands::rt(&c)?, c, None),
        Command::Ghz(c) => (commands::ghz(&c)?, c, None),
        Command::Fourpartite(c) => (commands::fourpartite(&c)?, c, None),
        Command::Spinmodel(c) => (commands::spinmodel(&c)?, c, None),
        Command::Moments(args) => {
            if args.qudits == 0 {
                bail!("--qudits must be positive");
            }
            (commands::moments(&args.common, args.qudits, args.words)?, args.common, None)
        }
    };
    output::emit(&report, common.format, common.out.as_deref())?;
    Ok(match failure {
        Some(name) => {
            eprintln!("invariant violated: {name}");
            ExitCode::from(1)
        }
        None => ExitCode::SUCCESS,
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
