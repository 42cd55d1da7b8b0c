use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

use commands::CliError;

#[derive(Debug, Parser)]
#[command(name = "flatlift", version, about = "Poset flatness checks and lifting of stable diagrams over Z/p^k")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Ind,
    Pro,
}

#[derive(Debug, Subcommand)]
pub enum PosetQuery {
    /// Size, covers, extrema and flatness summary.
    Info,
    /// Ind- or pro-crown of the whole poset and its 1-connectedness.
    Crown {
        #[arg(value_enum)]
        direction: Direction,
    },
    /// Ind- and pro-flatness with failing elements.
    Flat,
    /// Quasitree test by both characterizations.
    Quasitree,
    /// Mitchell's criterion for dimension at most two.
    Mitchell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LiftMode {
    /// Strictly commutative purely monic replacement over an ind-flat shape.
    Diagram,
    /// Purely epic replacement over a pro-flat shape.
    Dual,
    /// Morphism lift after replacing the source, over a quasitree.
    Morphism,
    /// Search for a strict morphism without replacing the source.
    StrictFullTest,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Inspect a poset.
    Poset {
        /// Poset file; omit when using --gen.
        file: Option<PathBuf>,
        /// chain:n, powerset:m, product:m,n,..., sc:n or random:n
        #[arg(long, conflicts_with = "file")]
        gen: Option<String>,
        /// Seed for random:n.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the poset in file format.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(subcommand)]
        query: PosetQuery,
    },
    /// Lift a stably commutative prediagram or a stably natural morphism.
    Lift {
        #[arg(long, required_unless_present = "gen")]
        poset: Option<PathBuf>,
        #[arg(long, conflicts_with = "poset")]
        gen: Option<String>,
        /// Source diagram; omit together with --seed to draw a random instance.
        #[arg(long, required_unless_present = "seed")]
        diagram: Option<PathBuf>,
        /// Target diagram for the morphism modes.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Components of the stable morphism for the morphism modes.
        #[arg(long)]
        hom: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = LiftMode::Diagram)]
        mode: LiftMode,
        /// Draw a random instance on the shape.
        #[arg(long, conflicts_with = "diagram")]
        seed: Option<u64>,
        /// Ring `p,k` for random instances.
        #[arg(long, default_value = "3,2")]
        ring: String,
        /// Maximal rank of random instances.
        #[arg(long, default_value_t = 3)]
        max_rank: usize,
        /// Lifted diagram (or replaced source in the morphism modes).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Strict morphism found in the morphism modes.
        #[arg(long)]
        hom_out: Option<PathBuf>,
    },
    /// Classify all posets up to a size.
    Census {
        #[arg(long, default_value_t = 6)]
        max_n: usize,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, conflicts_with = "jobs")]
        sequential: bool,
        /// Directory for poset files of flagged candidates.
        #[arg(long)]
        out: Option<PathBuf>,
        /// List classes: all, crown, ind-flat, pro-flat, flat, not-flat, quasitree, candidate.
        #[arg(long)]
        list: Option<String>,
    },
    /// Run the worked-example regression suite.
    Examples {
        /// Write the example diagrams as input files to this directory.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Poset { file, gen, seed, out, query } => commands::poset(file, gen, seed, out, query),
        Command::Lift { poset, gen, diagram, target, hom, mode, seed, ring, max_rank, out, hom_out } => {
            commands::lift(commands::LiftArgs {
                poset,
                gen,
                diagram,
                target,
                hom,
                mode,
                seed,
                ring,
                max_rank,
                out,
                hom_out,
            })
        }
        Command::Census { max_n, jobs, sequential, out, list } => commands::census(max_n, jobs, sequential, out, list),
        Command::Examples { export } => commands::examples(export),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ CliError::Check(_)) => {
            eprintln!("check failed: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
