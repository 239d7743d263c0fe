//! `qpl`: evaluate, search, translate and inspect preference-logic models.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::Config;
use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "qpl", version, about = "Quantified reason-based preference logic workbench")]
struct Cli {
    /// TOML file with defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for randomized corpora.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

/// Search bounds shared by `check`, `find-model` and `probe`.
#[derive(Debug, Clone, Default, Args)]
struct SearchArgs {
    /// all, reflexive, transitive, metric[:N] or invariant.
    #[arg(long)]
    class: Option<String>,
    /// utility, preorder or generalized.
    #[arg(long)]
    semantics: Option<String>,
    #[arg(long)]
    max_worlds: Option<usize>,
    #[arg(long)]
    max_domain: Option<usize>,
    /// Maximum number of partial models visited.
    #[arg(long)]
    budget: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Truth set of a formula in a model file.
    Eval {
        model: PathBuf,
        formula: String,
        /// Assignment such as `x=a,y=b`.
        #[arg(long)]
        assign: Option<String>,
    },
    /// Validity within bounds.
    Check {
        formula: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the counterexample model here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Satisfiability within bounds.
    FindModel {
        formula: String,
        #[command(flatten)]
        search: SearchArgs,
        /// Write the model here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-order translation as a TPTP problem.
    Translate {
        formula: String,
        /// Emit the theory without the conjecture.
        #[arg(long)]
        axioms_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sentences of strictly increasing modal depth with new truth sets.
    Hierarchy {
        /// Model file supplying the core structure; without it a monadic
        /// core is generated.
        core: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n_max: usize,
        /// Closed non-modal sentence true at some but not all worlds.
        #[arg(long)]
        psi: Option<String>,
        #[arg(long, default_value_t = 64)]
        worlds: usize,
        #[arg(long, default_value_t = 3)]
        domain: usize,
        #[arg(long, default_value = "1")]
        index: String,
        /// Use a reflexive selector.
        #[arg(long)]
        reflexive: bool,
        /// Write the constructed model here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame properties of a model's selector.
    Frames {
        model: PathBuf,
        /// Largest distance tried for metric frames.
        #[arg(long)]
        max_distance: Option<u32>,
    },
    /// Utility decompositions behind the anonymity principles.
    Decompose {
        model: PathBuf,
        /// World at which to extract; defaults to the first.
        #[arg(long)]
        world: Option<String>,
        /// Index set of the conjunctive principle; defaults to the designated one.
        #[arg(long)]
        index: Option<String>,
    },
    /// Corpus formulas valid over utility models but not over generalized ones.
    Probe {
        #[command(flatten)]
        search: SearchArgs,
        /// Seeded random sentences added to the template corpus.
        #[arg(long, default_value_t = 0)]
        random: usize,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match cli.command {
        Command::Eval { model, formula, assign } => commands::eval(&model, &formula, assign.as_deref()),
        Command::Check { formula, search, out } => {
            commands::search(&formula, &commands::bounds(&search, &config)?, false, out.as_deref())
        }
        Command::FindModel { formula, search, out } => {
            commands::search(&formula, &commands::bounds(&search, &config)?, true, out.as_deref())
        }
        Command::Translate {
            formula,
            axioms_only,
            out,
        } => commands::translate(&formula, axioms_only, out.as_deref()),
        Command::Hierarchy {
            core,
            n_max,
            psi,
            worlds,
            domain,
            index,
            reflexive,
            out,
        } => commands::hierarchy(&commands::HierarchyArgs {
            core,
            n_max,
            psi,
            worlds,
            domain,
            index,
            reflexive,
            out,
        }),
        Command::Frames { model, max_distance } => {
            commands::frames(&model, max_distance.or(config.max_distance).unwrap_or(3))
        }
        Command::Decompose { model, world, index } => commands::decompose(&model, world.as_deref(), index.as_deref()),
        Command::Probe { search, random } => commands::probe(&commands::bounds(&search, &config)?, random, seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.to_string();
            let first = text
                .lines()
                .next()
                .unwrap_or("bad arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
