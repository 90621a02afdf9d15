use clap::{Args, Parser, Subcommand};
use roundtrip_cli::config::Layer;
use roundtrip_cli::{error, set, Context};
use std::path::PathBuf;
use std::process::ExitCode;

/// Plan retrosynthetic routes, replay them forward and score the round trip.
#[derive(Parser, Debug)]
#[command(name = "roundtrip", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Write a closed-world reaction corpus with its stock and targets.
    Generate,
    /// Parse, validate and deduplicate a reaction SMILES file.
    Ingest,
    /// Build the reaction network and extract reference routes.
    Build,
    /// Extract retro and forward template libraries.
    Fit,
    /// Plan, reproduce and score a molecule list.
    Eval,
    /// Measure how well round-trip scores detect feasible routes.
    Bench,
    /// Summarize saved records or confusion counts.
    Report,
}

/// Settings shared by every subcommand. Flags override the config file,
/// which overrides the built-in defaults.
#[derive(Args, Debug)]
struct Flags {
    /// `key=value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Raw reaction SMILES, one per line.
    #[arg(long, global = true)]
    reactions: Option<PathBuf>,
    /// Dataset written by `ingest`.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Purchasable molecules, one SMILES per line.
    #[arg(long, global = true)]
    stock: Option<PathBuf>,
    /// Retro template library.
    #[arg(long, global = true)]
    retro: Option<PathBuf>,
    /// Forward template library.
    #[arg(long, global = true)]
    forward: Option<PathBuf>,
    /// Reference routes written by `build`.
    #[arg(long, global = true)]
    routes: Option<PathBuf>,
    /// Molecules to evaluate: `SMILES [group]` per line.
    #[arg(long, global = true)]
    molecules: Option<PathBuf>,
    /// Feasibility labels for `bench`.
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
    /// Records written by `eval`, for `report`.
    #[arg(long, global = true)]
    records: Option<PathBuf>,
    #[arg(long, global = true)]
    beam_width: Option<usize>,
    #[arg(long, global = true)]
    max_depth: Option<usize>,
    #[arg(long, global = true)]
    call_budget: Option<usize>,
    #[arg(long, global = true)]
    topk: Option<usize>,
    /// Confusion counts `tp,tn,fp,fn` for `report`.
    #[arg(long, global = true)]
    counts: Option<String>,
    /// Any other setting, as `key=value`; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Flags {
    fn layer(&self) -> anyhow::Result<Layer> {
        let mut l = Layer::new();
        for s in &self.sets {
            let parsed = roundtrip_cli::config::parse_layer(s, "--set")?;
            l.extend(parsed);
        }
        let paths = [
            ("out", &self.out),
            ("reactions", &self.reactions),
            ("dataset", &self.dataset),
            ("stock", &self.stock),
            ("retro", &self.retro),
            ("forward", &self.forward),
            ("routes", &self.routes),
            ("molecules", &self.molecules),
            ("labels", &self.labels),
            ("records", &self.records),
        ];
        for (k, v) in paths {
            if let Some(p) = v {
                set(&mut l, k, p.display());
            }
        }
        let numbers = [
            ("jobs", self.jobs),
            ("beam_width", self.beam_width),
            ("max_depth", self.max_depth),
            ("call_budget", self.call_budget),
            ("topk", self.topk),
        ];
        for (k, v) in numbers {
            if let Some(v) = v {
                set(&mut l, k, v);
            }
        }
        if let Some(s) = self.seed {
            set(&mut l, "seed", s);
        }
        if let Some(c) = &self.counts {
            set(&mut l, "counts", c);
        }
        Ok(l)
    }
}

fn run(cli: &Cli) -> anyhow::Result<Vec<String>> {
    let ctx = Context::load(cli.flags.config.as_deref(), &cli.flags.layer()?)?;
    match cli.command {
        Command::Generate => roundtrip_cli::cmd_generate(&ctx),
        Command::Ingest => roundtrip_cli::cmd_ingest(&ctx),
        Command::Build => roundtrip_cli::cmd_build(&ctx),
        Command::Fit => roundtrip_cli::cmd_fit(&ctx),
        Command::Eval => roundtrip_cli::cmd_eval(&ctx),
        Command::Bench => roundtrip_cli::cmd_bench(&ctx),
        Command::Report => roundtrip_cli::cmd_report(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error::exit_code(&e) as u8)
        }
    }
}
