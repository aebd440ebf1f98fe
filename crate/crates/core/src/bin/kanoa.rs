//! `kanoa plan --input <file.kanoa> --out <dir>`; see docs/formats.md for the outputs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use kanoa::mdp::BuildConfig;
use kanoa::optimize::GaConfig;
use kanoa::report::{run, RunConfig};

#[derive(Parser)]
#[command(name = "kanoa", version, about = "Multi-robot mission planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a mission and write the Pareto front, plans and charts.
    Plan(PlanArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, env = "KANOA_INPUT")]
    input: PathBuf,
    #[arg(long, env = "KANOA_OUT")]
    out: PathBuf,
    /// TOML file with defaults for the options below.
    #[arg(long, env = "KANOA_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, env = "KANOA_ALLOCATIONS")]
    allocations: Option<usize>,
    #[arg(long, env = "KANOA_PERMUTATIONS")]
    permutations: Option<usize>,
    #[arg(long, env = "KANOA_POP")]
    pop: Option<usize>,
    #[arg(long, env = "KANOA_GENS")]
    gens: Option<usize>,
    #[arg(long, env = "KANOA_SEED")]
    seed: Option<u64>,
    #[arg(long, env = "KANOA_STATE_CAP")]
    state_cap: Option<usize>,
    #[arg(long, env = "KANOA_CROSSOVER")]
    crossover: Option<f64>,
    #[arg(long, env = "KANOA_MUTATION")]
    mutation: Option<f64>,
    #[arg(long, env = "KANOA_DUMP_ALLOCATIONS")]
    dump_allocations: bool,
    #[arg(long, env = "KANOA_DUMP_MDP")]
    dump_mdp: bool,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    allocations: Option<usize>,
    permutations: Option<usize>,
    pop: Option<usize>,
    gens: Option<usize>,
    seed: Option<u64>,
    state_cap: Option<usize>,
    crossover: Option<f64>,
    mutation: Option<f64>,
    dump_allocations: Option<bool>,
    dump_mdp: Option<bool>,
}

fn load_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn resolve(args: &PlanArgs, file: FileConfig) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        allocations: args.allocations.or(file.allocations).unwrap_or(d.allocations),
        ga: GaConfig {
            population: args.pop.or(file.pop).unwrap_or(d.ga.population),
            generations: args.gens.or(file.gens).unwrap_or(d.ga.generations),
            permutations: args.permutations.or(file.permutations).unwrap_or(d.ga.permutations),
            crossover_rate: args.crossover.or(file.crossover).unwrap_or(d.ga.crossover_rate),
            mutation_rate: args.mutation.or(file.mutation).unwrap_or(d.ga.mutation_rate),
            seed: args.seed.or(file.seed).unwrap_or(d.ga.seed),
        },
        build: BuildConfig { state_cap: args.state_cap.or(file.state_cap).unwrap_or(d.build.state_cap), ..d.build },
        boundary_filter: d.boundary_filter,
        dump_allocations: args.dump_allocations || file.dump_allocations.unwrap_or(false),
        dump_mdp: args.dump_mdp || file.dump_mdp.unwrap_or(false),
    }
}

fn main() -> ExitCode {
    let Command::Plan(args) = Cli::parse().command;
    let file = match args.config.as_deref().map(load_config).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cfg = resolve(&args, file);
    match run(&args.input, &args.out, &cfg) {
        Ok(report) => {
            let rows = report.rows();
            eprintln!("{} Pareto-optimal plan(s) written to {}", rows.len(), args.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
