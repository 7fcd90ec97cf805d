use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weaktraj::scenario::{list_scenarios, load_config, run_scenario, Relation, RunManifest, MANIFEST_NAME};
use weaktraj::{Error, Exec};

/// Weak values, weak trajectories and Bohmian dynamics for a two-packet setup.
#[derive(Parser)]
#[command(name = "weaktraj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV outputs and manifest.
    Run {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Output root; files go to <out>/<scenario>/.
        #[arg(long, env = "WEAKTRAJ_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// List the available scenarios.
    List,
    /// Run a scenario's checks without writing any files.
    Check {
        #[command(flatten)]
        args: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario name (see `list`); may also be given in the config file.
    #[arg(long)]
    scenario: Option<String>,
    /// JSON file overriding the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted override, e.g. `--set physics.g=0.1`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run single-threaded.
    #[arg(long)]
    sequential: bool,
}

const EXIT_USAGE: u8 = 1;
const EXIT_PHYSICS: u8 = 2;

fn relation(r: Relation) -> &'static str {
    match r {
        Relation::Lt => "<",
        Relation::Le => "<=",
        Relation::Ge => ">=",
        Relation::Eq => "==",
    }
}

fn report(m: &RunManifest) {
    for c in &m.checks {
        println!(
            "{} {:<36} {:>12.4e} {} {:<10e} (margin {:.3e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            relation(c.relation),
            c.threshold,
            c.margin
        );
    }
    for (k, v) in &m.results {
        println!("  {k} = {v}");
    }
    println!("{}: {:.2} s", m.scenario, m.wall_clock_seconds);
}

/// Failures inside a running scenario are physics failures unless they are I/O.
fn exit_for(e: &Error) -> u8 {
    match e {
        Error::Scenario { source, .. } => match source.as_ref() {
            Error::Io(_) | Error::Json(_) => EXIT_USAGE,
            _ => EXIT_PHYSICS,
        },
        _ => EXIT_USAGE,
    }
}

fn execute(cli: Cli) -> Result<u8, Error> {
    let (args, out) = match cli.command {
        Command::List => {
            for s in list_scenarios() {
                println!("{:<8} {}", s.name, s.description);
            }
            return Ok(0);
        }
        Command::Run { args, out } => (args, Some(out)),
        Command::Check { args } => (args, None),
    };
    let text = args.config.as_ref().map(std::fs::read_to_string).transpose()?;
    let mut sets = args.sets.clone();
    if let Some(seed) = args.seed {
        sets.push(format!("seed={seed}"));
    }
    let cfg = load_config(args.scenario.as_deref(), text.as_deref(), &sets)?;
    let name = cfg.scenario.clone().unwrap_or_default();
    let dir = out.map(|o| o.join(&name));
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    let manifest = run_scenario(&cfg, dir.as_deref(), exec)?;
    report(&manifest);
    if let Some(d) = &dir {
        println!("wrote {}", d.join(MANIFEST_NAME).display());
    }
    Ok(if manifest.passed { 0 } else { EXIT_PHYSICS })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
