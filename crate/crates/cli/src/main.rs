//! `varilab`: run, list, validate and emit scenario configs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use varilab::scenarios::{self, exit, load_config, RunError, RunSummary, ScenarioConfig};

/// Default output root when neither `--out` nor `output_dir` is given.
const OUTPUT_ROOT_ENV: &str = "VARILAB_OUTPUT_ROOT";

#[derive(Parser)]
#[command(name = "varilab", version, about = "Scenario runner for the varilab numerical laboratory")]
struct Cli {
    /// Only print errors.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long, allow_negative_numbers = true)]
        seed: Option<i64>,
        /// Output directory; beats `output_dir` and the environment.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override discretization.depth.
        #[arg(long, allow_negative_numbers = true)]
        depth: Option<i64>,
    },
    /// List shipped scenarios.
    List,
    /// Check a config file and print line-anchored diagnostics.
    Validate { config: PathBuf },
    /// Print the default config of a scenario.
    EmitDefault { scenario: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let code = match cli.command {
        Command::List => {
            for s in scenarios::list_scenarios() {
                println!("{:<24} {}", s.name, s.summary);
            }
            exit::PASS
        }
        Command::EmitDefault { scenario } => match scenarios::emit_default(&scenario) {
            Some(text) => {
                print!("{text}");
                exit::PASS
            }
            None => {
                eprintln!(
                    "error: unknown scenario `{scenario}`; known: {}",
                    scenarios::catalog::names().join(", ")
                );
                exit::USAGE
            }
        },
        Command::Validate { config } => {
            let diags = scenarios::validate_config(&config);
            if diags.is_empty() {
                if !cli.quiet {
                    println!("{}: ok", config.display());
                }
                exit::PASS
            } else {
                for d in diags {
                    eprintln!("{d}");
                }
                exit::USAGE
            }
        }
        Command::Run { config, seed, out, depth } => run(&config, seed, out, depth, cli.quiet),
    };
    ExitCode::from(code as u8)
}

fn apply_overrides(cfg: &mut ScenarioConfig, seed: Option<i64>, depth: Option<i64>) -> Result<(), String> {
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(d) = depth {
        let has_depth = scenarios::catalog::default_config(&cfg.scenario)
            .is_some_and(|c| c.discretization.depth.is_some());
        if !has_depth {
            return Err(format!("--depth: scenario `{}` has no discretization.depth", cfg.scenario));
        }
        cfg.discretization.depth = Some(d);
    }
    let problems = cfg.check();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems.iter().map(|d| format!("command line: {d}")).collect::<Vec<_>>().join("\n"))
    }
}

fn output_dir(cfg: &ScenarioConfig, out: Option<PathBuf>) -> PathBuf {
    if let Some(o) = out {
        return o;
    }
    if let Some(o) = &cfg.output_dir {
        return PathBuf::from(o);
    }
    let root = std::env::var_os(OUTPUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| "varilab-output".into());
    root.join(&cfg.scenario)
}

fn report(summary: &RunSummary, dir: &Path) {
    for c in &summary.criteria {
        println!(
            "{} {:<24} {:>12.4e} {:<12} {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.bound.to_string(),
            c.description
        );
    }
    let passed = summary.criteria.iter().filter(|c| c.pass).count();
    println!(
        "{}: {} ({passed}/{} criteria) in {:.2} s -> {}",
        summary.scenario,
        if summary.pass { "pass" } else { "FAIL" },
        summary.criteria.len(),
        summary.wall_time_s,
        dir.display()
    );
}

fn run(config: &Path, seed: Option<i64>, out: Option<PathBuf>, depth: Option<i64>, quiet: bool) -> i32 {
    let mut cfg = match load_config(config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return exit::USAGE;
        }
    };
    if let Err(msg) = apply_overrides(&mut cfg, seed, depth) {
        eprintln!("{msg}");
        return exit::USAGE;
    }
    let dir = output_dir(&cfg, out);
    match scenarios::run_scenario(&cfg, &dir) {
        Ok(summary) => {
            if !quiet {
                report(&summary, &dir);
            }
            summary.exit_code()
        }
        Err(e) => {
            if let RunError::Numerical { summary: Some(s), .. } = &e {
                if !quiet {
                    report(s, &dir);
                }
            }
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
