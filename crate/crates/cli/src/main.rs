use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

mod config;
mod output;
mod runs;
mod selftest;

use config::{AnalyzeRun, EvolveRun, RungeRun, ScenarioRun, SchrodRun, SelftestRun, TorusRun};
use output::{sha256_hex, OutDir};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical { message: String, detail: serde_json::Value },
    Io(String),
}

impl CliError {
    pub fn numerical(message: String, detail: serde_json::Value) -> Self {
        CliError::Numerical { message, detail }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical { message, .. } => write!(f, "numerical failure: {message}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "vortexlab", version, about = "Batch runs for Runge approximation, GP evolution and vortex analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config for the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomised probes.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Truncated-SVD Runge approximation and entire-solution cutoffs.
    HelmholtzRunge,
    /// Global Schrödinger approximation of a local solution.
    SchrodApprox,
    /// Split-step evolution with mass and energy observables.
    GpEvolve,
    /// Zero-set extraction, timeline and events from snapshot files.
    VortexAnalyze,
    /// Preset, sample and analyse end to end.
    ScenarioRun,
    /// Rational-frequency torus embedding.
    TorusEmbed,
    /// Reduced invariant suite.
    Selftest,
    /// Print the config schema.
    Schema,
    /// Print the scenario catalogue.
    Presets,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::HelmholtzRunge => "helmholtz-runge",
            Command::SchrodApprox => "schrod-approx",
            Command::GpEvolve => "gp-evolve",
            Command::VortexAnalyze => "vortex-analyze",
            Command::ScenarioRun => "scenario-run",
            Command::TorusEmbed => "torus-embed",
            Command::Selftest => "selftest",
            Command::Schema => "schema",
            Command::Presets => "presets",
        }
    }
}

struct Run {
    out: PathBuf,
    seed: u64,
    config_sha256: String,
}

fn prepare<T: DeserializeOwned + Default + Serialize>(cli: &Cli) -> Result<(T, Run), CliError> {
    let (cfg, common) = config::load::<T>(cli.config.as_deref())?;
    let seed = cli.seed.or(common.seed).unwrap_or(0);
    let out = cli
        .out
        .clone()
        .or(common.out)
        .ok_or_else(|| CliError::Config("an output directory is required (--out or \"out\")".into()))?;
    let resolved = json!({ "subcommand": cli.command.name(), "seed": seed, "params": cfg });
    let config_sha256 = sha256_hex(&serde_json::to_vec(&resolved).map_err(|e| CliError::Config(e.to_string()))?);
    Ok((cfg, Run { out, seed, config_sha256 }))
}

fn set_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("VORTEXLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("VORTEXLAB_THREADS = {v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn execute<T, F>(cli: &Cli, body: F) -> Result<(), CliError>
where
    T: DeserializeOwned + Default + Serialize,
    F: FnOnce(&T, u64, &mut OutDir) -> Result<(), CliError>,
{
    let (cfg, run) = prepare::<T>(cli)?;
    let mut out = OutDir::create(&run.out)?;
    out.json("config.resolved.json", &json!({ "subcommand": cli.command.name(), "seed": run.seed, "params": cfg }))?;
    let result = body(&cfg, run.seed, &mut out);
    let code = match &result {
        Ok(()) => 0,
        Err(e) => {
            if let CliError::Numerical { message, detail } = e {
                out.json("diagnostic.json", &json!({ "subcommand": cli.command.name(), "error": message, "detail": detail }))?;
            }
            e.code() as i32
        }
    };
    // the manifest is written for failed runs too
    out.finish(cli.command.name(), &run.config_sha256, run.seed, code)?;
    result
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let q = cli.quiet;
    match cli.command {
        Command::Schema => {
            print!("{}", config::SCHEMA);
            Ok(())
        }
        Command::Presets => {
            println!("{}", serde_json::to_string_pretty(&runs::presets_listing()).map_err(|e| CliError::Io(e.to_string()))?);
            Ok(())
        }
        Command::HelmholtzRunge => execute::<RungeRun, _>(cli, |c, seed, out| runs::helmholtz_runge(c, seed, out, q)),
        Command::SchrodApprox => execute::<SchrodRun, _>(cli, |c, _, out| runs::schrod_approx(c, out, q)),
        Command::GpEvolve => execute::<EvolveRun, _>(cli, |c, seed, out| runs::gp_evolve(c, seed, out, q)),
        Command::VortexAnalyze => execute::<AnalyzeRun, _>(cli, |c, _, out| runs::vortex_analyze(c, out, q)),
        Command::ScenarioRun => execute::<ScenarioRun, _>(cli, |c, _, out| runs::scenario_run(c, out, q)),
        Command::TorusEmbed => execute::<TorusRun, _>(cli, |c, _, out| runs::torus_embed(c, out, q)),
        Command::Selftest => execute::<SelftestRun, _>(cli, |c, seed, out| {
            c.validate()?;
            let rep = selftest::run(c, seed);
            out.lap("selftest");
            if !q {
                for ch in &rep.checks {
                    eprintln!("{} {}: {}", if ch.passed { "ok  " } else { "FAIL" }, ch.name, ch.detail);
                }
                eprintln!("{} passed, {} failed", rep.passed, rep.failed);
            }
            out.json("selftest.json", &rep)?;
            if rep.failed > 0 {
                let names: Vec<&str> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(CliError::numerical(format!("{} selftest check(s) failed", rep.failed), json!({ "failed": names })));
            }
            Ok(())
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = set_threads().and_then(|()| dispatch(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vortexlab {}: {e}", cli.command.name());
            ExitCode::from(e.code())
        }
    }
}
