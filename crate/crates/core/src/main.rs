use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlwaves::scenarios::{self, ScenarioConfig};
use nlwaves::Error;

#[derive(Parser)]
#[command(name = "nlwaves", version, about = "Nonlinear Taylor-Couette waves by eigenfunction expansion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario configuration (JSON key-value object)
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: `out` key of the config, else `runs/<scenario>`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Eigenbasis cache directory (default: $NLWAVES_CACHE, else .nlwaves-cache)
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Neutral band and growth-rate curve
    Linstab(Common),
    /// Integrate a scenario and write all run artifacts
    Run(Common),
    /// Recompute amplitude/frequency tables from a previous run
    Tables(Common),
    /// Meridional velocity panels of a previous run's equilibrium
    Field(Common),
    /// Kuramoto-Sivashinsky time-step sensitivity
    Ks(Common),
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Json(_) | Error::Io(_) => 2,
        _ => 3,
    }
}

fn out_dir(common: &Common, cfg: &ScenarioConfig) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| {
            let id = serde_json::to_value(cfg.scenario)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_else(|| "custom".into());
            PathBuf::from("runs").join(id)
        })
}

fn execute(cli: Cli) -> nlwaves::Result<()> {
    let common = match &cli.command {
        Command::Linstab(c) | Command::Run(c) | Command::Tables(c) | Command::Field(c) | Command::Ks(c) => c,
    };
    let cfg = ScenarioConfig::load(&common.config)?;
    let out = out_dir(common, &cfg);
    let cache = scenarios::resolve_cache_dir(common.cache.as_deref());
    match &cli.command {
        Command::Linstab(_) => {
            let (_, text) = scenarios::cmd_linstab(&cfg, &out)?;
            print!("{text}");
        }
        Command::Run(_) => {
            let report = scenarios::cmd_run(&cfg, &out, Some(&cache))?;
            print!("{}", report.summary);
            if report.equilibrium_at.is_none() {
                log::warn!("no equilibrium reached by t_end");
            }
        }
        Command::Tables(_) => print!("{}", scenarios::cmd_tables(&cfg, &out, Some(&cache))?),
        Command::Field(_) => print!("{}", scenarios::cmd_field(&cfg, &out, Some(&cache))?),
        Command::Ks(_) => print!("{}", scenarios::cmd_ks(&cfg, &out)?.to_text()),
    }
    println!("output: {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
