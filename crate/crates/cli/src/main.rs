use clap::{Parser, Subcommand};
use hwyplan::batch::{report_from_logs, run_batch, BatchError, BatchSpec};
use hwyplan::metrics::MetricConfig;
use hwyplan::scenario::{resolve_path, spawn_scenario, ConfigError, SpawnBounds};
use hwyplan::{DriverProfile, Scenario};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use thiserror::Error;

/// Relative scenario, bounds and profile paths are resolved against this
/// directory when it is set.
const CONFIG_ROOT_VAR: &str = "HWYPLAN_CONFIG_ROOT";

#[derive(Parser)]
#[command(name = "hwyplan", version, about = "Highway planning stack simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (profile, seed) episode of a scenario.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated preset names or profile files.
        #[arg(long, default_value = "agile,moderate,conservative")]
        profile: String,
        /// A count `n` (seeds 0..n), a range `a..b`, or a list `1,5,9`.
        #[arg(long, default_value = "1")]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
        /// Step size override, s.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Draw one random scenario from a bounds file.
    Spawn {
        #[arg(long)]
        bounds: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the report from a directory of episode logs.
    Report {
        #[arg(long)]
        logs: PathBuf,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Batch(#[from] BatchError),
    #[error("invalid seeds `{0}`")]
    Seeds(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(e) if e.is_io() => 3,
            CliError::Config(_) | CliError::Seeds(_) => 2,
            CliError::Batch(e) if e.is_config() => 2,
            CliError::Batch(e) if e.is_io() => 3,
            CliError::Batch(_) => 1,
            CliError::Io { .. } => 3,
        }
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Seeds(spec.to_string());
    let spec = spec.trim();
    let seeds: Vec<u64> = if let Some((a, b)) = spec.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        (a..b).collect()
    } else if spec.contains(',') {
        spec.split(',').filter(|s| !s.trim().is_empty()).map(|s| s.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    } else {
        (0..spec.parse::<u64>().map_err(|_| bad())?).collect()
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

fn run(cli: Cli, root: Option<&Path>) -> Result<(), CliError> {
    match cli.command {
        Command::Run { scenario, profile, seeds, out, dt, workers } => {
            let scenario = Scenario::load(&resolve_path(&scenario, root))?;
            let profiles = profile
                .split(',')
                .map(str::trim)
                .filter(|p| !p.is_empty())
                .map(|p| DriverProfile::resolve(p, root))
                .collect::<Result<Vec<_>, _>>()?;
            for w in profiles.iter().flat_map(DriverProfile::warnings) {
                eprintln!("warning: {w}");
            }
            if profiles.is_empty() {
                return Err(ConfigError::UnknownProfile(profile).into());
            }
            if dt.is_some_and(|d| !(d > 0.0)) {
                return Err(ConfigError::Invalid("dt must be positive".into()).into());
            }
            let spec = BatchSpec { scenario, profiles, seeds: parse_seeds(&seeds)?, dt, workers, metrics: MetricConfig::default() };
            let report = run_batch(&spec, Some(&out))?;
            print!("{}", report.to_text());
        }
        Command::Spawn { bounds, seed, out } => {
            let (bounds, road) = SpawnBounds::load(&resolve_path(&bounds, root))?;
            let sc = spawn_scenario(&bounds, &road, seed)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
            }
            std::fs::write(&out, sc.to_toml()).map_err(|source| CliError::Io { path: out.clone(), source })?;
        }
        Command::Report { logs } => {
            let report = report_from_logs(&logs)?;
            report.write(&logs)?;
            print!("{}", report.to_text());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let root = std::env::var_os(CONFIG_ROOT_VAR).map(PathBuf::from);
    match run(cli, root.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_forms() {
        assert_eq!(parse_seeds("3").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_seeds("4..7").unwrap(), vec![4, 5, 6]);
        assert_eq!(parse_seeds("9, 2,5").unwrap(), vec![9, 2, 5]);
        assert!(parse_seeds("0").is_err());
        assert!(parse_seeds("x").is_err());
    }
}
