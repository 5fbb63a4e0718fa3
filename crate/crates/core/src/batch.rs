//! Seeded batches of episodes: one log file per (profile, seed) and an
//! aggregate report.

use crate::episode::{run_episode, EpisodeError};
use crate::log::{EpisodeLog, LogError, Outcome};
use crate::metrics::{aggregate, EpisodeResult, MetricConfig, Report};
use crate::scenario::{ConfigError, DriverProfile, Scenario};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const REPORT_JSON: &str = "report.json";
pub const REPORT_TXT: &str = "report.txt";

#[derive(Debug, Error)]
pub enum BatchError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{profile} seed {seed}: {source}")]
    Episode {
        profile: String,
        seed: u64,
        #[source]
        source: EpisodeError,
    },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Log { path: PathBuf, source: LogError },
    #[error("no episode logs in {0}")]
    NoLogs(PathBuf),
}

impl BatchError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| BatchError::Io { path: path.to_path_buf(), source }
    }

    pub fn is_config(&self) -> bool {
        match self {
            BatchError::Config(e) => !e.is_io(),
            BatchError::Episode { source: EpisodeError::Config(e), .. } => !e.is_io(),
            _ => false,
        }
    }

    pub fn is_io(&self) -> bool {
        match self {
            BatchError::Config(e) => e.is_io(),
            BatchError::Io { .. } | BatchError::NoLogs(_) => true,
            BatchError::Log { source: LogError::Io(_), .. } => true,
            _ => false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchSpec {
    pub scenario: Scenario,
    pub profiles: Vec<DriverProfile>,
    pub seeds: Vec<u64>,
    /// Overrides the scenario's step size.
    pub dt: Option<f64>,
    /// Worker threads; `None` uses one per core.
    pub workers: Option<usize>,
    pub metrics: MetricConfig,
}

/// Report file contents: the aggregate plus every episode's scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    #[serde(flatten)]
    pub report: Report,
    pub episodes: Vec<EpisodeResult>,
}

impl BatchReport {
    pub fn from_results(episodes: Vec<EpisodeResult>) -> Self {
        Self { report: aggregate(&episodes), episodes }
    }

    pub fn write(&self, dir: &Path) -> Result<(), BatchError> {
        let json = dir.join(REPORT_JSON);
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        std::fs::write(&json, text).map_err(BatchError::io(&json))?;
        let txt = dir.join(REPORT_TXT);
        std::fs::write(&txt, self.to_text()).map_err(BatchError::io(&txt))?;
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = self.report.to_table();
        for (label, order) in [
            ("speed", &self.report.orderings.speed),
            ("comfort", &self.report.orderings.comfort),
            ("safety", &self.report.orderings.safety),
        ] {
            out.push_str(&format!("{label:<8} {}\n", order.join(" > ")));
        }
        out
    }
}

pub fn log_file_name(scenario: &str, profile: &str, seed: u64) -> String {
    format!("{scenario}_{profile}_seed{seed}.jsonl")
}

pub fn episode_result(log: &EpisodeLog) -> EpisodeResult {
    EpisodeResult {
        scenario: log.header.scenario.clone(),
        profile: log.header.profile.clone(),
        seed: log.header.seed,
        collided: log.summary.outcome == Outcome::Collision,
        completed: log.summary.outcome == Outcome::Completed,
        metrics: log.summary.metrics,
    }
}

/// The concrete scenario a batch runs for `seed`.
pub fn episode_scenario(spec: &BatchSpec, seed: u64) -> Result<Scenario, ConfigError> {
    let mut sc = spec.scenario.instantiate(seed)?;
    if let Some(dt) = spec.dt {
        sc.dt = dt;
    }
    Ok(sc)
}

fn run_one(spec: &BatchSpec, profile: &DriverProfile, seed: u64, out: Option<&Path>) -> Result<EpisodeResult, BatchError> {
    let wrap = |source: EpisodeError| BatchError::Episode { profile: profile.name.clone(), seed, source };
    let sc = episode_scenario(spec, seed).map_err(|e| wrap(e.into()))?;
    let log = run_episode(&sc, profile, seed, &spec.metrics).map_err(wrap)?;
    if let Some(dir) = out {
        let path = dir.join(log_file_name(&spec.scenario.name, &profile.name, seed));
        let file = File::create(&path).map_err(BatchError::io(&path))?;
        log.write_jsonl(BufWriter::new(file)).map_err(|source| BatchError::Log { path: path.clone(), source })?;
    }
    Ok(episode_result(&log))
}

/// Runs every (profile, seed) pair. With `out`, each log is written there
/// as it finishes and the report is written last. Results are ordered by
/// profile, then seed, whatever the worker count.
pub fn run_batch(spec: &BatchSpec, out: Option<&Path>) -> Result<BatchReport, BatchError> {
    spec.scenario.validate()?;
    for p in &spec.profiles {
        p.validate()?;
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(BatchError::io(dir))?;
    }
    let jobs: Vec<(&DriverProfile, u64)> = spec.profiles.iter().flat_map(|p| spec.seeds.iter().map(move |s| (p, *s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers.unwrap_or(0))
        .build()
        .expect("thread pool");
    let results: Result<Vec<EpisodeResult>, BatchError> =
        pool.install(|| jobs.par_iter().map(|(p, seed)| run_one(spec, p, *seed, out)).collect());
    let report = BatchReport::from_results(results?);
    if let Some(dir) = out {
        report.write(dir)?;
    }
    Ok(report)
}

/// Episode logs in `dir`, sorted by file name.
pub fn read_logs(dir: &Path) -> Result<Vec<EpisodeLog>, BatchError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(BatchError::io(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(BatchError::NoLogs(dir.to_path_buf()));
    }
    paths
        .iter()
        .map(|p| {
            let f = File::open(p).map_err(BatchError::io(p))?;
            EpisodeLog::read_jsonl(BufReader::new(f)).map_err(|source| BatchError::Log { path: p.clone(), source })
        })
        .collect()
}

/// Rebuilds the report from the logs in `dir`, in profile then seed order.
pub fn report_from_logs(dir: &Path) -> Result<BatchReport, BatchError> {
    let mut results: Vec<EpisodeResult> = read_logs(dir)?.iter().map(episode_result).collect();
    results.sort_by(|a, b| a.profile.cmp(&b.profile).then(a.seed.cmp(&b.seed)));
    Ok(BatchReport::from_results(results))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(seeds: Vec<u64>) -> BatchSpec {
        let scenario = Scenario { track_length: 60.0, timeout: 20.0, ..Scenario::default() };
        BatchSpec {
            scenario,
            profiles: vec![DriverProfile::preset("agile").unwrap(), DriverProfile::preset("conservative").unwrap()],
            seeds,
            dt: None,
            workers: Some(2),
            metrics: MetricConfig::default(),
        }
    }

    #[test]
    fn file_names_follow_the_pattern() {
        assert_eq!(log_file_name("cs1", "agile", 7), "cs1_agile_seed7.jsonl");
    }

    #[test]
    fn writes_one_log_per_pair_and_a_report() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec(vec![0, 1]);
        let report = run_batch(&spec, Some(dir.path())).unwrap();
        assert_eq!(report.episodes.len(), 4);
        for p in ["agile", "conservative"] {
            for s in [0, 1] {
                assert!(dir.path().join(log_file_name("scenario", p, s)).exists());
            }
        }
        assert!(dir.path().join(REPORT_JSON).exists() && dir.path().join(REPORT_TXT).exists());
        let rebuilt = report_from_logs(dir.path()).unwrap();
        assert_eq!(rebuilt, report);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut one = small_spec(vec![3, 4]);
        one.workers = Some(1);
        let many = small_spec(vec![3, 4]);
        assert_eq!(run_batch(&one, None).unwrap(), run_batch(&many, None).unwrap());
    }

    #[test]
    fn dt_override_applies() {
        let mut spec = small_spec(vec![0]);
        spec.dt = Some(0.1);
        assert_eq!(episode_scenario(&spec, 0).unwrap().dt, 0.1);
    }

    #[test]
    fn empty_log_directory_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(report_from_logs(dir.path()), Err(BatchError::NoLogs(_))));
    }
}
