//! Speed, comfort and safety percentages per episode, and batch aggregation.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("episode log has no steps")]
    EmptyLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricConfig {
    pub target_speed: f64,
    pub max_error: f64,
    /// Share of jerk in the comfort score; yaw rate gets the rest.
    pub comfort_weight: f64,
    pub max_jerk: f64,
    pub max_yaw_rate: f64,
    pub min_ttc: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self { target_speed: 30.0, max_error: 30.0, comfort_weight: 0.5, max_jerk: 10.0, max_yaw_rate: 0.5, min_ttc: 2.0 }
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn percent(x: f64) -> f64 {
    (100.0 * x).clamp(0.0, 100.0)
}

pub fn speed_score(speeds: &[f64], cfg: &MetricConfig) -> Result<f64, MetricError> {
    let m = mean(speeds.iter().copied()).ok_or(MetricError::EmptyLog)?;
    Ok(percent(1.0 - (m - cfg.target_speed).abs() / cfg.max_error))
}

/// Uses mean absolute jerk and yaw rate.
pub fn comfort_score(jerks: &[f64], yaw_rates: &[f64], cfg: &MetricConfig) -> Result<f64, MetricError> {
    let j = mean(jerks.iter().map(|x| x.abs())).ok_or(MetricError::EmptyLog)?;
    let w = mean(yaw_rates.iter().map(|x| x.abs())).ok_or(MetricError::EmptyLog)?;
    let c = cfg.comfort_weight;
    Ok(percent(1.0 - c * j / cfg.max_jerk - (1.0 - c) * w / cfg.max_yaw_rate))
}

/// Mean of `1 - min_ttc / ttc` over steps with a finite front TTC; 100 when
/// the ego never closed on a leader.
pub fn safety_score(front_ttc: impl IntoIterator<Item = Option<f64>>, cfg: &MetricConfig) -> f64 {
    let terms = front_ttc
        .into_iter()
        .flatten()
        .filter(|t| t.is_finite())
        .map(|t| 1.0 - cfg.min_ttc / t.max(cfg.min_ttc));
    mean(terms).map_or(100.0, percent)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub speed: f64,
    pub comfort: f64,
    pub safety: f64,
}

impl EpisodeMetrics {
    pub fn average(&self) -> f64 {
        (self.speed + self.comfort + self.safety) / 3.0
    }
}

/// Scores of one episode, tagged for aggregation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub scenario: String,
    pub profile: String,
    pub seed: u64,
    pub collided: bool,
    pub completed: bool,
    pub metrics: EpisodeMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub name: String,
    pub episodes: usize,
    pub collisions: usize,
    pub completed: usize,
    pub speed: f64,
    pub comfort: f64,
    pub safety: f64,
    pub average: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orderings {
    pub speed: Vec<String>,
    pub comfort: Vec<String>,
    pub safety: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub profiles: Vec<ProfileSummary>,
    /// Profile names, best first.
    pub orderings: Orderings,
}

/// Sum in sorted order so the result does not depend on episode order.
fn stable_mean(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    xs.into_iter().sum::<f64>() / n as f64
}

fn display_rank(name: &str) -> (usize, String) {
    let rank = ["conservative", "moderate", "agile"].iter().position(|p| *p == name).unwrap_or(usize::MAX);
    (rank, name.to_string())
}

/// Per-profile means and best-first orderings of each metric.
pub fn aggregate(results: &[EpisodeResult]) -> Report {
    let mut groups: BTreeMap<String, Vec<&EpisodeResult>> = BTreeMap::new();
    for r in results {
        groups.entry(r.profile.clone()).or_default().push(r);
    }
    let mut profiles: Vec<ProfileSummary> = groups
        .into_iter()
        .map(|(name, rs)| {
            let speed = stable_mean(rs.iter().map(|r| r.metrics.speed).collect());
            let comfort = stable_mean(rs.iter().map(|r| r.metrics.comfort).collect());
            let safety = stable_mean(rs.iter().map(|r| r.metrics.safety).collect());
            ProfileSummary {
                name,
                episodes: rs.len(),
                collisions: rs.iter().filter(|r| r.collided).count(),
                completed: rs.iter().filter(|r| r.completed).count(),
                speed,
                comfort,
                safety,
                average: (speed + comfort + safety) / 3.0,
            }
        })
        .collect();
    profiles.sort_by_key(|p| display_rank(&p.name));
    let order = |f: fn(&ProfileSummary) -> f64| {
        let mut v: Vec<&ProfileSummary> = profiles.iter().collect();
        v.sort_by(|a, b| f(b).total_cmp(&f(a)).then_with(|| a.name.cmp(&b.name)));
        v.into_iter().map(|p| p.name.clone()).collect()
    };
    let orderings = Orderings { speed: order(|p| p.speed), comfort: order(|p| p.comfort), safety: order(|p| p.safety) };
    Report { profiles, orderings }
}

impl Report {
    pub fn profile(&self, name: &str) -> Option<&ProfileSummary> {
        self.profiles.iter().find(|p| p.name == name)
    }

    /// Aligned text table with one column per profile.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let width = self.profiles.iter().map(|p| p.name.len()).max().unwrap_or(0).max(8) + 2;
        let _ = write!(out, "{:<10}", "Metric");
        for p in &self.profiles {
            let _ = write!(out, "{:>width$}", p.name);
        }
        out.push('\n');
        let rows: [(&str, fn(&ProfileSummary) -> f64); 4] = [
            ("Speed", |p| p.speed),
            ("Comfort", |p| p.comfort),
            ("Safety", |p| p.safety),
            ("Average", |p| p.average),
        ];
        for (label, f) in rows {
            let _ = write!(out, "{label:<10}");
            for p in &self.profiles {
                let _ = write!(out, "{:>width$.2}", f(p));
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<10}", "Episodes");
        for p in &self.profiles {
            let _ = write!(out, "{:>width$}", p.episodes);
        }
        out.push('\n');
        let _ = write!(out, "{:<10}", "Collided");
        for p in &self.profiles {
            let _ = write!(out, "{:>width$}", p.collisions);
        }
        out.push('\n');
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn speed_examples() {
        let cfg = MetricConfig::default();
        assert_eq!(speed_score(&[30.0, 30.0], &cfg).unwrap(), 100.0);
        assert_eq!(speed_score(&[0.0], &cfg).unwrap(), 0.0);
        assert!((speed_score(&[20.0, 28.0], &cfg).unwrap() - 80.0).abs() < 1e-9);
        assert_eq!(speed_score(&[], &cfg), Err(MetricError::EmptyLog));
    }

    #[test]
    fn comfort_examples() {
        let cfg = MetricConfig::default();
        assert_eq!(comfort_score(&[0.0], &[0.0], &cfg).unwrap(), 100.0);
        let full = MetricConfig { comfort_weight: 1.0, ..cfg };
        assert_eq!(comfort_score(&[10.0, -10.0], &[0.3], &full).unwrap(), 0.0);
        // 0.5 * 0.2 + 0.5 * 0.4 = 0.3
        assert!((comfort_score(&[2.0], &[0.2], &cfg).unwrap() - 70.0).abs() < 1e-9);
    }

    #[test]
    fn safety_examples() {
        let cfg = MetricConfig::default();
        assert_eq!(safety_score([Some(2.0), Some(1.0)], &cfg), 0.0);
        assert_eq!(safety_score([None, None], &cfg), 100.0);
        assert!((safety_score([Some(4.0), None, Some(8.0)], &cfg) - 62.5).abs() < 1e-9);
    }

    fn result(profile: &str, seed: u64, m: (f64, f64, f64)) -> EpisodeResult {
        EpisodeResult {
            scenario: "s".into(),
            profile: profile.into(),
            seed,
            collided: false,
            completed: true,
            metrics: EpisodeMetrics { speed: m.0, comfort: m.1, safety: m.2 },
        }
    }

    #[test]
    fn single_episode_means_and_table_orderings() {
        let rs = vec![
            result("agile", 0, (81.0, 47.0, 28.0)),
            result("moderate", 0, (74.0, 75.0, 52.0)),
            result("conservative", 0, (53.0, 83.0, 60.0)),
        ];
        let r = aggregate(&rs);
        assert_eq!(r.profile("agile").unwrap().speed, 81.0);
        assert_eq!(r.orderings.speed, vec!["agile", "moderate", "conservative"]);
        assert_eq!(r.orderings.comfort, vec!["conservative", "moderate", "agile"]);
        assert_eq!(r.orderings.safety, vec!["conservative", "moderate", "agile"]);
        let names: Vec<&str> = r.profiles.iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, vec!["conservative", "moderate", "agile"]);
        assert!(r.to_table().contains("Average"));
    }

    #[test]
    fn identical_logs_give_identical_profiles() {
        let rs: Vec<EpisodeResult> = ["agile", "moderate"].iter().flat_map(|p| (0..3).map(move |s| result(p, s, (50.0, 60.0, 70.0)))).collect();
        let r = aggregate(&rs);
        assert_eq!(r.profiles[0].speed, r.profiles[1].speed);
        assert_eq!(r.profiles[0].safety, r.profiles[1].safety);
    }

    proptest! {
        #[test]
        fn scores_are_percentages(
            speeds in prop::collection::vec(0.0f64..60.0, 1..50),
            jerks in prop::collection::vec(-50.0f64..50.0, 1..50),
            ttcs in prop::collection::vec(prop::option::of(0.01f64..100.0), 0..50),
        ) {
            let cfg = MetricConfig::default();
            let s = speed_score(&speeds, &cfg).unwrap();
            let c = comfort_score(&jerks, &jerks, &cfg).unwrap();
            let f = safety_score(ttcs.clone(), &cfg);
            for x in [s, c, f] {
                prop_assert!((0.0..=100.0).contains(&x));
            }
            let raised: Vec<Option<f64>> = ttcs.iter().map(|t| t.map(|x| x * 1.5)).collect();
            prop_assert!(safety_score(raised, &cfg) >= f - 1e-12);
        }

        #[test]
        fn speed_score_decreases_with_error(e1 in 0.0f64..29.0, de in 0.01f64..1.0) {
            let cfg = MetricConfig::default();
            let a = speed_score(&[30.0 - e1], &cfg).unwrap();
            let b = speed_score(&[30.0 - e1 - de], &cfg).unwrap();
            prop_assert!(b < a);
        }

        #[test]
        fn aggregate_ignores_episode_order(
            ms in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0, 0usize..3), 1..30),
            rot in 0usize..30,
        ) {
            let names = ["agile", "moderate", "conservative"];
            let rs: Vec<EpisodeResult> = ms.iter().enumerate().map(|(i, m)| result(names[m.3], i as u64, (m.0, m.1, m.2))).collect();
            let mut shuffled = rs.clone();
            shuffled.rotate_left(rot % rs.len());
            shuffled.reverse();
            prop_assert_eq!(aggregate(&rs), aggregate(&shuffled));
        }
    }
}
