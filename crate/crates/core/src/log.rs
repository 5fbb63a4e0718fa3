//! Episode logs as JSON lines: a header, one record per step with events
//! interleaved, and a closing summary.

use crate::behavior::{FsmState, ManeuverMode};
use crate::metrics::{EpisodeMetrics, MetricConfig};
use crate::supervisor::{SupervisorAction, VerdictReason};
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("log is missing its {0} record")]
    Missing(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub schema: u32,
    pub scenario: String,
    pub profile: String,
    pub seed: u64,
    pub dt: f64,
    pub track_length: f64,
    pub supervisor_enabled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: u64,
    pub t: f64,
    pub s: f64,
    pub d: f64,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub speed: f64,
    /// Signed longitudinal acceleration, m/s^2.
    pub accel: f64,
    /// Magnitude of the planar jerk, m/s^3.
    pub jerk: f64,
    pub yaw_rate: f64,
    /// Time to collision with the leader in the ego's lane, when closing.
    pub front_ttc: Option<f64>,
    pub lane: usize,
    pub fsm: FsmState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplanReason {
    Scheduled,
    Supervisor,
    SpeedOverride,
    Exhausted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RestartSource {
    /// Continued from the previous plan evaluated at the replan time.
    Plan,
    /// The vehicle had drifted from the plan; restarted from its state.
    Measured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Timeout,
    Collision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Behavior { mode: ManeuverMode, target_lane: usize, v_des: f64 },
    LaneChange { from: usize, to: usize },
    Replan {
        reason: ReplanReason,
        restart: RestartSource,
        candidates: usize,
        feasible: usize,
        cost: Option<f64>,
        fallback: bool,
        t_f: f64,
        d_f: f64,
        v_f: f64,
    },
    Supervisor { action: SupervisorAction, reason: VerdictReason },
    Collision { with: Vec<usize> },
    End { outcome: Outcome },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub k: u64,
    pub t: f64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeSummary {
    pub outcome: Outcome,
    pub duration: f64,
    pub distance: f64,
    pub final_speed: f64,
    pub final_lane: usize,
    pub lane_changes: usize,
    pub left_lane_changes: usize,
    pub right_lane_changes: usize,
    pub replans: usize,
    pub supervisor_replans: usize,
    pub fallbacks: usize,
    pub min_front_ttc: Option<f64>,
    pub metrics: EpisodeMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Header(LogHeader),
    Step(StepRecord),
    Event(EventRecord),
    Summary(EpisodeSummary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub header: LogHeader,
    pub steps: Vec<StepRecord>,
    pub events: Vec<EventRecord>,
    pub summary: EpisodeSummary,
}

impl EpisodeLog {
    /// Records in file order: header, each step followed by its events,
    /// then the summary.
    pub fn records(&self) -> Vec<LogRecord> {
        let mut out = Vec::with_capacity(self.steps.len() + self.events.len() + 2);
        out.push(LogRecord::Header(self.header.clone()));
        let mut ev = self.events.iter().peekable();
        for st in &self.steps {
            out.push(LogRecord::Step(*st));
            while let Some(e) = ev.next_if(|e| e.k <= st.k) {
                out.push(LogRecord::Event(e.clone()));
            }
        }
        out.extend(ev.map(|e| LogRecord::Event(e.clone())));
        out.push(LogRecord::Summary(self.summary.clone()));
        out
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), LogError> {
        for r in self.records() {
            serde_json::to_writer(&mut w, &r).map_err(std::io::Error::from)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, LogError> {
        let mut header = None;
        let mut summary = None;
        let mut steps = Vec::new();
        let mut events = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LogRecord =
                serde_json::from_str(&line).map_err(|e| LogError::Parse { line: i + 1, message: e.to_string() })?;
            match rec {
                LogRecord::Header(h) => header = Some(h),
                LogRecord::Step(s) => steps.push(s),
                LogRecord::Event(e) => events.push(e),
                LogRecord::Summary(s) => summary = Some(s),
            }
        }
        Ok(Self {
            header: header.ok_or(LogError::Missing("header"))?,
            steps,
            events,
            summary: summary.ok_or(LogError::Missing("summary"))?,
        })
    }

    /// Recomputes the scores from the step series.
    pub fn metrics(&self, cfg: &MetricConfig) -> Option<EpisodeMetrics> {
        episode_metrics(&self.steps, cfg)
    }

    pub fn lane_changes(&self) -> impl Iterator<Item = (f64, usize, usize)> + '_ {
        self.events.iter().filter_map(|e| match e.event {
            Event::LaneChange { from, to } => Some((e.t, from, to)),
            _ => None,
        })
    }

    pub fn supervisor_replans(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.event, Event::Replan { reason: ReplanReason::Supervisor, .. }))
            .count()
    }
}

pub fn episode_metrics(steps: &[StepRecord], cfg: &MetricConfig) -> Option<EpisodeMetrics> {
    let speeds: Vec<f64> = steps.iter().map(|s| s.speed).collect();
    let jerks: Vec<f64> = steps.iter().map(|s| s.jerk).collect();
    let yaws: Vec<f64> = steps.iter().map(|s| s.yaw_rate).collect();
    Some(EpisodeMetrics {
        speed: crate::metrics::speed_score(&speeds, cfg).ok()?,
        comfort: crate::metrics::comfort_score(&jerks, &yaws, cfg).ok()?,
        safety: crate::metrics::safety_score(steps.iter().map(|s| s.front_ttc), cfg),
    })
}
