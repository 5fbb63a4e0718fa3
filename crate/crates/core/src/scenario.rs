//! Scenario and driver-profile configuration, and seeded random scenarios.

use crate::behavior::{BpConfig, IdmParams, MobilParams};
use crate::control::TrackerGains;
use crate::geometry::{ReferencePath, Waypoint3};
use crate::planner::PlannerConfig;
use crate::road::LaneLayout;
use crate::supervisor::SupervisorConfig;
use crate::vehicle::{BicycleModel, Dimensions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("unknown driver profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot place vehicles within the bounds: {0}")]
    InfeasibleBounds(String),
}

impl ConfigError {
    pub fn is_io(&self) -> bool {
        matches!(self, ConfigError::Io { .. })
    }
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    toml::from_str(&text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

/// Route centerline geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RouteSpec {
    Straight { length: f64 },
    /// Straight lead-in, a left arc, then straight to `length`.
    Curved { length: f64, radius: f64, lead_in: f64, arc_length: f64 },
    /// Waypoint file, resolved relative to the scenario file.
    File { path: PathBuf },
}

impl Default for RouteSpec {
    fn default() -> Self {
        RouteSpec::Curved { length: 900.0, radius: 800.0, lead_in: 150.0, arc_length: 300.0 }
    }
}

const ROUTE_SPACING: f64 = 5.0;

impl RouteSpec {
    pub fn build(&self, base_dir: Option<&Path>) -> Result<ReferencePath, ConfigError> {
        let invalid = |e: crate::geometry::GeometryError| ConfigError::Invalid(format!("route: {e}"));
        match self {
            RouteSpec::Straight { length } => ReferencePath::straight(*length, ROUTE_SPACING).map_err(invalid),
            RouteSpec::Curved { length, radius, lead_in, arc_length } => {
                if !(*radius > 0.0 && *lead_in >= 0.0 && *arc_length >= 0.0 && lead_in + arc_length <= *length) {
                    return Err(ConfigError::Invalid("route: curved segment does not fit the length".into()));
                }
                let mut pts = Vec::new();
                let mut s = 0.0;
                while s <= *length + 1e-9 {
                    let p = if s <= *lead_in {
                        [s, 0.0]
                    } else if s <= lead_in + arc_length {
                        let phi = (s - lead_in) / radius;
                        [lead_in + radius * phi.sin(), radius * (1.0 - phi.cos())]
                    } else {
                        let phi = arc_length / radius;
                        let rest = s - lead_in - arc_length;
                        [lead_in + radius * phi.sin() + rest * phi.cos(), radius * (1.0 - phi.cos()) + rest * phi.sin()]
                    };
                    pts.push(Waypoint3::new(p[0], p[1], 0.0));
                    s += ROUTE_SPACING;
                }
                ReferencePath::from_waypoints(&pts).map_err(invalid)
            }
            RouteSpec::File { path } => {
                let full = match base_dir {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                ReferencePath::load(&full).map_err(|e| match e {
                    crate::geometry::GeometryError::RouteFile(m) => ConfigError::Parse { path: full.clone(), message: m },
                    other => invalid(other),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadSpec {
    pub lane_count: usize,
    pub lane_width: f64,
    pub speed_limit: f64,
    pub route: RouteSpec,
}

impl Default for RoadSpec {
    fn default() -> Self {
        let l = LaneLayout::default();
        Self { lane_count: l.lane_count, lane_width: l.lane_width, speed_limit: l.speed_limit, route: RouteSpec::default() }
    }
}

impl RoadSpec {
    pub fn layout(&self) -> LaneLayout {
        LaneLayout { lane_count: self.lane_count, lane_width: self.lane_width, speed_limit: self.speed_limit }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EgoSpawn {
    pub lane: usize,
    /// Start position along the route, m.
    pub s: f64,
    pub speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpawn {
    pub lane: usize,
    /// Position along the route, m.
    pub s: f64,
    pub speed: f64,
    /// IDM desired speed; defaults to the initial speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_speed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
}

impl VehicleSpawn {
    pub fn dims(&self) -> Dimensions {
        let d = Dimensions::default();
        Dimensions { length: self.length.unwrap_or(d.length), width: self.width.unwrap_or(d.width) }
    }
}

/// Scripted lateral move of one traffic vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutInSpec {
    /// Index into the vehicle list.
    pub vehicle: usize,
    pub start_time: f64,
    pub duration: f64,
    pub to_lane: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..=self.max)
        } else {
            self.min
        }
    }

    fn valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }
}

/// Bounds for seeded random scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpawnBounds {
    pub vehicle_count_min: usize,
    pub vehicle_count_max: usize,
    /// Vehicle positions relative to the ego start, m.
    pub relative_s: Range,
    /// Speed range per lane (index 0 is lane 1); `speed` is used if empty.
    pub lane_speeds: Vec<Range>,
    pub speed: Range,
    /// Offset of each vehicle's IDM desired speed from its initial speed;
    /// zero width keeps them cruising.
    pub target_offset: Range,
    /// Ego lane; random when absent.
    pub ego_lane: Option<usize>,
    pub ego_speed: Range,
    pub ego_s: f64,
    /// Minimum bumper-to-bumper gap between vehicles sharing a lane, m.
    pub min_gap: f64,
    /// Minimum initial time to collision between any two vehicles sharing
    /// a lane, the ego included, s.
    pub min_ttc: f64,
    pub max_attempts: usize,
}

impl Default for SpawnBounds {
    fn default() -> Self {
        Self {
            vehicle_count_min: 6,
            vehicle_count_max: 10,
            relative_s: Range { min: -40.0, max: 220.0 },
            lane_speeds: Vec::new(),
            speed: Range { min: 14.0, max: 28.0 },
            target_offset: Range { min: 0.0, max: 0.0 },
            ego_lane: None,
            ego_speed: Range { min: 16.0, max: 24.0 },
            ego_s: 50.0,
            min_gap: 10.0,
            min_ttc: 4.0,
            max_attempts: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Scenario {
    pub name: String,
    /// Distance the ego must cover from its start, m.
    pub track_length: f64,
    pub timeout: f64,
    pub dt: f64,
    pub road: RoadSpec,
    pub ego: EgoSpawn,
    pub vehicles: Vec<VehicleSpawn>,
    pub cut_ins: Vec<CutInSpec>,
    /// When present, `vehicles` and `ego` are drawn per seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<SpawnBounds>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            name: "scenario".into(),
            track_length: 500.0,
            timeout: 120.0,
            dt: 0.05,
            road: RoadSpec::default(),
            ego: EgoSpawn { lane: 2, s: 50.0, speed: 20.0 },
            vehicles: Vec::new(),
            cut_ins: Vec::new(),
            random: None,
            base_dir: None,
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut sc: Scenario = read_toml(path)?;
        sc.base_dir = path.parent().map(Path::to_path_buf);
        if sc.name == Scenario::default().name {
            if let Some(stem) = path.file_stem() {
                sc.name = stem.to_string_lossy().into_owned();
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let layout = self.road.layout();
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if layout.lane_count == 0 || !(layout.lane_width > 0.0) || !(layout.speed_limit > 0.0) {
            return bad("road needs at least one lane, positive width and speed limit".into());
        }
        if !(self.track_length > 0.0) || !(self.timeout > 0.0) || !(self.dt > 0.0) {
            return bad("track_length, timeout and dt must be positive".into());
        }
        if !layout.is_valid_lane(self.ego.lane) || self.ego.speed < 0.0 {
            return bad(format!("ego lane {} or speed {} invalid", self.ego.lane, self.ego.speed));
        }
        for (i, v) in self.vehicles.iter().enumerate() {
            if !layout.is_valid_lane(v.lane) || v.speed < 0.0 || v.target_speed.is_some_and(|t| !(t > 0.0)) {
                return bad(format!("vehicle {i}: invalid lane, speed or target speed"));
            }
        }
        for c in &self.cut_ins {
            if c.vehicle >= self.vehicles.len() || !layout.is_valid_lane(c.to_lane) || !(c.duration > 0.0) {
                return bad(format!("cut-in for vehicle {} is invalid", c.vehicle));
            }
        }
        if let Some(b) = &self.random {
            b.validate(&layout)?;
        }
        Ok(())
    }

    /// The concrete scenario for `seed`: random scenarios are drawn from
    /// their bounds, fixed ones are returned unchanged.
    pub fn instantiate(&self, seed: u64) -> Result<Scenario, ConfigError> {
        match &self.random {
            None => Ok(self.clone()),
            Some(bounds) => {
                let mut sc = spawn_scenario(bounds, &self.road, seed)?;
                sc.name = self.name.clone();
                sc.track_length = self.track_length;
                sc.timeout = self.timeout;
                sc.dt = self.dt;
                sc.base_dir = self.base_dir.clone();
                Ok(sc)
            }
        }
    }
}

impl SpawnBounds {
    pub fn load(path: &Path) -> Result<(Self, RoadSpec), ConfigError> {
        #[derive(Deserialize)]
        struct File {
            #[serde(default)]
            road: RoadSpec,
            #[serde(default)]
            bounds: SpawnBounds,
        }
        let f: File = read_toml(path)?;
        f.bounds.validate(&f.road.layout())?;
        Ok((f.bounds, f.road))
    }

    pub fn validate(&self, layout: &LaneLayout) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(format!("bounds: {m}")));
        if self.vehicle_count_min > self.vehicle_count_max {
            return bad("vehicle_count_min exceeds vehicle_count_max");
        }
        if !self.relative_s.valid() || !self.speed.valid() || !self.target_offset.valid() || !self.ego_speed.valid() || self.lane_speeds.iter().any(|r| !r.valid()) {
            return bad("ranges need finite min <= max");
        }
        if self.speed.min < 0.0 || self.ego_speed.min < 0.0 || self.lane_speeds.iter().any(|r| r.min < 0.0) {
            return bad("speeds must be nonnegative");
        }
        if !self.lane_speeds.is_empty() && self.lane_speeds.len() != layout.lane_count {
            return bad("lane_speeds needs one range per lane");
        }
        if self.ego_lane.is_some_and(|l| !layout.is_valid_lane(l)) {
            return bad("ego_lane is not on the road");
        }
        if !(self.min_gap >= 0.0) || !(self.min_ttc >= 0.0) {
            return bad("min_gap and min_ttc must be nonnegative");
        }
        Ok(())
    }

    fn lane_speed(&self, lane: usize) -> Range {
        self.lane_speeds.get(lane - 1).copied().unwrap_or(self.speed)
    }
}

/// Uniform draws within the bounds, rejecting placements that crowd a
/// vehicle (or the ego) in the same lane: closer than the minimum gap, or
/// closing on it faster than the minimum time to collision allows.
pub fn spawn_scenario(bounds: &SpawnBounds, road: &RoadSpec, seed: u64) -> Result<Scenario, ConfigError> {
    let layout = road.layout();
    bounds.validate(&layout)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ego_lane = bounds.ego_lane.unwrap_or_else(|| rng.random_range(1..=layout.lane_count));
    let ego_speed = bounds.ego_speed.sample(&mut rng);
    let ego = EgoSpawn { lane: ego_lane, s: bounds.ego_s, speed: ego_speed };
    let count = rng.random_range(bounds.vehicle_count_min..=bounds.vehicle_count_max);
    let len = Dimensions::default().length;
    let mut placed: Vec<(usize, f64, f64)> = vec![(ego_lane, ego.s, ego.speed)];
    let mut vehicles = Vec::with_capacity(count);
    for i in 0..count {
        let mut ok = false;
        for _ in 0..bounds.max_attempts.max(1) {
            let lane = rng.random_range(1..=layout.lane_count);
            let s = bounds.ego_s + bounds.relative_s.sample(&mut rng);
            let speed = bounds.lane_speed(lane).sample(&mut rng);
            let target = speed + bounds.target_offset.sample(&mut rng);
            let compatible = |&(l, ps, pv): &(usize, f64, f64)| {
                let gap = (s - ps).abs() - len;
                let closing = if s > ps { pv - speed } else { speed - pv };
                l != lane || (gap >= bounds.min_gap && (closing <= 0.0 || gap >= bounds.min_ttc * closing))
            };
            let clear = placed.iter().all(compatible);
            if clear && s >= 0.5 * len {
                placed.push((lane, s, speed));
                let target_speed = (target != speed).then_some(target.max(1.0));
                vehicles.push(VehicleSpawn { lane, s, speed, target_speed, length: None, width: None });
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(ConfigError::InfeasibleBounds(format!("vehicle {i} of {count} could not be placed")));
        }
    }
    Ok(Scenario {
        name: format!("random-{seed}"),
        road: road.clone(),
        ego,
        vehicles,
        ..Scenario::default()
    })
}

/// Headways below this draw a warning, s.
pub const UNSAFE_HEADWAY: f64 = 0.5;

/// Everything that configures the ego's driving stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriverProfile {
    pub name: String,
    pub idm: IdmParams,
    pub mobil: MobilParams,
    pub behavior: BpConfig,
    pub planner: PlannerConfig,
    pub supervisor: SupervisorConfig,
    pub tracker: TrackerGains,
    pub vehicle: BicycleModel,
    /// Period of scheduled replans, s.
    pub lp_period: f64,
    /// Traffic farther than this along the road is not perceived, m.
    pub perception_range: f64,
    pub replan_tolerance: ReplanTolerance,
}

/// Measured-state deviation beyond which a replan restarts from the
/// measured state instead of the previous plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReplanTolerance {
    pub s: f64,
    pub d: f64,
    pub v: f64,
}

impl Default for ReplanTolerance {
    fn default() -> Self {
        Self { s: 2.0, d: 0.5, v: 2.0 }
    }
}

pub const PRESET_NAMES: [&str; 3] = ["agile", "moderate", "conservative"];

impl Default for DriverProfile {
    fn default() -> Self {
        let mut planner = PlannerConfig::default();
        planner.limits.longitudinal_scale = 2.5;
        Self {
            name: "moderate".into(),
            idm: IdmParams { time_headway: 1.5, ..IdmParams::default() },
            mobil: MobilParams { politeness: 0.5, ..MobilParams::default() },
            behavior: BpConfig::default(),
            planner,
            supervisor: SupervisorConfig::default(),
            tracker: TrackerGains::default(),
            vehicle: BicycleModel::default(),
            lp_period: 0.5,
            perception_range: 150.0,
            replan_tolerance: ReplanTolerance::default(),
        }
    }
}

impl DriverProfile {
    /// Built-in styles; they differ only in headway and politeness.
    pub fn preset(name: &str) -> Option<Self> {
        let (headway, politeness) = match name {
            "agile" => (0.7, 0.1),
            "moderate" => (1.5, 0.5),
            "conservative" => (2.5, 0.9),
            _ => return None,
        };
        let mut p = DriverProfile { name: name.into(), ..Default::default() };
        p.idm.time_headway = headway;
        p.mobil.politeness = politeness;
        Some(p)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let mut p: DriverProfile = read_toml(path)?;
        if p.name == DriverProfile::default().name {
            if let Some(stem) = path.file_stem() {
                p.name = stem.to_string_lossy().into_owned();
            }
        }
        p.validate()?;
        Ok(p)
    }

    /// A preset name, or a path to a profile file.
    pub fn resolve(spec: &str, root: Option<&Path>) -> Result<Self, ConfigError> {
        if let Some(p) = Self::preset(spec) {
            return Ok(p);
        }
        let path = resolve_path(Path::new(spec), root);
        if path.exists() {
            return Self::load(&path);
        }
        Err(ConfigError::UnknownProfile(spec.into()))
    }

    /// Valid but risky settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.idm.time_headway < UNSAFE_HEADWAY {
            out.push(format!(
                "profile {}: time headway {} s is below {UNSAFE_HEADWAY} s and prone to collisions",
                self.name, self.idm.time_headway
            ));
        }
        out
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let wrap = |e: String| ConfigError::Invalid(format!("profile {}: {e}", self.name));
        self.idm.validate().map_err(|e| wrap(e.to_string()))?;
        self.mobil.validate().map_err(|e| wrap(e.to_string()))?;
        self.planner.limits.validate().map_err(|e| wrap(e.to_string()))?;
        self.planner.weights.validate().map_err(|e| wrap(e.to_string()))?;
        if !(self.lp_period > 0.0) || !(self.behavior.period > 0.0) || !(self.perception_range > 0.0) {
            return Err(wrap("periods and perception range must be positive".into()));
        }
        if !(self.supervisor.ttc_threshold >= 0.0) || !(self.supervisor.headway_scale >= 1.0) {
            return Err(wrap("supervisor needs ttc_threshold >= 0 and headway_scale >= 1".into()));
        }
        if !(self.planner.grid.max_arrival_time() > 0.0) {
            return Err(wrap("terminal grid needs a positive arrival time".into()));
        }
        Ok(())
    }
}

/// Joins relative paths onto `root` when one is given.
pub fn resolve_path(path: &Path, root: Option<&Path>) -> PathBuf {
    match root {
        Some(r) if path.is_relative() => r.join(path),
        _ => path.to_path_buf(),
    }
}
