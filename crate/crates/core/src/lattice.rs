//! Candidate trajectory generation in the Frenet frame.
//!
//! Each lattice pairs a quintic lateral polynomial `d(t)` with a quartic
//! longitudinal polynomial `s(t)`. Lateral motion starts from the current
//! `(d, d', d'')` and ends at rest on a lane center `d_f`; longitudinal motion
//! starts from `(s, s', s'')` and ends at speed `v_f` with zero acceleration,
//! leaving the terminal position free. Varying `(t_f, d_f, v_f)` over a grid
//! produces the candidate set.

use crate::behavior::ManeuverCommand;
use crate::geometry::{curvature_heading, fd_derivatives, FrenetState, GeometryError, ReferencePath};
pub use crate::polynomial::Polynomial;
use crate::road::LaneLayout;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("boundary-value system is singular for horizon {0}")]
    SingularSystem(f64),
    #[error("terminal grid has no points")]
    EmptyGrid,
    #[error("sample period {dt} must be positive and not exceed the horizon {horizon}")]
    InvalidSampling { dt: f64, horizon: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

const MIN_HORIZON: f64 = 1e-6;

fn check_horizon(t: f64) -> Result<(), LatticeError> {
    if t > MIN_HORIZON && t.is_finite() {
        Ok(())
    } else {
        Err(LatticeError::SingularSystem(t))
    }
}

/// Quintic with `d(0)=d0, d'(0)=d0_dot, d''(0)=d0_ddot, d(T)=df, d'(T)=d''(T)=0`.
///
/// The first three coefficients follow from the start conditions; the
/// remaining 3x3 block of the boundary system is solved in closed form.
pub fn solve_quintic(d0: f64, d0_dot: f64, d0_ddot: f64, df: f64, horizon: f64) -> Result<Polynomial, LatticeError> {
    check_horizon(horizon)?;
    let t = horizon;
    let (t2, t3) = (t * t, t * t * t);
    let c2 = 0.5 * d0_ddot;
    let h = df - (d0 + d0_dot * t + c2 * t2);
    let dv = -(d0_dot + d0_ddot * t);
    let da = -d0_ddot;
    let c3 = (10.0 * h - 4.0 * dv * t + 0.5 * da * t2) / t3;
    let c4 = (-15.0 * h + 7.0 * dv * t - da * t2) / (t3 * t);
    let c5 = (6.0 * h - 3.0 * dv * t + 0.5 * da * t2) / (t3 * t2);
    Ok(Polynomial::new(vec![d0, d0_dot, c2, c3, c4, c5]))
}

/// Quartic with `s(0)=s0, s'(0)=s0_dot, s''(0)=s0_ddot, s'(T)=vf, s''(T)=0`.
pub fn solve_quartic(s0: f64, s0_dot: f64, s0_ddot: f64, vf: f64, horizon: f64) -> Result<Polynomial, LatticeError> {
    check_horizon(horizon)?;
    let t = horizon;
    let c2 = 0.5 * s0_ddot;
    let dv = vf - s0_dot - s0_ddot * t;
    let da = -s0_ddot;
    let c3 = (3.0 * dv - da * t) / (3.0 * t * t);
    let c4 = (da * t - 2.0 * dv) / (4.0 * t * t * t);
    Ok(Polynomial::new(vec![s0, s0_dot, c2, c3, c4]))
}

/// Terminal manifold point of a lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Terminal {
    pub t_f: f64,
    pub d_f: f64,
    pub v_f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub s_poly: Polynomial,
    pub d_poly: Polynomial,
    pub horizon: f64,
    pub terminal: Terminal,
}

impl Trajectory {
    pub fn new(start: &FrenetState, terminal: Terminal) -> Result<Self, LatticeError> {
        let d_poly = solve_quintic(start.d, start.d_dot, start.d_ddot, terminal.d_f, terminal.t_f)?;
        let s_poly = solve_quartic(start.s, start.s_dot, start.s_ddot, terminal.v_f, terminal.t_f)?;
        Ok(Self { s_poly, d_poly, horizon: terminal.t_f, terminal })
    }

    /// Frenet state at trajectory time `t` (t = 0 is the trajectory start).
    pub fn state_at(&self, t: f64) -> FrenetState {
        FrenetState {
            s: self.s_poly.eval(t),
            s_dot: self.s_poly.eval_derivative(1, t),
            s_ddot: self.s_poly.eval_derivative(2, t),
            d: self.d_poly.eval(t),
            d_dot: self.d_poly.eval_derivative(1, t),
            d_ddot: self.d_poly.eval_derivative(2, t),
        }
    }

    /// Largest boundary-condition residual, each term scaled by
    /// `max(1, |expected|)`.
    pub fn boundary_residual(&self, start: &FrenetState) -> f64 {
        let t = self.horizon;
        let rel = |got: f64, want: f64| (got - want).abs() / want.abs().max(1.0);
        [
            rel(self.d_poly.eval(0.0), start.d),
            rel(self.d_poly.eval_derivative(1, 0.0), start.d_dot),
            rel(self.d_poly.eval_derivative(2, 0.0), start.d_ddot),
            rel(self.d_poly.eval(t), self.terminal.d_f),
            rel(self.d_poly.eval_derivative(1, t), 0.0),
            rel(self.d_poly.eval_derivative(2, t), 0.0),
            rel(self.s_poly.eval(0.0), start.s),
            rel(self.s_poly.eval_derivative(1, 0.0), start.s_dot),
            rel(self.s_poly.eval_derivative(2, 0.0), start.s_ddot),
            rel(self.s_poly.eval_derivative(1, t), self.terminal.v_f),
            rel(self.s_poly.eval_derivative(2, t), 0.0),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Grid axis given as an explicit list or an inclusive `(min, max, step)` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    List(Vec<f64>),
    Range { min: f64, max: f64, step: f64 },
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            AxisSpec::List(v) => v.clone(),
            AxisSpec::Range { min, max, step } => {
                if !(*step > 0.0) || max < min {
                    return Vec::new();
                }
                let n = ((max - min) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| min + i as f64 * step).collect()
            }
        }
    }
}

/// Discretization of the terminal manifold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TerminalGrid {
    /// Arrival times t_f, s.
    pub arrival_times: AxisSpec,
    /// Lane indices relative to the commanded target lane.
    pub lane_offsets: Vec<i64>,
    /// Terminal speeds relative to the commanded v_des, m/s.
    pub speed_offsets: AxisSpec,
}

impl Default for TerminalGrid {
    fn default() -> Self {
        Self {
            arrival_times: AxisSpec::List(vec![2.0, 3.0, 4.0, 5.0]),
            lane_offsets: vec![-1, 0, 1],
            speed_offsets: AxisSpec::List(vec![-4.0, -2.0, 0.0, 2.0]),
        }
    }
}

impl TerminalGrid {
    pub fn max_arrival_time(&self) -> f64 {
        self.arrival_times.values().into_iter().fold(0.0, f64::max)
    }

    /// The same grid with arrival times capped at `t_max`. The shortest
    /// arrival time is kept when none fits.
    pub fn arriving_within(&self, t_max: f64) -> Self {
        let times = self.arrival_times.values();
        let mut kept: Vec<f64> = times.iter().copied().filter(|t| *t <= t_max).collect();
        if kept.is_empty() {
            kept.extend(times.into_iter().reduce(f64::min));
        }
        Self { arrival_times: AxisSpec::List(kept), ..self.clone() }
    }

    /// Terminal lateral positions: lane centers around the target lane plus
    /// the ego's current lane, restricted to the road.
    pub fn lateral_targets(&self, command: &ManeuverCommand, current_lane: usize, layout: &LaneLayout) -> Vec<f64> {
        let mut lanes: Vec<usize> = self
            .lane_offsets
            .iter()
            .map(|o| command.target_lane as i64 + o)
            .filter(|l| *l >= 1 && *l <= layout.lane_count as i64)
            .map(|l| l as usize)
            .collect();
        if layout.is_valid_lane(current_lane) {
            lanes.push(current_lane);
        }
        lanes.sort_unstable();
        lanes.dedup();
        lanes.into_iter().map(|l| layout.lane_center(l)).collect()
    }

    pub fn terminals(&self, command: &ManeuverCommand, current_lane: usize, layout: &LaneLayout, v_max: f64) -> Vec<Terminal> {
        let times: Vec<f64> = self.arrival_times.values().into_iter().filter(|t| *t > MIN_HORIZON).collect();
        let lateral = self.lateral_targets(command, current_lane, layout);
        let speeds: Vec<f64> = self
            .speed_offsets
            .values()
            .into_iter()
            .map(|o| command.v_des + o)
            .filter(|v| *v >= 0.0 && *v <= v_max + 1e-9)
            .collect();
        let mut out = Vec::with_capacity(times.len() * lateral.len() * speeds.len());
        for &t_f in &times {
            for &d_f in &lateral {
                for &v_f in &speeds {
                    out.push(Terminal { t_f, d_f, v_f });
                }
            }
        }
        out
    }
}

/// One trajectory per terminal-grid point, all starting from `start`.
pub fn generate_lattices(
    start: &FrenetState,
    command: &ManeuverCommand,
    grid: &TerminalGrid,
    layout: &LaneLayout,
    v_max: f64,
) -> Result<Vec<Trajectory>, LatticeError> {
    if grid.arrival_times.values().is_empty() || grid.lane_offsets.is_empty() || grid.speed_offsets.values().is_empty() {
        return Err(LatticeError::EmptyGrid);
    }
    let current_lane = layout.lane_of(start.d);
    grid.terminals(command, current_lane, layout, v_max)
        .into_iter()
        .map(|term| Trajectory::new(start, term))
        .collect()
}

/// Time series derived from a lattice.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectorySamples {
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub s: Vec<f64>,
    pub d: Vec<f64>,
    /// Cartesian speed, m/s.
    pub v: Vec<f64>,
    /// Cartesian acceleration magnitude, m/s^2.
    pub a: Vec<f64>,
    /// Rate of change of speed (signed), m/s^2.
    pub a_long: Vec<f64>,
    /// Frenet jerk magnitude, m/s^3.
    pub jerk: Vec<f64>,
    pub curvature: Vec<f64>,
    pub heading: Vec<f64>,
    pub yaw_rate: Vec<f64>,
}

impl TrajectorySamples {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Samples a lattice every `dt` seconds over `[0, ceil(T/dt) dt]`.
///
/// Positions go through the forward transform. Speed and acceleration are
/// the exact curvilinear kinematics of a point at offset `d` from a curve of
/// curvature `k`:
///
/// ```text
/// v_t = s' (1 - k d)                        v_n = d'
/// a_t = s'' (1 - k d) - k_s s'^2 d - 2 k s' d'
/// a_n = k s'^2 (1 - k d) + d''
/// ```
///
/// Jerk uses the Frenet third derivatives and ignores curvature terms.
pub fn sample_trajectory(traj: &Trajectory, path: &ReferencePath, dt: f64) -> Result<TrajectorySamples, LatticeError> {
    if !(dt > 0.0) || traj.horizon + 1e-9 < dt {
        return Err(LatticeError::InvalidSampling { dt, horizon: traj.horizon });
    }
    let steps = (traj.horizon / dt - 1e-9).ceil() as usize;
    let n = steps + 1;
    let mut out = TrajectorySamples {
        times: Vec::with_capacity(n),
        x: Vec::with_capacity(n),
        y: Vec::with_capacity(n),
        z: Vec::with_capacity(n),
        s: Vec::with_capacity(n),
        d: Vec::with_capacity(n),
        v: Vec::with_capacity(n),
        a: Vec::with_capacity(n),
        a_long: Vec::with_capacity(n),
        jerk: Vec::with_capacity(n),
        ..Default::default()
    };
    for i in 0..n {
        let t = i as f64 * dt;
        let st = traj.state_at(t);
        let p = path.to_cartesian(&st)?;
        let (k, k_s) = path.curvature_and_rate(st.s);
        let scale = 1.0 - k * st.d;
        let v_t = st.s_dot * scale;
        let v_n = st.d_dot;
        let a_t = st.s_ddot * scale - k_s * st.s_dot * st.s_dot * st.d - 2.0 * k * st.s_dot * st.d_dot;
        let a_n = k * st.s_dot * st.s_dot * scale + st.d_ddot;
        let v = v_t.hypot(v_n);
        out.times.push(t);
        out.x.push(p.x);
        out.y.push(p.y);
        out.z.push(p.z);
        out.s.push(st.s);
        out.d.push(st.d);
        out.v.push(v);
        out.a.push(a_t.hypot(a_n));
        out.a_long.push(if v > 1e-9 { (v_t * a_t + v_n * a_n) / v } else { a_t });
        out.jerk.push(traj.s_poly.eval_derivative(3, t).hypot(traj.d_poly.eval_derivative(3, t)));
    }
    let ch = curvature_heading(&out.x, &out.y, dt)?;
    let mut unwrapped = ch.heading.clone();
    for i in 1..unwrapped.len() {
        let step = crate::geometry::wrap_angle(unwrapped[i] - unwrapped[i - 1]);
        unwrapped[i] = unwrapped[i - 1] + step;
    }
    let (mut yaw_rate, _) = fd_derivatives(&unwrapped, dt);
    for (w, deg) in yaw_rate.iter_mut().zip(&ch.degenerate) {
        if *deg {
            *w = 0.0;
        }
    }
    out.curvature = ch.curvature;
    out.heading = ch.heading;
    out.yaw_rate = yaw_rate;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::ManeuverMode;
    use proptest::prelude::*;

    #[test]
    fn null_boundary_gives_zero_quintic() {
        let p = solve_quintic(0.0, 0.0, 0.0, 0.0, 4.0).unwrap();
        assert!(p.coeffs().iter().all(|c| *c == 0.0));
    }

    #[test]
    fn lane_change_quintic_is_minimum_jerk_profile() {
        let p = solve_quintic(0.0, 0.0, 0.0, 3.5, 4.0).unwrap();
        for i in 0..=40 {
            let t = i as f64 * 0.1;
            let u = t / 4.0;
            let expect = 3.5 * (10.0 * u.powi(3) - 15.0 * u.powi(4) + 6.0 * u.powi(5));
            assert!((p.eval(t) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_cruise_quartic() {
        let p = solve_quartic(0.0, 20.0, 0.0, 20.0, 5.0).unwrap();
        for t in [0.0, 1.3, 5.0] {
            assert!((p.eval(t) - 20.0 * t).abs() < 1e-12);
        }
    }

    #[test]
    fn speed_up_quartic_profile() {
        let p = solve_quartic(0.0, 20.0, 0.0, 25.0, 5.0).unwrap();
        for i in 0..=50 {
            let t = i as f64 * 0.1;
            let u = t / 5.0;
            let v = 20.0 + 5.0 * (3.0 * u * u - 2.0 * u.powi(3));
            assert!((p.eval_derivative(1, t) - v).abs() < 1e-12);
        }
        assert!(p.eval_derivative(2, 5.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_horizon_is_rejected() {
        assert!(matches!(solve_quintic(0.0, 0.0, 0.0, 1.0, 0.0), Err(LatticeError::SingularSystem(_))));
        assert!(matches!(solve_quartic(0.0, 0.0, 0.0, 1.0, -1.0), Err(LatticeError::SingularSystem(_))));
    }

    fn command(lane: usize, v_des: f64) -> ManeuverCommand {
        let layout = LaneLayout::default();
        ManeuverCommand { mode: ManeuverMode::StayOnLane, target_lane: lane, d_des: layout.lane_center(lane), v_des }
    }

    #[test]
    fn grid_cardinality_and_lane_restriction() {
        let layout = LaneLayout::default();
        let start = FrenetState { s: 10.0, s_dot: 20.0, d: layout.lane_center(2), ..Default::default() };
        let lattices = generate_lattices(&start, &command(2, 20.0), &TerminalGrid::default(), &layout, 30.0).unwrap();
        assert_eq!(lattices.len(), 48);
        let mut dfs: Vec<f64> = lattices.iter().map(|t| t.terminal.d_f).collect();
        dfs.sort_by(f64::total_cmp);
        dfs.dedup();
        assert_eq!(dfs, vec![1.75, 5.25, 8.75]);
        for t in &lattices {
            assert!(t.boundary_residual(&start) < 1e-9);
        }
    }

    #[test]
    fn edge_lane_and_speed_clipping() {
        let layout = LaneLayout::default();
        let start = FrenetState { s: 10.0, s_dot: 2.0, d: layout.lane_center(1), ..Default::default() };
        // Lane 0 does not exist; v_des - 4 and v_des - 2 are negative.
        let lattices = generate_lattices(&start, &command(1, 1.0), &TerminalGrid::default(), &layout, 30.0).unwrap();
        assert_eq!(lattices.len(), 4 * 2 * 2);
        assert!(lattices.iter().all(|t| t.terminal.v_f >= 0.0));
    }

    #[test]
    fn command_lane_change_includes_current_lane() {
        let layout = LaneLayout::default();
        let start = FrenetState { s: 10.0, s_dot: 20.0, d: layout.lane_center(2), ..Default::default() };
        let cmd = ManeuverCommand { mode: ManeuverMode::LaneChangeLeft, target_lane: 3, d_des: layout.lane_center(3), v_des: 20.0 };
        let grid = TerminalGrid { lane_offsets: vec![0], ..Default::default() };
        let dfs = grid.lateral_targets(&cmd, layout.lane_of(start.d), &layout);
        assert_eq!(dfs, vec![5.25, 8.75]);
    }

    #[test]
    fn empty_grid_is_an_error() {
        let layout = LaneLayout::default();
        let grid = TerminalGrid { arrival_times: AxisSpec::List(vec![]), ..Default::default() };
        let e = generate_lattices(&FrenetState::default(), &command(1, 10.0), &grid, &layout, 30.0).unwrap_err();
        assert_eq!(e, LatticeError::EmptyGrid);
    }

    #[test]
    fn arrival_cap_keeps_short_times() {
        let g = TerminalGrid::default();
        assert_eq!(g.arriving_within(3.5).arrival_times.values(), vec![2.0, 3.0]);
        assert_eq!(g.arriving_within(0.4).arrival_times.values(), vec![2.0]);
        assert_eq!(g.arriving_within(9.0).arrival_times.values(), g.arrival_times.values());
        assert_eq!(g.arriving_within(1.0).lane_offsets, g.lane_offsets);
    }

    #[test]
    fn axis_ranges_are_inclusive() {
        let r = AxisSpec::Range { min: 2.0, max: 5.0, step: 1.0 };
        assert_eq!(r.values(), vec![2.0, 3.0, 4.0, 5.0]);
        let r = AxisSpec::Range { min: 2.0, max: 1.0, step: 1.0 };
        assert!(r.values().is_empty());
    }

    #[test]
    fn constant_speed_straight_samples() {
        let path = ReferencePath::straight(300.0, 5.0).unwrap();
        let start = FrenetState { s: 10.0, s_dot: 20.0, d: 1.75, ..Default::default() };
        let traj = Trajectory::new(&start, Terminal { t_f: 5.0, d_f: 1.75, v_f: 20.0 }).unwrap();
        let smp = sample_trajectory(&traj, &path, 0.05).unwrap();
        assert_eq!(smp.len(), 101);
        assert!(smp.a.iter().all(|a| a.abs() < 1e-9));
        assert!(smp.jerk.iter().all(|j| j.abs() < 1e-9));
        assert!(smp.yaw_rate.iter().all(|w| w.abs() < 1e-9));
        assert!(smp.v.iter().all(|v| (v - 20.0).abs() < 1e-9));
    }

    #[test]
    fn lane_change_samples_follow_polynomial() {
        let path = ReferencePath::straight(300.0, 5.0).unwrap();
        let start = FrenetState { s: 10.0, s_dot: 20.0, ..Default::default() };
        let traj = Trajectory::new(&start, Terminal { t_f: 4.0, d_f: 3.5, v_f: 20.0 }).unwrap();
        let smp = sample_trajectory(&traj, &path, 0.1).unwrap();
        for (t, d) in smp.times.iter().zip(&smp.d) {
            assert_eq!(*d, traj.d_poly.eval(*t));
        }
        for (d, y) in smp.d.iter().zip(&smp.y) {
            assert!((d - y).abs() < 1e-12);
        }
    }

    #[test]
    fn sampling_rejects_bad_periods() {
        let path = ReferencePath::straight(300.0, 5.0).unwrap();
        let traj = Trajectory::new(&FrenetState::at(1.0, 0.0), Terminal { t_f: 2.0, d_f: 0.0, v_f: 1.0 }).unwrap();
        assert!(matches!(sample_trajectory(&traj, &path, 0.0), Err(LatticeError::InvalidSampling { .. })));
        assert!(matches!(sample_trajectory(&traj, &path, 3.0), Err(LatticeError::InvalidSampling { .. })));
        let far = Trajectory::new(&FrenetState { s: 290.0, s_dot: 30.0, ..Default::default() }, Terminal { t_f: 2.0, d_f: 0.0, v_f: 30.0 }).unwrap();
        assert!(matches!(sample_trajectory(&far, &path, 0.1), Err(LatticeError::Geometry(GeometryError::OutOfRange { .. }))));
    }

    #[test]
    fn curved_road_speed_matches_cartesian_differences() {
        // Offset driving on an arc: analytic curvilinear speed vs position differences.
        let path = ReferencePath::arc(200.0, 1.5, 200).unwrap();
        let start = FrenetState { s: 20.0, s_dot: 15.0, d: 3.0, d_dot: 0.5, ..Default::default() };
        let traj = Trajectory::new(&start, Terminal { t_f: 4.0, d_f: 5.0, v_f: 18.0 }).unwrap();
        let dt = 0.01;
        let smp = sample_trajectory(&traj, &path, dt).unwrap();
        for i in 1..smp.len() - 1 {
            let fd = (smp.x[i + 1] - smp.x[i - 1]).hypot(smp.y[i + 1] - smp.y[i - 1]) / (2.0 * dt);
            assert!((fd - smp.v[i]).abs() < 2e-3, "{i}: {fd} vs {}", smp.v[i]);
        }
    }

    proptest! {
        #[test]
        fn boundary_conditions_hold(
            d0 in -7.0f64..7.0, dd0 in -2.0f64..2.0, ddd0 in -2.0f64..2.0,
            s0 in 0.0f64..500.0, sd0 in 0.0f64..35.0, sdd0 in -3.0f64..3.0,
            t_f in 1.0f64..8.0, d_f in 0.0f64..14.0, v_f in 0.0f64..35.0,
        ) {
            let start = FrenetState { s: s0, s_dot: sd0, s_ddot: sdd0, d: d0, d_dot: dd0, d_ddot: ddd0 };
            let traj = Trajectory::new(&start, Terminal { t_f, d_f, v_f }).unwrap();
            prop_assert!(traj.boundary_residual(&start) < 1e-9);
        }

        #[test]
        fn enlarging_an_axis_is_a_superset(extra in 5.5f64..8.0) {
            let layout = LaneLayout::default();
            let start = FrenetState { s: 10.0, s_dot: 20.0, d: layout.lane_center(2), ..Default::default() };
            let small = generate_lattices(&start, &command(2, 22.0), &TerminalGrid::default(), &layout, 30.0).unwrap();
            let mut g = TerminalGrid::default();
            g.arrival_times = AxisSpec::List(vec![2.0, 3.0, 4.0, 5.0, extra]);
            let big = generate_lattices(&start, &command(2, 22.0), &g, &layout, 30.0).unwrap();
            for t in &small {
                prop_assert!(big.contains(t));
            }
        }
    }
}
