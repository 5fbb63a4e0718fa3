//! Reference path construction and Cartesian <-> Frenet transforms.
//!
//! The route is a list of inertial-frame waypoints. Cumulative chord length
//! gives the arc parameter `s`, and three natural cubic splines map `s` back
//! to `x`, `y` and `z`. Lateral offset `d` is measured along the left unit
//! normal of the x-y tangent, so `d > 0` is to the left of travel.

use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("at least 4 waypoints are required, got {0}")]
    TooFewWaypoints(usize),
    #[error("waypoints {0} and {1} coincide (zero-length segment)")]
    DuplicateWaypoint(usize, usize),
    #[error("waypoint {0} has a non-finite coordinate")]
    NonFiniteWaypoint(usize),
    #[error("arc length {s} outside path domain [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("point is {distance:.2} m from the route, corridor is {corridor:.2} m")]
    OffRoute { distance: f64, corridor: f64 },
    #[error("curvature estimation needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("sample period must be positive, got {0}")]
    InvalidTimeStep(f64),
    #[error("route file: {0}")]
    RouteFile(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Waypoint3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    fn distance(&self, other: &Self) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2)).sqrt()
    }
}

/// Kinematic state in road coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrenetState {
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
    pub d: f64,
    pub d_dot: f64,
    pub d_ddot: f64,
}

impl FrenetState {
    pub fn at(s: f64, d: f64) -> Self {
        Self { s, d, ..Self::default() }
    }

    pub fn is_finite(&self) -> bool {
        [self.s, self.s_dot, self.s_ddot, self.d, self.d_dot, self.d_ddot]
            .iter()
            .all(|v| v.is_finite())
    }
}

/// Natural (zero end curvature) interpolating cubic spline.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    knots: Vec<f64>,
    // Per-segment coefficients of y = a + b h + c h^2 + e h^3, h = x - knot.
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    e: Vec<f64>,
}

impl CubicSpline {
    /// Fits a natural cubic spline through `(knots[i], values[i])`.
    /// `knots` must be strictly increasing and have the same length as `values` (>= 2).
    pub fn natural(knots: &[f64], values: &[f64]) -> Self {
        let n = knots.len();
        assert!(n >= 2 && values.len() == n);
        let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();

        // Second derivatives m_i, m_0 = m_{n-1} = 0; tridiagonal solve for the interior.
        let mut m = vec![0.0; n];
        if n > 2 {
            let interior = n - 2;
            let mut diag = vec![0.0; interior];
            let mut upper = vec![0.0; interior];
            let mut rhs = vec![0.0; interior];
            for i in 0..interior {
                let k = i + 1;
                diag[i] = 2.0 * (h[k - 1] + h[k]);
                upper[i] = h[k];
                rhs[i] = 6.0
                    * ((values[k + 1] - values[k]) / h[k] - (values[k] - values[k - 1]) / h[k - 1]);
            }
            // Thomas algorithm; the sub-diagonal entry for row i is h[i].
            for i in 1..interior {
                let w = h[i] / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; interior];
            sol[interior - 1] = rhs[interior - 1] / diag[interior - 1];
            for i in (0..interior - 1).rev() {
                sol[i] = (rhs[i] - upper[i] * sol[i + 1]) / diag[i];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }

        let segs = n - 1;
        let mut a = Vec::with_capacity(segs);
        let mut b = Vec::with_capacity(segs);
        let mut c = Vec::with_capacity(segs);
        let mut e = Vec::with_capacity(segs);
        for i in 0..segs {
            a.push(values[i]);
            b.push((values[i + 1] - values[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0);
            c.push(m[i] / 2.0);
            e.push((m[i + 1] - m[i]) / (6.0 * h[i]));
        }
        Self { knots: knots.to_vec(), a, b, c, e }
    }

    fn segment(&self, x: f64) -> usize {
        let last = self.a.len() - 1;
        match self.knots.binary_search_by(|k| k.total_cmp(&x)) {
            Ok(i) => i.min(last),
            Err(0) => 0,
            Err(i) => (i - 1).min(last),
        }
    }

    /// Returns value and first three derivatives at `x`.
    pub fn eval_all(&self, x: f64) -> [f64; 4] {
        let i = self.segment(x);
        let h = x - self.knots[i];
        let (a, b, c, e) = (self.a[i], self.b[i], self.c[i], self.e[i]);
        [
            a + h * (b + h * (c + h * e)),
            b + h * (2.0 * c + 3.0 * e * h),
            2.0 * c + 6.0 * e * h,
            6.0 * e,
        ]
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_all(x)[0]
    }
}

/// Arc-length-parameterized global route.
#[derive(Debug, Clone)]
pub struct ReferencePath {
    arc_table: Vec<f64>,
    waypoints: Vec<Waypoint3>,
    spline_x: CubicSpline,
    spline_y: CubicSpline,
    spline_z: CubicSpline,
    total_length: f64,
    corridor: f64,
}

/// Default lateral search corridor for the inverse transform, meters.
pub const DEFAULT_CORRIDOR: f64 = 20.0;

impl ReferencePath {
    pub fn from_waypoints(waypoints: &[Waypoint3]) -> Result<Self, GeometryError> {
        if waypoints.len() < 4 {
            return Err(GeometryError::TooFewWaypoints(waypoints.len()));
        }
        for (i, w) in waypoints.iter().enumerate() {
            if !(w.x.is_finite() && w.y.is_finite() && w.z.is_finite()) {
                return Err(GeometryError::NonFiniteWaypoint(i));
            }
        }
        let mut arc_table = Vec::with_capacity(waypoints.len());
        arc_table.push(0.0);
        for i in 1..waypoints.len() {
            let chord = waypoints[i].distance(&waypoints[i - 1]);
            if chord <= f64::EPSILON {
                return Err(GeometryError::DuplicateWaypoint(i - 1, i));
            }
            arc_table.push(arc_table[i - 1] + chord);
        }
        let xs: Vec<f64> = waypoints.iter().map(|w| w.x).collect();
        let ys: Vec<f64> = waypoints.iter().map(|w| w.y).collect();
        let zs: Vec<f64> = waypoints.iter().map(|w| w.z).collect();
        let total_length = *arc_table.last().unwrap();
        Ok(Self {
            spline_x: CubicSpline::natural(&arc_table, &xs),
            spline_y: CubicSpline::natural(&arc_table, &ys),
            spline_z: CubicSpline::natural(&arc_table, &zs),
            arc_table,
            waypoints: waypoints.to_vec(),
            total_length,
            corridor: DEFAULT_CORRIDOR,
        })
    }

    /// Straight route along +x starting at the origin, knots every `spacing` meters.
    pub fn straight(length: f64, spacing: f64) -> Result<Self, GeometryError> {
        let n = ((length / spacing).ceil() as usize).max(3);
        let waypoints: Vec<Waypoint3> = (0..=n)
            .map(|i| Waypoint3::new(length * i as f64 / n as f64, 0.0, 0.0))
            .collect();
        Self::from_waypoints(&waypoints)
    }

    /// Counter-clockwise circular arc of `radius` centered on the origin,
    /// starting at `(radius, 0)` and sweeping `angle` radians.
    pub fn arc(radius: f64, angle: f64, points: usize) -> Result<Self, GeometryError> {
        let n = points.max(4);
        let waypoints: Vec<Waypoint3> = (0..n)
            .map(|i| {
                let th = angle * i as f64 / (n - 1) as f64;
                Waypoint3::new(radius * th.cos(), radius * th.sin(), 0.0)
            })
            .collect();
        Self::from_waypoints(&waypoints)
    }

    pub fn with_corridor(mut self, corridor: f64) -> Self {
        self.corridor = corridor;
        self
    }

    pub fn arc_table(&self) -> &[f64] {
        &self.arc_table
    }

    pub fn waypoints(&self) -> &[Waypoint3] {
        &self.waypoints
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn corridor(&self) -> f64 {
        self.corridor
    }

    fn check_range(&self, s: f64) -> Result<(), GeometryError> {
        // Tolerate rounding at the ends of the domain.
        let tol = 1e-9 * self.total_length.max(1.0);
        if !(s >= -tol && s <= self.total_length + tol) {
            return Err(GeometryError::OutOfRange { s, length: self.total_length });
        }
        Ok(())
    }

    /// Point on the reference line (d = 0).
    pub fn point(&self, s: f64) -> Waypoint3 {
        Waypoint3::new(self.spline_x.eval(s), self.spline_y.eval(s), self.spline_z.eval(s))
    }

    /// Unit tangent of the x-y projection.
    pub fn tangent(&self, s: f64) -> [f64; 2] {
        let dx = self.spline_x.eval_all(s)[1];
        let dy = self.spline_y.eval_all(s)[1];
        let norm = dx.hypot(dy);
        [dx / norm, dy / norm]
    }

    /// Signed x-y curvature (positive for counter-clockwise turning) and its
    /// derivative with respect to `s`.
    pub fn curvature_and_rate(&self, s: f64) -> (f64, f64) {
        let [_, x1, x2, x3] = self.spline_x.eval_all(s);
        let [_, y1, y2, y3] = self.spline_y.eval_all(s);
        let num = x1 * y2 - y1 * x2;
        let den = (x1 * x1 + y1 * y1).powf(1.5);
        let num_rate = x1 * y3 - y1 * x3;
        let den_rate = 3.0 * (x1 * x1 + y1 * y1).sqrt() * (x1 * x2 + y1 * y2);
        let k = num / den;
        let k_rate = (num_rate * den - num * den_rate) / (den * den);
        // The spline parameter is chord length, which is within rounding of
        // arc length for densely sampled routes; rescale by |r'| anyway.
        let speed = x1.hypot(y1);
        (k, k_rate / speed)
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.curvature_and_rate(s).0
    }

    /// Frenet to Cartesian: the spline point at `s` displaced by `d` along the
    /// left unit normal of the x-y tangent.
    pub fn to_cartesian(&self, state: &FrenetState) -> Result<Waypoint3, GeometryError> {
        self.check_range(state.s)?;
        let p = self.point(state.s);
        if state.d == 0.0 {
            return Ok(p);
        }
        let [tx, ty] = self.tangent(state.s);
        Ok(Waypoint3::new(p.x - state.d * ty, p.y + state.d * tx, p.z))
    }

    fn planar_dist2(&self, s: f64, px: f64, py: f64) -> f64 {
        (self.spline_x.eval(s) - px).powi(2) + (self.spline_y.eval(s) - py).powi(2)
    }

    /// Arc length of the closest path point to `(px, py)`.
    pub fn project(&self, px: f64, py: f64) -> f64 {
        // Coarse scan over the knots.
        let nearest = self
            .waypoints
            .iter()
            .enumerate()
            .map(|(i, w)| (i, (w.x - px).powi(2) + (w.y - py).powi(2)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
            .unwrap();
        let lo = self.arc_table[nearest.saturating_sub(1)];
        let hi = self.arc_table[(nearest + 1).min(self.arc_table.len() - 1)];
        let mut s = golden_section_min(|s| self.planar_dist2(s, px, py), lo, hi, 1e-10);
        // The squared distance is flat at the minimum; polish with Newton
        // steps on the orthogonality condition.
        for _ in 0..2 {
            let c = self.point(s);
            let [tx, ty] = self.tangent(s);
            let (rx, ry) = (px - c.x, py - c.y);
            let denom = 1.0 - self.curvature(s) * (tx * ry - ty * rx);
            if denom < 0.1 {
                break;
            }
            let next = s + (rx * tx + ry * ty) / denom;
            if !(lo..=hi).contains(&next) {
                break;
            }
            s = next;
        }
        s
    }

    /// Cartesian to Frenet. Positions come from the closest-point projection;
    /// `s_dot`/`d_dot` from projecting `velocity` on the tangent and normal,
    /// with the tangential part divided by `(1 - k d)` so a vehicle holding a
    /// constant offset on a curve reports its reference-line progress rate.
    /// Second derivatives are not observable from position and velocity and
    /// are returned as zero.
    pub fn to_frenet(&self, point: &Waypoint3, velocity: [f64; 2]) -> Result<FrenetState, GeometryError> {
        let s = self.project(point.x, point.y);
        let c = self.point(s);
        let [tx, ty] = self.tangent(s);
        let (rx, ry) = (point.x - c.x, point.y - c.y);
        let d = tx * ry - ty * rx;
        let distance = rx.hypot(ry);
        if distance > self.corridor {
            return Err(GeometryError::OffRoute { distance, corridor: self.corridor });
        }
        let v_t = velocity[0] * tx + velocity[1] * ty;
        let v_n = -velocity[0] * ty + velocity[1] * tx;
        let k = self.curvature(s);
        let scale = 1.0 - k * d;
        Ok(FrenetState {
            s,
            s_dot: if scale.abs() > 1e-6 { v_t / scale } else { v_t },
            s_ddot: 0.0,
            d,
            d_dot: v_n,
            d_ddot: 0.0,
        })
    }

    /// Loads a route file: TOML with `waypoints = [[x, y, z], ...]`.
    pub fn load(path: &Path) -> Result<Self, GeometryError> {
        #[derive(Deserialize)]
        struct RouteFile {
            waypoints: Vec<[f64; 3]>,
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| GeometryError::RouteFile(format!("{}: {e}", path.display())))?;
        let file: RouteFile =
            toml::from_str(&text).map_err(|e| GeometryError::RouteFile(format!("{}: {e}", path.display())))?;
        let wps: Vec<Waypoint3> = file.waypoints.iter().map(|w| Waypoint3::new(w[0], w[1], w[2])).collect();
        Self::from_waypoints(&wps)
    }
}

/// Minimizes a unimodal function on `[lo, hi]`.
pub(crate) fn golden_section_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // Endpoints can beat the interior minimum when the closest point is a route end.
    [lo, mid, hi].into_iter().min_by(|a, b| f(*a).total_cmp(&f(*b))).unwrap()
}

/// Curvature and heading series estimated from uniformly sampled positions.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureHeading {
    pub curvature: Vec<f64>,
    pub heading: Vec<f64>,
    /// Samples where the speed fell below the degeneracy threshold; curvature
    /// is reported as 0 and heading is held from the previous valid sample.
    pub degenerate: Vec<bool>,
}

/// Speed below which heading and curvature are undefined, m/s.
pub const DEGENERATE_SPEED: f64 = 1e-3;

/// Second-order finite-difference first and second derivatives of a uniformly
/// sampled series (central in the interior, one-sided at the ends).
pub(crate) fn fd_derivatives(v: &[f64], dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = v.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        d1[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
        d2[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (dt * dt);
    }
    if n >= 4 {
        d1[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dt);
        d1[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dt);
        d2[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (dt * dt);
        d2[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / (dt * dt);
    } else {
        d1[0] = (v[1] - v[0]) / dt;
        d1[n - 1] = (v[n - 1] - v[n - 2]) / dt;
        d2[0] = d2[1];
        d2[n - 1] = d2[n - 2];
    }
    (d1, d2)
}

/// `k = (x' y'' - y' x'') / (x'^2 + y'^2)^(3/2)` and `psi = atan2(y', x')`
/// with derivatives from finite differences.
pub fn curvature_heading(xs: &[f64], ys: &[f64], dt: f64) -> Result<CurvatureHeading, GeometryError> {
    if xs.len() < 3 || ys.len() != xs.len() {
        return Err(GeometryError::TooFewSamples(xs.len().min(ys.len())));
    }
    if !(dt > 0.0) {
        return Err(GeometryError::InvalidTimeStep(dt));
    }
    let (xd, xdd) = fd_derivatives(xs, dt);
    let (yd, ydd) = fd_derivatives(ys, dt);
    let n = xs.len();
    let mut curvature = vec![0.0; n];
    let mut heading = vec![0.0; n];
    let mut degenerate = vec![false; n];
    let mut last_heading = None;
    for i in 0..n {
        let speed2 = xd[i] * xd[i] + yd[i] * yd[i];
        if speed2.sqrt() < DEGENERATE_SPEED {
            degenerate[i] = true;
            heading[i] = last_heading.unwrap_or(0.0);
            continue;
        }
        curvature[i] = (xd[i] * ydd[i] - yd[i] * xdd[i]) / speed2.powf(1.5);
        heading[i] = yd[i].atan2(xd[i]);
        last_heading = Some(heading[i]);
    }
    // Back-fill leading degenerate samples with the first valid heading.
    if let Some(first) = degenerate.iter().position(|d| !d) {
        let h = heading[first];
        heading[..first].iter_mut().for_each(|v| *v = h);
    }
    Ok(CurvatureHeading { curvature, heading, degenerate })
}

/// Wraps an angle to (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn line4() -> Vec<Waypoint3> {
        (0..4).map(|i| Waypoint3::new(i as f64, 0.0, 0.0)).collect()
    }

    #[test]
    fn unit_chords_give_integer_arc_table() {
        let p = ReferencePath::from_waypoints(&line4()).unwrap();
        assert_eq!(p.arc_table(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(p.total_length(), 3.0);
    }

    #[test]
    fn three_four_five_chord() {
        let wps = [
            Waypoint3::new(0.0, 0.0, 0.0),
            Waypoint3::new(3.0, 4.0, 0.0),
            Waypoint3::new(6.0, 8.0, 0.0),
            Waypoint3::new(9.0, 12.0, 0.0),
        ];
        let p = ReferencePath::from_waypoints(&wps).unwrap();
        assert_eq!(&p.arc_table()[..2], &[0.0, 5.0]);
    }

    #[test]
    fn rejects_short_and_duplicate_routes() {
        assert_eq!(
            ReferencePath::from_waypoints(&line4()[..3]).unwrap_err(),
            GeometryError::TooFewWaypoints(3)
        );
        let mut wps = line4();
        wps[2] = wps[1];
        assert_eq!(ReferencePath::from_waypoints(&wps).unwrap_err(), GeometryError::DuplicateWaypoint(1, 2));
    }

    #[test]
    fn quarter_circle_length_matches_analytic_arc() {
        // Chord sums underestimate the arc; 64 points keep the error well under 0.1%.
        let p = ReferencePath::arc(100.0, FRAC_PI_2, 64).unwrap();
        let exact = 50.0 * PI;
        assert!((p.total_length() - exact).abs() / exact < 1e-3, "{}", p.total_length());
    }

    #[test]
    fn spline_reproduces_knots() {
        let p = ReferencePath::arc(100.0, FRAC_PI_2, 20).unwrap();
        for (s, w) in p.arc_table().iter().zip(p.waypoints()) {
            let q = p.point(*s);
            assert!((q.x - w.x).abs() < 1e-9 && (q.y - w.y).abs() < 1e-9);
        }
    }

    #[test]
    fn straight_forward_transform() {
        let p = ReferencePath::straight(100.0, 5.0).unwrap();
        let q = p.to_cartesian(&FrenetState::at(10.0, 0.0)).unwrap();
        assert!((q.x - 10.0).abs() < 1e-12 && q.y.abs() < 1e-12);
        let q = p.to_cartesian(&FrenetState::at(10.0, 2.0)).unwrap();
        assert!((q.x - 10.0).abs() < 1e-12 && (q.y - 2.0).abs() < 1e-12);
        assert!(matches!(
            p.to_cartesian(&FrenetState::at(101.0, 0.0)),
            Err(GeometryError::OutOfRange { .. })
        ));
    }

    #[test]
    fn quarter_circle_end_point() {
        let p = ReferencePath::arc(100.0, FRAC_PI_2, 64).unwrap();
        let q = p.to_cartesian(&FrenetState::at(p.total_length(), 0.0)).unwrap();
        assert!(q.x.abs() < 1e-6 && (q.y - 100.0).abs() < 1e-6, "{q:?}");
        // Halfway: analytic point at 45 degrees (the chord-sum parameter is
        // uniform in angle by symmetry).
        let q = p.to_cartesian(&FrenetState::at(p.total_length() / 2.0, 0.0)).unwrap();
        let r = 100.0 * FRAC_PI_4.cos();
        assert!((q.x - r).abs() < 1e-3 && (q.y - r).abs() < 1e-3, "{q:?}");
    }

    #[test]
    fn axis_aligned_inverse_transform() {
        let p = ReferencePath::straight(100.0, 5.0).unwrap();
        let f = p.to_frenet(&Waypoint3::new(10.0, 2.0, 0.0), [5.0, 0.0]).unwrap();
        assert!((f.s - 10.0).abs() < 1e-9);
        assert!((f.d - 2.0).abs() < 1e-12);
        assert!((f.s_dot - 5.0).abs() < 1e-12);
        assert!(f.d_dot.abs() < 1e-12);
    }

    #[test]
    fn off_route_points_are_rejected() {
        let p = ReferencePath::straight(100.0, 5.0).unwrap();
        assert!(matches!(
            p.to_frenet(&Waypoint3::new(50.0, 25.0, 0.0), [0.0, 0.0]),
            Err(GeometryError::OffRoute { .. })
        ));
        let p = p.with_corridor(30.0);
        assert!(p.to_frenet(&Waypoint3::new(50.0, 25.0, 0.0), [0.0, 0.0]).is_ok());
    }

    #[test]
    fn round_trip_on_straight_route() {
        let p = ReferencePath::straight(200.0, 5.0).unwrap();
        let f = FrenetState { s: 37.3, d: -1.7, s_dot: 10.0, ..Default::default() };
        let c = p.to_cartesian(&f).unwrap();
        let back = p.to_frenet(&c, [10.0, 0.0]).unwrap();
        assert!((back.s - f.s).abs() < 1e-6 && (back.d - f.d).abs() < 1e-6);
    }

    #[test]
    fn inverse_s_is_continuous_along_a_moving_point() {
        let p = ReferencePath::arc(80.0, PI, 40).unwrap();
        let mut prev = None;
        for i in 0..2000 {
            let th = PI * i as f64 / 1999.0;
            let r = 80.0 + 3.0 * (th * 5.0).sin();
            let s = p.project(r * th.cos(), r * th.sin());
            if let Some(prev) = prev {
                let step: f64 = s - prev;
                assert!(step.abs() < 1.0, "jump {step} at {i}");
            }
            prev = Some(s);
        }
    }

    #[test]
    fn curvature_heading_on_lines() {
        let dt = 0.1;
        let xs: Vec<f64> = (0..20).map(|i| 3.0 * i as f64 * dt).collect();
        let zeros = vec![0.0; 20];
        let ch = curvature_heading(&xs, &zeros, dt).unwrap();
        assert!(ch.curvature.iter().all(|k| k.abs() < 1e-12));
        assert!(ch.heading.iter().all(|h| h.abs() < 1e-12));
        let ch = curvature_heading(&xs, &xs, dt).unwrap();
        assert!(ch.heading.iter().all(|h| (h - FRAC_PI_4).abs() < 1e-12));
        assert!(ch.curvature.iter().all(|k| k.abs() < 1e-9));
    }

    #[test]
    fn curvature_of_circular_motion() {
        let (r, v, dt) = (50.0, 15.0, 0.05);
        let w = v / r;
        let xs: Vec<f64> = (0..100).map(|i| r * (w * i as f64 * dt).cos()).collect();
        let ys: Vec<f64> = (0..100).map(|i| r * (w * i as f64 * dt).sin()).collect();
        let ch = curvature_heading(&xs, &ys, dt).unwrap();
        for k in &ch.curvature {
            assert!((k - 0.02).abs() / 0.02 < 0.01, "{k}");
        }
    }

    #[test]
    fn curvature_heading_flags_standstill() {
        let xs = vec![1.0; 5];
        let ch = curvature_heading(&xs, &xs, 0.1).unwrap();
        assert!(ch.degenerate.iter().all(|d| *d));
        assert!(matches!(curvature_heading(&xs[..2], &xs[..2], 0.1), Err(GeometryError::TooFewSamples(2))));
        assert!(matches!(curvature_heading(&xs, &xs, 0.0), Err(GeometryError::InvalidTimeStep(_))));
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(0.5) - 0.5).abs() < 1e-15);
    }
}
