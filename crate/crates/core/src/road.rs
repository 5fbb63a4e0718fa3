//! Multi-lane carriageway layout in Frenet coordinates.
//!
//! `d = 0` lies on the route polyline, which is the right boundary of lane 1.
//! Lanes are numbered 1..=lane_count from right to left.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaneLayout {
    pub lane_count: usize,
    pub lane_width: f64,
    /// Highway speed limit, m/s.
    pub speed_limit: f64,
}

impl Default for LaneLayout {
    fn default() -> Self {
        Self { lane_count: 4, lane_width: 3.5, speed_limit: 30.0 }
    }
}

impl LaneLayout {
    pub fn lane_center(&self, lane: usize) -> f64 {
        (lane as f64 - 0.5) * self.lane_width
    }

    pub fn is_valid_lane(&self, lane: usize) -> bool {
        (1..=self.lane_count).contains(&lane)
    }

    /// Lane whose center is nearest to `d`, clamped to the road.
    pub fn lane_of(&self, d: f64) -> usize {
        let raw = (d / self.lane_width + 0.5).round() as i64;
        raw.clamp(1, self.lane_count as i64) as usize
    }

    /// Whether a vehicle at lateral offset `d` occupies `lane` for
    /// car-following purposes. A vehicle mid-lane-change occupies both lanes.
    pub fn occupies(&self, d: f64, lane: usize) -> bool {
        (d - self.lane_center(lane)).abs() < 0.8 * self.lane_width
    }

    pub fn width(&self) -> f64 {
        self.lane_count as f64 * self.lane_width
    }

    pub fn is_lane_center(&self, d: f64) -> bool {
        let lane = self.lane_of(d);
        (self.lane_center(lane) - d).abs() < 1e-9
    }
}
