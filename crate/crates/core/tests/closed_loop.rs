use hwyplan::log::{EpisodeLog, Event, ReplanReason};
use hwyplan::metrics::MetricConfig;
use hwyplan::scenario::{RoadSpec, RouteSpec};
use hwyplan::supervisor::SupervisorAction;
use hwyplan::{run_episode, DriverProfile, Scenario};
use std::path::Path;

fn scenario(name: &str) -> Scenario {
    Scenario::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)).unwrap()
}

fn episode(sc: &Scenario, profile: &DriverProfile, seed: u64) -> EpisodeLog {
    run_episode(&sc.instantiate(seed).unwrap(), profile, seed, &MetricConfig::default()).unwrap()
}

fn cruising_at(v: f64) -> DriverProfile {
    let mut p = DriverProfile::preset("moderate").unwrap();
    p.idm.desired_speed = v;
    p
}

fn empty_straight(speed: f64) -> Scenario {
    let mut sc = Scenario { track_length: 500.0, ..Scenario::default() };
    sc.road = RoadSpec { route: RouteSpec::Straight { length: 800.0 }, ..RoadSpec::default() };
    sc.ego.speed = speed;
    sc
}

#[test]
fn same_seed_gives_identical_logs() {
    let sc = scenario("random.toml");
    let p = DriverProfile::preset("agile").unwrap();
    for seed in [3, 17] {
        assert_eq!(episode(&sc, &p, seed).to_jsonl(), episode(&sc, &p, seed).to_jsonl());
    }
    assert_ne!(episode(&sc, &p, 3).to_jsonl(), episode(&sc, &p, 4).to_jsonl());
}

#[test]
fn empty_road_run_has_no_lane_changes() {
    let log = episode(&empty_straight(20.0), &cruising_at(25.0), 0);
    assert_eq!(log.summary.lane_changes, 0);
    assert!(log.steps.iter().all(|s| s.lane == 2));
    // 20 s at 25 m/s plus the ramp up from 20 m/s.
    assert!(log.summary.duration > 20.0 && log.summary.duration < 24.0, "{}", log.summary.duration);
}

#[test]
fn steady_state_tracking_on_a_straight_road() {
    let log = episode(&empty_straight(25.0), &cruising_at(25.0), 0);
    let center = 1.5 * 3.5;
    let settled: Vec<_> = log.steps.iter().filter(|s| s.t >= 5.0).collect();
    assert!(!settled.is_empty());
    let lateral = settled.iter().map(|s| (s.d - center).abs()).fold(0.0, f64::max);
    let speed = settled.iter().map(|s| (s.speed - 25.0).abs()).fold(0.0, f64::max);
    assert!(lateral < 0.05, "lateral error {lateral}");
    assert!(speed < 0.2, "speed error {speed}");
}

#[test]
fn ego_never_jumps() {
    let sc = scenario("random.toml");
    let p = DriverProfile::preset("agile").unwrap();
    for seed in 0..4 {
        let log = episode(&sc, &p, seed);
        let dt = log.header.dt;
        for w in log.steps.windows(2) {
            let moved = (w[1].x - w[0].x).hypot(w[1].y - w[0].y);
            assert!(moved <= (w[0].speed + 8.0 * dt) * dt + 1e-9, "seed {seed} k {}: {moved}", w[1].k);
        }
    }
}

#[test]
fn every_replan_has_a_cause_at_its_step() {
    let p = DriverProfile::preset("moderate").unwrap();
    let lp_every = (p.lp_period / Scenario::default().dt).round() as u64;
    let mut logs = vec![episode(&scenario("cut_in.toml"), &p, 0), episode(&scenario("cs2.toml"), &p, 0)];
    logs.extend((0..3).map(|seed| episode(&scenario("random.toml"), &p, seed)));
    let mut supervisor_replans = 0;
    for log in &logs {
        for e in &log.events {
            let Event::Replan { reason, .. } = e.event else { continue };
            let at_step = |want: SupervisorAction| {
                log.events.iter().any(|o| o.k == e.k && matches!(o.event, Event::Supervisor { action, .. } if action == want))
            };
            match reason {
                ReplanReason::Scheduled => assert_eq!(e.k % lp_every, 0, "scheduled replan off tick at {}", e.k),
                ReplanReason::Supervisor => {
                    supervisor_replans += 1;
                    assert!(at_step(SupervisorAction::ReplanLP), "supervisor replan at {} without a verdict", e.k);
                }
                ReplanReason::SpeedOverride => {
                    assert!(log.events.iter().any(|o| o.k == e.k && matches!(o.event, Event::Supervisor { action: SupervisorAction::OverrideSpeed(_), .. })))
                }
                ReplanReason::Exhausted => panic!("plan ran out at step {}", e.k),
            }
        }
        assert_eq!(log.summary.supervisor_replans, log.supervisor_replans());
    }
    assert!(supervisor_replans > 0);
}

#[test]
fn lane_change_events_match_the_step_series() {
    let log = episode(&scenario("cs1.toml"), &DriverProfile::preset("agile").unwrap(), 0);
    // Changes are logged on arrival, after the boundary crossing.
    for (t, from, to) in log.lane_changes() {
        let at = log.steps.iter().find(|s| s.t >= t).unwrap();
        let before = log.steps.iter().rev().find(|s| s.t < t && s.lane != to).unwrap();
        assert_eq!((before.lane, at.lane), (from, to));
    }
    assert_eq!(log.lane_changes().count(), log.summary.lane_changes);
}

#[test]
fn logs_follow_the_record_layout() {
    let log = episode(&scenario("cut_in.toml"), &DriverProfile::preset("agile").unwrap(), 0);
    let text = log.to_jsonl();
    let records: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.first().unwrap()["type"], "header");
    assert_eq!(records.last().unwrap()["type"], "summary");
    let mut last_k = 0;
    for r in &records[1..records.len() - 1] {
        let kind = r["type"].as_str().unwrap();
        assert!(kind == "step" || kind == "event", "{kind}");
        let k = r["k"].as_u64().unwrap();
        assert!(k >= last_k);
        last_k = k;
        if kind == "event" {
            assert!(r["event"].is_string());
        }
    }
    let back = EpisodeLog::read_jsonl(text.as_bytes()).unwrap();
    assert_eq!(back, log);
    let fresh = back.metrics(&MetricConfig::default()).unwrap();
    assert_eq!(fresh, log.summary.metrics);
}

#[test]
fn collisions_end_the_episode_without_error() {
    // The ego starts right behind a stopped car.
    let sc: Scenario = toml::from_str(
        "track_length = 300.0\n[ego]\nlane = 1\ns = 50.0\nspeed = 28.0\n[[vehicles]]\nlane = 1\ns = 58.0\nspeed = 0.0\n\
         [[vehicles]]\nlane = 2\ns = 54.0\nspeed = 28.0\n",
    )
    .unwrap();
    sc.validate().unwrap();
    let mut p = DriverProfile::preset("agile").unwrap();
    p.supervisor.enabled = false;
    let log = episode(&sc, &p, 0);
    assert_eq!(log.summary.outcome, hwyplan::log::Outcome::Collision);
    assert!(log.events.iter().any(|e| matches!(e.event, Event::Collision { .. })));
}
