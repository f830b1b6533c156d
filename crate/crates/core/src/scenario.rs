//! Scenario construction, seeded generation and the line-oriented scenario file format.
//!
//! File layout: `key=value` config lines, then one `L id x y demand` row per
//! landmark, then one `R id x y` row per robot. Blank lines and lines starting
//! with `#` are ignored. Floats are written in shortest round-trip form so a
//! written scenario reads back bit-identical.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::SimConfig;
use crate::error::{ParseError, ScenarioError};
use crate::geometry::Point2;
use crate::model::{Landmark, LandmarkId, RobotAgent, RobotId};
use crate::rng::stream_rng;

/// RNG stream used for scenario generation; the engine draws from another.
const SCENARIO_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    UniformRandom,
    /// Uniform in a disk of radius `d_th / 2` around the area center.
    CenterCluster,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub config: SimConfig,
    pub robots: Vec<RobotAgent>,
    pub landmarks: Vec<Landmark>,
    pub total_demand: u32,
}

impl Scenario {
    /// Validates positions and ids and computes landmark neighbor sets.
    pub fn new(
        config: SimConfig,
        robots: Vec<(RobotId, Point2)>,
        landmarks: Vec<(LandmarkId, Point2, u32)>,
    ) -> Result<Self, ScenarioError> {
        config.validate()?;
        let mut ids = BTreeSet::new();
        for &(id, p) in &robots {
            if !ids.insert(id.0) {
                return Err(ScenarioError::DuplicateId(id.0));
            }
            if !p.within(config.area_width, config.area_height) {
                return Err(ScenarioError::OutOfBounds { what: "robot", id: id.0, x: p.x, y: p.y });
            }
        }
        let mut lm_ids = BTreeSet::new();
        for &(id, p, _) in &landmarks {
            if !lm_ids.insert(id.0) {
                return Err(ScenarioError::DuplicateId(id.0));
            }
            if !p.within(config.area_width, config.area_height) {
                return Err(ScenarioError::OutOfBounds { what: "landmark", id: id.0, x: p.x, y: p.y });
            }
        }

        let mut lms: Vec<Landmark> = landmarks.into_iter().map(|(id, p, d)| Landmark::new(id, p, d)).collect();
        let positions: Vec<_> = lms.iter().map(|l| (l.id, l.position)).collect();
        for l in &mut lms {
            l.neighbors = positions
                .iter()
                .filter(|(id, p)| *id != l.id && p.distance_to(l.position) < config.comm_range)
                .map(|(id, _)| *id)
                .collect();
            l.neighbors.sort();
        }
        let total_demand = lms.iter().map(|l| l.demand).sum();
        let robots = robots.into_iter().map(|(id, p)| RobotAgent::new(id, p)).collect();
        Ok(Scenario { config, robots, landmarks: lms, total_demand })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# vfdeploy scenario\n");
        for (k, v) in self.config.to_pairs() {
            let _ = writeln!(out, "{k}={v}");
        }
        for l in &self.landmarks {
            let _ = writeln!(out, "L {} {} {} {}", l.id.0, l.position.x, l.position.y, l.demand);
        }
        for r in &self.robots {
            let _ = writeln!(out, "R {} {} {}", r.id.0, r.position.x, r.position.y);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut config = SimConfig::default();
        let mut robots = Vec::new();
        let mut landmarks = Vec::new();
        let mut in_rows = false;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let err = |message: String| ParseError { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                if in_rows {
                    return Err(err("config line after agent rows".into()));
                }
                config.set(key.trim(), value).map_err(|e| err(e.to_string()))?;
                continue;
            }
            in_rows = true;
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |i: usize| -> Result<f64, ParseError> {
                fields
                    .get(i)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("field {} is not a finite number", i + 1)))
            };
            let int = |i: usize| -> Result<u32, ParseError> {
                fields
                    .get(i)
                    .and_then(|s| s.parse::<u32>().ok())
                    .ok_or_else(|| err(format!("field {} is not an integer", i + 1)))
            };
            match fields[0] {
                "L" if fields.len() == 5 => {
                    if !robots.is_empty() {
                        return Err(err("landmark row after robot rows".into()));
                    }
                    landmarks.push((LandmarkId(int(1)?), Point2::new(num(2)?, num(3)?), int(4)?));
                }
                "R" if fields.len() == 4 => robots.push((RobotId(int(1)?), Point2::new(num(2)?, num(3)?))),
                _ => return Err(err(format!("unrecognized row `{line}`"))),
            }
        }
        let last = text.lines().count().max(1);
        Scenario::new(config, robots, landmarks).map_err(|e| ParseError { line: last, message: e.to_string() })
    }
}

fn distinct_point(rng: &mut ChaCha8Rng, taken: &[Point2], sample: impl Fn(&mut ChaCha8Rng) -> Point2) -> Point2 {
    loop {
        let p = sample(rng);
        if taken.iter().all(|q| q.distance_to(p) > 1e-9) {
            return p;
        }
    }
}

/// Builds a random scenario. Landmarks are uniform over the area; each demand
/// unit lands on a uniformly drawn landmark; robots follow `placement`.
/// Robots get ids `1..=n`, landmarks `n+1..=n+m`.
pub fn generate_scenario(
    config: &SimConfig,
    n_robots: usize,
    n_landmarks: usize,
    total_demand: u32,
    placement: Placement,
) -> Result<Scenario, ScenarioError> {
    config.validate()?;
    if n_robots == 0 {
        return Err(ScenarioError::Empty("robot"));
    }
    if n_landmarks == 0 {
        return Err(ScenarioError::Empty("landmark"));
    }
    let area = config.area_width * config.area_height;
    let agents = n_robots + n_landmarks;
    // one square meter per agent
    if area < agents as f64 {
        return Err(ScenarioError::AreaTooSmall { area, agents });
    }

    let mut rng = stream_rng(config.rng_seed, SCENARIO_STREAM);
    let (w, h) = (config.area_width, config.area_height);
    let mut taken = Vec::with_capacity(agents);

    let mut lm_pos = Vec::with_capacity(n_landmarks);
    for _ in 0..n_landmarks {
        let p = distinct_point(&mut rng, &taken, |r| Point2::new(r.gen_range(0.0..=w), r.gen_range(0.0..=h)));
        taken.push(p);
        lm_pos.push(p);
    }
    let mut demand = vec![0u32; n_landmarks];
    for _ in 0..total_demand {
        demand[rng.gen_range(0..n_landmarks)] += 1;
    }

    let center = Point2::new(w / 2.0, h / 2.0);
    let radius = config.dist_threshold / 2.0;
    let mut robots = Vec::with_capacity(n_robots);
    for i in 0..n_robots {
        let p = distinct_point(&mut rng, &taken, |r| match placement {
            Placement::UniformRandom => Point2::new(r.gen_range(0.0..=w), r.gen_range(0.0..=h)),
            Placement::CenterCluster => {
                let rho = radius * r.gen::<f64>().sqrt();
                let theta = r.gen_range(0.0..std::f64::consts::TAU);
                center.offset(theta, rho).clamp_to(w, h)
            }
        });
        taken.push(p);
        robots.push((RobotId(i as u32 + 1), p));
    }

    let landmarks = lm_pos
        .into_iter()
        .zip(demand)
        .enumerate()
        .map(|(j, (p, d))| (LandmarkId((n_robots + j) as u32 + 1), p, d))
        .collect();
    Scenario::new(config.clone(), robots, landmarks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_demand() {
        let s = generate_scenario(&SimConfig::default(), 5, 10, 0, Placement::UniformRandom).unwrap();
        assert!(s.landmarks.iter().all(|l| l.demand == 0));
        assert_eq!(s.total_demand, 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = SimConfig { rng_seed: 42, ..SimConfig::default() };
        let a = generate_scenario(&cfg, 15, 10, 15, Placement::CenterCluster).unwrap();
        let b = generate_scenario(&cfg, 15, 10, 15, Placement::CenterCluster).unwrap();
        assert_eq!(a.to_text(), b.to_text());
        let c = generate_scenario(&SimConfig { rng_seed: 43, ..cfg }, 15, 10, 15, Placement::CenterCluster).unwrap();
        assert_ne!(a.to_text(), c.to_text());
    }

    #[test]
    fn center_cluster_shape() {
        let cfg = SimConfig { rng_seed: 7, ..SimConfig::default() };
        let s = generate_scenario(&cfg, 15, 10, 15, Placement::CenterCluster).unwrap();
        assert_eq!(s.landmarks.len(), 10);
        assert_eq!(s.landmarks.iter().map(|l| l.demand).sum::<u32>(), 15);
        let center = Point2::new(75.0, 75.0);
        assert!(s.robots.iter().all(|r| r.position.distance_to(center) <= 12.5 + 1e-9));
        assert_eq!(s.robots[0].id, RobotId(1));
        assert_eq!(s.landmarks[0].id, LandmarkId(16));
    }

    #[test]
    fn neighbor_sets_symmetric() {
        let cfg = SimConfig { rng_seed: 3, ..SimConfig::default() };
        let s = generate_scenario(&cfg, 3, 10, 4, Placement::UniformRandom).unwrap();
        for a in &s.landmarks {
            for b in &s.landmarks {
                let ab = a.neighbors.contains(&b.id);
                assert_eq!(ab, b.neighbors.contains(&a.id));
                assert_eq!(ab, a.id != b.id && a.position.distance_to(b.position) < cfg.comm_range);
            }
        }
    }

    #[test]
    fn area_too_small() {
        let cfg = SimConfig {
            area_width: 2.0,
            area_height: 2.0,
            comm_range: 1.0,
            dist_threshold: 0.5,
            ..SimConfig::default()
        };
        assert!(matches!(
            generate_scenario(&cfg, 3, 2, 1, Placement::UniformRandom),
            Err(ScenarioError::AreaTooSmall { .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let cfg = SimConfig { rng_seed: 11, min_ds: 0.3, ..SimConfig::default() };
        let s = generate_scenario(&cfg, 7, 4, 9, Placement::UniformRandom).unwrap();
        let back = Scenario::from_text(&s.to_text()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let e = Scenario::from_text("area_width=abc\n").unwrap_err();
        assert_eq!(e.line, 1);
        let e = Scenario::from_text("# c\nL 1 0 0 1\nR 2 1 x\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = Scenario::from_text("L 1 0 0 1\nspeed=2\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = Scenario::from_text("L 1 500 0 1\n").unwrap_err();
        assert!(e.message.contains("outside"));
    }
}
