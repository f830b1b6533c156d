//! Acceptance gate. Every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vfdeploy::baselines::hungarian;
use vfdeploy::engine::{self, jain_index, Engine, Observer};
use vfdeploy::experiment::{summarize, DemandRule, ExperimentPlan};
use vfdeploy::forces::{self, ForceInputs, ForceParams};
use vfdeploy::model::{Landmark, RobotAgent, StatusKind};
use vfdeploy::{Placement, Point2, RobotId, Scenario, SimConfig, Variant};

const ROBOT_COUNTS: [usize; 5] = [15, 20, 25, 30, 35];

struct Gate {
    failures: usize,
}

impl Gate {
    fn check(&mut self, name: &str, result: Result<String, String>) {
        match result {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                self.failures += 1;
            }
        }
    }
}

/// Mean of `metric` per (variant, robot count).
type Means = HashMap<(Variant, usize, &'static str), f64>;

fn sweep(variants: Vec<Variant>, area: f64, demand_rule: DemandRule) -> (Means, Vec<vfdeploy::experiment::RunRow>) {
    let plan = ExperimentPlan {
        variants,
        robot_counts: ROBOT_COUNTS.to_vec(),
        demand_rule,
        areas: vec![(area, area)],
        seeds: 30,
        placement: Placement::CenterCluster,
        ..ExperimentPlan::default()
    };
    let rows = plan.execute().expect("plan runs");
    let means = summarize(&rows).into_iter().map(|s| ((s.variant, s.robots, s.metric), s.mean)).collect();
    (means, rows)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn force_laws() -> Result<String, String> {
    let (d_th, c_th, alpha) = (25.0, 50.0, 1.5);
    for n in ROBOT_COUNTS {
        let p = ForceParams::new(d_th, c_th, n, alpha);
        let nf = n as f64;
        let w_a = 0.5 / (nf * nf.sqrt());
        let w_r = nf * nf.sqrt();
        if !close(p.w_a, w_a, 1e-12) || !close(p.w_r, w_r, 1e-9) {
            return Err(format!("weights for N={n}: {} {}", p.w_a, p.w_r));
        }
    }
    let frozen = ForceParams::new(d_th, c_th, 15, alpha);
    if !close(frozen.w_a, 0.008606629658238704, 1e-15) || !close(frozen.w_r, 58.09475019311125, 1e-9) {
        return Err("frozen N=15 weights".into());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut dummy = ChaCha8Rng::seed_from_u64(0);
    for i in 0..1000 {
        let n = ROBOT_COUNTS[i % 5];
        let p = ForceParams::new(d_th, c_th, n, alpha);
        let a = Point2::new(rng.gen_range(0.0..150.0), rng.gen_range(0.0..150.0));
        let b = a.offset(rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.1..c_th));
        let d = ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt();
        let (ux, uy) = ((b.x - a.x) / d, (b.y - a.y) / d);
        // signed magnitude along a->b
        let along = if d > d_th { p.w_a * (d - d_th) } else { -p.w_r / d };
        let f = forces::pairwise_force(a, b, &p, &mut dummy).to_cartesian();
        if !close(f.0, along * ux, 1e-9) || !close(f.1, along * uy, 1e-9) {
            return Err(format!("pair {i}: got {f:?} at d={d}"));
        }
        let g = forces::pairwise_force(b, a, &p, &mut dummy).to_cartesian();
        if !close(f.0 + g.0, 0.0, 1e-9) || !close(f.1 + g.1, 0.0, 1e-9) {
            return Err(format!("pair {i} not antisymmetric"));
        }
        let e = a.offset(rng.gen_range(0.0..2.0 * PI), d_th);
        if forces::pairwise_force(a, e, &p, &mut dummy).magnitude != 0.0 {
            return Err(format!("pair {i}: nonzero force at d_th"));
        }

        // composite: free neighbors plus cooperative repulsion, summed by hand
        let free: Vec<Point2> = (0..rng.gen_range(0..5))
            .map(|_| a.offset(rng.gen_range(0.0..2.0 * PI), rng.gen_range(1.0..c_th)))
            .collect();
        let coop: Vec<Point2> = (0..rng.gen_range(0..3))
            .map(|_| a.offset(rng.gen_range(0.0..2.0 * PI), rng.gen_range(1.0..c_th)))
            .collect();
        let (mut x, mut y) = (0.0, 0.0);
        for q in &free {
            let d = a.distance_to(*q);
            let m = if (d - d_th).abs() <= 1e-9 {
                0.0
            } else if d > d_th {
                p.w_a * (d - d_th)
            } else {
                -p.w_r / d
            };
            x += m * (q.x - a.x) / d;
            y += m * (q.y - a.y) / d;
        }
        for q in &coop {
            let d = a.distance_to(*q);
            x -= alpha * p.w_r / d * (q.x - a.x) / d;
            y -= alpha * p.w_r / d * (q.y - a.y) / d;
        }
        let inputs = ForceInputs { free_neighbors: free, repulsive: coop, attractive: Vec::new() };
        let got = forces::evaluate(&inputs, a, &p, &mut dummy).force;
        if !close(got.magnitude, x.hypot(y), 1e-9) {
            return Err(format!("composite {i}: {} vs {}", got.magnitude, x.hypot(y)));
        }
    }
    Ok("weights, branches, antisymmetry, equilibrium and composite magnitudes on 1000 pairs".into())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

fn hungarian_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..100 {
        let n = rng.gen_range(1..=7);
        let cost: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..100) as f64).collect()).collect();
        let best = permutations(n)
            .iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let a = hungarian(&cost);
        let mut seen = vec![false; n];
        for &j in &a {
            if seen[j] {
                return Err(format!("case {case}: column {j} used twice"));
            }
            seen[j] = true;
        }
        let got: f64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        if got != best {
            return Err(format!("case {case}: {got} vs optimum {best}"));
        }
    }
    Ok("100 instances up to 7x7 match exhaustive search".into())
}

fn golden_replay() -> Result<String, String> {
    let scenario = Scenario::from_text(include_str!("data/worked_example.scn")).map_err(|e| e.to_string())?;
    let report = engine::run(&scenario, Variant::TwoHop);
    if report.satisfaction != 1.0 {
        return Err(format!("satisfaction {}", report.satisfaction));
    }
    let mut order: Vec<(u64, u32)> =
        report.per_landmark.iter().filter_map(|l| l.satisfied_slot.map(|s| (s, l.id.0))).collect();
    order.sort();
    let last: Vec<u32> = order.iter().rev().take(2).map(|&(_, id)| id).collect();
    let earlier = order[order.len() - 3].0;
    if !(last.contains(&17) && last.contains(&20)) || order[order.len() - 2].0 <= earlier {
        return Err(format!("satisfaction order {order:?}"));
    }
    Ok(format!("satisfaction 1.0, order (slot, landmark) {order:?}"))
}

fn per_count(label: &str, f: impl Fn(usize) -> Result<String, String>) -> Result<String, String> {
    let mut parts = Vec::new();
    for n in ROBOT_COUNTS {
        match f(n) {
            Ok(s) => parts.push(format!("{n}: {s}")),
            Err(s) => return Err(format!("{label} at {n} robots: {s}")),
        }
    }
    Ok(parts.join(", "))
}

fn main() {
    let mut gate = Gate { failures: 0 };
    gate.check("force laws", force_laws());
    gate.check("hungarian oracle", hungarian_oracle());
    gate.check("golden replay", golden_replay());

    let (m, _) =
        sweep(vec![Variant::TwoHop, Variant::CoverBaseline, Variant::Centralized], 150.0, DemandRule::EqualToRobots);
    let g = |v, n, k| m[&(v, n, k)];
    gate.check(
        "satisfaction trend",
        per_count("satisfaction", |n| {
            let (t, c, z) = (
                g(Variant::TwoHop, n, "satisfaction"),
                g(Variant::CoverBaseline, n, "satisfaction"),
                g(Variant::Centralized, n, "satisfaction"),
            );
            let ratio = t / z;
            let s = format!("{t:.4} ({ratio:.3} of centralized, cover {c:.4})");
            if ratio >= 0.93 && t >= c {
                Ok(s)
            } else {
                Err(s)
            }
        }),
    );
    gate.check(
        "time trend",
        per_count("time", |n| {
            let (t, c) = (g(Variant::TwoHop, n, "total_time"), g(Variant::CoverBaseline, n, "total_time"));
            let red = (c - t) / c;
            let s = format!("{t:.1}s vs {c:.1}s ({:.1}% less)", 100.0 * red);
            if t < c && (0.05..=0.45).contains(&red) {
                Ok(s)
            } else {
                Err(s)
            }
        }),
    );
    gate.check(
        "message trend",
        per_count("messages", |n| {
            let (t, c) = (g(Variant::TwoHop, n, "total_messages"), g(Variant::CoverBaseline, n, "total_messages"));
            let s = format!("{:.3} of cover", t / c);
            if t <= 0.75 * c {
                Ok(s)
            } else {
                Err(s)
            }
        }),
    );

    let (m, rows) = sweep(
        vec![Variant::TwoHopFingerprint, Variant::TwoHopRwp, Variant::Centralized],
        200.0,
        DemandRule::EqualToRobots,
    );
    let g = |v, n, k| m[&(v, n, k)];
    let misses: Vec<String> = rows
        .iter()
        .filter(|r| r.key.variant != Variant::Centralized && (r.report.satisfaction != 1.0 || r.report.truncated))
        .map(|r| format!("{} n={} seed={}", r.key.variant, r.key.robots, r.seed))
        .collect();
    let searched = rows.iter().filter(|r| r.key.variant != Variant::Centralized).count();
    gate.check(
        "fingerprint completeness",
        if misses.is_empty() {
            Ok(format!("{searched} runs at 200x200 all reach 1.0"))
        } else {
            Err(misses.join("; "))
        },
    );
    gate.check(
        "fingerprint efficiency",
        per_count("efficiency", |n| {
            let (fd, rd, cd) = (
                g(Variant::TwoHopFingerprint, n, "total_distance"),
                g(Variant::TwoHopRwp, n, "total_distance"),
                g(Variant::Centralized, n, "total_distance"),
            );
            let (ft, rt) = (g(Variant::TwoHopFingerprint, n, "total_time"), g(Variant::TwoHopRwp, n, "total_time"));
            let (fo, ro) = (fd / cd - 1.0, rd / cd - 1.0);
            let s =
                format!("dist {fd:.0}/{rd:.0}, time {ft:.0}/{rt:.0}, overhead {:.0}%/{:.0}%", 100.0 * fo, 100.0 * ro);
            if fd < rd && ft < rt && fo < ro {
                Ok(s)
            } else {
                Err(s)
            }
        }),
    );

    let (m, _) = sweep(vec![Variant::TwoHop, Variant::Fairness], 150.0, DemandRule::TimesRobots(2));
    let g = |v, n, k| m[&(v, n, k)];
    let units = [(vec![1.0, 0.0, 0.0, 0.0], 0.25), (vec![1.0, 1.0, 1.0, 1.0], 1.0), (vec![0.5, 1.0], 2.25 / 2.5)];
    let unit_ok = units.iter().all(|(x, want)| close(jain_index(x), *want, 1e-12));
    gate.check(
        "fairness",
        if !unit_ok {
            Err("Jain unit values".into())
        } else {
            per_count("jain", |n| {
                let (f, t) = (g(Variant::Fairness, n, "jain_index"), g(Variant::TwoHop, n, "jain_index"));
                let s = format!("{f:.4} vs {t:.4}");
                if f >= t {
                    Ok(s)
                } else {
                    Err(s)
                }
            })
        },
    );
    gate.check(
        "fairness cost",
        per_count("cost", |n| {
            let dist = g(Variant::Fairness, n, "total_distance") / g(Variant::TwoHop, n, "total_distance") - 1.0;
            let msgs = g(Variant::Fairness, n, "total_messages") / g(Variant::TwoHop, n, "total_messages") - 1.0;
            let s = format!("distance +{:.1}%, messages +{:.1}%", 100.0 * dist, 100.0 * msgs);
            if dist > 0.0 && dist <= 0.60 && msgs <= 0.70 {
                Ok(s)
            } else {
                Err(s)
            }
        }),
    );

    gate.check("engine invariants", engine_invariants());

    println!("{} criteria failed", gate.failures);
    if gate.failures > 0 {
        std::process::exit(1);
    }
}

/// Checks containment, monotone satisfaction, and that no landmark has more
/// robots than it granted, after every slot.
struct InvariantObserver {
    width: f64,
    height: f64,
    last_remaining: Vec<u32>,
    violation: Option<String>,
}

impl Observer for InvariantObserver {
    fn on_slot(&mut self, slot: u64, robots: &[RobotAgent], landmarks: &[Landmark]) {
        if self.violation.is_some() {
            return;
        }
        for r in robots {
            if !r.position.within(self.width, self.height) {
                self.violation = Some(format!("slot {slot}: {} outside at {:?}", r.id, r.position));
                return;
            }
        }
        for (i, l) in landmarks.iter().enumerate() {
            let members =
                robots.iter().filter(|r| r.status.association().is_some_and(|a| a.landmark == l.id)).count() as u32;
            // an accept granted this slot reaches its robot next slot
            if members > l.demand - l.remaining || l.remaining > l.demand {
                self.violation = Some(format!(
                    "slot {slot}: {} has {members} robots for {}/{}",
                    l.id,
                    l.demand - l.remaining,
                    l.demand
                ));
                return;
            }
            if self.last_remaining.get(i).is_some_and(|&prev| l.remaining > prev) {
                self.violation = Some(format!("slot {slot}: {} remaining went up", l.id));
                return;
            }
        }
        self.last_remaining = landmarks.iter().map(|l| l.remaining).collect();
    }
}

fn engine_invariants() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut runs = 0;
    for case in 0..200 {
        let side = rng.gen_range(60.0..220.0);
        let config =
            SimConfig { area_width: side, area_height: side, rng_seed: case, max_slots: 600, ..SimConfig::default() };
        let n = rng.gen_range(1..=25);
        let robots: Vec<(RobotId, Point2)> = (0..n)
            .map(|i| (RobotId(i + 1), Point2::new(rng.gen_range(0.0..=side), rng.gen_range(0.0..=side))))
            .collect();
        let landmarks = (0..rng.gen_range(0..=8))
            .map(|i| {
                (
                    vfdeploy::LandmarkId(100 + i),
                    Point2::new(rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)),
                    rng.gen_range(0..=5),
                )
            })
            .collect();
        let scenario = Scenario::new(config, robots, landmarks).map_err(|e| format!("case {case}: {e}"))?;
        for v in Variant::ALL {
            let first = if v == Variant::Centralized {
                let r = engine::run(&scenario, v);
                let granted: u32 = r.per_landmark.iter().map(|l| l.demand - l.remaining).sum();
                if granted as usize != r.associated || r.associated > n as usize {
                    return Err(format!("case {case} {v}: {granted} granted, {} associated", r.associated));
                }
                r
            } else {
                let mut obs =
                    InvariantObserver { width: side, height: side, last_remaining: Vec::new(), violation: None };
                let mut e = Engine::new(&scenario, v);
                while !e.step(&mut obs) {}
                if let Some(msg) = obs.violation {
                    return Err(format!("case {case} {v}: {msg}"));
                }
                for l in e.landmarks() {
                    let members = e
                        .robots()
                        .iter()
                        .filter(|r| r.status.association().is_some_and(|a| a.landmark == l.id))
                        .count() as u32;
                    if members != l.demand - l.remaining {
                        return Err(format!(
                            "case {case} {v}: {} granted {} but has {members} robots",
                            l.id,
                            l.demand - l.remaining
                        ));
                    }
                }
                let associated = e.robots().iter().filter(|r| r.status.kind() == StatusKind::Associated).count();
                if associated != e.report().associated {
                    return Err(format!("case {case} {v}: report disagrees with final state"));
                }
                e.report()
            };
            if engine::run(&scenario, v) != first {
                return Err(format!("case {case} {v}: rerun differs"));
            }
            runs += 1;
        }
    }
    Ok(format!("{runs} runs: conservation, monotone satisfaction, containment, determinism"))
}
