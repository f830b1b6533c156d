//! Batches of seeded runs and their CSV output.
//!
//! Repetition `k` of a plan uses scenario seed `plan_seed + k` for every
//! variant, robot count and area, so variants are compared on identical
//! scenarios and adding a robot count leaves existing rows untouched.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::engine::{self, SimReport};
use crate::error::ExperimentError;
use crate::scenario::{generate_scenario, Placement};
use crate::variant::Variant;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DemandRule {
    EqualToRobots,
    Fixed(u32),
    /// `k` demand units per robot.
    TimesRobots(u32),
}

impl DemandRule {
    pub fn total(self, robots: usize) -> u32 {
        match self {
            DemandRule::EqualToRobots => robots as u32,
            DemandRule::Fixed(n) => n,
            DemandRule::TimesRobots(k) => k * robots as u32,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub variants: Vec<Variant>,
    pub robot_counts: Vec<usize>,
    pub demand_rule: DemandRule,
    pub landmarks: usize,
    pub areas: Vec<(f64, f64)>,
    pub seeds: u64,
    pub plan_seed: u64,
    pub placement: Placement,
    /// Every other parameter; area and seed are overridden per run.
    pub config: SimConfig,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        ExperimentPlan {
            variants: vec![Variant::TwoHop, Variant::CoverBaseline, Variant::Centralized],
            robot_counts: vec![15, 20, 25, 30, 35],
            demand_rule: DemandRule::EqualToRobots,
            landmarks: 10,
            areas: vec![(150.0, 150.0)],
            seeds: 30,
            plan_seed: 1,
            placement: Placement::CenterCluster,
            config: SimConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunKey {
    pub variant: Variant,
    pub robots: usize,
    pub area: (f64, f64),
    pub repetition: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub key: RunKey,
    pub seed: u64,
    pub demand: u32,
    pub report: SimReport,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Plan(m.to_string()));
        if self.variants.is_empty() {
            return bad("no variants");
        }
        if self.robot_counts.is_empty() || self.robot_counts.contains(&0) {
            return bad("robot counts must be positive");
        }
        if self.areas.is_empty() {
            return bad("no areas");
        }
        if self.seeds == 0 {
            return bad("seeds must be positive");
        }
        if self.landmarks == 0 {
            return bad("landmarks must be positive");
        }
        self.config.validate().map_err(|e| ExperimentError::Plan(e.to_string()))
    }

    /// All runs in output order: area, robot count, repetition, variant.
    pub fn keys(&self) -> Vec<RunKey> {
        let mut keys = Vec::new();
        for &area in &self.areas {
            for &robots in &self.robot_counts {
                for repetition in 0..self.seeds {
                    for &variant in &self.variants {
                        keys.push(RunKey { variant, robots, area, repetition });
                    }
                }
            }
        }
        keys
    }

    pub fn config_for(&self, key: &RunKey) -> SimConfig {
        SimConfig {
            area_width: key.area.0,
            area_height: key.area.1,
            rng_seed: self.plan_seed.wrapping_add(key.repetition),
            ..self.config.clone()
        }
    }

    pub fn run_one(&self, key: &RunKey) -> Result<RunRow, ExperimentError> {
        let config = self.config_for(key);
        let demand = self.demand_rule.total(key.robots);
        let scenario = generate_scenario(&config, key.robots, self.landmarks, demand, self.placement)?;
        Ok(RunRow { key: *key, seed: config.rng_seed, demand, report: engine::run(&scenario, key.variant) })
    }

    /// Runs every tuple in parallel; rows come back in [`keys`](Self::keys) order.
    pub fn execute(&self) -> Result<Vec<RunRow>, ExperimentError> {
        self.validate()?;
        self.keys().par_iter().map(|k| self.run_one(k)).collect()
    }

    fn header_comments(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.config.to_pairs() {
            if !matches!(k, "area_width" | "area_height" | "rng_seed") {
                out.push_str(&format!("# {k}={v}\n"));
            }
        }
        out.push_str(&format!(
            "# plan_seed={}\n# seeds={}\n# landmarks={}\n",
            self.plan_seed, self.seeds, self.landmarks
        ));
        out.push_str(&format!("# demand_rule={:?}\n# placement={:?}\n", self.demand_rule, self.placement));
        out
    }
}

pub const RAW_COLUMNS: [&str; 6] = ["robots", "area_width", "area_height", "repetition", "seed", "demand"];
pub const SUMMARY_METRICS: [&str; 5] = ["satisfaction", "total_distance", "total_time", "total_messages", "jain_index"];

pub fn metric(report: &SimReport, name: &str) -> Option<f64> {
    Some(match name {
        "satisfaction" => report.satisfaction,
        "total_distance" => report.total_distance,
        "total_time" => report.total_time,
        "total_messages" => report.total_messages as f64,
        "jain_index" => report.jain_index,
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub variant: Variant,
    pub robots: usize,
    pub area: (f64, f64),
    pub metric: &'static str,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
    pub n: usize,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Mean and standard deviation of each metric per variant, robot count and area.
pub fn summarize(rows: &[RunRow]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(String, usize, u64, u64, Variant), Vec<&RunRow>> = BTreeMap::new();
    for r in rows {
        let k = &r.key;
        groups
            .entry((k.variant.to_string(), k.robots, k.area.0.to_bits(), k.area.1.to_bits(), k.variant))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((_, robots, w, h, variant), group) in groups {
        for m in SUMMARY_METRICS {
            let values: Vec<f64> = group.iter().filter_map(|r| metric(&r.report, m)).collect();
            let (mean, std) = mean_std(&values);
            out.push(SummaryRow {
                variant,
                robots,
                area: (f64::from_bits(w), f64::from_bits(h)),
                metric: m,
                mean,
                std,
                n: values.len(),
            });
        }
    }
    out
}

fn create(path: &Path) -> Result<File, ExperimentError> {
    File::create(path).map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })
}

/// One row per run, preceded by `# key=value` lines describing the plan.
pub fn write_raw(path: &Path, plan: &ExperimentPlan, rows: &[RunRow]) -> Result<(), ExperimentError> {
    let mut file = create(path)?;
    file.write_all(plan.header_comments().as_bytes())
        .map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })?;
    let mut w = csv::Writer::from_writer(file);
    let header: Vec<&str> = RAW_COLUMNS.iter().chain(SimReport::CSV_COLUMNS.iter()).copied().collect();
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.key.robots.to_string(),
            r.key.area.0.to_string(),
            r.key.area.1.to_string(),
            r.key.repetition.to_string(),
            r.seed.to_string(),
            r.demand.to_string(),
        ];
        rec.extend(r.report.csv_record());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })?;
    Ok(())
}

pub fn write_summary(path: &Path, summary: &[SummaryRow]) -> Result<(), ExperimentError> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["variant", "robots", "area_width", "area_height", "metric", "mean", "std", "n"])?;
    for s in summary {
        w.write_record([
            s.variant.to_string(),
            s.robots.to_string(),
            s.area.0.to_string(),
            s.area.1.to_string(),
            s.metric.to_string(),
            s.mean.to_string(),
            s.std.to_string(),
            s.n.to_string(),
        ])?;
    }
    w.flush().map_err(|source| ExperimentError::Io { path: path.display().to_string(), source })?;
    Ok(())
}
