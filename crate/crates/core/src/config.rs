//! Simulation parameters.

use crate::error::ConfigError;

/// Every tunable of a run. Distances are meters, times are seconds.
///
/// Defaults follow the evaluation setup: 150 m square area, 50 m radio range,
/// 1 m/s robots, 3 s of communication per round, force exponent 3/2.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub area_width: f64,
    pub area_height: f64,
    /// Communication range `c_th`; neighborhoods use strict `d < c_th`.
    pub comm_range: f64,
    /// Equilibrium spacing `d_th` between free robots.
    pub dist_threshold: f64,
    /// Force exponent, also the cooperative repulsion multiplier.
    pub alpha: f64,
    pub speed: f64,
    /// Seconds charged per communication round.
    pub wait_time: f64,
    /// Slots an associated robot holds its association position before relocating.
    pub wait_slots: u64,
    /// Seconds of goal-directed travel per slot; budget is `speed * travel_window`.
    pub travel_window: f64,
    pub max_slots: u64,
    pub zero_force_patience: u32,
    pub repulsive_only_patience: u32,
    /// Composite force magnitudes below this count as zero for stuck detection.
    pub force_epsilon: f64,
    /// Trace Fingerprint step length `d`.
    pub fingerprint_step: f64,
    /// Side of a virtual-map square.
    pub fingerprint_square: f64,
    /// Radius `R_c` certified landmark-free around each trace point.
    pub trace_radius: f64,
    /// Satisfied fraction at which a landmark starts cooperating (fairness variant).
    pub min_ds: f64,
    pub rng_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            area_width: 150.0,
            area_height: 150.0,
            comm_range: 50.0,
            dist_threshold: 25.0,
            alpha: 1.5,
            speed: 1.0,
            wait_time: 3.0,
            wait_slots: 5,
            travel_window: 25.0,
            max_slots: 2000,
            zero_force_patience: 10,
            repulsive_only_patience: 15,
            force_epsilon: 0.25,
            fingerprint_step: 25.0,
            fingerprint_square: 50.0,
            trace_radius: 50.0,
            min_ds: 0.5,
            rng_seed: 0,
        }
    }
}

/// Keys in serialization order. Shared by the scenario file header, CLI echo and CSV comments.
pub const CONFIG_KEYS: [&str; 18] = [
    "area_width",
    "area_height",
    "comm_range",
    "dist_threshold",
    "alpha",
    "speed",
    "wait_time",
    "wait_slots",
    "travel_window",
    "max_slots",
    "zero_force_patience",
    "repulsive_only_patience",
    "force_epsilon",
    "fingerprint_step",
    "fingerprint_square",
    "trace_radius",
    "min_ds",
    "rng_seed",
];

impl SimConfig {
    /// Same defaults with a different area.
    pub fn with_area(width: f64, height: f64) -> Self {
        SimConfig { area_width: width, area_height: height, ..SimConfig::default() }
    }

    /// Per-slot budget for goal-directed travel (relocation, approach, searching).
    pub fn travel_budget(&self) -> f64 {
        self.speed * self.travel_window
    }

    /// Largest single virtual-force displacement.
    pub fn max_force_step(&self) -> f64 {
        self.dist_threshold / 2.0
    }

    pub fn area_diagonal(&self) -> f64 {
        self.area_width.hypot(self.area_height)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("area_width", self.area_width),
            ("area_height", self.area_height),
            ("comm_range", self.comm_range),
            ("dist_threshold", self.dist_threshold),
            ("alpha", self.alpha),
            ("speed", self.speed),
            ("travel_window", self.travel_window),
            ("fingerprint_step", self.fingerprint_step),
            ("fingerprint_square", self.fingerprint_square),
            ("trace_radius", self.trace_radius),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ConfigError::Invalid { key, reason: format!("must be finite and > 0, got {v}") });
            }
        }
        if self.dist_threshold > self.comm_range {
            return Err(ConfigError::Invalid {
                key: "dist_threshold",
                reason: format!("must not exceed comm_range ({} > {})", self.dist_threshold, self.comm_range),
            });
        }
        if !(self.wait_time.is_finite() && self.wait_time >= 0.0) {
            return Err(ConfigError::Invalid { key: "wait_time", reason: "must be >= 0".into() });
        }
        if !(self.force_epsilon.is_finite() && self.force_epsilon >= 0.0) {
            return Err(ConfigError::Invalid { key: "force_epsilon", reason: "must be >= 0".into() });
        }
        if self.zero_force_patience == 0 {
            return Err(ConfigError::Invalid { key: "zero_force_patience", reason: "must be >= 1".into() });
        }
        if self.repulsive_only_patience == 0 {
            return Err(ConfigError::Invalid { key: "repulsive_only_patience", reason: "must be >= 1".into() });
        }
        if self.max_slots == 0 {
            return Err(ConfigError::Invalid { key: "max_slots", reason: "must be >= 1".into() });
        }
        if !(0.0..=1.0).contains(&self.min_ds) {
            return Err(ConfigError::Invalid {
                key: "min_ds",
                reason: format!("must lie in [0, 1], got {}", self.min_ds),
            });
        }
        Ok(())
    }

    /// `(key, value)` pairs in [`CONFIG_KEYS`] order. Floats use the shortest
    /// representation that parses back to the same bits.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        CONFIG_KEYS.iter().map(|&k| (k, self.get(k).expect("known key"))).collect()
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "area_width" => self.area_width.to_string(),
            "area_height" => self.area_height.to_string(),
            "comm_range" => self.comm_range.to_string(),
            "dist_threshold" => self.dist_threshold.to_string(),
            "alpha" => self.alpha.to_string(),
            "speed" => self.speed.to_string(),
            "wait_time" => self.wait_time.to_string(),
            "wait_slots" => self.wait_slots.to_string(),
            "travel_window" => self.travel_window.to_string(),
            "max_slots" => self.max_slots.to_string(),
            "zero_force_patience" => self.zero_force_patience.to_string(),
            "repulsive_only_patience" => self.repulsive_only_patience.to_string(),
            "force_epsilon" => self.force_epsilon.to_string(),
            "fingerprint_step" => self.fingerprint_step.to_string(),
            "fingerprint_square" => self.fingerprint_square.to_string(),
            "trace_radius" => self.trace_radius.to_string(),
            "min_ds" => self.min_ds.to_string(),
            "rng_seed" => self.rng_seed.to_string(),
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
            value.trim().parse().map_err(|_| ConfigError::BadValue { key: key.to_string(), value: value.to_string() })
        }
        match key {
            "area_width" => self.area_width = num(key, value)?,
            "area_height" => self.area_height = num(key, value)?,
            "comm_range" => self.comm_range = num(key, value)?,
            "dist_threshold" => self.dist_threshold = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "speed" => self.speed = num(key, value)?,
            "wait_time" => self.wait_time = num(key, value)?,
            "wait_slots" => self.wait_slots = num(key, value)?,
            "travel_window" => self.travel_window = num(key, value)?,
            "max_slots" => self.max_slots = num(key, value)?,
            "zero_force_patience" => self.zero_force_patience = num(key, value)?,
            "repulsive_only_patience" => self.repulsive_only_patience = num(key, value)?,
            "force_epsilon" => self.force_epsilon = num(key, value)?,
            "fingerprint_step" => self.fingerprint_step = num(key, value)?,
            "fingerprint_square" => self.fingerprint_square = num(key, value)?,
            "trace_radius" => self.trace_radius = num(key, value)?,
            "min_ds" => self.min_ds = num(key, value)?,
            "rng_seed" => self.rng_seed = num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}
