//! Deterministic simulator of demand-driven multi-robot deployment with
//! cooperative virtual forces.
//!
//! Robots spread under attraction and repulsion until a landmark with unmet
//! demand hears them and accepts them. Satisfied landmarks and associated
//! robots pass demand one hop further. Variants add guided search for stuck
//! robots and fairness-aware recruiting; a centralized assignment and a
//! random-waypoint search serve as baselines.
//!
//! ```
//! use vfdeploy::{engine, generate_scenario, Placement, SimConfig, Variant};
//!
//! let config = SimConfig { rng_seed: 4, ..SimConfig::default() };
//! let scenario = generate_scenario(&config, 15, 10, 15, Placement::UniformRandom).unwrap();
//! let report = engine::run(&scenario, Variant::TwoHop);
//! assert!(report.satisfaction > 0.0 && report.satisfaction <= 1.0);
//! ```

pub mod baselines;
pub mod config;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod fairness;
pub mod fingerprint;
pub mod forces;
pub mod geometry;
pub mod model;
pub mod protocol;
pub mod rng;
pub mod scenario;
pub mod variant;

pub use config::SimConfig;
pub use engine::{run, SimReport};
pub use error::{ConfigError, ExperimentError, ParseError, ScenarioError};
pub use geometry::Point2;
pub use model::{LandmarkId, RobotId};
pub use scenario::{generate_scenario, Placement, Scenario};
pub use variant::Variant;
