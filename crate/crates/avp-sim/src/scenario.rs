//! Scenario files: simulation parameters, customer arrival schedule,
//! failure plan, and pedestrian routes.

use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vehicle::ControlLimits;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("io error reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioMeta {
    pub name: String,
    /// Topology file path, relative to the scenario file.
    pub topology: String,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    /// Channel delivery latency in ticks.
    #[serde(default = "default_latency")]
    pub latency: u64,
    /// Per-tick bounded pose perturbation in meters.
    #[serde(default)]
    pub delta_car: f64,
}

fn default_dt() -> f64 {
    0.1
}

fn default_horizon() -> u64 {
    6000
}

fn default_latency() -> u64 {
    1
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SafetyParams {
    pub eps_min_car: f64,
    pub eps_min_people: f64,
    pub a_brake: f64,
    pub lookahead: f64,
    /// Lateral band before the corridor boundary where the backup
    /// controller takes over.
    pub corridor_margin: f64,
}

impl Default for SafetyParams {
    fn default() -> Self {
        SafetyParams {
            eps_min_car: 1.0,
            eps_min_people: 2.0,
            a_brake: 2.0,
            lookahead: 2.0,
            corridor_margin: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerParams {
    pub grid_size: f64,
    pub kappa_max: f64,
    pub corridor_radius: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            grid_size: 3.0,
            kappa_max: 0.2,
            corridor_radius: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomerSpec {
    pub arrival_tick: u64,
    /// Ticks between receiving Accepted and sending Retrieve.
    pub retrieve_delay: u64,
    /// Wheelbase; defaults to 2.5 m.
    #[serde(default = "default_car_length")]
    pub car_length: f64,
}

fn default_car_length() -> f64 {
    2.5
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case", tag = "kind")]
pub enum FailureKind {
    /// Immobilize a customer's car until towed.
    EngineFailure { customer: u32 },
    /// An immobile foreign object occupies a parking spot.
    BlockedSpot { spot: usize },
    /// A failed car appears on a lane point.
    BlockedPath { pose: [f64; 3] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FailureSpec {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: FailureKind,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PedestrianSpec {
    pub start_tick: u64,
    pub speed: f64,
    pub route: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioMeta,
    #[serde(default)]
    pub limits: ControlLimitsDoc,
    #[serde(default)]
    pub safety: SafetyParams,
    #[serde(default)]
    pub planner: PlannerParams,
    /// Ticks from failure injection to towing.
    #[serde(default = "default_tow_delay")]
    pub tow_delay: u64,
    /// Ticks from Returned receipt to the customer driving off.
    #[serde(default = "default_pickup_delay")]
    pub pickup_delay: u64,
    #[serde(default)]
    pub customers: Vec<CustomerSpec>,
    #[serde(default)]
    pub failures: Vec<FailureSpec>,
    #[serde(default)]
    pub pedestrians: Vec<PedestrianSpec>,
}

fn default_tow_delay() -> u64 {
    300
}

fn default_pickup_delay() -> u64 {
    50
}

/// Control limits with defaults, as written in scenario files.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlLimitsDoc {
    pub v_min: f64,
    pub v_max: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    pub v_ped_max: f64,
}

impl Default for ControlLimitsDoc {
    fn default() -> Self {
        let l = ControlLimits::default();
        ControlLimitsDoc {
            v_min: l.v_min,
            v_max: l.v_max,
            phi_min: l.phi_min,
            phi_max: l.phi_max,
            v_ped_max: l.v_ped_max,
        }
    }
}

impl From<ControlLimitsDoc> for ControlLimits {
    fn from(d: ControlLimitsDoc) -> Self {
        ControlLimits {
            v_min: d.v_min,
            v_max: d.v_max,
            phi_min: d.phi_min,
            phi_max: d.phi_max,
            v_ped_max: d.v_ped_max,
        }
    }
}

impl ScenarioConfig {
    pub fn parse(doc: &str) -> Result<ScenarioConfig, ScenarioError> {
        let cfg: ScenarioConfig = toml::from_str(doc)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &FsPath) -> Result<(ScenarioConfig, String), ScenarioError> {
        let doc = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg = Self::parse(&doc)?;
        Ok((cfg, doc))
    }

    /// Topology path resolved against the scenario file location.
    pub fn topology_path(&self, scenario_path: &FsPath) -> PathBuf {
        let t = FsPath::new(&self.scenario.topology);
        if t.is_absolute() {
            t.to_path_buf()
        } else {
            scenario_path
                .parent()
                .unwrap_or_else(|| FsPath::new("."))
                .join(t)
        }
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.scenario.dt <= 0.0 {
            return Err(ScenarioError::Invalid("dt must be positive".into()));
        }
        if self.scenario.horizon == 0 {
            return Err(ScenarioError::Invalid("horizon must be positive".into()));
        }
        if self.scenario.latency == 0 {
            return Err(ScenarioError::Invalid("latency must be >= 1 tick".into()));
        }
        if self.scenario.delta_car < 0.0 {
            return Err(ScenarioError::Invalid("delta_car must be >= 0".into()));
        }
        if self.tow_delay == 0 {
            return Err(ScenarioError::Invalid("tow_delay must be positive".into()));
        }
        let limits: ControlLimits = self.limits.into();
        limits.validate().map_err(ScenarioError::Invalid)?;
        let s = &self.safety;
        for (name, v) in [
            ("eps_min_car", s.eps_min_car),
            ("eps_min_people", s.eps_min_people),
            ("a_brake", s.a_brake),
            ("lookahead", s.lookahead),
            ("corridor_margin", s.corridor_margin),
        ] {
            if v <= 0.0 {
                return Err(ScenarioError::Invalid(format!("{name} must be positive")));
            }
        }
        if s.eps_min_people < s.eps_min_car {
            return Err(ScenarioError::Invalid(
                "eps_min_people must be >= eps_min_car".into(),
            ));
        }
        if self.planner.grid_size <= 0.0 || self.planner.kappa_max <= 0.0 {
            return Err(ScenarioError::Invalid(
                "grid_size and kappa_max must be positive".into(),
            ));
        }
        for (i, f) in self.failures.iter().enumerate() {
            if f.tick >= self.scenario.horizon {
                return Err(ScenarioError::Invalid(format!(
                    "failures[{i}] tick {} beyond horizon",
                    f.tick
                )));
            }
            if let FailureKind::EngineFailure { customer } = f.kind {
                if customer as usize >= self.customers.len() {
                    return Err(ScenarioError::Invalid(format!(
                        "failures[{i}] targets unknown customer {customer}"
                    )));
                }
            }
        }
        for (i, p) in self.pedestrians.iter().enumerate() {
            if p.speed <= 0.0 || p.speed > limits.v_ped_max {
                return Err(ScenarioError::Invalid(format!(
                    "pedestrians[{i}] speed {} outside (0, v_ped_max={}]",
                    p.speed, limits.v_ped_max
                )));
            }
            if p.route.len() < 2 {
                return Err(ScenarioError::Invalid(format!(
                    "pedestrians[{i}] route needs at least 2 waypoints"
                )));
            }
        }
        Ok(())
    }

    pub fn control_limits(&self) -> ControlLimits {
        self.limits.into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scenario]
name = "t"
topology = "lots/default_lot.toml"

[[customers]]
arrival_tick = 0
retrieve_delay = 100
"#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let cfg = ScenarioConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.scenario.dt, 0.1);
        assert_eq!(cfg.scenario.horizon, 6000);
        assert_eq!(cfg.scenario.latency, 1);
        assert_eq!(cfg.planner.grid_size, 3.0);
        assert_eq!(cfg.planner.kappa_max, 0.2);
        assert_eq!(cfg.safety.eps_min_car, 1.0);
        assert_eq!(cfg.safety.eps_min_people, 2.0);
        assert_eq!(cfg.customers.len(), 1);
    }

    #[test]
    fn pedestrian_speed_capped_by_limits() {
        let doc = format!(
            "{MINIMAL}\n[[pedestrians]]\nstart_tick = 0\nspeed = 2.0\nroute = [[0.0, 0.0], [1.0, 0.0]]\n"
        );
        assert!(ScenarioConfig::parse(&doc).is_err());
    }

    #[test]
    fn engine_failure_must_target_known_customer() {
        let doc = format!("{MINIMAL}\n[[failures]]\ntick = 10\nkind = \"engine_failure\"\ncustomer = 5\n");
        assert!(ScenarioConfig::parse(&doc).is_err());
    }
}
