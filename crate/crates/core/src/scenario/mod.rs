//! Scenario definitions and the closed-loop harness.
//!
//! A [`ScenarioSpec`] fully determines a run: there is no randomness, so the
//! trace is a pure function of the scenario file.

mod engine;
mod export;
mod plot;
mod stats;

pub use engine::{run, Engine, RunOutcome, RunTrace, TraceRow};
pub use export::{read_trace, write_trace, TraceFormat, CSV_COLUMNS, TRACE_SCHEMA_VERSION};
pub use plot::{plot, valid_channels};
pub use stats::{stats, Summary};

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catenary::{CableSpec, TensionMode};
use crate::control::{Gains, GravitySign};
use crate::dynamics::{QuadrotorParams, DEFAULT_K_TAUT};
use crate::trajectory::{TrajectorySpec, SCENARIO_NAMES};
use crate::{Error, Mat3, Result, Vec3, GRAVITY};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CableConfig {
    pub length_m: f64,
    pub mass_kg: f64,
    /// Point mass hanging at the lowest point, folded into the cable mass.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub payload_kg: f64,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleConfig {
    pub mass_kg: f64,
    pub inertia_diag: [f64; 3],
    pub f_max: f64,
    pub tau_max: f64,
    #[serde(default = "default_gravity")]
    pub gravity: f64,
}

fn default_gravity() -> f64 {
    GRAVITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    pub kp: [f64; 3],
    pub kv: [f64; 3],
    #[serde(rename = "kR")]
    pub k_r: f64,
    #[serde(rename = "kOmega")]
    pub k_omega: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    /// Integrator step [s]
    pub dt: f64,
    pub control_hz: f64,
    pub duration_s: f64,
    pub log_hz: f64,
    /// Start of the statistics window [s]
    #[serde(default = "default_stats_from")]
    pub stats_from_s: f64,
    /// Sample-and-hold rate of the state seen by the controller; ideal
    /// sensing when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sense_hz: Option<f64>,
    #[serde(default = "default_k_taut")]
    pub k_taut: f64,
    /// Offset of the initial lowest point from the first reference.
    #[serde(default)]
    pub initial_offset: [f64; 3],
}

fn default_stats_from() -> f64 {
    5.0
}

fn default_k_taut() -> f64 {
    DEFAULT_K_TAUT
}

/// Where the tension feed-forward comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensionSource {
    /// Catenary of the commanded span.
    #[default]
    Desired,
    /// Catenary between the measured endpoints.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModesConfig {
    pub tension: TensionMode,
    pub feedforward: bool,
    #[serde(default)]
    pub tension_source: TensionSource,
    #[serde(default)]
    pub gravity_sign: GravitySign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub schema_version: u32,
    pub name: String,
    pub cable: CableConfig,
    pub vehicle: VehicleConfig,
    pub gains: GainsConfig,
    pub trajectory: TrajectorySpec,
    pub sim: SimConfig,
    pub modes: ModesConfig,
}

impl ScenarioSpec {
    /// One of the built-in experiments.
    pub fn builtin(name: &str) -> Result<Self> {
        let (cable_mass, trajectory, duration) = match name {
            "exp1_flower" => (0.0076, TrajectorySpec::flower(), 30.0),
            "exp1_2_cables" => (0.05639, TrajectorySpec::flower(), 30.0),
            "exp2_traverse" => (0.0076, TrajectorySpec::traverse(), 20.0),
            "exp3_umbrella" => (0.0076, TrajectorySpec::umbrella(), 25.0),
            other => return Err(Error::UnknownScenario(other.to_string())),
        };
        let params = QuadrotorParams::platform(cable_mass);
        let gains = Gains::for_mass(params.mass);
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            cable: CableConfig { length_m: 2.0, mass_kg: cable_mass, payload_kg: 0.0 },
            vehicle: VehicleConfig {
                mass_kg: params.mass,
                inertia_diag: QuadrotorParams::default_inertia().into(),
                f_max: params.f_max,
                tau_max: params.tau_max,
                gravity: params.gravity,
            },
            gains: GainsConfig { kp: gains.kp.into(), kv: gains.kv.into(), k_r: gains.k_r, k_omega: gains.k_omega },
            trajectory,
            sim: SimConfig {
                dt: 1e-3,
                control_hz: 500.0,
                duration_s: duration,
                log_hz: 120.0,
                stats_from_s: default_stats_from(),
                sense_hz: None,
                k_taut: DEFAULT_K_TAUT,
                initial_offset: [0.0; 3],
            },
            modes: ModesConfig {
                tension: TensionMode::Classical,
                feedforward: true,
                tension_source: TensionSource::Desired,
                gravity_sign: GravitySign::Compensate,
            },
        })
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &SCENARIO_NAMES
    }

    /// Loads a built-in by name or a scenario JSON file by path.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if SCENARIO_NAMES.contains(&name_or_path) {
            return Self::builtin(name_or_path);
        }
        let path = Path::new(name_or_path);
        if !path.exists() {
            return Err(Error::UnknownScenario(name_or_path.to_string()));
        }
        let spec = Self::from_json(&std::fs::read_to_string(path)?)?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Cable used by both the simulator and the controller, with any payload
    /// folded into its mass.
    pub fn cable_spec(&self) -> Result<CableSpec> {
        CableSpec::new(self.cable.length_m, self.cable.mass_kg + self.cable.payload_kg)
    }

    pub fn quadrotor_params(&self) -> Result<QuadrotorParams> {
        let v = &self.vehicle;
        QuadrotorParams::new(
            v.mass_kg,
            Mat3::from_diagonal(&Vec3::from(v.inertia_diag)),
            v.gravity,
            v.f_max,
            v.tau_max,
        )
    }

    pub fn controller_gains(&self) -> Result<Gains> {
        let g = &self.gains;
        Gains::new(g.kp.into(), g.kv.into(), g.k_r, g.k_omega)
    }

    /// Integrator steps per controller tick.
    pub fn steps_per_tick(&self) -> Result<u64> {
        let ratio = 1.0 / (self.sim.control_hz * self.sim.dt);
        let steps = ratio.round();
        if steps < 2.0 {
            return Err(Error::Config(format!(
                "dt = {} exceeds half the control period 1/{}",
                self.sim.dt, self.sim.control_hz
            )));
        }
        if (ratio - steps).abs() > 1e-9 * steps {
            return Err(Error::Config(format!(
                "control period is not a whole number of steps ({ratio})"
            )));
        }
        Ok(steps as u64)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.cable_spec()?;
        if !(self.cable.payload_kg >= 0.0) {
            return Err(Error::Config("payload mass must be >= 0".into()));
        }
        self.quadrotor_params()?;
        self.controller_gains()?;
        let sim = &self.sim;
        if !(sim.dt > 0.0 && sim.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", sim.dt)));
        }
        if !(sim.control_hz > 0.0 && sim.control_hz.is_finite()) {
            return Err(Error::Config(format!("control rate must be > 0, got {}", sim.control_hz)));
        }
        self.steps_per_tick()?;
        if !(sim.duration_s >= 0.0 && sim.duration_s.is_finite()) {
            return Err(Error::Config(format!("duration must be >= 0, got {}", sim.duration_s)));
        }
        if !(sim.log_hz > 0.0 && sim.log_hz * sim.dt <= 1.0 + 1e-12) {
            return Err(Error::Config(format!("log rate must be in (0, 1/dt], got {}", sim.log_hz)));
        }
        if let Some(hz) = sim.sense_hz {
            if !(hz > 0.0 && hz.is_finite()) {
                return Err(Error::Config(format!("sensing rate must be > 0, got {hz}")));
            }
        }
        if !(sim.k_taut >= 0.0) {
            return Err(Error::Config("taut stiffness must be >= 0".into()));
        }
        self.trajectory.build()?;
        Ok(())
    }
}
