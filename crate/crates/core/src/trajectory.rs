//! Catenary-space trajectories: the closed-form experiment signals and
//! waypoint plans interpolated with minimum snap.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::frames::CatenarySetpoint;
use crate::minsnap::MinSnapTrajectory;
use crate::{Error, Result, Vec3};

/// Scalar signal with analytic first and second derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarProfile {
    Constant { value: f64 },
    /// `start + rate t`
    Linear { start: f64, rate: f64 },
    /// `mean + amplitude cos(frequency t + phase)`
    Cosine { mean: f64, amplitude: f64, frequency: f64, #[serde(default)] phase: f64 },
}

impl ScalarProfile {
    pub fn sample(&self, t: f64) -> (f64, f64, f64) {
        match *self {
            ScalarProfile::Constant { value } => (value, 0.0, 0.0),
            ScalarProfile::Linear { start, rate } => (start + rate * t, rate, 0.0),
            ScalarProfile::Cosine { mean, amplitude, frequency, phase } => {
                let (sin, cos) = (frequency * t + phase).sin_cos();
                (
                    mean + amplitude * cos,
                    -amplitude * frequency * sin,
                    -amplitude * frequency * frequency * cos,
                )
            }
        }
    }
}

/// Waypoints for the lowest point plus yaw and span profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaypointPlan {
    pub waypoints: Vec<Vec3>,
    /// Explicit segment durations; when absent, durations are proportional
    /// to the distance between waypoints and sum to `total_time`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub durations: Option<Vec<f64>>,
    #[serde(default = "default_total_time")]
    pub total_time: f64,
    pub yaw: ScalarProfile,
    pub span: ScalarProfile,
}

fn default_total_time() -> f64 {
    20.0
}

impl WaypointPlan {
    pub fn build(&self) -> Result<MinSnapTrajectory> {
        match &self.durations {
            Some(d) => MinSnapTrajectory::new(&self.waypoints, d),
            None => MinSnapTrajectory::with_total_time(&self.waypoints, self.total_time),
        }
    }
}

/// Serializable trajectory description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    /// Fixed lowest point while yaw and span vary.
    Flower { center: Vec3, yaw: ScalarProfile, span: ScalarProfile },
    /// Lowest point moving along x at constant altitude, with the span
    /// `base + amplitude sin(t)` inside `[window_start, window_end)` and
    /// `base` elsewhere.
    Traverse {
        speed: f64,
        altitude: f64,
        span_base: f64,
        span_amplitude: f64,
        window_start: f64,
        window_end: f64,
    },
    MinSnap(WaypointPlan),
}

impl TrajectorySpec {
    pub fn flower() -> Self {
        TrajectorySpec::Flower {
            center: Vec3::new(0.0, 0.0, 0.4),
            yaw: ScalarProfile::Linear { start: 0.0, rate: 0.1 },
            span: ScalarProfile::Cosine { mean: 0.35, amplitude: 0.15, frequency: 1.0, phase: 0.0 },
        }
    }

    pub fn traverse() -> Self {
        TrajectorySpec::Traverse {
            speed: 1.0,
            altitude: 0.3,
            span_base: 0.3,
            span_amplitude: 0.6,
            window_start: 4.0 * PI,
            window_end: 5.0 * PI,
        }
    }

    pub fn umbrella() -> Self {
        TrajectorySpec::MinSnap(WaypointPlan {
            waypoints: vec![
                Vec3::new(-1.6, -0.1, 0.6),
                Vec3::new(0.0, -0.2, 0.6),
                Vec3::new(0.6, 0.17, 0.509),
                Vec3::new(0.8, 0.7, 1.0),
            ],
            durations: None,
            total_time: 20.0,
            yaw: ScalarProfile::Constant { value: 0.0 },
            span: ScalarProfile::Constant { value: 0.3 },
        })
    }

    pub fn build(&self) -> Result<Trajectory> {
        Ok(match self {
            TrajectorySpec::Flower { center, yaw, span } => Trajectory::Flower {
                center: *center,
                yaw: *yaw,
                span: *span,
            },
            TrajectorySpec::Traverse { speed, altitude, span_base, span_amplitude, window_start, window_end } => {
                if !(window_start <= window_end) {
                    return Err(Error::Config("traverse window end precedes start".into()));
                }
                Trajectory::Traverse {
                    speed: *speed,
                    altitude: *altitude,
                    span_base: *span_base,
                    span_amplitude: *span_amplitude,
                    window: (*window_start, *window_end),
                }
            }
            TrajectorySpec::MinSnap(plan) => Trajectory::MinSnap {
                path: plan.build()?,
                yaw: plan.yaw,
                span: plan.span,
            },
        })
    }
}

/// Evaluable catenary trajectory. Immutable after construction.
#[derive(Debug, Clone)]
pub enum Trajectory {
    Flower { center: Vec3, yaw: ScalarProfile, span: ScalarProfile },
    Traverse { speed: f64, altitude: f64, span_base: f64, span_amplitude: f64, window: (f64, f64) },
    MinSnap { path: MinSnapTrajectory, yaw: ScalarProfile, span: ScalarProfile },
}

impl Trajectory {
    pub fn setpoint(&self, t: f64) -> CatenarySetpoint {
        match self {
            Trajectory::Flower { center, yaw, span } => {
                let (psi, psi_dot, psi_ddot) = yaw.sample(t);
                let (s, s_dot, s_ddot) = span.sample(t);
                CatenarySetpoint {
                    x_c: *center,
                    x_c_dot: Vec3::zeros(),
                    x_c_ddot: Vec3::zeros(),
                    psi,
                    psi_dot,
                    psi_ddot,
                    s,
                    s_dot,
                    s_ddot,
                }
            }
            Trajectory::Traverse { speed, altitude, span_base, span_amplitude, window } => {
                // Derivatives are the literal ones of each piece; the rate
                // steps at the window edges are left to the feedback loop.
                let (s, s_dot, s_ddot) = if t >= window.0 && t < window.1 {
                    let (sin, cos) = t.sin_cos();
                    (span_base + span_amplitude * sin, span_amplitude * cos, -span_amplitude * sin)
                } else {
                    (*span_base, 0.0, 0.0)
                };
                CatenarySetpoint {
                    x_c: Vec3::new(speed * t, 0.0, *altitude),
                    x_c_dot: Vec3::new(*speed, 0.0, 0.0),
                    x_c_ddot: Vec3::zeros(),
                    psi: 0.0,
                    psi_dot: 0.0,
                    psi_ddot: 0.0,
                    s,
                    s_dot,
                    s_ddot,
                }
            }
            Trajectory::MinSnap { path, yaw, span } => {
                let (x_c, x_c_dot, x_c_ddot) = path.evaluate(t);
                let (psi, psi_dot, psi_ddot) = yaw.sample(t);
                let (s, s_dot, s_ddot) = span.sample(t);
                CatenarySetpoint { x_c, x_c_dot, x_c_ddot, psi, psi_dot, psi_ddot, s, s_dot, s_ddot }
            }
        }
    }

    /// Times where the commanded rates are discontinuous.
    pub fn switch_times(&self) -> Vec<f64> {
        match self {
            Trajectory::Traverse { window, .. } => vec![window.0, window.1],
            Trajectory::MinSnap { path, .. } => vec![path.horizon()],
            Trajectory::Flower { .. } => Vec::new(),
        }
    }
}

/// Names of the built-in experiment trajectories.
pub const SCENARIO_NAMES: [&str; 4] = ["exp1_flower", "exp1_2_cables", "exp2_traverse", "exp3_umbrella"];

/// Closed-form trajectory of a built-in experiment.
pub fn scenario_trajectories(name: &str) -> Result<Trajectory> {
    match name {
        "exp1_flower" | "exp1_2_cables" => TrajectorySpec::flower().build(),
        "exp2_traverse" => TrajectorySpec::traverse().build(),
        "exp3_umbrella" => TrajectorySpec::umbrella().build(),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flower_at_start() {
        let sp = scenario_trajectories("exp1_flower").unwrap().setpoint(0.0);
        assert_eq!(sp.s, 0.5);
        assert_eq!(sp.s_dot, 0.0);
        assert_eq!(sp.psi, 0.0);
        assert_eq!(sp.psi_dot, 0.1);
        assert_eq!(sp.x_c, Vec3::new(0.0, 0.0, 0.4));
    }

    #[test]
    fn traverse_pieces() {
        let traj = scenario_trajectories("exp2_traverse").unwrap();
        let sp = traj.setpoint(4.0 * PI + PI / 2.0);
        assert!((sp.s - 0.9).abs() < 1e-12);
        assert!(sp.s_dot.abs() < 1e-12);
        for t in [0.0, 3.0, 12.0, 4.0 * PI - 1e-9] {
            let sp = traj.setpoint(t);
            assert_eq!((sp.s, sp.s_dot, sp.s_ddot), (0.3, 0.0, 0.0));
        }
        let sp = traj.setpoint(20.0);
        assert_eq!((sp.s, sp.s_dot, sp.s_ddot), (0.3, 0.0, 0.0));
        assert_eq!(sp.x_c, Vec3::new(20.0, 0.0, 0.3));
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(scenario_trajectories("exp9"), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn profile_serde_shape() {
        let json = serde_json::to_string(&ScalarProfile::Linear { start: 0.0, rate: 0.1 }).unwrap();
        assert_eq!(json, r#"{"kind":"linear","start":0.0,"rate":0.1}"#);
    }
}
