//! Helpers shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use catenary_robot::catenary::CableSpec;
use catenary_robot::control::{attitude_error, attitude_torque, Gains};
use catenary_robot::dynamics::{ControlCommand, CoupledDynamics, CoupledState, QuadrotorParams, QuadrotorState};
use catenary_robot::scenario::{Engine, ScenarioSpec};
use catenary_robot::trajectory::{ScalarProfile, TrajectorySpec};
use catenary_robot::{rot_z, Mat3, Vec3};
use nalgebra::Rotation3;
use rand::Rng;

pub const CABLE_LENGTH: f64 = 2.0;

/// Span signal of the flower experiment with its two derivatives.
pub fn flower_span(t: f64) -> (f64, f64, f64) {
    (0.35 + 0.15 * t.cos(), -0.15 * t.sin(), -0.15 * t.cos())
}

/// Fourth-order central first and second differences of a vector signal.
pub fn central<F: Fn(f64) -> Vec3>(f: F, t: f64, h: f64) -> (Vec3, Vec3) {
    let (m2, m1, c, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

/// Fourth-order central differences of a scalar signal.
pub fn central5<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> (f64, f64) {
    let (m2, m1, c, p1, p2) = (f(t - 2.0 * h), f(t - h), f(t), f(t + h), f(t + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    (d1, d2)
}

pub fn rel(actual: f64, expected: f64) -> f64 {
    (actual - expected).abs() / expected.abs()
}

/// Heavy-chain hover: the flower experiment's cable held at a fixed span.
pub fn hover_spec(feedforward: bool) -> ScenarioSpec {
    let mut spec = ScenarioSpec::builtin("exp1_2_cables").unwrap();
    spec.name = "chain_hover".into();
    spec.trajectory = TrajectorySpec::Flower {
        center: Vec3::new(0.0, 0.0, 0.4),
        yaw: ScalarProfile::Constant { value: 0.0 },
        span: ScalarProfile::Constant { value: 0.35 },
    };
    spec.sim.duration_s = 15.0;
    spec.sim.initial_offset = [0.05, -0.05, 0.1];
    spec.modes.feedforward = feedforward;
    spec
}

pub struct HoverResult {
    /// Largest vehicle position error over the last second.
    pub vehicle_error: f64,
    /// Final roll of vehicles A and B [rad].
    pub roll: (f64, f64),
}

pub fn run_hover(spec: &ScenarioSpec) -> HoverResult {
    let mut engine = Engine::new(spec).unwrap();
    let steps = (spec.sim.duration_s / spec.sim.dt).round() as usize;
    let tail = (1.0 / spec.sim.dt) as usize;
    let mut worst: f64 = 0.0;
    for n in 0..steps {
        engine.advance().unwrap();
        if n + tail >= steps {
            let errs = engine.tracking_errors();
            worst = worst.max(errs[0].e_p.norm()).max(errs[1].e_p.norm());
        }
    }
    let state = engine.state();
    HoverResult { vehicle_error: worst, roll: (state.a.euler_angles().0, state.b.euler_angles().0) }
}

/// Rotation by a uniformly random axis and an angle drawn from `(0, max_angle)`.
pub fn random_rotation<R: Rng>(rng: &mut R, max_angle: f64) -> Mat3 {
    let axis = loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            break v / n;
        }
    };
    let angle = rng.gen_range(1e-3..max_angle);
    Rotation3::new(axis * angle).into_inner()
}

pub struct AttitudeTrial {
    /// First controller tick with `||e_R|| < 1e-3`.
    pub settle_time: Option<f64>,
    /// Largest increase of `||e_R||` between controller ticks after 50 ms.
    pub max_increase: f64,
}

/// Regulates both vehicles of a pair joined by a massless cable from `r0`
/// toward `r_d` with hover thrust, the attitude loop alone at 500 Hz.
pub fn attitude_trial(r0: Mat3, r_d: Mat3, horizon: f64) -> AttitudeTrial {
    let params = QuadrotorParams::platform(0.0);
    let gains = Gains::for_mass(params.mass);
    let dynamics = CoupledDynamics::new(params);
    let cable = CableSpec::new(CABLE_LENGTH, 0.0).unwrap();
    let mut state = CoupledState::new(
        QuadrotorState::at_rest(Vec3::new(0.0, -0.4, 1.0), r0),
        QuadrotorState::at_rest(Vec3::new(0.0, 0.4, 1.0), r0),
        cable,
    );
    let dt = 1e-3;
    let steps_per_tick = 2;
    let hover = params.mass * params.gravity;
    let mut cmd = ControlCommand::default();
    let mut settle_time = None;
    let mut last = f64::INFINITY;
    let mut max_increase = f64::NEG_INFINITY;
    let steps = (horizon / dt).round() as usize;
    for n in 0..steps {
        if n % steps_per_tick == 0 {
            let t = n as f64 * dt;
            let e = attitude_error(&state.a.r, &r_d).norm();
            if settle_time.is_none() && e < 1e-3 {
                settle_time = Some(t);
            }
            if t >= 0.05 {
                max_increase = max_increase.max(e - last);
            }
            last = e;
            cmd = ControlCommand { f: hover, tau: attitude_torque(&state.a, &r_d, &gains, &params) };
        }
        state = dynamics.step(&state, &cmd, &cmd, dt).unwrap();
    }
    AttitudeTrial { settle_time, max_increase }
}

pub fn yaw_rotation(psi: f64) -> Mat3 {
    rot_z(psi)
}

/// Scenario whose cable is pulled taut against an extremely stiff taut
/// model, which the fixed-step integrator cannot follow.
pub fn diverging_spec() -> ScenarioSpec {
    let mut spec = ScenarioSpec::builtin("exp1_flower").unwrap();
    spec.name = "stiff_taut".into();
    spec.trajectory = TrajectorySpec::Flower {
        center: Vec3::new(0.0, 0.0, 0.4),
        yaw: ScalarProfile::Linear { start: 0.0, rate: 3.0 },
        span: ScalarProfile::Cosine { mean: 0.9, amplitude: 0.0999, frequency: 6.0, phase: 0.0 },
    };
    spec.sim.k_taut = 1e12;
    spec.sim.duration_s = 2.0;
    spec
}
