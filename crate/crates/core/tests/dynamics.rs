mod common;

use std::f64::consts::FRAC_PI_4;

use approx::assert_relative_eq;
use catenary_robot::catenary::{tension_pair, CableSpec, CatenarySolution, TensionMode};
use catenary_robot::control::{attitude_torque, desired_attitude, Gains};
use catenary_robot::dynamics::{
    cable_forces_at, lowest_point_between, lowest_point_from_state, ControlCommand, CoupledDynamics, CoupledState,
    QuadrotorParams, QuadrotorState, DEFAULT_K_TAUT,
};
use catenary_robot::frames::{setpoint_to_references, CatenarySetpoint};
use catenary_robot::{rot_z, Error, Mat3, Vec3, GRAVITY};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

const A_2_035: f64 = 0.12665431030522643799;
const SAG_2_035: f64 = 0.88133443681395275899;
const TWO_POINT_A: f64 = 0.12701202413304494256;
const TWO_POINT_L1: f64 = 1.1008114578962901755;
const TWO_POINT_L2: f64 = 0.8991885421037098245;

fn pair(xa: Vec3, xb: Vec3, cable: CableSpec) -> CoupledState {
    CoupledState::new(QuadrotorState::at_rest(xa, Mat3::identity()), QuadrotorState::at_rest(xb, Mat3::identity()), cable)
}

#[test]
fn massless_cable_exerts_nothing() {
    let cable = CableSpec::new(2.0, 0.0).unwrap();
    let (fa, fb, taut) = cable_forces_at(&Vec3::new(0.0, -0.3, 1.0), &Vec3::new(0.1, 0.3, 0.8), &cable, GRAVITY, DEFAULT_K_TAUT);
    assert_eq!((fa, fb, taut), (Vec3::zeros(), Vec3::zeros(), false));
}

#[test]
fn symmetric_hang_splits_weight() {
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    let (fa, fb, _) = cable_forces_at(&Vec3::new(0.0, -0.35, 1.0), &Vec3::new(0.0, 0.35, 1.0), &cable, GRAVITY, DEFAULT_K_TAUT);
    let half = 0.5 * cable.mass * GRAVITY;
    assert!(rel(fa.z, -half) <= 1e-12 && rel(fb.z, -half) <= 1e-12);
    let wa = cable.weight_per_length(GRAVITY) * A_2_035;
    assert!(rel(fa.y, wa) <= 1e-10, "A pulled toward B");
    assert_eq!(fa.y, -fb.y);
    assert_eq!(fa.x, 0.0);
}

#[test]
fn unequal_heights_match_two_point_oracle() {
    let cable = CableSpec::new(2.0, 0.05).unwrap();
    let xa = Vec3::new(0.0, -0.35, 1.2);
    let xb = Vec3::new(0.0, 0.35, 1.0);
    let (fa, fb, taut) = cable_forces_at(&xa, &xb, &cable, GRAVITY, DEFAULT_K_TAUT);
    assert!(!taut);
    let w = cable.weight_per_length(GRAVITY);
    assert!((fa.z + fb.z + cable.mass * GRAVITY).abs() <= 1e-9);
    assert!(rel(fa.z, -w * TWO_POINT_L1) <= 1e-10);
    assert!(rel(fb.z, -w * TWO_POINT_L2) <= 1e-10);
    assert!(rel(fa.y, w * TWO_POINT_A) <= 1e-10);
}

#[test]
fn horizontal_forces_are_equal_and_opposite() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let cable = CableSpec::new(2.0, 0.05639).unwrap();
    let mut checked = 0;
    while checked < 200 {
        let xa = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        let xb = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..1.5));
        if (xa - xb).norm() >= 1.9 {
            continue;
        }
        let (fa, fb, taut) = cable_forces_at(&xa, &xb, &cable, GRAVITY, DEFAULT_K_TAUT);
        assert!(!taut);
        assert!((fa.xy() + fb.xy()).norm() <= 1e-12 * fa.xy().norm().max(1.0));
        assert!(rel(fa.z + fb.z, -cable.mass * GRAVITY) <= 1e-9);
        checked += 1;
    }
}

#[test]
fn vertical_hang_and_taut_limits() {
    let cable = CableSpec::new(2.0, 0.05).unwrap();
    let half = 0.5 * cable.mass * GRAVITY;
    let (fa, fb, taut) = cable_forces_at(&Vec3::new(0.0, 0.0, 1.5), &Vec3::new(0.0, 0.0, 0.5), &cable, GRAVITY, DEFAULT_K_TAUT);
    assert!(!taut);
    assert_eq!((fa.z, fb.z), (-half, -half));
    let (fa, fb, taut) = cable_forces_at(&Vec3::new(0.0, -1.05, 1.0), &Vec3::new(0.0, 1.05, 1.0), &cable, GRAVITY, DEFAULT_K_TAUT);
    assert!(taut);
    assert_relative_eq!(fa.y, DEFAULT_K_TAUT * 0.1, max_relative = 1e-12);
    assert_eq!(fa.y, -fb.y);
}

#[test]
fn free_fall_from_rest() {
    let dynamics = CoupledDynamics::new(QuadrotorParams::platform(0.0));
    let mut state = pair(Vec3::new(0.0, -0.3, 1.0), Vec3::new(0.0, 0.3, 1.0), CableSpec::new(2.0, 0.0).unwrap());
    let zero = ControlCommand::default();
    for _ in 0..100 {
        state = dynamics.step(&state, &zero, &zero, 1e-3).unwrap();
    }
    assert!((state.a.v.z + GRAVITY * 0.1).abs() <= 1e-9);
    assert!((1.0 - state.a.x.z - 0.5 * GRAVITY * 0.01).abs() <= 1e-8);
}

#[test]
fn compensated_hover_stays_put() {
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    let params = QuadrotorParams::platform(cable.mass);
    let gains = Gains::for_mass(params.mass);
    let dynamics = CoupledDynamics::new(params);
    let sp = CatenarySetpoint::fixed(Vec3::new(0.0, 0.0, 0.4), 0.0, 0.35);
    let refs = setpoint_to_references(&sp, &cable).unwrap();
    let tension = tension_pair(&cable, &refs.solution, TensionMode::Classical, params.gravity);
    let weight = params.mass * params.gravity * Vec3::z();
    let (force_a, force_b) = (weight + tension.a, weight + tension.b);
    let (r_a, r_b) = (desired_attitude(&force_a, 0.0).unwrap(), desired_attitude(&force_b, 0.0).unwrap());
    // vertical thrust share is the vehicle weight plus half the cable
    assert!(rel(force_a.z, (params.mass + 0.5 * cable.mass) * params.gravity) <= 1e-12);

    let mut state = CoupledState::new(QuadrotorState::at_rest(refs.a.x, r_a), QuadrotorState::at_rest(refs.b.x, r_b), cable);
    for n in 0..1000 {
        let _ = n;
        let cmd_a = ControlCommand { f: force_a.norm(), tau: attitude_torque(&state.a, &r_a, &gains, &params) };
        let cmd_b = ControlCommand { f: force_b.norm(), tau: attitude_torque(&state.b, &r_b, &gains, &params) };
        state = dynamics.step(&state, &cmd_a, &cmd_b, 1e-3).unwrap();
    }
    assert!((state.a.x - refs.a.x).norm() <= 1e-6);
    assert!((state.b.x - refs.b.x).norm() <= 1e-6);
}

#[test]
fn torque_free_spin_keeps_rate() {
    let dynamics = CoupledDynamics::new(QuadrotorParams::platform(0.0));
    let mut state = pair(Vec3::new(0.0, -0.3, 1.0), Vec3::new(0.0, 0.3, 1.0), CableSpec::new(2.0, 0.0).unwrap());
    state.a.omega = Vec3::new(0.0, 0.0, 1.0);
    let zero = ControlCommand::default();
    for _ in 0..10_000 {
        state = dynamics.step(&state, &zero, &zero, 1e-3).unwrap();
    }
    assert!((state.a.omega.norm() - 1.0).abs() <= 1e-9);
    // ten radians about the vertical
    assert_relative_eq!(state.a.r, rot_z(10.0), epsilon = 1e-9);
}

fn energy(q: &QuadrotorState, p: &QuadrotorParams) -> f64 {
    0.5 * p.mass * q.v.norm_squared() + 0.5 * q.omega.dot(&(p.inertia * q.omega)) + p.mass * p.gravity * q.x.z
}

#[test]
fn ballistic_tumbling_conserves_energy() {
    let params = QuadrotorParams::new(0.132, Mat3::from_diagonal(&Vec3::new(1.4e-5, 1.9e-5, 2.2e-5)), GRAVITY, 5.0, 0.1).unwrap();
    let dynamics = CoupledDynamics::new(params);
    let mut state = pair(Vec3::new(0.0, -0.3, 5.0), Vec3::new(0.0, 0.3, 5.0), CableSpec::new(20.0, 0.0).unwrap());
    state.a.v = Vec3::new(0.5, -0.2, 1.0);
    state.a.omega = Vec3::new(3.0, -2.0, 5.0);
    state.b.omega = Vec3::new(-1.0, 0.1, 0.5);
    let e0 = (energy(&state.a, &params), energy(&state.b, &params));
    let zero = ControlCommand::default();
    for _ in 0..1000 {
        state = dynamics.step(&state, &zero, &zero, 1e-3).unwrap();
    }
    assert!(rel(energy(&state.a, &params), e0.0) <= 1e-6);
    assert!(rel(energy(&state.b, &params), e0.1) <= 1e-6);
}

#[test]
fn rotations_stay_orthonormal_over_a_million_steps() {
    let dynamics = CoupledDynamics::new(QuadrotorParams::platform(0.0));
    let mut state = pair(Vec3::new(0.0, -0.3, 1e3), Vec3::new(0.0, 0.3, 1e3), CableSpec::new(2.0, 0.0).unwrap());
    state.a.omega = Vec3::new(0.7, -0.4, 1.3);
    state.b.omega = Vec3::new(-2.0, 0.3, 0.1);
    let cmd = ControlCommand { f: 0.132 * GRAVITY, tau: Vec3::zeros() };
    for _ in 0..1_000_000 {
        state = dynamics.step(&state, &cmd, &cmd, 1e-4).unwrap();
    }
    for r in [state.a.r, state.b.r] {
        assert!((r.transpose() * r - Mat3::identity()).norm() <= 1e-9);
        assert!((r.determinant() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn stepping_is_deterministic() {
    let cable = CableSpec::new(2.0, 0.05639).unwrap();
    let dynamics = CoupledDynamics::new(QuadrotorParams::platform(cable.mass));
    let start = pair(Vec3::new(0.1, -0.4, 1.0), Vec3::new(-0.1, 0.3, 1.2), cable);
    let cmd = ControlCommand { f: 1.5, tau: Vec3::new(1e-4, -2e-4, 0.0) };
    let trajectory = || {
        let mut s = start;
        (0..500)
            .map(|_| {
                s = dynamics.step(&s, &cmd, &cmd, 1e-3).unwrap();
                s
            })
            .collect::<Vec<_>>()
    };
    assert_eq!(trajectory(), trajectory());
}

#[test]
fn lowest_point_of_symmetric_pair() {
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    let lp = lowest_point_between(&Vec3::new(0.0, -0.35, 1.0), &Vec3::new(0.0, 0.35, 1.0), &cable).unwrap();
    assert!((lp.position - Vec3::new(0.0, 0.0, 1.0 - SAG_2_035)).norm() <= 1e-10);
    assert_eq!(lp.yaw, 0.0);
    assert!((lp.half_span - 0.35).abs() <= 1e-15);
    assert!(!lp.clamped);
}

#[test]
fn lowest_point_yaw_follows_rotation() {
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    let r = rot_z(FRAC_PI_4);
    let mid = Vec3::new(0.3, -0.1, 1.0);
    let lp = lowest_point_between(&(mid + r * Vec3::new(0.0, -0.35, 0.0)), &(mid + r * Vec3::new(0.0, 0.35, 0.0)), &cable).unwrap();
    assert!((lp.yaw - FRAC_PI_4).abs() <= 1e-9);
}

#[test]
fn lowest_point_inverts_references() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    for _ in 0..100 {
        let x_c = Vec3::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(0.0..2.0));
        let sp = CatenarySetpoint::fixed(x_c, rng.gen_range(-3.0..3.0), rng.gen_range(0.05..0.95));
        let refs = setpoint_to_references(&sp, &cable).unwrap();
        let state = pair(refs.a.x, refs.b.x, cable);
        let lp = lowest_point_from_state(&state).unwrap();
        assert!((lp.position - x_c).norm() <= 1e-9);
        assert!((lp.yaw - sp.psi).abs() <= 1e-9);
        assert!((lp.half_span - sp.s).abs() <= 1e-9);
    }
}

#[test]
fn lowest_point_failure_modes() {
    let cable = CableSpec::new(2.0, 0.0076).unwrap();
    let aligned = lowest_point_between(&Vec3::new(0.0, 0.0, 1.0), &Vec3::new(0.0, 0.0, 0.5), &cable);
    assert!(matches!(aligned, Err(Error::DegenerateGeometry(_))));
    let taut = pair(Vec3::new(0.0, -1.1, 1.0), Vec3::new(0.0, 1.1, 1.0), cable);
    assert!(taut.taut);
    assert!(matches!(lowest_point_from_state(&taut), Err(Error::TautCable(_))));
    // steep chord: the vertex lies beyond the lower end
    let lp = lowest_point_between(&Vec3::new(0.0, -0.1, 2.98), &Vec3::new(0.0, 0.1, 1.0), &cable).unwrap();
    assert!(lp.clamped);
    assert_eq!(lp.position, Vec3::new(0.0, 0.1, 1.0));
}

#[test]
fn solution_at_rest_matches_static_reference() {
    let sol = CatenarySolution::at_rest(2.0, 0.35).unwrap();
    assert!(rel(sol.a, A_2_035) <= 1e-11);
    assert!(rel(0.4 + sol.sag(), 1.281334436813952759) <= 1e-12);
}
