//! Rigid-body simulation of the two vehicles coupled by a quasi-static cable.
//!
//! Each vehicle follows
//!
//! ```text
//! m x''   = -m g e3 + R f e3 + F_cable
//! J w'    = -w x J w + tau
//! ```
//!
//! The cable has no state of its own: at every force evaluation it takes the
//! static catenary shape between the current endpoints.

use nalgebra::SVector;

use crate::catenary::{solve_two_point, CableSpec};
use crate::{skew, Error, Mat3, Result, Vec3};

/// Relative tolerance of the cable solve inside the integrator. Tighter than
/// the default so the force field is smooth down to rounding level.
pub const FORCE_SOLVE_TOL: f64 = 1e-14;

/// Horizontal endpoint separation below which the cable is treated as
/// hanging straight down from both ends.
pub const MIN_HORIZONTAL_SEPARATION: f64 = 1e-6;

/// Default stiffness of the penalty spring applied when the cable is taut [N/m].
pub const DEFAULT_K_TAUT: f64 = 500.0;

/// Magnitude above which a state component counts as divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorParams {
    /// Mass [kg]
    pub mass: f64,
    /// Inertia tensor [kg m²]
    pub inertia: Mat3,
    /// Gravitational acceleration [m/s²]
    pub gravity: f64,
    /// Maximum collective thrust [N]
    pub f_max: f64,
    /// Per-axis torque limit [N m]
    pub tau_max: f64,
}

impl QuadrotorParams {
    pub fn new(mass: f64, inertia: Mat3, gravity: f64, f_max: f64, tau_max: f64) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain(format!("vehicle mass must be > 0, got {mass}")));
        }
        if !(gravity > 0.0 && gravity.is_finite()) {
            return Err(Error::Domain(format!("gravity must be > 0, got {gravity}")));
        }
        if (inertia - inertia.transpose()).amax() > 1e-12 * inertia.amax() {
            return Err(Error::Domain("inertia must be symmetric".into()));
        }
        if inertia.symmetric_eigenvalues().min() <= 0.0 {
            return Err(Error::Domain("inertia must be positive definite".into()));
        }
        if !(f_max > 0.0 && tau_max > 0.0) {
            return Err(Error::Domain("actuator limits must be > 0".into()));
        }
        Ok(Self { mass, inertia, gravity, f_max, tau_max })
    }

    /// Diagonal inertia of a ~130 g quadrotor.
    pub fn default_inertia() -> Vec3 {
        Vec3::new(1.4e-5, 1.4e-5, 2.2e-5)
    }

    /// The 132 g platform carrying a cable of mass `cable_mass`, with a
    /// thrust limit of twice the combined weight.
    pub fn platform(cable_mass: f64) -> Self {
        let mass = 0.132;
        let gravity = crate::GRAVITY;
        Self {
            mass,
            inertia: Mat3::from_diagonal(&Self::default_inertia()),
            gravity,
            f_max: 2.0 * (mass + cable_mass) * gravity,
            tau_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorState {
    /// Position in the world frame [m]
    pub x: Vec3,
    /// Velocity in the world frame [m/s]
    pub v: Vec3,
    /// Rotation from body to world
    pub r: Mat3,
    /// Body angular velocity [rad/s]
    pub omega: Vec3,
}

impl QuadrotorState {
    pub fn at_rest(x: Vec3, r: Mat3) -> Self {
        Self { x, v: Vec3::zeros(), r, omega: Vec3::zeros() }
    }

    /// Roll, pitch and yaw (ZYX convention).
    pub fn euler_angles(&self) -> (f64, f64, f64) {
        let r = &self.r;
        let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
        (r[(2, 1)].atan2(r[(2, 2)]), pitch, r[(1, 0)].atan2(r[(0, 0)]))
    }
}

/// Collective thrust and body torque.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    pub f: f64,
    pub tau: Vec3,
}

impl ControlCommand {
    pub fn clamped(&self, params: &QuadrotorParams) -> Self {
        Self {
            f: self.f.clamp(0.0, params.f_max),
            tau: self.tau.map(|t| t.clamp(-params.tau_max, params.tau_max)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledState {
    pub time: f64,
    pub a: QuadrotorState,
    pub b: QuadrotorState,
    pub cable: CableSpec,
    /// Set when the endpoints are at least one cable length apart.
    pub taut: bool,
}

impl CoupledState {
    pub fn new(a: QuadrotorState, b: QuadrotorState, cable: CableSpec) -> Self {
        let taut = (a.x - b.x).norm() >= cable.length;
        Self { time: 0.0, a, b, cable, taut }
    }
}

/// Forces the cable exerts on the two ends at positions `x_a`, `x_b`.
/// Returns `(F_A, F_B, taut)`.
pub fn cable_forces_at(x_a: &Vec3, x_b: &Vec3, cable: &CableSpec, gravity: f64, k_taut: f64) -> (Vec3, Vec3, bool) {
    let half_weight = 0.5 * cable.mass * gravity * Vec3::z();
    let chord = x_b - x_a;
    let distance = chord.norm();

    let taut_forces = || {
        let pull = k_taut * (distance - cable.length).max(0.0) * chord / distance;
        (pull - half_weight, -pull - half_weight, true)
    };
    if distance >= cable.length {
        return taut_forces();
    }
    if cable.mass == 0.0 {
        return (Vec3::zeros(), Vec3::zeros(), false);
    }

    let horizontal = Vec3::new(chord.x, chord.y, 0.0);
    let h = horizontal.norm();
    if h < MIN_HORIZONTAL_SEPARATION {
        return (-half_weight, -half_weight, false);
    }
    let y_hat = horizontal / h;
    let curve = match solve_two_point(cable.length, h, x_a.z - x_b.z, FORCE_SOLVE_TOL) {
        Ok(c) => c,
        // Only reachable when rounding puts the endpoints on the taut boundary.
        Err(_) => return taut_forces(),
    };
    let w = cable.weight_per_length(gravity);
    let (arc_a, arc_b) = curve.arc_lengths();
    let horizontal_tension = w * curve.a * y_hat;
    (
        horizontal_tension - w * arc_a * Vec3::z(),
        -horizontal_tension - w * arc_b * Vec3::z(),
        false,
    )
}

/// Forces the cable exerts on vehicles A and B.
pub fn cable_forces(state: &CoupledState, gravity: f64, k_taut: f64) -> (Vec3, Vec3) {
    let (fa, fb, _) = cable_forces_at(&state.a.x, &state.b.x, &state.cable, gravity, k_taut);
    (fa, fb)
}

/// Inverse right Jacobian of SO(3): maps body angular velocity to the rate
/// of the exponential coordinates `u` in `R = R0 exp(u)`.
fn right_jacobian_inv(u: &Vec3) -> Mat3 {
    let theta = u.norm();
    let k = skew(u);
    let c = if theta < 1e-3 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Mat3::identity() + 0.5 * k + c * k * k
}

fn exp_so3(u: &Vec3) -> Mat3 {
    nalgebra::Rotation3::new(*u).into_inner()
}

/// Nearest rotation matrix (polar projection).
pub fn orthonormalize(r: &Mat3) -> Mat3 {
    let svd = r.svd(true, true);
    let (mut u, v_t) = (svd.u.unwrap(), svd.v_t.unwrap());
    if (u * v_t).determinant() < 0.0 {
        let mut col = u.column_mut(2);
        col *= -1.0;
    }
    u * v_t
}

/// Stacked `[x, v, u, w]` for both vehicles.
type Stacked = SVector<f64, 24>;

/// Fixed-step integrator for the coupled system.
#[derive(Debug, Clone, Copy)]
pub struct CoupledDynamics {
    pub params: QuadrotorParams,
    pub k_taut: f64,
}

impl CoupledDynamics {
    pub fn new(params: QuadrotorParams) -> Self {
        Self { params, k_taut: DEFAULT_K_TAUT }
    }

    pub fn cable_forces(&self, state: &CoupledState) -> (Vec3, Vec3) {
        cable_forces(state, self.params.gravity, self.k_taut)
    }

    fn rates(&self, y: &Stacked, base: [&Mat3; 2], cmds: [&ControlCommand; 2], cable: &CableSpec) -> Stacked {
        let p = &self.params;
        let pos = |i: usize| y.fixed_rows::<3>(12 * i).into_owned();
        let (fa, fb, _) = cable_forces_at(&pos(0), &pos(1), cable, p.gravity, self.k_taut);
        let forces = [fa, fb];
        let j_inv = p.inertia.try_inverse().unwrap_or_else(Mat3::identity);

        let mut out = Stacked::zeros();
        for i in 0..2 {
            let o = 12 * i;
            let v: Vec3 = y.fixed_rows::<3>(o + 3).into_owned();
            let u: Vec3 = y.fixed_rows::<3>(o + 6).into_owned();
            let w: Vec3 = y.fixed_rows::<3>(o + 9).into_owned();
            let r = base[i] * exp_so3(&u);
            let acc = -p.gravity * Vec3::z() + r * Vec3::z() * (cmds[i].f / p.mass) + forces[i] / p.mass;
            let u_dot = right_jacobian_inv(&u) * w;
            let w_dot = j_inv * (cmds[i].tau - w.cross(&(p.inertia * w)));
            out.fixed_rows_mut::<3>(o).copy_from(&v);
            out.fixed_rows_mut::<3>(o + 3).copy_from(&acc);
            out.fixed_rows_mut::<3>(o + 6).copy_from(&u_dot);
            out.fixed_rows_mut::<3>(o + 9).copy_from(&w_dot);
        }
        out
    }

    /// Advances the coupled state by `dt` with classical fourth-order
    /// Runge-Kutta. Rotations are carried as exponential coordinates relative
    /// to the rotation at the start of the step and projected back onto SO(3)
    /// afterwards. Commands are clamped to the actuator limits and held
    /// constant over the step.
    pub fn step(&self, state: &CoupledState, cmd_a: &ControlCommand, cmd_b: &ControlCommand, dt: f64) -> Result<CoupledState> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Domain(format!("time step must be > 0, got {dt}")));
        }
        let cmds = [cmd_a.clamped(&self.params), cmd_b.clamped(&self.params)];
        let cmd_refs = [&cmds[0], &cmds[1]];
        let base = [&state.a.r, &state.b.r];

        let mut y0 = Stacked::zeros();
        for (i, q) in [&state.a, &state.b].into_iter().enumerate() {
            y0.fixed_rows_mut::<3>(12 * i).copy_from(&q.x);
            y0.fixed_rows_mut::<3>(12 * i + 3).copy_from(&q.v);
            y0.fixed_rows_mut::<3>(12 * i + 9).copy_from(&q.omega);
        }

        let f = |y: &Stacked| self.rates(y, base, cmd_refs, &state.cable);
        let k1 = f(&y0);
        let k2 = f(&(y0 + 0.5 * dt * k1));
        let k3 = f(&(y0 + 0.5 * dt * k2));
        let k4 = f(&(y0 + dt * k3));
        let y1 = y0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        let time = state.time + dt;
        if let Some(i) = y1.iter().position(|c| !c.is_finite() || c.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::NumericalDivergence {
                time,
                detail: format!("state component {i} = {}", y1[i]),
            });
        }

        let unpack = |i: usize, r0: &Mat3| {
            let u: Vec3 = y1.fixed_rows::<3>(12 * i + 6).into_owned();
            QuadrotorState {
                x: y1.fixed_rows::<3>(12 * i).into_owned(),
                v: y1.fixed_rows::<3>(12 * i + 3).into_owned(),
                r: orthonormalize(&(r0 * exp_so3(&u))),
                omega: y1.fixed_rows::<3>(12 * i + 9).into_owned(),
            }
        };
        let a = unpack(0, &state.a.r);
        let b = unpack(1, &state.b.r);
        let taut = (a.x - b.x).norm() >= state.cable.length;
        if taut && !state.taut {
            log::warn!("cable became taut at t = {time:.4} s");
        }
        Ok(CoupledState { time, a, b, cable: state.cable, taut })
    }
}

/// Lowest point of the hanging cable recovered from the endpoint positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowestPoint {
    pub position: Vec3,
    /// Yaw of the cable plane, `atan2` range.
    pub yaw: f64,
    pub half_span: f64,
    /// Set when the vertex falls outside the endpoints and the lower
    /// endpoint is returned instead.
    pub clamped: bool,
}

pub fn lowest_point_from_state(state: &CoupledState) -> Result<LowestPoint> {
    if state.taut {
        return Err(Error::TautCable("lowest point undefined for a taut cable".into()));
    }
    lowest_point_between(&state.a.x, &state.b.x, &state.cable)
}

pub fn lowest_point_between(x_a: &Vec3, x_b: &Vec3, cable: &CableSpec) -> Result<LowestPoint> {
    let chord = x_b - x_a;
    let horizontal = Vec3::new(chord.x, chord.y, 0.0);
    let h = horizontal.norm();
    if h < MIN_HORIZONTAL_SEPARATION {
        return Err(Error::DegenerateGeometry("endpoints are vertically aligned".into()));
    }
    let y_hat = horizontal / h;
    let curve = solve_two_point(cable.length, h, x_a.z - x_b.z, FORCE_SOLVE_TOL)?;
    let yaw = (-y_hat.x).atan2(y_hat.y);
    if !curve.vertex_in_span() {
        let lower = if x_a.z <= x_b.z { *x_a } else { *x_b };
        return Ok(LowestPoint { position: lower, yaw, half_span: 0.5 * h, clamped: true });
    }
    let mid = 0.5 * (x_a + x_b);
    let mut position = mid + curve.vertex_offset * y_hat;
    position.z = x_a.z - curve.vertex_depth();
    Ok(LowestPoint { position, yaw, half_span: 0.5 * h, clamped: false })
}
