//! Tracking controller for one vehicle of the pair.
//!
//! The outer loop builds a desired force from the position and velocity
//! errors, the reference acceleration, weight compensation and the cable
//! tension feed-forward. The desired attitude aligns the body z-axis with
//! that force while keeping the heading on the catenary yaw; the thrust is
//! the projection of the force on the desired z-axis. The inner loop is a
//! geometric attitude regulator on SO(3).

use serde::{Deserialize, Serialize};

use crate::dynamics::{ControlCommand, QuadrotorParams, QuadrotorState};
use crate::frames::QuadrotorReference;
use crate::{rot_z, vee, Error, Mat3, Result, Vec3};

/// Minimum desired-force magnitude for a defined attitude [N].
pub const MIN_FORCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    /// Diagonal of the position gain matrix.
    pub kp: Vec3,
    /// Diagonal of the velocity gain matrix.
    pub kv: Vec3,
    pub k_r: f64,
    pub k_omega: f64,
}

impl Gains {
    pub fn new(kp: Vec3, kv: Vec3, k_r: f64, k_omega: f64) -> Result<Self> {
        if kp.iter().chain(kv.iter()).any(|g| !(*g > 0.0)) || !(k_r > 0.0) || !(k_omega > 0.0) {
            return Err(Error::Domain("controller gains must be > 0".into()));
        }
        Ok(Self { kp, kv, k_r, k_omega })
    }

    /// `K_p = 16 m I`, `K_v = 6 m I`, `k_R = 0.05`, `k_w = 0.005`.
    ///
    /// The attitude loop's slow pole sits near `k_R / k_w = 10 rad/s`, fast
    /// enough that the position loop can follow the span excursion of the
    /// traverse experiment without lifting the lowest point off its altitude.
    pub fn for_mass(mass: f64) -> Self {
        Self {
            kp: Vec3::repeat(16.0 * mass),
            kv: Vec3::repeat(6.0 * mass),
            k_r: 0.05,
            k_omega: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub e_p: Vec3,
    pub e_v: Vec3,
}

impl TrackingError {
    pub fn new(reference: &QuadrotorReference, state: &QuadrotorState) -> Self {
        Self { e_p: reference.x - state.x, e_v: reference.x_dot - state.v }
    }
}

/// Sign of the weight term in the desired force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GravitySign {
    /// `+m g e3`: the thrust carries the vehicle weight.
    #[default]
    Compensate,
    /// `-m g e3` as printed in the original force law. Cannot hover.
    Paper,
}

/// Desired force with the default weight compensation.
pub fn desired_force(
    reference: &QuadrotorReference,
    state: &QuadrotorState,
    gains: &Gains,
    params: &QuadrotorParams,
    tension: &Vec3,
    r_c: &Mat3,
) -> Vec3 {
    desired_force_signed(reference, state, gains, params, tension, r_c, GravitySign::Compensate)
}

/// `f_d = K_p e_p + K_v e_v + m x''_d ± m g e3 + R_C t`, with `t` the
/// compensation tension in the catenary frame.
pub fn desired_force_signed(
    reference: &QuadrotorReference,
    state: &QuadrotorState,
    gains: &Gains,
    params: &QuadrotorParams,
    tension: &Vec3,
    r_c: &Mat3,
    sign: GravitySign,
) -> Vec3 {
    let err = TrackingError::new(reference, state);
    let weight = params.mass * params.gravity * Vec3::z();
    let weight = match sign {
        GravitySign::Compensate => weight,
        GravitySign::Paper => -weight,
    };
    gains.kp.component_mul(&err.e_p) + gains.kv.component_mul(&err.e_v) + params.mass * reference.x_ddot + weight
        + r_c * tension
}

/// Rotation whose z-axis is along `f_d` and whose x-axis is the heading
/// `Rot_z(psi) e1` projected onto the plane normal to `f_d`.
pub fn desired_attitude(f_d: &Vec3, psi: f64) -> Result<Mat3> {
    let norm = f_d.norm();
    if !(norm > MIN_FORCE) {
        return Err(Error::DegenerateAttitude);
    }
    let z_d = f_d / norm;
    let heading = rot_z(psi) * Vec3::x();
    let cross = z_d.cross(&heading);
    let cross_norm = cross.norm();
    if cross_norm < 1e-6 {
        return Err(Error::DegenerateAttitude);
    }
    let y_d = cross / cross_norm;
    let x_d = y_d.cross(&z_d).normalize();
    Ok(Mat3::from_columns(&[x_d, y_d, z_d]))
}

/// Thrust `f_d . R_d e3`, clamped to `[0, f_max]`. The flag reports clamping.
pub fn thrust_projection(f_d: &Vec3, r_d: &Mat3, f_max: f64) -> (f64, bool) {
    let f = f_d.dot(&r_d.column(2));
    let clamped = f.clamp(0.0, f_max);
    if clamped != f {
        log::debug!("thrust {f:.4} N clamped to {clamped:.4} N");
    }
    (clamped, clamped != f)
}

/// Attitude error `1/2 vee(R_d^T R - R^T R_d)`.
pub fn attitude_error(r: &Mat3, r_d: &Mat3) -> Vec3 {
    0.5 * vee(&(r_d.transpose() * r - r.transpose() * r_d))
}

/// `tau = -k_R e_R - k_w w + w x J w`, clamped per axis. The desired
/// angular velocity is zero.
pub fn attitude_torque(state: &QuadrotorState, r_d: &Mat3, gains: &Gains, params: &QuadrotorParams) -> Vec3 {
    let e_r = attitude_error(&state.r, r_d);
    let w = state.omega;
    let tau = -gains.k_r * e_r - gains.k_omega * w + w.cross(&(params.inertia * w));
    tau.map(|t| t.clamp(-params.tau_max, params.tau_max))
}

/// Output of one controller evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlOutput {
    pub command: ControlCommand,
    pub desired_force: Vec3,
    pub desired_attitude: Mat3,
    pub thrust_clamped: bool,
}

/// Per-vehicle controller. Holds the last valid desired attitude for
/// degenerate force directions.
#[derive(Debug, Clone)]
pub struct VehicleController {
    pub gains: Gains,
    pub params: QuadrotorParams,
    pub gravity_sign: GravitySign,
    last_attitude: Mat3,
}

impl VehicleController {
    pub fn new(gains: Gains, params: QuadrotorParams) -> Self {
        Self { gains, params, gravity_sign: GravitySign::Compensate, last_attitude: Mat3::identity() }
    }

    pub fn with_gravity_sign(mut self, sign: GravitySign) -> Self {
        self.gravity_sign = sign;
        self
    }

    /// Computes the command for `state` tracking `reference`. `tension` is
    /// the compensation tension expressed in the frame given by `r_c`.
    pub fn update(
        &mut self,
        reference: &QuadrotorReference,
        state: &QuadrotorState,
        tension: &Vec3,
        r_c: &Mat3,
    ) -> ControlOutput {
        let f_d = desired_force_signed(reference, state, &self.gains, &self.params, tension, r_c, self.gravity_sign);
        let r_d = match desired_attitude(&f_d, reference.psi) {
            Ok(r) => r,
            Err(_) => {
                log::debug!("degenerate desired attitude, holding previous");
                self.last_attitude
            }
        };
        self.last_attitude = r_d;
        let (f, thrust_clamped) = thrust_projection(&f_d, &r_d, self.params.f_max);
        let tau = attitude_torque(state, &r_d, &self.gains, &self.params);
        ControlOutput {
            command: ControlCommand { f, tau },
            desired_force: f_d,
            desired_attitude: r_d,
            thrust_clamped,
        }
    }
}
