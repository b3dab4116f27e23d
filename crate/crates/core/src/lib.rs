//! # catenary-robot
//!
//! Simulation and control of a *catenary robot*: a flexible, inextensible cable
//! whose two ends are carried by two quadrotors. The robot is commanded in the
//! five-dimensional configuration space of the hanging curve (lowest-point
//! position, yaw of the vertical cable plane, and half-span).
//!
//! ## Modules
//!
//! - [`catenary`]: curve geometry, the length-constraint solver and its time
//!   derivatives, the unequal-height two-point solve, endpoint tension statics.
//! - [`frames`]: catenary-frame rotation and conversion of a catenary setpoint
//!   into per-vehicle position/velocity/acceleration references.
//! - [`trajectory`] and [`minsnap`]: closed-form experiment trajectories and
//!   minimum-snap waypoint interpolation.
//! - [`dynamics`]: Newton-Euler integration of both vehicles coupled through a
//!   quasi-static cable.
//! - [`control`]: desired force with gravity and tension compensation, desired
//!   attitude, thrust projection and the SO(3) attitude loop.
//! - [`scenario`]: scenario files, the closed-loop engine, statistics, CSV/JSON
//!   traces and SVG plots.

pub mod catenary;
pub mod control;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod minsnap;
pub mod scenario;
pub mod trajectory;

pub use error::{Error, Result};

use nalgebra::{Matrix3, Vector3};

/// 3D vector type
pub type Vec3 = Vector3<f64>;

/// 3x3 matrix type
pub type Mat3 = Matrix3<f64>;

/// Gravity constant [m/s²]
pub const GRAVITY: f64 = 9.81;

/// Skew-symmetric cross-product matrix, `skew(u) * v == u.cross(&v)`.
pub fn skew(u: &Vec3) -> Mat3 {
    Mat3::new(0.0, -u.z, u.y, u.z, 0.0, -u.x, -u.y, u.x, 0.0)
}

/// Inverse of [`skew`] for a skew-symmetric matrix.
pub fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Rotation about the world z-axis.
pub fn rot_z(psi: f64) -> Mat3 {
    let (s, c) = psi.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    use std::f64::consts::PI;
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}
