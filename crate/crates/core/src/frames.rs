//! Catenary-frame kinematics: from a catenary setpoint to the position,
//! velocity and acceleration each vehicle must follow.

use serde::{Deserialize, Serialize};

use crate::catenary::{endpoint_kinematics, CableSpec, CatenarySolution, Endpoint};
use crate::{rot_z, skew, Error, Mat3, Result, Vec3};

/// Desired configuration of the hanging cable with first and second time
/// derivatives. Yaw is kept unwrapped.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CatenarySetpoint {
    /// Lowest point of the curve in the world frame [m]
    pub x_c: Vec3,
    pub x_c_dot: Vec3,
    pub x_c_ddot: Vec3,
    /// Yaw of the catenary plane [rad]
    pub psi: f64,
    pub psi_dot: f64,
    pub psi_ddot: f64,
    /// Half-span [m]
    pub s: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
}

impl CatenarySetpoint {
    /// Setpoint with every rate zero.
    pub fn fixed(x_c: Vec3, psi: f64, s: f64) -> Self {
        Self { x_c, psi, s, ..Default::default() }
    }

    pub fn validate(&self, cable: &CableSpec) -> Result<()> {
        let finite = [self.psi, self.psi_dot, self.psi_ddot, self.s, self.s_dot, self.s_ddot]
            .iter()
            .chain(self.x_c.iter())
            .chain(self.x_c_dot.iter())
            .chain(self.x_c_ddot.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("setpoint has non-finite components".into()));
        }
        if !(self.s > 0.0) {
            return Err(Error::Domain(format!("half-span must be > 0, got {}", self.s)));
        }
        if self.s >= 0.5 * cable.length {
            return Err(Error::TautCable(format!(
                "half-span {} reaches half the cable length {}",
                self.s,
                0.5 * cable.length
            )));
        }
        Ok(())
    }
}

/// Desired motion of one vehicle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadrotorReference {
    pub x: Vec3,
    pub x_dot: Vec3,
    pub x_ddot: Vec3,
    /// Vehicle yaw, equal to the catenary yaw.
    pub psi: f64,
}

/// Catenary frame orientation with its first and second time derivatives.
pub fn rotz_derivatives(psi: f64, psi_dot: f64, psi_ddot: f64) -> (Mat3, Mat3, Mat3) {
    let r = rot_z(psi);
    let e3 = skew(&Vec3::z());
    let r_dot = psi_dot * e3 * r;
    let r_ddot = (psi_ddot * e3 + psi_dot * psi_dot * e3 * e3) * r;
    (r, r_dot, r_ddot)
}

/// References for both vehicles together with the catenary solution they
/// were derived from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePair {
    pub a: QuadrotorReference,
    pub b: QuadrotorReference,
    pub solution: CatenarySolution,
    /// World orientation of the catenary frame.
    pub r_c: Mat3,
}

impl ReferencePair {
    pub fn get(&self, which: Endpoint) -> &QuadrotorReference {
        match which {
            Endpoint::A => &self.a,
            Endpoint::B => &self.b,
        }
    }
}

/// Converts a catenary setpoint into the two vehicle references.
pub fn setpoint_to_references(sp: &CatenarySetpoint, spec: &CableSpec) -> Result<ReferencePair> {
    sp.validate(spec)?;
    let solution = CatenarySolution::solve(spec.length, sp.s, sp.s_dot, sp.s_ddot)?;
    let (r, r_dot, r_ddot) = rotz_derivatives(sp.psi, sp.psi_dot, sp.psi_ddot);

    let reference = |which| {
        let k = endpoint_kinematics(&solution, which);
        QuadrotorReference {
            x: sp.x_c + r * k.position,
            x_dot: sp.x_c_dot + r_dot * k.position + r * k.velocity,
            x_ddot: sp.x_c_ddot + r_ddot * k.position + r * k.acceleration + 2.0 * r_dot * k.velocity,
            psi: sp.psi,
        }
    };
    Ok(ReferencePair {
        a: reference(Endpoint::A),
        b: reference(Endpoint::B),
        solution,
        r_c: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn rotz_at_rest_is_identity() {
        let (r, rd, rdd) = rotz_derivatives(0.0, 0.0, 0.0);
        assert_eq!(r, Mat3::identity());
        assert_eq!(rd, Mat3::zeros());
        assert_eq!(rdd, Mat3::zeros());
    }

    #[test]
    fn span_out_of_range_is_rejected() {
        let cable = CableSpec::new(2.0, 0.01).unwrap();
        let sp = CatenarySetpoint::fixed(Vec3::zeros(), 0.0, 1.2);
        assert!(matches!(setpoint_to_references(&sp, &cable), Err(Error::TautCable(_))));
        let sp = CatenarySetpoint::fixed(Vec3::zeros(), 0.0, 0.0);
        assert!(matches!(setpoint_to_references(&sp, &cable), Err(Error::Domain(_))));
    }

    #[test]
    fn pure_yaw_moves_ends_on_circle() {
        let cable = CableSpec::new(2.0, 0.0).unwrap();
        let mut sp = CatenarySetpoint::fixed(Vec3::new(0.3, -0.2, 0.5), 0.7, 0.4);
        sp.psi_dot = 0.8;
        let refs = setpoint_to_references(&sp, &cable).unwrap();
        assert_relative_eq!(refs.a.x_dot.norm(), 0.8 * 0.4, max_relative = 1e-12);
        assert_relative_eq!(refs.b.x_dot.norm(), 0.8 * 0.4, max_relative = 1e-12);
        assert_relative_eq!((refs.a.x - refs.b.x).norm(), 0.8, max_relative = 1e-12);
        assert_eq!(refs.a.psi, 0.7);
    }
}
