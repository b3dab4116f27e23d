//! Catenary geometry and statics.
//!
//! In the catenary frame {C} the origin is the lowest point of the curve, the
//! y-axis is the tangent at that point (pointing from vehicle A to vehicle B)
//! and z points up. The curve is `alpha(r) = [0, r, a (cosh(r/a) - 1)]` for
//! `r` in `[-s, s]`, where `a` is fixed by the cable length through
//! `l / 2 = a sinh(s / a)`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec3};

/// Default relative tolerance for the length-constraint solve.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Smallest admissible half-span as a fraction of the cable length.
pub const MIN_SPAN_RATIO: f64 = 1e-4;

/// Threshold on `|sinh(u) - u cosh(u)|` below which the derivative
/// equations cannot be solved for the rates of `a`.
pub const DEGENERACY_EPS: f64 = 1e-12;

const MAX_BISECTION_ITERS: usize = 1100;

/// Physical description of the cable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CableSpec {
    /// Length [m]
    pub length: f64,
    /// Mass [kg]
    pub mass: f64,
}

impl CableSpec {
    pub fn new(length: f64, mass: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Domain(format!("cable length must be > 0, got {length}")));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::Domain(format!("cable mass must be >= 0, got {mass}")));
        }
        Ok(Self { length, mass })
    }

    /// Weight per unit length `w = m_C g / l` [N/m].
    pub fn weight_per_length(&self, gravity: f64) -> f64 {
        self.mass * gravity / self.length
    }

    /// Total weight of the cable [N].
    pub fn weight(&self, gravity: f64) -> f64 {
        self.mass * gravity
    }
}

/// Curve parameter and half-span of a symmetric catenary together with
/// their first and second time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatenarySolution {
    pub a: f64,
    pub s: f64,
    pub a_dot: f64,
    pub a_ddot: f64,
    pub s_dot: f64,
    pub s_ddot: f64,
}

impl CatenarySolution {
    /// Solves the length constraint and its time derivatives for a span
    /// trajectory sample `(s, s_dot, s_ddot)`.
    pub fn solve(length: f64, s: f64, s_dot: f64, s_ddot: f64) -> Result<Self> {
        let a = solve_a(length, s, DEFAULT_TOL)?;
        let (a_dot, a_ddot) = solve_a_derivatives(a, s, s_dot, s_ddot)?;
        Ok(Self { a, s, a_dot, a_ddot, s_dot, s_ddot })
    }

    /// Static configuration (all rates zero).
    pub fn at_rest(length: f64, s: f64) -> Result<Self> {
        Self::solve(length, s, 0.0, 0.0)
    }

    /// Vertical drop from the endpoints to the lowest point.
    pub fn sag(&self) -> f64 {
        sag(self.a, self.s)
    }
}

/// `a (cosh(s/a) - 1)` without cancellation for flat curves.
pub fn sag(a: f64, s: f64) -> f64 {
    let h = (0.5 * s / a).sinh();
    2.0 * a * h * h
}

/// Solves `l / 2 = a sinh(s / a)` for the curve parameter `a` by bisection.
///
/// The bracket starts at `[1e-9 s, 1e6 s]`; the upper end is doubled until the
/// residual changes sign. Iteration stops once the bracket is narrower than
/// `tol * a` and the relative length residual is below `tol`, or when the
/// bracket can no longer be split.
pub fn solve_a(length: f64, s: f64, tol: f64) -> Result<f64> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Domain(format!("cable length must be > 0, got {length}")));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::Domain(format!("half-span must be > 0, got {s}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    if s >= 0.5 * length {
        return Err(Error::TautCable(format!(
            "half-span {s} reaches half the cable length {}",
            0.5 * length
        )));
    }
    if s < MIN_SPAN_RATIO * length {
        return Err(Error::Domain(format!(
            "half-span {s} below the minimum {}",
            MIN_SPAN_RATIO * length
        )));
    }
    bisect_parameter(length, s, tol)
}

/// Bisection on `2 a sinh(half / a) - chord`, which is strictly decreasing in
/// `a` and positive for small `a`. Requires `0 < 2 half < chord`.
fn bisect_parameter(chord: f64, half: f64, tol: f64) -> Result<f64> {
    let residual = |a: f64| 2.0 * a * (half / a).sinh() - chord;

    let mut lo = 1e-9 * half;
    let mut hi = 1e6 * half;
    while residual(hi) >= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::TautCable(format!(
                "no finite curve parameter for chord {chord} and half-span {half}"
            )));
        }
    }

    for _ in 0..MAX_BISECTION_ITERS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let r = residual(mid);
        if r == 0.0 {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= tol * lo && r.abs() <= tol * chord {
            return Ok(mid);
        }
    }
    Ok(if residual(lo).abs() <= residual(hi).abs() { lo } else { hi })
}

/// `sinh(u) - u cosh(u)`, evaluated by its series near zero.
fn sinh_minus_u_cosh(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // -sum_k 2k u^(2k+1) / (2k+1)!
        let u2 = u * u;
        let mut power = u;
        let mut factorial = 1.0;
        let mut sum = 0.0;
        for k in 1..12 {
            power *= u2;
            factorial *= (2 * k) as f64 * (2 * k + 1) as f64;
            sum -= (2 * k) as f64 * power / factorial;
        }
        sum
    } else {
        u.sinh() - u * u.cosh()
    }
}

/// First and second time derivatives of `a` from the differentiated length
/// constraint.
///
/// Once `a` satisfies the length constraint both derivative equations are
/// linear in the unknown rate, with coefficient `sinh(s/a) - (s/a) cosh(s/a)`.
pub fn solve_a_derivatives(a: f64, s: f64, s_dot: f64, s_ddot: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::Domain(format!("curve parameter must be > 0, got {a}")));
    }
    let u = s / a;
    let (sh, ch) = (u.sinh(), u.cosh());
    let coef = sinh_minus_u_cosh(u);
    if coef.abs() < DEGENERACY_EPS {
        return Err(Error::DegenerateGeometry(format!(
            "derivative coefficient {coef:e} at s/a = {u}"
        )));
    }

    // 0 = a_dot sinh(u) + a u_dot cosh(u)
    let a_dot = -s_dot * ch / coef;
    let u_dot = (s_dot - u * a_dot) / a;

    // 0 = a u_dot^2 sinh(u) + 2 a_dot u_dot cosh(u) + a u_ddot cosh(u) + a_ddot sinh(u)
    let known = a * u_dot * u_dot * sh
        + 2.0 * a_dot * u_dot * ch
        + (s_ddot - 2.0 * s_dot * a_dot / a + 2.0 * u * a_dot * a_dot / a) * ch;
    let a_ddot = -known / coef;
    Ok((a_dot, a_ddot))
}

/// Point of the curve at arc parameter `r` in the catenary frame.
pub fn curve_point(a: f64, s: f64, r: f64) -> Result<Vec3> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("curve parameter must be > 0, got {a}")));
    }
    if !(r.abs() <= s) {
        return Err(Error::Domain(format!("parameter {r} outside [-{s}, {s}]")));
    }
    Ok(Vec3::new(0.0, r, sag(a, r.abs())))
}

/// Cable end selector. A sits at `r = -s`, B at `r = +s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    A,
    B,
}

/// Position, velocity and acceleration of one cable end in the catenary frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointKinematics {
    pub position: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
}

pub fn endpoint_kinematics(sol: &CatenarySolution, which: Endpoint) -> EndpointKinematics {
    let CatenarySolution { a, s, a_dot, a_ddot, s_dot, s_ddot } = *sol;
    let u = s / a;
    let (sh, ch) = (u.sinh(), u.cosh());
    let ch_m1 = sag(a, s) / a;
    let u_dot = s_dot / a - s * a_dot / (a * a);
    let a_u_ddot = s_ddot - 2.0 * s_dot * a_dot / a - s * a_ddot / a + 2.0 * s * a_dot * a_dot / (a * a);

    let z = a * ch_m1;
    let z_dot = a_dot * ch_m1 + a * u_dot * sh;
    let z_ddot = a_ddot * ch_m1 + 2.0 * a_dot * u_dot * sh + a_u_ddot * sh + a * u_dot * u_dot * ch;

    let side = match which {
        Endpoint::A => -1.0,
        Endpoint::B => 1.0,
    };
    EndpointKinematics {
        position: Vec3::new(0.0, side * s, z),
        velocity: Vec3::new(0.0, side * s_dot, z_dot),
        acceleration: Vec3::new(0.0, side * s_ddot, z_ddot),
    }
}

/// How the vertical component of the end tension is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensionMode {
    /// `w a sinh(s/a) = w l / 2`: each end carries half the cable weight.
    #[default]
    Classical,
    /// `w z`, with `z` the endpoint height above the lowest point.
    Paper,
}

/// Compensation tensions at the two ends, in the catenary frame.
///
/// These are the forces a vehicle must add to cancel the cable's pull, so the
/// force the cable exerts on a vehicle is the negation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensionPair {
    pub a: Vec3,
    pub b: Vec3,
}

impl TensionPair {
    pub fn zero() -> Self {
        Self { a: Vec3::zeros(), b: Vec3::zeros() }
    }

    pub fn get(&self, which: Endpoint) -> Vec3 {
        match which {
            Endpoint::A => self.a,
            Endpoint::B => self.b,
        }
    }
}

pub fn tension_pair(spec: &CableSpec, sol: &CatenarySolution, mode: TensionMode, gravity: f64) -> TensionPair {
    let w = spec.weight_per_length(gravity);
    let horizontal = w * sol.a;
    let vertical = match mode {
        TensionMode::Classical => 0.5 * spec.mass * gravity,
        TensionMode::Paper => w * sol.sag(),
    };
    TensionPair {
        a: Vec3::new(0.0, -horizontal, vertical),
        b: Vec3::new(0.0, horizontal, vertical),
    }
}

/// Catenary through two endpoints at possibly different heights.
///
/// Span coordinates: the first endpoint sits at `-h/2`, the second at `+h/2`,
/// and `drop` is the height of the first endpoint above the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPointCatenary {
    pub a: f64,
    /// Horizontal position of the vertex relative to the chord midpoint,
    /// positive toward the second endpoint.
    pub vertex_offset: f64,
    pub horizontal: f64,
    pub drop: f64,
    pub length: f64,
}

impl TwoPointCatenary {
    /// Arc lengths from the vertex to the first and second endpoints. A side
    /// is negative when the vertex lies beyond that endpoint.
    pub fn arc_lengths(&self) -> (f64, f64) {
        let half = 0.5 * self.horizontal;
        (
            self.a * ((half + self.vertex_offset) / self.a).sinh(),
            self.a * ((half - self.vertex_offset) / self.a).sinh(),
        )
    }

    /// Depth of the vertex below the first endpoint.
    pub fn vertex_depth(&self) -> f64 {
        let r = 0.5 * self.horizontal + self.vertex_offset;
        sag(self.a, r.abs())
    }

    /// Whether the vertex lies between the two endpoints.
    pub fn vertex_in_span(&self) -> bool {
        self.vertex_offset.abs() <= 0.5 * self.horizontal
    }
}

/// Solves the unequal-height catenary `sqrt(l^2 - v^2) = 2 a sinh(h / (2a))`.
///
/// Reduces to [`solve_a`] with `s = h/2` when `v = 0`.
pub fn solve_two_point(length: f64, h: f64, v: f64, tol: f64) -> Result<TwoPointCatenary> {
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Domain(format!("cable length must be > 0, got {length}")));
    }
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!("horizontal separation must be > 0, got {h}")));
    }
    if !v.is_finite() {
        return Err(Error::Domain(format!("vertical offset must be finite, got {v}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    if length * length <= h * h + v * v {
        return Err(Error::TautCable(format!(
            "endpoint distance {} reaches cable length {length}",
            (h * h + v * v).sqrt()
        )));
    }
    let chord = (length * length - v * v).sqrt();
    let a = bisect_parameter(chord, 0.5 * h, tol)?;
    Ok(TwoPointCatenary {
        a,
        vertex_offset: a * (v / length).atanh(),
        horizontal: h,
        drop: v,
        length,
    })
}
