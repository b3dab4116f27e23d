//! Minimum-snap piecewise polynomials through 3D waypoints.
//!
//! Each axis of each segment is a 7th-degree polynomial in normalized time
//! `tau = (t - t_j) / T_j`. The coefficients minimize the integrated squared
//! snap subject to waypoint interpolation, continuity of derivatives one
//! through four at interior knots, and zero velocity, acceleration and jerk at
//! both ends. The equality-constrained quadratic program is solved through its
//! KKT system.

use nalgebra::DMatrix;

use crate::{Error, Result, Vec3};

const COEFFS: usize = 8;
const SNAP: usize = 4;
/// Derivative orders pinned to zero at the two ends of the trajectory.
const END_ORDERS: std::ops::RangeInclusive<usize> = 1..=3;
/// Derivative orders kept continuous at interior knots.
const JOINT_ORDERS: std::ops::RangeInclusive<usize> = 1..=4;

/// `k (k-1) ... (k-n+1)`
fn falling(k: usize, n: usize) -> f64 {
    (0..n).map(|i| (k - i) as f64).product()
}

#[derive(Debug, Clone)]
pub struct MinSnapTrajectory {
    /// Knot times, `knots[0] = 0`.
    knots: Vec<f64>,
    /// `coeffs[segment][axis][power]` in normalized time.
    coeffs: Vec<[[f64; COEFFS]; 3]>,
}

/// Assembled quadratic program, scaled for conditioning.
struct Problem {
    q: DMatrix<f64>,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

fn assemble(waypoints: &[Vec3], durations: &[f64]) -> Problem {
    let segments = durations.len();
    let vars = COEFFS * segments;
    let t_ref = durations.iter().sum::<f64>() / segments as f64;

    let mut q = DMatrix::zeros(vars, vars);
    for (j, &dur) in durations.iter().enumerate() {
        let scale = (t_ref / dur).powi(7);
        for k in SNAP..COEFFS {
            for l in SNAP..COEFFS {
                q[(j * COEFFS + k, j * COEFFS + l)] =
                    scale * falling(k, SNAP) * falling(l, SNAP) / (k + l - 2 * SNAP + 1) as f64;
            }
        }
    }

    let rows = 2 * segments + 2 * END_ORDERS.count() + JOINT_ORDERS.count() * (segments - 1);
    let mut a = DMatrix::zeros(rows, vars);
    let mut b = DMatrix::zeros(rows, 3);
    let mut row = 0;
    let set_b = |b: &mut DMatrix<f64>, row: usize, p: &Vec3| {
        for axis in 0..3 {
            b[(row, axis)] = p[axis];
        }
    };

    for j in 0..segments {
        a[(row, j * COEFFS)] = 1.0;
        set_b(&mut b, row, &waypoints[j]);
        row += 1;
        for k in 0..COEFFS {
            a[(row, j * COEFFS + k)] = 1.0;
        }
        set_b(&mut b, row, &waypoints[j + 1]);
        row += 1;
    }

    let last = segments - 1;
    for n in END_ORDERS {
        let first_scale = (t_ref / durations[0]).powi(n as i32);
        a[(row, n)] = falling(n, n) * first_scale;
        row += 1;
        let last_scale = (t_ref / durations[last]).powi(n as i32);
        for k in n..COEFFS {
            a[(row, last * COEFFS + k)] = falling(k, n) * last_scale;
        }
        row += 1;
    }

    for j in 0..last {
        for n in JOINT_ORDERS {
            let left = (t_ref / durations[j]).powi(n as i32);
            let right = (t_ref / durations[j + 1]).powi(n as i32);
            for k in n..COEFFS {
                a[(row, j * COEFFS + k)] = falling(k, n) * left;
            }
            a[(row, (j + 1) * COEFFS + n)] -= falling(n, n) * right;
            row += 1;
        }
    }
    debug_assert_eq!(row, rows);
    Problem { q, a, b }
}

impl MinSnapTrajectory {
    /// Builds the trajectory with explicit segment durations.
    pub fn new(waypoints: &[Vec3], durations: &[f64]) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::Config(format!("need at least 2 waypoints, got {}", waypoints.len())));
        }
        if durations.len() != waypoints.len() - 1 {
            return Err(Error::Config(format!(
                "{} waypoints need {} durations, got {}",
                waypoints.len(),
                waypoints.len() - 1,
                durations.len()
            )));
        }
        if let Some(bad) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::SingularQp(format!("segment duration {bad} is not positive")));
        }

        let Problem { q, a, b } = assemble(waypoints, durations);
        let vars = q.nrows();
        let cons = a.nrows();
        let n = vars + cons;
        let mut kkt = DMatrix::zeros(n, n);
        kkt.view_mut((0, 0), (vars, vars)).copy_from(&q);
        kkt.view_mut((vars, 0), (cons, vars)).copy_from(&a);
        kkt.view_mut((0, vars), (vars, cons)).copy_from(&a.transpose());
        let mut rhs = DMatrix::zeros(n, 3);
        rhs.view_mut((vars, 0), (cons, 3)).copy_from(&b);

        let sv = kkt.singular_values();
        let (max, min) = (sv.max(), sv.min());
        if !(min > 1e-13 * max) {
            return Err(Error::SingularQp(format!("KKT condition {:e}", max / min)));
        }
        let solution = kkt
            .full_piv_lu()
            .solve(&rhs)
            .ok_or_else(|| Error::SingularQp("KKT system not invertible".into()))?;

        let mut coeffs = vec![[[0.0; COEFFS]; 3]; durations.len()];
        for (j, seg) in coeffs.iter_mut().enumerate() {
            for (axis, poly) in seg.iter_mut().enumerate() {
                for (k, c) in poly.iter_mut().enumerate() {
                    *c = solution[(j * COEFFS + k, axis)];
                }
            }
        }
        let mut knots = Vec::with_capacity(waypoints.len());
        knots.push(0.0);
        for d in durations {
            knots.push(knots.last().unwrap() + d);
        }
        Ok(Self { knots, coeffs })
    }

    /// Durations proportional to the distance between consecutive waypoints,
    /// summing to `total_time`.
    pub fn with_total_time(waypoints: &[Vec3], total_time: f64) -> Result<Self> {
        if !(total_time.is_finite() && total_time > 0.0) {
            return Err(Error::Config(format!("total time must be > 0, got {total_time}")));
        }
        let distances: Vec<f64> = waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let total: f64 = distances.iter().sum();
        let durations: Vec<f64> = distances.iter().map(|d| total_time * d / total).collect();
        Self::new(waypoints, &durations)
    }

    pub fn horizon(&self) -> f64 {
        *self.knots.last().unwrap()
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn segment_count(&self) -> usize {
        self.coeffs.len()
    }

    fn segment_at(&self, t: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    /// `order`-th derivative of segment `j` at normalized time `tau`.
    pub fn segment_derivative(&self, j: usize, tau: f64, order: usize) -> Vec3 {
        let dur = self.knots[j + 1] - self.knots[j];
        let mut out = Vec3::zeros();
        for axis in 0..3 {
            let poly = &self.coeffs[j][axis];
            // Horner on the differentiated coefficients
            let mut acc = 0.0;
            for k in (order..COEFFS).rev() {
                acc = acc * tau + falling(k, order) * poly[k];
            }
            out[axis] = acc / dur.powi(order as i32);
        }
        out
    }

    /// `order`-th derivative at time `t`. Outside the horizon the trajectory
    /// holds its end positions with zero rates.
    pub fn derivative(&self, t: f64, order: usize) -> Vec3 {
        let horizon = self.horizon();
        if t <= 0.0 || t >= horizon {
            if order > 0 {
                return Vec3::zeros();
            }
            let (j, tau) = if t <= 0.0 { (0, 0.0) } else { (self.coeffs.len() - 1, 1.0) };
            return self.segment_derivative(j, tau, 0);
        }
        let j = self.segment_at(t);
        let tau = (t - self.knots[j]) / (self.knots[j + 1] - self.knots[j]);
        self.segment_derivative(j, tau, order)
    }

    /// Position, velocity and acceleration at time `t`.
    pub fn evaluate(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        (self.derivative(t, 0), self.derivative(t, 1), self.derivative(t, 2))
    }

    /// Left limit minus right limit of the `order`-th derivative at interior
    /// knot `joint` (between segments `joint - 1` and `joint`).
    pub fn joint_mismatch(&self, joint: usize, order: usize) -> Vec3 {
        self.segment_derivative(joint - 1, 1.0, order) - self.segment_derivative(joint, 0.0, order)
    }

    /// Integral of the squared snap over the horizon, summed over axes.
    pub fn snap_cost(&self) -> f64 {
        let mut cost = 0.0;
        for (j, seg) in self.coeffs.iter().enumerate() {
            let dur = self.knots[j + 1] - self.knots[j];
            for poly in seg {
                cost += snap_cost_normalized(poly) / dur.powi(7);
            }
        }
        cost
    }
}

fn snap_cost_normalized(poly: &[f64; COEFFS]) -> f64 {
    let mut cost = 0.0;
    for k in SNAP..COEFFS {
        for l in SNAP..COEFFS {
            cost += poly[k] * poly[l] * falling(k, SNAP) * falling(l, SNAP) / (k + l - 2 * SNAP + 1) as f64;
        }
    }
    cost
}
