use serde::{Deserialize, Serialize};

use super::engine::{RunTrace, TraceRow};
use crate::{wrap_angle, Error, Result};

/// Error statistics over a time window. Errors are `desired - actual`; `std`
/// fields are population standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub window_start: f64,
    pub samples: usize,
    /// Per-axis mean of the lowest-point error.
    pub mean: [f64; 3],
    pub std: [f64; 3],
    pub mean_yaw: f64,
    pub std_yaw: f64,
    pub mean_span: f64,
    pub std_span: f64,
    /// RMS of the lowest-point error norm.
    pub rms_position: f64,
    pub rms_yaw: f64,
    pub rms_span: f64,
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let rms = (values.map(|v| v * v).sum::<f64>() / n).sqrt();
    (mean, var.sqrt(), rms)
}

/// Statistics of the rows with `t >= from`.
pub fn stats(trace: &RunTrace, from: f64) -> Result<Summary> {
    let rows: Vec<&TraceRow> = trace.rows.iter().filter(|r| r.t >= from).collect();
    if rows.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let axis = |k: usize| moments(rows.iter().map(move |r| r.x_c_d[k] - r.x_c[k]));
    let (mx, sx, _) = axis(0);
    let (my, sy, _) = axis(1);
    let (mz, sz, _) = axis(2);
    let (_, _, rms_position) = moments(rows.iter().map(|r| {
        let e: f64 = (0..3).map(|k| (r.x_c_d[k] - r.x_c[k]).powi(2)).sum();
        e.sqrt()
    }));
    let (mean_yaw, std_yaw, rms_yaw) = moments(rows.iter().map(|r| wrap_angle(r.psi_d - r.psi)));
    let (mean_span, std_span, rms_span) = moments(rows.iter().map(|r| r.span_d - r.span));
    Ok(Summary {
        window_start: from,
        samples: rows.len(),
        mean: [mx, my, mz],
        std: [sx, sy, sz],
        mean_yaw,
        std_yaw,
        mean_span,
        std_span,
        rms_position,
        rms_yaw,
        rms_span,
    })
}
