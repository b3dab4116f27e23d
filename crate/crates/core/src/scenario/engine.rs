use serde::{Deserialize, Serialize};

use super::stats::{stats, Summary};
use super::{ScenarioSpec, TensionSource};
use crate::catenary::{tension_pair, CableSpec, Endpoint, TensionPair};
use crate::control::{desired_attitude, Gains, TrackingError, VehicleController};
use crate::dynamics::{
    cable_forces, lowest_point_from_state, ControlCommand, CoupledDynamics, CoupledState, LowestPoint,
    QuadrotorState,
};
use crate::frames::{setpoint_to_references, ReferencePair};
use crate::trajectory::Trajectory;
use crate::{wrap_angle, Error, Mat3, Result, Vec3};

/// One logged sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: f64,
    pub x_a: [f64; 3],
    pub x_b: [f64; 3],
    /// Lowest point recovered from the vehicle positions.
    pub x_c: [f64; 3],
    pub x_c_d: [f64; 3],
    /// Measured yaw, unwrapped toward the desired yaw.
    pub psi: f64,
    pub psi_d: f64,
    pub span: f64,
    pub span_d: f64,
    pub f_a: f64,
    pub f_b: f64,
    /// Roll, pitch, yaw of vehicle A.
    pub att_a: [f64; 3],
    pub att_b: [f64; 3],
    pub taut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub scenario: String,
    pub stats_from: f64,
    pub rows: Vec<TraceRow>,
    /// Absent when the statistics window holds no samples.
    pub summary: Option<Summary>,
}

/// Result of a run. `error` holds the divergence that cut the run short.
#[derive(Debug)]
pub struct RunOutcome {
    pub trace: RunTrace,
    pub error: Option<Error>,
}

/// Closed-loop simulation of one scenario, advanced one integrator step at a
/// time.
pub struct Engine {
    dynamics: CoupledDynamics,
    trajectory: Trajectory,
    cable: CableSpec,
    controllers: [VehicleController; 2],
    state: CoupledState,
    sensed: CoupledState,
    commands: [ControlCommand; 2],
    tracking: [TrackingError; 2],
    references: ReferencePair,
    dt: f64,
    control_hz: f64,
    sense_hz: Option<f64>,
    steps_per_tick: u64,
    step: u64,
    next_sense: u64,
    feedforward: bool,
    tension_mode: crate::catenary::TensionMode,
    tension_source: TensionSource,
}

fn initial_vehicle(reference: &crate::frames::QuadrotorReference, x: Vec3, hover_force: Vec3) -> QuadrotorState {
    let r = desired_attitude(&hover_force, reference.psi).unwrap_or_else(|_| crate::rot_z(reference.psi));
    QuadrotorState::at_rest(x, r)
}

impl Engine {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let cable = spec.cable_spec()?;
        let params = spec.quadrotor_params()?;
        let gains: Gains = spec.controller_gains()?;
        let trajectory = spec.trajectory.build()?;
        let mut dynamics = CoupledDynamics::new(params);
        dynamics.k_taut = spec.sim.k_taut;

        let sp0 = trajectory.setpoint(0.0);
        let refs = setpoint_to_references(&sp0, &cable)?;
        let offset = Vec3::from(spec.sim.initial_offset);
        let tension = if spec.modes.feedforward {
            tension_pair(&cable, &refs.solution, spec.modes.tension, params.gravity)
        } else {
            TensionPair::zero()
        };
        let weight = params.mass * params.gravity * Vec3::z();
        let a = initial_vehicle(&refs.a, refs.a.x + offset, weight + refs.r_c * tension.a);
        let b = initial_vehicle(&refs.b, refs.b.x + offset, weight + refs.r_c * tension.b);
        let state = CoupledState::new(a, b, cable);

        let controller = VehicleController::new(gains, params).with_gravity_sign(spec.modes.gravity_sign);
        let zero_err = TrackingError { e_p: Vec3::zeros(), e_v: Vec3::zeros() };
        let mut engine = Self {
            dynamics,
            trajectory,
            cable,
            controllers: [controller.clone(), controller],
            state,
            sensed: state,
            commands: [ControlCommand::default(); 2],
            tracking: [zero_err; 2],
            references: refs,
            dt: spec.sim.dt,
            control_hz: spec.sim.control_hz,
            sense_hz: spec.sim.sense_hz,
            steps_per_tick: spec.steps_per_tick()?,
            step: 0,
            next_sense: 0,
            feedforward: spec.modes.feedforward,
            tension_mode: spec.modes.tension,
            tension_source: spec.modes.tension_source,
        };
        // commands and errors are meaningful before the first step
        engine.sense();
        engine.control_tick()?;
        Ok(engine)
    }

    pub fn state(&self) -> &CoupledState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    /// Commands currently held by the zero-order hold.
    pub fn commands(&self) -> &[ControlCommand; 2] {
        &self.commands
    }

    /// Tracking errors of both vehicles at the most recent controller tick.
    pub fn tracking_errors(&self) -> &[TrackingError; 2] {
        &self.tracking
    }

    /// References used at the most recent controller tick.
    pub fn references(&self) -> &ReferencePair {
        &self.references
    }

    fn sense(&mut self) {
        match self.sense_hz {
            None => self.sensed = self.state,
            Some(hz) => {
                // sample k is taken at the first step at or after k / hz
                let t = self.time();
                if t + 1e-9 * self.dt >= self.next_sense as f64 / hz {
                    self.sensed = self.state;
                    while self.next_sense as f64 / hz <= t + 1e-9 * self.dt {
                        self.next_sense += 1;
                    }
                }
            }
        }
    }

    fn control_tick(&mut self) -> Result<()> {
        let tick = self.step / self.steps_per_tick;
        let t = tick as f64 / self.control_hz;
        let sp = self.trajectory.setpoint(t);
        let refs = setpoint_to_references(&sp, &self.cable)?;
        let gravity = self.dynamics.params.gravity;

        let (tension, r_c) = if !self.feedforward {
            (TensionPair::zero(), refs.r_c)
        } else {
            match self.tension_source {
                TensionSource::Desired => (tension_pair(&self.cable, &refs.solution, self.tension_mode, gravity), refs.r_c),
                TensionSource::Measured => {
                    let (fa, fb) = cable_forces(&self.sensed, gravity, self.dynamics.k_taut);
                    (TensionPair { a: -fa, b: -fb }, Mat3::identity())
                }
            }
        };

        for (i, which) in [Endpoint::A, Endpoint::B].into_iter().enumerate() {
            let vehicle = match which {
                Endpoint::A => &self.sensed.a,
                Endpoint::B => &self.sensed.b,
            };
            let reference = refs.get(which);
            let out = self.controllers[i].update(reference, vehicle, &tension.get(which), &r_c);
            self.commands[i] = out.command;
            self.tracking[i] = TrackingError::new(reference, vehicle);
        }
        self.references = refs;
        Ok(())
    }

    /// Runs the controller if a tick is due, then advances one integrator step.
    pub fn advance(&mut self) -> Result<()> {
        self.sense();
        if self.step % self.steps_per_tick == 0 {
            self.control_tick()?;
        }
        let mut next = self.dynamics.step(&self.state, &self.commands[0], &self.commands[1], self.dt)?;
        self.step += 1;
        next.time = self.time();
        self.state = next;
        Ok(())
    }

    /// Lowest point of the current state. A taut or vertically aligned cable
    /// falls back to the chord midpoint at the lower endpoint height.
    pub fn lowest_point(&self) -> LowestPoint {
        let (xa, xb) = (self.state.a.x, self.state.b.x);
        lowest_point_from_state(&self.state).unwrap_or_else(|_| {
            let chord = xb - xa;
            let h = chord.xy().norm();
            let yaw = if h > 0.0 { (-chord.x).atan2(chord.y) } else { 0.0 };
            let mut position = 0.5 * (xa + xb);
            position.z = xa.z.min(xb.z);
            LowestPoint { position, yaw, half_span: 0.5 * h, clamped: true }
        })
    }

    /// Trace row for the current state.
    pub fn sample(&self) -> TraceRow {
        let t = self.time();
        let sp = self.trajectory.setpoint(t);
        let lp = self.lowest_point();
        let psi = sp.psi + wrap_angle(lp.yaw - sp.psi);
        let euler = |q: &QuadrotorState| {
            let (r, p, y) = q.euler_angles();
            [r, p, y]
        };
        TraceRow {
            t,
            x_a: self.state.a.x.into(),
            x_b: self.state.b.x.into(),
            x_c: lp.position.into(),
            x_c_d: sp.x_c.into(),
            psi,
            psi_d: sp.psi,
            span: lp.half_span,
            span_d: sp.s,
            f_a: self.commands[0].f,
            f_b: self.commands[1].f,
            att_a: euler(&self.state.a),
            att_b: euler(&self.state.b),
            taut: self.state.taut,
        }
    }
}

/// Runs a scenario to completion. Divergence stops the run and is returned
/// alongside the partial trace; invalid scenarios are errors.
pub fn run(spec: &ScenarioSpec) -> Result<RunOutcome> {
    let mut engine = Engine::new(spec)?;
    let dt = spec.sim.dt;
    let total_steps = (spec.sim.duration_s / dt).round() as u64;
    let last_sample = (spec.sim.duration_s * spec.sim.log_hz + 1e-9).floor() as u64;
    let log_hz = spec.sim.log_hz;

    let mut rows = Vec::with_capacity(last_sample as usize + 1);
    let mut next_sample = 0u64;
    let mut error = None;
    loop {
        let t = engine.time();
        while next_sample <= last_sample && next_sample as f64 / log_hz <= t + 1e-9 * dt {
            rows.push(engine.sample());
            next_sample += 1;
        }
        if engine.step >= total_steps {
            break;
        }
        if let Err(e) = engine.advance() {
            log::error!("run '{}' stopped: {e}", spec.name);
            error = Some(e);
            break;
        }
    }
    // Rounding of the final step time can leave the last sample unrecorded.
    if error.is_none() {
        while next_sample <= last_sample {
            rows.push(engine.sample());
            next_sample += 1;
        }
    }

    let mut trace = RunTrace { scenario: spec.name.clone(), stats_from: spec.sim.stats_from_s, rows, summary: None };
    trace.summary = stats(&trace, spec.sim.stats_from_s).ok();
    Ok(RunOutcome { trace, error })
}
