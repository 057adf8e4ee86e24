//! Equations of motion, adaptive integration and event location.

#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
pub mod dop853;
mod events;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{ThreeBodyState, Vec2};
use crate::potentials::{evaluate_positions, PotentialModel};

pub use dop853::{Control, DenseSegment, Dop853Options, Dop853Stats, OdeSystem};
pub use events::{
    detect_events, find_root, poincare_section, Event, EventKind, EventPayload, EventSpec, Section,
    SectionCrossing,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step; unlimited when `None`.
    pub max_step: Option<f64>,
    /// Collision guard; defaults to `1e−6` of the initial hyper-radius.
    pub min_pair_separation: Option<f64>,
    /// Longest integration span accepted.
    pub max_time: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: None,
            min_pair_separation: None,
            max_time: 1e6,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, tol) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1e-2], got {tol}"
                )));
            }
        }
        if let Some(sep) = self.min_pair_separation {
            if !(sep > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "min_pair_separation must be positive, got {sep}"
                )));
            }
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "max_step must be positive, got {h}"
                )));
            }
        }
        Ok(())
    }
}

/// Newton's equations `ẍᵢ = Fᵢ/m` for one potential, in the packed 12-vector
/// layout of [`ThreeBodyState::to_array`].
#[derive(Debug, Clone, Copy)]
pub struct ThreeBodySystem {
    pub model: PotentialModel,
    pub m: f64,
}

impl OdeSystem<12> for ThreeBodySystem {
    fn rhs(&self, _t: f64, y: &[f64; 12], dy: &mut [f64; 12]) -> Result<()> {
        let x = [
            Vec2::new(y[0], y[1]),
            Vec2::new(y[2], y[3]),
            Vec2::new(y[4], y[5]),
        ];
        let e = evaluate_positions(&self.model, &x)?;
        dy[..6].copy_from_slice(&y[6..]);
        for i in 0..3 {
            dy[6 + 2 * i] = e.forces[i].x / self.m;
            dy[7 + 2 * i] = e.forces[i].y / self.m;
        }
        Ok(())
    }
}

/// Time derivative of a state: velocities and accelerations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub velocities: [Vec2; 3],
    pub accelerations: [Vec2; 3],
}

pub fn derivative(model: &PotentialModel, state: &ThreeBodyState) -> Result<StateDerivative> {
    let e = evaluate_positions(model, &state.x)?;
    Ok(StateDerivative {
        velocities: state.v,
        accelerations: e.forces.map(|f| f / state.m),
    })
}

/// Kinetic plus potential energy.
pub fn total_energy(model: &PotentialModel, state: &ThreeBodyState) -> Result<f64> {
    Ok(state.kinetic_energy() + evaluate_positions(model, &state.x)?.value)
}

/// Integrated orbit: accepted-step samples plus the dense output between them.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub model: PotentialModel,
    pub m: f64,
    /// State at the start and at the end of every accepted step.
    pub samples: Vec<ThreeBodyState>,
    pub segments: Vec<DenseSegment<12>>,
    pub events: Vec<Event>,
    pub energy0: f64,
    pub config: IntegratorConfig,
    pub stats: Dop853Stats,
}

impl Trajectory {
    pub fn t_start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_end(&self) -> f64 {
        self.samples.last().expect("trajectory has samples").t
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    pub fn initial(&self) -> &ThreeBodyState {
        &self.samples[0]
    }

    pub fn last(&self) -> &ThreeBodyState {
        self.samples.last().expect("trajectory has samples")
    }

    pub(crate) fn segment_index(&self, t: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.t1() < t);
        idx.min(self.segments.len().saturating_sub(1))
    }

    /// State at time `t` from the dense output, clamped to the integrated span.
    pub fn state_at(&self, t: f64) -> ThreeBodyState {
        if self.segments.is_empty() {
            return self.samples[0];
        }
        let t = t.clamp(self.t_start(), self.t_end());
        let seg = &self.segments[self.segment_index(t)];
        ThreeBodyState::from_array(t, &seg.eval(t), self.m)
    }

    /// `n + 1` equally spaced states covering `[t_start, t_start + span]`.
    pub fn uniform_samples(&self, span: f64, n: usize) -> Vec<ThreeBodyState> {
        let n = n.max(1);
        let t0 = self.t_start();
        (0..=n)
            .map(|k| self.state_at(t0 + span * k as f64 / n as f64))
            .collect()
    }

    pub fn energy(&self, state: &ThreeBodyState) -> Result<f64> {
        total_energy(&self.model, state)
    }

    /// Largest `|E(t) − E(0)|/|E(0)|` over the step samples.
    pub fn max_energy_drift(&self) -> Result<f64> {
        let scale = self.energy0.abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            worst = worst.max((self.energy(s)? - self.energy0).abs() / scale);
        }
        Ok(worst)
    }

    /// Largest `|L(t)|` and `|P(t)|` over the step samples.
    pub fn max_momenta(&self) -> (f64, f64) {
        self.samples.iter().fold((0.0, 0.0), |(l, p), s| {
            (
                f64::max(l, s.angular_momentum().abs()),
                f64::max(p, s.total_momentum().norm()),
            )
        })
    }
}

/// Integrates `state0` forward to the absolute time `t_end`.
pub fn integrate(
    model: &PotentialModel,
    state0: &ThreeBodyState,
    t_end: f64,
    config: &IntegratorConfig,
    events: &[EventSpec],
) -> Result<Trajectory> {
    config.validate()?;
    let span = t_end - state0.t;
    if !(span > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "t_end {t_end} must exceed start time {}",
            state0.t
        )));
    }
    if span > config.max_time {
        return Err(Error::MaxTimeExceeded {
            t_end: span,
            max_time: config.max_time,
        });
    }
    let energy0 = total_energy(model, state0)?;
    let r0 = crate::kinematics::to_jacobi(state0).hyper_radius();
    let min_sep = config.min_pair_separation.unwrap_or(1e-6 * r0);
    let sys = ThreeBodySystem {
        model: *model,
        m: state0.m,
    };
    let opts = Dop853Options {
        rtol: config.rel_tol,
        atol: config.abs_tol,
        h_max: config.max_step,
        h0: None,
        max_steps: config.max_steps,
        safety: 0.9,
    };
    let mut samples = vec![*state0];
    let mut segments = Vec::new();
    let stats = dop853::solve(&sys, state0.t, state0.to_array(), t_end, &opts, |seg, y| {
        let s = ThreeBodyState::from_array(seg.t1(), y, state0.m);
        let d = s.pair_distances();
        for (k, (i, j)) in [(0, 1), (1, 2), (0, 2)].into_iter().enumerate() {
            if d[k] < min_sep {
                return Err(Error::CollisionApproach {
                    t: s.t,
                    i,
                    j,
                    separation: d[k],
                });
            }
        }
        segments.push(seg.clone());
        samples.push(s);
        Ok(Control::Continue)
    })?;
    let mut traj = Trajectory {
        model: *model,
        m: state0.m,
        samples,
        segments,
        events: Vec::new(),
        energy0,
        config: *config,
        stats,
    };
    traj.events = detect_events(&traj, events);
    Ok(traj)
}
