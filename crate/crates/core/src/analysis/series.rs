use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::kinematics::{
    configuration_from_disc, from_jacobi, kinematic_rotation, shape_point, shape_rates, to_jacobi,
    wrap_angle, JacobiState, ThreeBodyState,
};
use crate::potentials::{evaluate_positions, potential_value, PotentialModel, YRegion};

/// Shape-space coordinates sampled along an orbit.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ShapeSeries {
    pub t: Vec<f64>,
    pub hyper_radius: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
    /// Braiding angle continued across branch cuts.
    pub phi_unwrapped: Vec<f64>,
    pub xp: Vec<f64>,
    pub yp: Vec<f64>,
    pub zp: Vec<f64>,
    /// Momentum form `½(p_ρ·λ − p_λ·ρ)`.
    pub g3: Vec<f64>,
    /// Analytic `φ̇` from the velocities.
    pub phi_dot: Vec<f64>,
    pub hyper_radius_dot: Vec<f64>,
    pub r_dot: Vec<f64>,
    pub energy: Vec<f64>,
    /// Samples where `φ` is undefined (`r < 1e−10`) and was held.
    pub phi_held: Vec<bool>,
    pub m: f64,
}

impl ShapeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn phi_advance(&self) -> f64 {
        match (self.phi_unwrapped.first(), self.phi_unwrapped.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// `(min, max)` of the unwrapped braiding angle.
    pub fn phi_range(&self) -> (f64, f64) {
        self.phi_unwrapped
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            })
    }

    pub fn mean_hyper_radius(&self) -> f64 {
        time_mean(&self.t, &self.hyper_radius)
    }

    pub fn mean_r(&self) -> f64 {
        time_mean(&self.t, &self.r)
    }
}

/// Trapezoidal time average of `y(t)`.
pub(crate) fn time_mean(t: &[f64], y: &[f64]) -> f64 {
    if t.len() < 2 {
        return y.first().copied().unwrap_or(0.0);
    }
    let mut acc = 0.0;
    for k in 1..t.len() {
        acc += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
    }
    acc / (t[t.len() - 1] - t[0])
}

/// Shape coordinates of a list of states, `φ` unwrapped by nearest-branch
/// continuation. Energies are evaluated with `model`.
pub fn shape_series_of(model: &PotentialModel, states: &[ThreeBodyState]) -> Result<ShapeSeries> {
    let mut s = ShapeSeries {
        m: states.first().map_or(1.0, |x| x.m),
        ..Default::default()
    };
    let mut last_raw: Option<f64> = None;
    for state in states {
        let j = to_jacobi(state);
        let p = shape_point(&j)?;
        let rates = shape_rates(&j, state.m)?;
        let held = !p.phi_defined();
        let phi_u = match (s.phi_unwrapped.last(), last_raw) {
            (Some(&prev), Some(raw)) if !held => prev + wrap_angle(p.phi - raw),
            (Some(&prev), _) => prev,
            (None, _) => p.phi,
        };
        if !held {
            last_raw = Some(p.phi);
        }
        s.t.push(state.t);
        s.hyper_radius.push(p.hyper_radius);
        s.r.push(p.r);
        s.alpha.push(p.alpha);
        s.phi_unwrapped.push(phi_u);
        s.xp.push(p.xp);
        s.yp.push(p.yp);
        s.zp.push(p.zp);
        s.g3.push(j.g3());
        s.phi_dot.push(if held { 0.0 } else { rates.phi_dot });
        s.hyper_radius_dot.push(rates.hyper_radius_dot);
        s.r_dot.push(rates.r_dot);
        s.energy
            .push(state.kinetic_energy() + potential_value(model, &state.x)?);
        s.phi_held.push(held);
    }
    Ok(s)
}

/// `n + 1` equally spaced samples over the whole trajectory.
pub fn shape_series(traj: &Trajectory, n: usize) -> Result<ShapeSeries> {
    shape_series_window(traj, traj.t_start(), traj.duration(), n)
}

/// `n + 1` equally spaced samples over `[t0, t0 + span]`.
pub fn shape_series_window(traj: &Trajectory, t0: f64, span: f64, n: usize) -> Result<ShapeSeries> {
    let n = n.max(1);
    let states: Vec<_> = (0..=n)
        .map(|k| traj.state_at(t0 + span * k as f64 / n as f64))
        .collect();
    shape_series_of(&traj.model, &states)
}

fn unwrapped_phi_near(traj: &Trajectory, t: f64, reference: f64) -> Option<f64> {
    let p = shape_point(&to_jacobi(&traj.state_at(t))).ok()?;
    p.phi_defined()
        .then(|| reference + wrap_angle(p.phi - reference))
}

/// Fourth-order finite-difference derivative of `f` on `[lo, hi]`, one-sided
/// near the ends.
fn derivative_5pt(f: impl Fn(f64) -> Option<f64>, t: f64, h: f64, lo: f64, hi: f64) -> Option<f64> {
    if t - 2.0 * h >= lo && t + 2.0 * h <= hi {
        let (a, b, c, d) = (f(t - 2.0 * h)?, f(t - h)?, f(t + h)?, f(t + 2.0 * h)?);
        Some((a - 8.0 * b + 8.0 * c - d) / (12.0 * h))
    } else {
        let h = if t - 2.0 * h < lo { h } else { -h };
        let v: Vec<f64> = (0..5).map(|k| f(t + k as f64 * h)).collect::<Option<_>>()?;
        Some((-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h))
    }
}

/// `G₃ = (m/4)(R r)² φ̇` with `φ̇` differentiated numerically on the dense
/// output. `None` where `φ` is held.
pub fn g3_from_phase_rate(traj: &Trajectory, series: &ShapeSeries) -> Vec<Option<f64>> {
    let (lo, hi) = (traj.t_start(), traj.t_end());
    let h = 1e-3 * (hi - lo).max(1e-12).min(1.0);
    (0..series.len())
        .map(|k| {
            if series.phi_held[k] {
                return None;
            }
            let t = series.t[k];
            let reference = series.phi_unwrapped[k];
            let phi_dot = derivative_5pt(|s| unwrapped_phi_near(traj, s, reference), t, h, lo, hi)?;
            let rr = series.hyper_radius[k] * series.r[k];
            Some(0.25 * series.m * rr * rr * phi_dot)
        })
        .collect()
}

/// Largest deviation between the momentum form of `G₃` and the phase-rate
/// form, relative to `max|G₃|`.
pub fn g3_identity_residual(traj: &Trajectory, series: &ShapeSeries) -> f64 {
    let scale = series
        .g3
        .iter()
        .fold(0.0_f64, |a, g| a.max(g.abs()))
        .max(f64::MIN_POSITIVE);
    g3_from_phase_rate(traj, series)
        .iter()
        .zip(&series.g3)
        .filter_map(|(a, b)| a.map(|a| (a - b).abs() / scale))
        .fold(0.0, f64::max)
}

/// Averages of the hyper-angular momentum over one period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G3Average {
    /// `(1/T)∫G₃ dt`.
    pub mean: f64,
    /// `(1/T)∮(m/4)(R r)² dφ`: the same average carried out in `φ`.
    pub phase_form: f64,
    /// `(1/Δφ)∮G₃ dφ`, the braiding-angle average (zero when `Δφ = 0`).
    pub phi_average: f64,
    /// Standard deviation of `G₃(t)` over the window.
    pub std_dev: f64,
    pub period: f64,
    pub phi_advance: f64,
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

/// Five-point Gauss–Legendre quadrature on every dense-output step inside
/// `[t0, t0 + period]`.
fn dense_integral(
    traj: &Trajectory,
    t0: f64,
    period: f64,
    f: impl Fn(&ThreeBodyState) -> f64,
) -> f64 {
    let t1 = t0 + period;
    let mut acc = 0.0;
    for seg in &traj.segments {
        let (a, b) = (seg.t0.min(seg.t1()).max(t0), seg.t0.max(seg.t1()).min(t1));
        if b <= a {
            continue;
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (x, w) in GAUSS5 {
            let t = mid + half * x;
            let s = ThreeBodyState::from_array(t, &seg.eval(t), traj.m);
            acc += w * half * f(&s);
        }
    }
    acc
}

/// `Ḡ₃` over `[t0, t0 + period]` by quadrature on the dense output.
pub fn g3_average(traj: &Trajectory, t0: f64, period: f64) -> Result<G3Average> {
    if !(period > 0.0) || t0 < traj.t_start() - 1e-9 || t0 + period > traj.t_end() + 1e-9 {
        return Err(Error::Domain(format!(
            "window [{t0}, {}] outside the trajectory",
            t0 + period
        )));
    }
    let g3 = |s: &ThreeBodyState| to_jacobi(s).g3();
    let phase = |s: &ThreeBodyState| {
        let j = to_jacobi(s);
        match (shape_point(&j), shape_rates(&j, s.m)) {
            (Ok(p), Ok(rates)) if p.phi_defined() => {
                0.25 * s.m * (p.hyper_radius * p.r).powi(2) * rates.phi_dot
            }
            _ => 0.0,
        }
    };
    let phi_dot = |s: &ThreeBodyState| {
        let j = to_jacobi(s);
        shape_rates(&j, s.m).map(|r| r.phi_dot).unwrap_or(0.0)
    };
    let mean = dense_integral(traj, t0, period, g3) / period;
    let phase_form = dense_integral(traj, t0, period, phase) / period;
    let var = dense_integral(traj, t0, period, |s| (g3(s) - mean).powi(2)) / period;
    let phi_advance = dense_integral(traj, t0, period, phi_dot);
    let weighted = dense_integral(traj, t0, period, |s| g3(s) * phi_dot(s));
    let phi_average = if phi_advance.abs() > 1e-9 {
        weighted / phi_advance
    } else {
        0.0
    };
    Ok(G3Average {
        mean,
        phase_form,
        phi_average,
        std_dev: var.max(0.0).sqrt(),
        period,
        phi_advance,
    })
}

/// `Ġ₃` from the forces: `½(F_ρ·λ − F_λ·ρ)`, the torque of the kinematic rotation.
pub fn g3_dot(model: &PotentialModel, state: &ThreeBodyState) -> Result<f64> {
    let e = evaluate_positions(model, &state.x)?;
    let forced = ThreeBodyState {
        v: e.forces.map(|f| f / state.m),
        ..*state
    };
    let j = to_jacobi(&forced);
    Ok(0.5 * (j.p_rho.dot(&j.lambda) - j.p_lambda.dot(&j.rho)))
}

/// `−∂V/∂φ` at fixed `R` and `r`, by a central difference along the kinematic
/// rotation (which moves `φ` by twice its angle).
pub fn dv_dphi(model: &PotentialModel, state: &ThreeBodyState, h: f64) -> Result<f64> {
    let j = to_jacobi(state);
    let value = |eps: f64| -> Result<f64> {
        let rotated: JacobiState = kinematic_rotation(&j, eps);
        potential_value(model, &from_jacobi(&rotated, state.m).x)
    };
    Ok((value(0.5 * h)? - value(-0.5 * h)?) / (2.0 * h))
}

/// Result of comparing the numerical `dG₃/dt` with `−∂V/∂φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G3DotCheck {
    /// Largest `|dG₃/dt + ∂V/∂φ|` relative to `max|dG₃/dt|`.
    pub residual: f64,
    /// Largest `|Ġ₃|` on samples inside the central Y region, relative to `max|G₃|`.
    pub central_y_max: f64,
    pub central_y_samples: usize,
}

/// Checks `Ġ₃ = −∂V/∂φ` along the series, differentiating the momentum form of
/// `G₃` numerically on the dense output.
pub fn g3_dot_check(traj: &Trajectory, series: &ShapeSeries) -> Result<G3DotCheck> {
    let model = traj.model;
    let (lo, hi) = (traj.t_start(), traj.t_end());
    let h = 1e-3 * (hi - lo).max(1e-12).min(1.0);
    let g3_max = series
        .g3
        .iter()
        .fold(0.0_f64, |a, g| a.max(g.abs()))
        .max(f64::MIN_POSITIVE);
    let mut pairs = Vec::with_capacity(series.len());
    let mut central_y_max: f64 = 0.0;
    let mut central_y_samples = 0;
    for &t in &series.t {
        let s = traj.state_at(t);
        let numeric = derivative_5pt(|u| Some(to_jacobi(&traj.state_at(u)).g3()), t, h, lo, hi)
            .unwrap_or(0.0);
        let torque = -dv_dphi(&model, &s, 1e-6)?;
        pairs.push((numeric, torque));
        if evaluate_positions(&model, &s.x)?.region == YRegion::CentralY {
            central_y_samples += 1;
            central_y_max = central_y_max.max(g3_dot(&model, &s)?.abs() / g3_max);
        }
    }
    let scale = pairs
        .iter()
        .fold(0.0_f64, |a, p| a.max(p.0.abs()))
        .max(f64::MIN_POSITIVE);
    let residual = pairs
        .iter()
        .fold(0.0_f64, |a, (n, t)| a.max((n - t).abs() / scale));
    Ok(G3DotCheck {
        residual,
        central_y_max,
        central_y_samples,
    })
}

/// Relative mismatch between the Cartesian relative kinetic energy and its
/// hyperspherical form `(m/2)[Ṙ² + (R/2)²(α̇² + φ̇² sin²α)]`.
pub fn kinetic_identity_check(state: &ThreeBodyState) -> Result<f64> {
    let rel = state.to_relative_frame();
    let cart = rel.kinetic_energy();
    let j = to_jacobi(state);
    let p = shape_point(&j)?;
    let rates = shape_rates(&j, state.m)?;
    let half_r = 0.5 * p.hyper_radius;
    // α̇² written as ṙ²/(1 − r²) stays finite only away from the rim
    let angular = if p.r < 1.0 - 1e-12 {
        rates.r_dot.powi(2) / (1.0 - p.r * p.r) + (rates.phi_dot * p.r).powi(2)
    } else {
        (rates.phi_dot * p.r).powi(2)
    };
    let shape = 0.5 * state.m * (rates.hyper_radius_dot.powi(2) + half_r * half_r * angular);
    Ok((cart - shape).abs() / cart.max(f64::MIN_POSITIVE))
}

/// Shape at which the hyper-radial potential is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ShapeChoice {
    Fixed {
        r: f64,
        phi: f64,
    },
    /// Mean over `n` equally spaced braiding angles at disc radius `r`.
    PhiAveraged {
        r: f64,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectivePotential {
    pub hyper_radius: Vec<f64>,
    /// `2Ḡ₃²/(mR²)`.
    pub centrifugal: Vec<f64>,
    pub potential: Vec<f64>,
    pub v_eff: Vec<f64>,
    /// Grid point of the smallest `V_eff` when it lies strictly inside the grid.
    pub minimum: Option<(f64, f64)>,
}

/// `V_eff(R) = 2Ḡ₃²/(mR²) + V(R)` at a chosen shape.
pub fn effective_radial_potential(
    model: &PotentialModel,
    g3bar: f64,
    m: f64,
    grid: &[f64],
    shape: ShapeChoice,
) -> Result<EffectivePotential> {
    if !g3bar.is_finite() {
        return Err(Error::Domain("Ḡ₃ must be finite".into()));
    }
    let mut out = EffectivePotential {
        hyper_radius: grid.to_vec(),
        centrifugal: Vec::with_capacity(grid.len()),
        potential: Vec::with_capacity(grid.len()),
        v_eff: Vec::with_capacity(grid.len()),
        minimum: None,
    };
    for &big_r in grid {
        if !(big_r > 0.0) {
            return Err(Error::Domain(format!(
                "hyper-radius must be positive, got {big_r}"
            )));
        }
        let v = match shape {
            ShapeChoice::Fixed { r, phi } => {
                potential_value(model, &configuration_from_disc(big_r, r, phi, m).x)?
            }
            ShapeChoice::PhiAveraged { r, n } => {
                let n = n.max(3);
                let mut acc = 0.0;
                for k in 0..n {
                    let phi = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                    acc += potential_value(model, &configuration_from_disc(big_r, r, phi, m).x)?;
                }
                acc / n as f64
            }
        };
        let c = 2.0 * g3bar * g3bar / (m * big_r * big_r);
        out.centrifugal.push(c);
        out.potential.push(v);
        out.v_eff.push(c + v);
    }
    if let Some((k, &best)) = out
        .v_eff
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
    {
        if k > 0 && k + 1 < grid.len() {
            out.minimum = Some((grid[k], best));
        }
    }
    Ok(out)
}

/// Minimiser of `V_eff` refined by golden-section search around the best grid point.
pub fn effective_minimum(
    model: &PotentialModel,
    g3bar: f64,
    m: f64,
    grid: &[f64],
    shape: ShapeChoice,
) -> Result<Option<f64>> {
    let table = effective_radial_potential(model, g3bar, m, grid, shape)?;
    let Some((r0, _)) = table.minimum else {
        return Ok(None);
    };
    let k = grid.iter().position(|&g| g == r0).unwrap_or(1);
    let (mut a, mut b) = (grid[k - 1], grid[k + 1]);
    let f = |x: f64| -> Result<f64> {
        Ok(effective_radial_potential(model, g3bar, m, &[x], shape)?.v_eff[0])
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    while b - a > 1e-10 * b.abs().max(1.0) {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c)? < f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok(Some(0.5 * (a + b)))
}
