use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SMatrix};
use serde::Serialize;

use super::series::{shape_series_window, ShapeSeries};
use crate::dynamics::{derivative, integrate, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::kinematics::{
    cross, from_jacobi, permutation_action, to_jacobi, JacobiState, Permutation, ThreeBodyState,
    Vec2,
};
use crate::potentials::PotentialModel;

/// Knobs of [`detect_and_refine_period`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeriodOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Convergence when the closure residual drops below this fraction of the
    /// phase-space scale.
    pub closure_tol: f64,
    pub max_iterations: usize,
    /// Finite-difference step, relative to the phase-space scale.
    pub fd_step: f64,
    pub samples_per_period: usize,
    /// Threshold for symmetry-quotient closures, relative to the scale.
    pub quotient_tol: f64,
    pub floquet: bool,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
            closure_tol: 1e-9,
            max_iterations: 30,
            fd_step: 1e-7,
            samples_per_period: 2048,
            quotient_tol: 1e-6,
            floquet: true,
        }
    }
}

impl PeriodOptions {
    /// Integrator settings used for the shooting flows.
    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig::with_tolerances(self.rel_tol, self.abs_tol)
    }
}

/// Congruence of the three real-space particle curves over one period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SymmetryClass {
    /// All three curves congruent.
    S3,
    /// Exactly one pair of curves congruent.
    S2,
    None,
}

/// The orbit reaching a relabelled (and possibly mirrored) copy of its
/// initial state, up to a rigid rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuotientClosure {
    pub time: f64,
    pub permutation: Permutation,
    /// Spatial reflection `y → −y` applied together with the relabelling.
    pub mirrored: bool,
    /// Rigid rotation angle that best aligns the two states.
    pub rotation: f64,
    /// Distance after alignment, relative to the phase-space scale.
    pub residual: f64,
    pub phi_advance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChoreographyResult {
    pub is_choreography: bool,
    /// Largest `|x_σ(i)(t + T/3) − x_i(t)|` over the period, relative to `R̄`.
    pub deviation: f64,
    pub permutation: Permutation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicityReport {
    /// Strict period: the full state returns to itself.
    pub period_t: f64,
    /// `|Φ_T(s) − s|` in Jacobi phase space (positions and velocities).
    pub closure_residual: f64,
    pub scale: f64,
    pub initial_residual: f64,
    pub iterations: usize,
    /// Braiding-angle advance over one strict period.
    pub phi_advance: f64,
    pub n_phi_cycles: i64,
    pub choreography: bool,
    pub choreography_deviation: f64,
    pub symmetry_class: SymmetryClass,
    /// Moduli of the monodromy eigenvalues, largest first.
    pub floquet_moduli: Vec<f64>,
    /// First time each symmetry element closes the orbit, ordered by time.
    pub quotient_closures: Vec<QuotientClosure>,
    /// Earliest closure with the labels unchanged (mirror allowed): the period
    /// of the orbit projected on the shape disc.
    pub disc_closure: Option<QuotientClosure>,
    pub phi_min: f64,
    pub phi_max: f64,
    pub mean_hyper_radius: f64,
    #[serde(skip)]
    pub refined_state: ThreeBodyState,
}

type Phase = [f64; 8];

fn pack(j: &JacobiState, m: f64) -> Phase {
    let v_rho = j.p_rho / m;
    let v_lam = j.p_lambda / m;
    [
        j.rho.x, j.rho.y, j.lambda.x, j.lambda.y, v_rho.x, v_rho.y, v_lam.x, v_lam.y,
    ]
}

fn unpack(s: &Phase, m: f64) -> JacobiState {
    JacobiState {
        rho: Vec2::new(s[0], s[1]),
        lambda: Vec2::new(s[2], s[3]),
        p_rho: Vec2::new(s[4], s[5]) * m,
        p_lambda: Vec2::new(s[6], s[7]) * m,
    }
}

fn norm(s: &[f64]) -> f64 {
    s.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn sub(a: &Phase, b: &Phase) -> Phase {
    std::array::from_fn(|i| a[i] - b[i])
}

fn state_of(s: &Phase, m: f64) -> ThreeBodyState {
    from_jacobi(&unpack(s, m), m)
}

fn flow(
    model: &PotentialModel,
    s: &Phase,
    m: f64,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Phase> {
    let traj = integrate(model, &state_of(s, m), t, cfg, &[])?;
    Ok(pack(&to_jacobi(traj.last()), m))
}

/// Phase-space vector field at `s`.
fn vector_field(model: &PotentialModel, s: &Phase, m: f64) -> Result<Phase> {
    let state = state_of(s, m);
    let d = derivative(model, &state)?;
    let moving = ThreeBodyState {
        x: d.velocities,
        v: d.accelerations,
        ..state
    };
    Ok(pack(&to_jacobi(&moving), m))
}

/// Distance between two states after the best rigid rotation of `a`, and that
/// rotation angle.
fn distance_mod_rotation(a: &Phase, b: &Phase) -> (f64, f64) {
    let (mut c, mut s) = (0.0, 0.0);
    for k in 0..4 {
        let u = Vec2::new(a[2 * k], a[2 * k + 1]);
        let w = Vec2::new(b[2 * k], b[2 * k + 1]);
        c += u.dot(&w);
        s += cross(&u, &w);
    }
    let theta = s.atan2(c);
    let (sn, cs) = theta.sin_cos();
    let mut d2 = 0.0;
    for k in 0..4 {
        let (x, y) = (a[2 * k], a[2 * k + 1]);
        let rx = cs * x - sn * y;
        let ry = sn * x + cs * y;
        d2 += (rx - b[2 * k]).powi(2) + (ry - b[2 * k + 1]).powi(2);
    }
    (d2.sqrt(), theta)
}

/// First local minimum of the return distance `|s(t) − s₀|/scale` below
/// `threshold`, after the orbit has first moved away from `s₀`. Returns the
/// refined time.
pub fn detect_period(
    model: &PotentialModel,
    state0: &ThreeBodyState,
    t_max: f64,
    threshold: f64,
    config: &IntegratorConfig,
) -> Result<Option<f64>> {
    let state0 = state0.to_relative_frame();
    let traj = integrate(model, &state0, state0.t + t_max, config, &[])?;
    let m = state0.m;
    let s0 = pack(&to_jacobi(&state0), m);
    let scale = norm(&s0);
    let dist = |t: f64| norm(&sub(&pack(&to_jacobi(&traj.state_at(t)), m), &s0)) / scale;
    let n = (traj.segments.len() * 8).max(64);
    let grid: Vec<f64> = (0..=n)
        .map(|k| state0.t + t_max * k as f64 / n as f64)
        .collect();
    let d: Vec<f64> = grid.iter().map(|&t| dist(t)).collect();
    let Some(away) = d.iter().position(|&x| x > 4.0 * threshold) else {
        return Ok(None);
    };
    for k in away.max(1)..n {
        if d[k] <= d[k - 1] && d[k] <= d[k + 1] && d[k] < 4.0 * threshold {
            let t = golden_min(&dist, grid[k - 1], grid[k + 1]);
            if dist(t) < threshold {
                return Ok(Some(t - state0.t));
            }
        }
    }
    Ok(None)
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() < 1e-14 * b.abs().max(1.0) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Whether `state` is fixed by the point reflection combined with swapping
/// particles 1 and 3 and reversing time: `x₂ = 0`, `v₁ = v₃`.
fn on_reversing_slice(state: &ThreeBodyState) -> bool {
    let d = state.x[0].norm().max(state.x[2].norm());
    let u = state.v[0].norm().max(state.v[2].norm());
    d > 0.0
        && u > 0.0
        && state.x[1].norm() <= 1e-12 * d
        && (state.v[0] - state.v[2]).norm() <= 1e-12 * u
        && (state.v[1] + 2.0 * state.v[0]).norm() <= 1e-12 * u
}

/// Shooting within the reversing slice: adjusts the outer velocity `u` and the
/// half period `τ` until the orbit returns to the slice at `τ`, which makes it
/// periodic with period `2τ` and keeps the reversing symmetry exact.
fn refine_reversing(
    model: &PotentialModel,
    state0: &ThreeBodyState,
    tau_guess: f64,
    options: &PeriodOptions,
) -> Result<(ThreeBodyState, f64, usize)> {
    let cfg = options.integrator();
    let d = state0.x[0].norm();
    let u0 = state0.v[0].norm();
    let launch = |q: &[f64; 3]| {
        let u = Vec2::new(q[0], q[1]);
        ThreeBodyState {
            t: 0.0,
            v: [u, -2.0 * u, u],
            ..*state0
        }
    };
    let mismatch = |s: &ThreeBodyState| {
        let dv = s.v[0] - s.v[2];
        [s.x[1].x / d, s.x[1].y / d, dv.x / u0, dv.y / u0]
    };
    let end_state = |q: &[f64; 3]| -> Result<ThreeBodyState> {
        Ok(*integrate(model, &launch(q), q[2], &cfg, &[])?.last())
    };
    let mut q = [state0.v[0].x, state0.v[0].y, tau_guess];
    let mut end = end_state(&q)?;
    let mut g = mismatch(&end);
    let mut res = norm(&g);
    let target = 1e-3 * options.closure_tol;
    let mut iterations = 0;
    while res > target {
        if iterations >= options.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
        iterations += 1;
        let h = options.fd_step * u0;
        let mut jac = DMatrix::<f64>::zeros(4, 3);
        for c in 0..2 {
            let mut qp = q;
            qp[c] += h;
            let mut qm = q;
            qm[c] -= h;
            let gp = mismatch(&end_state(&qp)?);
            let gm = mismatch(&end_state(&qm)?);
            for r in 0..4 {
                jac[(r, c)] = (gp[r] - gm[r]) / (2.0 * h);
            }
        }
        let rates = derivative(model, &end)?;
        let da = rates.accelerations[0] - rates.accelerations[2];
        let dg = [
            rates.velocities[1].x / d,
            rates.velocities[1].y / d,
            da.x / u0,
            da.y / u0,
        ];
        for r in 0..4 {
            jac[(r, 2)] = dg[r];
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&-DVector::from_column_slice(&g), 1e-10 * smax)
            .map_err(|e| Error::Domain(format!("pseudo-inverse failed: {e}")))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: [f64; 3] = std::array::from_fn(|i| q[i] + alpha * step[i]);
            if trial[2] > 0.0 {
                if let Ok(e) = end_state(&trial) {
                    let gt = mismatch(&e);
                    if norm(&gt) < res {
                        q = trial;
                        end = e;
                        g = gt;
                        res = norm(&g);
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            if res <= options.closure_tol {
                break;
            }
            return Err(Error::NoConvergence {
                iterations,
                residual: res,
            });
        }
    }
    Ok((launch(&q), q[2], iterations))
}

/// Gauss–Newton on the closure map `Φ_T(s) − s` over the Jacobi phase-space
/// state and the period, with a finite-difference Jacobian, a pseudo-inverse
/// step and step halving. The converged orbit is then classified.
pub fn detect_and_refine_period(
    model: &PotentialModel,
    state0: &ThreeBodyState,
    t_guess: f64,
    options: &PeriodOptions,
) -> Result<PeriodicityReport> {
    if !(t_guess > 0.0 && t_guess.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "period guess must be positive, got {t_guess}"
        )));
    }
    let m = state0.m;
    let cfg = options.integrator();
    let mut s = pack(&to_jacobi(state0), m);
    let mut period = t_guess;
    let scale = norm(&s);
    let target = options.closure_tol * scale;
    let residual = |s: &Phase, t: f64| -> Result<(Phase, Phase)> {
        let end = flow(model, s, m, t, &cfg)?;
        Ok((sub(&end, s), end))
    };
    let (mut f, mut end) = residual(&s, period)?;
    let mut res = norm(&f);
    let initial_residual = res;
    let mut iterations = 0;
    // Launches with the reversing symmetry are first refined inside that
    // slice; free Gauss–Newton can otherwise drift onto a nearby asymmetric
    // orbit when the monodromy is close to the identity.
    let start = ThreeBodyState {
        t: 0.0,
        ..state0.to_relative_frame()
    };
    if on_reversing_slice(&start) {
        if let Ok((sym, tau, it)) = refine_reversing(model, &start, 0.5 * t_guess, options) {
            let s_sym = pack(&to_jacobi(&sym), m);
            if let Ok((f_sym, end_sym)) = residual(&s_sym, 2.0 * tau) {
                if norm(&f_sym) < res.max(target) {
                    s = s_sym;
                    period = 2.0 * tau;
                    f = f_sym;
                    end = end_sym;
                    res = norm(&f);
                    iterations = it;
                }
            }
        }
    }
    while res > target {
        if iterations >= options.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: res / scale,
            });
        }
        iterations += 1;
        let h = options.fd_step * scale;
        let mut jac = DMatrix::<f64>::zeros(8, 9);
        for c in 0..8 {
            let mut sp = s;
            sp[c] += h;
            let mut sm = s;
            sm[c] -= h;
            let fp = residual(&sp, period)
                .map_err(|_| Error::Divergence(res / scale))?
                .0;
            let fm = residual(&sm, period)
                .map_err(|_| Error::Divergence(res / scale))?
                .0;
            for r in 0..8 {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let field = vector_field(model, &end, m)?;
        for r in 0..8 {
            jac[(r, 8)] = field[r];
        }
        let svd = jac.svd(true, true);
        let smax = svd.singular_values.max();
        let rhs = -DVector::from_column_slice(&f);
        let step = svd
            .solve(&rhs, 1e-10 * smax)
            .map_err(|e| Error::Domain(format!("pseudo-inverse failed: {e}")))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Phase = std::array::from_fn(|i| s[i] + alpha * step[i]);
            let tp = period + alpha * step[8];
            if tp > 0.0 {
                if let Ok((ft, et)) = residual(&trial, tp) {
                    let rt = norm(&ft);
                    if rt < res {
                        s = trial;
                        period = tp;
                        f = ft;
                        end = et;
                        res = rt;
                        accepted = true;
                        break;
                    }
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations,
                residual: res / scale,
            });
        }
        if res > 1e3 * initial_residual.max(target) {
            return Err(Error::Divergence(res / scale));
        }
    }
    let refined = ThreeBodyState {
        t: 0.0,
        ..state_of(&s, m)
    };
    classify(
        model,
        &refined,
        period,
        res,
        scale,
        initial_residual,
        iterations,
        options,
    )
}

#[allow(clippy::too_many_arguments)]
fn classify(
    model: &PotentialModel,
    refined: &ThreeBodyState,
    period: f64,
    residual: f64,
    scale: f64,
    initial_residual: f64,
    iterations: usize,
    options: &PeriodOptions,
) -> Result<PeriodicityReport> {
    let cfg = options.integrator();
    let traj = integrate(
        model,
        refined,
        4.0 * period / 3.0 + 1e-9 * period,
        &cfg,
        &[],
    )?;
    let series = shape_series_window(&traj, 0.0, period, options.samples_per_period)?;
    let phi_advance = series.phi_advance();
    let (phi_min, phi_max) = series.phi_range();
    let quotient_closures = quotient_closures(&traj, &series, period, scale, options.quotient_tol);
    let disc_closure = quotient_closures
        .iter()
        .filter(|q| q.permutation == Permutation::Identity)
        .min_by(|a, b| a.time.total_cmp(&b.time))
        .copied();
    let curves = particle_curves(&traj, period, options.samples_per_period);
    let symmetry_class = curve_symmetry_class(&curves, series.mean_hyper_radius() * CURVE_TOL);
    let chor = choreography_test(&traj, period);
    let floquet_moduli = if options.floquet {
        floquet_moduli(model, refined, period, series.mean_hyper_radius(), options)?
    } else {
        Vec::new()
    };
    Ok(PeriodicityReport {
        period_t: period,
        closure_residual: residual,
        scale,
        initial_residual,
        iterations,
        phi_advance,
        n_phi_cycles: (phi_advance / (2.0 * PI)).round() as i64,
        choreography: chor.is_choreography,
        choreography_deviation: chor.deviation,
        symmetry_class,
        floquet_moduli,
        quotient_closures,
        disc_closure,
        phi_min,
        phi_max,
        mean_hyper_radius: series.mean_hyper_radius(),
        refined_state: *refined,
    })
}

fn quotient_closures(
    traj: &Trajectory,
    series: &ShapeSeries,
    period: f64,
    scale: f64,
    tol: f64,
) -> Vec<QuotientClosure> {
    let m = traj.m;
    let s0 = traj.initial();
    let mut out = Vec::new();
    for mirrored in [false, true] {
        for perm in Permutation::ALL {
            let base = if mirrored { s0.mirrored() } else { *s0 };
            let target = pack(&to_jacobi(&permutation_action(&base, perm)), m);
            let dist = |t: f64| {
                distance_mod_rotation(&pack(&to_jacobi(&traj.state_at(t)), m), &target).0 / scale
            };
            let n = series.len() - 1;
            let d: Vec<f64> = series.t.iter().map(|&t| dist(t)).collect();
            let trivial = perm == Permutation::Identity && !mirrored;
            for k in 1..n {
                // skip the start of the orbit for the identity element
                if trivial && k < n / 2 {
                    continue;
                }
                if !(d[k] <= d[k - 1] && d[k] <= d[k + 1] && d[k] < 1e-2) {
                    continue;
                }
                let t = golden_min(&dist, series.t[k - 1], series.t[k + 1]);
                let (res, rotation) =
                    distance_mod_rotation(&pack(&to_jacobi(&traj.state_at(t)), m), &target);
                if res / scale < tol {
                    let idx = ((t / period) * n as f64).round() as usize;
                    let phi_t = {
                        let p = crate::kinematics::state_shape(&traj.state_at(t))
                            .map(|p| p.phi)
                            .unwrap_or(0.0);
                        let reference = series.phi_unwrapped[idx.min(n)];
                        reference + crate::kinematics::wrap_angle(p - reference)
                    };
                    out.push(QuotientClosure {
                        time: t,
                        permutation: perm,
                        mirrored,
                        rotation,
                        residual: res / scale,
                        phi_advance: phi_t - series.phi_unwrapped[0],
                    });
                    break;
                }
            }
            if trivial && !out.iter().any(|q| q.permutation == perm && !q.mirrored) {
                // the strict period itself
                let (res, rotation) =
                    distance_mod_rotation(&pack(&to_jacobi(&traj.state_at(period)), m), &target);
                out.push(QuotientClosure {
                    time: period,
                    permutation: perm,
                    mirrored,
                    rotation,
                    residual: res / scale,
                    phi_advance: series.phi_advance(),
                });
            }
        }
    }
    out.sort_by(|a, b| a.time.total_cmp(&b.time));
    out
}

const CURVE_TOL: f64 = 1e-4;

fn particle_curves(traj: &Trajectory, period: f64, n: usize) -> [Vec<Vec2>; 3] {
    let t0 = traj.t_start();
    let states: Vec<_> = (0..=n)
        .map(|k| traj.state_at(t0 + period * k as f64 / n as f64))
        .collect();
    std::array::from_fn(|i| states.iter().map(|s| s.x[i]).collect())
}

fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let u = if len2 > 0.0 {
        ((p - a).dot(&ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a + ab * u - p).norm()
}

/// One-sided distance from the points of `a` to the polyline `b`, giving up
/// once it exceeds `limit`.
fn directed_distance(a: &[Vec2], b: &[Vec2], limit: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for &p in a {
        let d = b
            .windows(2)
            .map(|w| point_segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
        if worst > limit {
            break;
        }
    }
    worst
}

/// Hausdorff distance between the image of curve `a` under the isometry `q`
/// and curve `b`.
fn congruence_distance(a: &[Vec2], b: &[Vec2], q: fn(Vec2) -> Vec2, limit: f64) -> f64 {
    let qa: Vec<Vec2> = a.iter().map(|&p| q(p)).collect();
    let d = directed_distance(&qa, b, limit);
    if d > limit {
        return d;
    }
    d.max(directed_distance(b, &qa, limit))
}

const ISOMETRIES: [fn(Vec2) -> Vec2; 4] = [
    |p| p,
    |p| -p,
    |p| Vec2::new(-p.x, p.y),
    |p| Vec2::new(p.x, -p.y),
];

/// Whether particles `i` and `j` trace the same closed curve up to the
/// identity, the point reflection or a reflection in a coordinate axis.
fn curves_congruent(curves: &[Vec<Vec2>; 3], i: usize, j: usize, tol: f64) -> bool {
    ISOMETRIES
        .iter()
        .any(|&q| congruence_distance(&curves[i], &curves[j], q, tol) <= tol)
}

/// `S3` when all three particle curves are congruent, `S2` when exactly one
/// pair is.
fn curve_symmetry_class(curves: &[Vec<Vec2>; 3], tol: f64) -> SymmetryClass {
    let pairs = [(0, 1), (1, 2), (0, 2)]
        .into_iter()
        .filter(|&(i, j)| curves_congruent(curves, i, j, tol))
        .count();
    match pairs {
        0 => SymmetryClass::None,
        1 => SymmetryClass::S2,
        _ => SymmetryClass::S3,
    }
}

/// Tests `x_σ(i)(t + T/3) = x_i(t)` over one period for both cyclic `σ`. The
/// trajectory must cover `[t₀, t₀ + 4T/3]`; a shorter one is reported as not
/// choreographic with infinite deviation.
pub fn choreography_test(traj: &Trajectory, period: f64) -> ChoreographyResult {
    let t0 = traj.t_start();
    let mut best = ChoreographyResult {
        is_choreography: false,
        deviation: f64::INFINITY,
        permutation: Permutation::CyclicPlus,
    };
    if traj.t_end() < t0 + 4.0 * period / 3.0 - 1e-9 * period {
        return best;
    }
    let n = 512;
    let states: Vec<_> = (0..=n)
        .map(|k| traj.state_at(t0 + period * k as f64 / n as f64))
        .collect();
    let mean_r = states
        .iter()
        .map(|s| to_jacobi(s).hyper_radius())
        .sum::<f64>()
        / states.len() as f64;
    for perm in [Permutation::CyclicPlus, Permutation::CyclicMinus] {
        let map = perm.map();
        let mut worst: f64 = 0.0;
        for s in &states {
            let later = traj.state_at(s.t + period / 3.0);
            for i in 0..3 {
                worst = worst.max((later.x[map[i]] - s.x[i]).norm());
            }
        }
        let dev = worst / mean_r;
        if dev < best.deviation {
            best = ChoreographyResult {
                is_choreography: dev < 1e-6,
                deviation: dev,
                permutation: perm,
            };
        }
    }
    best
}

/// Monodromy of the Jacobi phase space by central differences of scale
/// `1e−7·R̄` (velocities scaled alike), and the moduli of its eigenvalues.
pub fn monodromy(
    model: &PotentialModel,
    state: &ThreeBodyState,
    period: f64,
    mean_hyper_radius: f64,
    options: &PeriodOptions,
) -> Result<SMatrix<f64, 8, 8>> {
    let m = state.m;
    let cfg = options.integrator();
    let s = pack(&to_jacobi(state), m);
    let speed = norm(&s[4..]).max(f64::MIN_POSITIVE) / 2.0;
    let mut mono = SMatrix::<f64, 8, 8>::zeros();
    for c in 0..8 {
        let h = 1e-7 * if c < 4 { mean_hyper_radius } else { speed };
        let mut sp = s;
        sp[c] += h;
        let mut sm = s;
        sm[c] -= h;
        let fp = flow(model, &sp, m, period, &cfg)?;
        let fm = flow(model, &sm, m, period, &cfg)?;
        for r in 0..8 {
            mono[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    Ok(mono)
}

pub fn floquet_moduli(
    model: &PotentialModel,
    state: &ThreeBodyState,
    period: f64,
    mean_hyper_radius: f64,
    options: &PeriodOptions,
) -> Result<Vec<f64>> {
    let mono = monodromy(model, state, period, mean_hyper_radius, options)?;
    let mut moduli: Vec<f64> = mono
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    Ok(moduli)
}
