use std::f64::consts::PI;

use serde::Serialize;

use super::Trajectory;
use crate::kinematics::{largest_interior_angle, state_shape, wrap_angle, ThreeBodyState};
use crate::potentials::{torricelli_point, YRegion, Y_JUNCTION_ANGLE};

/// Sub-intervals scanned per integrator step when looking for sign changes.
const SCAN_PER_STEP: usize = 4;

/// Events that [`super::integrate`] can locate on the dense output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventSpec {
    /// Collinear configurations, `y′ = 0`.
    Syzygy,
    /// Unwrapped `φ` crossing a multiple of `2π`.
    PhiCycle,
    /// Largest interior angle crossing `2π/3`.
    YRegionChange,
    /// `φ ≡ phi0 (mod 2π/3)`.
    PhiSection { phi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    Syzygy,
    PhiCycle,
    YRegionChange,
    SectionHit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum EventPayload {
    /// Particle (0-based) lying between the other two.
    Syzygy { middle: usize, phi: f64 },
    /// Level of the unwrapped braiding angle that was crossed.
    PhiLevel { level: f64 },
    /// Y-string branch entered.
    Region { region: YRegion },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub t: f64,
    /// `+1` when the event function increases through zero.
    pub direction: i8,
    pub state: ThreeBodyState,
    pub payload: EventPayload,
    /// `|g(t)|` of the event function at the located root.
    pub residual: f64,
}

/// Bracketed root of `f` between `a` and `b` (values `fa`, `fb` of opposite
/// sign or zero): Illinois-modified regula falsi with a bisection fallback.
pub fn find_root<F: Fn(f64) -> f64>(f: F, a: f64, fa: f64, b: f64, fb: f64) -> f64 {
    if fa == 0.0 {
        return a;
    }
    if fb == 0.0 {
        return b;
    }
    let (mut lo, mut flo, mut hi, mut fhi) = if fa < 0.0 {
        (a, fa, b, fb)
    } else {
        (b, fb, a, fa)
    };
    let tol = 1e-13 * a.abs().max(b.abs()).max(1.0);
    let mut side = 0i8;
    for it in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mut c = lo - flo * (hi - lo) / (fhi - flo);
        let inside = (c - lo) * (c - hi) < 0.0;
        if !inside || it % 4 == 3 {
            c = 0.5 * (lo + hi);
        }
        let fc = f(c);
        if fc == 0.0 {
            return c;
        }
        if fc < 0.0 {
            lo = c;
            flo = fc;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = c;
            fhi = fc;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

struct GridPoint {
    state: ThreeBodyState,
    seg: usize,
    yp: f64,
    phi_raw: f64,
    phi_unwrapped: f64,
    angle: f64,
}

fn scan_grid(traj: &Trajectory) -> Vec<GridPoint> {
    let mut out: Vec<GridPoint> = Vec::new();
    for (si, seg) in traj.segments.iter().enumerate() {
        let first = if si == 0 { 0 } else { 1 };
        for k in first..=SCAN_PER_STEP {
            let t = seg.t0 + seg.h * k as f64 / SCAN_PER_STEP as f64;
            let state = ThreeBodyState::from_array(t, &seg.eval(t), traj.m);
            let (yp, phi_raw, defined) = match state_shape(&state) {
                Ok(sp) => (sp.yp, sp.phi, sp.phi_defined()),
                Err(_) => (0.0, 0.0, false),
            };
            let phi_unwrapped = match out.last() {
                None => phi_raw,
                Some(prev) if defined => prev.phi_unwrapped + wrap_angle(phi_raw - prev.phi_raw),
                Some(prev) => prev.phi_unwrapped,
            };
            let phi_raw = if defined {
                phi_raw
            } else {
                out.last().map_or(phi_raw, |p| p.phi_raw)
            };
            out.push(GridPoint {
                state,
                seg: si,
                yp,
                phi_raw,
                phi_unwrapped,
                angle: largest_interior_angle(&state.x),
            });
        }
    }
    out
}

fn crosses(ga: f64, gb: f64) -> Option<i8> {
    if ga < 0.0 && gb >= 0.0 {
        Some(1)
    } else if ga > 0.0 && gb <= 0.0 {
        Some(-1)
    } else {
        None
    }
}

fn middle_particle(s: &ThreeBodyState) -> usize {
    // project on the direction of the widest pair
    let d = s.pair_distances();
    let (i, j) = [(0, 1), (1, 2), (0, 2)][(0..3).max_by(|&a, &b| d[a].total_cmp(&d[b])).unwrap()];
    3 - i - j
}

/// Levels `offset + k·spacing` crossed going from `ua` to `ub`.
fn crossed_levels(ua: f64, ub: f64, offset: f64, spacing: f64) -> Vec<f64> {
    let mut levels = Vec::new();
    if ub > ua {
        let mut k = ((ua - offset) / spacing).floor() as i64 + 1;
        while offset + k as f64 * spacing <= ub {
            let l = offset + k as f64 * spacing;
            if l > ua {
                levels.push(l);
            }
            k += 1;
        }
    } else if ub < ua {
        let mut k = ((ua - offset) / spacing).ceil() as i64 - 1;
        while offset + k as f64 * spacing >= ub {
            let l = offset + k as f64 * spacing;
            if l < ua {
                levels.push(l);
            }
            k -= 1;
        }
    }
    levels
}

fn locate_levels(
    traj: &Trajectory,
    grid: &[GridPoint],
    offset: f64,
    spacing: f64,
    mut emit: impl FnMut(f64, i8, f64, f64),
) {
    for w in grid.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for level in crossed_levels(a.phi_unwrapped, b.phi_unwrapped, offset, spacing) {
            let seg = &traj.segments[b.seg];
            let g = |t: f64| {
                let s = ThreeBodyState::from_array(t, &seg.eval(t), traj.m);
                let phi = state_shape(&s).map(|sp| sp.phi).unwrap_or(a.phi_raw);
                a.phi_unwrapped + wrap_angle(phi - a.phi_raw) - level
            };
            let t = find_root(
                &g,
                a.state.t,
                a.phi_unwrapped - level,
                b.state.t,
                b.phi_unwrapped - level,
            );
            let dir = if b.phi_unwrapped > a.phi_unwrapped {
                1
            } else {
                -1
            };
            emit(t, dir, level, g(t).abs());
        }
    }
}

/// Locates every requested event along a finished trajectory, sorted by time.
/// A zero of the event function at the very first sample is not an event.
pub fn detect_events(traj: &Trajectory, specs: &[EventSpec]) -> Vec<Event> {
    if specs.is_empty() || traj.segments.is_empty() {
        return Vec::new();
    }
    let grid = scan_grid(traj);
    let mut events = Vec::new();
    let state_at =
        |seg: usize, t: f64| ThreeBodyState::from_array(t, &traj.segments[seg].eval(t), traj.m);
    for spec in specs {
        match *spec {
            EventSpec::Syzygy => {
                for w in grid.windows(2) {
                    let (a, b) = (&w[0], &w[1]);
                    if let Some(direction) = crosses(a.yp, b.yp) {
                        let g = |t: f64| {
                            state_shape(&state_at(b.seg, t))
                                .map(|s| s.yp)
                                .unwrap_or(0.0)
                        };
                        let t = find_root(&g, a.state.t, a.yp, b.state.t, b.yp);
                        let state = state_at(b.seg, t);
                        let phi = state_shape(&state).map(|s| s.phi).unwrap_or(f64::NAN);
                        events.push(Event {
                            kind: EventKind::Syzygy,
                            t,
                            direction,
                            state,
                            payload: EventPayload::Syzygy {
                                middle: middle_particle(&state),
                                phi,
                            },
                            residual: g(t).abs(),
                        });
                    }
                }
            }
            EventSpec::YRegionChange => {
                for w in grid.windows(2) {
                    let (a, b) = (&w[0], &w[1]);
                    let (ga, gb) = (a.angle - Y_JUNCTION_ANGLE, b.angle - Y_JUNCTION_ANGLE);
                    if let Some(direction) = crosses(ga, gb) {
                        let g = |t: f64| {
                            largest_interior_angle(&state_at(b.seg, t).x) - Y_JUNCTION_ANGLE
                        };
                        let t = find_root(&g, a.state.t, ga, b.state.t, gb);
                        let state = state_at(b.seg, t);
                        let region = if direction > 0 {
                            torricelli_point(&b.state.x)
                                .map(|r| r.1)
                                .unwrap_or(YRegion::NotApplicable)
                        } else {
                            YRegion::CentralY
                        };
                        events.push(Event {
                            kind: EventKind::YRegionChange,
                            t,
                            direction,
                            state,
                            payload: EventPayload::Region { region },
                            residual: g(t).abs(),
                        });
                    }
                }
            }
            EventSpec::PhiCycle => locate_levels(
                traj,
                &grid,
                0.0,
                2.0 * PI,
                |t, direction, level, residual| {
                    let seg = traj.segment_index(t);
                    events.push(Event {
                        kind: EventKind::PhiCycle,
                        t,
                        direction,
                        state: state_at(seg, t),
                        payload: EventPayload::PhiLevel { level },
                        residual,
                    });
                },
            ),
            EventSpec::PhiSection { phi0 } => locate_levels(
                traj,
                &grid,
                phi0,
                2.0 * PI / 3.0,
                |t, direction, level, residual| {
                    let seg = traj.segment_index(t);
                    events.push(Event {
                        kind: EventKind::SectionHit,
                        t,
                        direction,
                        state: state_at(seg, t),
                        payload: EventPayload::PhiLevel { level },
                        residual,
                    });
                },
            ),
        }
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    events
}

/// Surfaces of section in shape space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Section {
    /// `y′ = 0`: collinear configurations.
    AreaZero,
    /// `φ ≡ phi0 (mod 2π/3)`.
    Phi { phi0: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionCrossing {
    pub t: f64,
    pub state: ThreeBodyState,
    pub direction: i8,
}

/// States at the root-located crossings of a section.
pub fn poincare_section(traj: &Trajectory, section: Section) -> Vec<SectionCrossing> {
    let spec = match section {
        Section::AreaZero => EventSpec::Syzygy,
        Section::Phi { phi0 } => EventSpec::PhiSection { phi0 },
    };
    detect_events(traj, &[spec])
        .into_iter()
        .map(|e| SectionCrossing {
            t: e.t,
            state: e.state,
            direction: e.direction,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_of_cubic() {
        let f = |t: f64| t * t * t - 2.0;
        let r = find_root(f, 0.0, -2.0, 2.0, 6.0);
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        let r = find_root(|t| 2.0 - t * t * t, 2.0, -6.0, 0.0, 2.0);
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
    }

    #[test]
    fn level_enumeration() {
        let two_pi = 2.0 * PI;
        assert_eq!(crossed_levels(0.0, 7.0, 0.0, two_pi), vec![two_pi]);
        assert!(crossed_levels(0.0, 6.0, 0.0, two_pi).is_empty());
        assert_eq!(crossed_levels(7.0, -0.5, 0.0, two_pi), vec![two_pi, 0.0]);
        // starting exactly on a level does not count it again
        assert!(crossed_levels(two_pi, 6.5, 0.0, two_pi).is_empty());
        assert_eq!(crossed_levels(6.5, two_pi, 0.0, two_pi), vec![two_pi]);
    }

    #[test]
    fn crossing_rule_excludes_leading_zero() {
        assert_eq!(crosses(0.0, 1.0), None);
        assert_eq!(crosses(-1.0, 0.0), Some(1));
        assert_eq!(crosses(1.0, -1.0), Some(-1));
    }
}
