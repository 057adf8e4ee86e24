use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{detect_events, EventPayload, EventSpec, Trajectory};

/// A collinear configuration along an orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SyzygyEvent {
    pub t: f64,
    pub phi: f64,
    /// Particle (0-based) between the other two, from the `φ` sector.
    pub middle_particle: usize,
    pub sector: usize,
    /// Middle particle read off the positions; agrees with the sector rule.
    pub geometric_middle: usize,
    pub r: f64,
}

/// Sector of the shape disc: `0` covers `[0, 2π/3]` (centred on the Euler
/// point `π/3`), `1` covers `(2π/3, 4π/3]` and `2` covers `(4π/3, 2π)`.
/// Boundary ties go to the lower index.
pub fn phi_sector(phi: f64) -> usize {
    let p = phi.rem_euclid(2.0 * PI);
    let third = 2.0 * PI / 3.0;
    let eps = 1e-12;
    if p <= third + eps || p >= 2.0 * PI - eps {
        0
    } else if p <= 2.0 * third + eps {
        1
    } else {
        2
    }
}

/// Middle particle of the collinear shape in a sector. With particles labelled
/// right, middle, left at `φ = π/3`, sector `k` has particle `(k + 1) mod 3`
/// in the middle.
pub fn sector_middle(sector: usize) -> usize {
    (sector + 1) % 3
}

/// Root-located syzygies (zeros of the signed area) along a trajectory.
pub fn syzygy_sequence(traj: &Trajectory) -> Vec<SyzygyEvent> {
    detect_events(traj, &[EventSpec::Syzygy])
        .into_iter()
        .filter_map(|e| {
            let EventPayload::Syzygy { middle, phi } = e.payload else {
                return None;
            };
            let p = crate::kinematics::state_shape(&e.state).ok()?;
            if p.r <= 0.5 {
                return None;
            }
            let sector = phi_sector(phi);
            Some(SyzygyEvent {
                t: e.t,
                phi,
                middle_particle: sector_middle(sector),
                sector,
                geometric_middle: middle,
                r: p.r,
            })
        })
        .collect()
}

/// Smallest `n` such that the sector sequence repeats with period `n`, if the
/// sequence is long enough to show two repetitions.
pub fn sector_pattern_period(events: &[SyzygyEvent]) -> Option<usize> {
    let s: Vec<usize> = events.iter().map(|e| e.sector).collect();
    (1..=s.len() / 2).find(|&n| s.iter().zip(s.iter().skip(n)).all(|(a, b)| a == b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn sectors() {
        assert_eq!(phi_sector(FRAC_PI_3), 0);
        assert_eq!(phi_sector(0.0), 0);
        assert_eq!(phi_sector(2.0 * FRAC_PI_3), 0);
        assert_eq!(phi_sector(PI), 1);
        assert_eq!(phi_sector(-PI), 1);
        assert_eq!(phi_sector(4.0 * FRAC_PI_3), 1);
        assert_eq!(phi_sector(-FRAC_PI_3), 2);
        assert_eq!(sector_middle(0), 1);
    }

    #[test]
    fn pattern_period() {
        let ev = |sector| SyzygyEvent {
            t: 0.0,
            phi: 0.0,
            middle_particle: 0,
            sector,
            geometric_middle: 0,
            r: 1.0,
        };
        let seq: Vec<_> = [1, 2, 0, 1, 2, 0, 1, 2].into_iter().map(ev).collect();
        assert_eq!(sector_pattern_period(&seq), Some(3));
        let seq: Vec<_> = [1, 0, 1, 2].into_iter().map(ev).collect();
        assert_eq!(sector_pattern_period(&seq), None);
    }
}
