//! Newton, Δ-string and Y-string three-body potentials.
//!
//! ```text
//! V_Newton = −g Σ 1/|xᵢ − xⱼ|
//! V_Δ      =  σ Σ |xᵢ − xⱼ|
//! V_Y      =  σ min_x Σ |xᵢ − x| = σ Σ |xᵢ − x_T|
//! ```
//!
//! `x_T` is the Torricelli (Fermat) point. When one interior angle reaches
//! `2π/3` the minimiser collapses onto that vertex and the Y-string reduces to
//! two strings meeting there.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{
    configuration_from_disc, cross, fixed_angle_locus, interior_angles, ThreeBodyState, Vec2,
};

/// Largest interior angle for which the Y junction sits strictly inside.
pub const Y_JUNCTION_ANGLE: f64 = 2.0 * PI / 3.0;

/// Newton evaluation refuses pair separations below this fraction of `R`.
pub const NEWTON_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialKind {
    Newton,
    DeltaString,
    YString,
}

impl PotentialKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PotentialKind::Newton => "newton",
            PotentialKind::DeltaString => "delta-string",
            PotentialKind::YString => "y-string",
        }
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PotentialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "newton" | "gravity" => Ok(PotentialKind::Newton),
            "delta" | "delta-string" | "δ-string" => Ok(PotentialKind::DeltaString),
            "y" | "y-string" | "ystring" => Ok(PotentialKind::YString),
            other => Err(Error::Parse(format!("unknown potential `{other}`"))),
        }
    }
}

/// A potential family together with its coupling (`g`, `σ_Δ` or `σ_Y`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialModel {
    pub kind: PotentialKind,
    pub coupling: f64,
}

impl PotentialModel {
    pub fn new(kind: PotentialKind, coupling: f64) -> Result<Self> {
        if !(coupling > 0.0 && coupling.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "coupling must be positive, got {coupling}"
            )));
        }
        Ok(Self { kind, coupling })
    }

    pub fn newton() -> Self {
        Self {
            kind: PotentialKind::Newton,
            coupling: 1.0,
        }
    }

    pub fn delta_string() -> Self {
        Self {
            kind: PotentialKind::DeltaString,
            coupling: 1.0,
        }
    }

    pub fn y_string() -> Self {
        Self {
            kind: PotentialKind::YString,
            coupling: 1.0,
        }
    }
}

/// Which branch of the Y-string potential is active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum YRegion {
    NotApplicable,
    /// Junction strictly inside the triangle.
    CentralY,
    /// Junction collapsed onto vertex `k` (0-based).
    TwoString(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialEvaluation {
    pub value: f64,
    /// `Fᵢ = −∇ᵢV`.
    pub forces: [Vec2; 3],
    pub region: YRegion,
    pub torricelli: Option<Vec2>,
}

/// Torricelli point of three points and the Y-string branch it implies.
///
/// Inside the central region the point is built from the exterior
/// equilateral triangles (each line from a vertex to the apex erected on the
/// opposite side passes through `x_T`) and polished with Newton steps on the
/// first-order condition `Σ unit(x_T − xᵢ) = 0`. An interior angle strictly
/// above `2π/3` puts the point on that vertex; exactly `2π/3` stays central.
pub fn torricelli_point(x: &[Vec2; 3]) -> Result<(Vec2, YRegion)> {
    let scale = (x[0] - x[1])
        .norm()
        .max((x[1] - x[2]).norm())
        .max((x[0] - x[2]).norm());
    if scale == 0.0 {
        return Err(Error::TripleCollision);
    }
    let Some(angles) = interior_angles(x) else {
        // two bodies coincide; the junction sits on them
        let k = if x[0] == x[1] || x[0] == x[2] { 0 } else { 1 };
        return Ok((x[k], YRegion::TwoString(k)));
    };
    let (k, &amax) = angles
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("three angles");
    if amax > Y_JUNCTION_ANGLE {
        return Ok((x[k], YRegion::TwoString(k)));
    }

    let mut p = exterior_construction(x).unwrap_or_else(|| weiszfeld(x, 1e-15, 10_000));
    p = polish(x, p, scale);
    Ok((p, YRegion::CentralY))
}

fn exterior_construction(x: &[Vec2; 3]) -> Option<Vec2> {
    // line i: from x_i through the apex of the equilateral triangle erected
    // outward on the opposite side
    let mut lines = [(Vec2::zeros(), Vec2::zeros()); 3];
    for i in 0..3 {
        let (b, c) = (x[(i + 1) % 3], x[(i + 2) % 3]);
        let side = c - b;
        let mid = (b + c) * 0.5;
        let mut n = Vec2::new(-side.y, side.x) / side.norm();
        if (x[i] - mid).dot(&n) > 0.0 {
            n = -n;
        }
        let apex = mid + n * (side.norm() * 3f64.sqrt() / 2.0);
        lines[i] = (x[i], apex - x[i]);
    }
    // intersect the best-conditioned pair
    let mut best: Option<(f64, Vec2)> = None;
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let (a, da) = lines[i];
        let (b, db) = lines[j];
        let den = cross(&da, &db);
        let cond = den.abs() / (da.norm() * db.norm());
        if cond < 1e-6 {
            continue;
        }
        let s = cross(&(b - a), &db) / den;
        let p = a + da * s;
        if best.map_or(true, |(c, _)| cond > c) {
            best = Some((cond, p));
        }
    }
    best.map(|(_, p)| p)
}

fn unit_sum(x: &[Vec2; 3], p: Vec2) -> Vec2 {
    x.iter().map(|xi| (p - xi) / (p - xi).norm()).sum()
}

fn polish(x: &[Vec2; 3], mut p: Vec2, scale: f64) -> Vec2 {
    for _ in 0..4 {
        let mut g = Vec2::zeros();
        let mut h = nalgebra::Matrix2::<f64>::zeros();
        for xi in x {
            let d = p - xi;
            let n = d.norm();
            if n < 1e-14 * scale {
                return p;
            }
            let u = d / n;
            g += u;
            h += (nalgebra::Matrix2::identity() - u * u.transpose()) / n;
        }
        if g.norm() < 1e-15 {
            break;
        }
        let Some(step) = h.lu().solve(&g) else { break };
        let q = p - step;
        if !(unit_sum(x, q).norm() < g.norm()) {
            break;
        }
        p = q;
    }
    p
}

/// Weiszfeld iteration for the geometric median of three points, started from
/// the centroid. Independent of [`torricelli_point`]; used as its cross-check.
pub fn weiszfeld(x: &[Vec2; 3], tol: f64, max_iter: usize) -> Vec2 {
    let scale = (x[0] - x[1]).norm().max((x[1] - x[2]).norm()).max(1e-300);
    let mut p = (x[0] + x[1] + x[2]) / 3.0;
    for _ in 0..max_iter {
        let mut num = Vec2::zeros();
        let mut den = 0.0;
        for xi in x {
            let d = (p - xi).norm();
            if d < 1e-15 * scale {
                return *xi;
            }
            num += xi / d;
            den += 1.0 / d;
        }
        let q = num / den;
        let step = (q - p).norm();
        p = q;
        if step <= tol * scale {
            break;
        }
    }
    p
}

/// Potential energy, exact forces and Y-string bookkeeping of a state.
pub fn evaluate(model: &PotentialModel, state: &ThreeBodyState) -> Result<PotentialEvaluation> {
    evaluate_positions(model, &state.x)
}

pub fn evaluate_positions(model: &PotentialModel, x: &[Vec2; 3]) -> Result<PotentialEvaluation> {
    let k = model.coupling;
    let pairs = [(0, 1), (1, 2), (0, 2)];
    let mut forces = [Vec2::zeros(); 3];
    match model.kind {
        PotentialKind::Newton => {
            let c = (x[0] + x[1] + x[2]) / 3.0;
            let big_r = x.iter().map(|p| (p - c).norm_squared()).sum::<f64>().sqrt();
            let mut value = 0.0;
            for (i, j) in pairs {
                let d = x[i] - x[j];
                let n = d.norm();
                if n <= NEWTON_GUARD * big_r || n == 0.0 {
                    return Err(Error::Singularity(i, j, n));
                }
                value -= k / n;
                let f = d * (k / (n * n * n));
                forces[i] -= f;
                forces[j] += f;
            }
            Ok(PotentialEvaluation {
                value,
                forces,
                region: YRegion::NotApplicable,
                torricelli: None,
            })
        }
        PotentialKind::DeltaString => {
            let mut value = 0.0;
            for (i, j) in pairs {
                let d = x[i] - x[j];
                let n = d.norm();
                value += k * n;
                if n > 0.0 {
                    let f = d * (k / n);
                    forces[i] -= f;
                    forces[j] += f;
                }
            }
            Ok(PotentialEvaluation {
                value,
                forces,
                region: YRegion::NotApplicable,
                torricelli: None,
            })
        }
        PotentialKind::YString => {
            let (p, region) = torricelli_point(x)?;
            let scale = (x[0] - x[1])
                .norm()
                .max((x[1] - x[2]).norm())
                .max((x[0] - x[2]).norm());
            let value = k * x.iter().map(|xi| (xi - p).norm()).sum::<f64>();
            let mut at_junction = None;
            for i in 0..3 {
                let d = x[i] - p;
                let n = d.norm();
                if n <= 1e-14 * scale {
                    at_junction = Some(i);
                } else {
                    forces[i] = -d * (k / n);
                }
            }
            if let Some(i) = at_junction {
                // the vertex holding the junction balances the two strings
                forces[i] = -(forces[(i + 1) % 3] + forces[(i + 2) % 3]);
            }
            Ok(PotentialEvaluation {
                value,
                forces,
                region,
                torricelli: Some(p),
            })
        }
    }
}

/// Potential value only.
pub fn potential_value(model: &PotentialModel, x: &[Vec2; 3]) -> Result<f64> {
    evaluate_positions(model, x).map(|e| e.value)
}

/// Largest deviation between the analytic forces and central finite
/// differences of the potential with step `h`, relative to the largest force.
pub fn force_check(model: &PotentialModel, state: &ThreeBodyState, h: f64) -> Result<f64> {
    let exact = evaluate(model, state)?;
    let fmax = exact
        .forces
        .iter()
        .map(|f| f.norm())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for c in 0..2 {
            let mut plus = state.x;
            let mut minus = state.x;
            plus[i][c] += h;
            minus[i][c] -= h;
            let fd =
                -(potential_value(model, &plus)? - potential_value(model, &minus)?) / (2.0 * h);
            worst = worst.max((fd - exact.forces[i][c]).abs() / fmax);
        }
    }
    Ok(worst)
}

/// Hyper-angular Fourier decomposition `V(r) + δV(r) cos 3φ + …` at fixed `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierProfile {
    pub hyper_radius: f64,
    pub r: Vec<f64>,
    /// Mean over `φ`.
    pub vbar: Vec<f64>,
    /// Coefficient of `cos 3φ`.
    pub delta_v: Vec<f64>,
    /// Coefficient of `sin 3φ`.
    pub sin3: Vec<f64>,
    /// Largest mode amplitude with `k` not a multiple of 3.
    pub residual: Vec<f64>,
}

/// Samples the potential on `n_phi` equally spaced angles of every disc
/// radius in `r_grid` and projects onto Fourier modes. `n_phi` must be a
/// multiple of 3 so that the sampling grid shares the threefold symmetry.
pub fn fourier_profile(
    model: &PotentialModel,
    hyper_radius: f64,
    r_grid: &[f64],
    n_phi: usize,
) -> Result<FourierProfile> {
    if n_phi < 64 || n_phi % 3 != 0 {
        return Err(Error::Domain(format!(
            "n_phi must be ≥ 64 and a multiple of 3, got {n_phi}"
        )));
    }
    if let Some(r) = r_grid.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(Error::Domain(format!("disc radius {r} outside [0, 1)")));
    }
    let n = n_phi as f64;
    let mut out = FourierProfile {
        hyper_radius,
        r: r_grid.to_vec(),
        vbar: Vec::with_capacity(r_grid.len()),
        delta_v: Vec::with_capacity(r_grid.len()),
        sin3: Vec::with_capacity(r_grid.len()),
        residual: Vec::with_capacity(r_grid.len()),
    };
    for &r in r_grid {
        let samples = (0..n_phi)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n;
                let cfg = configuration_from_disc(hyper_radius, r, phi, 1.0);
                potential_value(model, &cfg.x)
            })
            .collect::<Result<Vec<_>>>()?;
        let mode = |m: usize| {
            let (mut c, mut s) = (0.0, 0.0);
            for (k, v) in samples.iter().enumerate() {
                let a = 2.0 * PI * (m * k) as f64 / n;
                c += v * a.cos();
                s += v * a.sin();
            }
            (2.0 * c / n, 2.0 * s / n)
        };
        let mean = samples.iter().sum::<f64>() / n;
        let (c3, s3) = mode(3);
        let residual = (1..=n_phi / 2)
            .filter(|m| m % 3 != 0)
            .map(|m| {
                let (c, s) = mode(m);
                c.hypot(s)
            })
            .fold(0.0, f64::max);
        out.vbar.push(mean);
        out.delta_v.push(c3);
        out.sin3.push(s3);
        out.residual.push(residual);
    }
    Ok(out)
}

/// Boundary between the central Y-string and two-string regions of the shape
/// disc: the triangles whose largest angle is `2π/3`.
pub fn y_boundary_locus(n: usize) -> Result<Vec<(f64, f64)>> {
    fixed_angle_locus(Y_JUNCTION_ANGLE, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn pts(p: [(f64, f64); 3]) -> [Vec2; 3] {
        p.map(|(a, b)| Vec2::new(a, b))
    }

    fn at_rest(x: [Vec2; 3]) -> ThreeBodyState {
        ThreeBodyState::new(0.0, x, [Vec2::zeros(); 3], 1.0).unwrap()
    }

    #[test]
    fn equilateral_y_string() {
        let a = 1.3;
        let x = pts([(0.0, 0.0), (a, 0.0), (a / 2.0, a * 3f64.sqrt() / 2.0)]);
        let e = evaluate(&PotentialModel::y_string(), &at_rest(x)).unwrap();
        assert_abs_diff_eq!(e.value, a * 3f64.sqrt(), epsilon = 1e-14);
        let c = (x[0] + x[1] + x[2]) / 3.0;
        assert_abs_diff_eq!((e.torricelli.unwrap() - c).norm(), 0.0, epsilon = 1e-14);
        assert_eq!(e.region, YRegion::CentralY);
        for f in e.forces {
            assert_abs_diff_eq!(f.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn collinear_pair_sums() {
        let x = pts([(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)]);
        let n = evaluate(&PotentialModel::newton(), &at_rest(x)).unwrap();
        assert_abs_diff_eq!(n.value, -2.5, epsilon = 1e-15);
        let d = evaluate(&PotentialModel::delta_string(), &at_rest(x)).unwrap();
        assert_abs_diff_eq!(d.value, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn obtuse_vertex_holds_junction() {
        let x = pts([(0.0, 0.0), (1.0, 0.0), (-1.0, 0.01)]);
        let (p, region) = torricelli_point(&x).unwrap();
        assert_eq!(region, YRegion::TwoString(0));
        assert_eq!(p, x[0]);
        let e = evaluate(&PotentialModel::y_string(), &at_rest(x)).unwrap();
        assert_eq!(e.region, YRegion::TwoString(0));
        assert_abs_diff_eq!(e.value, 1.0 + (1.0f64 + 1e-4).sqrt(), epsilon = 1e-14);
        let total: Vec2 = e.forces.iter().sum();
        assert_abs_diff_eq!(total.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn needle_triangle_is_central() {
        let x = pts([(0.0, 0.0), (1.0, 0.0), (0.5, 5.0)]);
        let (p, region) = torricelli_point(&x).unwrap();
        assert_eq!(region, YRegion::CentralY);
        assert!(unit_sum(&x, p).norm() < 1e-10);
        let w = weiszfeld(&x, 1e-15, 100_000);
        assert!((w - p).norm() < 1e-9);
    }

    #[test]
    fn triple_collision_rejected() {
        let x = pts([(0.2, 0.2); 3]);
        assert_eq!(torricelli_point(&x), Err(Error::TripleCollision));
    }

    #[test]
    fn newton_singularity_names_pair() {
        let x = pts([(0.0, 0.0), (1.0, 0.0), (1.0, 0.0)]);
        match evaluate(&PotentialModel::newton(), &at_rest(x)) {
            Err(Error::Singularity(1, 2, _)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn finite_difference_forces() {
        let x = pts([(0.3, -0.2), (-1.1, 0.4), (0.5, 1.2)]);
        for model in [
            PotentialModel::newton(),
            PotentialModel::delta_string(),
            PotentialModel::y_string(),
        ] {
            let dev = force_check(&model, &at_rest(x), 1e-6).unwrap();
            assert!(dev < 1e-6, "{:?}: {dev}", model.kind);
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!(
            "Y-string".parse::<PotentialKind>().unwrap(),
            PotentialKind::YString
        );
        assert_eq!(
            "delta".parse::<PotentialKind>().unwrap(),
            PotentialKind::DeltaString
        );
        assert!("coulomb".parse::<PotentialKind>().is_err());
    }

    #[test]
    fn fourier_profile_preconditions() {
        let m = PotentialModel::delta_string();
        assert!(fourier_profile(&m, 1.0, &[0.5], 32).is_err());
        assert!(fourier_profile(&m, 1.0, &[0.5], 64).is_err());
        assert!(fourier_profile(&m, 1.0, &[1.0], 96).is_err());
    }

    #[test]
    fn fourier_center_is_round() {
        for model in [
            PotentialModel::newton(),
            PotentialModel::delta_string(),
            PotentialModel::y_string(),
        ] {
            let p = fourier_profile(&model, 1.0, &[0.0], 96).unwrap();
            assert!(p.delta_v[0].abs() < 1e-10);
            assert!(p.residual[0] < 1e-10 * p.vbar[0].abs());
        }
    }

    #[test]
    fn boundary_locus_touches_collision_points() {
        let pts = y_boundary_locus(48).unwrap();
        for k in [0, 16, 32] {
            let (x, z) = pts[k];
            assert_abs_diff_eq!(x.hypot(z), 1.0, epsilon = 1e-9);
        }
        // the Euler points are far outside the central region
        let (x, z) = pts[8];
        assert!(x.hypot(z) < 0.9);
    }
}
