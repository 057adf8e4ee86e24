//! Three-body states, Jacobi vectors and the Hopf shape-space map.
//!
//! Jacobi vectors use the orthonormal normalization
//! `ρ = (x1 − x2)/√2`, `λ = (x1 + x2 − 2·x3)/√6`, so that `R² = ρ² + λ²`
//! and the relative kinetic energy is `(m/2)(ρ̇² + λ̇²)`.
//!
//! The shape point of a configuration lives on the unit sphere
//! `x′² + y′² + z′² = 1` with
//! `x′ = 2ρ·λ/R²`, `y′ = 2(ρ×λ)/R²`, `z′ = (λ² − ρ²)/R²`.
//! The disc coordinates are `r = √(x′² + z′²)` and `φ = atan2(x′, z′)`;
//! `φ = 0` sits at `(x′, z′) = (0, 1)` and grows towards `+x′`, which is the
//! clockwise direction when `z′` is drawn as the vertical axis.

use std::f64::consts::{FRAC_PI_3, PI};

use nalgebra::Vector2;

use crate::error::{Error, Result};

pub type Vec2 = Vector2<f64>;

/// Below this disc radius the braiding angle is not defined.
pub const PHI_UNDEFINED_R: f64 = 1e-10;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT6: f64 = 2.449_489_742_783_178;

/// Scalar (z-component) cross product of two planar vectors.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

/// Positions and velocities of three equal-mass planar bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeBodyState {
    pub t: f64,
    pub x: [Vec2; 3],
    pub v: [Vec2; 3],
    /// Common mass of the three bodies.
    pub m: f64,
}

impl ThreeBodyState {
    pub fn new(t: f64, x: [Vec2; 3], v: [Vec2; 3], m: f64) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "mass must be positive, got {m}"
            )));
        }
        let finite = t.is_finite()
            && x.iter()
                .chain(v.iter())
                .all(|p| p.x.is_finite() && p.y.is_finite());
        if !finite {
            return Err(Error::InvalidConfig("non-finite state component".into()));
        }
        Ok(Self { t, x, v, m })
    }

    /// Packs positions then velocities into a flat phase-space vector.
    pub fn to_array(&self) -> [f64; 12] {
        let mut y = [0.0; 12];
        for i in 0..3 {
            y[2 * i] = self.x[i].x;
            y[2 * i + 1] = self.x[i].y;
            y[6 + 2 * i] = self.v[i].x;
            y[6 + 2 * i + 1] = self.v[i].y;
        }
        y
    }

    pub fn from_array(t: f64, y: &[f64; 12], m: f64) -> Self {
        let x = [
            Vec2::new(y[0], y[1]),
            Vec2::new(y[2], y[3]),
            Vec2::new(y[4], y[5]),
        ];
        let v = [
            Vec2::new(y[6], y[7]),
            Vec2::new(y[8], y[9]),
            Vec2::new(y[10], y[11]),
        ];
        Self { t, x, v, m }
    }

    pub fn center_of_mass(&self) -> Vec2 {
        (self.x[0] + self.x[1] + self.x[2]) / 3.0
    }

    pub fn total_momentum(&self) -> Vec2 {
        (self.v[0] + self.v[1] + self.v[2]) * self.m
    }

    /// Total angular momentum about the origin.
    pub fn angular_momentum(&self) -> f64 {
        (0..3).map(|i| self.m * cross(&self.x[i], &self.v[i])).sum()
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.m * self.v.iter().map(|v| v.norm_squared()).sum::<f64>()
    }

    /// Largest position and velocity magnitudes; used to scale tolerances.
    pub fn scales(&self) -> (f64, f64) {
        let d = self.x.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let v = self.v.iter().map(|p| p.norm()).fold(0.0, f64::max);
        (d, v)
    }

    /// Removes the centre-of-mass position and velocity.
    pub fn to_relative_frame(&self) -> Self {
        let c = self.center_of_mass();
        let u = (self.v[0] + self.v[1] + self.v[2]) / 3.0;
        let mut out = *self;
        for i in 0..3 {
            out.x[i] -= c;
            out.v[i] -= u;
        }
        out
    }

    /// True when the centre of mass sits at the origin and the total momentum
    /// vanishes, both to `1e−12` of the state's own scales.
    pub fn is_relative_frame(&self) -> bool {
        let (d, v) = self.scales();
        self.center_of_mass().norm() <= 1e-12 * d.max(f64::MIN_POSITIVE)
            && self.total_momentum().norm() <= 1e-12 * self.m * v.max(f64::MIN_POSITIVE)
    }

    /// Mirror image about the x-axis (`y → −y`), labels unchanged.
    pub fn mirrored(&self) -> Self {
        let mut out = *self;
        for i in 0..3 {
            out.x[i].y = -out.x[i].y;
            out.v[i].y = -out.v[i].y;
        }
        out
    }

    /// Same configuration with every velocity reversed.
    pub fn time_reversed(&self) -> Self {
        let mut out = *self;
        for v in out.v.iter_mut() {
            *v = -*v;
        }
        out
    }

    /// Rigid rotation of positions and velocities about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let rot = |p: Vec2| Vec2::new(c * p.x - s * p.y, s * p.x + c * p.y);
        let mut out = *self;
        for i in 0..3 {
            out.x[i] = rot(out.x[i]);
            out.v[i] = rot(out.v[i]);
        }
        out
    }

    pub fn pair_distances(&self) -> [f64; 3] {
        [
            (self.x[0] - self.x[1]).norm(),
            (self.x[1] - self.x[2]).norm(),
            (self.x[0] - self.x[2]).norm(),
        ]
    }
}

/// The two Jacobi relative vectors and their conjugate momenta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiState {
    pub rho: Vec2,
    pub lambda: Vec2,
    pub p_rho: Vec2,
    pub p_lambda: Vec2,
}

impl JacobiState {
    pub fn hyper_radius(&self) -> f64 {
        (self.rho.norm_squared() + self.lambda.norm_squared()).sqrt()
    }

    /// Hyper-angular momentum `G₃ = ½(p_ρ·λ − p_λ·ρ)`.
    pub fn g3(&self) -> f64 {
        hyper_angular_momentum(self)
    }
}

/// Jacobi vectors of a state. The transform only sees relative positions and
/// velocities, so the centre-of-mass motion drops out automatically.
pub fn to_jacobi(state: &ThreeBodyState) -> JacobiState {
    let [x1, x2, x3] = state.x;
    let [v1, v2, v3] = state.v;
    let m = state.m;
    JacobiState {
        rho: (x1 - x2) / SQRT2,
        lambda: (x1 + x2 - 2.0 * x3) / SQRT6,
        p_rho: (v1 - v2) * (m / SQRT2),
        p_lambda: (v1 + v2 - 2.0 * v3) * (m / SQRT6),
    }
}

/// Inverse of [`to_jacobi`] into the relative frame, at `t = 0`.
pub fn from_jacobi(j: &JacobiState, m: f64) -> ThreeBodyState {
    let place = |a: Vec2, b: Vec2| {
        [
            a / SQRT2 + b / SQRT6,
            -a / SQRT2 + b / SQRT6,
            -2.0 * b / SQRT6,
        ]
    };
    let x = place(j.rho, j.lambda);
    let v = place(j.p_rho / m, j.p_lambda / m);
    ThreeBodyState { t: 0.0, x, v, m }
}

/// Permutation-symmetric coordinates of one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapePoint {
    pub hyper_radius: f64,
    /// Disc radius, `0` for the equilateral triangle and `1` for collinear shapes.
    pub r: f64,
    /// `α = asin r`.
    pub alpha: f64,
    /// Braiding angle in `(−π, π]`; meaningless when [`ShapePoint::phi_defined`] is false.
    pub phi: f64,
    pub xp: f64,
    /// Signed area coordinate `2(ρ×λ)/R²`.
    pub yp: f64,
    pub zp: f64,
}

impl ShapePoint {
    pub fn phi_defined(&self) -> bool {
        self.r >= PHI_UNDEFINED_R
    }
}

pub fn shape_point(j: &JacobiState) -> Result<ShapePoint> {
    let r2 = j.rho.norm_squared() + j.lambda.norm_squared();
    if !(r2 > 0.0) {
        return Err(Error::DegenerateShape(r2.sqrt()));
    }
    let xp = 2.0 * j.rho.dot(&j.lambda) / r2;
    let yp = 2.0 * cross(&j.rho, &j.lambda) / r2;
    let zp = (j.lambda.norm_squared() - j.rho.norm_squared()) / r2;
    let r = xp.hypot(zp).min(1.0);
    Ok(ShapePoint {
        hyper_radius: r2.sqrt(),
        r,
        alpha: r.asin(),
        phi: wrap_angle(xp.atan2(zp)),
        xp,
        yp,
        zp,
    })
}

/// Convenience: shape point straight from a Cartesian state.
pub fn state_shape(state: &ThreeBodyState) -> Result<ShapePoint> {
    shape_point(&to_jacobi(state))
}

/// Time derivatives of the shape coordinates, by analytic differentiation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeRates {
    pub hyper_radius_dot: f64,
    pub r_dot: f64,
    /// `α̇ = ṙ/√(1 − r²)`; infinite at collinear shapes with `ṙ ≠ 0`.
    pub alpha_dot: f64,
    pub phi_dot: f64,
}

pub fn shape_rates(j: &JacobiState, m: f64) -> Result<ShapeRates> {
    let (rho, lam) = (j.rho, j.lambda);
    let (rho_d, lam_d) = (j.p_rho / m, j.p_lambda / m);
    let r2 = rho.norm_squared() + lam.norm_squared();
    if !(r2 > 0.0) {
        return Err(Error::DegenerateShape(r2.sqrt()));
    }
    let big_r = r2.sqrt();
    let r2_dot = 2.0 * (rho.dot(&rho_d) + lam.dot(&lam_d));
    // x′R² = a, z′R² = b
    let a = 2.0 * rho.dot(&lam);
    let b = lam.norm_squared() - rho.norm_squared();
    let a_dot = 2.0 * (rho_d.dot(&lam) + rho.dot(&lam_d));
    let b_dot = 2.0 * (lam.dot(&lam_d) - rho.dot(&rho_d));
    let q = a * a + b * b;
    let phi_dot = if q > 0.0 {
        (b * a_dot - a * b_dot) / q
    } else {
        0.0
    };
    // r = √q / R²
    let sq = q.sqrt();
    let r = sq / r2;
    let r_dot = if sq > 0.0 {
        (a * a_dot + b * b_dot) / sq / r2 - r * r2_dot / r2
    } else {
        0.0
    };
    let alpha_dot = r_dot / (1.0 - r.min(1.0).powi(2)).sqrt();
    Ok(ShapeRates {
        hyper_radius_dot: r2_dot / (2.0 * big_r),
        r_dot,
        alpha_dot,
        phi_dot,
    })
}

/// Hyper-angular momentum `G₃ = ½(p_ρ·λ − p_λ·ρ)`.
pub fn hyper_angular_momentum(j: &JacobiState) -> f64 {
    0.5 * (j.p_rho.dot(&j.lambda) - j.p_lambda.dot(&j.rho))
}

/// Finite kinematic rotation by `eps` in the (ρ, λ) plane, applied to both
/// coordinates and momenta. Moves the shape point by `2·eps` in `φ`.
pub fn kinematic_rotation(j: &JacobiState, eps: f64) -> JacobiState {
    let (s, c) = eps.sin_cos();
    JacobiState {
        rho: j.rho * c + j.lambda * s,
        lambda: -j.rho * s + j.lambda * c,
        p_rho: j.p_rho * c + j.p_lambda * s,
        p_lambda: -j.p_rho * s + j.p_lambda * c,
    }
}

/// Elements of the permutation group S₃ acting on particle labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Permutation {
    Identity,
    CyclicPlus,
    CyclicMinus,
    Swap12,
    Swap13,
    Swap23,
}

impl Permutation {
    pub const ALL: [Permutation; 6] = [
        Permutation::Identity,
        Permutation::CyclicPlus,
        Permutation::CyclicMinus,
        Permutation::Swap12,
        Permutation::Swap13,
        Permutation::Swap23,
    ];

    /// Relabelling map: particle `i` of the permuted state is particle
    /// `map()[i]` of the original one (0-based).
    pub fn map(self) -> [usize; 3] {
        match self {
            Permutation::Identity => [0, 1, 2],
            Permutation::CyclicPlus => [2, 0, 1],
            Permutation::CyclicMinus => [1, 2, 0],
            Permutation::Swap12 => [1, 0, 2],
            Permutation::Swap13 => [2, 1, 0],
            Permutation::Swap23 => [0, 2, 1],
        }
    }

    pub fn from_map(map: [usize; 3]) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.map() == map)
    }

    /// The element equivalent to applying `self` and then `other`.
    pub fn then(self, other: Permutation) -> Permutation {
        let a = self.map();
        let b = other.map();
        Self::from_map([a[b[0]], a[b[1]], a[b[2]]]).expect("S3 is closed under composition")
    }

    pub fn inverse(self) -> Permutation {
        let a = self.map();
        let mut inv = [0; 3];
        for (i, &ai) in a.iter().enumerate() {
            inv[ai] = i;
        }
        Self::from_map(inv).expect("S3 is closed under inversion")
    }

    pub fn is_cyclic(self) -> bool {
        matches!(self, Permutation::CyclicPlus | Permutation::CyclicMinus)
    }

    pub fn is_transposition(self) -> bool {
        matches!(
            self,
            Permutation::Swap12 | Permutation::Swap13 | Permutation::Swap23
        )
    }
}

/// Relabels the particles of a state.
pub fn permutation_action(state: &ThreeBodyState, g: Permutation) -> ThreeBodyState {
    let map = g.map();
    let mut out = *state;
    for i in 0..3 {
        out.x[i] = state.x[map[i]];
        out.v[i] = state.v[map[i]];
    }
    out
}

/// Interior angles of the triangle at each vertex, or `None` when two
/// vertices coincide.
pub fn interior_angles(x: &[Vec2; 3]) -> Option<[f64; 3]> {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let a = x[(k + 1) % 3] - x[k];
        let b = x[(k + 2) % 3] - x[k];
        if a.norm_squared() == 0.0 || b.norm_squared() == 0.0 {
            return None;
        }
        out[k] = cross(&a, &b).abs().atan2(a.dot(&b));
    }
    Some(out)
}

/// Largest interior angle; a coincident pair counts as `π`, the limiting
/// value reached along every approach direction to a collision shape.
pub fn largest_interior_angle(x: &[Vec2; 3]) -> f64 {
    match interior_angles(x) {
        Some(a) => a[0].max(a[1]).max(a[2]),
        None => PI,
    }
}

/// Jacobi vectors (with zero momenta) realising a point of the shape sphere at
/// hyper-radius `hyper_radius`.
pub fn jacobi_from_shape(hyper_radius: f64, xp: f64, yp: f64, zp: f64) -> JacobiState {
    let r2 = hyper_radius * hyper_radius;
    let dot = 0.5 * r2 * xp;
    let crs = 0.5 * r2 * yp;
    let (rho, lambda) = if zp >= 0.0 {
        let l = (0.5 * r2 * (1.0 + zp)).sqrt();
        (Vec2::new(dot / l, -crs / l), Vec2::new(l, 0.0))
    } else {
        let p = (0.5 * r2 * (1.0 - zp)).sqrt();
        (Vec2::new(p, 0.0), Vec2::new(dot / p, crs / p))
    };
    JacobiState {
        rho,
        lambda,
        p_rho: Vec2::zeros(),
        p_lambda: Vec2::zeros(),
    }
}

/// Resting configuration with disc coordinates `(r, φ)`, positive orientation
/// (`y′ ≥ 0`) and hyper-radius `hyper_radius`.
pub fn configuration_from_disc(hyper_radius: f64, r: f64, phi: f64, m: f64) -> ThreeBodyState {
    let r = r.clamp(0.0, 1.0);
    let (s, c) = phi.sin_cos();
    let yp = (1.0 - r * r).max(0.0).sqrt();
    from_jacobi(&jacobi_from_shape(hyper_radius, r * s, yp, r * c), m)
}

/// Points `(x′, z′)` of the shape disc whose triangles have largest interior
/// angle `gamma`, one per ray `φ = 2πk/n`.
///
/// The largest angle grows monotonically along each ray from `π/3` at the
/// centre to `π` on the rim, so every ray is bisected on its radial
/// coordinate to `1e−10`. On the three collision rays the angle tops out at
/// `π/2` in the interior; for `γ ≥ π/2` those rays return the collision point
/// itself, where all fixed-angle curves meet.
pub fn fixed_angle_locus(gamma: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    if n < 3 {
        return Err(Error::Domain(format!("need at least 3 samples, got {n}")));
    }
    if !gamma.is_finite() || gamma < FRAC_PI_3 - 1e-12 || gamma > PI + 1e-12 {
        return Err(Error::Domain(format!(
            "largest interior angle must lie in [π/3, π], got {gamma}"
        )));
    }
    if gamma <= FRAC_PI_3 + 1e-12 {
        return Ok(vec![(0.0, 0.0); n]);
    }
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let psi = 2.0 * PI * k as f64 / n as f64;
        let angle_at = |s: f64| {
            let cfg = configuration_from_disc(1.0, s, psi, 1.0);
            largest_interior_angle(&cfg.x)
        };
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            if angle_at(mid) < gamma {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let s = if gamma >= PI { 1.0 } else { 0.5 * (lo + hi) };
        out.push((s * psi.sin(), s * psi.cos()));
    }
    Ok(out)
}
