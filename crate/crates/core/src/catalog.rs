//! Named initial conditions and the `(d, v, θ)` state constructor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{ThreeBodyState, Vec2};
use crate::potentials::{PotentialKind, PotentialModel};

/// One orbit: a potential and the Euler-configuration launch parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSpec {
    pub name: String,
    pub potential: PotentialModel,
    /// Distance from each outer particle to the middle one.
    pub d: f64,
    /// Speed of the outer particles.
    pub v: f64,
    /// Launch angle measured from the `+y` axis.
    pub theta: f64,
    pub notes: String,
    /// Approximate strict period, used to seed refinement.
    pub period_hint: Option<f64>,
}

impl OrbitSpec {
    pub fn new(name: &str, potential: PotentialModel, d: f64, v: f64, theta: f64) -> Result<Self> {
        if !(d > 0.0 && d.is_finite()) || !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "d and v must be positive, got d = {d}, v = {v}"
            )));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(Error::InvalidConfig(format!(
                "theta must lie in [0, π/2], got {theta}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            potential,
            d,
            v,
            theta,
            notes: String::new(),
            period_hint: None,
        })
    }

    pub fn initial_state(&self) -> ThreeBodyState {
        build_initial_state(self.d, self.v, self.theta, 1.0)
    }
}

/// Collinear launch: `x1 = (d, 0)`, `x2 = 0`, `x3 = (−d, 0)`, outer velocities
/// `(v sin θ, v cos θ)` and the middle particle at `−2×` that, so that both
/// the momentum and the angular momentum vanish.
pub fn build_initial_state(d: f64, v: f64, theta: f64, m: f64) -> ThreeBodyState {
    let u = Vec2::new(v * theta.sin(), v * theta.cos());
    ThreeBodyState {
        t: 0.0,
        x: [Vec2::new(d, 0.0), Vec2::zeros(), Vec2::new(-d, 0.0)],
        v: [u, -2.0 * u, u],
        m,
    }
}

struct Row {
    name: &'static str,
    label: &'static str,
    kind: PotentialKind,
    coupling: f64,
    d: f64,
    v: f64,
    theta: f64,
    notes: &'static str,
    period_hint: f64,
}

const ROWS: [Row; 5] = [
    Row {
        name: "fig8-ystring",
        label: "fig.8",
        kind: PotentialKind::YString,
        coupling: 1.0,
        d: 6.0,
        v: 1.37,
        theta: 1.205,
        notes: "figure-eight choreography, Y-string potential",
        period_hint: 15.83,
    },
    Row {
        name: "typeI-ystring",
        label: "type I",
        kind: PotentialKind::YString,
        coupling: 1.0,
        d: 6.0,
        v: 1.32,
        theta: 1.437,
        notes: "rotating braiding angle, closes after four cycles; not a choreography",
        period_hint: 31.28,
    },
    Row {
        name: "typeII-ystring",
        label: "type II",
        kind: PotentialKind::YString,
        coupling: 1.0,
        d: 6.0,
        v: 4.53,
        theta: 1.40,
        notes: "braiding angle oscillates between two turning points; not a choreography",
        period_hint: 37.93,
    },
    Row {
        name: "fig8-newton",
        label: "fig.8",
        kind: PotentialKind::Newton,
        coupling: 1.0,
        d: 1.0,
        v: 0.6355,
        theta: 0.5736,
        notes: "figure-eight choreography, Newtonian gravity",
        period_hint: 6.326,
    },
    Row {
        name: "fig8-delta",
        label: "fig.8",
        kind: PotentialKind::DeltaString,
        coupling: 0.5,
        d: 1.0,
        v: 0.536,
        theta: 1.49287,
        notes: "figure-eight choreography, Δ-string potential",
        period_hint: 6.417,
    },
];

fn spec_from_row(row: &Row) -> OrbitSpec {
    OrbitSpec {
        name: row.name.to_string(),
        potential: PotentialModel {
            kind: row.kind,
            coupling: row.coupling,
        },
        d: row.d,
        v: row.v,
        theta: row.theta,
        notes: row.notes.to_string(),
        period_hint: (row.period_hint > 0.0).then_some(row.period_hint),
    }
}

/// The five built-in orbits.
pub fn catalog_entries() -> Vec<OrbitSpec> {
    ROWS.iter().map(spec_from_row).collect()
}

pub fn catalog_names() -> Vec<&'static str> {
    ROWS.iter().map(|r| r.name).collect()
}

/// Built-in orbit by name (`fig8-newton`, `typeI-ystring`, ...).
pub fn lookup(name: &str) -> Result<OrbitSpec> {
    ROWS.iter()
        .find(|r| r.name.eq_ignore_ascii_case(name))
        .map(spec_from_row)
        .ok_or_else(|| Error::UnknownOrbit(name.to_string()))
}

/// Built-in orbit by its table label (`fig.8`, `type I`, `type II`) and potential.
pub fn lookup_row(label: &str, kind: PotentialKind) -> Result<OrbitSpec> {
    ROWS.iter()
        .find(|r| r.label.eq_ignore_ascii_case(label) && r.kind == kind)
        .map(spec_from_row)
        .ok_or_else(|| Error::UnknownOrbit(format!("{label} ({kind})")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSpec {
    name: String,
    potential: String,
    #[serde(default = "unit")]
    coupling: f64,
    d: f64,
    v: f64,
    theta: f64,
    #[serde(default)]
    notes: String,
    #[serde(default)]
    period_hint: Option<f64>,
}

fn unit() -> f64 {
    1.0
}

impl TryFrom<JsonSpec> for OrbitSpec {
    type Error = Error;

    fn try_from(j: JsonSpec) -> Result<Self> {
        let kind: PotentialKind = j.potential.parse()?;
        let mut spec = OrbitSpec::new(
            &j.name,
            PotentialModel::new(kind, j.coupling)?,
            j.d,
            j.v,
            j.theta,
        )?;
        spec.notes = j.notes;
        spec.period_hint = j.period_hint;
        Ok(spec)
    }
}

/// Parses one orbit object or an array of them:
/// `{"name", "potential", "coupling" (default 1), "d", "v", "theta"}`.
pub fn parse_catalog_json(text: &str) -> Result<Vec<OrbitSpec>> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let items = match value {
        serde_json::Value::Array(items) => items,
        obj @ serde_json::Value::Object(_) => vec![obj],
        _ => {
            return Err(Error::Parse(
                "expected an orbit object or an array of them".into(),
            ))
        }
    };
    items
        .into_iter()
        .map(|item| {
            let j: JsonSpec =
                serde_json::from_value(item).map_err(|e| Error::Parse(e.to_string()))?;
            OrbitSpec::try_from(j)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::state_shape;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_3;

    #[test]
    fn table_rows_verbatim() {
        let n = lookup_row("fig.8", PotentialKind::Newton).unwrap();
        assert_eq!((n.d, n.v, n.theta), (1.0, 0.6355, 0.5736));
        let d = lookup_row("fig.8", PotentialKind::DeltaString).unwrap();
        assert_eq!((d.d, d.v, d.theta), (1.0, 0.536, 1.49287));
        let t2 = lookup("typeII-ystring").unwrap();
        assert_eq!((t2.d, t2.v, t2.theta), (6.0, 4.53, 1.40));
        assert_eq!(catalog_entries().len(), 5);
    }

    #[test]
    fn unknown_name() {
        assert!(matches!(lookup("fig9"), Err(Error::UnknownOrbit(_))));
    }

    #[test]
    fn newton_outer_velocity() {
        let s = build_initial_state(1.0, 0.6355, 0.5736, 1.0);
        assert_abs_diff_eq!(s.v[0].x, 0.3449, epsilon = 5e-4);
        assert_abs_diff_eq!(s.v[0].y, 0.5339, epsilon = 5e-4);
    }

    #[test]
    fn launch_is_euler_point_with_zero_momenta() {
        for spec in catalog_entries() {
            let s = spec.initial_state();
            let p = state_shape(&s).unwrap();
            assert_abs_diff_eq!(p.r, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(p.phi, FRAC_PI_3, epsilon = 1e-12);
            assert_eq!(s.angular_momentum(), 0.0);
            assert_eq!(s.total_momentum().norm(), 0.0);
        }
    }

    #[test]
    fn json_round() {
        let specs = parse_catalog_json(
            r#"[{"name":"a","potential":"y-string","d":6,"v":1.37,"theta":1.205},
            {"name":"b","potential":"newton","coupling":2.0,"d":1,"v":0.6,"theta":0.5}]"#,
        )
        .unwrap();
        assert_eq!(specs.len(), 2);
        assert_eq!(specs[1].potential.coupling, 2.0);
        assert!(
            parse_catalog_json(r#"{"name":"c","potential":"newton","d":-1,"v":1,"theta":0}"#)
                .is_err()
        );
        assert!(
            parse_catalog_json(r#"{"name":"c","potential":"quark","d":1,"v":1,"theta":0}"#)
                .is_err()
        );
    }
}
