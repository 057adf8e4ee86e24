use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use trisym::catalog::{self, OrbitSpec};
use trisym::{IntegratorConfig, PotentialKind, PotentialModel};

/// Orbit selection shared by `simulate` and `analyze`.
#[derive(Args, Debug, Clone)]
pub struct OrbitArgs {
    /// Catalog name (`fig8-newton`, ...) or a JSON file of orbit specs.
    #[arg(long)]
    pub orbit: Option<String>,
    /// Potential for a custom launch: newton, delta-string or y-string.
    #[arg(long)]
    pub potential: Option<PotentialKind>,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    /// Distance of the outer particles from the middle one.
    #[arg(long)]
    pub d: Option<f64>,
    /// Outer-particle speed.
    #[arg(long)]
    pub v: Option<f64>,
    /// Launch angle from the +y axis.
    #[arg(long)]
    pub theta: Option<f64>,
}

impl OrbitArgs {
    pub fn is_set(&self) -> bool {
        self.orbit.is_some() || self.d.is_some() || self.v.is_some() || self.theta.is_some()
    }

    pub fn resolve(&self) -> Result<Vec<OrbitSpec>> {
        if let Some(orbit) = &self.orbit {
            if self.d.is_some() || self.v.is_some() || self.theta.is_some() {
                bail!("--orbit cannot be combined with --d/--v/--theta");
            }
            let path = Path::new(orbit);
            if orbit.ends_with(".json") || path.is_file() {
                let text =
                    std::fs::read_to_string(path).with_context(|| format!("reading {orbit}"))?;
                let specs = catalog::parse_catalog_json(&text)?;
                if specs.is_empty() {
                    bail!("{orbit} holds no orbits");
                }
                return Ok(specs);
            }
            return Ok(vec![catalog::lookup(orbit)?]);
        }
        let (Some(d), Some(v), Some(theta)) = (self.d, self.v, self.theta) else {
            bail!("give --orbit, or --potential with --d, --v and --theta");
        };
        let kind = self
            .potential
            .context("a custom launch needs --potential")?;
        let model = PotentialModel::new(kind, self.coupling)?;
        Ok(vec![OrbitSpec::new("custom", model, d, v, theta)?])
    }
}

#[derive(Args, Debug, Clone, Copy)]
pub struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
}

impl ToleranceArgs {
    pub fn config(&self) -> IntegratorConfig {
        IntegratorConfig::with_tolerances(self.rel_tol, self.abs_tol)
    }
}

/// Integration span: `--t-end` if given, else `periods` times the catalog period.
pub fn span(spec: &OrbitSpec, periods: Option<f64>, t_end: Option<f64>) -> Result<f64> {
    let span = match (t_end, periods) {
        (Some(t), _) => t,
        (None, p) => {
            let hint = spec
                .period_hint
                .with_context(|| format!("no period known for `{}`; pass --t-end", spec.name))?;
            p.unwrap_or(1.0) * hint
        }
    };
    if !(span > 0.0 && span.is_finite()) {
        bail!("integration span must be positive, got {span}");
    }
    Ok(span)
}

pub fn print_catalog() -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(&catalog::catalog_entries())?
    );
    Ok(())
}
