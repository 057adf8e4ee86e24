use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use trisym::kinematics::{configuration_from_disc, fixed_angle_locus};
use trisym::potentials::{fourier_profile, potential_value, y_boundary_locus};
use trisym::{PotentialKind, PotentialModel};

use crate::output::{self, num, RunManifest};
use crate::svg;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContourKind {
    Equipotential,
    Fourier,
    AngleLocus,
    YBoundary,
}

#[derive(Args, Debug, Clone)]
pub struct ContoursArgs {
    #[arg(long, value_enum)]
    pub what: ContourKind,
    #[arg(long, default_value = "y-string")]
    pub potential: PotentialKind,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    /// Hyper-radius at which the potential is evaluated.
    #[arg(long = "hyper-radius", default_value_t = 1.0)]
    pub hyper_radius: f64,
    /// Grid points per axis, or points along a locus.
    #[arg(long, default_value_t = 129)]
    pub n: usize,
    /// Largest interior angle for `angle-locus`.
    #[arg(long, default_value_t = PI)]
    pub gamma: f64,
    /// Contour levels drawn in the SVG.
    #[arg(long, default_value_t = 24)]
    pub levels: usize,
    #[arg(long, env = "TRISYM_OUT_DIR", default_value = "trisym-out")]
    pub out: PathBuf,
}

#[derive(Serialize)]
struct Summary {
    what: ContourKind,
    potential: PotentialModel,
    hyper_radius: f64,
    n: usize,
    /// Range of the plotted field.
    min: Option<f64>,
    max: Option<f64>,
    /// Largest inscribed radius of the central-Y region.
    inner_radius: Option<f64>,
    /// Largest `(max − min)/|mean|` of `V` around circles inside `inner_radius`.
    circularity_deviation: Option<f64>,
}

pub fn run(args: &ContoursArgs, command: &[String]) -> Result<()> {
    if args.n < 32 {
        bail!("--n must be at least 32, got {}", args.n);
    }
    let model = PotentialModel::new(args.potential, args.coupling)?;
    let dir = output::ensure_dir(&args.out.join("contours"))?;
    let tag = match args.what {
        ContourKind::Equipotential => format!("equipotential-{}", args.potential),
        ContourKind::Fourier => format!("fourier-{}", args.potential),
        ContourKind::AngleLocus => "angle-locus".to_string(),
        ContourKind::YBoundary => "y-boundary".to_string(),
    };
    let mut summary = Summary {
        what: args.what,
        potential: model,
        hyper_radius: args.hyper_radius,
        n: args.n,
        min: None,
        max: None,
        inner_radius: None,
        circularity_deviation: None,
    };
    let mut manifest = RunManifest::new(command, args.what, model);
    let csv_path = dir.join(format!("{tag}.csv"));
    let svg_path = dir.join(format!("{tag}.svg"));
    match args.what {
        ContourKind::Equipotential => {
            let grid = equipotential_grid(&model, args.hyper_radius, args.n);
            let newton = model.kind == PotentialKind::Newton;
            let mut header = vec!["xp", "zp", "r", "phi", "V"];
            if newton {
                header.push("log_neg_V");
            }
            let rows = grid.cells.iter().filter(|c| c.r <= 1.0).map(|c| {
                let mut row = vec![num(c.xp), num(c.zp), num(c.r), num(c.phi), num(c.v)];
                if newton {
                    row.push(num((-c.v).ln()));
                }
                row
            });
            manifest
                .outputs
                .push(output::write_csv(&csv_path, &header, rows)?);
            // Newton contours are drawn in log(−V), which spaces them evenly
            let field: Vec<f64> = grid
                .cells
                .iter()
                .map(|c| if newton { (-c.v).ln() } else { c.v })
                .collect();
            let (lo, hi) = finite_range(&field);
            summary.min = Some(lo);
            summary.max = Some(hi);
            let levels: Vec<f64> = (1..=args.levels)
                .map(|k| lo + (hi - lo) * k as f64 / (args.levels + 1) as f64)
                .collect();
            let lines = marching_squares(&grid.axis, &field, &levels);
            let title = format!(
                "{} equipotentials at R = {}",
                args.potential, args.hyper_radius
            );
            manifest
                .outputs
                .push(output::write_text(&svg_path, &svg::disc(&title, &lines))?);
            if model.kind == PotentialKind::YString {
                let (inner, dev) = y_circularity(&model, args.hyper_radius)?;
                summary.inner_radius = Some(inner);
                summary.circularity_deviation = Some(dev);
            }
        }
        ContourKind::Fourier => {
            let r: Vec<f64> = (0..args.n)
                .map(|k| 0.99 * k as f64 / (args.n - 1) as f64)
                .collect();
            let p = fourier_profile(&model, args.hyper_radius, &r, 192)?;
            let rows = (0..r.len()).map(|k| {
                vec![
                    num(p.r[k]),
                    num(p.vbar[k]),
                    num(p.delta_v[k]),
                    num(p.sin3[k]),
                    num(p.residual[k]),
                ]
            });
            manifest.outputs.push(output::write_csv(
                &csv_path,
                &["r", "vbar", "delta_v", "sin3", "residual"],
                rows,
            )?);
            let plot = svg::stacked(
                &format!(
                    "{} Fourier profile at R = {}",
                    args.potential, args.hyper_radius
                ),
                "r",
                &[
                    svg::Panel {
                        y_label: "Vbar",
                        lines: vec![svg::Line {
                            label: "",
                            x: &p.r,
                            y: &p.vbar,
                        }],
                    },
                    svg::Panel {
                        y_label: "delta V",
                        lines: vec![svg::Line {
                            label: "",
                            x: &p.r,
                            y: &p.delta_v,
                        }],
                    },
                ],
            );
            manifest.outputs.push(output::write_text(&svg_path, &plot)?);
        }
        ContourKind::AngleLocus | ContourKind::YBoundary => {
            let (pts, title) = if args.what == ContourKind::AngleLocus {
                (
                    fixed_angle_locus(args.gamma, args.n)?,
                    format!("largest angle {:.6}", args.gamma),
                )
            } else {
                (
                    y_boundary_locus(args.n)?,
                    "Y-string region boundary".to_string(),
                )
            };
            let rows = pts
                .iter()
                .map(|&(x, z)| vec![num(x), num(z), num(x.hypot(z)), num(x.atan2(z))]);
            manifest.outputs.push(output::write_csv(
                &csv_path,
                &["xp", "zp", "r", "phi"],
                rows,
            )?);
            let mut closed = pts.clone();
            closed.push(pts[0]);
            manifest.outputs.push(output::write_text(
                &svg_path,
                &svg::disc(&title, &[closed]),
            )?);
        }
    }
    manifest.outputs.push(output::write_json(
        &dir.join(format!("{tag}.json")),
        &summary,
    )?);
    output::write_json(&dir.join(format!("manifest-{tag}.json")), &manifest)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

struct Cell {
    xp: f64,
    zp: f64,
    r: f64,
    phi: f64,
    v: f64,
}

struct Grid {
    axis: Vec<f64>,
    /// Row-major over `(z′, x′)`; `NaN` outside the disc and at singular points.
    cells: Vec<Cell>,
}

fn equipotential_grid(model: &PotentialModel, hyper_radius: f64, n: usize) -> Grid {
    let axis: Vec<f64> = (0..n)
        .map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
        .collect();
    let mut cells = Vec::with_capacity(n * n);
    for &zp in &axis {
        for &xp in &axis {
            let r = xp.hypot(zp);
            let phi = xp.atan2(zp);
            let v = if r <= 1.0 {
                let cfg = configuration_from_disc(hyper_radius, r, phi, 1.0);
                potential_value(model, &cfg.x).unwrap_or(f64::NAN)
            } else {
                f64::NAN
            };
            cells.push(Cell {
                xp,
                zp,
                r,
                phi,
                v: if v.is_finite() { v } else { f64::NAN },
            });
        }
    }
    Grid { axis, cells }
}

fn finite_range(v: &[f64]) -> (f64, f64) {
    v.iter()
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        })
}

/// Iso-lines of a square grid as two-point segments; cells touching a `NaN`
/// are skipped.
fn marching_squares(axis: &[f64], field: &[f64], levels: &[f64]) -> Vec<Vec<(f64, f64)>> {
    let n = axis.len();
    let at = |i: usize, j: usize| field[j * n + i];
    let mut out = Vec::new();
    for &level in levels {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
                let vals = corners.map(|(a, b)| at(a, b));
                if vals.iter().any(|v| !v.is_finite()) {
                    continue;
                }
                let mut pts = Vec::with_capacity(4);
                for e in 0..4 {
                    let (a, b) = (e, (e + 1) % 4);
                    let (va, vb) = (vals[a], vals[b]);
                    if (va < level) != (vb < level) {
                        let u = (level - va) / (vb - va);
                        let (pa, pb) = (corners[a], corners[b]);
                        let x = axis[pa.0] + u * (axis[pb.0] - axis[pa.0]);
                        let z = axis[pa.1] + u * (axis[pb.1] - axis[pa.1]);
                        pts.push((x, z));
                    }
                }
                for pair in pts.chunks_exact(2) {
                    out.push(pair.to_vec());
                }
            }
        }
    }
    out
}

/// Spread of the Y-string potential around circles strictly inside the
/// central-Y region.
fn y_circularity(model: &PotentialModel, hyper_radius: f64) -> Result<(f64, f64)> {
    let inner = y_boundary_locus(360)?
        .iter()
        .map(|&(x, z)| x.hypot(z))
        .fold(f64::INFINITY, f64::min);
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        let r = 0.999 * inner * k as f64 / 20.0;
        let vals = (0..96)
            .map(|m| {
                let cfg = configuration_from_disc(hyper_radius, r, 2.0 * PI * m as f64 / 96.0, 1.0);
                potential_value(model, &cfg.x)
            })
            .collect::<trisym::Result<Vec<f64>>>()?;
        let (lo, hi) = finite_range(&vals);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        worst = worst.max((hi - lo) / mean.abs());
    }
    Ok((inner, worst))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn marching_squares_circle() {
        let axis: Vec<f64> = (0..41).map(|k| -1.0 + k as f64 / 20.0).collect();
        let field: Vec<f64> = axis
            .iter()
            .flat_map(|&z| axis.iter().map(move |&x| x.hypot(z)))
            .collect();
        let segs = marching_squares(&axis, &field, &[0.5]);
        assert!(!segs.is_empty());
        for s in segs {
            for (x, z) in s {
                assert!((x.hypot(z) - 0.5).abs() < 0.02);
            }
        }
    }

    #[test]
    fn y_string_inner_circles_are_level() {
        let (inner, dev) = y_circularity(&PotentialModel::y_string(), 1.0).unwrap();
        assert!(inner > 0.1 && inner < 1.0);
        assert!(dev < 1e-6, "{dev}");
    }
}
