use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;
use trisym::analysis::{
    detect_and_refine_period, detect_period, dominance_ratio, g3_average, g3_dot_check,
    g3_identity_residual, harmonic_power, lock_fit, sector_pattern_period, shape_series,
    shape_series_of, syzygy_sequence, PeriodOptions, ShapeSeries,
};
use trisym::catalog::OrbitSpec;
use trisym::{
    integrate, IntegratorConfig, PotentialKind, PotentialModel, ThreeBodyState, Trajectory,
};

use crate::orbit::{self, OrbitArgs, ToleranceArgs};
use crate::output::{self, RunManifest};
use crate::simulate::read_trajectory;
use crate::svg;

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Lock,
    G3,
    Syzygy,
    Period,
    Stability,
}

#[derive(Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub kind: ReportKind,
    #[command(flatten)]
    pub orbit: OrbitArgs,
    /// A `trajectory.csv` from `simulate` instead of an orbit; pair with --potential.
    #[arg(long, conflicts_with = "orbit")]
    pub trajectory: Option<PathBuf>,
    #[arg(long, conflicts_with = "t_end")]
    pub periods: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Search horizon for the period when the orbit has no catalog period.
    #[arg(long, default_value_t = 100.0)]
    pub t_max: f64,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value_t = 512)]
    pub samples_per_period: usize,
    #[arg(long, env = "TRISYM_OUT_DIR", default_value = "trisym-out")]
    pub out: PathBuf,
    /// Refine the launch to a closed orbit first and analyse whole refined
    /// periods (lock, g3 and syzygy reports).
    #[arg(long)]
    pub refine: bool,
    /// Skip the SVG plots.
    #[arg(long)]
    pub no_plots: bool,
}

enum Source {
    Orbit(OrbitSpec),
    File {
        name: String,
        model: PotentialModel,
        states: Vec<ThreeBodyState>,
    },
}

impl Source {
    fn name(&self) -> &str {
        match self {
            Source::Orbit(spec) => &spec.name,
            Source::File { name, .. } => name,
        }
    }

    fn model(&self) -> PotentialModel {
        match self {
            Source::Orbit(spec) => spec.potential,
            Source::File { model, .. } => *model,
        }
    }

    fn initial(&self) -> ThreeBodyState {
        match self {
            Source::Orbit(spec) => spec.initial_state(),
            Source::File { states, .. } => states[0],
        }
    }

    fn period_hint(&self) -> Option<f64> {
        match self {
            Source::Orbit(spec) => spec.period_hint,
            Source::File { .. } => None,
        }
    }
}

#[derive(Serialize)]
struct Input<'a> {
    name: &'a str,
    potential: PotentialModel,
    trajectory_file: Option<&'a Path>,
    initial_positions: [[f64; 2]; 3],
    initial_velocities: [[f64; 2]; 3],
}

#[derive(Serialize)]
struct AnalyzeConfig {
    kind: ReportKind,
    rel_tol: f64,
    abs_tol: f64,
    samples_per_period: usize,
    span: Option<f64>,
}

pub fn run(args: &AnalyzeArgs, command: &[String]) -> Result<()> {
    let source = match &args.trajectory {
        Some(path) => {
            let kind = args.orbit.potential.unwrap_or(PotentialKind::Newton);
            let model = PotentialModel::new(kind, args.orbit.coupling)?;
            let states = read_trajectory(path, 1.0)?;
            let name = path.parent().and_then(|p| p.file_name()).map_or_else(
                || "trajectory".to_string(),
                |n| n.to_string_lossy().into_owned(),
            );
            Source::File {
                name,
                model,
                states,
            }
        }
        None if args.orbit.is_set() => {
            let mut specs = args.orbit.resolve()?;
            if specs.len() != 1 {
                bail!("analyze takes a single orbit, got {}", specs.len());
            }
            Source::Orbit(specs.remove(0))
        }
        None => bail!("give --orbit or --trajectory"),
    };
    let start = std::time::Instant::now();
    let config = args.tol.config();
    let (report, series, span) = match args.kind {
        ReportKind::Lock => lock_report(&source, args, &config)?,
        ReportKind::G3 => g3_report(&source, args, &config)?,
        ReportKind::Syzygy => syzygy_report(&source, args, &config)?,
        ReportKind::Period | ReportKind::Stability => period_report(&source, args)?,
    };
    let dir = output::ensure_dir(&args.out.join(source.name()))?;
    let init = source.initial();
    let input = Input {
        name: source.name(),
        potential: source.model(),
        trajectory_file: args.trajectory.as_deref(),
        initial_positions: init.x.map(|p| [p.x, p.y]),
        initial_velocities: init.v.map(|p| [p.x, p.y]),
    };
    let kind_name = format!("{:?}", args.kind).to_lowercase();
    let mut manifest = RunManifest::new(
        command,
        AnalyzeConfig {
            kind: args.kind,
            rel_tol: config.rel_tol,
            abs_tol: config.abs_tol,
            samples_per_period: args.samples_per_period,
            span,
        },
        input,
    );
    let report_path = dir.join(format!("analyze-{kind_name}.json"));
    manifest
        .outputs
        .push(output::write_json(&report_path, &report)?);
    if !args.no_plots {
        manifest
            .outputs
            .extend(write_plots(&dir, source.name(), &series)?);
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    output::write_json(&dir.join(format!("manifest-{kind_name}.json")), &manifest)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn samples_for(source: &Source, args: &AnalyzeArgs, span: f64) -> usize {
    let per = source.period_hint().unwrap_or(span);
    ((args.samples_per_period as f64 * span / per).round() as usize).max(8)
}

fn period_guess(source: &Source, args: &AnalyzeArgs) -> Result<f64> {
    match source.period_hint() {
        Some(hint) => Ok(hint),
        None => detect_period(
            &source.model(),
            &source.initial(),
            args.t_max,
            0.05,
            &args.tol.config(),
        )?
        .with_context(|| format!("no near-return found within t = {}", args.t_max)),
    }
}

fn trajectory(
    source: &Source,
    args: &AnalyzeArgs,
    config: &IntegratorConfig,
) -> Result<(Trajectory, f64)> {
    let (init, span) = if args.refine {
        let report = detect_and_refine_period(
            &source.model(),
            &source.initial(),
            period_guess(source, args)?,
            &PeriodOptions::default(),
        )?;
        let span = args
            .t_end
            .unwrap_or(args.periods.unwrap_or(1.0) * report.period_t);
        (report.refined_state, span)
    } else {
        let init = source.initial();
        let span = match source {
            Source::Orbit(spec) => orbit::span(spec, args.periods, args.t_end)?,
            Source::File { states, .. } => {
                args.t_end.unwrap_or(states[states.len() - 1].t - init.t)
            }
        };
        (init, span)
    };
    let traj = integrate(&source.model(), &init, init.t + span, config, &[])
        .with_context(|| format!("integrating `{}`", source.name()))?;
    Ok((traj, span))
}

#[derive(Serialize)]
struct LockOut {
    kind: &'static str,
    #[serde(flatten)]
    lock: trisym::analysis::LockReport,
    phase_difference: f64,
    harmonic_power_r: Vec<f64>,
    harmonic_power_hyper_radius: Vec<f64>,
    dominance_r_k3: f64,
    dominance_hyper_radius_k3: f64,
}

type Report = (serde_json::Value, ShapeSeries, Option<f64>);

fn lock_report(source: &Source, args: &AnalyzeArgs, config: &IntegratorConfig) -> Result<Report> {
    let (series, span) = match source {
        Source::File { model, states, .. } if !args.refine => {
            (shape_series_of(model, states)?, None)
        }
        _ => {
            let (traj, span) = trajectory(source, args, config)?;
            (
                shape_series(&traj, samples_for(source, args, span))?,
                Some(span),
            )
        }
    };
    let lock = lock_fit(&series)?;
    let pr = harmonic_power(&series, &series.r, 8);
    let pbig = harmonic_power(&series, &series.hyper_radius, 8);
    let out = LockOut {
        kind: "lock",
        lock,
        phase_difference: lock.phase_difference(),
        dominance_r_k3: dominance_ratio(&pr, 3),
        dominance_hyper_radius_k3: dominance_ratio(&pbig, 3),
        harmonic_power_r: pr,
        harmonic_power_hyper_radius: pbig,
    };
    Ok((serde_json::to_value(out)?, series, span))
}

#[derive(Serialize)]
struct G3Out {
    kind: &'static str,
    average: trisym::analysis::G3Average,
    /// Largest `|G3 − (m/4)(R r)² dφ/dt|` relative to `max|G3|`.
    identity_residual: f64,
    torque: trisym::analysis::G3DotCheck,
    /// `dG3/dt` vanishes on every central-Y sample.
    flat_top: bool,
    max_abs_g3: f64,
}

/// Central-Y samples must hold `|dG3/dt|` below this fraction of `max|G3|`.
pub const FLAT_TOP_TOL: f64 = 1e-8;

fn g3_report(source: &Source, args: &AnalyzeArgs, config: &IntegratorConfig) -> Result<Report> {
    let (traj, span) = trajectory(source, args, config)?;
    let series = shape_series(&traj, samples_for(source, args, span))?;
    let average = g3_average(&traj, traj.t_start(), span)?;
    let torque = g3_dot_check(&traj, &series)?;
    let out = G3Out {
        kind: "g3",
        average,
        identity_residual: g3_identity_residual(&traj, &series),
        flat_top: torque.central_y_samples > 0 && torque.central_y_max < FLAT_TOP_TOL,
        torque,
        max_abs_g3: series.g3.iter().fold(0.0, |a: f64, g| a.max(g.abs())),
    };
    Ok((serde_json::to_value(out)?, series, Some(span)))
}

#[derive(Serialize)]
struct SyzygyOut {
    kind: &'static str,
    count: usize,
    sector_pattern_period: Option<usize>,
    /// Middle particles in order, 1-based.
    middle_sequence: Vec<usize>,
    events: Vec<trisym::analysis::SyzygyEvent>,
}

fn syzygy_report(source: &Source, args: &AnalyzeArgs, config: &IntegratorConfig) -> Result<Report> {
    let (traj, span) = trajectory(source, args, config)?;
    let series = shape_series(&traj, samples_for(source, args, span))?;
    let events = syzygy_sequence(&traj);
    let out = SyzygyOut {
        kind: "syzygy",
        count: events.len(),
        sector_pattern_period: sector_pattern_period(&events),
        middle_sequence: events.iter().map(|e| e.middle_particle + 1).collect(),
        events,
    };
    Ok((serde_json::to_value(out)?, series, Some(span)))
}

#[derive(Serialize)]
struct PeriodOut {
    kind: &'static str,
    period_guess: f64,
    #[serde(flatten)]
    report: trisym::analysis::PeriodicityReport,
    refined_positions: [[f64; 2]; 3],
    refined_velocities: [[f64; 2]; 3],
    max_floquet_modulus: f64,
}

fn period_report(source: &Source, args: &AnalyzeArgs) -> Result<Report> {
    let model = source.model();
    let init = source.initial();
    let opts = PeriodOptions::default();
    let guess = match args.t_end {
        Some(t) => t,
        None => period_guess(source, args)?,
    };
    let report = detect_and_refine_period(&model, &init, guess, &opts)?;
    let refined = report.refined_state;
    let traj = integrate(&model, &refined, report.period_t, &opts.integrator(), &[])?;
    let series = shape_series(&traj, args.samples_per_period)?;
    let out = PeriodOut {
        kind: if args.kind == ReportKind::Stability {
            "stability"
        } else {
            "period"
        },
        period_guess: guess,
        max_floquet_modulus: report.floquet_moduli.first().copied().unwrap_or(f64::NAN),
        refined_positions: refined.x.map(|p| [p.x, p.y]),
        refined_velocities: refined.v.map(|p| [p.x, p.y]),
        report,
    };
    Ok((serde_json::to_value(out)?, series, Some(traj.duration())))
}

fn write_plots(dir: &Path, name: &str, s: &ShapeSeries) -> Result<Vec<output::OutputFile>> {
    use svg::{Line, Panel};
    let line = |y| {
        vec![Line {
            label: "",
            x: &s.t,
            y,
        }]
    };
    let shape = svg::stacked(
        &format!("{name}: disc radius, polar angle and braiding angle"),
        "t",
        &[
            Panel {
                y_label: "r",
                lines: line(&s.r),
            },
            Panel {
                y_label: "alpha",
                lines: line(&s.alpha),
            },
            Panel {
                y_label: "phi",
                lines: line(&s.phi_unwrapped),
            },
        ],
    );
    let radial = svg::stacked(
        &format!("{name}: hyper-radius and G3"),
        "t",
        &[
            Panel {
                y_label: "R",
                lines: line(&s.hyper_radius),
            },
            Panel {
                y_label: "G3",
                lines: line(&s.g3),
            },
        ],
    );
    Ok(vec![
        output::write_text(&dir.join("shape_angles.svg"), &shape)?,
        output::write_text(&dir.join("radius_g3.svg"), &radial)?,
    ])
}
