use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use trisym::analysis::shape_series_of;
use trisym::catalog::OrbitSpec;
use trisym::dynamics::{Event, EventPayload, EventSpec};
use trisym::kinematics::state_shape;
use trisym::{integrate, PotentialKind, ThreeBodyState};

use crate::orbit::{self, OrbitArgs, ToleranceArgs};
use crate::output::{self, num, OutputFile, RunManifest};

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub orbit: OrbitArgs,
    /// Span in units of the catalog period (default 1).
    #[arg(long, conflicts_with = "t_end")]
    pub periods: Option<f64>,
    /// Span in time units.
    #[arg(long)]
    pub t_end: Option<f64>,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long, default_value_t = 512)]
    pub samples_per_period: usize,
    /// Output directory; each orbit writes to its own subdirectory.
    #[arg(long, env = "TRISYM_OUT_DIR", default_value = "trisym-out")]
    pub out: PathBuf,
    /// Orbits simulated in parallel when several are given.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Serialize)]
struct SimulateConfig {
    rel_tol: f64,
    abs_tol: f64,
    samples_per_period: usize,
    span: f64,
    samples: usize,
}

pub const TRAJECTORY_HEADER: [&str; 13] = [
    "t", "x1x", "x1y", "x2x", "x2y", "x3x", "x3y", "v1x", "v1y", "v2x", "v2y", "v3x", "v3y",
];
pub const SHAPE_HEADER: [&str; 10] = [
    "t",
    "R",
    "r",
    "alpha",
    "phi_unwrapped",
    "xp",
    "yp",
    "zp",
    "G3",
    "energy",
];
pub const EVENTS_HEADER: [&str; 9] = [
    "t",
    "kind",
    "direction",
    "R",
    "r",
    "phi",
    "middle",
    "level",
    "region",
];

pub fn run(args: &SimulateArgs, command: &[String]) -> Result<()> {
    if args.samples_per_period == 0 {
        bail!("--samples-per-period must be positive");
    }
    let specs = args.orbit.resolve()?;
    let jobs = args.jobs.max(1).min(specs.len());
    let next = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(spec) = specs.get(k) else { break };
                let dir = args.out.join(&spec.name);
                match simulate_one(spec, args, &dir, command) {
                    Ok(summary) => println!("{summary}"),
                    Err(e) => failures.lock().expect("failure list").push((k, e)),
                }
            });
        }
    });
    let mut failures = failures.into_inner().expect("failure list");
    failures.sort_by_key(|(k, _)| *k);
    match failures.into_iter().next() {
        Some((k, e)) if specs.len() > 1 => Err(e.context(format!("orbit `{}`", specs[k].name))),
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}

fn simulate_one(
    spec: &OrbitSpec,
    args: &SimulateArgs,
    dir: &Path,
    command: &[String],
) -> Result<String> {
    let start = Instant::now();
    let span = orbit::span(spec, args.periods, args.t_end)?;
    let per = spec.period_hint.unwrap_or(span);
    let samples = ((args.samples_per_period as f64 * span / per).round() as usize).max(1);
    let config = args.tol.config();
    let mut events = vec![EventSpec::Syzygy, EventSpec::PhiCycle];
    if spec.potential.kind == PotentialKind::YString {
        events.push(EventSpec::YRegionChange);
    }
    let state0 = spec.initial_state();
    let traj = integrate(&spec.potential, &state0, span, &config, &events)
        .with_context(|| format!("integrating `{}`", spec.name))?;
    let states = traj.uniform_samples(span, samples);
    let series = shape_series_of(&spec.potential, &states)?;

    output::ensure_dir(dir)?;
    let mut manifest = RunManifest::new(
        command,
        SimulateConfig {
            rel_tol: config.rel_tol,
            abs_tol: config.abs_tol,
            samples_per_period: args.samples_per_period,
            span,
            samples,
        },
        spec,
    );
    manifest
        .outputs
        .push(write_trajectory(&dir.join("trajectory.csv"), &states)?);
    manifest
        .outputs
        .push(write_shape(&dir.join("shape.csv"), &series)?);
    manifest
        .outputs
        .push(write_events(&dir.join("events.csv"), &traj.events)?);
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    output::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(format!(
        "{}: t = [0, {span:.6}], {} samples, {} events, phi advance {:.6} rad, energy drift {:.2e} -> {}",
        spec.name,
        states.len(),
        traj.events.len(),
        series.phi_advance(),
        traj.max_energy_drift()?,
        dir.display()
    ))
}

pub fn write_trajectory(path: &Path, states: &[ThreeBodyState]) -> Result<OutputFile> {
    output::write_csv(
        path,
        &TRAJECTORY_HEADER,
        states.iter().map(|s| {
            let mut row = vec![num(s.t)];
            row.extend(s.to_array().iter().map(|&v| num(v)));
            row
        }),
    )
}

fn write_shape(path: &Path, s: &trisym::analysis::ShapeSeries) -> Result<OutputFile> {
    output::write_csv(
        path,
        &SHAPE_HEADER,
        (0..s.len()).map(|k| {
            [
                s.t[k],
                s.hyper_radius[k],
                s.r[k],
                s.alpha[k],
                s.phi_unwrapped[k],
                s.xp[k],
                s.yp[k],
                s.zp[k],
                s.g3[k],
                s.energy[k],
            ]
            .iter()
            .map(|&v| num(v))
            .collect()
        }),
    )
}

fn write_events(path: &Path, events: &[Event]) -> Result<OutputFile> {
    output::write_csv(
        path,
        &EVENTS_HEADER,
        events.iter().map(|e| {
            let shape = state_shape(&e.state).ok();
            let (middle, level, region) = match e.payload {
                EventPayload::Syzygy { middle, .. } => {
                    ((middle + 1).to_string(), String::new(), String::new())
                }
                EventPayload::PhiLevel { level } => (String::new(), num(level), String::new()),
                EventPayload::Region { region } => {
                    (String::new(), String::new(), format!("{region:?}"))
                }
            };
            vec![
                num(e.t),
                format!("{:?}", e.kind),
                e.direction.to_string(),
                shape.map_or_else(String::new, |p| num(p.hyper_radius)),
                shape.map_or_else(String::new, |p| num(p.r)),
                shape.map_or_else(String::new, |p| num(p.phi)),
                middle,
                level,
                region,
            ]
        }),
    )
}

/// Reads a `trajectory.csv` written by `simulate`.
pub fn read_trajectory(path: &Path, m: f64) -> Result<Vec<ThreeBodyState>> {
    let mut rdr =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if header != TRAJECTORY_HEADER {
        bail!(
            "{} does not have the trajectory header {}",
            path.display(),
            TRAJECTORY_HEADER.join(",")
        );
    }
    let mut states = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("{} row {}", path.display(), line + 2))?;
        let y: [f64; 12] = vals[1..]
            .try_into()
            .expect("13 columns checked by the header");
        states.push(ThreeBodyState::from_array(vals[0], &y, m));
    }
    if states.len() < 2 {
        bail!("{} needs at least two rows", path.display());
    }
    Ok(states)
}
