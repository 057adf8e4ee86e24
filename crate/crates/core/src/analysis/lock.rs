use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::series::ShapeSeries;
use crate::error::{Error, Result};

/// Fit of `r`, `R` and `φ − ⟨φ̇⟩t` to `c₀ + s·sin 3φ + c·cos 3φ`.
///
/// Amplitudes are `√(s² + c²)` and phases `atan2(c, s)`, so each fitted
/// series reads `mean + amp·sin(3φ + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LockReport {
    pub mean_phi_rate: f64,
    pub mean_r: f64,
    pub mean_hyper_radius: f64,
    pub amp_r: f64,
    pub amp_hyper_radius: f64,
    pub amp_phi: f64,
    pub phase_r: f64,
    pub phase_hyper_radius: f64,
    pub phase_phi: f64,
    /// Largest `√(SS_res/SS_tot)` of the `r` and `R` fits.
    pub residual_fraction: f64,
}

impl LockReport {
    /// `|phase_r − phase_R|` wrapped into `[0, π]`.
    pub fn phase_difference(&self) -> f64 {
        crate::kinematics::wrap_angle(self.phase_r - self.phase_hyper_radius).abs()
    }
}

struct Fit {
    mean: f64,
    amp: f64,
    phase: f64,
    residual_fraction: f64,
}

fn fit_third_harmonic(phi: &[f64], y: &[f64]) -> Result<Fit> {
    let n = phi.len();
    let a = DMatrix::from_fn(n, 3, |i, j| match j {
        0 => 1.0,
        1 => (3.0 * phi[i]).sin(),
        _ => (3.0 * phi[i]).cos(),
    });
    let b = DVector::from_column_slice(y);
    let coef = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Domain(format!("least-squares fit failed: {e}")))?;
    let resid = &b - &a * &coef;
    let mean_y = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let ss_res = resid.norm_squared();
    let residual_fraction = if ss_tot > 0.0 {
        (ss_res / ss_tot).sqrt().min(1.0)
    } else {
        0.0
    };
    Ok(Fit {
        mean: coef[0],
        amp: coef[1].hypot(coef[2]),
        phase: coef[2].atan2(coef[1]),
        residual_fraction,
    })
}

/// Phase/frequency lock fit over a series covering one period of a rotating
/// orbit.
pub fn lock_fit(series: &ShapeSeries) -> Result<LockReport> {
    if series.len() < 8 {
        return Err(Error::Domain("lock fit needs at least 8 samples".into()));
    }
    let advance = series.phi_advance();
    if series.phi_held.iter().any(|&h| h) || advance.abs() < PI {
        return Err(Error::UnsupportedOrbit(format!(
            "braiding angle does not rotate (advance {advance:.3} rad over the window)"
        )));
    }
    let t0 = series.t[0];
    let span = series.t[series.len() - 1] - t0;
    let rate = advance / span;
    let phi = &series.phi_unwrapped;
    let detrended: Vec<f64> = phi
        .iter()
        .zip(&series.t)
        .map(|(p, t)| p - rate * (t - t0))
        .collect();
    let fr = fit_third_harmonic(phi, &series.r)?;
    let fbig = fit_third_harmonic(phi, &series.hyper_radius)?;
    let fp = fit_third_harmonic(phi, &detrended)?;
    Ok(LockReport {
        mean_phi_rate: rate,
        mean_r: fr.mean,
        mean_hyper_radius: fbig.mean,
        amp_r: fr.amp,
        amp_hyper_radius: fbig.amp,
        amp_phi: fp.amp,
        phase_r: fr.phase,
        phase_hyper_radius: fbig.phase,
        phase_phi: fp.phase,
        residual_fraction: fr.residual_fraction.max(fbig.residual_fraction),
    })
}

/// `|c_k|²` for `k = 0..=kmax`, with
/// `c_k = (1/Δφ)∫ y e^{−ikφ} φ̇ dt` over the whole series.
pub fn harmonic_power(series: &ShapeSeries, y: &[f64], kmax: usize) -> Vec<f64> {
    let n = series.len();
    let advance = series.phi_advance();
    (0..=kmax)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for i in 1..n {
                let dt = series.t[i] - series.t[i - 1];
                let term = |j: usize| {
                    let a = k as f64 * series.phi_unwrapped[j];
                    let w = y[j] * series.phi_dot[j];
                    (w * a.cos(), -w * a.sin())
                };
                let (r0, i0) = term(i - 1);
                let (r1, i1) = term(i);
                re += 0.5 * (r0 + r1) * dt;
                im += 0.5 * (i0 + i1) * dt;
            }
            (re * re + im * im) / (advance * advance)
        })
        .collect()
}

/// Power of harmonic `k` over the strongest harmonic outside `{0, k}`.
pub fn dominance_ratio(power: &[f64], k: usize) -> f64 {
    let other = power
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != 0 && *j != k)
        .map(|(_, p)| *p)
        .fold(0.0, f64::max);
    power[k] / other.max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(n: usize) -> ShapeSeries {
        let mut s = ShapeSeries {
            m: 1.0,
            ..Default::default()
        };
        for k in 0..=n {
            let t = 4.0 * k as f64 / n as f64;
            let phi = 0.5 * PI * t;
            s.t.push(t);
            s.phi_unwrapped.push(phi);
            s.phi_dot.push(0.5 * PI);
            s.r.push(0.9 + 0.05 * (3.0 * phi).sin());
            s.hyper_radius.push(2.0 + 0.1 * (3.0 * phi + 0.4).sin());
            s.phi_held.push(false);
        }
        s
    }

    #[test]
    fn recovers_constructed_signal() {
        let rep = lock_fit(&synthetic(400)).unwrap();
        assert_abs_diff_eq!(rep.amp_r, 0.05, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.phase_r, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(rep.mean_r, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.amp_hyper_radius, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.phase_hyper_radius, 0.4, epsilon = 1e-10);
        assert!(rep.residual_fraction < 1e-10);
        assert_abs_diff_eq!(rep.mean_phi_rate, 0.5 * PI, epsilon = 1e-12);
    }

    #[test]
    fn static_phi_is_unsupported() {
        let mut s = synthetic(50);
        s.phi_unwrapped.iter_mut().for_each(|p| *p = 0.3);
        assert!(matches!(lock_fit(&s), Err(Error::UnsupportedOrbit(_))));
    }

    #[test]
    fn harmonic_power_picks_three() {
        let s = synthetic(2000);
        let p = harmonic_power(&s, &s.r, 8);
        assert_abs_diff_eq!(p[0], 0.81, epsilon = 1e-9);
        assert_abs_diff_eq!(p[3], 0.025f64.powi(2), epsilon = 1e-9);
        assert!(dominance_ratio(&p, 3) > 1e6);
    }
}
