use std::f64::consts::{FRAC_PI_3, PI};

use trisym::analysis::{detect_and_refine_period, shape_series, PeriodOptions, SymmetryClass};
use trisym::catalog::lookup;
use trisym::dynamics::{detect_events, EventSpec};
use trisym::{integrate, IntegratorConfig};

#[test]
fn newton_figure_eight_period() {
    let spec = lookup("fig8-newton").unwrap();
    let rep = detect_and_refine_period(
        &spec.potential,
        &spec.initial_state(),
        6.3,
        &PeriodOptions::default(),
    )
    .unwrap();
    assert!((rep.period_t - 6.3259).abs() < 1e-3, "{}", rep.period_t);
    assert!(rep.choreography);
    assert_eq!(rep.symmetry_class, SymmetryClass::S3);
    assert!(rep.floquet_moduli.iter().all(|&m| m < 1.0 + 1e-3));
}

#[test]
fn figure_eight_launch_is_an_euler_syzygy() {
    for name in ["fig8-newton", "fig8-delta", "fig8-ystring"] {
        let spec = lookup(name).unwrap();
        let traj = integrate(
            &spec.potential,
            &spec.initial_state(),
            spec.period_hint.unwrap(),
            &IntegratorConfig::default(),
            &[],
        )
        .unwrap();
        let s = shape_series(&traj, 256).unwrap();
        assert!((s.phi_unwrapped[0] - FRAC_PI_3).abs() < 1e-12);
        // one strict period sweeps the braiding angle through two full turns
        let advance = s.phi_unwrapped[s.len() - 1] - s.phi_unwrapped[0];
        assert!((advance.abs() - 4.0 * PI).abs() < 0.05, "{name}: {advance}");
        let syzygies = detect_events(&traj, &[EventSpec::Syzygy]);
        assert!(syzygies.len() >= 5, "{name}: {}", syzygies.len());
    }
}

#[test]
fn type_two_does_not_wind() {
    let spec = lookup("typeII-ystring").unwrap();
    let traj = integrate(
        &spec.potential,
        &spec.initial_state(),
        2.0 * spec.period_hint.unwrap(),
        &IntegratorConfig::default(),
        &[],
    )
    .unwrap();
    let s = shape_series(&traj, 4096).unwrap();
    let (lo, hi) = s.phi_range();
    assert!(hi - lo < 2.5 * PI);
    assert!((0.5 * (lo + hi) - FRAC_PI_3).abs() < 0.01);
}
