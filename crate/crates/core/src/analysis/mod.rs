//! Shape-space diagnostics along integrated orbits.

mod lock;
mod periodic;
mod series;
mod syzygy;

pub use lock::{dominance_ratio, harmonic_power, lock_fit, LockReport};
pub use periodic::{
    choreography_test, detect_and_refine_period, detect_period, floquet_moduli, monodromy,
    ChoreographyResult, PeriodOptions, PeriodicityReport, QuotientClosure, SymmetryClass,
};
pub use series::{
    dv_dphi, effective_minimum, effective_radial_potential, g3_average, g3_dot, g3_dot_check,
    g3_from_phase_rate, g3_identity_residual, kinetic_identity_check, shape_series,
    shape_series_of, shape_series_window, EffectivePotential, G3Average, G3DotCheck, ShapeChoice,
    ShapeSeries,
};
pub use syzygy::{phi_sector, sector_middle, sector_pattern_period, syzygy_sequence, SyzygyEvent};
