//! Equal-mass planar three-body dynamics in permutation-symmetric shape
//! coordinates: Jacobi vectors, the shape sphere, Newton / Δ-string / Y-string
//! potentials, adaptive integration with event location, and orbit analysis.

pub mod analysis;
pub mod catalog;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod potentials;

pub use dynamics::{integrate, IntegratorConfig, Trajectory};
pub use error::{Error, Result};
pub use kinematics::{JacobiState, Permutation, ShapePoint, ThreeBodyState, Vec2};
pub use potentials::{PotentialKind, PotentialModel, YRegion};
