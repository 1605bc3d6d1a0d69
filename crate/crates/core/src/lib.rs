//! Atom-field Schrödinger-cat model.
//!
//! A two-level atom crossing a resonant cavity splits into two dressed
//! partial packets; displaced-parity measurements on the atom combined with
//! a phase-sensitive field observable give correlations whose CHSH sum
//! exceeds the classical bound 2.
//!
//! All math is generic over [`Real`] (`f32` or `f64`); the aliases below fix
//! the scalar to `f64`.

pub mod chsh;
pub mod error;
pub mod grid;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod quad;
pub mod real;
pub mod wigner;

pub use error::{Error, Result};
pub use model::BranchSign;
pub use optimize::SearchMode;
pub use real::Real;

pub type SystemConfig = model::SystemConfig<f64>;
pub type SystemConfigF32 = model::SystemConfig<f32>;
pub type DerivedScales = model::DerivedScales<f64>;
pub type PhasePoint = wigner::PhasePoint<f64>;
pub type PhasePointF32 = wigner::PhasePoint<f32>;
pub type SampledWave = wigner::SampledWave<f64>;
pub type AtomSetting = chsh::AtomSetting<f64>;
pub type FieldSetting = chsh::FieldSetting<f64>;
pub type ChshSetting = chsh::ChshSetting<f64>;
pub type ScaledChshPoint = chsh::ScaledChshPoint<f64>;
pub type ScaledChshPointF32 = chsh::ScaledChshPoint<f32>;
pub type ChshBounds = optimize::ChshBounds<f64>;
pub type OptimumReport = optimize::OptimumReport<f64>;
pub type Grid = grid::Grid<f64>;
pub type GridState = oracle::GridState<f64>;
pub type Potential = oracle::Potential<f64>;
