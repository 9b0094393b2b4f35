//! Self-similar tilings, their finitely-additive invariant measures and the
//! deviation of ergodic averages.
//!
//! The crate is organised bottom-up: [`system`] and [`validate`] define
//! substitutions, [`tiling`] builds fixed-point tilings, [`geometry`] clips
//! tiles against domains, [`spectral`] decomposes the substitution matrix,
//! [`finadd`] and [`ergodic`] evaluate measures and integrals, and
//! [`experiments`] runs the numerical studies. [`catalog`] ships example systems.

pub mod catalog;
pub mod ergodic;
pub mod error;
pub mod experiments;
pub mod finadd;
pub mod geometry;
pub mod spectral;
pub mod system;
pub mod tiling;
pub mod validate;

pub use catalog::{builtin, CatalogEntry, Regime};
pub use ergodic::CylFunction;
pub use error::{Error, Result};
pub use geometry::{Domain, DomainKind, Point, TileClass};
pub use spectral::{SpectralData, SpectralMode};
pub use system::SubstitutionSystem;
pub use tiling::{PlacedTile, Seed, TilingView};
pub use validate::{validate_system, ValidationReport};
