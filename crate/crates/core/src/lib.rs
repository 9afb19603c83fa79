//! Coupled heat and moisture transfer in porous building materials.
//!
//! The crate is organised bottom-up:
//!
//! - [`material_db`]: the 49-material property database, CSV ingestion and
//!   the sorption / conductivity fitting routines.
//! - [`thermo`]: constitutive laws (saturation pressure, latent heat, Kelvin
//!   equation, Oswin sorption, vapour and liquid permeabilities) and the seven
//!   transfer/storage coefficients of the governing equations.
//! - [`dimensionless`]: reference frames, the eight dimensionless numbers
//!   (Fourier, Biot and coupling numbers) and the nonlinear distortion
//!   coefficients over the `(u, v)` domain.
//! - [`similarity`]: kinetic (equivalent length), geometric (equivalent time)
//!   and dynamic (Π-scaling) similarity.
//! - [`wall`]: per-layer numbers of multi-layer walls and directional
//!   comparison of two walls.
//! - [`solver`]: a 1D finite-volume solver of the dimensionless coupled
//!   equations used to verify dynamic similitude.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimensionless;
pub mod error;
pub mod material_db;
pub mod similarity;
pub mod solver;
pub mod thermo;
pub mod units;
pub mod wall;

pub use dimensionless::{DimensionlessNumbers, ReferenceFrame, SurfaceCoefficients};
pub use error::{Error, Result};
pub use material_db::{Category, MaterialDb, MaterialProperties};
pub use thermo::{CoefficientSet, PhysicalConstants, ThermoState};
