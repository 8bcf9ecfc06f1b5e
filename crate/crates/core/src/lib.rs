//! Hourly simulation and multi-objective sizing of grid-connected hybrid
//! solar + pumped-storage-hydropower systems, for monofacial and bifacial
//! PV technologies.
//!
//! The pipeline runs weather -> sun position -> plane-of-array irradiance
//! -> inverted array power -> hourly dispatch against a load with a pumped
//! storage plant and a capped grid tie -> annual ledger -> (IR, LCOE, RSF).
//! [`optimizer`] searches the (N_PV, N_Ht) sizing space with MOEA/D.

pub mod data_io;
pub mod dispatch;
pub mod economics;
pub mod error;
pub mod irradiance;
pub mod optimizer;
pub mod psh;
pub mod pv_array;
pub mod solar_geometry;
pub mod studies;
pub mod synthetic;

pub use error::{Error, Result};

/// Hours in the (non-leap) simulated year.
pub const HOURS_PER_YEAR: usize = 8760;
