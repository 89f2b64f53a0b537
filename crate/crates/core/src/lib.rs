//! Analytic models for deciding when data belongs in DRAM and when on flash.

pub mod cases;
pub mod device;
pub mod econ;
pub mod error;
pub mod feasibility;
pub mod profile;
pub mod provision;
pub mod units;

pub use error::{ModelError, Result};
