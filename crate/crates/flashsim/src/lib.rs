//! Discrete-event flash back-end simulator.
//!
//! Models channels, dies and planes with short command bursts, sense/transfer
//! overlap, read-prioritized plane scheduling, page-mapped GC and a
//! two-level ECC read path. One seeded generator drives every draw.

pub mod config;
pub mod ecc;
pub mod engine;
pub mod ftl;
pub mod result;

pub use config::{load_sim_json, Arrival, EccConfig, GcConfig, SimConfig, SimDoc, WriteAck};
pub use engine::{run_sim, run_sim_detailed};
pub use result::{validate_against_model, ModelComparison, SimOutput, SimResult, RESULT_COLUMNS};
