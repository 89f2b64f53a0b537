use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use tierline_core::device::ssd_peak_iops;
use tierline_core::Result;

use crate::config::SimConfig;
use crate::engine::run_sim;

/// Steady-state measurements over the post-warmup window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub achieved_iops: f64,
    pub latency_mean: f64,
    pub latency_p99: f64,
    /// Busy share of channel time, averaged over channels.
    pub channel_utilization: f64,
    /// Busy share of plane time (reserved for a read or program), averaged over planes.
    pub die_utilization: f64,
    pub measured_waf: f64,
    pub ecc_escalations: u64,
    pub ios_completed: u64,
}

pub const RESULT_COLUMNS: [&str; 8] = [
    "achieved_iops",
    "latency_mean_s",
    "latency_p99_s",
    "channel_utilization",
    "die_utilization",
    "measured_waf",
    "ecc_escalations",
    "ios_completed",
];

impl SimResult {
    pub fn csv_header() -> String {
        RESULT_COLUMNS.join(",")
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.achieved_iops,
            self.latency_mean,
            self.latency_p99,
            self.channel_utilization,
            self.die_utilization,
            self.measured_waf,
            self.ecc_escalations,
            self.ios_completed
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub result: SimResult,
    pub read_latency_mean: f64,
    pub write_latency_mean: f64,
    /// `(percentile, latency s)` pairs.
    pub latency_percentiles: Vec<(f64, f64)>,
}

impl SimOutput {
    pub fn percentile_csv(&self) -> String {
        let mut out = String::from("percentile,latency_s\n");
        for (p, v) in &self.latency_percentiles {
            let _ = writeln!(out, "{p},{v}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    pub model_iops: f64,
    pub sim: SimResult,
    /// Simulated over modeled IOPS.
    pub ratio: f64,
}

/// Run the analytic peak and the simulator on the same device and mix.
pub fn validate_against_model(cfg: &SimConfig) -> Result<ModelComparison> {
    let model_iops = ssd_peak_iops(&cfg.ssd, &cfg.mix)?;
    let sim = run_sim(cfg)?;
    Ok(ModelComparison {
        model_iops,
        sim,
        ratio: sim.achieved_iops / model_iops,
    })
}
