//! Calibrated break-even interval.
//!
//! Caching a block saves, per access, the host-core time to drive the I/O,
//! the host-DRAM bandwidth the transfer consumes and the SSD time it occupies.
//! Keeping it cached costs DRAM capacity rent. The break-even interval is the
//! access interval at which the two balance.

use serde::{Deserialize, Serialize};

use crate::device::{ssd_cost, SsdConfig, WorkloadMix};
use crate::error::{ModelError, Result};
use crate::units::GB;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HostPlatform {
    pub cost_core: f64,
    pub iops_per_core: f64,
    /// Normalized cost of one host DRAM die.
    pub cost_dram_die: f64,
    /// Bandwidth of one host DRAM die, bytes/s.
    pub dram_die_bandwidth: f64,
    /// Capacity of one host DRAM die, bytes.
    pub dram_die_capacity: f64,
    pub label: String,
}

impl HostPlatform {
    pub fn cpu_ddr() -> Self {
        Self {
            cost_core: 4.0,
            iops_per_core: 1e6,
            cost_dram_die: 1.0,
            dram_die_bandwidth: 3.0 * GB,
            dram_die_capacity: 3.0 * GB,
            label: "cpu-ddr".into(),
        }
    }

    pub fn gpu_gddr() -> Self {
        Self {
            cost_core: 3.0,
            iops_per_core: 4e6,
            cost_dram_die: 2.0,
            dram_die_bandwidth: 80.0 * GB,
            dram_die_capacity: 2.0 * GB,
            label: "gpu-gddr".into(),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "cpu-ddr" => Ok(Self::cpu_ddr()),
            "gpu-gddr" => Ok(Self::gpu_gddr()),
            _ => Err(ModelError::config(
                "preset",
                format!("unknown preset `{name}` (expected cpu-ddr or gpu-gddr)"),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cost_core", self.cost_core),
            ("iops_per_core", self.iops_per_core),
            ("cost_dram_die", self.cost_dram_die),
            ("dram_die_bandwidth", self.dram_die_bandwidth),
            ("dram_die_capacity", self.dram_die_capacity),
        ] {
            if !(v > 0.0) || v.is_nan() {
                return Err(ModelError::config(format!("platform.{name}"), "must be positive"));
            }
        }
        Ok(())
    }

    /// Parse a JSON platform document; absent keys keep values from `base`
    /// or from the document's `preset`.
    pub fn from_json(json: &str, base: HostPlatform) -> Result<Self> {
        let doc: PlatformDoc =
            serde_json::from_str(json).map_err(|e| ModelError::config("platform", e.to_string()))?;
        doc.apply(base)
    }
}

/// JSON platform description. Bandwidth in GB/s, capacity in GB.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformDoc {
    pub preset: Option<String>,
    pub label: Option<String>,
    pub cost_core: Option<f64>,
    pub iops_per_core: Option<f64>,
    pub cost_dram_die: Option<f64>,
    pub dram_die_bw_gbps: Option<f64>,
    pub dram_die_gb: Option<f64>,
}

impl PlatformDoc {
    pub fn apply(&self, base: HostPlatform) -> Result<HostPlatform> {
        let mut p = match &self.preset {
            Some(name) => HostPlatform::preset(name)?,
            None => base,
        };
        if let Some(v) = &self.label {
            p.label = v.clone();
        }
        if let Some(v) = self.cost_core {
            p.cost_core = v;
        }
        if let Some(v) = self.iops_per_core {
            p.iops_per_core = v;
        }
        if let Some(v) = self.cost_dram_die {
            p.cost_dram_die = v;
        }
        if let Some(v) = self.dram_die_bw_gbps {
            p.dram_die_bandwidth = v * GB;
        }
        if let Some(v) = self.dram_die_gb {
            p.dram_die_capacity = v * GB;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Break-even interval split into the three resources an access consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BreakEvenResult {
    pub processor_term: f64,
    pub dram_term: f64,
    pub ssd_term: f64,
    pub total: f64,
}

/// Per-access cost terms `(processor, dram bandwidth, ssd)`.
fn access_terms(platform: &HostPlatform, ssd_cost: f64, usable_iops: f64, block_size: u64) -> Result<[f64; 3]> {
    platform.validate()?;
    if !(usable_iops > 0.0) {
        return Err(ModelError::domain("usable_iops", format!("{usable_iops} is not positive")));
    }
    if !(ssd_cost >= 0.0) {
        return Err(ModelError::domain("ssd_cost", "must be non-negative"));
    }
    Ok([
        platform.cost_core / platform.iops_per_core,
        block_size as f64 * platform.cost_dram_die / platform.dram_die_bandwidth,
        ssd_cost / usable_iops,
    ])
}

/// Normalized cost saved per avoided access.
pub fn saving_rate(platform: &HostPlatform, ssd_cost: f64, usable_iops: f64, block_size: u64) -> Result<f64> {
    Ok(access_terms(platform, ssd_cost, usable_iops, block_size)?.iter().sum())
}

/// DRAM capacity rent of holding one block.
pub fn dram_rent(platform: &HostPlatform, block_size: u64) -> Result<f64> {
    platform.validate()?;
    if block_size as f64 > platform.dram_die_capacity {
        return Err(ModelError::domain("block_size", "larger than one DRAM die"));
    }
    Ok(block_size as f64 / platform.dram_die_capacity * platform.cost_dram_die)
}

/// Break-even interval from an explicit SSD cost.
pub fn break_even_with_cost(
    platform: &HostPlatform,
    ssd_cost: f64,
    usable_iops: f64,
    block_size: u64,
) -> Result<BreakEvenResult> {
    let terms = access_terms(platform, ssd_cost, usable_iops, block_size)?;
    let rent = dram_rent(platform, block_size)?;
    let [processor_term, dram_term, ssd_term] = terms.map(|t| t / rent);
    Ok(BreakEvenResult {
        processor_term,
        dram_term,
        ssd_term,
        total: processor_term + dram_term + ssd_term,
    })
}

/// Break-even interval for an SSD described from first principles.
///
/// `usable_iops` is per-SSD throughput the host can actually drive; pass the
/// device peak for the economics-only view.
pub fn break_even(
    platform: &HostPlatform,
    ssd: &SsdConfig,
    mix: &WorkloadMix,
    usable_iops: f64,
) -> Result<BreakEvenResult> {
    mix.validate()?;
    let cost = ssd_cost(ssd)?.total;
    break_even_with_cost(platform, cost, usable_iops, mix.block_size)
}

/// Classical five-minute-rule interval; reference output only.
pub fn classical_break_even(pages_per_mb: f64, drive_iops: f64, drive_cost: f64, dram_mb_cost: f64) -> Result<f64> {
    for (name, v) in [
        ("pages_per_mb", pages_per_mb),
        ("drive_iops", drive_iops),
        ("dram_mb_cost", dram_mb_cost),
    ] {
        if !(v > 0.0) {
            return Err(ModelError::domain(name, "must be positive"));
        }
    }
    if !(drive_cost >= 0.0) {
        return Err(ModelError::domain("drive_cost", "must be non-negative"));
    }
    Ok(pages_per_mb / drive_iops * (drive_cost / dram_mb_cost))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::ssd_peak_iops;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn saving_rate_examples() {
        let cpu = saving_rate(&HostPlatform::cpu_ddr(), 103.0, 57.43e6, 512).unwrap();
        assert!(rel(cpu, 5.965e-6) < 1e-3, "{cpu}");
        let gpu = saving_rate(&HostPlatform::gpu_gddr(), 103.0, 57.43e6, 512).unwrap();
        assert!(rel(gpu, 2.557e-6) < 1e-3, "{gpu}");

        let free = HostPlatform {
            cost_core: 1e-300,
            dram_die_bandwidth: 1e300,
            ..HostPlatform::cpu_ddr()
        };
        let s = saving_rate(&free, 103.0, 1e6, 512).unwrap();
        assert!(rel(s, 103.0 / 1e6) < 1e-12);

        assert!(saving_rate(&HostPlatform::cpu_ddr(), 103.0, 0.0, 512).is_err());
    }

    #[test]
    fn rent_examples() {
        assert!(rel(dram_rent(&HostPlatform::cpu_ddr(), 512).unwrap(), 1.707e-7) < 1e-3);
        assert!(rel(dram_rent(&HostPlatform::gpu_gddr(), 512).unwrap(), 5.12e-7) < 1e-9);
        let whole = HostPlatform {
            dram_die_capacity: 4096.0,
            ..HostPlatform::gpu_gddr()
        };
        assert_eq!(dram_rent(&whole, 4096).unwrap(), 2.0);
    }

    #[test]
    fn break_even_examples() {
        let ssd = SsdConfig::preset("slc").unwrap();
        for (platform, block, expect, tol) in [
            (HostPlatform::cpu_ddr(), 512, 34.9, 0.01),
            (HostPlatform::cpu_ddr(), 4096, 10.7, 0.01),
            (HostPlatform::gpu_gddr(), 512, 5.0, 0.02),
        ] {
            let mix = WorkloadMix::new(9.0, 3.0, block);
            let peak = ssd_peak_iops(&ssd, &mix).unwrap();
            let be = break_even(&platform, &ssd, &mix, peak).unwrap();
            assert!(rel(be.total, expect) < tol, "{} {block}: {}", platform.label, be.total);
            assert_eq!(be.total, be.processor_term + be.dram_term + be.ssd_term);
        }
    }

    #[test]
    fn classical_examples() {
        let t = classical_break_even(128.0, 15.0, 2000.0, 5.0).unwrap();
        assert!(rel(t, 128.0 / 15.0 * 400.0) < 1e-12);
        assert_eq!(classical_break_even(128.0, f64::INFINITY, 2000.0, 5.0).unwrap(), 0.0);
        assert_eq!(classical_break_even(128.0, 15.0, 0.0, 5.0).unwrap(), 0.0);
    }

    #[test]
    fn platform_json() {
        let p = HostPlatform::from_json(r#"{"preset": "gpu-gddr", "iops_per_core": 5e6}"#, HostPlatform::cpu_ddr())
            .unwrap();
        assert_eq!(p.cost_dram_die, 2.0);
        assert_eq!(p.iops_per_core, 5e6);
        assert!(HostPlatform::from_json(r#"{"cost_core": -1}"#, HostPlatform::cpu_ddr()).is_err());
        assert!(HostPlatform::preset("tpu").is_err());
    }
}
