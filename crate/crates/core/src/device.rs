//! First-principles SSD performance and cost model.
//!
//! Peak IOPS is the lesser of what the dies behind a channel can sense and
//! program and what the channel itself can move, scaled by the share of NAND
//! activity that serves host requests once garbage-collection traffic is
//! accounted for. Cost is normalized so that one NAND die costs 1.0.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::units::{GB, GIB, NS, SECTOR, US};

/// Largest block size at which a Normal (flat) SSD still scales IOPS.
pub const FLAT_IOPS_BLOCK: u64 = 4096;

/// Block sizes swept by the standard reports.
pub const STANDARD_BLOCK_SIZES: [u64; 4] = [512, 1024, 2048, 4096];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NandChipSpec {
    /// Array sense time for one page read, s.
    pub tau_sense: f64,
    /// Page program time, s.
    pub tau_prog: f64,
    /// Physical page size, bytes.
    pub page_size: u64,
    pub n_plane: u32,
    /// Die capacity, bytes.
    pub die_capacity: u64,
    pub label: String,
}

impl NandChipSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_sense > 0.0 && self.tau_sense.is_finite()) {
            return Err(ModelError::config("chip.tau_sense", "must be positive"));
        }
        if !(self.tau_prog > 0.0 && self.tau_prog.is_finite()) {
            return Err(ModelError::config("chip.tau_prog", "must be positive"));
        }
        if self.page_size < 512 || !self.page_size.is_power_of_two() {
            return Err(ModelError::config(
                "chip.page_size",
                format!("{} is not a power of two >= 512", self.page_size),
            ));
        }
        if self.n_plane == 0 {
            return Err(ModelError::config("chip.n_plane", "must be at least 1"));
        }
        if self.die_capacity == 0 {
            return Err(ModelError::config("chip.die_capacity", "must be positive"));
        }
        Ok(())
    }

    pub fn slc() -> Self {
        Self {
            tau_sense: 5.0 * US,
            tau_prog: 50.0 * US,
            page_size: 4096,
            n_plane: 6,
            die_capacity: 32 * GIB,
            label: "SLC".into(),
        }
    }

    pub fn pslc() -> Self {
        Self {
            tau_sense: 20.0 * US,
            tau_prog: 150.0 * US,
            page_size: 16384,
            n_plane: 4,
            die_capacity: 42 * GIB,
            label: "pSLC".into(),
        }
    }

    pub fn tlc() -> Self {
        Self {
            tau_sense: 40.0 * US,
            tau_prog: 1e-3,
            page_size: 16384,
            n_plane: 4,
            die_capacity: 128 * GIB,
            label: "TLC".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    /// Channel occupancy of one read or program command, s.
    pub tau_cmd: f64,
    /// Channel data bandwidth, bytes/s.
    pub bandwidth: f64,
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_cmd >= 0.0 && self.tau_cmd.is_finite()) {
            return Err(ModelError::config("channel.tau_cmd", "must be non-negative"));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(ModelError::config("channel.bandwidth", "must be positive"));
        }
        Ok(())
    }
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            tau_cmd: 150.0 * NS,
            bandwidth: 3.6 * GB,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IopsMode {
    /// Storage-Next: IOPS keeps rising as blocks shrink below 4KB.
    #[default]
    Scalable,
    /// Normal SSD: 4KB-granular ECC flattens IOPS for blocks <= 4KB.
    #[serde(rename = "flat_at_4k")]
    FlatAt4k,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsdConfig {
    pub chip: NandChipSpec,
    pub channel: ChannelSpec,
    pub n_channels: u32,
    pub dies_per_channel: u32,
    pub ftl_entry_bytes: u32,
    /// Capacity of one SSD-internal DRAM die, bytes.
    pub internal_dram_die_capacity: u64,
    pub cost_ctrl: f64,
    pub cost_nand_die: f64,
    pub cost_internal_dram_die: f64,
    pub iops_mode: IopsMode,
}

impl SsdConfig {
    /// Storage-Next style device with the shared controller and channel setup.
    pub fn with_chip(chip: NandChipSpec) -> Self {
        Self {
            chip,
            channel: ChannelSpec::default(),
            n_channels: 20,
            dies_per_channel: 4,
            ftl_entry_bytes: 4,
            internal_dram_die_capacity: 3_000_000_000,
            cost_ctrl: 15.0,
            cost_nand_die: 1.0,
            cost_internal_dram_die: 1.0,
            iops_mode: IopsMode::Scalable,
        }
    }

    /// Built-in presets: `slc`, `pslc`, `tlc`, each optionally suffixed with
    /// `-normal` for the flat-at-4KB variant.
    pub fn preset(name: &str) -> Result<Self> {
        let (base, mode) = match name.strip_suffix("-normal") {
            Some(b) => (b, IopsMode::FlatAt4k),
            None => (name, IopsMode::Scalable),
        };
        let chip = match base {
            "slc" => NandChipSpec::slc(),
            "pslc" => NandChipSpec::pslc(),
            "tlc" => NandChipSpec::tlc(),
            _ => {
                return Err(ModelError::config(
                    "preset",
                    format!("unknown preset `{name}` (expected slc, pslc, tlc, optionally with -normal)"),
                ))
            }
        };
        Ok(Self {
            iops_mode: mode,
            ..Self::with_chip(chip)
        })
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["slc", "pslc", "tlc", "slc-normal", "pslc-normal", "tlc-normal"]
    }

    pub fn validate(&self) -> Result<()> {
        self.chip.validate()?;
        self.channel.validate()?;
        if self.n_channels == 0 {
            return Err(ModelError::config("n_channels", "must be at least 1"));
        }
        if self.dies_per_channel == 0 {
            return Err(ModelError::config("dies_per_channel", "must be at least 1"));
        }
        if !(4..=8).contains(&self.ftl_entry_bytes) {
            return Err(ModelError::config(
                "ftl_entry_bytes",
                format!("{} not in [4, 8]", self.ftl_entry_bytes),
            ));
        }
        if self.internal_dram_die_capacity == 0 {
            return Err(ModelError::config("internal_dram_die_capacity", "must be positive"));
        }
        for (name, v) in [
            ("cost_ctrl", self.cost_ctrl),
            ("cost_nand_die", self.cost_nand_die),
            ("cost_internal_dram_die", self.cost_internal_dram_die),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ModelError::config(name, "cost must be non-negative"));
            }
        }
        Ok(())
    }

    pub fn total_dies(&self) -> u64 {
        self.n_channels as u64 * self.dies_per_channel as u64
    }

    pub fn total_planes(&self) -> u64 {
        self.total_dies() * self.chip.n_plane as u64
    }

    /// Raw NAND capacity, bytes.
    pub fn raw_capacity(&self) -> u64 {
        self.total_dies() * self.chip.die_capacity
    }
}

/// Host read:write mix, write amplification and access granularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadMix {
    /// Reads per write; `f64::INFINITY` means read-only.
    pub read_write_ratio: f64,
    pub write_amp: f64,
    pub block_size: u64,
}

impl WorkloadMix {
    pub fn new(read_write_ratio: f64, write_amp: f64, block_size: u64) -> Self {
        Self {
            read_write_ratio,
            write_amp,
            block_size,
        }
    }

    pub fn read_only(block_size: u64) -> Self {
        Self::new(f64::INFINITY, 1.0, block_size)
    }

    /// Parse `"90:10"` style ratios; `"100:0"` is read-only.
    pub fn parse_ratio(s: &str) -> Result<f64> {
        let bad = || ModelError::config("read_write_ratio", format!("`{s}` is not of the form R:W"));
        let (r, w) = s.split_once(':').ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let w: f64 = w.trim().parse().map_err(|_| bad())?;
        if r < 0.0 || w < 0.0 || (r == 0.0 && w == 0.0) || !r.is_finite() || !w.is_finite() {
            return Err(bad());
        }
        Ok(if w == 0.0 { f64::INFINITY } else { r / w })
    }

    /// Fraction of host requests that are reads.
    pub fn host_read_fraction(&self) -> f64 {
        if self.read_write_ratio.is_infinite() {
            1.0
        } else {
            self.read_write_ratio / (self.read_write_ratio + 1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.read_write_ratio.is_nan() || self.read_write_ratio < 0.0 {
            return Err(ModelError::config("read_write_ratio", "must be >= 0 or infinite"));
        }
        if !(self.write_amp >= 1.0 && self.write_amp.is_finite()) {
            return Err(ModelError::config("write_amp", format!("{} < 1", self.write_amp)));
        }
        if self.block_size == 0 || self.block_size % SECTOR != 0 {
            return Err(ModelError::config(
                "block_size",
                format!("{} is not a positive multiple of 512", self.block_size),
            ));
        }
        Ok(())
    }

    fn at_block(self, block_size: u64) -> Self {
        Self { block_size, ..self }
    }
}

/// Share of NAND operations that are reads and programs, `(r_read, r_write)`.
pub fn nand_read_write_fractions(mix: &WorkloadMix) -> (f64, f64) {
    let g = mix.read_write_ratio;
    let phi = mix.write_amp;
    if g.is_infinite() {
        return (1.0, 0.0);
    }
    let denom = g + 2.0 * phi - 1.0;
    ((g + phi - 1.0) / denom, phi / denom)
}

/// Share of NAND throughput that reaches the host.
fn host_share(mix: &WorkloadMix) -> f64 {
    let g = mix.read_write_ratio;
    if g.is_infinite() {
        1.0
    } else {
        (g + 1.0) / (g + 2.0 * mix.write_amp - 1.0)
    }
}

fn check_block_fits(chip: &NandChipSpec, mix: &WorkloadMix) -> Result<()> {
    let bound = chip.page_size * chip.n_plane as u64;
    if mix.block_size > bound {
        return Err(ModelError::config(
            "block_size",
            format!("{} exceeds page_size x n_plane = {bound}", mix.block_size),
        ));
    }
    Ok(())
}

/// Peak IOPS a single die can sustain for the mix.
pub fn nand_die_peak_iops(chip: &NandChipSpec, mix: &WorkloadMix) -> Result<f64> {
    chip.validate()?;
    mix.validate()?;
    check_block_fits(chip, mix)?;
    let (r_read, r_write) = nand_read_write_fractions(mix);
    let planes = chip.n_plane as f64;
    let l_blk = mix.block_size as f64;
    let senses_per_block = mix.block_size.div_ceil(chip.page_size) as f64;
    let read = planes / (chip.tau_sense * senses_per_block);
    let write = planes * chip.page_size as f64 / (chip.tau_prog * l_blk);
    Ok(r_read * read + r_write * write)
}

/// Peak IOPS one channel can move for the mix.
pub fn channel_peak_iops(chip: &NandChipSpec, channel: &ChannelSpec, mix: &WorkloadMix) -> Result<f64> {
    chip.validate()?;
    channel.validate()?;
    mix.validate()?;
    let (r_read, r_write) = nand_read_write_fractions(mix);
    let l_blk = mix.block_size as f64;
    let transfer = l_blk / channel.bandwidth;
    let read = 1.0 / (channel.tau_cmd + transfer);
    let write = 1.0 / (l_blk / chip.page_size as f64 * channel.tau_cmd + transfer);
    Ok(r_read * read + r_write * write)
}

/// Which side of the min in the peak-IOPS formula binds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PeakLimiter {
    Die,
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakIops {
    pub iops: f64,
    /// Block size the formula was evaluated at (differs from the request in flat mode).
    pub evaluated_block: u64,
    pub die_iops: f64,
    pub channel_iops: f64,
    pub limiter: PeakLimiter,
}

pub fn ssd_peak_breakdown(ssd: &SsdConfig, mix: &WorkloadMix) -> Result<PeakIops> {
    ssd.validate()?;
    mix.validate()?;
    let block = match ssd.iops_mode {
        IopsMode::FlatAt4k if mix.block_size < FLAT_IOPS_BLOCK => FLAT_IOPS_BLOCK,
        _ => mix.block_size,
    };
    let eval = mix.at_block(block);
    let die_iops = nand_die_peak_iops(&ssd.chip, &eval)?;
    let channel_iops = channel_peak_iops(&ssd.chip, &ssd.channel, &eval)?;
    let per_channel_dies = ssd.dies_per_channel as f64 * die_iops;
    let (bound, limiter) = if per_channel_dies <= channel_iops {
        (per_channel_dies, PeakLimiter::Die)
    } else {
        (channel_iops, PeakLimiter::Channel)
    };
    Ok(PeakIops {
        iops: host_share(&eval) * ssd.n_channels as f64 * bound,
        evaluated_block: block,
        die_iops,
        channel_iops,
        limiter,
    })
}

/// Peak host-visible random IOPS of the SSD.
pub fn ssd_peak_iops(ssd: &SsdConfig, mix: &WorkloadMix) -> Result<f64> {
    ssd_peak_breakdown(ssd, mix).map(|p| p.iops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsdCost {
    /// Normalized cost (one NAND die = 1.0).
    pub total: f64,
    /// Worst-case FTL mapping table size, bytes.
    pub ftl_bytes: u64,
    pub internal_dram_dies: u64,
}

pub fn ssd_cost(ssd: &SsdConfig) -> Result<SsdCost> {
    ssd.validate()?;
    let raw = ssd.total_dies() as u128 * ssd.chip.die_capacity as u128;
    let ftl = raw * ssd.ftl_entry_bytes as u128 / SECTOR as u128;
    let dies = ftl.div_ceil(ssd.internal_dram_die_capacity as u128);
    let total = ssd.cost_ctrl
        + ssd.total_dies() as f64 * ssd.cost_nand_die
        + dies as f64 * ssd.cost_internal_dram_die;
    Ok(SsdCost {
        total,
        ftl_bytes: ftl as u64,
        internal_dram_dies: dies as u64,
    })
}

/// JSON device description. Times in ns, bandwidth in GB/s, die capacity in
/// GiB (NAND densities are binary) and internal DRAM die capacity in GB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_sense_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_prog_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_size_b: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_plane: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub die_capacity_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_cmd_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_bw_gbps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_channels: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dies_per_channel: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ftl_entry_bytes: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub internal_dram_die_gb: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_ctrl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_internal_dram_die: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iops_mode: Option<IopsMode>,
}

impl DeviceDoc {
    /// Layer the document's fields over `base`.
    pub fn apply(&self, base: SsdConfig) -> Result<SsdConfig> {
        let mut ssd = match &self.preset {
            Some(name) => SsdConfig::preset(name)?,
            None => base,
        };
        if let Some(v) = &self.label {
            ssd.chip.label = v.clone();
        }
        if let Some(v) = self.tau_sense_ns {
            ssd.chip.tau_sense = v * NS;
        }
        if let Some(v) = self.tau_prog_ns {
            ssd.chip.tau_prog = v * NS;
        }
        if let Some(v) = self.page_size_b {
            ssd.chip.page_size = v;
        }
        if let Some(v) = self.n_plane {
            ssd.chip.n_plane = v;
        }
        if let Some(v) = self.die_capacity_gb {
            ssd.chip.die_capacity = (v * GIB as f64).round() as u64;
        }
        if let Some(v) = self.tau_cmd_ns {
            ssd.channel.tau_cmd = v * NS;
        }
        if let Some(v) = self.channel_bw_gbps {
            ssd.channel.bandwidth = v * GB;
        }
        if let Some(v) = self.n_channels {
            ssd.n_channels = v;
        }
        if let Some(v) = self.dies_per_channel {
            ssd.dies_per_channel = v;
        }
        if let Some(v) = self.ftl_entry_bytes {
            ssd.ftl_entry_bytes = v;
        }
        if let Some(v) = self.internal_dram_die_gb {
            ssd.internal_dram_die_capacity = (v * GB).round() as u64;
        }
        if let Some(v) = self.cost_ctrl {
            ssd.cost_ctrl = v;
        }
        if let Some(v) = self.cost_internal_dram_die {
            ssd.cost_internal_dram_die = v;
        }
        if let Some(v) = self.iops_mode {
            ssd.iops_mode = v;
        }
        ssd.validate()?;
        Ok(ssd)
    }

    /// Full description of an existing configuration.
    pub fn from_config(ssd: &SsdConfig) -> Self {
        Self {
            preset: None,
            label: Some(ssd.chip.label.clone()),
            tau_sense_ns: Some(ssd.chip.tau_sense / NS),
            tau_prog_ns: Some(ssd.chip.tau_prog / NS),
            page_size_b: Some(ssd.chip.page_size),
            n_plane: Some(ssd.chip.n_plane),
            die_capacity_gb: Some(ssd.chip.die_capacity as f64 / GIB as f64),
            tau_cmd_ns: Some(ssd.channel.tau_cmd / NS),
            channel_bw_gbps: Some(ssd.channel.bandwidth / GB),
            n_channels: Some(ssd.n_channels),
            dies_per_channel: Some(ssd.dies_per_channel),
            ftl_entry_bytes: Some(ssd.ftl_entry_bytes),
            internal_dram_die_gb: Some(ssd.internal_dram_die_capacity as f64 / GB),
            cost_ctrl: Some(ssd.cost_ctrl),
            cost_internal_dram_die: Some(ssd.cost_internal_dram_die),
            iops_mode: Some(ssd.iops_mode),
        }
    }
}

/// Parse a JSON device document; fields absent from the document keep the
/// values of `base` (or of the document's own `preset`).
pub fn load_device_json(json: &str, base: SsdConfig) -> Result<SsdConfig> {
    let doc: DeviceDoc =
        serde_json::from_str(json).map_err(|e| ModelError::config("device", e.to_string()))?;
    doc.apply(base)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mix(g: f64, phi: f64, l: u64) -> WorkloadMix {
        WorkloadMix::new(g, phi, l)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn fractions_examples() {
        let (r, w) = nand_read_write_fractions(&mix(9.0, 3.0, 512));
        assert!((r - 11.0 / 14.0).abs() < 1e-12);
        assert!((w - 3.0 / 14.0).abs() < 1e-12);
        assert_eq!(nand_read_write_fractions(&mix(f64::INFINITY, 5.0, 512)), (1.0, 0.0));
        assert_eq!(nand_read_write_fractions(&mix(1.0, 1.0, 512)), (0.5, 0.5));
    }

    #[test]
    fn die_iops_examples() {
        let slc = nand_die_peak_iops(&NandChipSpec::slc(), &mix(9.0, 3.0, 512)).unwrap();
        let oracle = 11.0 / 14.0 * 6.0 / 5e-6 + 3.0 / 14.0 * 6.0 * 4096.0 / (50e-6 * 512.0);
        assert!(rel(slc, oracle) < 1e-12);
        assert!(rel(slc, 1.1486e6) < 1e-4);

        let tlc = nand_die_peak_iops(&NandChipSpec::tlc(), &mix(9.0, 3.0, 4096)).unwrap();
        assert!(rel(tlc, 82.0e3) < 1e-3, "{tlc}");

        let ro = nand_die_peak_iops(&NandChipSpec::pslc(), &WorkloadMix::read_only(2048)).unwrap();
        assert!(rel(ro, 4.0 / 20e-6) < 1e-12);
    }

    #[test]
    fn oversized_block_rejected() {
        let err = nand_die_peak_iops(&NandChipSpec::slc(), &mix(9.0, 3.0, 4096 * 7)).unwrap_err();
        assert_eq!(err.param(), "block_size");
    }

    #[test]
    fn channel_iops_examples() {
        let ch = ChannelSpec::default();
        let v = channel_peak_iops(&NandChipSpec::slc(), &ch, &mix(9.0, 3.0, 512)).unwrap();
        assert!(rel(v, 4.020e6) < 1e-3, "{v}");

        // l_blk == l_PG: read and write terms coincide.
        let a = channel_peak_iops(&NandChipSpec::slc(), &ch, &mix(9.0, 3.0, 4096)).unwrap();
        assert!(rel(a, 1.0 / (150e-9 + 4096.0 / 3.6e9)) < 1e-12);

        let free = ChannelSpec {
            tau_cmd: 0.0,
            bandwidth: 3.6e9,
        };
        let bw = channel_peak_iops(&NandChipSpec::slc(), &free, &WorkloadMix::read_only(1024)).unwrap();
        assert!(rel(bw, 3.6e9 / 1024.0) < 1e-12);
    }

    #[test]
    fn ssd_peak_examples() {
        let slc = SsdConfig::preset("slc").unwrap();
        let small = ssd_peak_iops(&slc, &mix(9.0, 3.0, 512)).unwrap();
        assert!(rel(small, 57.43e6) < 1e-3, "{small}");
        let big = ssd_peak_iops(&slc, &mix(9.0, 3.0, 4096)).unwrap();
        assert!(rel(big, 11.09e6) < 1e-3, "{big}");

        let normal = SsdConfig::preset("slc-normal").unwrap();
        let flat = ssd_peak_iops(&normal, &mix(9.0, 3.0, 512)).unwrap();
        assert_eq!(flat, big);

        let tlc = ssd_peak_breakdown(&SsdConfig::preset("tlc").unwrap(), &mix(9.0, 3.0, 4096)).unwrap();
        assert_eq!(tlc.limiter, PeakLimiter::Die);
        assert!(rel(tlc.iops, 4.69e6) < 1e-2);
    }

    #[test]
    fn cost_examples() {
        let slc = SsdConfig::preset("slc").unwrap();
        let c = ssd_cost(&slc).unwrap();
        assert!((c.ftl_bytes as f64 / 1e9 - 21.47).abs() < 0.01);
        assert_eq!(c.internal_dram_dies, 8);
        assert_eq!(c.total, 103.0);

        let wide = SsdConfig {
            ftl_entry_bytes: 8,
            ..slc.clone()
        };
        let c = ssd_cost(&wide).unwrap();
        assert_eq!(c.internal_dram_dies, 15);
        assert_eq!(c.total, 110.0);

        let tiny = SsdConfig {
            n_channels: 1,
            dies_per_channel: 1,
            ..slc
        };
        assert_eq!(ssd_cost(&tiny).unwrap().internal_dram_dies, 1);
    }

    #[test]
    fn parse_ratio_forms() {
        assert_eq!(WorkloadMix::parse_ratio("90:10").unwrap(), 9.0);
        assert!(WorkloadMix::parse_ratio("100:0").unwrap().is_infinite());
        assert_eq!(WorkloadMix::parse_ratio("0:100").unwrap(), 0.0);
        assert!(WorkloadMix::parse_ratio("90").is_err());
        assert!(WorkloadMix::parse_ratio("0:0").is_err());
    }

    #[test]
    fn block_size_validation() {
        let slc = SsdConfig::preset("slc").unwrap();
        let err = ssd_peak_iops(&slc, &mix(9.0, 3.0, 99)).unwrap_err();
        assert_eq!(err.param(), "block_size");
        assert!(ssd_peak_iops(&slc, &mix(9.0, 3.0, 1536)).is_ok());
    }

    #[test]
    fn json_roundtrip_and_layering() {
        let slc = SsdConfig::preset("slc").unwrap();
        let doc = serde_json::to_string(&DeviceDoc::from_config(&slc)).unwrap();
        let back = load_device_json(&doc, SsdConfig::preset("tlc").unwrap()).unwrap();
        assert_eq!(back, slc);

        let tweaked = load_device_json(
            r#"{"preset": "pslc", "channel_bw_gbps": 4.8, "iops_mode": "flat_at_4k"}"#,
            slc.clone(),
        )
        .unwrap();
        assert_eq!(tweaked.chip, NandChipSpec::pslc());
        assert_eq!(tweaked.channel.bandwidth, 4.8e9);
        assert_eq!(tweaked.iops_mode, IopsMode::FlatAt4k);

        assert!(load_device_json(r#"{"n_plane": 0}"#, slc.clone()).is_err());
        assert!(load_device_json(r#"{"bogus": 1}"#, slc).is_err());
    }
}
