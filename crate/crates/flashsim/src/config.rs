use serde::{Deserialize, Serialize};
use tierline_core::device::{DeviceDoc, SsdConfig, WorkloadMix};
use tierline_core::units::{GIB, MS, NS, US};
use tierline_core::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Arrival {
    ClosedLoop,
    /// Open-loop arrivals at `rate` requests/s.
    Poisson { rate: f64 },
}

/// When a host write is reported complete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WriteAck {
    /// Once its data sits in the controller write buffer.
    Buffered,
    /// Once the page holding it is programmed.
    #[default]
    Programmed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GcConfig {
    /// GC starts on a plane when its free-block share falls below this.
    pub trigger_free_fraction: f64,
    /// Spare physical capacity as a fraction of the logical address space.
    pub over_provisioning: f64,
    pub pages_per_block: u32,
}

impl Default for GcConfig {
    fn default() -> Self {
        Self {
            trigger_free_fraction: 0.05,
            over_provisioning: 0.35,
            pages_per_block: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EccConfig {
    pub bch_fail_prob: f64,
    pub bch_decode_latency: f64,
    pub ldpc_base_latency: f64,
    pub ldpc_per_iteration_latency: f64,
    pub mean_iterations: f64,
    /// Sectors covered by one outer codeword.
    pub codeword_sectors: u32,
}

impl Default for EccConfig {
    fn default() -> Self {
        Self {
            bch_fail_prob: 0.0,
            bch_decode_latency: 200.0 * NS,
            ldpc_base_latency: 1.0 * US,
            ldpc_per_iteration_latency: 250.0 * NS,
            mean_iterations: 4.0,
            codeword_sectors: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub ssd: SsdConfig,
    pub mix: WorkloadMix,
    pub queue_count: u32,
    pub queue_depth: u32,
    pub arrival: Arrival,
    /// Logical bytes the workload addresses uniformly at random.
    pub address_space: u64,
    pub gc: GcConfig,
    pub ecc: EccConfig,
    /// Share of the command burst hidden behind other channel traffic by
    /// the short command/address protocol. Latency still sees the full burst.
    pub cmd_overlap: f64,
    /// Aggregate host link bandwidth, bytes/s.
    pub host_link_bandwidth: f64,
    /// Pages of write buffer per plane before host writes stall.
    pub write_buffer_pages_per_plane: u32,
    pub write_ack: WriteAck,
    /// A plane may start its next operation once a read's data is latched
    /// in its cache register, overlapping the transfer with the next sense.
    pub cache_read: bool,
    /// Host reads a plane may serve ahead of waiting background work
    /// (programs, GC reads) before it must yield once.
    pub read_bypass_limit: u32,
    pub warmup: f64,
    pub duration: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(ssd: SsdConfig, mix: WorkloadMix) -> Self {
        Self {
            ssd,
            mix,
            queue_count: 128,
            queue_depth: 32,
            arrival: Arrival::ClosedLoop,
            address_space: 4 * GIB,
            gc: GcConfig::default(),
            ecc: EccConfig::default(),
            cmd_overlap: 0.45,
            host_link_bandwidth: 128e9,
            write_buffer_pages_per_plane: 4,
            write_ack: WriteAck::Programmed,
            cache_read: true,
            read_bypass_limit: 64,
            warmup: 6.0 * MS,
            duration: 30.0 * MS,
            seed: 42,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.ssd.validate()?;
        self.mix.validate()?;
        let page = self.ssd.chip.page_size;
        let l = self.mix.block_size;
        if !(l <= page && page % l == 0 || l > page && l % page == 0) {
            return Err(ModelError::config(
                "block_size",
                format!("{l} B must divide or be a multiple of the {page} B page"),
            ));
        }
        if self.queue_count == 0 || self.queue_depth == 0 {
            return Err(ModelError::config("sim.queue_depth", "queue_count x queue_depth must be at least 1"));
        }
        if let Arrival::Poisson { rate } = self.arrival {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(ModelError::config("sim.arrival.rate", "must be positive"));
            }
        }
        if !(self.duration > 0.0) {
            return Err(ModelError::config("sim.duration", "must be positive"));
        }
        if !(self.warmup >= 0.0) {
            return Err(ModelError::config("sim.warmup", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.ecc.bch_fail_prob) {
            return Err(ModelError::config("sim.ecc.bch_fail_prob", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("sim.ecc.bch_decode_latency", self.ecc.bch_decode_latency),
            ("sim.ecc.ldpc_base_latency", self.ecc.ldpc_base_latency),
            ("sim.ecc.ldpc_per_iteration_latency", self.ecc.ldpc_per_iteration_latency),
            ("sim.ecc.mean_iterations", self.ecc.mean_iterations),
        ] {
            if !(v >= 0.0) {
                return Err(ModelError::config(name, "must be non-negative"));
            }
        }
        if self.ecc.codeword_sectors == 0 {
            return Err(ModelError::config("sim.ecc.codeword_sectors", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.cmd_overlap) {
            return Err(ModelError::config("sim.cmd_overlap", "must lie in [0, 1)"));
        }
        if !(self.host_link_bandwidth > 0.0) {
            return Err(ModelError::config("sim.host_link_bandwidth", "must be positive"));
        }
        if self.write_buffer_pages_per_plane == 0 {
            return Err(ModelError::config("sim.write_buffer_pages_per_plane", "must be positive"));
        }
        let gc = &self.gc;
        if !(gc.over_provisioning > 0.0) {
            return Err(ModelError::config("sim.gc.over_provisioning", "must be positive"));
        }
        if !(gc.trigger_free_fraction > 0.0 && gc.trigger_free_fraction < gc.over_provisioning) {
            return Err(ModelError::config(
                "sim.gc.trigger_free_fraction",
                "must be positive and below the over-provisioning share",
            ));
        }
        if gc.pages_per_block < 2 {
            return Err(ModelError::config("sim.gc.pages_per_block", "must be at least 2"));
        }
        if self.address_space < self.mix.block_size.max(page) {
            return Err(ModelError::config("sim.address_space", "smaller than one page"));
        }
        Ok(())
    }
}

/// The `sim` section of a JSON config. Durations in µs or ms as named.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    pub rw: Option<String>,
    pub write_amp: Option<f64>,
    pub block_size_b: Option<u64>,
    pub queue_count: Option<u32>,
    pub queue_depth: Option<u32>,
    pub arrival: Option<Arrival>,
    pub address_space_gib: Option<f64>,
    pub over_provisioning: Option<f64>,
    pub gc_trigger_free_fraction: Option<f64>,
    pub pages_per_block: Option<u32>,
    pub bch_fail_prob: Option<f64>,
    pub bch_decode_ns: Option<f64>,
    pub ldpc_base_ns: Option<f64>,
    pub ldpc_per_iteration_ns: Option<f64>,
    pub mean_iterations: Option<f64>,
    pub cmd_overlap: Option<f64>,
    pub host_link_gbps: Option<f64>,
    pub write_buffer_pages_per_plane: Option<u32>,
    pub write_ack: Option<WriteAck>,
    pub cache_read: Option<bool>,
    pub read_bypass_limit: Option<u32>,
    pub warmup_ms: Option<f64>,
    pub duration_ms: Option<f64>,
    pub seed: Option<u64>,
}

impl SimDoc {
    pub fn apply(&self, mut c: SimConfig) -> Result<SimConfig> {
        if let Some(v) = &self.rw {
            c.mix.read_write_ratio = WorkloadMix::parse_ratio(v).map_err(|e| e.within("sim"))?;
        }
        if let Some(v) = self.write_amp {
            c.mix.write_amp = v;
        }
        if let Some(v) = self.block_size_b {
            c.mix.block_size = v;
        }
        if let Some(v) = self.queue_count {
            c.queue_count = v;
        }
        if let Some(v) = self.queue_depth {
            c.queue_depth = v;
        }
        if let Some(v) = self.arrival {
            c.arrival = v;
        }
        if let Some(v) = self.address_space_gib {
            c.address_space = (v * GIB as f64) as u64;
        }
        if let Some(v) = self.over_provisioning {
            c.gc.over_provisioning = v;
        }
        if let Some(v) = self.gc_trigger_free_fraction {
            c.gc.trigger_free_fraction = v;
        }
        if let Some(v) = self.pages_per_block {
            c.gc.pages_per_block = v;
        }
        if let Some(v) = self.bch_fail_prob {
            c.ecc.bch_fail_prob = v;
        }
        if let Some(v) = self.bch_decode_ns {
            c.ecc.bch_decode_latency = v * NS;
        }
        if let Some(v) = self.ldpc_base_ns {
            c.ecc.ldpc_base_latency = v * NS;
        }
        if let Some(v) = self.ldpc_per_iteration_ns {
            c.ecc.ldpc_per_iteration_latency = v * NS;
        }
        if let Some(v) = self.mean_iterations {
            c.ecc.mean_iterations = v;
        }
        if let Some(v) = self.cmd_overlap {
            c.cmd_overlap = v;
        }
        if let Some(v) = self.host_link_gbps {
            c.host_link_bandwidth = v * 1e9;
        }
        if let Some(v) = self.write_buffer_pages_per_plane {
            c.write_buffer_pages_per_plane = v;
        }
        if let Some(v) = self.write_ack {
            c.write_ack = v;
        }
        if let Some(v) = self.cache_read {
            c.cache_read = v;
        }
        if let Some(v) = self.read_bypass_limit {
            c.read_bypass_limit = v;
        }
        if let Some(v) = self.warmup_ms {
            c.warmup = v * MS;
        }
        if let Some(v) = self.duration_ms {
            c.duration = v * MS;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parse a device document with an optional `sim` section on top of `base`.
pub fn load_sim_json(json: &str, base: SimConfig) -> Result<SimConfig> {
    let mut value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| ModelError::config("config", e.to_string()))?;
    let sim = value.as_object_mut().and_then(|o| o.remove("sim"));
    let device: DeviceDoc = serde_json::from_value(value).map_err(|e| ModelError::config("device", e.to_string()))?;
    let ssd = device.apply(base.ssd.clone())?;
    let doc: SimDoc = match sim {
        Some(v) => serde_json::from_value(v).map_err(|e| ModelError::config("sim", e.to_string()))?,
        None => SimDoc::default(),
    };
    doc.apply(SimConfig { ssd, ..base })
}
