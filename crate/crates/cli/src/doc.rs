//! Layered JSON configuration: built-in preset, then a file, then
//! command-line overrides, each addressed by `section.key` paths.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{Map, Value};
use tierline_core::cases::{AnnConfig, Host, KvConfig};
use tierline_core::device::{DeviceDoc, IopsMode, SsdConfig, WorkloadMix};
use tierline_core::econ::{HostPlatform, PlatformDoc};
use tierline_core::feasibility::LatencyTargets;
use tierline_core::profile::AccessProfile;
use tierline_core::units::{GB, MB, US};
use tierline_flashsim::{SimConfig, SimDoc};

use crate::error::CliError;

/// Top-level sections and the keys each accepts.
pub const SECTIONS: &[(&str, &[&str])] = &[
    (
        "ssd",
        &[
            "preset",
            "label",
            "tau_sense_ns",
            "tau_prog_ns",
            "page_size_b",
            "n_plane",
            "die_capacity_gb",
            "tau_cmd_ns",
            "channel_bw_gbps",
            "n_channels",
            "dies_per_channel",
            "ftl_entry_bytes",
            "internal_dram_die_gb",
            "cost_ctrl",
            "cost_internal_dram_die",
            "iops_mode",
        ],
    ),
    ("workload", &["rw", "write_amp", "block_size_b"]),
    (
        "platform",
        &["preset", "label", "cost_core", "iops_per_core", "cost_dram_die", "dram_die_bw_gbps", "dram_die_gb"],
    ),
    ("host", &["iops_budget", "n_ssd", "dram_bw_gbps", "dram_capacity_gb"]),
    ("latency", &["tier", "tail_percentile", "tail_us", "mean_us"]),
    (
        "profile",
        &["n_blocks", "workload_blocks", "sigma", "throughput_gbps", "bins", "seed", "csv"],
    ),
    (
        "sim",
        &[
            "rw",
            "write_amp",
            "block_size_b",
            "queue_count",
            "queue_depth",
            "arrival",
            "address_space_gib",
            "over_provisioning",
            "gc_trigger_free_fraction",
            "pages_per_block",
            "bch_fail_prob",
            "bch_decode_ns",
            "ldpc_base_ns",
            "ldpc_per_iteration_ns",
            "mean_iterations",
            "cmd_overlap",
            "host_link_gbps",
            "write_buffer_pages_per_plane",
            "write_ack",
            "cache_read",
            "read_bypass_limit",
            "warmup_ms",
            "duration_ms",
            "seed",
        ],
    ),
    (
        "kv",
        &[
            "n_items",
            "item_size_b",
            "load_factor",
            "bucket_b",
            "dram_gb",
            "get_put",
            "insert_fraction_of_puts",
            "sigma",
            "ssd_util_cap",
            "wal_window_mb",
        ],
    ),
    (
        "ann",
        &[
            "n_vectors",
            "reduced_size_b",
            "full_size_b",
            "promotion_fraction",
            "reduced_reads_per_query",
            "full_read_block_b",
            "dram_gb",
            "node_sigma",
            "ssd_util_cap",
        ],
    ),
];

/// A configuration document under construction.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Doc {
    root: Map<String, Value>,
}

fn split_path(path: &str) -> Result<(&str, &str), CliError> {
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| CliError::input(path, "parameter paths have the form section.key"))?;
    let keys = SECTIONS
        .iter()
        .find(|(s, _)| *s == section)
        .map(|(_, k)| *k)
        .ok_or_else(|| CliError::input(path, format!("unknown section `{section}`")))?;
    if !keys.contains(&key) {
        return Err(CliError::input(path, format!("unknown key `{key}` in section `{section}`")));
    }
    Ok((section, key))
}

/// Command-line values are JSON when they parse as JSON, strings otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

impl Doc {
    pub fn new() -> Self {
        Self::default()
    }

    /// Merge a JSON document over this one, section by section.
    pub fn merge_json(&mut self, text: &str, origin: &str) -> Result<(), CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::input(origin, format!("not valid JSON: {e}")))?;
        let Value::Object(sections) = value else {
            return Err(CliError::input(origin, "top level must be an object of sections"));
        };
        for (section, body) in sections {
            let Value::Object(keys) = body else {
                return Err(CliError::input(&section, "section must be an object"));
            };
            for (key, v) in keys {
                self.set(&format!("{section}.{key}"), v)?;
            }
        }
        Ok(())
    }

    pub fn set(&mut self, path: &str, value: Value) -> Result<(), CliError> {
        let (section, key) = split_path(path)?;
        let entry = self
            .root
            .entry(section.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
        if let Value::Object(m) = entry {
            m.insert(key.to_string(), value);
        }
        Ok(())
    }

    /// Apply a `section.key=value` override.
    pub fn set_raw(&mut self, assignment: &str) -> Result<(), CliError> {
        let (path, raw) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::input(assignment, "overrides have the form section.key=value"))?;
        self.set(path.trim(), parse_value(raw.trim()))
    }

    pub fn get(&self, path: &str) -> Option<&Value> {
        let (section, key) = path.split_once('.')?;
        self.root.get(section)?.get(key)
    }

    fn section<T: DeserializeOwned + Default>(&self, name: &str) -> Result<T, CliError> {
        match self.root.get(name) {
            None => Ok(T::default()),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::input(name, e.to_string())),
        }
    }

    fn str_or(&self, path: &str, default: &str) -> Result<String, CliError> {
        match self.get(path) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(other) => Err(CliError::input(path, format!("expected a string, got {other}"))),
        }
    }

    pub fn ssd(&self) -> Result<SsdConfig, CliError> {
        let doc: DeviceDoc = match self.root.get("ssd") {
            None => serde_json::from_value(Value::Object(Map::new())).expect("empty device document"),
            Some(v) => serde_json::from_value(v.clone()).map_err(|e| CliError::input("ssd", e.to_string()))?,
        };
        let base = SsdConfig::preset("slc")?;
        doc.apply(base).map_err(|e| CliError::from(e.within("ssd")))
    }

    /// Name of the SSD for report columns.
    pub fn ssd_name(&self) -> String {
        match (self.get("ssd.preset"), self.get("ssd.label")) {
            (_, Some(Value::String(l))) => l.clone(),
            (Some(Value::String(p)), _) => p.clone(),
            _ => "slc".into(),
        }
    }

    pub fn mix(&self) -> Result<WorkloadMix, CliError> {
        let w: WorkloadDoc = self.section("workload")?;
        let ratio = WorkloadMix::parse_ratio(w.rw.as_deref().unwrap_or("90:10"))
            .map_err(|e| CliError::from(e.within("workload")))?;
        let waf = if ratio.is_infinite() { 1.0 } else { w.write_amp.unwrap_or(3.0) };
        let mix = WorkloadMix::new(ratio, waf, w.block_size_b.unwrap_or(512));
        mix.validate().map_err(|e| CliError::from(e.within("workload")))?;
        Ok(mix)
    }

    pub fn rw_label(&self) -> Result<String, CliError> {
        self.str_or("workload.rw", "90:10")
    }

    pub fn platform(&self) -> Result<HostPlatform, CliError> {
        let doc: PlatformDoc = self.section("platform")?;
        doc.apply(HostPlatform::cpu_ddr()).map_err(|e| CliError::from(e.within("platform")))
    }

    /// Host budgets; unset keys fall back to the platform's usual pairing
    /// (100M IOPS and 540 GB/s for CPU+DDR, 400M and 640 GB/s for GPU+GDDR)
    /// when `defaults` is set, and to an unbounded budget otherwise.
    pub fn host(&self, defaults: bool) -> Result<HostSettings, CliError> {
        let h: HostDoc = self.section("host")?;
        let platform = self.platform()?;
        let gpu = self.get("platform.preset") == Some(&Value::String("gpu-gddr".into()));
        let preset = if gpu { Host::gpu() } else { Host::cpu() };
        let n_ssd = h.n_ssd.unwrap_or(4);
        if n_ssd == 0 {
            return Err(CliError::input("host.n_ssd", "must be at least 1"));
        }
        let iops_budget = match h.iops_budget {
            Some(v) => v,
            None if defaults => preset.iops_budget,
            None => f64::INFINITY,
        };
        let dram_bandwidth = match h.dram_bw_gbps {
            Some(v) => v * GB,
            None if defaults => preset.dram_bandwidth,
            None => f64::INFINITY,
        };
        if !(iops_budget > 0.0) {
            return Err(CliError::input("host.iops_budget", "must be positive"));
        }
        if !(dram_bandwidth > 0.0) {
            return Err(CliError::input("host.dram_bw_gbps", "must be positive"));
        }
        let dram_capacity = match h.dram_capacity_gb {
            Some(v) if !(v >= 0.0) => return Err(CliError::input("host.dram_capacity_gb", "must be non-negative")),
            v => v.map(|g| g * GB),
        };
        Ok(HostSettings {
            host: Host {
                platform,
                iops_budget,
                dram_bandwidth,
            },
            n_ssd,
            dram_capacity,
        })
    }

    pub fn targets(&self, block_size: u64) -> Result<LatencyTargets, CliError> {
        let l: LatencyDoc = self.section("latency")?;
        let mut t = match &l.tier {
            Some(name) => LatencyTargets::tier(name, block_size).map_err(|e| CliError::from(e.within("latency")))?,
            None => LatencyTargets::none(),
        };
        if let Some(p) = l.tail_percentile {
            t.tail_percentile = p;
        }
        if let Some(v) = l.tail_us {
            t.tail_target = Some(v * US);
        }
        if let Some(v) = l.mean_us {
            t.mean_target = Some(v * US);
        }
        t.validate().map_err(|e| CliError::from(e.within("latency")))?;
        Ok(t)
    }

    pub fn latency_label(&self) -> String {
        match (self.get("latency.tier"), self.get("latency.tail_us"), self.get("latency.mean_us")) {
            (Some(Value::String(t)), None, None) => t.clone(),
            (None, None, None) => "none".into(),
            _ => "custom".into(),
        }
    }

    /// Generated (or loaded) profile and the factor by which it is smaller
    /// than the workload it stands for.
    pub fn profile(&self, block_size: u64, seed: u64) -> Result<(AccessProfile, f64), CliError> {
        let p: ProfileDoc = self.section("profile")?;
        if let Some(path) = &p.csv {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::input("profile.csv", format!("cannot read {path}: {e}")))?;
            let prof = AccessProfile::from_csv(block_size, &text).map_err(|e| CliError::from(e.within("profile")))?;
            let scale = match p.workload_blocks {
                Some(w) => prof.n_blocks() as f64 / w,
                None => 1.0,
            };
            return Ok((prof, scale));
        }
        let n = p.n_blocks.unwrap_or(1e6);
        if !(n >= 1.0 && n.fract() == 0.0) {
            return Err(CliError::input("profile.n_blocks", "must be a positive whole number"));
        }
        let workload = p.workload_blocks.unwrap_or(n);
        if !(workload >= n) {
            return Err(CliError::input("profile.workload_blocks", "must be at least n_blocks"));
        }
        let scale = n / workload;
        let throughput = p.throughput_gbps.unwrap_or(200.0) * GB * scale;
        let bins = p.bins.unwrap_or(tierline_core::profile::DEFAULT_BINS);
        let prof = AccessProfile::lognormal_with_bins(
            n as u64,
            p.sigma.unwrap_or(0.4),
            throughput,
            block_size,
            p.seed.unwrap_or(seed),
            bins,
        )
        .map_err(|e| CliError::from(e.within("profile")))?;
        Ok((prof, scale))
    }

    pub fn sim(&self, seed: u64) -> Result<SimConfig, CliError> {
        let doc: SimDoc = self.section("sim")?;
        let mut base = SimConfig::new(self.ssd()?, self.mix()?);
        base.seed = seed;
        doc.apply(base).map_err(CliError::from)
    }

    pub fn kv(&self) -> Result<(KvConfig, String), CliError> {
        let d: KvDoc = self.section("kv")?;
        let ssd = self.ssd()?;
        let hs = self.host(true)?;
        let bucket = d.bucket_b.unwrap_or(match ssd.iops_mode {
            IopsMode::Scalable => 512,
            IopsMode::FlatAt4k => 4096,
        });
        let mut c = KvConfig::new(hs.host, ssd, bucket);
        c.n_ssd = hs.n_ssd;
        let ratio = d.get_put.clone().unwrap_or_else(|| "100:0".into());
        let (g, p) = ratio_parts(&ratio).ok_or_else(|| CliError::input("kv.get_put", format!("`{ratio}` is not G:P")))?;
        c.get_fraction = g / (g + p);
        if let Some(v) = d.n_items {
            c.n_items = v;
        }
        if let Some(v) = d.item_size_b {
            c.item_size = v;
        }
        if let Some(v) = d.load_factor {
            c.load_factor = v;
        }
        if let Some(v) = d.dram_gb {
            c.dram_capacity = v * GB;
        }
        if let Some(v) = d.insert_fraction_of_puts {
            c.insert_fraction_of_puts = v;
        }
        if let Some(v) = d.sigma {
            c.locality_sigma = v;
        }
        if let Some(v) = d.ssd_util_cap {
            c.ssd_util_cap = v;
        }
        if let Some(v) = d.wal_window_mb {
            c.wal_window_bytes = v * MB;
        }
        if let Some(v) = self.get("workload.write_amp").and_then(Value::as_f64) {
            c.write_amp = v;
        }
        c.validate().map_err(|e| CliError::from(e.within("kv")))?;
        Ok((c, ratio))
    }

    pub fn ann(&self) -> Result<AnnConfig, CliError> {
        let d: AnnDoc = self.section("ann")?;
        let hs = self.host(true)?;
        let full = d.full_size_b.unwrap_or(2048);
        let mut c = AnnConfig::new(hs.host, self.ssd()?, full);
        c.n_ssd = hs.n_ssd;
        if let Some(v) = d.n_vectors {
            c.n_vectors = v;
        }
        if let Some(v) = d.reduced_size_b {
            c.reduced_size = v;
        }
        if let Some(v) = d.promotion_fraction {
            c.promotion_fraction = v;
        }
        if let Some(v) = d.reduced_reads_per_query {
            c.reduced_reads_per_query = v;
        }
        if let Some(v) = d.full_read_block_b {
            c.full_read_block = v;
        }
        if let Some(v) = d.dram_gb {
            c.dram_capacity = v * GB;
        }
        if let Some(v) = d.node_sigma {
            c.node_sigma = v;
        }
        if let Some(v) = d.ssd_util_cap {
            c.ssd_util_cap = v;
        }
        c.validate().map_err(|e| CliError::from(e.within("ann")))?;
        Ok(c)
    }
}

fn ratio_parts(s: &str) -> Option<(f64, f64)> {
    let (a, b) = s.split_once(':')?;
    let a: f64 = a.trim().parse().ok()?;
    let b: f64 = b.trim().parse().ok()?;
    (a >= 0.0 && b >= 0.0 && a + b > 0.0).then_some((a, b))
}

pub struct HostSettings {
    pub host: Host,
    pub n_ssd: u32,
    pub dram_capacity: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct WorkloadDoc {
    rw: Option<String>,
    write_amp: Option<f64>,
    block_size_b: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct HostDoc {
    iops_budget: Option<f64>,
    n_ssd: Option<u32>,
    dram_bw_gbps: Option<f64>,
    dram_capacity_gb: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatencyDoc {
    tier: Option<String>,
    tail_percentile: Option<f64>,
    tail_us: Option<f64>,
    mean_us: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    n_blocks: Option<f64>,
    /// Blocks in the full workload the generated profile stands for.
    workload_blocks: Option<f64>,
    sigma: Option<f64>,
    /// Throughput of the full workload.
    throughput_gbps: Option<f64>,
    bins: Option<usize>,
    seed: Option<u64>,
    csv: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct KvDoc {
    n_items: Option<f64>,
    item_size_b: Option<u64>,
    load_factor: Option<f64>,
    bucket_b: Option<u64>,
    dram_gb: Option<f64>,
    get_put: Option<String>,
    insert_fraction_of_puts: Option<f64>,
    sigma: Option<f64>,
    ssd_util_cap: Option<f64>,
    wal_window_mb: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnDoc {
    n_vectors: Option<f64>,
    reduced_size_b: Option<u64>,
    full_size_b: Option<u64>,
    promotion_fraction: Option<f64>,
    reduced_reads_per_query: Option<f64>,
    full_read_block_b: Option<u64>,
    dram_gb: Option<f64>,
    node_sigma: Option<f64>,
    ssd_util_cap: Option<f64>,
}

/// One sweep axis, `section.key=v1,v2,...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

impl Axis {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (path, list) = spec
            .split_once('=')
            .ok_or_else(|| CliError::input(spec, "sweeps have the form section.key=v1,v2,..."))?;
        let path = path.trim();
        split_path(path)?;
        let values: Vec<Value> = list.split(',').map(|v| parse_value(v.trim())).collect();
        if values.iter().any(|v| v == &Value::String(String::new())) {
            return Err(CliError::input(path, "empty value in sweep list"));
        }
        Ok(Self {
            path: path.to_string(),
            values,
        })
    }

    pub fn new(path: &str, values: Vec<Value>) -> Self {
        Self {
            path: path.to_string(),
            values,
        }
    }
}

/// Cartesian product of the axes over `base`; the first axis varies slowest.
pub fn expand(base: &Doc, axes: &[Axis]) -> Result<Vec<(Doc, Vec<Value>)>, CliError> {
    let mut points = vec![(base.clone(), Vec::new())];
    for axis in axes {
        let mut next = Vec::with_capacity(points.len() * axis.values.len());
        for (doc, coords) in &points {
            for v in &axis.values {
                let mut d = doc.clone();
                d.set(&axis.path, v.clone())?;
                let mut c = coords.clone();
                c.push(v.clone());
                next.push((d, c));
            }
        }
        points = next;
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_paths_are_named() {
        let mut d = Doc::new();
        let e = d.set_raw("ssd.tau_foo=3").unwrap_err();
        assert_eq!(e.param(), "ssd.tau_foo");
        let e = d.set_raw("nosuch.key=3").unwrap_err();
        assert!(e.to_string().contains("nosuch"));
    }

    #[test]
    fn layering_prefers_later_values() {
        let mut d = Doc::new();
        d.merge_json(r#"{"ssd": {"preset": "tlc", "n_channels": 8}}"#, "file").unwrap();
        d.set_raw("ssd.n_channels=16").unwrap();
        let ssd = d.ssd().unwrap();
        assert_eq!(ssd.n_channels, 16);
        assert_eq!(ssd.chip.label, "TLC");
        // explicit keys survive a later preset change
        d.set_raw("ssd.preset=slc").unwrap();
        let ssd = d.ssd().unwrap();
        assert_eq!((ssd.n_channels, ssd.chip.label.as_str()), (16, "SLC"));
    }

    #[test]
    fn values_parse_as_json_first() {
        assert_eq!(parse_value("512"), Value::from(512));
        assert_eq!(parse_value("90:10"), Value::String("90:10".into()));
        assert_eq!(parse_value("true"), Value::Bool(true));
    }

    #[test]
    fn expansion_order() {
        let axes = [
            Axis::parse("workload.block_size_b=512,1024").unwrap(),
            Axis::parse("ssd.preset=slc,tlc,pslc").unwrap(),
        ];
        let pts = expand(&Doc::new(), &axes).unwrap();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[1].1, vec![Value::from(512), Value::from("tlc")]);
        assert_eq!(pts[3].0.get("workload.block_size_b"), Some(&Value::from(1024)));
    }

    #[test]
    fn bad_block_names_the_constraint() {
        let mut d = Doc::new();
        d.set_raw("workload.block_size_b=99").unwrap();
        let e = d.mix().unwrap_err();
        assert_eq!(e.param(), "workload.block_size");
    }
}
