//! Throughput models for an SSD-resident blocked-Cuckoo KV store and a
//! two-stage ANN search.
//!
//! Both reduce a workload to per-operation demands on three resources (host
//! I/O budget, SSD service time, host-DRAM bytes) and saturate the tightest.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::device::{ssd_peak_iops, SsdConfig, WorkloadMix};
use crate::econ::HostPlatform;
use crate::error::{ModelError, Result};
use crate::units::{GB, MB};

/// A host platform with its aggregate budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Host {
    pub platform: HostPlatform,
    /// Host I/O submission capacity, IOPS.
    pub iops_budget: f64,
    /// Aggregate host-DRAM bandwidth, bytes/s.
    pub dram_bandwidth: f64,
}

impl Host {
    pub fn cpu() -> Self {
        Self {
            platform: HostPlatform::cpu_ddr(),
            iops_budget: 100e6,
            dram_bandwidth: 540.0 * GB,
        }
    }

    pub fn gpu() -> Self {
        Self {
            platform: HostPlatform::gpu_gddr(),
            iops_budget: 400e6,
            dram_bandwidth: 640.0 * GB,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "cpu" | "cpu-ddr" => Ok(Self::cpu()),
            "gpu" | "gpu-gddr" => Ok(Self::gpu()),
            _ => Err(ModelError::config("host", format!("unknown host `{name}` (expected cpu or gpu)"))),
        }
    }

    fn validate(&self) -> Result<()> {
        self.platform.validate()?;
        if !(self.iops_budget > 0.0) {
            return Err(ModelError::config("host.iops_budget", "must be positive"));
        }
        if !(self.dram_bandwidth > 0.0) {
            return Err(ModelError::config("host.dram_bandwidth", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bottleneck {
    HostIops,
    SsdIops,
    DramBandwidth,
}

impl Bottleneck {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::HostIops => "host_iops",
            Self::SsdIops => "ssd_iops",
            Self::DramBandwidth => "dram_bandwidth",
        }
    }
}

/// Utilization of each resource at the reported operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demands {
    pub host_iops: f64,
    pub ssd_iops: f64,
    pub dram_bandwidth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    /// Operations or queries per second.
    pub throughput: f64,
    pub bottleneck: Bottleneck,
    pub component_demands: Demands,
    pub hit_fraction: f64,
}

/// Resource use of one operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerOp {
    pub host_ios: f64,
    /// SSD-seconds of device service at peak rate.
    pub ssd_seconds: f64,
    pub dram_bytes: f64,
}

/// Largest rate at which no resource is over its cap.
pub fn saturate(per_op: PerOp, host_iops: f64, ssd_capacity: f64, dram_bandwidth: f64) -> Result<(f64, Bottleneck, Demands)> {
    let limits = [
        (Bottleneck::HostIops, host_iops / per_op.host_ios),
        (Bottleneck::SsdIops, ssd_capacity / per_op.ssd_seconds),
        (Bottleneck::DramBandwidth, dram_bandwidth / per_op.dram_bytes),
    ];
    let (bottleneck, x) = limits
        .into_iter()
        .fold((Bottleneck::HostIops, f64::INFINITY), |best, (b, x)| if x < best.1 { (b, x) } else { best });
    if !(x.is_finite() && x > 0.0) {
        return Err(ModelError::domain("throughput", "no resource bounds the operation rate"));
    }
    let demands = Demands {
        host_iops: x * per_op.host_ios / host_iops,
        ssd_iops: x * per_op.ssd_seconds / ssd_capacity,
        dram_bandwidth: x * per_op.dram_bytes / dram_bandwidth,
    };
    Ok((x, bottleneck, demands))
}

/// Share of accesses that land on the hottest `cached_fraction` of items
/// when per-item access rates are lognormal with shape `sigma`.
pub fn lognormal_hit_fraction(cached_fraction: f64, sigma: f64) -> f64 {
    let q = cached_fraction.clamp(0.0, 1.0);
    if q == 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return 1.0;
    }
    let std = Normal::standard();
    1.0 - std.cdf(std.inverse_cdf(1.0 - q) - sigma)
}

/// Approximate load threshold of two-choice cuckoo hashing with `b`-entry buckets.
pub fn cuckoo_critical_load(bucket_entries: u32) -> f64 {
    match bucket_entries {
        0 => 0.0,
        1 => 0.5,
        2 => 0.897,
        3 => 0.959,
        4 => 0.980,
        5..=7 => 0.990,
        _ => 0.995,
    }
}

/// Expected displacement-chain length per insert, α^{2B}/(1−α^B).
pub fn cuckoo_expected_displacements(alpha: f64, bucket_entries: u32) -> Result<f64> {
    if !(alpha >= 0.0 && alpha < 1.0) {
        return Err(ModelError::domain("load_factor", format!("{alpha} not in [0, 1)")));
    }
    if bucket_entries == 0 {
        return Err(ModelError::domain("bucket_entries", "must be at least 1"));
    }
    let ab = alpha.powi(bucket_entries as i32);
    Ok(ab * ab / (1.0 - ab))
}

/// True when `alpha` is within 0.05 of the critical load.
pub fn near_critical_load(alpha: f64, bucket_entries: u32) -> bool {
    alpha > cuckoo_critical_load(bucket_entries) - 0.05
}

/// Expected distinct items among `draws` accesses to `n` items whose rates
/// are lognormal with shape `sigma`.
fn expected_distinct(n: f64, draws: f64, sigma: f64) -> f64 {
    // E_z[1 - exp(-draws * e^{sigma z - sigma^2/2} / n)], Simpson on [-10, 10]
    let steps = 4000;
    let (a, b) = (-10.0f64, 10.0f64);
    let h = (b - a) / steps as f64;
    let f = |z: f64| {
        let share = (sigma * z - 0.5 * sigma * sigma).exp() / n;
        let hit = -(-draws * share).exp_m1();
        hit * (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
    };
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (n * s * h / 3.0).min(draws)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KvConfig {
    pub n_items: f64,
    pub item_size: u64,
    pub load_factor: f64,
    /// Bytes per hash bucket, one SSD block.
    pub bucket_block: u64,
    pub dram_capacity: f64,
    /// GET share of operations; a 90:10 mix is 0.9.
    pub get_fraction: f64,
    pub insert_fraction_of_puts: f64,
    pub locality_sigma: f64,
    pub host: Host,
    pub ssd: SsdConfig,
    pub n_ssd: u32,
    pub ssd_util_cap: f64,
    /// Device write amplification used for SSD peak IOPS.
    pub write_amp: f64,
    /// WAL bytes accumulated before a consolidated flush.
    pub wal_window_bytes: f64,
}

impl KvConfig {
    /// 80 billion 64 B items at load 0.7 on four SSDs.
    pub fn new(host: Host, ssd: SsdConfig, bucket_block: u64) -> Self {
        Self {
            n_items: 80e9,
            item_size: 64,
            load_factor: 0.7,
            bucket_block,
            dram_capacity: 256.0 * GB,
            get_fraction: 1.0,
            insert_fraction_of_puts: 0.2,
            locality_sigma: 1.2,
            host,
            ssd,
            n_ssd: 4,
            ssd_util_cap: 0.7,
            write_amp: 3.0,
            wal_window_bytes: 64.0 * MB,
        }
    }

    pub fn bucket_entries(&self) -> u32 {
        (self.bucket_block / self.item_size.max(1)) as u32
    }

    pub fn validate(&self) -> Result<()> {
        self.host.validate()?;
        self.ssd.validate()?;
        if !(self.n_items >= 1.0) {
            return Err(ModelError::config("n_items", "must be at least 1"));
        }
        if self.item_size == 0 || self.bucket_block < self.item_size {
            return Err(ModelError::config("item_size", "must be positive and fit in one bucket"));
        }
        let b = self.bucket_entries();
        if !(self.load_factor > 0.0 && self.load_factor < cuckoo_critical_load(b)) {
            return Err(ModelError::config(
                "load_factor",
                format!(
                    "{} is not below the critical load {} for {b}-entry buckets",
                    self.load_factor,
                    cuckoo_critical_load(b)
                ),
            ));
        }
        for (name, v) in [
            ("get_fraction", self.get_fraction),
            ("insert_fraction_of_puts", self.insert_fraction_of_puts),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ModelError::config(name, "must lie in [0, 1]"));
            }
        }
        if !(self.ssd_util_cap > 0.0 && self.ssd_util_cap <= 1.0) {
            return Err(ModelError::config("ssd_util_cap", "must lie in (0, 1]"));
        }
        if self.n_ssd == 0 {
            return Err(ModelError::config("n_ssd", "must be at least 1"));
        }
        if !(self.dram_capacity >= 0.0) {
            return Err(ModelError::config("dram_capacity", "must be non-negative"));
        }
        if !(self.locality_sigma >= 0.0) {
            return Err(ModelError::config("locality_sigma", "must be non-negative"));
        }
        if !(self.wal_window_bytes >= self.item_size as f64) {
            return Err(ModelError::config("wal_window_bytes", "must hold at least one item"));
        }
        Ok(())
    }

    /// Fraction of PUTs that reach a bucket after WAL consolidation.
    pub fn consolidation_factor(&self) -> f64 {
        let w = (self.wal_window_bytes / self.item_size as f64).floor();
        let buckets = self.n_items / (self.load_factor * self.bucket_entries() as f64);
        let items = expected_distinct(self.n_items, w, self.locality_sigma);
        // distinct items land on uniformly hashed buckets
        let distinct_buckets = -buckets * (-items / buckets).exp_m1();
        distinct_buckets / w
    }
}

pub fn kv_throughput(cfg: &KvConfig) -> Result<CaseResult> {
    cfg.validate()?;
    let l_kv = cfg.item_size as f64;
    let l_blk = cfg.bucket_block as f64;
    let cached = (cfg.dram_capacity / l_kv).floor() / cfg.n_items;
    let h = lognormal_hit_fraction(cached, cfg.locality_sigma);
    let e_l = cuckoo_expected_displacements(cfg.load_factor, cfg.bucket_entries())?;

    let get = cfg.get_fraction;
    let put = 1.0 - get;
    const LOOKUP_READS: f64 = 1.5;
    let rmw = cfg.consolidation_factor();
    let reads = get * (1.0 - h) * LOOKUP_READS
        + put * (rmw * LOOKUP_READS + cfg.insert_fraction_of_puts * e_l);
    let writes = put * (l_kv / l_blk + rmw + cfg.insert_fraction_of_puts * e_l);

    let ratio = if writes > 0.0 { reads / writes } else { f64::INFINITY };
    let mix = WorkloadMix::new(ratio, cfg.write_amp, cfg.bucket_block);
    let peak = ssd_peak_iops(&cfg.ssd, &mix)?;
    let ios = reads + writes;
    let per_op = PerOp {
        host_ios: ios,
        ssd_seconds: ios / peak,
        // every block I/O crosses DRAM twice; hits and WAL staging once
        dram_bytes: 2.0 * l_blk * ios + get * h * l_kv + put * l_kv,
    };
    let (throughput, bottleneck, component_demands) = saturate(
        per_op,
        cfg.host.iops_budget,
        cfg.n_ssd as f64 * cfg.ssd_util_cap,
        cfg.host.dram_bandwidth,
    )?;
    Ok(CaseResult {
        throughput,
        bottleneck,
        component_demands,
        hit_fraction: h,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnConfig {
    pub n_vectors: f64,
    pub reduced_size: u64,
    pub full_size: u64,
    pub promotion_fraction: f64,
    pub reduced_reads_per_query: f64,
    /// Full vectors occupy whole read units of this size.
    pub full_read_block: u64,
    pub dram_capacity: f64,
    /// Lognormal shape of per-node access rates.
    pub node_sigma: f64,
    pub host: Host,
    pub ssd: SsdConfig,
    pub n_ssd: u32,
    pub ssd_util_cap: f64,
}

/// Promotion share for the standard full-vector sizes.
pub fn default_promotion(full_size: u64) -> Option<f64> {
    match full_size {
        2048 => Some(0.05),
        4096 => Some(0.10),
        6144 => Some(0.15),
        8192 => Some(0.20),
        _ => None,
    }
}

impl AnnConfig {
    /// Eight billion vectors, 512 B reduced form, four SSDs.
    pub fn new(host: Host, ssd: SsdConfig, full_size: u64) -> Self {
        Self {
            n_vectors: 8e9,
            reduced_size: 512,
            full_size,
            promotion_fraction: default_promotion(full_size).unwrap_or(0.1),
            reduced_reads_per_query: 16_000.0,
            full_read_block: 4096,
            dram_capacity: 256.0 * GB,
            node_sigma: 1.0,
            host,
            ssd,
            n_ssd: 4,
            ssd_util_cap: 0.7,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.host.validate()?;
        self.ssd.validate()?;
        if !(0.0..=1.0).contains(&self.promotion_fraction) {
            return Err(ModelError::config("promotion_fraction", "must lie in [0, 1]"));
        }
        if self.reduced_size == 0 || self.full_size < self.reduced_size {
            return Err(ModelError::config("full_size", "must be at least the reduced size"));
        }
        for (name, v) in [("reduced_size", self.reduced_size), ("full_read_block", self.full_read_block)] {
            if v % 512 != 0 {
                return Err(ModelError::config(name, "must be a multiple of 512"));
            }
        }
        if self.full_read_block == 0 {
            return Err(ModelError::config("full_read_block", "must be positive"));
        }
        if !(self.n_vectors >= 1.0 && self.reduced_reads_per_query > 0.0) {
            return Err(ModelError::config("reduced_reads_per_query", "must be positive"));
        }
        if !(self.ssd_util_cap > 0.0 && self.ssd_util_cap <= 1.0) {
            return Err(ModelError::config("ssd_util_cap", "must lie in (0, 1]"));
        }
        if self.n_ssd == 0 {
            return Err(ModelError::config("n_ssd", "must be at least 1"));
        }
        if !(self.dram_capacity >= 0.0 && self.node_sigma >= 0.0) {
            return Err(ModelError::config("dram_capacity", "must be non-negative"));
        }
        Ok(())
    }
}

pub fn ann_throughput(cfg: &AnnConfig) -> Result<CaseResult> {
    cfg.validate()?;
    let cached = (cfg.dram_capacity / cfg.reduced_size as f64).floor() / cfg.n_vectors;
    let h = lognormal_hit_fraction(cached, cfg.node_sigma);
    let v_r = cfg.reduced_reads_per_query;
    let reduced_reads = (1.0 - h) * v_r;
    let full_reads = cfg.promotion_fraction * v_r * cfg.full_size.div_ceil(cfg.full_read_block) as f64;
    let reduced_peak = ssd_peak_iops(&cfg.ssd, &WorkloadMix::read_only(cfg.reduced_size))?;
    let full_peak = ssd_peak_iops(&cfg.ssd, &WorkloadMix::read_only(cfg.full_read_block))?;
    let ssd_bytes = reduced_reads * cfg.reduced_size as f64 + full_reads * cfg.full_read_block as f64;
    let per_op = PerOp {
        host_ios: reduced_reads + full_reads,
        ssd_seconds: reduced_reads / reduced_peak + full_reads / full_peak,
        dram_bytes: 2.0 * ssd_bytes + h * v_r * cfg.reduced_size as f64,
    };
    let (throughput, bottleneck, component_demands) = saturate(
        per_op,
        cfg.host.iops_budget,
        cfg.n_ssd as f64 * cfg.ssd_util_cap,
        cfg.host.dram_bandwidth,
    )?;
    Ok(CaseResult {
        throughput,
        bottleneck,
        component_demands,
        hit_fraction: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::AccessProfile;

    fn kv(host: Host, ssd: &str, block: u64) -> KvConfig {
        KvConfig::new(host, SsdConfig::preset(ssd).unwrap(), block)
    }

    #[test]
    fn displacement_examples() {
        let e = cuckoo_expected_displacements(0.7, 8).unwrap();
        assert!((e - 0.00353).abs() < 1e-5, "{e}");
        assert!(cuckoo_expected_displacements(1e-9, 8).unwrap() < 1e-100);
        let big = cuckoo_expected_displacements(0.7, 64).unwrap();
        let oracle = 0.7f64.powi(128) / (1.0 - 0.7f64.powi(64));
        assert!((big - oracle).abs() / oracle < 1e-12 && big < 1e-10, "{big}");
        assert!(cuckoo_expected_displacements(1.0, 8).is_err());
        assert!(near_critical_load(0.97, 4));
        assert!(!near_critical_load(0.7, 8));
    }

    #[test]
    fn hit_fraction_matches_profile() {
        // closed form versus the empirical profile's hottest-set share
        for sigma in [0.4, 1.2] {
            let p = AccessProfile::lognormal(1_000_000, sigma, 1e6, 512, 3).unwrap();
            for q in [0.05, 0.2, 0.5] {
                let k = (q * 1e6) as u64;
                let bins = p.bins();
                let (mut n, mut rate) = (0u64, 0.0);
                for b in bins {
                    if n + b.count > k {
                        break;
                    }
                    n += b.count;
                    rate += b.count as f64 / b.interval;
                }
                let empirical = rate / p.total_rate();
                let closed = lognormal_hit_fraction(n as f64 / 1e6, sigma);
                assert!((empirical - closed).abs() < 5e-3, "{sigma} {q}: {empirical} vs {closed}");
            }
        }
        assert_eq!(lognormal_hit_fraction(0.0, 1.0), 0.0);
        assert_eq!(lognormal_hit_fraction(2.0, 1.0), 1.0);
    }

    #[test]
    fn kv_gpu_storage_next_exceeds_100m() {
        let r = kv_throughput(&kv(Host::gpu(), "slc", 512)).unwrap();
        assert!(r.throughput >= 100e6, "{r:?}");
    }

    #[test]
    fn kv_cpu_is_host_bound() {
        let gpu = kv_throughput(&kv(Host::gpu(), "slc", 512)).unwrap();
        let cpu = kv_throughput(&kv(Host::cpu(), "slc", 512)).unwrap();
        assert!(cpu.throughput < gpu.throughput);
        assert_eq!(cpu.bottleneck, Bottleneck::HostIops);
    }

    #[test]
    fn kv_normal_ssd_collapses_hosts() {
        for get in [1.0, 0.9, 0.7, 0.5] {
            let mut c = kv(Host::cpu(), "slc-normal", 4096);
            let mut g = kv(Host::gpu(), "slc-normal", 4096);
            c.get_fraction = get;
            g.get_fraction = get;
            let (rc, rg) = (kv_throughput(&c).unwrap(), kv_throughput(&g).unwrap());
            assert_eq!(rc.throughput, rg.throughput);
            assert_eq!(rc.bottleneck, Bottleneck::SsdIops);
        }
    }

    #[test]
    fn kv_consolidation_is_a_fraction() {
        let c = kv(Host::gpu(), "slc", 512);
        let f = c.consolidation_factor();
        assert!(f > 0.0 && f <= 1.0, "{f}");
        let weak = KvConfig {
            locality_sigma: 0.4,
            ..c.clone()
        };
        assert!(weak.consolidation_factor() >= f);
    }

    #[test]
    fn kv_rejects_overloaded_table() {
        let mut c = kv(Host::gpu(), "slc", 512);
        c.load_factor = 0.999;
        assert_eq!(kv_throughput(&c).unwrap_err().param(), "load_factor");
    }

    #[test]
    fn ann_calibration_point() {
        let mut c = AnnConfig::new(Host::gpu(), SsdConfig::preset("slc").unwrap(), 2048);
        c.dram_capacity = 512.0 * GB;
        let r = ann_throughput(&c).unwrap();
        assert!(r.throughput > 13e3 && r.throughput < 17e3, "{r:?}");
        assert_eq!(r.bottleneck, Bottleneck::SsdIops);
    }

    #[test]
    fn ann_single_read_fully_cached() {
        let mut c = AnnConfig::new(Host::gpu(), SsdConfig::preset("slc").unwrap(), 2048);
        c.promotion_fraction = 0.0;
        c.reduced_reads_per_query = 1.0;
        c.dram_capacity = c.n_vectors * 512.0;
        let r = ann_throughput(&c).unwrap();
        assert_eq!(r.hit_fraction, 1.0);
        assert_eq!(r.bottleneck, Bottleneck::DramBandwidth);
        assert!((r.throughput - 640e9 / 512.0).abs() < 1.0);
    }

    #[test]
    fn saturate_tightness() {
        let (x, b, d) = saturate(
            PerOp {
                host_ios: 1.0,
                ssd_seconds: 1e-6,
                dram_bytes: 1000.0,
            },
            10e6,
            2.0,
            1e9,
        )
        .unwrap();
        assert_eq!(b, Bottleneck::DramBandwidth);
        assert_eq!(x, 1e6);
        assert!((d.dram_bandwidth - 1.0).abs() < 1e-12);
        assert!(d.host_iops <= 1.0 && d.ssd_iops <= 1.0);
    }
}
