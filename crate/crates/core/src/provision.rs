//! Viability and economics-optimal DRAM provisioning for a workload profile.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::device::{ssd_peak_iops, SsdConfig, WorkloadMix};
use crate::econ::{break_even, HostPlatform};
use crate::error::{ModelError, Result};
use crate::feasibility::{solve_rho_max, usable_ssd_iops, FeasibleIops, IopsLimiter, LatencyTargets};
use crate::profile::AccessProfile;
use crate::units::GB;

#[derive(Debug, Clone, PartialEq)]
pub struct ProvisionRequest {
    pub platform: HostPlatform,
    pub ssd: SsdConfig,
    pub mix: WorkloadMix,
    pub targets: LatencyTargets,
    /// Host processor IOPS budget across all SSDs.
    pub host_budget: f64,
    pub n_ssd: u32,
    /// Aggregate host-DRAM bandwidth, bytes/s.
    pub dram_bandwidth: f64,
    pub dram_capacity: Option<f64>,
    /// Multiplies both bandwidth budgets, for profiles that are a uniformly
    /// scaled-down copy of a larger working set. Break-even is unaffected.
    pub scale: f64,
}

impl ProvisionRequest {
    pub fn new(platform: HostPlatform, ssd: SsdConfig, mix: WorkloadMix) -> Self {
        Self {
            platform,
            ssd,
            mix,
            targets: LatencyTargets::none(),
            host_budget: f64::INFINITY,
            n_ssd: 4,
            dram_bandwidth: f64::INFINITY,
            dram_capacity: None,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Viable,
    DramBwLimited,
    SsdLimited,
    JointlyLimited,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Viable => "viable",
            Self::DramBwLimited => "dram_bw_limited",
            Self::SsdLimited => "ssd_limited",
            Self::JointlyLimited => "jointly_limited",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Advice {
    RaiseDramBandwidth,
    AddSsds,
    FasterSsds,
    RaiseHostBudget,
    RaiseDramCapacity,
    /// Viable, but break-even lies below the viability threshold.
    LowerViabilityThreshold,
    /// Viable, but break-even lies beyond what the DRAM can hold.
    GrowDramTowardOptimum,
}

impl fmt::Display for Advice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RaiseDramBandwidth => "raise host-DRAM bandwidth (more channels, faster parts, HBM)",
            Self::AddSsds => "raise SSD bandwidth by adding SSDs",
            Self::FasterSsds => "raise SSD bandwidth with higher-IOPS devices",
            Self::RaiseHostBudget => "raise the host IOPS budget, which caps usable SSD IOPS",
            Self::RaiseDramCapacity => "raise DRAM capacity until the cached set covers the viability threshold",
            Self::LowerViabilityThreshold => "upgrade DRAM or SSD bandwidth to bring the viability threshold below break-even",
            Self::GrowDramTowardOptimum => "grow DRAM capacity toward the economics-optimal size",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandwidthUse {
    pub threshold: f64,
    pub cached: f64,
    /// Miss-path traffic, twice the uncached throughput.
    pub miss_path: f64,
    pub total: f64,
}

impl BandwidthUse {
    pub fn at(profile: &AccessProfile, threshold: f64) -> Self {
        let (c, d) = profile.psi_split(threshold);
        Self {
            threshold,
            cached: c,
            miss_path: 2.0 * d,
            total: c + 2.0 * d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProvisionReport {
    pub peak_iops: f64,
    pub feasible: FeasibleIops,
    pub break_even: f64,
    pub dram_bandwidth: f64,
    pub ssd_bandwidth: f64,
    pub t_b: f64,
    pub t_s: f64,
    pub t_c: Option<f64>,
    pub t_v: f64,
    pub t_o: f64,
    pub min_dram_viable: f64,
    pub min_dram_optimal: f64,
    pub dataset_bytes: f64,
    pub bw_viable: BandwidthUse,
    pub bw_optimal: BandwidthUse,
    /// Traffic at T_C when a capacity is given.
    pub bw_at_capacity: Option<BandwidthUse>,
    /// Only defined when a DRAM capacity is given.
    pub verdict: Option<Verdict>,
    pub economics_optimal: Option<bool>,
    pub advice: Vec<Advice>,
}

pub fn provision(profile: &AccessProfile, req: &ProvisionRequest) -> Result<ProvisionReport> {
    req.mix.validate()?;
    if req.mix.block_size != profile.block_size() {
        return Err(ModelError::config(
            "block_size",
            format!(
                "workload block size {} differs from the profile's {}",
                req.mix.block_size,
                profile.block_size()
            ),
        ));
    }
    if !(req.scale > 0.0 && req.scale.is_finite()) {
        return Err(ModelError::config("scale", "must be positive and finite"));
    }
    if !(req.dram_bandwidth > 0.0) {
        return Err(ModelError::config("dram_bandwidth", "must be positive"));
    }

    let peak = ssd_peak_iops(&req.ssd, &req.mix)?;
    let rho = solve_rho_max(peak, req.ssd.n_channels, req.ssd.chip.tau_sense, &req.targets)?;
    let feasible = usable_ssd_iops(rho, peak, req.host_budget, req.n_ssd)?;
    let tau_be = break_even(&req.platform, &req.ssd, &req.mix, feasible.usable_iops_per_ssd)?.total;

    let l = profile.block_size() as f64;
    let dram_bw = req.dram_bandwidth * req.scale;
    let ssd_bw = l * req.n_ssd as f64 * feasible.usable_iops_per_ssd * req.scale;
    let t_b = profile.threshold_t_b(dram_bw)?;
    let t_s = profile.threshold_t_s(ssd_bw)?;
    let t_v = t_b.max(t_s);
    let t_o = tau_be.max(t_v);

    let mut report = ProvisionReport {
        peak_iops: peak,
        feasible,
        break_even: tau_be,
        dram_bandwidth: dram_bw,
        ssd_bandwidth: ssd_bw,
        t_b,
        t_s,
        t_c: None,
        t_v,
        t_o,
        min_dram_viable: profile.cached_bytes(t_v),
        min_dram_optimal: profile.cached_bytes(t_o),
        dataset_bytes: profile.dataset_bytes(),
        bw_viable: BandwidthUse::at(profile, t_v),
        bw_optimal: BandwidthUse::at(profile, t_o),
        bw_at_capacity: None,
        verdict: None,
        economics_optimal: None,
        advice: Vec::new(),
    };

    if let Some(cap) = req.dram_capacity {
        let t_c = profile.threshold_t_c(cap)?;
        let verdict = classify(t_b, t_s, t_c);
        let optimal = verdict == Verdict::Viable && tau_be >= t_v && tau_be <= t_c;
        let mut advice = Vec::new();
        if matches!(verdict, Verdict::DramBwLimited | Verdict::JointlyLimited) {
            advice.push(Advice::RaiseDramBandwidth);
        }
        if matches!(verdict, Verdict::SsdLimited | Verdict::JointlyLimited) {
            advice.extend([Advice::AddSsds, Advice::FasterSsds]);
            if feasible.limiter == IopsLimiter::HostBudget {
                advice.push(Advice::RaiseHostBudget);
            }
        }
        if verdict == Verdict::JointlyLimited {
            advice.push(Advice::RaiseDramCapacity);
        }
        if verdict == Verdict::Viable && !optimal {
            advice.push(if tau_be < t_v {
                Advice::LowerViabilityThreshold
            } else {
                Advice::GrowDramTowardOptimum
            });
        }
        report.t_c = Some(t_c);
        report.bw_at_capacity = Some(BandwidthUse::at(profile, t_c));
        report.verdict = Some(verdict);
        report.economics_optimal = Some(optimal);
        report.advice = advice;
    }
    Ok(report)
}

/// Diagnose which limit keeps `max(T_B, T_S)` above `T_C`.
pub fn classify(t_b: f64, t_s: f64, t_c: f64) -> Verdict {
    match (t_b > t_c, t_s > t_c) {
        (false, false) => Verdict::Viable,
        (true, false) => Verdict::DramBwLimited,
        (false, true) => Verdict::SsdLimited,
        (true, true) => Verdict::JointlyLimited,
    }
}

impl ProvisionReport {
    pub fn summary(&self) -> String {
        let gb = |b: f64| b / GB;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "usable SSD IOPS   {:.3}M per SSD (rho_max {:.3}, peak {:.3}M, limited by {})",
            self.feasible.usable_iops_per_ssd / 1e6,
            self.feasible.rho_max,
            self.peak_iops / 1e6,
            self.feasible.limiter.as_str()
        );
        let _ = writeln!(s, "break-even        {:.3} s", self.break_even);
        let _ = writeln!(s, "T_B / T_S         {:.4} s / {:.4} s", self.t_b, self.t_s);
        if let Some(t_c) = self.t_c {
            let _ = writeln!(s, "T_C               {:.4} s", t_c);
        }
        let _ = writeln!(s, "T_v / T_o         {:.4} s / {:.4} s", self.t_v, self.t_o);
        let _ = writeln!(
            s,
            "min DRAM          viable {:.3} GB, optimal {:.3} GB (dataset {:.3} GB)",
            gb(self.min_dram_viable),
            gb(self.min_dram_optimal),
            gb(self.dataset_bytes)
        );
        for (name, bw) in [("at T_v", self.bw_viable), ("at T_o", self.bw_optimal)] {
            let _ = writeln!(
                s,
                "DRAM traffic {name}  {:.3} GB/s cached + {:.3} GB/s miss path",
                gb(bw.cached),
                gb(bw.miss_path)
            );
        }
        match self.verdict {
            Some(v) => {
                let _ = writeln!(
                    s,
                    "verdict           {}{}",
                    v.as_str(),
                    if self.economics_optimal == Some(true) {
                        ", economics-optimal"
                    } else {
                        ""
                    }
                );
            }
            None => {
                let _ = writeln!(s, "verdict           n/a (no DRAM capacity given)");
            }
        }
        for a in &self.advice {
            let _ = writeln!(s, "  - {a}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_block() -> AccessProfile {
        AccessProfile::from_intervals(512, &[1.0, 4.0]).unwrap()
    }

    fn request(block: u64) -> ProvisionRequest {
        ProvisionRequest::new(
            HostPlatform::cpu_ddr(),
            SsdConfig::preset("slc").unwrap(),
            WorkloadMix::new(9.0, 3.0, block),
        )
    }

    #[test]
    fn classify_branches() {
        assert_eq!(classify(1.0, 2.0, 2.0), Verdict::Viable);
        assert_eq!(classify(3.0, 1.0, 2.0), Verdict::DramBwLimited);
        assert_eq!(classify(1.0, 3.0, 2.0), Verdict::SsdLimited);
        assert_eq!(classify(3.0, 3.0, 2.0), Verdict::JointlyLimited);
    }

    #[test]
    fn fully_cached_is_viable() {
        let p = two_block();
        let mut req = request(512);
        req.dram_bandwidth = 1e12;
        req.dram_capacity = Some(1024.0);
        let r = provision(&p, &req).unwrap();
        assert_eq!(r.verdict, Some(Verdict::Viable));
        assert_eq!(r.bw_at_capacity.unwrap().miss_path, 0.0);
        assert_eq!(r.t_c, Some(4.0));
        // the break-even is tens of seconds; everything is worth caching
        assert_eq!(r.min_dram_optimal, 1024.0);
        assert_eq!(r.economics_optimal, Some(false));
        assert_eq!(r.advice, vec![Advice::GrowDramTowardOptimum]);
    }

    #[test]
    fn dram_bandwidth_limited_case() {
        let p = two_block();
        let mut req = request(512);
        req.dram_bandwidth = 700.0;
        req.dram_capacity = Some(512.0);
        let r = provision(&p, &req).unwrap();
        assert_eq!((r.t_b, r.t_s, r.t_c), (4.0, 0.0, Some(1.0)));
        assert_eq!(r.verdict, Some(Verdict::DramBwLimited));
        assert_eq!(r.advice, vec![Advice::RaiseDramBandwidth]);
        assert_eq!(r.min_dram_viable, 1024.0);
    }

    #[test]
    fn ssd_limited_case_flags_host_budget() {
        let p = two_block();
        let mut req = request(512);
        req.dram_bandwidth = 1e12;
        req.host_budget = 0.1;
        req.n_ssd = 1;
        req.dram_capacity = Some(0.0);
        let r = provision(&p, &req).unwrap();
        assert_eq!(r.feasible.limiter, IopsLimiter::HostBudget);
        assert_eq!(r.verdict, Some(Verdict::SsdLimited));
        assert!(r.advice.contains(&Advice::RaiseHostBudget));
        assert!(r.summary().contains("ssd_limited"));
    }

    #[test]
    fn insufficient_dram_bandwidth_is_infeasible() {
        let mut req = request(512);
        req.dram_bandwidth = 100.0;
        let err = provision(&two_block(), &req).unwrap_err();
        assert!(err.is_infeasible());
        assert_eq!(err.param(), "dram_bandwidth");
    }

    #[test]
    fn block_size_must_match() {
        let err = provision(&two_block(), &request(4096)).unwrap_err();
        assert_eq!(err.param(), "block_size");
    }
}
