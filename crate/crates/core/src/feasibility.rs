//! Usable SSD IOPS under read-latency targets and a host IOPS budget.
//!
//! Reads are modeled as an M/D/1 queue whose deterministic service time is
//! `n_channels / peak`; the NAND sense time is added on top.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::units::US;

const RHO_CEIL: f64 = 1.0 - 1e-6;
const RHO_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyTargets {
    pub mean_target: Option<f64>,
    pub tail_percentile: f64,
    pub tail_target: Option<f64>,
}

impl Default for LatencyTargets {
    fn default() -> Self {
        Self::none()
    }
}

impl LatencyTargets {
    pub fn none() -> Self {
        Self {
            mean_target: None,
            tail_percentile: 0.99,
            tail_target: None,
        }
    }

    pub fn tail(percentile: f64, target: f64) -> Self {
        Self {
            mean_target: None,
            tail_percentile: percentile,
            tail_target: Some(target),
        }
    }

    pub fn mean(target: f64) -> Self {
        Self {
            mean_target: Some(target),
            ..Self::none()
        }
    }

    pub fn is_unconstrained(&self) -> bool {
        self.mean_target.is_none() && self.tail_target.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tail_percentile > 0.0 && self.tail_percentile < 1.0) {
            return Err(ModelError::config("tail_percentile", "must lie in (0, 1)"));
        }
        for (name, t) in [("mean_target", self.mean_target), ("tail_target", self.tail_target)] {
            if let Some(t) = t {
                if !(t > 0.0) {
                    return Err(ModelError::config(name, "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Named p99 tier for a block size, e.g. `tier90` at 4096 B is 44 µs.
    pub fn tier(name: &str, block_size: u64) -> Result<Self> {
        let row = TIERS
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| ModelError::config("tier", format!("unknown tier `{name}`")))?;
        let col = match block_size {
            512 => 0,
            1024 => 1,
            2048 => 2,
            4096 => 3,
            _ => {
                return Err(ModelError::config(
                    "block_size",
                    format!("latency tiers are defined for 512/1024/2048/4096 B, not {block_size}"),
                ))
            }
        };
        Ok(Self::tail(0.99, row.targets_us[col] * US))
    }
}

/// A p99 latency tier, targets listed for 512 B, 1 KB, 2 KB and 4 KB reads.
#[derive(Debug, Clone, Copy)]
pub struct LatencyTier {
    pub name: &'static str,
    pub nominal_utilization: f64,
    pub targets_us: [f64; 4],
}

pub const TIERS: [LatencyTier; 4] = [
    LatencyTier {
        name: "tier70",
        nominal_utilization: 0.70,
        targets_us: [7.0, 9.0, 11.0, 16.0],
    },
    LatencyTier {
        name: "tier80",
        nominal_utilization: 0.80,
        targets_us: [9.0, 11.0, 15.0, 23.0],
    },
    LatencyTier {
        name: "tier90",
        nominal_utilization: 0.90,
        targets_us: [13.0, 17.0, 26.0, 44.0],
    },
    LatencyTier {
        name: "tier99",
        nominal_utilization: 0.99,
        targets_us: [85.0, 135.0, 230.0, 418.0],
    },
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IopsLimiter {
    Latency,
    HostBudget,
    DevicePeak,
}

impl IopsLimiter {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Latency => "latency",
            Self::HostBudget => "host_budget",
            Self::DevicePeak => "device_peak",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleIops {
    pub rho_max: f64,
    pub usable_iops_per_ssd: f64,
    pub limiter: IopsLimiter,
}

fn check_queue(peak_iops: f64, n_channels: u32, tau_sense: f64, rho: f64) -> Result<f64> {
    if !(peak_iops > 0.0) {
        return Err(ModelError::domain("peak_iops", "must be positive"));
    }
    if n_channels == 0 {
        return Err(ModelError::domain("n_channels", "must be at least 1"));
    }
    if !(tau_sense >= 0.0) {
        return Err(ModelError::domain("tau_sense", "must be non-negative"));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(ModelError::domain("rho", format!("{rho} not in [0, 1)")));
    }
    Ok(n_channels as f64 / peak_iops)
}

pub fn mean_latency(peak_iops: f64, n_channels: u32, tau_sense: f64, rho: f64) -> Result<f64> {
    let s = check_queue(peak_iops, n_channels, tau_sense, rho)?;
    Ok(s * (1.0 + rho / (2.0 * (1.0 - rho))) + tau_sense)
}

pub fn tail_latency(peak_iops: f64, n_channels: u32, tau_sense: f64, p: f64, rho: f64) -> Result<f64> {
    let s = check_queue(peak_iops, n_channels, tau_sense, rho)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(ModelError::domain("tail_percentile", format!("{p} not in (0, 1)")));
    }
    Ok(s * (1.0 + rho / (2.0 * (1.0 - rho)) * (1.0 / (1.0 - p)).ln()) + tau_sense)
}

/// Largest utilization meeting every set target.
pub fn solve_rho_max(peak_iops: f64, n_channels: u32, tau_sense: f64, targets: &LatencyTargets) -> Result<f64> {
    targets.validate()?;
    check_queue(peak_iops, n_channels, tau_sense, 0.0)?;
    if targets.is_unconstrained() {
        return Ok(1.0);
    }
    let meets = |rho: f64| -> Result<bool> {
        if let Some(t) = targets.mean_target {
            if mean_latency(peak_iops, n_channels, tau_sense, rho)? > t {
                return Ok(false);
            }
        }
        if let Some(t) = targets.tail_target {
            if tail_latency(peak_iops, n_channels, tau_sense, targets.tail_percentile, rho)? > t {
                return Ok(false);
            }
        }
        Ok(true)
    };

    let floor = n_channels as f64 / peak_iops + tau_sense;
    if !meets(0.0)? {
        let which = match (targets.mean_target, targets.tail_target) {
            (Some(m), _) if m < floor => "mean_target",
            _ => "tail_target",
        };
        return Err(ModelError::infeasible(
            which,
            format!("below the zero-load read latency of {:.3} us", floor / US),
        ));
    }
    if meets(RHO_CEIL)? {
        return Ok(RHO_CEIL);
    }
    let (mut lo, mut hi) = (0.0, RHO_CEIL);
    while hi - lo > RHO_TOL {
        let mid = 0.5 * (lo + hi);
        if meets(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

pub fn usable_ssd_iops(rho_max: f64, peak_iops: f64, host_budget: f64, n_ssd: u32) -> Result<FeasibleIops> {
    if n_ssd == 0 {
        return Err(ModelError::domain("n_ssd", "must be at least 1"));
    }
    if !(rho_max > 0.0 && rho_max <= 1.0) {
        return Err(ModelError::domain("rho_max", format!("{rho_max} not in (0, 1]")));
    }
    if !(peak_iops > 0.0) {
        return Err(ModelError::domain("peak_iops", "must be positive"));
    }
    if !(host_budget > 0.0) {
        return Err(ModelError::domain("host_budget", "must be positive"));
    }
    let device = rho_max * peak_iops;
    let host = host_budget / n_ssd as f64;
    let (usable, limiter) = if host < device {
        (host, IopsLimiter::HostBudget)
    } else if rho_max >= 1.0 {
        (device, IopsLimiter::DevicePeak)
    } else {
        (device, IopsLimiter::Latency)
    };
    Ok(FeasibleIops {
        rho_max,
        usable_iops_per_ssd: usable,
        limiter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::device::{ssd_peak_iops, SsdConfig, WorkloadMix};
    use proptest::prelude::*;

    const PEAK_512: f64 = 57.43e6;

    #[test]
    fn mean_latency_examples() {
        let z = mean_latency(PEAK_512, 20, 5e-6, 0.0).unwrap();
        assert_eq!(z, 20.0 / PEAK_512 + 5e-6);
        let m = mean_latency(PEAK_512, 20, 5e-6, 0.9).unwrap();
        assert!((m - 6.915e-6).abs() < 0.01e-6, "{m}");
        assert!(mean_latency(PEAK_512, 20, 5e-6, 1.0).is_err());
        assert!(mean_latency(PEAK_512, 20, 5e-6, 0.999999).unwrap() > 1e-3);
    }

    #[test]
    fn tail_latency_examples() {
        let t = tail_latency(PEAK_512, 20, 5e-6, 0.99, 0.9).unwrap();
        assert!((t - 12.57e-6).abs() < 0.02e-6, "{t}");
        assert_eq!(
            tail_latency(PEAK_512, 20, 5e-6, 0.99, 0.0).unwrap(),
            mean_latency(PEAK_512, 20, 5e-6, 0.0).unwrap()
        );
        let p = 1.0 - (-1.0f64).exp();
        let a = tail_latency(PEAK_512, 20, 5e-6, p, 0.5).unwrap();
        let b = mean_latency(PEAK_512, 20, 5e-6, 0.5).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(solve_rho_max(PEAK_512, 20, 5e-6, &LatencyTargets::none()).unwrap(), 1.0);
        let r = solve_rho_max(PEAK_512, 20, 5e-6, &LatencyTargets::tail(0.99, 13e-6)).unwrap();
        assert!((r - 0.905).abs() < 0.02, "{r}");
        let r4 = solve_rho_max(11.09e6, 20, 5e-6, &LatencyTargets::tail(0.99, 44e-6)).unwrap();
        assert!((r4 - 0.90).abs() < 0.02, "{r4}");

        let err = solve_rho_max(PEAK_512, 20, 5e-6, &LatencyTargets::tail(0.99, 5e-6)).unwrap_err();
        assert!(err.is_infeasible());
        assert_eq!(err.param(), "tail_target");
        let err = solve_rho_max(PEAK_512, 20, 5e-6, &LatencyTargets::mean(1e-6)).unwrap_err();
        assert_eq!(err.param(), "mean_target");
    }

    #[test]
    fn table_reproduction() {
        let ssd = SsdConfig::preset("slc").unwrap();
        for (col, block) in [512u64, 1024, 2048, 4096].into_iter().enumerate() {
            let peak = ssd_peak_iops(&ssd, &WorkloadMix::new(9.0, 3.0, block)).unwrap();
            for tier in TIERS {
                let t = LatencyTargets::tier(tier.name, block).unwrap();
                assert_eq!(t.tail_target, Some(tier.targets_us[col] * US));
                let r = solve_rho_max(peak, ssd.n_channels, ssd.chip.tau_sense, &t).unwrap();
                assert!(
                    (r - tier.nominal_utilization).abs() <= 0.03,
                    "{} {block}: {r}",
                    tier.name
                );
            }
        }
        assert!(LatencyTargets::tier("tier50", 512).is_err());
        assert!(LatencyTargets::tier("tier90", 8192).is_err());
    }

    #[test]
    fn usable_examples() {
        let a = usable_ssd_iops(0.9, PEAK_512, 100e6, 4).unwrap();
        assert_eq!(a.usable_iops_per_ssd, 25e6);
        assert_eq!(a.limiter, IopsLimiter::HostBudget);
        let b = usable_ssd_iops(0.9, PEAK_512, 400e6, 4).unwrap();
        assert!((b.usable_iops_per_ssd - 0.9 * PEAK_512).abs() < 1.0);
        assert_eq!(b.limiter, IopsLimiter::Latency);
        let c = usable_ssd_iops(1.0, PEAK_512, f64::INFINITY, 1).unwrap();
        assert_eq!(c.usable_iops_per_ssd, PEAK_512);
        assert_eq!(c.limiter, IopsLimiter::DevicePeak);
        assert!(usable_ssd_iops(1.0, PEAK_512, 1e6, 0).is_err());
    }

    proptest! {
        #[test]
        fn latencies_increase_in_rho(a in 0.0f64..0.999, b in 0.0f64..0.999, p in 0.5f64..0.9999) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-9);
            prop_assert!(mean_latency(PEAK_512, 20, 5e-6, lo).unwrap() < mean_latency(PEAK_512, 20, 5e-6, hi).unwrap());
            prop_assert!(tail_latency(PEAK_512, 20, 5e-6, p, lo).unwrap() < tail_latency(PEAK_512, 20, 5e-6, p, hi).unwrap());
        }

        #[test]
        fn loosening_targets_never_lowers_rho(t in 5.5e-6f64..1e-3, extra in 0.0f64..1e-4, m in 5.5e-6f64..1e-3) {
            let tight = LatencyTargets { mean_target: Some(m), tail_percentile: 0.99, tail_target: Some(t) };
            let loose_tail = LatencyTargets { tail_target: Some(t + extra), ..tight };
            let loose_mean = LatencyTargets { mean_target: Some(m + extra), ..tight };
            let solve = |x: &LatencyTargets| solve_rho_max(PEAK_512, 20, 5e-6, x).unwrap();
            let base = solve(&tight);
            prop_assert!(solve(&loose_tail) >= base);
            prop_assert!(solve(&loose_mean) >= base);
            prop_assert!(solve(&LatencyTargets::tail(0.99, t)) >= base);
        }

        #[test]
        fn usable_respects_both_bounds(rho in 0.01f64..=1.0, peak in 1e5f64..1e8, host in 1e5f64..1e9, n in 1u32..16) {
            let f = usable_ssd_iops(rho, peak, host, n).unwrap();
            prop_assert!(f.usable_iops_per_ssd <= rho * peak);
            prop_assert!(f.usable_iops_per_ssd <= host / n as f64);
        }
    }
}
