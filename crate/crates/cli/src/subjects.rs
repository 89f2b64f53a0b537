//! One CSV row per configuration point for each subject.

use clap::ValueEnum;
use tierline_core::cases::{ann_throughput, kv_throughput, CaseResult};
use tierline_core::device::{ssd_cost, ssd_peak_breakdown, IopsMode, PeakLimiter};
use tierline_core::econ::break_even;
use tierline_core::feasibility::{mean_latency, solve_rho_max, tail_latency, usable_ssd_iops, FeasibleIops};
use tierline_core::provision::{provision, ProvisionRequest};
use tierline_core::units::{GB, MS, US};
use tierline_flashsim::{run_sim_detailed, SimOutput, RESULT_COLUMNS};

use crate::doc::Doc;
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Subject {
    SsdIops,
    BreakEven,
    Feasibility,
    Provision,
    Simulate,
    CaseKv,
    CaseAnn,
}

impl Subject {
    pub fn name(self) -> &'static str {
        match self {
            Self::SsdIops => "ssd_iops",
            Self::BreakEven => "break_even",
            Self::Feasibility => "feasibility",
            Self::Provision => "provision",
            Self::Simulate => "simulate",
            Self::CaseKv => "case_kv",
            Self::CaseAnn => "case_ann",
        }
    }

    pub fn columns(self) -> Vec<&'static str> {
        match self {
            Self::SsdIops => vec![
                "ssd",
                "iops_mode",
                "block_size_b",
                "rw",
                "write_amp",
                "peak_iops",
                "die_iops",
                "channel_iops",
                "limiter",
                "evaluated_block_b",
                "ssd_cost",
            ],
            Self::BreakEven => vec![
                "platform",
                "ssd",
                "iops_mode",
                "block_size_b",
                "rw",
                "write_amp",
                "n_ssd",
                "host_budget",
                "latency",
                "rho_max",
                "peak_iops",
                "usable_iops",
                "limiter",
                "processor_s",
                "dram_s",
                "ssd_s",
                "total_s",
            ],
            Self::Feasibility => vec![
                "ssd",
                "block_size_b",
                "rw",
                "write_amp",
                "latency",
                "tail_percentile",
                "tail_target_us",
                "mean_target_us",
                "peak_iops",
                "rho_max",
                "mean_latency_us",
                "tail_latency_us",
                "n_ssd",
                "host_budget",
                "usable_iops",
                "limiter",
            ],
            Self::Provision => vec![
                "platform",
                "ssd",
                "block_size_b",
                "rw",
                "sigma",
                "profile_blocks",
                "workload_blocks",
                "latency",
                "peak_iops",
                "rho_max",
                "usable_iops",
                "limiter",
                "break_even_s",
                "t_b_s",
                "t_s_s",
                "t_c_s",
                "t_v_s",
                "t_o_s",
                "min_dram_viable_gb",
                "min_dram_optimal_gb",
                "dataset_gb",
                "bw_viable_cached_gbps",
                "bw_viable_miss_gbps",
                "bw_optimal_cached_gbps",
                "bw_optimal_miss_gbps",
                "verdict",
                "economics_optimal",
            ],
            Self::Simulate => {
                let mut c = vec![
                    "ssd",
                    "block_size_b",
                    "rw",
                    "channel_bw_gbps",
                    "bch_fail_prob",
                    "seed",
                    "warmup_ms",
                    "duration_ms",
                    "model_iops",
                    "sim_to_model",
                ];
                c.extend(RESULT_COLUMNS);
                c.extend(["read_latency_mean_s", "write_latency_mean_s"]);
                c
            }
            Self::CaseKv => vec![
                "dram_capacity_gb",
                "platform",
                "ssd_kind",
                "ratio_or_shape",
                "throughput",
                "bottleneck",
                "ssd",
                "sigma",
                "bucket_b",
                "hit_fraction",
                "host_iops_util",
                "ssd_util",
                "dram_bw_util",
            ],
            Self::CaseAnn => vec![
                "dram_capacity_gb",
                "platform",
                "ssd_kind",
                "ratio_or_shape",
                "throughput",
                "bottleneck",
                "ssd",
                "full_size_b",
                "hit_fraction",
                "host_iops_util",
                "ssd_util",
                "dram_bw_util",
            ],
        }
    }
}

/// Extra per-point output beyond the CSV row.
#[derive(Debug, Clone, Default)]
pub struct Extras {
    pub report: Option<String>,
    pub sim: Option<SimOutput>,
}

fn mode(m: IopsMode) -> &'static str {
    match m {
        IopsMode::Scalable => "scalable",
        IopsMode::FlatAt4k => "flat_at_4k",
    }
}

fn kind(m: IopsMode) -> &'static str {
    match m {
        IopsMode::Scalable => "storage-next",
        IopsMode::FlatAt4k => "normal",
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn opt_us(v: Option<f64>) -> String {
    v.map(|t| num(t / US)).unwrap_or_default()
}

/// Usable per-SSD IOPS and the utilization cap behind it.
fn feasible(doc: &Doc, host_defaults: bool) -> Result<(f64, FeasibleIops, u32, f64), CliError> {
    let ssd = doc.ssd()?;
    let mix = doc.mix()?;
    let peak = ssd_peak_breakdown(&ssd, &mix)?.iops;
    let targets = doc.targets(mix.block_size)?;
    let rho = solve_rho_max(peak, ssd.n_channels, ssd.chip.tau_sense, &targets).map_err(|e| e.within("latency"))?;
    let hs = doc.host(host_defaults)?;
    let f = usable_ssd_iops(rho, peak, hs.host.iops_budget, hs.n_ssd)?;
    Ok((peak, f, hs.n_ssd, hs.host.iops_budget))
}

pub fn evaluate(subject: Subject, doc: &Doc, seed: u64) -> Result<(Vec<String>, Extras), CliError> {
    let mut extras = Extras::default();
    let row = match subject {
        Subject::SsdIops => {
            let ssd = doc.ssd()?;
            let mix = doc.mix()?;
            let p = ssd_peak_breakdown(&ssd, &mix).map_err(|e| e.within("workload"))?;
            let cost = ssd_cost(&ssd).map_err(|e| e.within("ssd"))?;
            vec![
                doc.ssd_name(),
                mode(ssd.iops_mode).into(),
                mix.block_size.to_string(),
                doc.rw_label()?,
                num(mix.write_amp),
                num(p.iops),
                num(p.die_iops),
                num(p.channel_iops),
                match p.limiter {
                    PeakLimiter::Die => "die".into(),
                    PeakLimiter::Channel => "channel".into(),
                },
                p.evaluated_block.to_string(),
                num(cost.total),
            ]
        }
        Subject::BreakEven => {
            let ssd = doc.ssd()?;
            let mix = doc.mix()?;
            let platform = doc.platform()?;
            let (peak, f, n_ssd, budget) = feasible(doc, false)?;
            let be = break_even(&platform, &ssd, &mix, f.usable_iops_per_ssd)?;
            vec![
                platform.label.clone(),
                doc.ssd_name(),
                mode(ssd.iops_mode).into(),
                mix.block_size.to_string(),
                doc.rw_label()?,
                num(mix.write_amp),
                n_ssd.to_string(),
                num(budget),
                doc.latency_label(),
                num(f.rho_max),
                num(peak),
                num(f.usable_iops_per_ssd),
                f.limiter.as_str().into(),
                num(be.processor_term),
                num(be.dram_term),
                num(be.ssd_term),
                num(be.total),
            ]
        }
        Subject::Feasibility => {
            let ssd = doc.ssd()?;
            let mix = doc.mix()?;
            let targets = doc.targets(mix.block_size)?;
            let (peak, f, n_ssd, budget) = feasible(doc, false)?;
            let (mean, tail) = if f.rho_max < 1.0 {
                (
                    num(mean_latency(peak, ssd.n_channels, ssd.chip.tau_sense, f.rho_max)? / US),
                    num(tail_latency(peak, ssd.n_channels, ssd.chip.tau_sense, targets.tail_percentile, f.rho_max)? / US),
                )
            } else {
                ("inf".into(), "inf".into())
            };
            vec![
                doc.ssd_name(),
                mix.block_size.to_string(),
                doc.rw_label()?,
                num(mix.write_amp),
                doc.latency_label(),
                num(targets.tail_percentile),
                opt_us(targets.tail_target),
                opt_us(targets.mean_target),
                num(peak),
                num(f.rho_max),
                mean,
                tail,
                n_ssd.to_string(),
                num(budget),
                num(f.usable_iops_per_ssd),
                f.limiter.as_str().into(),
            ]
        }
        Subject::Provision => {
            let ssd = doc.ssd()?;
            let mix = doc.mix()?;
            let hs = doc.host(true)?;
            let (profile, scale) = doc.profile(mix.block_size, seed)?;
            let mut req = ProvisionRequest::new(hs.host.platform.clone(), ssd, mix);
            req.targets = doc.targets(mix.block_size)?;
            req.host_budget = hs.host.iops_budget;
            req.n_ssd = hs.n_ssd;
            req.dram_bandwidth = hs.host.dram_bandwidth;
            req.dram_capacity = hs.dram_capacity.map(|c| c * scale);
            req.scale = scale;
            let r = provision(&profile, &req)?;
            // report at the size of the workload the profile stands for
            let full = |b: f64| num(b / scale / GB);
            let sigma = doc
                .get("profile.sigma")
                .and_then(|v| v.as_f64())
                .unwrap_or(if doc.get("profile.csv").is_some() { f64::NAN } else { 0.4 });
            extras.report = Some(r.summary());
            vec![
                hs.host.platform.label.clone(),
                doc.ssd_name(),
                mix.block_size.to_string(),
                doc.rw_label()?,
                if sigma.is_nan() { String::new() } else { num(sigma) },
                profile.n_blocks().to_string(),
                num((profile.n_blocks() as f64 / scale).round()),
                doc.latency_label(),
                num(r.peak_iops),
                num(r.feasible.rho_max),
                num(r.feasible.usable_iops_per_ssd),
                r.feasible.limiter.as_str().into(),
                num(r.break_even),
                num(r.t_b),
                num(r.t_s),
                r.t_c.map(num).unwrap_or_default(),
                num(r.t_v),
                num(r.t_o),
                full(r.min_dram_viable),
                full(r.min_dram_optimal),
                full(r.dataset_bytes),
                full(r.bw_viable.cached),
                full(r.bw_viable.miss_path),
                full(r.bw_optimal.cached),
                full(r.bw_optimal.miss_path),
                r.verdict.map(|v| v.as_str().to_string()).unwrap_or_default(),
                r.economics_optimal.map(|b| b.to_string()).unwrap_or_default(),
            ]
        }
        Subject::Simulate => {
            let cfg = doc.sim(seed)?;
            let model = ssd_peak_breakdown(&cfg.ssd, &cfg.mix).map(|p| p.iops).unwrap_or(f64::NAN);
            let out = run_sim_detailed(&cfg)?;
            let r = out.result;
            let rw = match doc.get("sim.rw").and_then(|v| v.as_str()) {
                Some(s) => s.to_string(),
                None => doc.rw_label()?,
            };
            let mut row = vec![
                doc.ssd_name(),
                cfg.mix.block_size.to_string(),
                rw,
                num(cfg.ssd.channel.bandwidth / GB),
                num(cfg.ecc.bch_fail_prob),
                cfg.seed.to_string(),
                num(cfg.warmup / MS),
                num(cfg.duration / MS),
                num(model),
                num(r.achieved_iops / model),
            ];
            row.extend(r.csv_row().split(',').map(str::to_string));
            row.push(num(out.read_latency_mean));
            row.push(num(out.write_latency_mean));
            extras.sim = Some(out);
            row
        }
        Subject::CaseKv => {
            let (cfg, ratio) = doc.kv()?;
            let r = kv_throughput(&cfg).map_err(|e| e.within("kv"))?;
            let mut row = case_head(cfg.dram_capacity, &cfg.host.platform.label, cfg.ssd.iops_mode, ratio, &r);
            row.extend([
                doc.ssd_name(),
                num(cfg.locality_sigma),
                cfg.bucket_block.to_string(),
            ]);
            row.extend(case_tail(&r));
            row
        }
        Subject::CaseAnn => {
            let cfg = doc.ann()?;
            let r = ann_throughput(&cfg).map_err(|e| e.within("ann"))?;
            let shape = format!("{}->{}", cfg.reduced_size, cfg.full_size);
            let mut row = case_head(cfg.dram_capacity, &cfg.host.platform.label, cfg.ssd.iops_mode, shape, &r);
            row.extend([doc.ssd_name(), cfg.full_size.to_string()]);
            row.extend(case_tail(&r));
            row
        }
    };
    debug_assert_eq!(row.len(), subject.columns().len());
    Ok((row, extras))
}

fn case_head(dram: f64, platform: &str, m: IopsMode, shape: String, r: &CaseResult) -> Vec<String> {
    vec![
        num(dram / GB),
        platform.to_string(),
        kind(m).into(),
        shape,
        num(r.throughput),
        r.bottleneck.as_str().into(),
    ]
}

fn case_tail(r: &CaseResult) -> Vec<String> {
    vec![
        num(r.hit_fraction),
        num(r.component_demands.host_iops),
        num(r.component_demands.ssd_iops),
        num(r.component_demands.dram_bandwidth),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(subject: Subject, sets: &[&str]) -> Vec<String> {
        let mut d = Doc::new();
        for s in sets {
            d.set_raw(s).unwrap();
        }
        evaluate(subject, &d, 42).unwrap().0
    }

    fn col(subject: Subject, r: &[String], name: &str) -> f64 {
        let i = subject.columns().iter().position(|c| *c == name).unwrap();
        r[i].parse().unwrap()
    }

    #[test]
    fn rows_match_headers() {
        for s in [Subject::SsdIops, Subject::BreakEven, Subject::Feasibility, Subject::CaseKv, Subject::CaseAnn] {
            assert_eq!(row(s, &[]).len(), s.columns().len(), "{}", s.name());
        }
    }

    #[test]
    fn break_even_default_point() {
        let r = row(Subject::BreakEven, &["platform.preset=cpu-ddr"]);
        let total = col(Subject::BreakEven, &r, "total_s");
        assert!((total - 34.9).abs() < 0.35, "{total}");
        let parts: f64 = ["processor_s", "dram_s", "ssd_s"]
            .iter()
            .map(|c| col(Subject::BreakEven, &r, c))
            .sum();
        assert!((parts - total).abs() < 1e-9 * total);
    }

    #[test]
    fn tier_caps_utilization() {
        let r = row(Subject::Feasibility, &["latency.tier=tier90"]);
        let rho = col(Subject::Feasibility, &r, "rho_max");
        assert!((rho - 0.9).abs() < 0.03, "{rho}");
        let tail = col(Subject::Feasibility, &r, "tail_latency_us");
        assert!(tail <= 13.0 + 1e-6, "{tail}");
    }

    #[test]
    fn infeasible_latency_is_reported_as_such() {
        let mut d = Doc::new();
        d.set_raw("latency.tail_us=1").unwrap();
        let e = evaluate(Subject::Feasibility, &d, 42).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.param().starts_with("latency."), "{}", e.param());
    }
}
