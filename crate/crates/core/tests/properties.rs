use proptest::prelude::*;

use tierline_core::cases::{ann_throughput, kv_throughput, lognormal_hit_fraction, AnnConfig, Host, KvConfig};
use tierline_core::device::{ssd_peak_breakdown, ssd_peak_iops, SsdConfig, WorkloadMix, STANDARD_BLOCK_SIZES};
use tierline_core::econ::{break_even, HostPlatform};
use tierline_core::feasibility::{solve_rho_max, usable_ssd_iops, LatencyTargets, TIERS};
use tierline_core::profile::AccessProfile;
use tierline_core::provision::{provision, ProvisionRequest, Verdict};
use tierline_core::units::GB;

fn preset() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec!["slc", "pslc", "tlc", "slc-normal", "tlc-normal"])
}

fn block() -> impl Strategy<Value = u64> {
    prop::sample::select(STANDARD_BLOCK_SIZES.to_vec())
}

fn mix() -> impl Strategy<Value = WorkloadMix> {
    (1.0f64..20.0, 1.0f64..5.0, block()).prop_map(|(g, phi, b)| WorkloadMix::new(g, phi, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn peak_scales_linearly_with_channels(name in preset(), m in mix(), n in 1u32..64) {
        let mut ssd = SsdConfig::preset(name).unwrap();
        ssd.n_channels = 1;
        let one = ssd_peak_iops(&ssd, &m).unwrap();
        ssd.n_channels = n;
        let many = ssd_peak_iops(&ssd, &m).unwrap();
        prop_assert!((many / one - n as f64).abs() < 1e-9 * n as f64);
    }

    #[test]
    fn slower_sensing_never_raises_peak(name in preset(), m in mix(), k in 1.0f64..10.0) {
        let ssd = SsdConfig::preset(name).unwrap();
        let mut slow = ssd.clone();
        slow.chip.tau_sense *= k;
        prop_assert!(ssd_peak_iops(&slow, &m).unwrap() <= ssd_peak_iops(&ssd, &m).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn peak_is_positive_and_finite(name in preset(), m in mix()) {
        let p = ssd_peak_breakdown(&SsdConfig::preset(name).unwrap(), &m).unwrap();
        prop_assert!(p.iops > 0.0 && p.iops.is_finite());
    }

    #[test]
    fn break_even_split_sums_and_falls_with_iops(
        name in preset(),
        m in mix(),
        gpu in any::<bool>(),
        iops in 1e5f64..1e8,
        k in 1.0f64..10.0,
    ) {
        let platform = if gpu { HostPlatform::gpu_gddr() } else { HostPlatform::cpu_ddr() };
        let ssd = SsdConfig::preset(name).unwrap();
        let a = break_even(&platform, &ssd, &m, iops).unwrap();
        let b = break_even(&platform, &ssd, &m, iops * k).unwrap();
        prop_assert!((a.processor_term + a.dram_term + a.ssd_term - a.total).abs() <= 1e-12 * a.total);
        prop_assert!(a.total > 0.0);
        prop_assert!(b.total <= a.total);
        prop_assert!(b.processor_term == a.processor_term && b.dram_term == a.dram_term);
    }

    #[test]
    fn usable_iops_respects_every_limit(
        m in mix(),
        tier_ix in 0usize..4,
        budget in 1e6f64..1e9,
        n_ssd in 1u32..16,
    ) {
        let ssd = SsdConfig::preset("slc").unwrap();
        let peak = ssd_peak_iops(&ssd, &m).unwrap();
        let t = LatencyTargets::tier(TIERS[tier_ix].name, m.block_size).unwrap();
        let rho = solve_rho_max(peak, ssd.n_channels, ssd.chip.tau_sense, &t).unwrap();
        prop_assert!(rho > 0.0 && rho < 1.0);
        let f = usable_ssd_iops(rho, peak, budget, n_ssd).unwrap();
        prop_assert!(f.usable_iops_per_ssd <= rho * peak * (1.0 + 1e-12));
        prop_assert!(f.usable_iops_per_ssd <= budget / n_ssd as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn profile_traffic_moves_from_ssd_to_dram(sigma in 0.1f64..2.0, seed in 0u64..1000, n in 1000u64..50_000) {
        let p = AccessProfile::lognormal(n, sigma, 1e9, 512, seed).unwrap();
        let total = p.total_throughput();
        let mut last_cached = -1.0;
        let mut last_bw = f64::INFINITY;
        for b in p.bins() {
            let (cached, uncached) = p.psi_split(b.interval);
            prop_assert!(((cached + uncached) / total - 1.0).abs() < 1e-9);
            prop_assert!(cached >= last_cached);
            let bw = p.dram_bw_demand(b.interval);
            prop_assert!(bw <= last_bw * (1.0 + 1e-12));
            last_cached = cached;
            last_bw = bw;
        }
        prop_assert!((p.cached_bytes(p.max_interval()) - p.dataset_bytes()).abs() < 1e-6 * p.dataset_bytes());
    }

    #[test]
    fn provisioning_report_is_consistent(
        sigma in 0.2f64..1.5,
        seed in 0u64..100,
        b in block(),
        gpu in any::<bool>(),
        cap_frac in 0.01f64..1.5,
    ) {
        let (platform, host) = if gpu { (HostPlatform::gpu_gddr(), Host::gpu()) } else { (HostPlatform::cpu_ddr(), Host::cpu()) };
        let scale = 1e-4;
        let p = AccessProfile::lognormal(100_000, sigma, 200e9 * scale, b, seed).unwrap();
        let mut req = ProvisionRequest::new(platform, SsdConfig::preset("slc").unwrap(), WorkloadMix::new(9.0, 3.0, b));
        req.host_budget = host.iops_budget;
        req.dram_bandwidth = host.dram_bandwidth;
        req.scale = scale;
        req.dram_capacity = Some(cap_frac * p.dataset_bytes());
        let r = provision(&p, &req).unwrap();
        prop_assert!(r.min_dram_viable <= r.min_dram_optimal + 1e-9);
        prop_assert!(r.min_dram_optimal <= r.dataset_bytes + 1e-9);
        prop_assert!(r.t_v == r.t_b.max(r.t_s));
        let viable = r.verdict == Some(Verdict::Viable);
        prop_assert_eq!(viable, r.t_v <= r.t_c.unwrap());
    }

    #[test]
    fn hit_fraction_grows_with_cache_and_locality(f in 0.0f64..1.0, df in 0.0f64..0.5, sigma in 0.1f64..2.0, ds in 0.0f64..1.0) {
        let h = lognormal_hit_fraction(f, sigma);
        prop_assert!((0.0..=1.0).contains(&h));
        prop_assert!(h >= f - 1e-12);
        prop_assert!(lognormal_hit_fraction((f + df).min(1.0), sigma) >= h - 1e-12);
        prop_assert!(lognormal_hit_fraction(f, sigma + ds) >= h - 1e-12);
    }

    #[test]
    fn kv_throughput_never_falls_with_more_dram_or_locality(
        gpu in any::<bool>(),
        normal in any::<bool>(),
        get in prop::sample::select(vec![1.0, 0.9, 0.7, 0.5]),
        sigma in 0.2f64..1.5,
        dram_gb in 16.0f64..2048.0,
    ) {
        let host = if gpu { Host::gpu() } else { Host::cpu() };
        let ssd = SsdConfig::preset(if normal { "slc-normal" } else { "slc" }).unwrap();
        let mut cfg = KvConfig::new(host, ssd, if normal { 4096 } else { 512 });
        cfg.get_fraction = get;
        cfg.locality_sigma = sigma;
        cfg.dram_capacity = dram_gb * GB;
        let base = kv_throughput(&cfg).unwrap().throughput;
        let mut more = cfg.clone();
        more.dram_capacity *= 2.0;
        prop_assert!(kv_throughput(&more).unwrap().throughput >= base * (1.0 - 1e-12));
        let mut hotter = cfg.clone();
        hotter.locality_sigma += 0.3;
        prop_assert!(kv_throughput(&hotter).unwrap().throughput >= base * (1.0 - 1e-12));
    }

    #[test]
    fn ann_throughput_never_falls_with_more_dram(
        gpu in any::<bool>(),
        full in prop::sample::select(vec![2048u64, 4096, 6144, 8192]),
        dram_gb in 16.0f64..2048.0,
    ) {
        let host = if gpu { Host::gpu() } else { Host::cpu() };
        let mut cfg = AnnConfig::new(host, SsdConfig::preset("slc").unwrap(), full);
        cfg.dram_capacity = dram_gb * GB;
        let base = ann_throughput(&cfg).unwrap().throughput;
        cfg.dram_capacity *= 2.0;
        prop_assert!(ann_throughput(&cfg).unwrap().throughput >= base * (1.0 - 1e-12));
    }
}
