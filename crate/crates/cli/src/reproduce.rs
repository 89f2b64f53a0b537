//! Built-in sweeps behind `tierline reproduce <figure>`.

use serde_json::Value;

use crate::doc::Axis;
use crate::subjects::Subject;

pub struct Panel {
    pub name: &'static str,
    pub base: Vec<(&'static str, Value)>,
    pub axes: Vec<Axis>,
}

pub struct Figure {
    pub name: &'static str,
    pub about: &'static str,
    pub subject: Subject,
    pub panels: Vec<Panel>,
}

pub const FIGURES: [&str; 10] = [
    "fig3", "fig4", "fig5", "fig7", "fig8a", "fig8b", "fig8c", "fig8d", "fig9", "fig10",
];

const BLOCKS: [u64; 4] = [512, 1024, 2048, 4096];
const DRAM_GB: [f64; 8] = [32.0, 64.0, 128.0, 256.0, 512.0, 1024.0, 2048.0, 4096.0];

/// Simulated window long enough for two million completions at 34M IOPS.
const SIM_DURATION_MS: f64 = 64.0;
const SIM_WARMUP_MS: f64 = 12.8;

fn strs(v: &[&str]) -> Vec<Value> {
    v.iter().map(|s| Value::from(*s)).collect()
}

fn nums<T: Into<Value> + Copy>(v: &[T]) -> Vec<Value> {
    v.iter().map(|x| (*x).into()).collect()
}

fn blocks() -> Axis {
    Axis::new("workload.block_size_b", nums(&BLOCKS))
}

fn sim_base(extra: &[(&'static str, Value)]) -> Vec<(&'static str, Value)> {
    let mut b = vec![
        ("ssd.preset", Value::from("slc")),
        ("workload.rw", Value::from("90:10")),
        ("workload.write_amp", Value::from(3.0)),
        ("workload.block_size_b", Value::from(512)),
        ("sim.duration_ms", Value::from(SIM_DURATION_MS)),
        ("sim.warmup_ms", Value::from(SIM_WARMUP_MS)),
    ];
    b.extend(extra.iter().cloned());
    b
}

fn sim_figure(name: &'static str, about: &'static str, axis: Axis) -> Figure {
    Figure {
        name,
        about,
        subject: Subject::Simulate,
        panels: vec![Panel {
            name: "a",
            base: sim_base(&[]),
            axes: vec![axis],
        }],
    }
}

pub fn figure(name: &str) -> Option<Figure> {
    let f = match name {
        "fig3" => Figure {
            name: "fig3",
            about: "peak SSD IOPS by NAND type and block size at 90:10",
            subject: Subject::SsdIops,
            panels: vec![Panel {
                name: "a",
                base: vec![("workload.rw", "90:10".into()), ("workload.write_amp", 3.0.into())],
                axes: vec![Axis::new("ssd.preset", strs(&["slc", "pslc", "tlc"])), blocks()],
            }],
        },
        "fig4" => Figure {
            name: "fig4",
            about: "unconstrained break-even split, Normal and Storage-Next SSDs",
            subject: Subject::BreakEven,
            panels: ["cpu-ddr", "gpu-gddr"]
                .into_iter()
                .map(|p| Panel {
                    name: p,
                    base: vec![
                        ("platform.preset", p.into()),
                        ("workload.rw", "90:10".into()),
                        ("workload.write_amp", 3.0.into()),
                    ],
                    axes: vec![
                        Axis::new(
                            "ssd.preset",
                            strs(&["slc-normal", "slc", "pslc-normal", "pslc", "tlc-normal", "tlc"]),
                        ),
                        blocks(),
                    ],
                })
                .collect(),
        },
        "fig5" => {
            let panel = |name, platform: &str, axis: Axis, extra: Vec<(&'static str, Value)>| {
                let mut base = vec![
                    ("platform.preset", Value::from(platform)),
                    ("ssd.preset", "slc".into()),
                    ("workload.rw", "90:10".into()),
                    ("workload.write_amp", 3.0.into()),
                    ("host.n_ssd", 4.into()),
                ];
                base.extend(extra);
                Panel {
                    name,
                    base,
                    axes: vec![axis, blocks()],
                }
            };
            let tiers = || Axis::new("latency.tier", strs(&["tier70", "tier80", "tier90", "tier99"]));
            Figure {
                name: "fig5",
                about: "break-even under host IOPS budgets (a, b) and p99 tiers (c, d), four SSDs",
                subject: Subject::BreakEven,
                panels: vec![
                    panel("a", "cpu-ddr", Axis::new("host.iops_budget", nums(&[40e6, 60e6, 80e6, 100e6])), vec![]),
                    panel("b", "gpu-gddr", Axis::new("host.iops_budget", nums(&[160e6, 240e6, 320e6, 400e6])), vec![]),
                    panel("c", "cpu-ddr", tiers(), vec![("host.iops_budget", 100e6.into())]),
                    panel("d", "gpu-gddr", tiers(), vec![("host.iops_budget", 400e6.into())]),
                ],
            }
        }
        "fig7" => Figure {
            name: "fig7",
            about: "viable and economics-optimal DRAM on a lognormal profile scaled from 1e9 blocks at 200 GB/s",
            subject: Subject::Provision,
            panels: ["cpu-ddr", "gpu-gddr"]
                .into_iter()
                .map(|p| Panel {
                    name: p,
                    base: vec![
                        ("platform.preset", p.into()),
                        ("workload.rw", "90:10".into()),
                        ("workload.write_amp", 3.0.into()),
                        ("latency.tier", "tier90".into()),
                        ("profile.n_blocks", 1e6.into()),
                        ("profile.workload_blocks", 1e9.into()),
                        ("profile.sigma", 0.4.into()),
                        ("profile.throughput_gbps", 200.0.into()),
                    ],
                    axes: vec![Axis::new("ssd.preset", strs(&["slc-normal", "slc"])), blocks()],
                })
                .collect(),
        },
        "fig8a" => sim_figure("fig8a", "simulated versus modeled IOPS by block size at 90:10", blocks()),
        "fig8b" => sim_figure(
            "fig8b",
            "simulated IOPS by read:write mix at 512 B",
            Axis::new("workload.rw", strs(&["100:0", "90:10", "70:30", "50:50"])),
        ),
        "fig8c" => sim_figure(
            "fig8c",
            "simulated IOPS by channel bandwidth at 512 B, 90:10",
            Axis::new("ssd.channel_bw_gbps", nums(&[3.6, 4.8, 5.6])),
        ),
        "fig8d" => sim_figure(
            "fig8d",
            "simulated IOPS by BCH failure probability at 512 B, 90:10",
            Axis::new("sim.bch_fail_prob", nums(&[0.0, 0.001, 0.01, 0.1])),
        ),
        "fig9" => Figure {
            name: "fig9",
            about: "blocked-Cuckoo KV throughput against DRAM capacity",
            subject: Subject::CaseKv,
            panels: vec![Panel {
                name: "a",
                base: vec![],
                axes: vec![
                    Axis::new("platform.preset", strs(&["cpu-ddr", "gpu-gddr"])),
                    Axis::new("ssd.preset", strs(&["slc", "slc-normal"])),
                    Axis::new("kv.sigma", nums(&[1.2, 0.4])),
                    Axis::new("kv.get_put", strs(&["100:0", "90:10", "70:30", "50:50"])),
                    Axis::new("kv.dram_gb", nums(&DRAM_GB)),
                ],
            }],
        },
        "fig10" => Figure {
            name: "fig10",
            about: "two-stage ANN query throughput against DRAM capacity",
            subject: Subject::CaseAnn,
            panels: vec![Panel {
                name: "a",
                base: vec![],
                axes: vec![
                    Axis::new("platform.preset", strs(&["cpu-ddr", "gpu-gddr"])),
                    Axis::new("ssd.preset", strs(&["slc", "slc-normal"])),
                    Axis::new("ann.full_size_b", nums(&[2048u64, 4096, 6144, 8192])),
                    Axis::new("ann.dram_gb", nums(&DRAM_GB)),
                ],
            }],
        },
        _ => return None,
    };
    Some(f)
}
