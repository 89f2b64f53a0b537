//! Command-line front end: layered configs, sweeps and CSV output.

pub mod doc;
pub mod error;
pub mod output;
pub mod reproduce;
pub mod subjects;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use doc::{expand, Axis, Doc};
use error::CliError;
use output::{CsvSink, TextSink};
use subjects::{evaluate, Subject};

#[derive(Debug, Parser)]
#[command(name = "tierline", version, about = "DRAM/flash placement models, SSD simulator and figure data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Peak host IOPS and normalized cost of an SSD.
    SsdIops(Common),
    /// Break-even cache interval and its processor/DRAM/SSD split.
    BreakEven(Common),
    /// Admissible utilization and usable IOPS under latency targets.
    Feasibility(Common),
    /// Viability thresholds and minimum DRAM for an access profile.
    Provision {
        #[command(flatten)]
        common: Common,
        /// Write the human-readable report here (`-` for stdout).
        #[arg(long, value_name = "PATH")]
        report: Option<PathBuf>,
    },
    /// Run the discrete-event SSD simulator.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Write per-percentile read/write latency CSV here.
        #[arg(long, value_name = "PATH")]
        percentiles: Option<PathBuf>,
    },
    /// Blocked-Cuckoo KV store throughput.
    CaseKv(Common),
    /// Two-stage ANN search throughput.
    CaseAnn(Common),
    /// Run the built-in sweep behind one figure.
    Reproduce {
        /// One of fig3, fig4, fig5, fig7, fig8a, fig8b, fig8c, fig8d, fig9, fig10; `list` shows them.
        figure: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// JSON document layered over the built-in defaults.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override one parameter, e.g. `ssd.channel_bw_gbps=4.8`. Repeatable.
    #[arg(long = "set", value_name = "PATH=VALUE")]
    pub sets: Vec<String>,
    /// Sweep one parameter over a list, e.g. `workload.block_size_b=512,4096`.
    /// Repeat for a cartesian product; the first axis varies slowest.
    #[arg(long = "sweep", value_name = "PATH=V1,V2,..")]
    pub sweeps: Vec<String>,
    /// CSV destination; stdout when absent.
    #[arg(long, short, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Seed for profile generation and simulation.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// SSD preset (slc, pslc, tlc, optionally suffixed -normal). Same as `--set ssd.preset=`.
    #[arg(long)]
    pub ssd: Option<String>,
    /// Host platform preset (cpu-ddr, gpu-gddr).
    #[arg(long)]
    pub platform: Option<String>,
    /// Block size in bytes.
    #[arg(long)]
    pub block: Option<u64>,
    /// Host read:write ratio, e.g. 90:10 or 100:0.
    #[arg(long)]
    pub rw: Option<String>,
    /// Write amplification.
    #[arg(long)]
    pub waf: Option<f64>,
    /// p99 latency tier (tier70, tier80, tier90, tier99).
    #[arg(long)]
    pub tier: Option<String>,
    /// Host IOPS budget across all SSDs.
    #[arg(long)]
    pub budget: Option<f64>,
}

impl Common {
    /// Layer file, then shorthand flags, then `--set` over `doc`.
    fn layer(&self, doc: &mut Doc) -> Result<(), CliError> {
        if let Some(path) = &self.config {
            let shown = path.display().to_string();
            let text =
                std::fs::read_to_string(path).map_err(|e| CliError::input("config", format!("cannot read {shown}: {e}")))?;
            doc.merge_json(&text, &shown)?;
        }
        let shorthands: [(&str, Option<Value>); 7] = [
            ("ssd.preset", self.ssd.clone().map(Value::from)),
            ("platform.preset", self.platform.clone().map(Value::from)),
            ("workload.block_size_b", self.block.map(Value::from)),
            ("workload.rw", self.rw.clone().map(Value::from)),
            ("workload.write_amp", self.waf.map(Value::from)),
            ("latency.tier", self.tier.clone().map(Value::from)),
            ("host.iops_budget", self.budget.map(Value::from)),
        ];
        for (path, v) in shorthands {
            if let Some(v) = v {
                doc.set(path, v)?;
            }
        }
        for s in &self.sets {
            doc.set_raw(s)?;
        }
        Ok(())
    }

    fn axes(&self) -> Result<Vec<Axis>, CliError> {
        self.sweeps.iter().map(|s| Axis::parse(s)).collect()
    }
}

/// Evaluate every point of a sweep, in sweep order.
fn run_points(
    subject: Subject,
    base: &Doc,
    axes: &[Axis],
    seed: u64,
    mut each: impl FnMut(usize, &[Value], Vec<String>, subjects::Extras) -> Result<(), CliError>,
) -> Result<(), CliError> {
    for (i, (doc, coords)) in expand(base, axes)?.into_iter().enumerate() {
        let (row, extras) = evaluate(subject, &doc, seed)?;
        each(i, &coords, row, extras)?;
    }
    Ok(())
}

fn axis_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn run_subject(
    subject: Subject,
    common: &Common,
    report: Option<&PathBuf>,
    percentiles: Option<&PathBuf>,
) -> Result<(), CliError> {
    let mut base = Doc::new();
    common.layer(&mut base)?;
    let axes = common.axes()?;
    let mut header: Vec<String> = axes.iter().map(|a| a.path.clone()).collect();
    header.extend(subject.columns().iter().map(|c| c.to_string()));
    let mut csv = CsvSink::open(common.out.as_ref(), subject.name(), &header)?;
    let mut text = report.map(TextSink::open).transpose()?;
    let mut pct = match percentiles {
        Some(p) => {
            let cols = ["point", "percentile", "latency_s"].map(String::from);
            Some(CsvSink::open(Some(p), "simulate_percentiles", &cols)?)
        }
        None => None,
    };
    run_points(subject, &base, &axes, common.seed, |i, coords, row, extras| {
        let mut cells: Vec<String> = coords.iter().map(axis_cell).collect();
        cells.extend(row);
        csv.row(&cells)?;
        if let (Some(t), Some(r)) = (text.as_mut(), extras.report) {
            t.point(i, coords, &axes, &r)?;
        }
        if let (Some(p), Some(sim)) = (pct.as_mut(), extras.sim) {
            for (q, v) in &sim.latency_percentiles {
                p.row(&[i.to_string(), q.to_string(), v.to_string()])?;
            }
        }
        Ok(())
    })?;
    csv.finish()?;
    if let Some(t) = text {
        t.finish()?;
    }
    if let Some(p) = pct {
        p.finish()?;
    }
    Ok(())
}

fn run_reproduce(name: &str, common: &Common) -> Result<(), CliError> {
    if name == "list" {
        for f in reproduce::FIGURES {
            let fig = reproduce::figure(f).expect("listed figure");
            println!("{:6} {:12} {}", fig.name, fig.subject.name(), fig.about);
        }
        return Ok(());
    }
    let fig = reproduce::figure(name).ok_or_else(|| {
        CliError::input(
            "figure",
            format!("unknown figure `{name}` (expected one of {})", reproduce::FIGURES.join(", ")),
        )
    })?;
    let mut header = vec!["panel".to_string()];
    header.extend(fig.subject.columns().iter().map(|c| c.to_string()));
    let mut csv = CsvSink::open(common.out.as_ref(), fig.subject.name(), &header)?;
    for panel in &fig.panels {
        let mut base = Doc::new();
        for (k, v) in &panel.base {
            base.set(k, v.clone())?;
        }
        common.layer(&mut base)?;
        let mut axes = panel.axes.clone();
        axes.extend(common.axes()?);
        run_points(fig.subject, &base, &axes, common.seed, |_, _, row, _| {
            let mut cells = vec![panel.name.to_string()];
            cells.extend(row);
            csv.row(&cells)
        })?;
    }
    csv.finish()
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::SsdIops(c) => run_subject(Subject::SsdIops, c, None, None),
        Command::BreakEven(c) => run_subject(Subject::BreakEven, c, None, None),
        Command::Feasibility(c) => run_subject(Subject::Feasibility, c, None, None),
        Command::Provision { common, report } => run_subject(Subject::Provision, common, report.as_ref(), None),
        Command::Simulate { common, percentiles } => {
            run_subject(Subject::Simulate, common, None, percentiles.as_ref())
        }
        Command::CaseKv(c) => run_subject(Subject::CaseKv, c, None, None),
        Command::CaseAnn(c) => run_subject(Subject::CaseAnn, c, None, None),
        Command::Reproduce { figure, common } => run_reproduce(figure, common),
    }
}
