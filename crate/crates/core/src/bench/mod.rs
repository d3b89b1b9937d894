//! Runs applications under an execution configuration with resource
//! sampling, and compares the default configuration against the
//! self-configured one over synthetic graphs.

mod sampler;
mod scenario;
mod synth;

use std::io::Write;
use std::time::{Duration, Instant};

use serde::Serialize;

pub use scenario::{BenchScenario, Mode, MIN_REPETITIONS};
pub use synth::{generate_synthetic_graph, GraphKind};

use crate::gbdt::Classifier;
use crate::graph::{write_edge_list, Engine, Graph};
use crate::linkpred::{run_app, AppKind, AppOutput, AppParams};
use crate::scf::{collect_builtin_sized, decide, host_cores, ClusterSpec, ExecConfig, RuntimeSettings, UpperBounds};
use crate::{Error, Real, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunMetrics {
    pub wall_time_ms: f64,
    /// Mean process CPU utilization over the samples, 0 to 100.
    pub cpu_pct: f64,
    /// Peak accounted engine memory relative to the budget.
    pub mem_pct: f64,
    /// Messages delivered at barriers over messages sent.
    pub pdr: f64,
    /// `cpu_pct + mem_pct + 100 * pdr`.
    pub utilization_rate: f64,
    pub peak_bytes: usize,
    pub messages_sent: u64,
    pub workers: usize,
    pub partitions: usize,
}

impl RunMetrics {
    pub fn utilization(cpu_pct: f64, mem_pct: f64, pdr: f64) -> f64 {
        cpu_pct + mem_pct + 100.0 * pdr
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExecOptions {
    pub sample_ms: u64,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions { sample_ms: 100 }
    }
}

const MB: usize = 1 << 20;

/// Framework defaults: one single-core executor per node with 1 GB heap,
/// a 1 GB driver and one partition per executor. Heaps are capped by the
/// node and master memory so the configuration always fits.
pub fn default_config(cluster: &ClusterSpec) -> ExecConfig {
    let b = UpperBounds::default();
    let overhead = |raw: u64, ratio: f64| b.moc.max((ratio * raw as f64).round() as u64);
    let mpe = 1024.min(cluster.wmn);
    let dm = 1024.min(cluster.mm);
    ExecConfig {
        dc: 1,
        odm: overhead(dm, b.orc),
        dm,
        ti: cluster.wn,
        ompe: overhead(mpe, b.orm),
        mpe,
        ec: 1,
        parallelism: cluster.wn,
        epn: 1,
    }
}

/// Total executor heap of `cfg`; the engine's accounting budget.
pub fn memory_budget_bytes(cfg: &ExecConfig) -> usize {
    usize::try_from(cfg.ti * cfg.mpe)
        .ok()
        .and_then(|mb| mb.checked_mul(MB))
        .unwrap_or(usize::MAX)
}

/// Runs `app` on an engine sized from `cfg`, sampling CPU at
/// `opts.sample_ms`. Fails with `InsufficientMemory` when accounted memory
/// passes 1.5 times the executor heap.
pub fn execute_app<T: Real>(
    app: AppKind,
    graph: &Graph,
    cfg: &ExecConfig,
    params: &AppParams<T>,
    opts: &ExecOptions,
) -> Result<(AppOutput<T>, RunMetrics)> {
    let runtime = RuntimeSettings::for_config(cfg, host_cores());
    let budget = memory_budget_bytes(cfg);
    let engine = Engine::new(runtime.engine_config(Some(budget)))?;

    let sampler = sampler::CpuSampler::start(Duration::from_millis(opts.sample_ms.max(1)), host_cores());
    let start = Instant::now();
    let result = run_app(&engine, graph, app, params);
    let wall = start.elapsed();
    let cpu_pct = sampler.finish();
    let output = result?;

    let totals = engine.totals();
    let pdr = if totals.messages_sent == 0 {
        1.0
    } else {
        totals.messages_delivered as f64 / totals.messages_sent as f64
    };
    let mem_pct = totals.peak_bytes as f64 / budget as f64 * 100.0;
    Ok((
        output,
        RunMetrics {
            wall_time_ms: wall.as_secs_f64() * 1e3,
            cpu_pct,
            mem_pct,
            pdr,
            utilization_rate: RunMetrics::utilization(cpu_pct, mem_pct, pdr),
            peak_bytes: totals.peak_bytes,
            messages_sent: totals.messages_sent,
            workers: runtime.workers,
            partitions: runtime.partitions,
        },
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub app: AppKind,
    pub mode: Mode,
    pub edges: usize,
    pub memory_mb: u64,
    pub config: ExecConfig,
    /// The repetition with the median wall time.
    pub metrics: RunMetrics,
    /// Wall time saved against the default row of the same size, percent.
    /// Zero on default rows.
    pub improvement_pct: f64,
}

/// `(t_default - t_scf) / t_default` as a percentage.
pub fn improvement_pct(t_default: f64, t_scf: f64) -> f64 {
    (t_default - t_scf) / t_default * 100.0
}

struct ByteCount(u64);

impl Write for ByteCount {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.0 += buf.len() as u64;
        Ok(buf.len())
    }
    fn flush(&mut self) -> std::io::Result<()> {
        Ok(())
    }
}

/// Size of the graph as an edge-list file.
pub fn edge_list_bytes(graph: &Graph) -> u64 {
    let mut count = ByteCount(0);
    write_edge_list(graph, &mut count).expect("counting never fails");
    count.0
}

/// Configuration a mode runs with on `graph`.
pub fn mode_config<C: Classifier + ?Sized>(
    mode: Mode,
    app: AppKind,
    graph: &Graph,
    cluster: &ClusterSpec,
    model: &C,
    bounds: &UpperBounds,
) -> Result<ExecConfig> {
    match mode {
        Mode::Default => Ok(default_config(cluster)),
        Mode::Scf => {
            let (_, features) = collect_builtin_sized(app, edge_list_bytes(graph), cluster)?;
            decide(&features, model, bounds, cluster)
        }
    }
}

/// One row per edge count and mode. Repetitions of the modes are
/// interleaved, and every run must produce the same application output.
pub fn bench_compare<C: Classifier + ?Sized>(
    scenario: &BenchScenario,
    cluster: &ClusterSpec,
    model: &C,
    bounds: &UpperBounds,
    opts: &ExecOptions,
) -> Result<Vec<BenchRow>> {
    scenario.validate()?;
    let cluster = ClusterSpec {
        wmn: scenario.memory_budget_mb,
        ..*cluster
    };
    cluster.validate()?;
    let params = AppParams::<f64> {
        seed: scenario.seed,
        ..AppParams::default()
    };

    let mut rows = Vec::new();
    for &edges in &scenario.edge_counts {
        let graph = generate_synthetic_graph(scenario.vertices_for(edges), edges, scenario.kind, scenario.seed)?;
        let configs = scenario
            .modes
            .iter()
            .map(|&m| mode_config(m, scenario.app, &graph, &cluster, model, bounds))
            .collect::<Result<Vec<_>>>()?;

        let mut runs: Vec<Vec<RunMetrics>> = vec![Vec::new(); configs.len()];
        let mut reference: Option<String> = None;
        for _ in 0..scenario.repetitions {
            for (i, cfg) in configs.iter().enumerate() {
                let (output, metrics) = execute_app(scenario.app, &graph, cfg, &params, opts)?;
                let listing = output.listing(&graph);
                match &reference {
                    None => reference = Some(listing),
                    Some(r) if *r != listing => {
                        return Err(Error::invalid(format!(
                            "{} output changed between runs at {edges} edges",
                            scenario.app
                        )))
                    }
                    Some(_) => {}
                }
                runs[i].push(metrics);
            }
        }

        let medians: Vec<RunMetrics> = runs
            .into_iter()
            .map(|mut r| {
                r.sort_by(|a, b| a.wall_time_ms.total_cmp(&b.wall_time_ms));
                r[(r.len() - 1) / 2]
            })
            .collect();
        let t_default = scenario
            .modes
            .iter()
            .position(|&m| m == Mode::Default)
            .map(|i| medians[i].wall_time_ms);
        for ((&mode, cfg), metrics) in scenario.modes.iter().zip(configs).zip(medians) {
            let improvement = match (mode, t_default) {
                (Mode::Scf, Some(t)) => improvement_pct(t, metrics.wall_time_ms),
                _ => 0.0,
            };
            rows.push(BenchRow {
                app: scenario.app,
                mode,
                edges,
                memory_mb: scenario.memory_budget_mb,
                config: cfg,
                metrics,
                improvement_pct: improvement,
            });
        }
    }
    Ok(rows)
}

#[derive(Serialize)]
struct CsvRow {
    app: String,
    mode: String,
    edges: usize,
    memory_mb: u64,
    wall_ms: f64,
    cpu_pct: f64,
    mem_pct: f64,
    pdr: f64,
    util_rate: f64,
    improvement_pct: f64,
}

/// CSV with header
/// `app,mode,edges,memory_mb,wall_ms,cpu_pct,mem_pct,pdr,util_rate,improvement_pct`.
pub fn write_report<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(CsvRow {
            app: r.app.to_string(),
            mode: r.mode.to_string(),
            edges: r.edges,
            memory_mb: r.memory_mb,
            wall_ms: r.metrics.wall_time_ms,
            cpu_pct: r.metrics.cpu_pct,
            mem_pct: r.metrics.mem_pct,
            pdr: r.metrics.pdr,
            util_rate: r.metrics.utilization_rate,
            improvement_pct: r.improvement_pct,
        })?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
