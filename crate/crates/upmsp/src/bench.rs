//! Experiment orchestration: replicated runs over instance suites,
//! summary statistics, deviation metrics against the lower bound and the
//! FA control, and CSV/SVG/JSON export.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bounds;
use crate::engine::{self, Algorithm, AlgorithmConfig, ConfigError, RunResult};
use crate::instance::{GeneratorSpec, Instance, ParseError, Time};

/// Percent deviation of a makespan above the lower bound.
pub fn rho(cmax: f64, lb: f64) -> Result<f64, MetricError> {
    if lb.is_nan() || lb <= 0.0 {
        return Err(MetricError::DegenerateBound(lb));
    }
    Ok((cmax - lb) / lb * 100.0)
}

/// Percent deviation of a makespan from the control algorithm's makespan;
/// positive means worse than the control.
pub fn delta(cmax_other: f64, cmax_control: f64) -> Result<f64, MetricError> {
    if cmax_control.is_nan() || cmax_control <= 0.0 {
        return Err(MetricError::DegenerateControl(cmax_control));
    }
    Ok((cmax_other - cmax_control) / cmax_control * 100.0)
}

/// Undefined deviation metric input.
#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("degenerate bound: the lower bound must be positive, got {0}")]
    DegenerateBound(f64),
    #[error("degenerate control: the control makespan must be positive, got {0}")]
    DegenerateControl(f64),
}

/// One algorithm column of an experiment: a display label (unique within
/// the experiment; used in CSVs and file names) plus the full config.
/// The config's seed field is overridden per replication.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmEntry {
    pub label: String,
    pub config: AlgorithmConfig,
}

impl AlgorithmEntry {
    pub fn new(label: impl Into<String>, config: AlgorithmConfig) -> Self {
        Self {
            label: label.into(),
            config,
        }
    }

    /// Entry labeled with the algorithm's own name.
    pub fn plain(config: AlgorithmConfig) -> Self {
        Self {
            label: config.algorithm.name().to_string(),
            config,
        }
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    Generated(GeneratorSpec),
    File(PathBuf),
    Inline(Instance),
}

/// A full experiment: every algorithm entry runs `replications` times on
/// every instance, with run seeds `seed_base + replication`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub instances: Vec<InstanceSource>,
    pub algorithms: Vec<AlgorithmEntry>,
    pub replications: u32,
    pub seed_base: u64,
}

/// Anything that can stop an experiment before it runs.
#[derive(Debug, Error)]
pub enum BenchError {
    #[error("experiment needs at least one {0}")]
    Empty(&'static str),
    #[error("replications must be at least 1")]
    NoReplications,
    #[error("duplicate algorithm label `{0}`")]
    DuplicateLabel(String),
    #[error("duplicate instance id `{0}`")]
    DuplicateInstance(String),
    #[error("invalid configuration for `{label}`: {source}")]
    BadConfig { label: String, source: ConfigError },
    #[error("cannot read `{path}`: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot parse `{path}`: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

/// One run's exportable facts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub instance_id: String,
    pub label: String,
    pub replication: u32,
    pub seed: u64,
    pub best_cmax: Time,
    pub evaluations: u64,
    pub wall_ms: u64,
    pub lb: f64,
    pub rho_pct: Option<f64>,
    /// Best-so-far trajectory as (evaluations, makespan) pairs.
    pub trace: Vec<(u64, Time)>,
}

/// Replication statistics of one (instance, algorithm) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellStatistics {
    pub mean: f64,
    pub best: Time,
    pub worst: Time,
    pub median: f64,
    /// Sample standard deviation (n − 1 denominator; 0 for a single run).
    pub std: f64,
    pub mean_wall_ms: f64,
}

impl CellStatistics {
    pub fn from_samples(cmax: &[Time], wall_ms: &[u64]) -> Self {
        assert!(!cmax.is_empty(), "statistics need at least one sample");
        let n = cmax.len() as f64;
        let mean = cmax.iter().map(|&v| v as f64).sum::<f64>() / n;
        let mut sorted = cmax.to_vec();
        sorted.sort_unstable();
        let median = if sorted.len() % 2 == 1 {
            sorted[sorted.len() / 2] as f64
        } else {
            (sorted[sorted.len() / 2 - 1] as f64 + sorted[sorted.len() / 2] as f64) / 2.0
        };
        let std = if cmax.len() < 2 {
            0.0
        } else {
            let ss = cmax.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>();
            (ss / (n - 1.0)).sqrt()
        };
        Self {
            mean,
            best: *sorted.first().unwrap(),
            worst: *sorted.last().unwrap(),
            median,
            std,
            mean_wall_ms: wall_ms.iter().map(|&v| v as f64).sum::<f64>() / n,
        }
    }
}

/// Aggregated view of one (instance, algorithm) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub instance_id: String,
    pub label: String,
    pub stats: CellStatistics,
    /// Deviation of the mean makespan from the instance's lower bound.
    pub rho_pct: Option<f64>,
    /// Deviation of the mean makespan from the FA control cell's mean on
    /// the same instance; absent when the experiment has no FA entry.
    pub delta_pct: Option<f64>,
}

/// Everything an experiment produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub runs: Vec<RunRecord>,
    pub cells: Vec<CellReport>,
}

fn load_instances(spec: &ExperimentSpec) -> Result<Vec<Instance>, BenchError> {
    let mut instances = Vec::with_capacity(spec.instances.len());
    for source in &spec.instances {
        let instance = match source {
            InstanceSource::Generated(generator) => generator.generate(),
            InstanceSource::Inline(instance) => instance.clone(),
            InstanceSource::File(path) => {
                let text = fs::read_to_string(path).map_err(|source| BenchError::Read {
                    path: path.clone(),
                    source,
                })?;
                let fallback = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "instance".to_string());
                Instance::parse_named(&text, &fallback).map_err(|source| BenchError::Parse {
                    path: path.clone(),
                    source,
                })?
            }
        };
        instances.push(instance);
    }
    Ok(instances)
}

fn validate_spec(spec: &ExperimentSpec) -> Result<(), BenchError> {
    if spec.instances.is_empty() {
        return Err(BenchError::Empty("instance"));
    }
    if spec.algorithms.is_empty() {
        return Err(BenchError::Empty("algorithm"));
    }
    if spec.replications == 0 {
        return Err(BenchError::NoReplications);
    }
    for (i, entry) in spec.algorithms.iter().enumerate() {
        if spec.algorithms[..i].iter().any(|e| e.label == entry.label) {
            return Err(BenchError::DuplicateLabel(entry.label.clone()));
        }
        entry
            .config
            .validate()
            .map_err(|source| BenchError::BadConfig {
                label: entry.label.clone(),
                source,
            })?;
    }
    Ok(())
}

/// Worker-count override from the `UPMSP_WORKERS` environment variable;
/// unset, unparsable, or zero falls back to one worker per logical CPU.
fn worker_count(raw: Option<&str>) -> usize {
    raw.and_then(|s| s.parse::<usize>().ok()).unwrap_or(0)
}

/// Runs the full experiment. Replications execute in parallel (bounded by
/// `UPMSP_WORKERS`), but records are assembled in a fixed order and every
/// run is seed-deterministic, so the report is a pure function of the spec
/// — only the wall-clock fields vary between repeats.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, BenchError> {
    validate_spec(spec)?;
    let instances = load_instances(spec)?;
    for (i, instance) in instances.iter().enumerate() {
        if instances[..i]
            .iter()
            .any(|other| other.id() == instance.id())
        {
            return Err(BenchError::DuplicateInstance(instance.id().to_string()));
        }
    }
    let lbs: Vec<f64> = instances
        .iter()
        .map(|inst| bounds::lower_bounds(&inst.adjusted_times()).lb().value())
        .collect();

    let replications = spec.replications;
    let mut tasks = Vec::new();
    for instance_idx in 0..instances.len() {
        for algorithm_idx in 0..spec.algorithms.len() {
            for replication in 0..replications {
                tasks.push((instance_idx, algorithm_idx, replication));
            }
        }
    }

    let workers = worker_count(std::env::var("UPMSP_WORKERS").ok().as_deref());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| BenchError::Pool(e.to_string()))?;
    let runs: Vec<RunRecord> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(instance_idx, algorithm_idx, replication)| {
                let instance = &instances[instance_idx];
                let entry = &spec.algorithms[algorithm_idx];
                let mut config = entry.config.clone();
                config.seed = spec.seed_base + replication as u64;
                let result: RunResult = engine::run(instance, &config);
                let lb = lbs[instance_idx];
                RunRecord {
                    instance_id: instance.id().to_string(),
                    label: entry.label.clone(),
                    replication,
                    seed: config.seed,
                    best_cmax: result.best_fitness,
                    evaluations: result.evaluations_used,
                    wall_ms: result.wall_time.as_millis() as u64,
                    lb,
                    rho_pct: rho(result.best_fitness as f64, lb).ok(),
                    trace: result
                        .trace
                        .iter()
                        .map(|p| (p.evaluations, p.best))
                        .collect(),
                }
            })
            .collect()
    });

    // Control column for delta: the first FA entry, if any.
    let control_idx = spec
        .algorithms
        .iter()
        .position(|e| e.config.algorithm == Algorithm::Fa);
    if control_idx.is_none() {
        eprintln!("note: no FA entry in this experiment; delta column omitted");
    }

    let r = replications as usize;
    let algorithms = spec.algorithms.len();
    let cell_cmax = |instance_idx: usize, algorithm_idx: usize| -> Vec<Time> {
        let base = (instance_idx * algorithms + algorithm_idx) * r;
        runs[base..base + r]
            .iter()
            .map(|run| run.best_cmax)
            .collect()
    };

    let mut cells = Vec::new();
    for (instance_idx, instance) in instances.iter().enumerate() {
        let control_mean = control_idx.map(|c| {
            let cmax = cell_cmax(instance_idx, c);
            cmax.iter().map(|&v| v as f64).sum::<f64>() / cmax.len() as f64
        });
        for (algorithm_idx, entry) in spec.algorithms.iter().enumerate() {
            let base = (instance_idx * algorithms + algorithm_idx) * r;
            let slice = &runs[base..base + r];
            let cmax: Vec<Time> = slice.iter().map(|run| run.best_cmax).collect();
            let wall: Vec<u64> = slice.iter().map(|run| run.wall_ms).collect();
            let stats = CellStatistics::from_samples(&cmax, &wall);
            cells.push(CellReport {
                instance_id: instance.id().to_string(),
                label: entry.label.clone(),
                stats: stats.clone(),
                rho_pct: rho(stats.mean, lbs[instance_idx]).ok(),
                delta_pct: control_mean.and_then(|control| delta(stats.mean, control).ok()),
            });
        }
    }

    Ok(ExperimentReport { runs, cells })
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.4}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// `results.csv` text: one row per run.
pub fn results_csv(report: &ExperimentReport) -> String {
    let mut out = String::from("instance_id,algorithm,seed,best_cmax,evals,wall_ms,lb,rho_pct\n");
    for run in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            run.instance_id,
            run.label,
            run.seed,
            run.best_cmax,
            run.evaluations,
            run.wall_ms,
            fmt_f64(run.lb),
            fmt_opt(run.rho_pct),
        ));
    }
    out
}

/// `aggregate.csv` text: one row per (instance, algorithm) cell.
pub fn aggregate_csv(report: &ExperimentReport) -> String {
    let mut out =
        String::from("instance_id,algorithm,mean,best,worst,median,std,rho_pct,delta_pct\n");
    for cell in &report.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            cell.instance_id,
            cell.label,
            fmt_f64(cell.stats.mean),
            cell.stats.best,
            cell.stats.worst,
            fmt_f64(cell.stats.median),
            fmt_f64(cell.stats.std),
            fmt_opt(cell.rho_pct),
            fmt_opt(cell.delta_pct),
        ));
    }
    out
}

/// Trace CSV text for one run.
pub fn trace_csv(trace: &[(u64, Time)]) -> String {
    let mut out = String::from("evals,best_cmax\n");
    for &(evals, best) in trace {
        out.push_str(&format!("{evals},{best}\n"));
    }
    out
}

const CHART_COLORS: [&str; 11] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf", "#444444",
];

/// Convergence chart for one instance: one best-so-far step line per
/// algorithm (first replication), makespan over evaluations.
pub fn convergence_svg(instance_id: &str, series: &[(&str, &[(u64, Time)])]) -> String {
    let (width, height) = (860.0, 520.0);
    let (left, right, top, bottom) = (70.0, 20.0, 40.0, 45.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let max_x = series
        .iter()
        .flat_map(|(_, t)| t.iter().map(|p| p.0))
        .max()
        .unwrap_or(1)
        .max(1);
    let min_y = series
        .iter()
        .flat_map(|(_, t)| t.iter().map(|p| p.1))
        .min()
        .unwrap_or(0);
    let max_y = series
        .iter()
        .flat_map(|(_, t)| t.iter().map(|p| p.1))
        .max()
        .unwrap_or(1)
        .max(min_y + 1);

    let sx = |e: u64| left + e as f64 / max_x as f64 * plot_w;
    let sy = |c: Time| top + (1.0 - (c - min_y) as f64 / (max_y - min_y) as f64) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">best makespan vs evaluations — {instance_id}</text>\n",
        left
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">evaluations (max {max_x})</text>\n",
        left + plot_w / 2.0,
        height - 10.0
    ));
    svg.push_str(&format!(
        "<text x=\"15\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">makespan ({min_y}–{max_y})</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0
    ));

    for (i, (label, trace)) in series.iter().enumerate() {
        let color = CHART_COLORS[i % CHART_COLORS.len()];
        let mut points = String::new();
        let mut last_y: Option<Time> = None;
        for &(evals, best) in trace.iter() {
            // Step rendering: hold the previous level until this point.
            if let Some(prev) = last_y {
                points.push_str(&format!("{:.1},{:.1} ", sx(evals), sy(prev)));
            }
            points.push_str(&format!("{:.1},{:.1} ", sx(evals), sy(best)));
            last_y = Some(best);
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.trim_end()
        ));
        let lx = left + 8.0 + (i as f64 % 4.0) * 150.0;
        let ly = top + 14.0 * (i / 4) as f64 - 12.0;
        svg.push_str(&format!(
            "<rect x=\"{lx}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/>\n",
            ly + 22.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
            lx + 14.0,
            ly + 31.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `results.csv`, `aggregate.csv`, per-run trace CSVs under
/// `traces/`, and per-instance convergence charts under `charts/`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), results_csv(report))?;
    fs::write(dir.join("aggregate.csv"), aggregate_csv(report))?;

    let traces_dir = dir.join("traces");
    fs::create_dir_all(&traces_dir)?;
    for run in &report.runs {
        let name = format!(
            "{}__{}__r{}.csv",
            run.instance_id, run.label, run.replication
        );
        fs::write(traces_dir.join(name), trace_csv(&run.trace))?;
    }

    let charts_dir = dir.join("charts");
    fs::create_dir_all(&charts_dir)?;
    let mut seen = Vec::new();
    for run in &report.runs {
        if seen.iter().any(|id| id == &run.instance_id) {
            continue;
        }
        seen.push(run.instance_id.clone());
        let series: Vec<(&str, &[(u64, Time)])> = report
            .runs
            .iter()
            .filter(|r| r.instance_id == run.instance_id && r.replication == 0)
            .map(|r| (r.label.as_str(), r.trace.as_slice()))
            .collect();
        let svg = convergence_svg(&run.instance_id, &series);
        fs::write(charts_dir.join(format!("{}.svg", run.instance_id)), svg)?;
    }
    Ok(())
}

/// Serializes the full report as pretty JSON.
pub fn write_report_json(report: &ExperimentReport, path: &Path) -> io::Result<()> {
    let mut file = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, report)?;
    writeln!(file)
}

/// The three canned experiment shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// FA and the five standalone partners; ψ=40, 500k evaluations.
    Exp1,
    /// FA alone at ψ ∈ {20, 30, 40}; 500k evaluations.
    Exp2,
    /// FA and the five hybrids at ψ=200 with a tight 5k budget.
    Exp3,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Exp1 => "exp1",
            Preset::Exp2 => "exp2",
            Preset::Exp3 => "exp3",
        }
    }

    /// Algorithm entries of the preset; `desk` divides the evaluation
    /// budget by 10 (never below the population) for quick local runs.
    pub fn entries(&self, desk: bool) -> Vec<AlgorithmEntry> {
        let scale = |config: &mut AlgorithmConfig| {
            if desk {
                config.max_evaluations =
                    (config.max_evaluations / 10).max(config.population as u64);
            }
        };
        match self {
            Preset::Exp1 => [
                Algorithm::Fa,
                Algorithm::De,
                Algorithm::Pso,
                Algorithm::Abc,
                Algorithm::Tlbo,
                Algorithm::Iwo,
            ]
            .into_iter()
            .map(|algorithm| {
                let mut config = AlgorithmConfig::new(algorithm);
                scale(&mut config);
                AlgorithmEntry::plain(config)
            })
            .collect(),
            Preset::Exp2 => [20usize, 30, 40]
                .into_iter()
                .map(|population| {
                    let mut config = AlgorithmConfig::new(Algorithm::Fa);
                    config.population = population;
                    scale(&mut config);
                    AlgorithmEntry::new(format!("FA{population}"), config)
                })
                .collect(),
            Preset::Exp3 => [
                Algorithm::Fa,
                Algorithm::FaDe,
                Algorithm::FaPso,
                Algorithm::FaAbc,
                Algorithm::FaTlbo,
                Algorithm::FaIwo,
            ]
            .into_iter()
            .map(|algorithm| {
                let mut config = AlgorithmConfig::new(algorithm);
                config.population = 200;
                config.max_evaluations = 5_000;
                scale(&mut config);
                AlgorithmEntry::plain(config)
            })
            .collect(),
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "exp1" => Ok(Preset::Exp1),
            "exp2" => Ok(Preset::Exp2),
            "exp3" => Ok(Preset::Exp3),
            other => Err(format!(
                "unknown preset `{other}` (expected exp1, exp2, or exp3)"
            )),
        }
    }
}
