//! Command-line front end: instance generation, single solves, benchmark
//! experiments, the exact solver, and lower-bound queries.

use std::error::Error;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use upmsp::bench::{self, AlgorithmEntry, ExperimentSpec, InstanceSource, Preset};
use upmsp::bounds;
use upmsp::engine::{self, Algorithm, AlgorithmConfig};
use upmsp::exact::{solve_exact, ExactLimits};
use upmsp::instance::{GeneratorSpec, Instance, Time};
use upmsp::neighborhood::{MoveBudget, SchemeProbabilities};

#[derive(Parser)]
#[command(
    name = "upmsp",
    version,
    about = "Solvers and benchmarks for unrelated parallel machine scheduling \
             with sequence-dependent setup times"
)]
struct Cli {
    /// Base RNG seed for generation and solver runs.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output location: a directory for `generate`/`bench`, a file for
    /// `solve`. Defaults to stdout or `bench-out/`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random instances and write them as text files.
    Generate(GenerateArgs),
    /// Run one algorithm on one instance.
    Solve(SolveArgs),
    /// Run a replicated experiment over an instance suite.
    Bench(BenchArgs),
    /// Solve a small instance to proven optimality.
    Exact(ExactArgs),
    /// Print the lower bounds of an instance.
    Lb(LbArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    machines: usize,
    #[arg(long)]
    jobs: usize,
    /// How many instances to generate (seeds run from --seed upward).
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 50)]
    p_low: Time,
    #[arg(long, default_value_t = 100)]
    p_high: Time,
    #[arg(long, default_value_t = 50)]
    s_low: Time,
    #[arg(long, default_value_t = 100)]
    s_high: Time,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file to solve.
    #[arg(long)]
    instance: PathBuf,
    /// FA, DE, PSO, ABC, TLBO, IWO, FADE, FAPSO, FAABC, FATLBO, or FAIWO.
    #[arg(long, default_value = "FA")]
    algorithm: Algorithm,
    /// Population size ψ.
    #[arg(long)]
    pop: Option<usize>,
    /// Evaluation budget.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Firefly light absorption γ.
    #[arg(long)]
    gamma: Option<f64>,
    /// Firefly base attractiveness β₀.
    #[arg(long)]
    beta0: Option<f64>,
    /// Firefly randomization weight α.
    #[arg(long)]
    alpha: Option<f64>,
    /// Per-generation decay factor applied to α.
    #[arg(long)]
    alpha_decay: Option<f64>,
    /// Local-search probability of leading with the swap scheme.
    #[arg(long)]
    ls_pswap: Option<f64>,
    /// Local-search probability of leading with the revert scheme.
    #[arg(long)]
    ls_prevert: Option<f64>,
    /// Local-search move budget as a fraction of the machine count.
    #[arg(long)]
    ls_budget_factor: Option<f64>,
    /// Local-search passes per improvement call.
    #[arg(long)]
    ls_passes: Option<usize>,
    /// Print the best schedule's machine sequences.
    #[arg(long)]
    dump_schedule: bool,
    /// Write the best-so-far trace CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Canned experiment shape (exp1, exp2, or exp3).
    #[arg(long)]
    preset: Option<Preset>,
    /// Divide every evaluation budget by 10 for a quick local run.
    #[arg(long)]
    desk: bool,
    /// Algorithms to run when no preset is given (repeatable).
    #[arg(long = "algorithm")]
    algorithms: Vec<Algorithm>,
    /// Population size for --algorithm entries.
    #[arg(long)]
    pop: Option<usize>,
    /// Evaluation budget for --algorithm entries.
    #[arg(long)]
    max_evals: Option<u64>,
    /// Machine counts of the generated suite (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "2")]
    machines: Vec<usize>,
    /// Job counts of the generated suite (comma-separated).
    #[arg(long, value_delimiter = ',', default_value = "20")]
    jobs: Vec<usize>,
    /// Instances generated per (machines, jobs) combination.
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long, default_value_t = 50)]
    p_low: Time,
    #[arg(long, default_value_t = 100)]
    p_high: Time,
    #[arg(long, default_value_t = 50)]
    s_low: Time,
    #[arg(long, default_value_t = 100)]
    s_high: Time,
    /// Instance files to add to the suite (repeatable).
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
    /// Runs per (instance, algorithm) cell.
    #[arg(long, default_value_t = 15)]
    replications: u32,
    /// First replication seed; run r uses seed_base + r.
    #[arg(long)]
    seed_base: Option<u64>,
}

#[derive(Args)]
struct ExactArgs {
    /// Instance file to solve.
    #[arg(long)]
    instance: PathBuf,
    /// Abort (unproven) after this many search nodes.
    #[arg(long)]
    node_cap: Option<u64>,
    /// Abort (unproven) after this many milliseconds.
    #[arg(long)]
    time_cap: Option<u64>,
    /// Refuse instances with more jobs than this.
    #[arg(long, default_value_t = 9)]
    max_jobs: usize,
}

#[derive(Args)]
struct LbArgs {
    /// Instance file to analyze.
    #[arg(long)]
    instance: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        // A closed stdout (`upmsp … | head`) is the reader's choice, not an
        // error worth reporting.
        if let Some(io_err) = err.downcast_ref::<io::Error>() {
            if io_err.kind() == io::ErrorKind::BrokenPipe {
                return;
            }
        }
        eprintln!("error: {err}");
        std::process::exit(2);
    }
}

/// Writes to stdout, propagating failures instead of panicking.
fn emit(text: &str) -> io::Result<()> {
    io::stdout().write_all(text.as_bytes())
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn Error>> {
    match &cli.command {
        Command::Generate(args) => generate(&cli, args),
        Command::Solve(args) => solve(&cli, args),
        Command::Bench(args) => run_bench(&cli, args),
        Command::Exact(args) => exact(&cli, args),
        Command::Lb(args) => lb(&cli, args),
    }
}

fn read_instance(path: &Path) -> Result<Instance, Box<dyn Error>> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read `{}`: {e}", path.display()))?;
    let fallback = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".to_string());
    Instance::parse_named(&text, &fallback)
        .map_err(|e| format!("cannot parse `{}`: {e}", path.display()).into())
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<(), Box<dyn Error>> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;
    for offset in 0..args.count {
        let spec = GeneratorSpec::new(
            cli.seed + offset,
            args.machines,
            args.jobs,
            args.p_low,
            args.p_high,
            args.s_low,
            args.s_high,
        )?;
        let instance = spec.generate();
        let path = dir.join(format!("{}.txt", instance.id()));
        fs::write(&path, instance.to_text())?;
        emit(&format!("{}\n", path.display()))?;
    }
    Ok(())
}

fn apply_solver_flags(
    config: &mut AlgorithmConfig,
    args: &SolveArgs,
) -> Result<(), Box<dyn Error>> {
    if let Some(pop) = args.pop {
        config.population = pop;
    }
    if let Some(max_evals) = args.max_evals {
        config.max_evaluations = max_evals;
    }
    if let Some(gamma) = args.gamma {
        config.firefly.gamma = gamma;
    }
    if let Some(beta0) = args.beta0 {
        config.firefly.beta0 = beta0;
    }
    if let Some(alpha) = args.alpha {
        config.firefly.alpha = alpha;
    }
    if let Some(decay) = args.alpha_decay {
        config.firefly.alpha_decay = decay;
    }
    if args.ls_pswap.is_some() || args.ls_prevert.is_some() {
        let swap = args
            .ls_pswap
            .unwrap_or(config.local_search.probabilities.swap());
        let revert = args
            .ls_prevert
            .unwrap_or(config.local_search.probabilities.revert());
        config.local_search.probabilities = SchemeProbabilities::new(swap, revert)?;
    }
    if let Some(factor) = args.ls_budget_factor {
        config.local_search.move_budget = MoveBudget::PerMachineFactor(factor);
    }
    if let Some(passes) = args.ls_passes {
        config.local_search.passes = passes;
    }
    config.validate()?;
    Ok(())
}

fn solve(cli: &Cli, args: &SolveArgs) -> Result<(), Box<dyn Error>> {
    let instance = read_instance(&args.instance)?;
    let mut config = AlgorithmConfig::new(args.algorithm);
    config.seed = cli.seed;
    apply_solver_flags(&mut config, args)?;
    let result = engine::run(&instance, &config);
    let lb = bounds::lower_bounds(&instance.adjusted_times())
        .lb()
        .value();
    let rho = bench::rho(result.best_fitness as f64, lb).ok();

    let mut out = String::new();
    match cli.format {
        Format::Csv => {
            out.push_str("instance_id,algorithm,seed,best_cmax,evals,wall_ms,lb,rho_pct\n");
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.4},{}\n",
                instance.id(),
                config.algorithm.name(),
                config.seed,
                result.best_fitness,
                result.evaluations_used,
                result.wall_time.as_millis(),
                lb,
                rho.map(|r| format!("{r:.4}")).unwrap_or_default(),
            ));
            if args.dump_schedule {
                for line in result.best_schedule.to_lines().lines() {
                    out.push_str(&format!("# {line}\n"));
                }
            }
        }
        Format::Json => {
            // 1-based job ids, matching the text rendering.
            let sequences: Vec<Vec<usize>> = result
                .best_schedule
                .sequences()
                .iter()
                .map(|seq| seq.iter().map(|&job| job + 1).collect())
                .collect();
            let mut object = serde_json::json!({
                "instance_id": instance.id(),
                "algorithm": config.algorithm.name(),
                "seed": config.seed,
                "best_cmax": result.best_fitness,
                "evals": result.evaluations_used,
                "wall_ms": result.wall_time.as_millis() as u64,
                "lb": lb,
                "rho_pct": rho,
            });
            if args.dump_schedule {
                object["schedule"] = serde_json::json!(sequences);
            }
            out.push_str(&serde_json::to_string_pretty(&object)?);
            out.push('\n');
        }
    }

    if let Some(path) = &args.trace {
        let trace: Vec<(u64, Time)> = result
            .trace
            .iter()
            .map(|p| (p.evaluations, p.best))
            .collect();
        fs::write(path, bench::trace_csv(&trace))?;
    }
    match &cli.out {
        Some(path) => fs::write(path, out)?,
        None => emit(&out)?,
    }
    Ok(())
}

fn run_bench(cli: &Cli, args: &BenchArgs) -> Result<(), Box<dyn Error>> {
    let entries: Vec<AlgorithmEntry> = match (&args.preset, args.algorithms.is_empty()) {
        (Some(preset), _) => preset.entries(args.desk),
        (None, false) => args
            .algorithms
            .iter()
            .map(|&algorithm| {
                let mut config = AlgorithmConfig::new(algorithm);
                if let Some(pop) = args.pop {
                    config.population = pop;
                }
                if let Some(max_evals) = args.max_evals {
                    config.max_evaluations = max_evals;
                }
                if args.desk {
                    config.max_evaluations =
                        (config.max_evaluations / 10).max(config.population as u64);
                }
                AlgorithmEntry::plain(config)
            })
            .collect(),
        (None, true) => {
            return Err("pass --preset or at least one --algorithm".into());
        }
    };

    let mut sources = Vec::new();
    let mut next_seed = cli.seed;
    for &machines in &args.machines {
        for &jobs in &args.jobs {
            for _ in 0..args.count {
                sources.push(InstanceSource::Generated(GeneratorSpec::new(
                    next_seed,
                    machines,
                    jobs,
                    args.p_low,
                    args.p_high,
                    args.s_low,
                    args.s_high,
                )?));
                next_seed += 1;
            }
        }
    }
    for path in &args.instances {
        sources.push(InstanceSource::File(path.clone()));
    }

    let spec = ExperimentSpec {
        instances: sources,
        algorithms: entries,
        replications: args.replications,
        seed_base: args.seed_base.unwrap_or(cli.seed),
    };
    let report = bench::run_experiment(&spec)?;

    let dir = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("bench-out"));
    bench::write_outputs(&report, &dir)?;
    if cli.format == Format::Json {
        bench::write_report_json(&report, &dir.join("report.json"))?;
    }
    emit(&bench::aggregate_csv(&report))?;
    eprintln!("wrote {} runs to {}", report.runs.len(), dir.display());
    Ok(())
}

fn exact(cli: &Cli, args: &ExactArgs) -> Result<(), Box<dyn Error>> {
    let instance = read_instance(&args.instance)?;
    if instance.jobs() > args.max_jobs {
        return Err(format!(
            "instance has {} jobs; the exact solver is capped at {} (raise --max-jobs \
             only if you can afford the blow-up)",
            instance.jobs(),
            args.max_jobs
        )
        .into());
    }
    let limits = ExactLimits {
        max_jobs: args.max_jobs,
        node_cap: args.node_cap.unwrap_or(u64::MAX),
        time_cap: args.time_cap.map(Duration::from_millis),
    };
    let result = solve_exact(&instance, &limits);
    let out = match cli.format {
        Format::Csv => format!(
            "optimum {}\nproven {}\nnodes {}\n{}\n",
            result.optimum,
            result.proven,
            result.nodes,
            result.witness.to_lines()
        ),
        Format::Json => {
            let witness: Vec<Vec<usize>> = result
                .witness
                .sequences()
                .iter()
                .map(|seq| seq.iter().map(|&job| job + 1).collect())
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&serde_json::json!({
                    "optimum": result.optimum,
                    "proven": result.proven,
                    "nodes": result.nodes,
                    "witness": witness,
                }))?
            )
        }
    };
    match &cli.out {
        Some(path) => fs::write(path, out)?,
        None => emit(&out)?,
    }
    Ok(())
}

fn lb(cli: &Cli, args: &LbArgs) -> Result<(), Box<dyn Error>> {
    let instance = read_instance(&args.instance)?;
    let report = bounds::lower_bounds(&instance.adjusted_times());
    let out = match cli.format {
        Format::Csv => format!(
            "{:.2} {:.2} {:.2}\n",
            report.lb1.value(),
            report.lb2 as f64,
            report.lb().value()
        ),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&serde_json::json!({
                "lb1": report.lb1.value(),
                "lb2": report.lb2,
                "lb": report.lb().value(),
            }))?
        ),
    };
    match &cli.out {
        Some(path) => fs::write(path, out)?,
        None => emit(&out)?,
    }
    Ok(())
}
