//! Black-box tests of the command-line binary: every subcommand, both
//! output formats, determinism across repeated invocations, and the error
//! paths.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use upmsp::exact::{solve_exact, ExactLimits};
use upmsp::instance::Instance;

fn upmsp(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_upmsp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary launches")
}

fn stdout_of(output: &Output) -> String {
    assert!(
        output.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8(output.stdout.clone()).expect("stdout is UTF-8")
}

/// Generates one small instance file and returns its path.
fn small_instance(dir: &Path, jobs: usize) -> std::path::PathBuf {
    let out = upmsp(
        &[
            "--seed",
            "900",
            "generate",
            "--machines",
            "2",
            "--jobs",
            &jobs.to_string(),
            "--p-low",
            "1",
            "--p-high",
            "9",
            "--s-low",
            "1",
            "--s-high",
            "9",
        ],
        dir,
    );
    let listing = stdout_of(&out);
    let name = listing.trim();
    let path = dir.join(name);
    assert!(path.is_file(), "generate did not write {name}");
    path
}

#[test]
fn generate_writes_parseable_deterministic_files() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "500",
        "--out",
        ".",
        "generate",
        "--machines",
        "2",
        "--jobs",
        "4",
        "--count",
        "3",
        "--p-low",
        "1",
        "--p-high",
        "9",
        "--s-low",
        "1",
        "--s-high",
        "9",
    ];
    let listing = stdout_of(&upmsp(&args, dir_a.path()));
    let names: Vec<&str> = listing.lines().collect();
    assert_eq!(names.len(), 3, "expected one path per instance");
    for (offset, name) in names.iter().enumerate() {
        let text = fs::read_to_string(dir_a.path().join(name)).expect("generated file exists");
        let instance = Instance::parse(&text).expect("generated text parses");
        assert_eq!(instance.machines(), 2);
        assert_eq!(instance.jobs(), 4);
        assert!(
            instance.id().contains(&format!("seed{}", 500 + offset)),
            "file name should carry its seed: {}",
            instance.id()
        );
    }
    // Same flags, fresh directory: byte-identical files.
    stdout_of(&upmsp(&args, dir_b.path()));
    for name in &names {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn solve_reports_a_consistent_deterministic_row() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = small_instance(dir.path(), 5);
    let instance = Instance::parse_named(
        &fs::read_to_string(&instance_path).unwrap(),
        instance_path.file_stem().unwrap().to_str().unwrap(),
    )
    .unwrap();
    let args = [
        "--seed",
        "3",
        "solve",
        "--instance",
        instance_path.to_str().unwrap(),
        "--algorithm",
        "FA",
        "--pop",
        "10",
        "--max-evals",
        "2000",
        "--trace",
        "trace.csv",
    ];
    let text = stdout_of(&upmsp(&args, dir.path()));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("instance_id,algorithm,seed,best_cmax,evals,wall_ms,lb,rho_pct")
    );
    let row: Vec<String> = lines
        .next()
        .expect("one data row")
        .split(',')
        .map(str::to_string)
        .collect();
    assert_eq!(row[0], instance.id());
    assert_eq!(row[1], "FA");
    assert_eq!(row[2], "3");
    let best: u64 = row[3].parse().expect("best_cmax is an integer");
    let evals: u64 = row[4].parse().expect("evals is an integer");
    assert!(evals <= 2000);
    let lb: f64 = row[6].parse().expect("lb is numeric");
    assert!(best as f64 >= lb, "best {best} below bound {lb}");
    let rho: f64 = row[7].parse().expect("rho_pct is numeric");
    assert!((rho - (best as f64 - lb) / lb * 100.0).abs() < 0.01);

    // Optimality on this tiny instance is independently checkable.
    let exact = solve_exact(&instance, &ExactLimits::default());
    assert!(exact.proven);
    assert!(best >= exact.optimum);

    // The trace file is a nonincreasing best-so-far series.
    let trace = fs::read_to_string(dir.path().join("trace.csv")).expect("trace written");
    let mut trace_lines = trace.lines();
    assert_eq!(trace_lines.next(), Some("evals,best_cmax"));
    let mut last_best = u64::MAX;
    let mut final_best = None;
    for line in trace_lines {
        let (_, b) = line.split_once(',').expect("two columns");
        let b: u64 = b.parse().unwrap();
        assert!(b <= last_best, "trace increased");
        last_best = b;
        final_best = Some(b);
    }
    assert_eq!(
        final_best,
        Some(best),
        "trace must end at the reported best"
    );

    // Re-running is deterministic in everything but wall time.
    let again = stdout_of(&upmsp(&args, dir.path()));
    let row2: Vec<&str> = again.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row2[3], row[3]);
    assert_eq!(row2[4], row[4]);
    assert_eq!(row2[7], row[7]);
}

#[test]
fn solve_json_matches_csv_and_dumps_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = small_instance(dir.path(), 5);
    let path = instance_path.to_str().unwrap();
    let csv = stdout_of(&upmsp(
        &[
            "--seed",
            "3",
            "solve",
            "--instance",
            path,
            "--pop",
            "10",
            "--max-evals",
            "2000",
        ],
        dir.path(),
    ));
    let csv_best: u64 = csv
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();

    let json_text = stdout_of(&upmsp(
        &[
            "--seed",
            "3",
            "--format",
            "json",
            "solve",
            "--instance",
            path,
            "--pop",
            "10",
            "--max-evals",
            "2000",
            "--dump-schedule",
        ],
        dir.path(),
    ));
    let value: serde_json::Value = serde_json::from_str(&json_text).expect("valid JSON");
    assert_eq!(value["algorithm"], "FA");
    assert_eq!(value["best_cmax"].as_u64(), Some(csv_best));
    let schedule = value["schedule"].as_array().expect("schedule dumped");
    assert_eq!(schedule.len(), 2, "one sequence per machine");
    let mut jobs: Vec<u64> = schedule
        .iter()
        .flat_map(|seq| seq.as_array().unwrap().iter().map(|v| v.as_u64().unwrap()))
        .collect();
    jobs.sort_unstable();
    assert_eq!(jobs, vec![1, 2, 3, 4, 5], "every job exactly once, 1-based");
}

#[test]
fn exact_subcommand_matches_library_and_caps_size() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = small_instance(dir.path(), 4);
    let path = instance_path.to_str().unwrap();
    let instance = Instance::parse(&fs::read_to_string(&instance_path).unwrap()).unwrap();
    let expected = solve_exact(&instance, &ExactLimits::default());

    let text = stdout_of(&upmsp(&["exact", "--instance", path], dir.path()));
    assert!(
        text.contains(&format!("optimum {}", expected.optimum)),
        "{text}"
    );
    assert!(text.contains("proven true"), "{text}");

    let json_text = stdout_of(&upmsp(
        &["--format", "json", "exact", "--instance", path],
        dir.path(),
    ));
    let value: serde_json::Value = serde_json::from_str(&json_text).expect("valid JSON");
    assert_eq!(value["optimum"].as_u64(), Some(expected.optimum));
    assert_eq!(value["proven"].as_bool(), Some(true));
    assert!(value["nodes"].as_u64().unwrap() > 0);

    // Oversized instances are refused up front.
    let big = small_instance(dir.path(), 12);
    let refused = upmsp(&["exact", "--instance", big.to_str().unwrap()], dir.path());
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("12 jobs"));
}

#[test]
fn lb_prints_both_bounds_and_their_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let instance_path = small_instance(dir.path(), 6);
    let path = instance_path.to_str().unwrap();
    let text = stdout_of(&upmsp(&["lb", "--instance", path], dir.path()));
    let fields: Vec<f64> = text
        .split_whitespace()
        .map(|f| f.parse().expect("numeric bound"))
        .collect();
    assert_eq!(fields.len(), 3, "lb1, lb2, combined");
    assert!((fields[2] - fields[0].max(fields[1])).abs() < 1e-9);

    let json_text = stdout_of(&upmsp(
        &["--format", "json", "lb", "--instance", path],
        dir.path(),
    ));
    let value: serde_json::Value = serde_json::from_str(&json_text).expect("valid JSON");
    assert!((value["lb"].as_f64().unwrap() - fields[2]).abs() < 0.005);
}

#[test]
fn bench_builds_output_tree_and_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--seed",
        "7",
        "--out",
        "run",
        "--format",
        "json",
        "bench",
        "--algorithm",
        "FA",
        "--algorithm",
        "FAIWO",
        "--pop",
        "5",
        "--max-evals",
        "300",
        "--machines",
        "1,2",
        "--jobs",
        "4",
        "--count",
        "1",
        "--p-low",
        "1",
        "--p-high",
        "9",
        "--s-low",
        "1",
        "--s-high",
        "9",
        "--replications",
        "2",
        "--seed-base",
        "11",
    ];
    let aggregate_stdout = stdout_of(&upmsp(&args, dir.path()));
    let run_dir = dir.path().join("run");
    for file in ["results.csv", "aggregate.csv", "report.json"] {
        assert!(run_dir.join(file).is_file(), "missing {file}");
    }
    let aggregate = fs::read_to_string(run_dir.join("aggregate.csv")).unwrap();
    assert_eq!(aggregate_stdout, aggregate, "stdout mirrors aggregate.csv");
    // Header plus one row per (instance, algorithm) cell.
    assert_eq!(aggregate.lines().count(), 1 + 2 * 2);
    let traces: Vec<_> = fs::read_dir(run_dir.join("traces"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(
        traces.len(),
        2 * 2 * 2,
        "instances × algorithms × replications"
    );
    let charts: Vec<_> = fs::read_dir(run_dir.join("charts"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(charts.len(), 2, "one chart per instance");
    for chart in &charts {
        let svg = fs::read_to_string(chart).unwrap();
        assert!(svg.starts_with("<svg"), "chart is an SVG document");
        assert!(svg.contains("polyline"), "chart draws series lines");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(run_dir.join("report.json")).unwrap())
            .expect("valid report JSON");
    assert_eq!(report["runs"].as_array().unwrap().len(), 8);

    // Second run from scratch: identical aggregate bytes.
    let dir2 = tempfile::tempdir().unwrap();
    stdout_of(&upmsp(&args, dir2.path()));
    let aggregate2 = fs::read_to_string(dir2.path().join("run/aggregate.csv")).unwrap();
    assert_eq!(aggregate, aggregate2);
}

#[test]
fn errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = upmsp(&["solve", "--instance", "no-such-file.txt"], dir.path());
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    let zero_machines = upmsp(&["generate", "--machines", "0", "--jobs", "3"], dir.path());
    assert_eq!(zero_machines.status.code(), Some(2));

    let empty_bench = upmsp(&["bench"], dir.path());
    assert_eq!(empty_bench.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&empty_bench.stderr).contains("--preset"));

    let bad_range = upmsp(
        &[
            "generate",
            "--machines",
            "2",
            "--jobs",
            "3",
            "--p-low",
            "9",
            "--p-high",
            "1",
        ],
        dir.path(),
    );
    assert_eq!(bad_range.status.code(), Some(2));

    let malformed = dir.path().join("broken.txt");
    fs::write(&malformed, "UPMSP v1\nm 2 n 3\nP\n1 2\n").unwrap();
    let parse_fail = upmsp(
        &["solve", "--instance", malformed.to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(parse_fail.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parse_fail.stderr).contains("cannot parse"));
}

#[test]
fn solve_accepts_the_bundled_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t1.txt");
    fs::write(&path, common::T1_TEXT).unwrap();
    let text = stdout_of(&upmsp(
        &[
            "--seed",
            "1",
            "solve",
            "--instance",
            path.to_str().unwrap(),
            "--pop",
            "10",
            "--max-evals",
            "5000",
        ],
        dir.path(),
    ));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "t1", "name comes from the file header");
    assert_eq!(row[3], "10", "known optimum of the fixture");
}
