//! End-to-end acceptance gate. Each test covers one numbered claim about
//! the system, prints a single `criterion N: …` verdict line, and asserts
//! it (criterion 7 is a soft report by design and never fails the build).

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use upmsp::bench::{self, rho, AlgorithmEntry, ExperimentSpec, InstanceSource};
use upmsp::bounds::lower_bounds;
use upmsp::engine::{run, Algorithm, AlgorithmConfig};
use upmsp::exact::{solve_exact, ExactLimits};
use upmsp::instance::GeneratorSpec;
use upmsp::neighborhood::{improve, ApObjective, LocalSearchConfig};
use upmsp::schedule::{decode, makespan, validate, KeyVector};

/// The 200-instance family shared by criteria 1 and 2: machine counts
/// cycle 1–3, job counts cycle 3–6, all times drawn from [1, 9].
fn tiny_suite() -> impl Iterator<Item = GeneratorSpec> {
    (0..200u64).map(|i| {
        GeneratorSpec::new(
            1000 + i,
            1 + (i as usize) % 3,
            3 + (i as usize) % 4,
            1,
            9,
            1,
            9,
        )
        .expect("suite parameters are valid")
    })
}

#[test]
fn criterion_1_exact_oracle_equals_brute_force() {
    let start = Instant::now();
    let mut checked = 0;
    for spec in tiny_suite() {
        let instance = spec.generate();
        let expected = common::brute_force_optimum(&instance);
        let result = solve_exact(&instance, &ExactLimits::default());
        assert!(result.proven, "search must complete on {}", instance.id());
        assert_eq!(
            result.optimum,
            expected,
            "exact solver disagrees with enumeration on {}",
            instance.id()
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    let ok = checked == 200 && elapsed.as_secs() < 120;
    println!(
        "criterion 1: {} — branch-and-bound matched brute force on {checked}/200 instances in {:.1}s (limit 120s)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    assert!(ok);
}

#[test]
fn criterion_2_lower_bound_never_exceeds_optimum() {
    let mut checked = 0;
    for spec in tiny_suite() {
        let instance = spec.generate();
        let optimum = solve_exact(&instance, &ExactLimits::default()).optimum;
        let lb = lower_bounds(&instance.adjusted_times()).lb();
        // Exact comparison: lb = num/den ≤ optimum ⇔ num ≤ optimum · den.
        assert!(
            (lb.numerator() as u128) <= (optimum as u128) * (lb.denominator() as u128),
            "bound {lb} exceeds optimum {optimum} on {}",
            instance.id()
        );
        checked += 1;
    }
    println!("criterion 2: PASS — lower bound ≤ exact optimum on {checked}/200 instances");
    assert_eq!(checked, 200);
}

#[test]
// 0.318 is a measured percentage that merely happens to sit near 1/π.
#[allow(clippy::approx_constant)]
fn criterion_3_deviation_metric_arithmetic() {
    let r = rho(1189.60, 1185.83).expect("positive bound");
    let d = bench::delta(1204.8667, 1189.60).expect("positive control");
    let ok = (r - 0.318).abs() <= 0.001 && (d - 1.283).abs() <= 0.001;
    println!(
        "criterion 3: {} — rho(1189.60, 1185.83) = {r:.4}% (want 0.318 ± 0.001), delta(1204.8667, 1189.60) = {d:.4}% (want 1.283 ± 0.001)",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_4_local_search_never_worsens() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let config = LocalSearchConfig::default();
    let mut invocations = 0u32;
    for i in 0..50u64 {
        let machines = 1 + (i as usize) % 4;
        let jobs = 3 + (i as usize) % 8;
        let (low, high) = if i % 2 == 0 { (1, 9) } else { (50, 100) };
        let instance = GeneratorSpec::new(2000 + i, machines, jobs, low, high, low, high)
            .expect("suite parameters are valid")
            .generate();
        let ap = instance.adjusted_times();
        let mut objective = ApObjective(&ap);
        for _ in 0..200 {
            let keys = KeyVector::new(
                (0..jobs)
                    .map(|_| rng.random::<f64>() * machines as f64)
                    .collect(),
            );
            let mut schedule = decode(&keys, &instance);
            let before = makespan(&schedule, &ap);
            let outcome = improve(&mut schedule, before, &mut objective, &config, &mut rng);
            assert!(
                outcome.makespan <= before,
                "improve worsened {before} → {} on {}",
                outcome.makespan,
                instance.id()
            );
            assert_eq!(
                outcome.makespan,
                makespan(&schedule, &ap),
                "reported makespan is stale on {}",
                instance.id()
            );
            assert!(
                validate(&schedule, &instance).is_ok(),
                "improve broke validity on {}",
                instance.id()
            );
            invocations += 1;
        }
    }
    println!(
        "criterion 4: PASS — {invocations} improve invocations across 50 instances, zero worsenings, zero validity violations"
    );
    assert_eq!(invocations, 10_000);
}

/// The 100-instance family for criterion 5: two machines, job counts
/// cycling 3–6, times in [1, 9].
fn optimality_suite() -> impl Iterator<Item = GeneratorSpec> {
    (0..100u64).map(|i| {
        GeneratorSpec::new(100 + i, 2, 3 + (i as usize) % 4, 1, 9, 1, 9)
            .expect("suite parameters are valid")
    })
}

fn fa_config(population: usize, max_evaluations: u64, seed: u64) -> AlgorithmConfig {
    let mut config = AlgorithmConfig::new(Algorithm::Fa);
    config.population = population;
    config.max_evaluations = max_evaluations;
    config.seed = seed;
    config
}

#[test]
fn criterion_5_small_instance_optimality_rate() {
    let start = Instant::now();
    let t1 = common::t1();
    let t1_best = run(&t1, &fa_config(10, 5000, 1)).best_fitness;

    let mut hits = 0;
    let mut misses: Vec<String> = Vec::new();
    for spec in optimality_suite() {
        let instance = spec.generate();
        let exact = solve_exact(&instance, &ExactLimits::default());
        assert!(exact.proven, "optimum must be proven on {}", instance.id());
        let got = run(&instance, &fa_config(10, 5000, 1)).best_fitness;
        assert!(
            got >= exact.optimum,
            "search broke the optimum floor on {}",
            instance.id()
        );
        if got == exact.optimum {
            hits += 1;
        } else {
            misses.push(format!("{} ({} vs {})", instance.id(), got, exact.optimum));
        }
    }
    let elapsed = start.elapsed();
    let ok = t1_best == 10 && hits >= 95 && elapsed.as_secs() < 60;
    println!(
        "criterion 5: {} — fixture optimum {}, {hits}/100 generated optima (need ≥ 95) in {:.1}s (limit 60s){}{}",
        if ok { "PASS" } else { "FAIL" },
        if t1_best == 10 { "attained" } else { "MISSED" },
        elapsed.as_secs_f64(),
        if misses.is_empty() { "" } else { "; missed: " },
        misses.join(", ")
    );
    assert!(ok);
}

/// The 15-instance family for criteria 6 and 7: two machines, twenty jobs,
/// all times in [50, 100].
fn desk_suite() -> impl Iterator<Item = GeneratorSpec> {
    (201..=215u64).map(|seed| GeneratorSpec::balanced(seed, 2, 20))
}

#[test]
fn criterion_6_desk_scale_quality() {
    let start = Instant::now();
    let mut rho_sum = 0.0;
    let mut all_improved = true;
    let mut lines: Vec<String> = Vec::new();
    for spec in desk_suite() {
        let instance = spec.generate();
        let lb = lower_bounds(&instance.adjusted_times()).lb().value();
        // Budget of exactly ψ stops after the initial sample, which makes
        // the initial-population best observable from the outside.
        let initial_best = run(&instance, &fa_config(40, 40, 1)).best_fitness;
        let best = run(&instance, &fa_config(40, 100_000, 1)).best_fitness;
        let r = rho(best as f64, lb).expect("bound is positive");
        rho_sum += r;
        if best >= initial_best {
            all_improved = false;
        }
        lines.push(format!(
            "{}: {best} (init {initial_best}, ρ {r:.2}%)",
            instance.id()
        ));
    }
    let mean_rho = rho_sum / 15.0;
    let elapsed = start.elapsed();
    let ok = mean_rho <= 3.0 && all_improved && elapsed.as_secs() < 300;
    println!(
        "criterion 6: {} — mean ρ {mean_rho:.3}% (need ≤ 3%), improved on the initial population in {}, {:.0}s (limit 300s) [{}]",
        if ok { "PASS" } else { "FAIL" },
        if all_improved { "15/15 runs" } else { "NOT all runs" },
        elapsed.as_secs_f64(),
        lines.join("; ")
    );
    assert!(ok);
}

#[test]
fn criterion_7_hybrid_ordering_report() {
    let mut fa_sum = 0.0;
    let mut faiwo_sum = 0.0;
    for spec in desk_suite() {
        let instance = spec.generate();
        fa_sum += run(&instance, &fa_config(50, 20_000, 1)).best_fitness as f64;
        let mut config = AlgorithmConfig::new(Algorithm::FaIwo);
        config.population = 50;
        config.max_evaluations = 20_000;
        config.seed = 1;
        faiwo_sum += run(&instance, &config).best_fitness as f64;
    }
    let fa_mean = fa_sum / 15.0;
    let faiwo_mean = faiwo_sum / 15.0;
    let bar = fa_mean * 1.005;
    // Soft criterion: a miss is reported with both means, not failed.
    println!(
        "criterion 7: REPORT — FAIWO mean C_max {faiwo_mean:.2} vs FA mean {fa_mean:.2} (soft bar FA + 0.5% = {bar:.2}): {}",
        if faiwo_mean <= bar { "within bar" } else { "outside bar" }
    );
}

/// Masks the wall-clock column of a result CSV so byte comparison checks
/// everything the pipeline controls (wall time is measurement, not output).
fn mask_wall_ms(results_csv: &str) -> String {
    results_csv
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if i == 0 {
                line.to_string()
            } else {
                let mut fields: Vec<&str> = line.split(',').collect();
                if fields.len() > 5 {
                    fields[5] = "-";
                }
                fields.join(",")
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn criterion_8_bench_runs_are_reproducible() {
    let spec = ExperimentSpec {
        instances: vec![
            InstanceSource::Generated(GeneratorSpec::new(7, 2, 6, 1, 9, 1, 9).unwrap()),
            InstanceSource::Generated(GeneratorSpec::new(8, 3, 5, 1, 9, 1, 9).unwrap()),
        ],
        algorithms: vec![
            AlgorithmEntry::plain({
                let mut c = AlgorithmConfig::new(Algorithm::Fa);
                c.population = 5;
                c.max_evaluations = 600;
                c
            }),
            AlgorithmEntry::plain({
                let mut c = AlgorithmConfig::new(Algorithm::FaIwo);
                c.population = 5;
                c.max_evaluations = 600;
                c
            }),
        ],
        replications: 2,
        seed_base: 42,
    };
    let first = bench::run_experiment(&spec).expect("experiment runs");
    let second = bench::run_experiment(&spec).expect("experiment runs");

    let aggregate_equal = bench::aggregate_csv(&first) == bench::aggregate_csv(&second);
    let results_equal =
        mask_wall_ms(&bench::results_csv(&first)) == mask_wall_ms(&bench::results_csv(&second));

    let dir_a = tempfile::tempdir().expect("tempdir");
    let dir_b = tempfile::tempdir().expect("tempdir");
    bench::write_outputs(&first, dir_a.path()).expect("write outputs");
    bench::write_outputs(&second, dir_b.path()).expect("write outputs");
    let mut traces_equal = true;
    let mut trace_count = 0;
    let mut entries: Vec<_> = fs::read_dir(dir_a.path().join("traces"))
        .expect("traces dir")
        .map(|e| e.expect("entry").file_name())
        .collect();
    entries.sort();
    for name in entries {
        let a = fs::read(dir_a.path().join("traces").join(&name)).expect("trace a");
        let b = fs::read(dir_b.path().join("traces").join(&name)).expect("trace b");
        if a != b {
            traces_equal = false;
        }
        trace_count += 1;
    }

    let ok = aggregate_equal && results_equal && traces_equal && trace_count == 8;
    println!(
        "criterion 8: {} — repeated bench runs byte-identical (aggregate: {aggregate_equal}, results sans wall-clock: {results_equal}, {trace_count} trace files: {traces_equal})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok);
}

#[test]
fn criterion_9_traces_never_increase() {
    let mut traces = 0;
    let mut check = |result: &upmsp::engine::RunResult, label: &str| {
        for pair in result.trace.windows(2) {
            assert!(pair[1].best <= pair[0].best, "trace increased for {label}");
            assert!(
                pair[1].evaluations > pair[0].evaluations,
                "trace evaluations not strictly ordered for {label}"
            );
        }
        let exported = bench::trace_csv(
            &result
                .trace
                .iter()
                .map(|p| (p.evaluations, p.best))
                .collect::<Vec<_>>(),
        );
        assert!(exported.starts_with("evals,best_cmax\n"), "{label}");
        traces += 1;
    };

    // Small-instance runs at the criterion 5 operating point.
    for spec in optimality_suite().take(10) {
        let instance = spec.generate();
        check(&run(&instance, &fa_config(10, 5000, 1)), instance.id());
    }
    // Desk-scale runs at the criterion 6 and 7 operating points.
    for spec in desk_suite().take(2) {
        let instance = spec.generate();
        check(&run(&instance, &fa_config(40, 100_000, 1)), instance.id());
        let mut config = AlgorithmConfig::new(Algorithm::FaIwo);
        config.population = 50;
        config.max_evaluations = 20_000;
        config.seed = 1;
        check(&run(&instance, &config), instance.id());
    }
    println!("criterion 9: PASS — {traces} exported traces nonincreasing with strictly ordered evaluation counts");
    assert_eq!(traces, 14);
}

#[test]
fn criterion_10_decode_totality_fuzz() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let shapes: Vec<(usize, usize)> = [1usize, 2, 3, 4, 6, 8, 10]
        .iter()
        .flat_map(|&m| [1usize, 2, 3, 5, 8, 13, 21, 34].map(|n| (m, n)))
        .collect();
    let mut decoded = 0u64;
    let mut failures: BTreeMap<String, u64> = BTreeMap::new();
    let per_shape = 1_000_000 / shapes.len() as u64;
    let remainder = 1_000_000 - per_shape * shapes.len() as u64;
    for (index, &(machines, jobs)) in shapes.iter().enumerate() {
        let instance = GeneratorSpec::new(3000 + index as u64, machines, jobs, 1, 99, 1, 99)
            .expect("suite parameters are valid")
            .generate();
        let count = per_shape + if index == 0 { remainder } else { 0 };
        for draw in 0..count {
            let keys = KeyVector::new(
                (0..jobs)
                    .map(|j| match draw {
                        // A few adversarial boundary vectors ahead of the
                        // uniform bulk: all-zero, just below the upper
                        // bound, and exact integer boundaries.
                        0 => 0.0,
                        1 => machines as f64 - f64::EPSILON * machines as f64,
                        2 => (j % machines) as f64,
                        _ => rng.random::<f64>() * machines as f64,
                    })
                    .collect(),
            );
            let schedule = decode(&keys, &instance);
            if validate(&schedule, &instance).is_err() {
                *failures.entry(format!("m{machines} n{jobs}")).or_default() += 1;
            }
            decoded += 1;
        }
    }
    let ok = decoded == 1_000_000 && failures.is_empty();
    println!(
        "criterion 10: {} — {decoded} random key vectors decoded across {} shapes, {} invalid schedules",
        if ok { "PASS" } else { "FAIL" },
        shapes.len(),
        failures.values().sum::<u64>()
    );
    assert!(ok);
}
