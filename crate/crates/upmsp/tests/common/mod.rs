//! Shared fixtures and independent oracles for the integration suite.
//!
//! The enumerator here deliberately avoids the crate's evaluation and
//! search code: it reads raw processing and setup values off the instance
//! and folds chains with plain arithmetic, so agreement with the library is
//! evidence, not tautology.
//!
//! Each test target compiles its own copy and uses a different subset of
//! the helpers, so unused-item warnings are off.
#![allow(dead_code)]

use upmsp::instance::{Instance, Time};

/// Canonical text of the tiny two-machine, three-job fixture. Machine 1
/// runs job 1 and machine 2 runs jobs 2 then 3 for the optimal makespan of
/// 10.
pub const T1_TEXT: &str = "\
UPMSP v1
# name: t1
m 2 n 3
P
4 6
5 3
7 4
S 1
1 1 1
0 2 2
2 0 2
2 2 0
S 2
2 2 2
0 1 1
1 0 1
1 1 0
";

pub fn t1() -> Instance {
    Instance::parse(T1_TEXT).expect("fixture text is well-formed")
}

/// Completion time of one machine's job chain, straight off the instance
/// tables: initial setup, then setup-from-predecessor plus processing for
/// every job in order.
pub fn chain_finish_direct(instance: &Instance, machine: usize, sequence: &[usize]) -> Time {
    let mut finish: Time = 0;
    let mut prev: Option<usize> = None;
    for &job in sequence {
        finish += instance.setup(machine, prev, job) + instance.processing(job, machine);
        prev = Some(job);
    }
    finish
}

/// Minimal chain finish for a fixed job set on one machine, by exhaustive
/// permutation.
fn best_chain(instance: &Instance, machine: usize, jobs: &mut Vec<usize>) -> Time {
    fn recurse(
        instance: &Instance,
        machine: usize,
        jobs: &mut Vec<usize>,
        chosen: &mut Vec<usize>,
        best: &mut Time,
    ) {
        if jobs.is_empty() {
            *best = (*best).min(chain_finish_direct(instance, machine, chosen));
            return;
        }
        for i in 0..jobs.len() {
            let job = jobs.remove(i);
            chosen.push(job);
            recurse(instance, machine, jobs, chosen, best);
            chosen.pop();
            jobs.insert(i, job);
        }
    }
    if jobs.is_empty() {
        return 0;
    }
    let mut best = Time::MAX;
    let mut chosen = Vec::with_capacity(jobs.len());
    recurse(instance, machine, jobs, &mut chosen, &mut best);
    best
}

/// Global optimum by brute force: every assignment of jobs to machines,
/// and for each machine of each assignment, every job order. Chains on
/// different machines are independent, so each machine's sequence is
/// minimized separately and the assignment's makespan is their maximum.
pub fn brute_force_optimum(instance: &Instance) -> Time {
    let machines = instance.machines();
    let jobs = instance.jobs();
    let mut assignment = vec![0usize; jobs];
    let mut best = Time::MAX;
    loop {
        let mut worst_machine: Time = 0;
        for k in 0..machines {
            let mut set: Vec<usize> = (0..jobs).filter(|&j| assignment[j] == k).collect();
            worst_machine = worst_machine.max(best_chain(instance, k, &mut set));
            if worst_machine >= best {
                break;
            }
        }
        best = best.min(worst_machine);
        // Next assignment in base-`machines` counting order.
        let mut pos = 0;
        loop {
            if pos == jobs {
                return best;
            }
            assignment[pos] += 1;
            if assignment[pos] < machines {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}
