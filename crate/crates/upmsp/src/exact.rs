//! Exact optimum for tiny instances via depth-first branch-and-bound.
//!
//! The search builds machine chains one machine at a time: at each node it
//! either appends one of the remaining jobs to the machine currently being
//! filled or closes that machine and starts the next. Every complete
//! schedule is reachable exactly once, partial makespans grow monotonically
//! (all times are nonnegative), and residual lower bounds prune safely.

use std::time::{Duration, Instant};

use crate::bounds::min_adjusted;
use crate::instance::{AdjustedTimes, Instance, Time};
use crate::schedule::Schedule;

/// Search limits. Jobs above `max_jobs` are refused outright; the node and
/// time caps end the search early with the incumbent and `proven = false`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactLimits {
    pub max_jobs: usize,
    pub node_cap: u64,
    pub time_cap: Option<Duration>,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_jobs: 9,
            node_cap: u64::MAX,
            time_cap: None,
        }
    }
}

/// Outcome of an exact search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactResult {
    /// Best makespan found; the global optimum when `proven`.
    pub optimum: Time,
    /// A schedule attaining `optimum`.
    pub witness: Schedule,
    /// Branch nodes expanded.
    pub nodes: u64,
    /// True when the search space was exhausted within the limits.
    pub proven: bool,
}

struct Search<'a> {
    ap: &'a AdjustedTimes,
    machines: usize,
    /// Cheapest adjusted time of each job anywhere (for residual bounds).
    cheapest: Vec<Time>,
    deadline: Option<Instant>,
    node_cap: u64,
    nodes: u64,
    aborted: bool,
    incumbent: Time,
    witness: Vec<Vec<usize>>,
    // Mutable node state.
    sequences: Vec<Vec<usize>>,
    finish: Vec<Time>,
    remaining: Vec<bool>,
    remaining_sum: Time,
}

impl Search<'_> {
    /// Append-or-close branching on `machine`; jobs before `machine` are
    /// final, machines after it untouched.
    fn branch(&mut self, machine: usize, remaining_count: usize) {
        self.nodes += 1;
        if self.nodes >= self.node_cap {
            self.aborted = true;
        }
        if let Some(deadline) = self.deadline {
            if self.nodes.is_multiple_of(1024) && Instant::now() >= deadline {
                self.aborted = true;
            }
        }
        if self.aborted {
            return;
        }

        if remaining_count == 0 {
            // All jobs placed: machines `machine..` stay empty.
            let makespan = self.finish.iter().copied().max().unwrap_or(0);
            if makespan < self.incumbent {
                self.incumbent = makespan;
                self.witness = self.sequences.clone();
            }
            return;
        }
        if machine == self.machines {
            return; // jobs left but no machine to hold them
        }

        // Residual bound: current finishes are final floors; every
        // remaining job costs at least its cheapest adjusted time; the
        // open machines (the current one, already loaded, plus the
        // untouched ones) must absorb that work on average.
        let current_max = self.finish.iter().copied().max().unwrap_or(0);
        let open = (self.machines - machine) as u64;
        let spread = (self.finish[machine] + self.remaining_sum).div_ceil(open);
        let mut bound = current_max.max(spread);
        for (job, &free) in self.remaining.iter().enumerate() {
            if free {
                bound = bound.max(self.cheapest[job]);
            }
        }
        if bound >= self.incumbent {
            return;
        }

        for job in 0..self.remaining.len() {
            if !self.remaining[job] {
                continue;
            }
            let pred = self.sequences[machine].last().copied();
            let step = self.ap.get(machine, pred, job);
            self.remaining[job] = false;
            self.remaining_sum -= self.cheapest[job];
            self.sequences[machine].push(job);
            let saved_finish = self.finish[machine];
            self.finish[machine] = saved_finish + step;

            self.branch(machine, remaining_count - 1);

            self.finish[machine] = saved_finish;
            self.sequences[machine].pop();
            self.remaining_sum += self.cheapest[job];
            self.remaining[job] = true;
            if self.aborted {
                return;
            }
        }

        self.branch(machine + 1, remaining_count);
    }
}

/// Greedy warm start: place jobs in index order, each onto the machine
/// position minimizing the resulting finish time of that machine. Gives
/// the search a finite incumbent and a guaranteed witness.
fn greedy_incumbent(ap: &AdjustedTimes) -> (Time, Vec<Vec<usize>>) {
    let mut sequences: Vec<Vec<usize>> = vec![Vec::new(); ap.machines()];
    let mut finish: Vec<Time> = vec![0; ap.machines()];
    for job in 0..ap.jobs() {
        let (k, new_finish) = (0..ap.machines())
            .map(|k| {
                let pred = sequences[k].last().copied();
                (k, finish[k] + ap.get(k, pred, job))
            })
            .min_by_key(|&(_, f)| f)
            .expect("at least one machine");
        sequences[k].push(job);
        finish[k] = new_finish;
    }
    (finish.into_iter().max().unwrap_or(0), sequences)
}

/// Finds the minimum makespan over all feasible schedules.
///
/// Panics if `instance.jobs() > limits.max_jobs` — the search is factorial
/// and meant for oracle-scale instances only.
pub fn solve_exact(instance: &Instance, limits: &ExactLimits) -> ExactResult {
    assert!(
        instance.jobs() <= limits.max_jobs,
        "exact search limited to {} jobs, instance has {}",
        limits.max_jobs,
        instance.jobs()
    );
    let ap = instance.adjusted_times();
    let cheapest: Vec<Time> = (0..instance.jobs()).map(|j| min_adjusted(&ap, j)).collect();
    let (incumbent, witness) = greedy_incumbent(&ap);
    let mut search = Search {
        ap: &ap,
        machines: instance.machines(),
        remaining_sum: cheapest.iter().sum(),
        cheapest,
        deadline: limits.time_cap.map(|cap| Instant::now() + cap),
        node_cap: limits.node_cap,
        nodes: 0,
        aborted: false,
        incumbent,
        witness,
        sequences: vec![Vec::new(); instance.machines()],
        finish: vec![0; instance.machines()],
        remaining: vec![true; instance.jobs()],
    };
    search.branch(0, instance.jobs());
    ExactResult {
        optimum: search.incumbent,
        witness: Schedule::from_sequences(instance.jobs(), search.witness),
        nodes: search.nodes,
        proven: !search.aborted,
    }
}
