//! The two-stage solution representation (machine assignment plus
//! per-machine job sequences), random-key decoding, feasibility checking,
//! and makespan evaluation.

use std::fmt;

use crate::instance::{AdjustedTimes, Instance, Time};

/// A continuous search-space point: one key per job, each in `[0, m)`.
///
/// The integer part of a key names the job's machine; the fractional part
/// ranks it within that machine's sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyVector {
    pub keys: Vec<f64>,
}

impl KeyVector {
    pub fn new(keys: Vec<f64>) -> Self {
        Self { keys }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// A complete solution: which machine each job runs on and in what order.
///
/// Internally 0-based; the text form printed by [`Schedule::to_lines`] is
/// 1-based like the instance format.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub(crate) assignment: Vec<usize>,
    pub(crate) sequences: Vec<Vec<usize>>,
}

impl Schedule {
    /// Builds a schedule from per-machine sequences, deriving the
    /// assignment vector. Panics if the sequences are not a partition of
    /// `0..jobs` — callers constructing schedules from untrusted data
    /// should run [`validate`] instead.
    pub fn from_sequences(jobs: usize, sequences: Vec<Vec<usize>>) -> Self {
        let mut assignment = vec![usize::MAX; jobs];
        for (k, seq) in sequences.iter().enumerate() {
            for &job in seq {
                assert!(job < jobs, "job index {job} out of range");
                assert_eq!(assignment[job], usize::MAX, "job {job} scheduled twice");
                assignment[job] = k;
            }
        }
        assert!(
            assignment.iter().all(|&k| k != usize::MAX),
            "every job must be scheduled"
        );
        Self {
            assignment,
            sequences,
        }
    }

    pub fn jobs(&self) -> usize {
        self.assignment.len()
    }

    pub fn machines(&self) -> usize {
        self.sequences.len()
    }

    /// Machine of each job.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sequences(&self) -> &[Vec<usize>] {
        &self.sequences
    }

    pub fn sequence(&self, machine: usize) -> &[usize] {
        &self.sequences[machine]
    }

    /// One line per machine, `k: j1 j2 …`, all indices 1-based.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for (k, seq) in self.sequences.iter().enumerate() {
            out.push_str(&format!("{}:", k + 1));
            for &job in seq {
                out.push_str(&format!(" {}", job + 1));
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.to_lines().trim_end())
    }
}

/// Maps keys to a schedule: machine from the integer part, order within a
/// machine by ascending fractional part (ties broken by job index).
///
/// Total for any finite keys: the machine index is clamped to the last
/// machine (floating artifacts can produce exactly `m`), and out-of-range
/// values still land on a valid machine via saturation.
pub fn decode(keys: &KeyVector, instance: &Instance) -> Schedule {
    assert_eq!(keys.len(), instance.jobs(), "one key per job is required");
    let m = instance.machines();
    let mut buckets: Vec<Vec<(f64, usize)>> = vec![Vec::new(); m];
    let mut assignment = Vec::with_capacity(keys.len());
    for (job, &key) in keys.keys.iter().enumerate() {
        let machine = (key.floor() as usize).min(m - 1);
        assignment.push(machine);
        buckets[machine].push((key - key.floor(), job));
    }
    let sequences = buckets
        .into_iter()
        .map(|mut bucket| {
            bucket.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            bucket.into_iter().map(|(_, job)| job).collect()
        })
        .collect();
    Schedule {
        assignment,
        sequences,
    }
}

/// Inverse bridge for feeding improved schedules back into key space:
/// produces keys that [`decode`] maps to exactly `schedule`, with ranks
/// spread evenly inside each machine's unit interval.
pub fn encode(schedule: &Schedule) -> KeyVector {
    let mut keys = vec![0.0; schedule.jobs()];
    for (machine, seq) in schedule.sequences.iter().enumerate() {
        let len = seq.len();
        for (pos, &job) in seq.iter().enumerate() {
            keys[job] = machine as f64 + (pos + 1) as f64 / (len + 1) as f64;
        }
    }
    KeyVector::new(keys)
}

/// A broken scheduling rule found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Assignment vector length differs from the job count.
    AssignmentLength { expected: usize, actual: usize },
    /// Sequence list length differs from the machine count.
    MachineCount { expected: usize, actual: usize },
    /// A job is assigned to a machine index that does not exist.
    MachineIndex { job: usize, machine: usize },
    /// A sequence mentions a job index that does not exist.
    JobIndex { machine: usize, job: usize },
    /// A job appears more than once within one machine's sequence.
    RepeatWithinSequence { machine: usize, job: usize },
    /// A job is scheduled a number of times different from exactly once.
    Multiplicity { job: usize, count: usize },
    /// A job sits in some machine's sequence but is assigned elsewhere.
    AssignmentMismatch {
        job: usize,
        assigned: usize,
        found_on: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::AssignmentLength { expected, actual } => {
                write!(f, "assignment lists {actual} jobs, instance has {expected}")
            }
            Violation::MachineCount { expected, actual } => {
                write!(
                    f,
                    "schedule lists {actual} machines, instance has {expected}"
                )
            }
            Violation::MachineIndex { job, machine } => {
                write!(
                    f,
                    "job {} assigned to nonexistent machine {}",
                    job + 1,
                    machine + 1
                )
            }
            Violation::JobIndex { machine, job } => {
                write!(
                    f,
                    "machine {} sequences nonexistent job {}",
                    machine + 1,
                    job + 1
                )
            }
            Violation::RepeatWithinSequence { machine, job } => {
                write!(
                    f,
                    "job {} repeats within machine {}'s sequence",
                    job + 1,
                    machine + 1
                )
            }
            Violation::Multiplicity { job, count } => {
                write!(
                    f,
                    "job {} scheduled {count} times, must be exactly once",
                    job + 1
                )
            }
            Violation::AssignmentMismatch {
                job,
                assigned,
                found_on,
            } => write!(
                f,
                "job {} assigned to machine {} but sequenced on machine {}",
                job + 1,
                assigned + 1,
                found_on + 1
            ),
        }
    }
}

/// Checks every scheduling rule: each job runs exactly once, sequences
/// contain no repeats, and sequences agree with the assignment vector.
/// Violations are data, not errors; an empty list means the schedule is
/// feasible.
pub fn validate(schedule: &Schedule, instance: &Instance) -> Result<(), Vec<Violation>> {
    let n = instance.jobs();
    let m = instance.machines();
    let mut violations = Vec::new();

    if schedule.assignment.len() != n {
        violations.push(Violation::AssignmentLength {
            expected: n,
            actual: schedule.assignment.len(),
        });
    }
    if schedule.sequences.len() != m {
        violations.push(Violation::MachineCount {
            expected: m,
            actual: schedule.sequences.len(),
        });
    }
    for (job, &machine) in schedule.assignment.iter().enumerate() {
        if machine >= m {
            violations.push(Violation::MachineIndex { job, machine });
        }
    }

    let mut counts = vec![0usize; n];
    for (k, seq) in schedule.sequences.iter().enumerate() {
        let mut seen = vec![false; n];
        for &job in seq {
            if job >= n {
                violations.push(Violation::JobIndex { machine: k, job });
                continue;
            }
            if seen[job] {
                violations.push(Violation::RepeatWithinSequence { machine: k, job });
            }
            seen[job] = true;
            counts[job] += 1;
            match schedule.assignment.get(job) {
                Some(&assigned) if assigned != k => {
                    violations.push(Violation::AssignmentMismatch {
                        job,
                        assigned,
                        found_on: k,
                    });
                }
                _ => {}
            }
        }
    }
    for (job, &count) in counts.iter().enumerate() {
        if count != 1 {
            violations.push(Violation::Multiplicity { job, count });
        }
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Completion times of a full evaluation pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvaluationReport {
    /// Completion time of each job.
    pub completion: Vec<Time>,
    /// Finish time of each machine (0 when it runs nothing).
    pub per_machine_finish: Vec<Time>,
    /// The objective: latest machine finish.
    pub makespan: Time,
}

/// Evaluates a feasible schedule by walking each machine's chain: a job
/// completes at its predecessor's completion plus the adjusted
/// (setup + processing) time of the transition; a machine's first job
/// starts from the machine-start setup state at time 0.
pub fn evaluate(schedule: &Schedule, ap: &AdjustedTimes) -> EvaluationReport {
    let mut completion = vec![0; schedule.jobs()];
    let mut per_machine_finish = vec![0; schedule.machines()];
    for (k, seq) in schedule.sequences.iter().enumerate() {
        let mut t = 0;
        let mut pred = None;
        for &job in seq {
            t += ap.get(k, pred, job);
            completion[job] = t;
            pred = Some(job);
        }
        per_machine_finish[k] = t;
    }
    let makespan = per_machine_finish.iter().copied().max().unwrap_or(0);
    EvaluationReport {
        completion,
        per_machine_finish,
        makespan,
    }
}

/// Allocation-free makespan of a feasible schedule; agrees with
/// [`evaluate`] on the `makespan` field.
pub fn makespan(schedule: &Schedule, ap: &AdjustedTimes) -> Time {
    schedule
        .sequences
        .iter()
        .enumerate()
        .map(|(k, seq)| ap.chain_finish(k, seq))
        .max()
        .unwrap_or(0)
}
