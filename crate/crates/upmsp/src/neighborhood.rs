//! Mutation-based local search: swap, insert, and revert moves over a
//! schedule, tried in randomized batches and accepted only when they
//! strictly reduce the makespan.

use rand::Rng;
use thiserror::Error;

use crate::instance::{AdjustedTimes, Time};
use crate::schedule::{makespan, Schedule};

/// Selection weights for the three move schemes. They must form a
/// probability vector; the defaults favor revert (0.5) over insert (0.3)
/// over swap (0.2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeProbabilities {
    swap: f64,
    revert: f64,
    insert: f64,
}

/// Invalid scheme probabilities.
#[derive(Debug, Error, PartialEq)]
#[error("scheme probabilities must be nonnegative and sum to 1 (swap={swap}, revert={revert})")]
pub struct SchemeProbabilityError {
    pub swap: f64,
    pub revert: f64,
}

impl SchemeProbabilities {
    /// Builds the vector from the swap and revert weights; insert takes the
    /// remainder so the three always sum to 1.
    pub fn new(swap: f64, revert: f64) -> Result<Self, SchemeProbabilityError> {
        let insert = 1.0 - swap - revert;
        let ok = (0.0..=1.0).contains(&swap) && (0.0..=1.0).contains(&revert) && insert >= -1e-12;
        if !ok {
            return Err(SchemeProbabilityError { swap, revert });
        }
        Ok(Self {
            swap,
            revert,
            insert: insert.max(0.0),
        })
    }

    pub fn swap(&self) -> f64 {
        self.swap
    }

    pub fn revert(&self) -> f64 {
        self.revert
    }

    pub fn insert(&self) -> f64 {
        self.insert
    }
}

impl Default for SchemeProbabilities {
    fn default() -> Self {
        Self::new(0.2, 0.5).expect("default weights are a probability vector")
    }
}

/// Number of move attempts each scheme gets per pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveBudget {
    /// Scale with the machine count: `round(factor · m)`, at least 1.
    PerMachineFactor(f64),
    Fixed(usize),
}

impl MoveBudget {
    pub fn resolve(&self, machines: usize) -> usize {
        match *self {
            MoveBudget::PerMachineFactor(factor) => {
                ((factor * machines as f64).round() as usize).max(1)
            }
            MoveBudget::Fixed(n) => n.max(1),
        }
    }
}

impl Default for MoveBudget {
    fn default() -> Self {
        // Midpoint of the 0.5–0.9 per-machine range that works well across
        // machine counts.
        MoveBudget::PerMachineFactor(0.7)
    }
}

/// Configuration of one [`improve`] invocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalSearchConfig {
    pub probabilities: SchemeProbabilities,
    /// Full scheme rounds per invocation.
    pub passes: usize,
    pub move_budget: MoveBudget,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            probabilities: SchemeProbabilities::default(),
            passes: 1,
            move_budget: MoveBudget::default(),
        }
    }
}

/// All weights were zero (or the list empty): no selection is possible.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("degenerate roulette: no positive weight")]
pub struct DegenerateRoulette;

/// Fitness-proportionate selection: index `i` wins with probability
/// `weights[i] / Σ weights`. Weights must be nonnegative.
pub fn roulette_select<R: Rng + ?Sized>(
    weights: &[f64],
    rng: &mut R,
) -> Result<usize, DegenerateRoulette> {
    debug_assert!(
        weights.iter().all(|&w| w >= 0.0),
        "weights must be nonnegative"
    );
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(DegenerateRoulette);
    }
    let mut ticket = rng.random::<f64>() * total;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            if ticket < w {
                return Ok(i);
            }
            ticket -= w;
        }
    }
    // Floating-point slack can leave a sliver of ticket; it belongs to the
    // last carrier of positive weight.
    Ok(last_positive)
}

/// Exchanges the jobs at two positions on two *different* machines,
/// updating the assignment vector.
pub fn apply_swap(
    schedule: &mut Schedule,
    machine_a: usize,
    pos_a: usize,
    machine_b: usize,
    pos_b: usize,
) {
    assert_ne!(machine_a, machine_b, "swap requires distinct machines");
    let job_a = schedule.sequences[machine_a][pos_a];
    let job_b = schedule.sequences[machine_b][pos_b];
    schedule.sequences[machine_a][pos_a] = job_b;
    schedule.sequences[machine_b][pos_b] = job_a;
    schedule.assignment[job_a] = machine_b;
    schedule.assignment[job_b] = machine_a;
}

/// Removes the job at `(source, pos)` and splices it into `target` at
/// `target_pos` (counted against the target sequence *before* removal, and
/// clamped when removal shortens it). `source == target` reorders within
/// one machine.
pub fn apply_insert(
    schedule: &mut Schedule,
    source: usize,
    pos: usize,
    target: usize,
    target_pos: usize,
) {
    assert!(
        target_pos <= schedule.sequences[target].len(),
        "insert position out of range"
    );
    let job = schedule.sequences[source].remove(pos);
    let slot = target_pos.min(schedule.sequences[target].len());
    schedule.sequences[target].insert(slot, job);
    schedule.assignment[job] = target;
}

/// Reverses the subsequence at positions `a..=b` of one machine.
pub fn apply_revert(schedule: &mut Schedule, machine: usize, a: usize, b: usize) {
    assert!(
        a <= b && b < schedule.sequences[machine].len(),
        "revert span out of range"
    );
    schedule.sequences[machine][a..=b].reverse();
}

/// What the search minimizes. Implementations may enforce an evaluation
/// budget by returning `None`, which makes callers stop immediately.
pub trait Objective {
    /// Makespan of `schedule`, or `None` once the evaluation budget is
    /// spent (the schedule is then left unevaluated).
    fn makespan(&mut self, schedule: &Schedule) -> Option<Time>;
}

/// Unbudgeted objective reading straight from the adjusted-time matrix.
pub struct ApObjective<'a>(pub &'a AdjustedTimes);

impl Objective for ApObjective<'_> {
    fn makespan(&mut self, schedule: &Schedule) -> Option<Time> {
        Some(makespan(schedule, self.0))
    }
}

/// Tally of one [`improve`] invocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ImproveOutcome {
    /// Makespan of the schedule as returned (≤ the input makespan).
    pub makespan: Time,
    /// Trial evaluations consumed.
    pub evaluations: u64,
    /// Trials accepted (each strictly reduced the makespan).
    pub accepted: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Scheme {
    Swap,
    Insert,
    Revert,
}

enum Attempt {
    Improved(Time),
    Rejected,
    /// The scheme cannot produce a move right now (e.g. swap with a single
    /// machine, or only empty partner sequences after the retry limit).
    Skip,
    /// The objective's evaluation budget ran out.
    Exhausted,
}

/// Draws for degenerate situations (an empty sequence where a job is
/// needed) are retried this many times before the scheme gives up.
const DEGENERATE_RETRIES: usize = 10;

/// Randomized improvement: a roulette draw over the scheme probabilities
/// picks the leading scheme, then every pass runs all three schemes in
/// rotation from it, each with `move_budget` random trials, accepting a
/// trial only when it strictly reduces the makespan.
///
/// `current_makespan` must be the makespan of `schedule` as passed in.
/// The schedule is modified in place and is feasible at every step; the
/// returned makespan never exceeds the input one.
pub fn improve<O: Objective + ?Sized, R: Rng + ?Sized>(
    schedule: &mut Schedule,
    current_makespan: Time,
    objective: &mut O,
    config: &LocalSearchConfig,
    rng: &mut R,
) -> ImproveOutcome {
    let machines = schedule.machines();
    let budget = config.move_budget.resolve(machines);
    let probs = &config.probabilities;
    let weights = [probs.swap(), probs.insert(), probs.revert()];
    let schemes = [Scheme::Swap, Scheme::Insert, Scheme::Revert];
    let lead = roulette_select(&weights, rng).expect("scheme probabilities sum to 1");

    let mut outcome = ImproveOutcome {
        makespan: current_makespan,
        evaluations: 0,
        accepted: 0,
    };
    for _ in 0..config.passes.max(1) {
        for offset in 0..schemes.len() {
            let scheme = schemes[(lead + offset) % schemes.len()];
            for _ in 0..budget {
                let result = match scheme {
                    Scheme::Swap => attempt_swap(schedule, outcome.makespan, objective, rng),
                    Scheme::Insert => attempt_insert(schedule, outcome.makespan, objective, rng),
                    Scheme::Revert => attempt_revert(schedule, outcome.makespan, objective, rng),
                };
                match result {
                    Attempt::Improved(t) => {
                        outcome.makespan = t;
                        outcome.evaluations += 1;
                        outcome.accepted += 1;
                    }
                    Attempt::Rejected => outcome.evaluations += 1,
                    Attempt::Skip => break,
                    Attempt::Exhausted => return outcome,
                }
            }
        }
    }
    outcome
}

fn try_trial<O: Objective + ?Sized>(
    schedule: &mut Schedule,
    trial: Schedule,
    current: Time,
    objective: &mut O,
) -> Attempt {
    match objective.makespan(&trial) {
        None => Attempt::Exhausted,
        Some(t) if t < current => {
            *schedule = trial;
            Attempt::Improved(t)
        }
        Some(_) => Attempt::Rejected,
    }
}

fn attempt_swap<O: Objective + ?Sized, R: Rng + ?Sized>(
    schedule: &mut Schedule,
    current: Time,
    objective: &mut O,
    rng: &mut R,
) -> Attempt {
    let m = schedule.machines();
    if m < 2 {
        return Attempt::Skip;
    }
    let mut pair = None;
    for _ in 0..DEGENERATE_RETRIES {
        let a = rng.random_range(0..m);
        let mut b = rng.random_range(0..m - 1);
        if b >= a {
            b += 1;
        }
        if !schedule.sequences[a].is_empty() && !schedule.sequences[b].is_empty() {
            pair = Some((a, b));
            break;
        }
    }
    let Some((a, b)) = pair else {
        return Attempt::Skip;
    };
    let pos_a = rng.random_range(0..schedule.sequences[a].len());
    let pos_b = rng.random_range(0..schedule.sequences[b].len());
    let mut trial = schedule.clone();
    apply_swap(&mut trial, a, pos_a, b, pos_b);
    try_trial(schedule, trial, current, objective)
}

fn attempt_insert<O: Objective + ?Sized, R: Rng + ?Sized>(
    schedule: &mut Schedule,
    current: Time,
    objective: &mut O,
    rng: &mut R,
) -> Attempt {
    let m = schedule.machines();
    let mut source = None;
    for _ in 0..DEGENERATE_RETRIES {
        let k = rng.random_range(0..m);
        if !schedule.sequences[k].is_empty() {
            source = Some(k);
            break;
        }
    }
    let Some(source) = source else {
        return Attempt::Skip;
    };
    let pos = rng.random_range(0..schedule.sequences[source].len());
    let target = rng.random_range(0..m);
    let target_pos = rng.random_range(0..=schedule.sequences[target].len());
    let mut trial = schedule.clone();
    apply_insert(&mut trial, source, pos, target, target_pos);
    try_trial(schedule, trial, current, objective)
}

fn attempt_revert<O: Objective + ?Sized, R: Rng + ?Sized>(
    schedule: &mut Schedule,
    current: Time,
    objective: &mut O,
    rng: &mut R,
) -> Attempt {
    let m = schedule.machines();
    let mut machine = None;
    for _ in 0..DEGENERATE_RETRIES {
        let k = rng.random_range(0..m);
        if schedule.sequences[k].len() >= 2 {
            machine = Some(k);
            break;
        }
    }
    let Some(machine) = machine else {
        return Attempt::Skip;
    };
    let len = schedule.sequences[machine].len();
    let a = rng.random_range(0..len);
    let mut b = rng.random_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    let span = (a.min(b), a.max(b));
    let mut trial = schedule.clone();
    apply_revert(&mut trial, machine, span.0, span.1);
    try_trial(schedule, trial, current, objective)
}
