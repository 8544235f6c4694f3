//! Population-based search engines: the firefly core, five partner
//! algorithms (DE, PSO, ABC, TLBO, IWO) usable standalone, and the five
//! firefly hybrids that run one partner sweep after each firefly
//! generation.
//!
//! All engines share one termination rule — a budget of makespan
//! evaluations — and one search space: a continuous key vector per
//! individual that decodes to a schedule. Every evaluation flows through
//! the [`Evaluator`], which enforces the budget, tracks the best solution
//! seen (elitism), and records the convergence trace.

mod firefly;
mod partner;

pub use firefly::attractiveness;
pub use partner::PartnerKind;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{AdjustedTimes, Instance, Time};
use crate::neighborhood::{self, LocalSearchConfig, Objective};
use crate::schedule::{decode, encode, makespan, KeyVector, Schedule};

use firefly::FireflyDriver;
use partner::PartnerDriver;

/// The eleven supported search algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Fa,
    De,
    Pso,
    Abc,
    Tlbo,
    Iwo,
    FaDe,
    FaPso,
    FaAbc,
    FaTlbo,
    FaIwo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 11] = [
        Algorithm::Fa,
        Algorithm::De,
        Algorithm::Pso,
        Algorithm::Abc,
        Algorithm::Tlbo,
        Algorithm::Iwo,
        Algorithm::FaDe,
        Algorithm::FaPso,
        Algorithm::FaAbc,
        Algorithm::FaTlbo,
        Algorithm::FaIwo,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Fa => "FA",
            Algorithm::De => "DE",
            Algorithm::Pso => "PSO",
            Algorithm::Abc => "ABC",
            Algorithm::Tlbo => "TLBO",
            Algorithm::Iwo => "IWO",
            Algorithm::FaDe => "FADE",
            Algorithm::FaPso => "FAPSO",
            Algorithm::FaAbc => "FAABC",
            Algorithm::FaTlbo => "FATLBO",
            Algorithm::FaIwo => "FAIWO",
        }
    }

    /// Whether generations start with a firefly pass.
    pub fn uses_firefly(&self) -> bool {
        matches!(
            self,
            Algorithm::Fa
                | Algorithm::FaDe
                | Algorithm::FaPso
                | Algorithm::FaAbc
                | Algorithm::FaTlbo
                | Algorithm::FaIwo
        )
    }

    /// The partner algorithm swept each generation, if any.
    pub fn partner_kind(&self) -> Option<PartnerKind> {
        match self {
            Algorithm::Fa => None,
            Algorithm::De | Algorithm::FaDe => Some(PartnerKind::De),
            Algorithm::Pso | Algorithm::FaPso => Some(PartnerKind::Pso),
            Algorithm::Abc | Algorithm::FaAbc => Some(PartnerKind::Abc),
            Algorithm::Tlbo | Algorithm::FaTlbo => Some(PartnerKind::Tlbo),
            Algorithm::Iwo | Algorithm::FaIwo => Some(PartnerKind::Iwo),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Unknown algorithm name.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown algorithm `{0}` (expected one of FA, DE, PSO, ABC, TLBO, IWO, FADE, FAPSO, FAABC, FATLBO, FAIWO)")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

/// Firefly movement parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FireflyParams {
    /// Light absorption: attraction decays as exp(−γ·r²).
    pub gamma: f64,
    /// Attraction at distance zero.
    pub beta0: f64,
    /// Initial random-walk scale.
    pub alpha: f64,
    /// Geometric per-generation decay of alpha (floored at 0.01).
    pub alpha_decay: f64,
}

impl Default for FireflyParams {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            beta0: 2.0,
            alpha: 0.2,
            alpha_decay: 0.97,
        }
    }
}

/// Differential-evolution (rand/1/bin) parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeParams {
    /// Differential weight F.
    pub weight: f64,
    /// Crossover rate CR.
    pub crossover: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        Self {
            weight: 0.5,
            crossover: 0.9,
        }
    }
}

/// Particle-swarm parameters (constriction-style defaults).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp as a fraction of the key-space width `m`.
    pub velocity_span: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            cognitive: 1.494_45,
            social: 1.494_45,
            velocity_span: 0.5,
        }
    }
}

/// Artificial-bee-colony parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AbcParams {
    /// Stagnation threshold before a food source is abandoned and
    /// rescouted; `None` derives the conventional ψ·n.
    pub limit: Option<u64>,
}

/// Invasive-weed-optimization parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IwoParams {
    /// Seeds spawned by the worst individual.
    pub seeds_min: u32,
    /// Seeds spawned by the best individual.
    pub seeds_max: u32,
    /// Initial dispersion as a fraction of the key-space width `m`.
    pub sigma_initial_span: f64,
    /// Final dispersion (absolute).
    pub sigma_final: f64,
    /// Nonlinear modulation exponent of the dispersion decay.
    pub modulation: f64,
}

impl Default for IwoParams {
    fn default() -> Self {
        Self {
            seeds_min: 1,
            seeds_max: 5,
            sigma_initial_span: 0.5,
            sigma_final: 0.01,
            modulation: 3.0,
        }
    }
}

/// Per-partner parameter blocks; only the block matching the configured
/// algorithm is read.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartnerParams {
    pub de: DeParams,
    pub pso: PsoParams,
    pub abc: AbcParams,
    pub iwo: IwoParams,
}

/// Everything one run needs besides the instance.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    /// Population size ψ.
    pub population: usize,
    /// Termination budget in makespan evaluations.
    pub max_evaluations: u64,
    pub firefly: FireflyParams,
    pub partner: PartnerParams,
    pub local_search: LocalSearchConfig,
    /// Local-search invocations applied to the best individual each
    /// generation.
    pub best_improvements: u32,
    pub seed: u64,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            population: 40,
            max_evaluations: 500_000,
            firefly: FireflyParams::default(),
            partner: PartnerParams::default(),
            local_search: LocalSearchConfig::default(),
            best_improvements: 2,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.population < 2 {
            return Err(ConfigError::PopulationTooSmall(self.population));
        }
        if self.max_evaluations < self.population as u64 {
            return Err(ConfigError::BudgetBelowPopulation {
                budget: self.max_evaluations,
                population: self.population,
            });
        }
        // `is_nan` checks keep the guards rejecting NaN as well.
        let fa = &self.firefly;
        if fa.gamma.is_nan() || fa.gamma <= 0.0 || fa.beta0.is_nan() || fa.beta0 <= 0.0 {
            return Err(ConfigError::NonPositive("gamma and beta0"));
        }
        if !(0.0..=1.0).contains(&fa.alpha) {
            return Err(ConfigError::OutOfUnitRange("alpha"));
        }
        if !(fa.alpha_decay > 0.0 && fa.alpha_decay <= 1.0) {
            return Err(ConfigError::OutOfUnitRange("alpha_decay"));
        }
        if !(0.0..=1.0).contains(&self.partner.de.crossover) {
            return Err(ConfigError::OutOfUnitRange("de.crossover"));
        }
        if self.partner.de.weight < 0.0 {
            return Err(ConfigError::NonPositive("de.weight"));
        }
        let span = self.partner.pso.velocity_span;
        if span.is_nan() || span <= 0.0 {
            return Err(ConfigError::NonPositive("pso.velocity_span"));
        }
        let iwo = &self.partner.iwo;
        if iwo.seeds_min > iwo.seeds_max {
            return Err(ConfigError::SeedRange {
                min: iwo.seeds_min,
                max: iwo.seeds_max,
            });
        }
        if iwo.sigma_final.is_nan()
            || iwo.sigma_final <= 0.0
            || iwo.sigma_initial_span.is_nan()
            || iwo.sigma_initial_span <= 0.0
        {
            return Err(ConfigError::NonPositive("iwo dispersion"));
        }
        Ok(())
    }
}

/// Invalid [`AlgorithmConfig`].
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("population must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("evaluation budget {budget} cannot cover the initial population of {population}")]
    BudgetBelowPopulation { budget: u64, population: usize },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("{0} must lie in (0, 1]")]
    OutOfUnitRange(&'static str),
    #[error("iwo.seeds_min ({min}) exceeds iwo.seeds_max ({max})")]
    SeedRange { min: u32, max: u32 },
}

/// One member of the search population. The three fields are kept
/// consistent: the schedule is always the decoded position and the fitness
/// its makespan.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub position: KeyVector,
    pub schedule: Schedule,
    pub fitness: Time,
}

impl Individual {
    /// Light intensity: brighter for smaller makespans. Only the ordering
    /// matters anywhere, so the specific monotone map is inert.
    pub fn intensity(&self) -> f64 {
        1.0 / (1.0 + self.fitness as f64)
    }
}

/// One point of the convergence trace: the best makespan seen after
/// `evaluations` fitness evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TracePoint {
    pub evaluations: u64,
    pub best: Time,
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best_fitness: Time,
    pub best_schedule: Schedule,
    /// Best-so-far trajectory: one point per improvement plus a terminal
    /// point at the final evaluation count. Between points the best-so-far
    /// is constant, so this is the full step function.
    pub trace: Vec<TracePoint>,
    pub evaluations_used: u64,
    pub wall_time: Duration,
}

/// The single gate every makespan evaluation passes through: enforces the
/// budget, maintains the elitist best, and appends trace points on
/// improvement.
pub(crate) struct Evaluator<'a> {
    instance: &'a Instance,
    ap: &'a AdjustedTimes,
    budget: u64,
    used: u64,
    best_fitness: Time,
    best_schedule: Option<Schedule>,
    trace: Vec<TracePoint>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(instance: &'a Instance, ap: &'a AdjustedTimes, budget: u64) -> Self {
        Self {
            instance,
            ap,
            budget,
            used: 0,
            best_fitness: Time::MAX,
            best_schedule: None,
            trace: Vec::new(),
        }
    }

    pub(crate) fn exhausted(&self) -> bool {
        self.used >= self.budget
    }

    pub(crate) fn used(&self) -> u64 {
        self.used
    }

    pub(crate) fn budget(&self) -> u64 {
        self.budget
    }

    /// Upper end of the key space (`m`).
    pub(crate) fn key_upper(&self) -> f64 {
        self.instance.machines() as f64
    }

    /// Counts one evaluation, or signals an exhausted budget with `None`.
    pub(crate) fn evaluate_schedule(&mut self, schedule: &Schedule) -> Option<Time> {
        if self.exhausted() {
            return None;
        }
        self.used += 1;
        let fitness = makespan(schedule, self.ap);
        if fitness < self.best_fitness {
            self.best_fitness = fitness;
            self.best_schedule = Some(schedule.clone());
            self.trace.push(TracePoint {
                evaluations: self.used,
                best: fitness,
            });
        }
        Some(fitness)
    }

    /// Decodes and evaluates a key vector into a full individual.
    pub(crate) fn evaluate_keys(&mut self, keys: KeyVector) -> Option<Individual> {
        if self.exhausted() {
            return None;
        }
        let schedule = decode(&keys, self.instance);
        let fitness = self.evaluate_schedule(&schedule)?;
        Some(Individual {
            position: keys,
            schedule,
            fitness,
        })
    }

    fn into_result(mut self, wall_time: Duration) -> RunResult {
        let best_schedule = self
            .best_schedule
            .expect("at least one evaluation happened");
        if self.trace.last().map(|p| p.evaluations) != Some(self.used) {
            self.trace.push(TracePoint {
                evaluations: self.used,
                best: self.best_fitness,
            });
        }
        RunResult {
            best_fitness: self.best_fitness,
            best_schedule,
            trace: self.trace,
            evaluations_used: self.used,
            wall_time,
        }
    }
}

impl Objective for Evaluator<'_> {
    fn makespan(&mut self, schedule: &Schedule) -> Option<Time> {
        self.evaluate_schedule(schedule)
    }
}

/// Reflects `x` into `[0, upper)` by folding at the boundaries, preserving
/// locality better than clamping. Values already in range pass through
/// unchanged; non-finite input lands at 0.
pub(crate) fn reflect(x: f64, upper: f64) -> f64 {
    debug_assert!(upper > 0.0);
    if !x.is_finite() {
        return 0.0;
    }
    let period = 2.0 * upper;
    let mut y = x % period;
    if y < 0.0 {
        y += period;
    }
    if y >= upper {
        y = period - y;
    }
    if y >= upper || y < 0.0 {
        // Exactly on the fold line (or a rounding artifact of the fold).
        return 0.0;
    }
    y
}

fn random_keys<R: Rng + ?Sized>(instance: &Instance, rng: &mut R) -> KeyVector {
    let upper = instance.machines() as f64;
    KeyVector::new(
        (0..instance.jobs())
            .map(|_| rng.random::<f64>() * upper)
            .collect(),
    )
}

/// Samples `population` individuals uniformly over the key space and
/// evaluates them. [`run`] draws its initial population from the same
/// stream, so a budget of exactly ψ reproduces this population.
pub fn init_population<R: Rng + ?Sized>(
    instance: &Instance,
    population: usize,
    rng: &mut R,
) -> Vec<Individual> {
    let ap = instance.adjusted_times();
    (0..population)
        .map(|_| {
            let keys = random_keys(instance, rng);
            let schedule = decode(&keys, instance);
            let fitness = makespan(&schedule, &ap);
            Individual {
                position: keys,
                schedule,
                fitness,
            }
        })
        .collect()
}

fn best_index(population: &[Individual]) -> usize {
    population
        .iter()
        .enumerate()
        .min_by_key(|(_, ind)| ind.fitness)
        .map(|(i, _)| i)
        .expect("population is never empty")
}

/// Runs the configured number of local-search invocations on the current
/// best individual, re-encoding any improvement back into key space so the
/// position/schedule/fitness invariant holds.
fn improve_best(
    population: &mut [Individual],
    evaluator: &mut Evaluator<'_>,
    config: &LocalSearchConfig,
    repetitions: u32,
    rng: &mut ChaCha8Rng,
) {
    for _ in 0..repetitions {
        if evaluator.exhausted() {
            return;
        }
        let best = best_index(population);
        let mut candidate = population[best].schedule.clone();
        let current = population[best].fitness;
        let outcome = neighborhood::improve(&mut candidate, current, evaluator, config, rng);
        if outcome.makespan < current {
            population[best] = Individual {
                position: encode(&candidate),
                schedule: candidate,
                fitness: outcome.makespan,
            };
        }
    }
}

/// Runs one algorithm on one instance until the evaluation budget is
/// spent. Deterministic given the config (including its seed); the wall
/// time is the only field that varies between repeats.
///
/// Panics if the config fails [`AlgorithmConfig::validate`].
pub fn run(instance: &Instance, config: &AlgorithmConfig) -> RunResult {
    if let Err(e) = config.validate() {
        panic!("invalid algorithm configuration: {e}");
    }
    let start = Instant::now();
    let ap = instance.adjusted_times();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut evaluator = Evaluator::new(instance, &ap, config.max_evaluations);

    let mut population: Vec<Individual> = (0..config.population)
        .map(|_| {
            let keys = random_keys(instance, &mut rng);
            evaluator
                .evaluate_keys(keys)
                .expect("validated budget covers the initial population")
        })
        .collect();

    let mut firefly = config
        .algorithm
        .uses_firefly()
        .then(|| FireflyDriver::new(config.firefly));
    let mut partner = config
        .algorithm
        .partner_kind()
        .map(|kind| PartnerDriver::new(kind, &config.partner, config.population));

    while !evaluator.exhausted() {
        let used_before = evaluator.used();
        if let Some(driver) = firefly.as_mut() {
            driver.generation(&mut population, &mut evaluator, &mut rng);
            improve_best(
                &mut population,
                &mut evaluator,
                &config.local_search,
                config.best_improvements,
                &mut rng,
            );
            if let Some(driver) = partner.as_mut() {
                driver.sweep(&mut population, &mut evaluator, &mut rng);
            }
        } else {
            let driver = partner
                .as_mut()
                .expect("non-firefly algorithms always have a partner");
            driver.sweep(&mut population, &mut evaluator, &mut rng);
            improve_best(
                &mut population,
                &mut evaluator,
                &config.local_search,
                config.best_improvements,
                &mut rng,
            );
        }
        // Defensive: a generation that cannot spend budget would loop
        // forever (cannot happen with the shipped drivers).
        if evaluator.used() == used_before {
            break;
        }
    }
    evaluator.into_result(start.elapsed())
}
