//! Partner update sweeps: one generation each of differential evolution,
//! particle swarm, artificial bee colony, teaching–learning-based
//! optimization, and invasive weed optimization, all operating on the
//! shared continuous key vectors.
//!
//! Each sweep re-decodes and re-evaluates every changed position through
//! the engine's [`Evaluator`], stopping as soon as the budget runs out.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::instance::Time;
use crate::schedule::KeyVector;

use super::{reflect, DeParams, Evaluator, Individual, IwoParams, PartnerParams, PsoParams};

/// The five partner algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PartnerKind {
    De,
    Pso,
    Abc,
    Tlbo,
    Iwo,
}

/// Per-run partner state. PSO carries velocities and personal bests across
/// generations; ABC counts stagnation per food source; the others are
/// stateless between sweeps.
pub(crate) enum PartnerDriver {
    De(DeParams),
    Pso {
        params: PsoParams,
        velocities: Vec<Vec<f64>>,
        personal: Vec<(KeyVector, Time)>,
    },
    Abc {
        limit: Option<u64>,
        trials: Vec<u64>,
    },
    Tlbo,
    Iwo(IwoParams),
}

impl PartnerDriver {
    pub(crate) fn new(kind: PartnerKind, params: &PartnerParams, population: usize) -> Self {
        match kind {
            PartnerKind::De => PartnerDriver::De(params.de),
            PartnerKind::Pso => PartnerDriver::Pso {
                params: params.pso,
                velocities: Vec::new(),
                personal: Vec::new(),
            },
            PartnerKind::Abc => PartnerDriver::Abc {
                limit: params.abc.limit,
                trials: vec![0; population],
            },
            PartnerKind::Tlbo => PartnerDriver::Tlbo,
            PartnerKind::Iwo => PartnerDriver::Iwo(params.iwo),
        }
    }

    pub(crate) fn sweep(
        &mut self,
        population: &mut Vec<Individual>,
        evaluator: &mut Evaluator<'_>,
        rng: &mut ChaCha8Rng,
    ) {
        match self {
            PartnerDriver::De(params) => de_sweep(*params, population, evaluator, rng),
            PartnerDriver::Pso {
                params,
                velocities,
                personal,
            } => pso_sweep(*params, velocities, personal, population, evaluator, rng),
            PartnerDriver::Abc { limit, trials } => {
                abc_sweep(*limit, trials, population, evaluator, rng)
            }
            PartnerDriver::Tlbo => tlbo_sweep(population, evaluator, rng),
            PartnerDriver::Iwo(params) => iwo_sweep(*params, population, evaluator, rng),
        }
    }
}

/// Uniform index from `0..size` excluding `excluded`.
fn other_index<R: Rng + ?Sized>(size: usize, excluded: usize, rng: &mut R) -> usize {
    debug_assert!(size >= 2);
    let mut v = rng.random_range(0..size - 1);
    if v >= excluded {
        v += 1;
    }
    v
}

/// Three indices distinct from `i`; mutually distinct too when the
/// population is large enough to allow it.
fn three_others<R: Rng + ?Sized>(size: usize, i: usize, rng: &mut R) -> (usize, usize, usize) {
    if size >= 4 {
        loop {
            let a = other_index(size, i, rng);
            let b = other_index(size, i, rng);
            let c = other_index(size, i, rng);
            if a != b && b != c && a != c {
                return (a, b, c);
            }
        }
    } else {
        (
            other_index(size, i, rng),
            other_index(size, i, rng),
            other_index(size, i, rng),
        )
    }
}

/// DE rand/1/bin: donor = x_r1 + F·(x_r2 − x_r3); each component crosses
/// over from the donor with probability CR; the trial replaces the parent
/// only when strictly better. Mutation bases come from a generation-start
/// snapshot, so the sweep is synchronous.
fn de_sweep(
    params: DeParams,
    population: &mut [Individual],
    evaluator: &mut Evaluator<'_>,
    rng: &mut ChaCha8Rng,
) {
    let upper = evaluator.key_upper();
    let snapshot: Vec<KeyVector> = population.iter().map(|ind| ind.position.clone()).collect();
    let size = snapshot.len();
    for i in 0..size {
        if evaluator.exhausted() {
            return;
        }
        let (r1, r2, r3) = three_others(size, i, rng);
        let keys: Vec<f64> = (0..snapshot[i].len())
            .map(|d| {
                let donor = snapshot[r1].keys[d]
                    + params.weight * (snapshot[r2].keys[d] - snapshot[r3].keys[d]);
                let v = if rng.random::<f64>() < params.crossover {
                    donor
                } else {
                    snapshot[i].keys[d]
                };
                reflect(v, upper)
            })
            .collect();
        match evaluator.evaluate_keys(KeyVector::new(keys)) {
            Some(trial) if trial.fitness < population[i].fitness => population[i] = trial,
            Some(_) => {}
            None => return,
        }
    }
}

/// PSO: velocity update against the personal and global bests with a
/// per-component clamp, then an unconditional position move. Personal and
/// global bests are greedy, so the swarm's memory never worsens.
fn pso_sweep(
    params: PsoParams,
    velocities: &mut Vec<Vec<f64>>,
    personal: &mut Vec<(KeyVector, Time)>,
    population: &mut [Individual],
    evaluator: &mut Evaluator<'_>,
    rng: &mut ChaCha8Rng,
) {
    let upper = evaluator.key_upper();
    let size = population.len();
    let dims = population[0].position.len();
    if velocities.len() != size {
        *velocities = vec![vec![0.0; dims]; size];
        *personal = population
            .iter()
            .map(|ind| (ind.position.clone(), ind.fitness))
            .collect();
    }
    let vmax = params.velocity_span * upper;
    let mut gbest = personal
        .iter()
        .enumerate()
        .min_by_key(|(_, (_, f))| *f)
        .map(|(i, _)| i)
        .expect("population is never empty");
    let mut gbest_keys = personal[gbest].0.clone();
    for i in 0..size {
        if evaluator.exhausted() {
            return;
        }
        let keys: Vec<f64> = (0..dims)
            .map(|d| {
                let x = population[i].position.keys[d];
                let v = params.inertia * velocities[i][d]
                    + params.cognitive * rng.random::<f64>() * (personal[i].0.keys[d] - x)
                    + params.social * rng.random::<f64>() * (gbest_keys.keys[d] - x);
                let v = v.clamp(-vmax, vmax);
                velocities[i][d] = v;
                reflect(x + v, upper)
            })
            .collect();
        match evaluator.evaluate_keys(KeyVector::new(keys)) {
            Some(moved) => {
                if moved.fitness < personal[i].1 {
                    personal[i] = (moved.position.clone(), moved.fitness);
                    if moved.fitness < personal[gbest].1 {
                        gbest = i;
                        gbest_keys = personal[i].0.clone();
                    }
                }
                population[i] = moved;
            }
            None => return,
        }
    }
}

/// ABC employed-bee phase: each source gets a one-dimensional perturbation
/// toward or away from a random partner, kept only if strictly better;
/// stagnant sources count trials. Scout phase: the most stagnant source
/// past the limit (conventionally ψ·n) is abandoned and resampled
/// uniformly.
fn abc_sweep(
    limit: Option<u64>,
    trials: &mut Vec<u64>,
    population: &mut [Individual],
    evaluator: &mut Evaluator<'_>,
    rng: &mut ChaCha8Rng,
) {
    let upper = evaluator.key_upper();
    let size = population.len();
    let dims = population[0].position.len();
    if trials.len() != size {
        *trials = vec![0; size];
    }
    let limit = limit.unwrap_or((size * dims) as u64);
    for i in 0..size {
        if evaluator.exhausted() {
            return;
        }
        let partner = other_index(size, i, rng);
        let d = rng.random_range(0..dims);
        let phi = rng.random_range(-1.0..1.0);
        let mut keys = population[i].position.keys.clone();
        keys[d] = reflect(
            keys[d] + phi * (keys[d] - population[partner].position.keys[d]),
            upper,
        );
        match evaluator.evaluate_keys(KeyVector::new(keys)) {
            Some(trial) if trial.fitness < population[i].fitness => {
                population[i] = trial;
                trials[i] = 0;
            }
            Some(_) => trials[i] += 1,
            None => return,
        }
    }
    // At most one scout per sweep: the first source with the highest
    // trial count beyond the limit.
    let mut scout: Option<(usize, u64)> = None;
    for (i, &t) in trials.iter().enumerate() {
        if t > limit && scout.is_none_or(|(_, best)| t > best) {
            scout = Some((i, t));
        }
    }
    if let Some((i, _)) = scout {
        if evaluator.exhausted() {
            return;
        }
        let keys: Vec<f64> = (0..dims).map(|_| rng.random::<f64>() * upper).collect();
        if let Some(fresh) = evaluator.evaluate_keys(KeyVector::new(keys)) {
            population[i] = fresh;
            trials[i] = 0;
        }
    }
}

/// TLBO teacher phase (everyone steps toward the teacher, away from the
/// class mean scaled by a random teaching factor of 1 or 2) followed by
/// the learner phase (pairwise steps toward the better of two learners).
/// Both phases accept only strict improvements.
fn tlbo_sweep(population: &mut [Individual], evaluator: &mut Evaluator<'_>, rng: &mut ChaCha8Rng) {
    let upper = evaluator.key_upper();
    let size = population.len();
    let dims = population[0].position.len();

    let mut mean = vec![0.0; dims];
    for ind in population.iter() {
        for (acc, &k) in mean.iter_mut().zip(&ind.position.keys) {
            *acc += k;
        }
    }
    for acc in &mut mean {
        *acc /= size as f64;
    }
    let teacher = population
        .iter()
        .min_by_key(|ind| ind.fitness)
        .expect("population is never empty")
        .position
        .clone();

    for individual in population.iter_mut() {
        if evaluator.exhausted() {
            return;
        }
        let tf = rng.random_range(1..=2) as f64;
        let keys: Vec<f64> = (0..dims)
            .map(|d| {
                let x = individual.position.keys[d];
                let step = rng.random::<f64>() * (teacher.keys[d] - tf * mean[d]);
                reflect(x + step, upper)
            })
            .collect();
        match evaluator.evaluate_keys(KeyVector::new(keys)) {
            Some(trial) if trial.fitness < individual.fitness => *individual = trial,
            Some(_) => {}
            None => return,
        }
    }

    for i in 0..size {
        if evaluator.exhausted() {
            return;
        }
        let j = other_index(size, i, rng);
        let toward_better = population[i].fitness < population[j].fitness;
        let keys: Vec<f64> = (0..dims)
            .map(|d| {
                let xi = population[i].position.keys[d];
                let xj = population[j].position.keys[d];
                let diff = if toward_better { xi - xj } else { xj - xi };
                reflect(xi + rng.random::<f64>() * diff, upper)
            })
            .collect();
        match evaluator.evaluate_keys(KeyVector::new(keys)) {
            Some(trial) if trial.fitness < population[i].fitness => population[i] = trial,
            Some(_) => {}
            None => return,
        }
    }
}

/// IWO: every individual seeds offspring — more seeds for fitter parents —
/// scattered normally around the parent with a dispersion that tightens
/// nonlinearly as the evaluation budget is consumed; parents and offspring
/// then compete, and only the best ψ survive.
fn iwo_sweep(
    params: IwoParams,
    population: &mut Vec<Individual>,
    evaluator: &mut Evaluator<'_>,
    rng: &mut ChaCha8Rng,
) {
    let upper = evaluator.key_upper();
    let size = population.len();
    let progress = (evaluator.used() as f64 / evaluator.budget() as f64).min(1.0);
    let sigma_initial = params.sigma_initial_span * upper;
    let sigma = params.sigma_final
        + (1.0 - progress).powf(params.modulation) * (sigma_initial - params.sigma_final);
    let normal = Normal::new(0.0, sigma).expect("dispersion is positive and finite");

    let best = population
        .iter()
        .map(|ind| ind.fitness)
        .min()
        .expect("population is never empty");
    let worst = population.iter().map(|ind| ind.fitness).max().unwrap();

    let parents: Vec<KeyVector> = population.iter().map(|ind| ind.position.clone()).collect();
    let fitnesses: Vec<Time> = population.iter().map(|ind| ind.fitness).collect();
    let mut offspring = Vec::new();
    'seeding: for (keys, &fitness) in parents.iter().zip(&fitnesses) {
        let ratio = if worst == best {
            0.5
        } else {
            (worst - fitness) as f64 / (worst - best) as f64
        };
        let seeds = params.seeds_min
            + ((params.seeds_max - params.seeds_min) as f64 * ratio).round() as u32;
        for _ in 0..seeds {
            if evaluator.exhausted() {
                break 'seeding;
            }
            let child: Vec<f64> = keys
                .keys
                .iter()
                .map(|&k| reflect(k + normal.sample(rng), upper))
                .collect();
            match evaluator.evaluate_keys(KeyVector::new(child)) {
                Some(ind) => offspring.push(ind),
                None => break 'seeding,
            }
        }
    }
    population.extend(offspring);
    // Stable sort: at equal fitness, surviving parents outrank newcomers.
    population.sort_by_key(|ind| ind.fitness);
    population.truncate(size);
}
