//! The firefly movement pass: every individual moves toward each peer that
//! is at least as bright, pulled by a distance-decaying attraction and
//! jittered by a decaying random walk.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{reflect, Evaluator, FireflyParams, Individual};

/// Attraction felt at Euclidean distance `r`: `beta0 · exp(−gamma · r²)`.
/// Equal positions attract with the full `beta0`; the pull fades with the
/// square of the distance at rate `gamma`.
pub fn attractiveness(distance: f64, gamma: f64, beta0: f64) -> f64 {
    beta0 * (-gamma * distance * distance).exp()
}

/// Mutable movement state: the random-walk scale `alpha` decays across
/// generations down to a floor, so late generations refine rather than
/// wander.
pub(crate) struct FireflyDriver {
    params: FireflyParams,
    alpha: f64,
}

const ALPHA_FLOOR: f64 = 0.01;

impl FireflyDriver {
    pub(crate) fn new(params: FireflyParams) -> Self {
        let alpha = params.alpha;
        Self { params, alpha }
    }

    #[cfg(test)]
    pub(crate) fn alpha(&self) -> f64 {
        self.alpha
    }

    /// One generation: for every ordered pair (i, j), i ≠ j, with j at
    /// least as bright (makespan ≤, judged by the fitness values recorded
    /// at the last evaluation), individual i takes one step
    ///
    /// ```text
    /// x_i ← x_i + β(‖x_i − x_j‖)·(x_j − x_i) + α·(u − ½)   componentwise
    /// ```
    ///
    /// reflected into the key space. Steps accumulate in place over the
    /// pair sweep; each moved individual is re-decoded and re-evaluated
    /// once, after the sweep. Including ties matters on an integer
    /// objective: equal-makespan individuals keep jostling each other
    /// (zero pull when their positions coincide, leaving the pure
    /// `α·(u − ½)` walk), so a converged swarm keeps exploring instead of
    /// freezing. Only a strictly unique best individual holds still, as
    /// the elitist anchor. Ends by decaying `alpha`; returns early
    /// (without decay) when the evaluation budget runs out mid-batch.
    pub(crate) fn generation(
        &mut self,
        population: &mut [Individual],
        evaluator: &mut Evaluator<'_>,
        rng: &mut ChaCha8Rng,
    ) {
        let upper = evaluator.key_upper();
        let mut moved = vec![false; population.len()];
        for i in 0..population.len() {
            for j in 0..population.len() {
                if j == i || population[j].fitness > population[i].fitness {
                    continue;
                }
                moved[i] = true;
                let xj = population[j].position.keys.clone();
                let xi = &mut population[i].position.keys;
                let r2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b) * (a - b)).sum();
                let beta = attractiveness(r2.sqrt(), self.params.gamma, self.params.beta0);
                for (a, &b) in xi.iter_mut().zip(&xj) {
                    let step = beta * (b - *a) + self.alpha * (rng.random::<f64>() - 0.5);
                    *a = reflect(*a + step, upper);
                }
            }
        }
        for i in 0..population.len() {
            if !moved[i] {
                continue;
            }
            match evaluator.evaluate_keys(population[i].position.clone()) {
                Some(ind) => population[i] = ind,
                None => return,
            }
        }
        self.alpha = (self.alpha * self.params.alpha_decay).max(ALPHA_FLOOR);
    }
}
