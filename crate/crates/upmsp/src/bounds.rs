//! Lower bounds on the optimal makespan.
//!
//! Two complementary bounds are computed from the adjusted-time matrix:
//! a load bound (every job must pay at least its cheapest adjusted time
//! somewhere, and that total work spreads over at most `m` machines) and a
//! bottleneck bound (some job pays at least its cheapest adjusted time on
//! whatever machine runs it). Their maximum is the bound used by the
//! metrics pipeline and the exact solver's sanity sandwich.

use std::cmp::Ordering;
use std::fmt;

use crate::instance::{AdjustedTimes, Time};

/// An exact nonnegative fraction. The load bound divides a sum of integer
/// times by the machine count; keeping it rational preserves full precision
/// instead of rounding (fractional bounds are meaningful when comparing
/// against averaged makespans).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fraction {
    num: u64,
    den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "denominator must be positive");
        Self { num, den }
    }

    pub fn integer(value: u64) -> Self {
        Self { num: value, den: 1 }
    }

    pub fn numerator(&self) -> u64 {
        self.num
    }

    pub fn denominator(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Smallest integer ≥ the fraction; useful for integer-domain
    /// comparisons (an integer makespan below the bound must be < ceil).
    pub fn ceil(&self) -> u64 {
        self.num.div_ceil(self.den)
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        // Cross-multiply in u128: no overflow for any u64 operands.
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.num.is_multiple_of(self.den) {
            write!(f, "{}", self.num / self.den)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// The two lower bounds and their combination.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundReport {
    /// Load bound: (Σ_j cheapest adjusted time of j) / m, kept exact.
    pub lb1: Fraction,
    /// Bottleneck bound: max_j cheapest adjusted time of j.
    pub lb2: Time,
}

impl BoundReport {
    /// The combined bound, max(lb1, lb2).
    pub fn lb(&self) -> Fraction {
        self.lb1.max(Fraction::integer(self.lb2))
    }
}

/// Cheapest adjusted (setup + processing) time of `job` over all machines
/// and all predecessor states except the job itself. No feasible schedule
/// can run the job cheaper.
pub fn min_adjusted(ap: &AdjustedTimes, job: usize) -> Time {
    let mut best = Time::MAX;
    for k in 0..ap.machines() {
        best = best.min(ap.get(k, None, job));
        for pred in 0..ap.jobs() {
            if pred != job {
                best = best.min(ap.get(k, Some(pred), job));
            }
        }
    }
    best
}

/// Computes both bounds. Validity: summing each job's cheapest adjusted
/// time undercounts every machine chain, and total work spreads across at
/// most `m` machines, so the average undercuts the maximum (lb1); any
/// single job's cheapest adjusted time undercuts the finish of the machine
/// running it (lb2).
pub fn lower_bounds(ap: &AdjustedTimes) -> BoundReport {
    let mut sum = 0u64;
    let mut worst = 0;
    for job in 0..ap.jobs() {
        let cheapest = min_adjusted(ap, job);
        sum += cheapest;
        worst = worst.max(cheapest);
    }
    BoundReport {
        lb1: Fraction::new(sum, ap.machines() as u64),
        lb2: worst,
    }
}
