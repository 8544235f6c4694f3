//! Solvers and tooling for the unrelated parallel machine scheduling problem
//! with machine- and sequence-dependent setup times, minimizing makespan.
//!
//! The crate is organized around a small pipeline:
//!
//! - [`instance`] — problem data, the `UPMSP v1` text format, seeded
//!   generation, and the adjusted-time matrix every evaluator reads.
//! - [`schedule`] — the two-stage solution representation (machine
//!   assignment + per-machine sequences), random-key decoding, feasibility
//!   checking, and makespan evaluation.
//! - [`bounds`] — makespan lower bounds used by the metrics pipeline and as
//!   a correctness sandwich for the exact solver.
//! - [`neighborhood`] — the mutation-based local search (swap / insert /
//!   revert moves with accept-if-better).
//! - [`engine`] — population metaheuristics: the firefly core, partner
//!   sweeps (DE, PSO, ABC, TLBO, IWO), and the five firefly hybrids.
//! - [`exact`] — branch-and-bound oracle for tiny instances.
//! - [`bench`] — replicated experiments, summary statistics, deviation
//!   metrics, and CSV/SVG export.

pub mod bench;
pub mod bounds;
pub mod engine;
pub mod exact;
pub mod instance;
pub mod neighborhood;
pub mod schedule;

#[cfg(test)]
pub(crate) mod testdata;
