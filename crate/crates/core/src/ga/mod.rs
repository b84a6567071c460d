//! Order-based steady-state GA that scrambles a binary watermark into a
//! permutation of itself with minimal normalized correlation.

pub mod crossover;
pub mod evolve;
pub mod experiment;
pub mod individual;
pub mod mutation;
pub mod permutation;
pub mod selection;

pub use crossover::{crossover_classical, crossover_x, crossover_x_with_ratio, CrossoverKind};
pub use evolve::{evolve, evolve_with_rng, GaConfig, RunStats, SteadyState};
pub use experiment::{experiment_csv, run_cell, run_experiment, ExperimentRow};
pub use individual::{fitness, Individual, Problem};
pub use mutation::{mutate, MutationKind};
pub use permutation::{apply_permutation, Permutation};
pub use selection::{rank_probability, select_parent, LinearRanking};
