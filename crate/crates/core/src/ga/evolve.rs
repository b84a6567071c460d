//! The steady-state loop.
//!
//! Each generation draws parents by linear ranking, produces two crossover
//! offspring and one mutation offspring, and replaces the worst members with
//! the accepted offspring. White sets are unique within a generation, and the
//! best individual is never removed.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::crossover::{crossover_classical, crossover_x, CrossoverKind};
use crate::ga::individual::{Individual, Problem};
use crate::ga::mutation::{mutate, MutationKind};
use crate::ga::permutation::Permutation;
use crate::ga::selection::LinearRanking;
use crate::image::BinaryWatermark;
use crate::rng::{stream_rng, StreamRng};

/// SwM retries for an offspring that duplicates a member's white set.
pub const DUPLICATE_RETRIES: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaConfig {
    pub pop_size: usize,
    pub generations: usize,
    /// Linear ranking pressure `s` in `[1, 2]`.
    pub selection_pressure: f64,
    pub crossover: CrossoverKind,
    pub mutation: MutationKind,
    pub rng_seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            pop_size: 20,
            generations: 50,
            selection_pressure: 1.5,
            crossover: CrossoverKind::X,
            mutation: MutationKind::Inversion,
            rng_seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pop_size < 4 {
            return Err(Error::InvalidParameter(format!("population of {} is below the minimum of 4", self.pop_size)));
        }
        if !(1.0..=2.0).contains(&self.selection_pressure) {
            return Err(Error::InvalidParameter(format!(
                "selection pressure {} outside [1, 2]",
                self.selection_pressure
            )));
        }
        Ok(())
    }
}

/// Trace of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    /// Best NC in the initial population.
    pub nc0: f64,
    /// Best NC after the last generation.
    pub nc_final: f64,
    /// First generation whose best equals `nc_final` (0 = initial).
    pub found_at: usize,
    /// Best NC per generation, index 0 being the initial population.
    pub per_generation_best: Vec<f64>,
}

/// Runs the GA seeded from `cfg.rng_seed`.
pub fn evolve(original: &BinaryWatermark, cfg: &GaConfig) -> Result<(Individual, RunStats)> {
    let mut rng = stream_rng(cfg.rng_seed, 0);
    evolve_with_rng(original, cfg, &mut rng)
}

/// Runs the GA on an explicit random stream; `cfg.rng_seed` is ignored.
pub fn evolve_with_rng(
    original: &BinaryWatermark,
    cfg: &GaConfig,
    rng: &mut StreamRng,
) -> Result<(Individual, RunStats)> {
    cfg.validate()?;
    let problem = Problem::new(original)?;
    let mut ga = SteadyState::new(&problem, cfg, rng)?;

    let mut best = vec![ga.best().fitness()];
    for _ in 0..cfg.generations {
        ga.step()?;
        best.push(ga.best().fitness());
    }

    let winner = ga.best().clone();
    let nc_final = *best.last().unwrap();
    Ok((
        winner,
        RunStats {
            nc0: best[0],
            nc_final,
            found_at: best.iter().position(|&v| v == nc_final).unwrap(),
            per_generation_best: best,
        },
    ))
}

/// Population state; exposed for step-by-step inspection in tests.
pub struct SteadyState<'a> {
    problem: &'a Problem,
    cfg: GaConfig,
    ranking: LinearRanking,
    rng: &'a mut StreamRng,
    population: Vec<Individual>,
    next_birth: u64,
}

impl<'a> SteadyState<'a> {
    /// Builds `pop_size` random permutations with pairwise-distinct white sets.
    pub fn new(problem: &'a Problem, cfg: &GaConfig, rng: &'a mut StreamRng) -> Result<Self> {
        cfg.validate()?;
        let ranking = LinearRanking::new(cfg.pop_size, cfg.selection_pressure)?;
        let mut state =
            Self { problem, cfg: *cfg, ranking, rng, population: Vec::with_capacity(cfg.pop_size + 3), next_birth: 0 };

        let budget = 1000 * cfg.pop_size;
        let mut attempts = 0;
        while state.population.len() < cfg.pop_size {
            attempts += 1;
            if attempts > budget {
                return Err(Error::InvalidParameter(format!(
                    "could not draw {} distinct individuals; the search space is too small",
                    cfg.pop_size
                )));
            }
            let ind = problem.make(random_permutation(problem.len(), state.rng), 0);
            if !state.population.iter().any(|p| p.same_white_set(&ind)) {
                state.admit(ind);
            }
        }
        Ok(state)
    }

    fn admit(&mut self, mut ind: Individual) {
        ind.born = self.next_birth;
        self.next_birth += 1;
        self.population.push(ind);
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    /// Fittest member; the oldest wins ties.
    pub fn best(&self) -> &Individual {
        self.population.iter().min_by(|a, b| a.fitness().total_cmp(&b.fitness()).then(a.born.cmp(&b.born))).unwrap()
    }

    /// Worst first; among equal fitness the older member ranks lower.
    fn rank(&mut self) {
        self.population.sort_by(|a, b| b.fitness().total_cmp(&a.fitness()).then(a.born.cmp(&b.born)));
    }

    fn pick(&mut self) -> usize {
        self.ranking.sample(self.rng)
    }

    /// Two distinct parent indices.
    fn pick_pair(&mut self) -> (usize, usize) {
        let a = self.pick();
        let mut b = self.pick();
        while b == a {
            b = self.pick();
        }
        (a, b)
    }

    /// One generation: produce three offspring and replace the worst members
    /// with those that survive the duplicate check.
    pub fn step(&mut self) -> Result<()> {
        self.rank();
        let problem = self.problem;

        let mut offspring = Vec::with_capacity(3);
        match self.cfg.crossover {
            CrossoverKind::X => {
                for _ in 0..2 {
                    let (a, b) = self.pick_pair();
                    let child = crossover_x(problem, &self.population[a], &self.population[b], self.rng)?;
                    offspring.push(child);
                }
            }
            kind => {
                let (a, b) = self.pick_pair();
                let (c1, c2) = crossover_classical(kind, problem, &self.population[a], &self.population[b], self.rng)?;
                offspring.push(c1);
                offspring.push(c2);
            }
        }
        let parent = self.pick();
        offspring.push(mutate(self.cfg.mutation, problem, &self.population[parent], self.rng));

        let mut accepted: Vec<Individual> = Vec::with_capacity(3);
        for child in offspring {
            if let Some(child) = self.deduplicate(child, &accepted) {
                accepted.push(child);
            }
        }

        // the ranked population is worst-first
        self.population.drain(..accepted.len());
        for child in accepted {
            self.admit(child);
        }
        Ok(())
    }

    fn is_duplicate(&self, ind: &Individual, accepted: &[Individual]) -> bool {
        self.population.iter().chain(accepted).any(|p| p.same_white_set(ind))
    }

    fn deduplicate(&mut self, mut child: Individual, accepted: &[Individual]) -> Option<Individual> {
        for _ in 0..DUPLICATE_RETRIES {
            if !self.is_duplicate(&child, accepted) {
                return Some(child);
            }
            child = mutate(MutationKind::Swap, self.problem, &child, self.rng);
        }
        (!self.is_duplicate(&child, accepted)).then_some(child)
    }
}

/// `true` when every member's white set differs from every other's.
pub fn all_distinct(population: &[Individual]) -> bool {
    population.iter().enumerate().all(|(i, a)| population[i + 1..].iter().all(|b| !a.same_white_set(b)))
}

/// Draws a uniformly random permutation of `len` elements.
pub fn random_permutation<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Permutation {
    let mut images: Vec<u32> = (0..len as u32).collect();
    images.shuffle(rng);
    Permutation::from_vec_unchecked(images)
}
