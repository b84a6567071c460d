//! Linear ranking selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::individual::Individual;

/// Probability of drawing the individual of rank `i` (1 = worst, `mu` =
/// fittest): `(2 - s)/mu + 2 (i - 1)(s - 1) / (mu (mu - 1))`.
pub fn rank_probability(rank: usize, mu: usize, s: f64) -> f64 {
    let (i, mu) = (rank as f64, mu as f64);
    (2.0 - s) / mu + 2.0 * (i - 1.0) * (s - 1.0) / (mu * (mu - 1.0))
}

/// Sampler over ranks `1..=mu` with selection pressure `s` in `[1, 2]`.
#[derive(Clone, Debug)]
pub struct LinearRanking {
    cumulative: Vec<f64>,
}

impl LinearRanking {
    pub fn new(mu: usize, s: f64) -> Result<Self> {
        if mu < 2 {
            return Err(Error::InvalidParameter(format!("ranking needs mu >= 2, got {mu}")));
        }
        if !(1.0..=2.0).contains(&s) {
            return Err(Error::InvalidParameter(format!("selection pressure {s} outside [1, 2]")));
        }
        let mut acc = 0.0;
        let mut cumulative: Vec<f64> = (1..=mu)
            .map(|i| {
                acc += rank_probability(i, mu, s);
                acc
            })
            .collect();
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { cumulative })
    }

    pub fn mu(&self) -> usize {
        self.cumulative.len()
    }

    /// Draws a 0-based index into a population ordered worst-first, i.e.
    /// index `i` holds rank `i + 1`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cumulative.partition_point(|&c| c <= u).min(self.mu() - 1)
    }
}

/// Draws a parent from `ranked` (worst first, fittest last).
pub fn select_parent<'a, R: Rng + ?Sized>(ranked: &'a [Individual], s: f64, rng: &mut R) -> Result<&'a Individual> {
    let ranking = LinearRanking::new(ranked.len(), s)?;
    Ok(&ranked[ranking.sample(rng)])
}
