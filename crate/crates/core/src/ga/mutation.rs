//! Permutation mutations.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::individual::{Individual, Problem};
use crate::ga::permutation::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MutationKind {
    Insert,
    Swap,
    Inversion,
    Scramble,
}

impl MutationKind {
    pub const ALL: [MutationKind; 4] = [Self::Insert, Self::Swap, Self::Inversion, Self::Scramble];

    pub fn name(self) -> &'static str {
        match self {
            Self::Insert => "InsM",
            Self::Swap => "SwM",
            Self::Inversion => "InvM",
            Self::Scramble => "ScM",
        }
    }
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MutationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "insm" | "ins" | "insert" => Ok(Self::Insert),
            "swm" | "sw" | "swap" => Ok(Self::Swap),
            "invm" | "inv" | "inversion" | "inverse" => Ok(Self::Inversion),
            "scm" | "sc" | "scramble" => Ok(Self::Scramble),
            _ => Err(Error::InvalidParameter(format!("unknown mutation {s:?}"))),
        }
    }
}

/// Two distinct positions, ascending.
fn two_positions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    (a.min(b), a.max(b))
}

/// Mutates a permutation vector in place. Vectors shorter than two are left
/// alone.
pub fn mutate_slice<R: Rng + ?Sized>(kind: MutationKind, v: &mut [u32], rng: &mut R) {
    let n = v.len();
    if n < 2 {
        return;
    }
    match kind {
        MutationKind::Insert => {
            let from = rng.random_range(0..n);
            let mut to = rng.random_range(0..n - 1);
            if to >= from {
                to += 1;
            }
            insert_move(v, from, to);
        }
        MutationKind::Swap => {
            let (i, j) = two_positions(n, rng);
            v.swap(i, j);
        }
        MutationKind::Inversion => {
            let (i, j) = two_positions(n, rng);
            v[i..=j].reverse();
        }
        MutationKind::Scramble => {
            let (i, j) = two_positions(n, rng);
            v[i..=j].shuffle(rng);
        }
    }
}

/// Removes the element at `from` and reinserts it at `to`.
pub fn insert_move(v: &mut [u32], from: usize, to: usize) {
    if from < to {
        v[from..=to].rotate_left(1);
    } else {
        v[to..=from].rotate_right(1);
    }
}

/// Returns a mutated copy of `ind`.
pub fn mutate<R: Rng + ?Sized>(kind: MutationKind, problem: &Problem, ind: &Individual, rng: &mut R) -> Individual {
    let mut v = ind.perm().as_slice().to_vec();
    mutate_slice(kind, &mut v, rng);
    problem.make(Permutation::from_vec_unchecked(v), 0)
}
