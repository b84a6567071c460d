//! Recombination operators.
//!
//! Crossover X recombines the white sets of two parents directly; the
//! classical operators (OX, PMX, CX, ER) act on the full permutations.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::ga::individual::{Individual, Problem};
use crate::ga::permutation::Permutation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CrossoverKind {
    /// White-set recombination biased towards the fitter parent.
    X,
    /// Order crossover.
    Ox,
    /// Partially mapped crossover.
    Pmx,
    /// Cycle crossover.
    Cx,
    /// Edge recombination.
    Er,
}

impl CrossoverKind {
    pub const ALL: [CrossoverKind; 5] = [Self::Ox, Self::Pmx, Self::Cx, Self::Er, Self::X];

    pub fn name(self) -> &'static str {
        match self {
            Self::X => "X",
            Self::Ox => "OX",
            Self::Pmx => "PMX",
            Self::Cx => "CX",
            Self::Er => "ER",
        }
    }
}

impl fmt::Display for CrossoverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CrossoverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown crossover {s:?}")))
    }
}

fn check_parents(problem: &Problem, a: &Individual, b: &Individual) -> Result<()> {
    let (n, k) = (problem.len(), problem.k());
    for p in [a, b] {
        if p.perm().len() != n || p.white_set().len() != k {
            return Err(Error::Dimension(format!(
                "parent over {} pixels with {} whites, problem has {n} and {k}",
                p.perm().len(),
                p.white_set().len()
            )));
        }
    }
    Ok(())
}

/// Crossover X with `r` drawn uniformly from `[0.5, 1]`.
pub fn crossover_x<R: Rng + ?Sized>(
    problem: &Problem,
    fitter: &Individual,
    other: &Individual,
    rng: &mut R,
) -> Result<Individual> {
    let r = rng.random_range(0.5..=1.0);
    crossover_x_with_ratio(problem, fitter, other, r, rng)
}

/// Crossover X for a fixed ratio `r`.
///
/// Keeps a uniform `floor(k r)`-subset `S` of the fitter parent's white set
/// and completes it with a uniform `(k - floor(k r))`-subset of the other
/// parent's white set minus `S`. Parents are swapped if given in the wrong
/// order. The child permutation is the canonical one for its white set.
pub fn crossover_x_with_ratio<R: Rng + ?Sized>(
    problem: &Problem,
    fitter: &Individual,
    other: &Individual,
    r: f64,
    rng: &mut R,
) -> Result<Individual> {
    check_parents(problem, fitter, other)?;
    if !(0.5..=1.0).contains(&r) {
        return Err(Error::InvalidParameter(format!("crossover ratio {r} outside [0.5, 1]")));
    }
    let (s1, s2) = if fitter.fitness() <= other.fitness() {
        (fitter.white_set(), other.white_set())
    } else {
        (other.white_set(), fitter.white_set())
    };
    let k = problem.k();
    let keep = ((k as f64) * r).floor() as usize;

    let mut taken = vec![false; problem.len()];
    let mut child: Vec<u32> = index::sample(rng, k, keep).into_iter().map(|i| s1[i]).collect();
    for &v in &child {
        taken[v as usize] = true;
    }
    // |S2 \ S| >= |S2| - |S| = k - keep, so the pool always suffices.
    let pool: Vec<u32> = s2.iter().copied().filter(|&v| !taken[v as usize]).collect();
    let need = k - keep;
    child.extend(index::sample(rng, pool.len(), need).into_iter().map(|i| pool[i]));
    child.sort_unstable();

    Ok(problem.make(problem.permutation_for(&child), 0))
}

/// Applies a classical permutation crossover. ER yields a single child,
/// returned twice.
pub fn crossover_classical<R: Rng + ?Sized>(
    kind: CrossoverKind,
    problem: &Problem,
    p1: &Individual,
    p2: &Individual,
    rng: &mut R,
) -> Result<(Individual, Individual)> {
    check_parents(problem, p1, p2)?;
    let (a, b) = (p1.perm().as_slice(), p2.perm().as_slice());
    let (c1, c2) = match kind {
        CrossoverKind::Ox => {
            let (i, j) = cut_points(a.len(), rng);
            (ox(a, b, i, j), ox(b, a, i, j))
        }
        CrossoverKind::Pmx => {
            let (i, j) = cut_points(a.len(), rng);
            (pmx(a, b, i, j), pmx(b, a, i, j))
        }
        CrossoverKind::Cx => cx(a, b),
        CrossoverKind::Er => {
            let child = er(a, b, rng);
            (child.clone(), child)
        }
        CrossoverKind::X => {
            return Err(Error::InvalidParameter("X is not a classical crossover".into()));
        }
    };
    let make = |v: Vec<u32>| problem.make(Permutation::from_vec_unchecked(v), 0);
    Ok((make(c1), make(c2)))
}

/// Two cut points `i <= j`, inclusive segment.
fn cut_points<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    (a.min(b), a.max(b))
}

const EMPTY: u32 = u32::MAX;

/// Order crossover: `p1[i..=j]` stays in place, the remaining positions are
/// filled from `j + 1` onwards (wrapping) with `p2`'s values in the order they
/// occur in `p2` starting after `j`.
pub fn ox(p1: &[u32], p2: &[u32], i: usize, j: usize) -> Vec<u32> {
    let n = p1.len();
    let mut child = vec![EMPTY; n];
    let mut used = vec![false; n];
    for pos in i..=j {
        child[pos] = p1[pos];
        used[p1[pos] as usize] = true;
    }
    let mut pos = (j + 1) % n;
    for off in 0..n {
        let v = p2[(j + 1 + off) % n];
        if !used[v as usize] {
            child[pos] = v;
            used[v as usize] = true;
            pos = (pos + 1) % n;
        }
    }
    child
}

/// Partially mapped crossover on the inclusive segment `i..=j`.
pub fn pmx(p1: &[u32], p2: &[u32], i: usize, j: usize) -> Vec<u32> {
    let n = p1.len();
    let mut child = vec![EMPTY; n];
    let mut in_segment = vec![false; n];
    let mut where_in_p2 = vec![0usize; n];
    for (pos, &v) in p2.iter().enumerate() {
        where_in_p2[v as usize] = pos;
    }
    for pos in i..=j {
        child[pos] = p1[pos];
        in_segment[p1[pos] as usize] = true;
    }
    for (pos, &v) in p2.iter().enumerate().take(j + 1).skip(i) {
        if in_segment[v as usize] {
            continue;
        }
        let mut at = pos;
        while (i..=j).contains(&at) {
            at = where_in_p2[p1[at] as usize];
        }
        child[at] = v;
    }
    for (slot, &v) in child.iter_mut().zip(p2) {
        if *slot == EMPTY {
            *slot = v;
        }
    }
    child
}

/// Cycle crossover: alternate cycles are copied from `p1` and `p2`.
pub fn cx(p1: &[u32], p2: &[u32]) -> (Vec<u32>, Vec<u32>) {
    let n = p1.len();
    let mut where_in_p1 = vec![0usize; n];
    for (pos, &v) in p1.iter().enumerate() {
        where_in_p1[v as usize] = pos;
    }
    let mut c1 = vec![EMPTY; n];
    let mut c2 = vec![EMPTY; n];
    let mut visited = vec![false; n];
    let mut cycle = 0usize;
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let mut pos = start;
        loop {
            visited[pos] = true;
            if cycle.is_multiple_of(2) {
                c1[pos] = p1[pos];
                c2[pos] = p2[pos];
            } else {
                c1[pos] = p2[pos];
                c2[pos] = p1[pos];
            }
            pos = where_in_p1[p2[pos] as usize];
            if pos == start {
                break;
            }
        }
        cycle += 1;
    }
    (c1, c2)
}

/// Neighbour list of one city in the edge table; at most four entries.
#[derive(Clone, Default)]
struct Edges {
    items: Vec<(u32, bool)>,
}

impl Edges {
    fn add(&mut self, v: u32) {
        match self.items.iter_mut().find(|(u, _)| *u == v) {
            Some(entry) => entry.1 = true,
            None => self.items.push((v, false)),
        }
    }

    fn remove(&mut self, v: u32) {
        self.items.retain(|(u, _)| *u != v);
    }
}

/// Edge recombination (Whitley's edge-3 rules): follow shared edges first,
/// otherwise the neighbour with the fewest remaining edges, ties at random;
/// dead ends restart from a random unvisited element.
pub fn er<R: Rng + ?Sized>(p1: &[u32], p2: &[u32], rng: &mut R) -> Vec<u32> {
    let n = p1.len();
    if n == 0 {
        return Vec::new();
    }
    let mut table = vec![Edges::default(); n];
    for parent in [p1, p2] {
        for pos in 0..n {
            let v = parent[pos] as usize;
            let prev = parent[(pos + n - 1) % n];
            let next = parent[(pos + 1) % n];
            for u in [prev, next] {
                if u as usize != v {
                    table[v].add(u);
                }
            }
        }
    }

    // unvisited values with O(1) removal
    let mut unvisited: Vec<u32> = (0..n as u32).collect();
    let mut slot: Vec<usize> = (0..n).collect();

    let mut child = Vec::with_capacity(n);
    let mut current = if rng.random_bool(0.5) { p1[0] } else { p2[0] };
    loop {
        child.push(current);
        let at = slot[current as usize];
        let last = *unvisited.last().unwrap();
        unvisited.swap_remove(at);
        if at < unvisited.len() {
            slot[last as usize] = at;
        }
        if unvisited.is_empty() {
            break;
        }
        let neighbours: Vec<(u32, bool)> = table[current as usize].items.clone();
        for &(u, _) in &neighbours {
            table[u as usize].remove(current);
        }
        table[current as usize].items.clear();

        current = if neighbours.is_empty() {
            unvisited[rng.random_range(0..unvisited.len())]
        } else {
            let shared: Vec<u32> = neighbours.iter().filter(|e| e.1).map(|e| e.0).collect();
            let candidates = if shared.is_empty() {
                let fewest = neighbours.iter().map(|&(u, _)| table[u as usize].items.len()).min().unwrap();
                neighbours.iter().filter(|&&(u, _)| table[u as usize].items.len() == fewest).map(|e| e.0).collect()
            } else {
                shared
            };
            candidates[rng.random_range(0..candidates.len())]
        };
    }
    child
}
