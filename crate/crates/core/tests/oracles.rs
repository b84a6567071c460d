//! Independent reference computations checked against the library.

use std::collections::HashMap;

use hwmark::ga::{crossover_x, crossover_x_with_ratio, rank_probability, LinearRanking, Permutation, Problem};
use hwmark::hadamard::{sylvester, Block};
use hwmark::metrics::{mse, nc, psnr};
use hwmark::rng::stream_rng;
use hwmark::{BinaryWatermark, GrayImage};
use rand::Rng;

/// `B[i][j] = sum_p sum_q H[i][p] A[p][q] H[j][q] / order`, written out.
fn quadruple_sum(h: &[i8], a: &Block, order: usize, transpose_first: bool) -> Block {
    Block::from_fn(order, |i, j| {
        let mut acc = 0.0;
        for p in 0..order {
            for q in 0..order {
                let (hip, hjq) = if transpose_first {
                    (h[p * order + i], h[q * order + j])
                } else {
                    (h[i * order + p], h[j * order + q])
                };
                acc += f64::from(hip) * a.get(p, q) * f64::from(hjq);
            }
        }
        acc / order as f64
    })
}

#[test]
fn transform_matches_quadruple_sum() {
    let mut rng = stream_rng(3, 0);
    for order in [4, 8, 16] {
        let h = sylvester(order).unwrap();
        for _ in 0..50 {
            let a = Block::from_fn(order, |_, _| rng.random_range(0.0..255.0));
            let fwd = h.forward(&a).unwrap();
            assert!(fwd.max_abs_diff(&quadruple_sum(h.entries(), &a, order, false)) < 1e-9);
            let inv = h.inverse(&a).unwrap();
            assert!(inv.max_abs_diff(&quadruple_sum(h.entries(), &a, order, true)) < 1e-9);
        }
    }
}

#[test]
fn sylvester_entries_follow_bit_parity() {
    // H[i][j] = (-1)^popcount(i & j) for the Sylvester family
    for order in [2, 4, 8, 32] {
        let h = sylvester(order).unwrap();
        for i in 0..order {
            for j in 0..order {
                let expected = if (i & j).count_ones() % 2 == 0 { 1 } else { -1 };
                assert_eq!(h.get(i, j), expected);
            }
        }
    }
}

#[test]
fn psnr_and_mse_against_direct_formula() {
    let mut rng = stream_rng(4, 0);
    let a: Vec<u8> = (0..64 * 64).map(|_| rng.random()).collect();
    let b: Vec<u8> = a.iter().map(|&p| p.saturating_add(rng.random_range(0..4))).collect();
    let sq: f64 = a.iter().zip(&b).map(|(&x, &y)| (f64::from(x) - f64::from(y)).powi(2)).sum();
    let expected_mse = sq / a.len() as f64;
    let (ia, ib) = (GrayImage::from_bytes(64, 64, a).unwrap(), GrayImage::from_bytes(64, 64, b).unwrap());
    assert!((mse(&ia, &ib).unwrap() - expected_mse).abs() < 1e-12);
    let expected_psnr = 10.0 * (255.0f64 * 255.0 / expected_mse).log10();
    assert!((psnr(&ia, &ib).unwrap() - expected_psnr).abs() < 1e-9);
}

/// Builds an individual whose permuted mark has exactly `whites` white.
fn with_white_set(problem: &Problem, original: &BinaryWatermark, whites: &[u32]) -> hwmark::Individual {
    let mut images = vec![u32::MAX; original.len()];
    let mut free: Vec<u32> = (0..original.len() as u32).filter(|v| !whites.contains(v)).collect();
    let mut next_white = whites.iter();
    for (i, &bit) in original.bits().iter().enumerate() {
        images[i] = if bit == 1 { *next_white.next().unwrap() } else { free.remove(0) };
    }
    problem.individual(Permutation::new(images).unwrap()).unwrap()
}

fn subsets(items: &[u32], size: usize) -> Vec<Vec<u32>> {
    if size == 0 {
        return vec![vec![]];
    }
    if items.len() < size {
        return vec![];
    }
    let mut with: Vec<Vec<u32>> = subsets(&items[1..], size - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, items[0]);
            s
        })
        .collect();
    with.extend(subsets(&items[1..], size));
    with
}

#[test]
fn crossover_x_child_distribution_matches_enumeration() {
    // 3x3 mark with whites {0,1,2}; parents with white sets S1, S2
    let original = BinaryWatermark::new(3, vec![1, 1, 1, 0, 0, 0, 0, 0, 0]).unwrap();
    let problem = Problem::new(&original).unwrap();
    let fitter = with_white_set(&problem, &original, &[4, 5, 8]);
    let other = with_white_set(&problem, &original, &[2, 5, 7]);
    assert!(fitter.fitness() < other.fitness());

    // r = 0.7 keeps floor(3 * 0.7) = 2 whites of S1
    let (s1, s2) = ([4u32, 5, 8], [2u32, 5, 7]);
    let mut exact: HashMap<Vec<u32>, f64> = HashMap::new();
    let firsts = subsets(&s1, 2);
    for s in &firsts {
        let pool: Vec<u32> = s2.iter().copied().filter(|v| !s.contains(v)).collect();
        for extra in &pool {
            let mut child = s.clone();
            child.push(*extra);
            child.sort_unstable();
            *exact.entry(child).or_default() += 1.0 / (firsts.len() * pool.len()) as f64;
        }
    }

    let draws = 60_000;
    let mut rng = stream_rng(12, 0);
    let mut seen: HashMap<Vec<u32>, usize> = HashMap::new();
    for _ in 0..draws {
        let child = crossover_x_with_ratio(&problem, &fitter, &other, 0.7, &mut rng).unwrap();
        *seen.entry(child.white_set().to_vec()).or_default() += 1;
    }
    assert!(seen.keys().all(|k| exact.contains_key(k)), "{seen:?}");
    for (set, p) in &exact {
        let got = *seen.get(set).unwrap_or(&0) as f64;
        let sigma = (draws as f64 * p * (1.0 - p)).sqrt();
        assert!((got - draws as f64 * p).abs() <= 4.5 * sigma, "{set:?}: {got} vs {}", draws as f64 * p);
    }
}

#[test]
fn crossover_x_keeps_at_least_half_of_the_fitter_parent() {
    let original = BinaryWatermark::new(4, (0..16).map(|i| u8::from(i % 3 == 0)).collect()).unwrap();
    let problem = Problem::new(&original).unwrap();
    let k = problem.k();
    let a = with_white_set(&problem, &original, &[1, 2, 4, 7, 11, 13]);
    let b = with_white_set(&problem, &original, &[0, 2, 5, 8, 9, 14]);
    let (s1, s2) = if a.fitness() <= b.fitness() { (&a, &b) } else { (&b, &a) };
    let mut rng = stream_rng(2, 0);
    for _ in 0..2000 {
        let child = crossover_x(&problem, &a, &b, &mut rng).unwrap();
        let from_s1 = child.white_set().iter().filter(|v| s1.white_set().contains(v)).count();
        assert!(from_s1 >= k / 2);
        assert!(child.white_set().iter().all(|v| s1.white_set().contains(v) || s2.white_set().contains(v)));
        assert_eq!(child.white_set().len(), k);
    }
}

#[test]
fn pigeonhole_bound_is_the_exhaustive_minimum() {
    for k in 1..9u32 {
        let bits: Vec<u8> = (0..9).map(|i| u8::from(i < k)).collect();
        let original = BinaryWatermark::new(3, bits).unwrap();
        let all: Vec<u32> = (0..9).collect();
        let minimum = subsets(&all, k as usize)
            .into_iter()
            .map(|set| {
                let mut bits = vec![0u8; 9];
                for v in set {
                    bits[v as usize] = 1;
                }
                nc(&original, &BinaryWatermark::new(3, bits).unwrap()).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        let bound = Problem::new(&original).unwrap().nc_lower_bound();
        assert!((minimum - bound).abs() < 1e-12, "k={k}: {minimum} vs {bound}");
    }
}

#[test]
fn ranking_probabilities_sum_to_one_and_ramp_linearly() {
    for (mu, s) in [(20, 1.5), (10, 2.0), (5, 1.0)] {
        let total: f64 = (1..=mu).map(|i| rank_probability(i, mu, s)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        let step = rank_probability(2, mu, s) - rank_probability(1, mu, s);
        for i in 2..=mu {
            let d = rank_probability(i, mu, s) - rank_probability(i - 1, mu, s);
            assert!((d - step).abs() < 1e-12);
        }
    }
    // s = 1 is uniform
    let uniform = LinearRanking::new(4, 1.0).unwrap();
    let mut rng = stream_rng(1, 1);
    let mut counts = [0usize; 4];
    for _ in 0..40_000 {
        counts[uniform.sample(&mut rng)] += 1;
    }
    assert!(counts.iter().all(|&c| (9_400..10_600).contains(&c)), "{counts:?}");
}
