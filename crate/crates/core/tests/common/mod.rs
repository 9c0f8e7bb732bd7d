#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochcoop_core::{ClassicalGame, Coalition, Distribution, StochasticGame};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_game(rng: &mut impl Rng, n: usize, spread: f64) -> ClassicalGame {
    ClassicalGame::from_fn(n, |s| rng.random_range(0.0..spread) * s.len() as f64).unwrap()
}

/// Sum of Harsanyi dividends, nonnegative on coalitions of size >= 2, hence convex.
pub fn convex_game(rng: &mut impl Rng, n: usize) -> ClassicalGame {
    let dividends: Vec<f64> = (0..1u32 << n)
        .map(|m| match m.count_ones() {
            0 => 0.0,
            1 => rng.random_range(-2.0..2.0),
            _ if rng.random_bool(0.4) => 0.0,
            _ => rng.random_range(0.0..2.0),
        })
        .collect();
    ClassicalGame::from_fn(n, |s| {
        let mut total = 0.0;
        let mut t = s.mask();
        while t != 0 {
            total += dividends[t as usize];
            t = (t - 1) & s.mask();
        }
        total
    })
    .unwrap()
}

pub fn random_perm(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// Uniform game with lower-bound game `a` and mean game `a + gap`.
pub fn uniform_game(a: &ClassicalGame, gap: impl Fn(Coalition) -> f64) -> StochasticGame {
    StochasticGame::from_fn(a.players(), |s| {
        let g = gap(s);
        assert!(g > 0.0);
        Distribution::uniform(a.value(s), a.value(s) + 2.0 * g).unwrap()
    })
    .unwrap()
}

pub fn normal_game(rng: &mut impl Rng, n: usize) -> StochasticGame {
    StochasticGame::from_fn(n, |s| {
        let mu =
            rng.random_range(0.0..10.0) * s.len() as f64 + if s.len() == n { rng.random_range(0.0..10.0) } else { 0.0 };
        let sd: f64 = rng.random_range(0.1..3.0) * (s.len() as f64).sqrt();
        Distribution::normal(mu, sd * sd).unwrap()
    })
    .unwrap()
}
