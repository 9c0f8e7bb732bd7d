//! Seeded random instances for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stochcoop_core::{ClassicalGame, Coalition, Distribution, Family, NewsvendorProblem, StochasticGame};

const TOL: f64 = stochcoop_core::DEFAULT_TOLERANCE;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values `s.len()·U[0, spread)`.
pub fn random_game(rng: &mut impl Rng, n: usize, spread: f64) -> ClassicalGame {
    ClassicalGame::from_fn(n, |s| rng.random_range(0.0..spread) * s.len() as f64).unwrap()
}

/// Sum of Harsanyi dividends, nonnegative beyond singletons.
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

/// Normal game with `μ_S = U[0,10] + max_i μ_{S∖i}` (monotone) and `σ_S ~ U[0.1, 3]`.
pub fn normal_game(rng: &mut impl Rng, n: usize) -> StochasticGame {
    let mut mu = vec![0.0; 1 << n];
    for m in 1..1usize << n {
        let below = (0..n).filter(|i| m >> i & 1 == 1).map(|i| mu[m & !(1 << i)]).fold(0.0, f64::max);
        mu[m] = below + rng.random_range(0.0..10.0);
    }
    StochasticGame::from_fn(n, |s| {
        let sd: f64 = rng.random_range(0.1..3.0);
        Distribution::normal(mu[s.mask() as usize], sd * sd).unwrap()
    })
    .unwrap()
}

/// Uniform game over a convex or random lower-bound game, `b_S = a_S + 2·gap_S`.
pub fn uniform_game(rng: &mut impl Rng, n: usize) -> StochasticGame {
    let a = if rng.random_bool(0.5) { convex_game(rng, n) } else { random_game(rng, n, 2.0) };
    let extra = rng.random_range(0.0..3.0 * n as f64);
    StochasticGame::from_fn(n, |s| {
        let gap = rng.random_range(0.05..1.5) * s.len() as f64 + if s.len() == n { extra } else { 0.0 };
        Distribution::uniform(a.value(s), a.value(s) + 2.0 * gap).unwrap()
    })
    .unwrap()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PinnedInstance {
    pub mean: ClassicalGame,
    pub lower: ClassicalGame,
    /// Player whose mean-core payoff is forced below its lower-core minimum.
    pub player: usize,
}

/// A balanced lower-bound game with some `min_{x∈C(a)} x_i > a_i`, and a balanced
/// mean game pinning `d_i` strictly between `a_i` and that minimum.
///
/// Returns `None` when the drawn lower-bound game does not qualify.
pub fn pinned_instance(rng: &mut impl Rng) -> Option<PinnedInstance> {
    let n = rng.random_range(3..=5);
    let lower = ClassicalGame::from_fn(n, |s| {
        rng.random_range(0.0..1.5) * s.len() as f64 + if s.len() == n { 2.0 } else { 0.0 }
    })
    .unwrap();
    let core_point = lower.core_nonempty(TOL).ok()??;
    let (i, floor) = (0..n).find_map(|i| {
        let m = lower.core_min_coordinate(i, TOL).ok()?;
        (m > lower.value(Coalition::singleton(i)) + 1e-3).then_some((i, m))
    })?;
    let ai = lower.value(Coalition::singleton(i));
    let pinned = ai + 0.5 * (floor - ai);
    let lift = 1.0 + lower.values().iter().map(|v| v.abs()).sum::<f64>();
    let y: Vec<f64> = (0..n).map(|j| if j == i { pinned } else { core_point[j] + lift }).collect();
    let grand = Coalition::grand(n);
    let mean = ClassicalGame::from_fn(n, |s| {
        if s == grand || s == grand.without(i) {
            s.sum(&y)
        } else if s == Coalition::singleton(i) {
            pinned
        } else {
            lower.value(s) + 0.5
        }
    })
    .unwrap();
    Some(PinnedInstance { mean, lower, player: i })
}

/// Pooled demand near the sum of individual demands, narrowed by a random pooling benefit.
pub fn newsvendor_problem(rng: &mut impl Rng, n: usize) -> NewsvendorProblem {
    let p = rng.random_range(1.0..10.0);
    let c = p * rng.random_range(0.05..0.95);
    let single: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let a = rng.random_range(0.0..5.0);
            (a, a + rng.random_range(0.5..10.0))
        })
        .collect();
    NewsvendorProblem::from_fn(
        n,
        |s| {
            let (a, b) = s.players().fold((0.0, 0.0), |(a, b), i| (a + single[i].0, b + single[i].1));
            let shrink = if s.len() > 1 { rng.random_range(0.0..0.4) * (b - a) } else { 0.0 };
            let a2 = a + shrink * rng.random_range(0.0..1.0);
            let b2 = (b - shrink * rng.random_range(0.0..1.0)).max(a2 + 0.1);
            (a2, b2)
        },
        p,
        c,
    )
    .unwrap()
}

pub fn distribution(rng: &mut impl Rng, family: Family, alpha: f64, count: usize) -> Distribution {
    match family {
        Family::Normal => Distribution::normal(rng.random_range(-3.0..3.0), rng.random_range(0.05..4.0)).unwrap(),
        Family::Uniform => {
            let a = rng.random_range(-3.0..3.0);
            Distribution::uniform(a, a + rng.random_range(0.1..4.0)).unwrap()
        }
        Family::Gamma => Distribution::gamma(rng.random_range(0.5..5.0), rng.random_range(0.2..3.0)).unwrap(),
        Family::DiscreteUniform => {
            Distribution::discrete_uniform((0..count).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap()
        }
        Family::AlphaCutUniform => {
            let a = rng.random_range(-3.0..3.0);
            Distribution::alpha_cut_uniform(a, a + rng.random_range(0.1..4.0), alpha).unwrap()
        }
    }
}

/// A same-family pair; half the time the right law is the left one moved down.
pub fn dominance_pair(rng: &mut impl Rng, family: Family) -> (Distribution, Distribution) {
    let alpha = rng.random_range(0.05..0.95);
    let count = rng.random_range(2..=6);
    let x = distribution(rng, family, alpha, count);
    if rng.random_bool(0.5) {
        let y = match &x {
            Distribution::Gamma { k, theta } => Distribution::gamma(0.9 * k, *theta).unwrap(),
            _ => x.affine_image(-rng.random_range(0.05..1.0), 1.0).unwrap(),
        };
        (x, y)
    } else {
        let y = distribution(rng, family, alpha, count);
        (x, y)
    }
}
