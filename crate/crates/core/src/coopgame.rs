//! Classical TU-games over bitmask coalitions.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::lp::{Direction, LinearSystem, LpError, LpOutcome};

/// Largest supported player count; games store `2ⁿ` values.
pub const MAX_PLAYERS: usize = 20;

/// Default absolute tolerance for the convexity test.
pub const CONVEXITY_EPS: f64 = 1e-9;

/// A set of players, bit `i` standing for player `i` (0-based).
///
/// Rendered 1-based, e.g. `{1,3}`; [`Coalition::key`] gives the `"1,3"` form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Coalition(u32);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    pub const fn from_mask(mask: u32) -> Self {
        Coalition(mask)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub fn grand(n: usize) -> Self {
        debug_assert!(n <= MAX_PLAYERS);
        Coalition(((1u64 << n) - 1) as u32)
    }

    pub fn singleton(i: usize) -> Self {
        Coalition(1 << i)
    }

    pub fn from_players(players: impl IntoIterator<Item = usize>) -> Self {
        Coalition(players.into_iter().fold(0, |m, i| m | (1 << i)))
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn with(self, i: usize) -> Self {
        Coalition(self.0 | 1 << i)
    }

    pub fn without(self, i: usize) -> Self {
        Coalition(self.0 & !(1 << i))
    }

    pub fn union(self, other: Self) -> Self {
        Coalition(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        Coalition(self.0 & other.0)
    }

    pub fn is_subset_of(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// Members in increasing order, 0-based.
    pub fn players(self) -> impl Iterator<Item = usize> {
        let mask = self.0;
        (0..32).filter(move |i| mask >> i & 1 == 1)
    }

    /// `x(S)`.
    pub fn sum(self, x: &[f64]) -> f64 {
        self.players().map(|i| x[i]).sum()
    }

    pub fn indicator(self, n: usize) -> Vec<f64> {
        (0..n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }

    /// All nonempty coalitions of `n` players in mask order.
    pub fn all_nonempty(n: usize) -> impl Iterator<Item = Coalition> {
        (1..(1u64 << n)).map(|m| Coalition(m as u32))
    }

    /// Comma-separated 1-based members, e.g. `"1,3"`.
    pub fn key(self) -> String {
        let mut s = String::new();
        for (k, i) in self.players().enumerate() {
            if k > 0 {
                s.push(',');
            }
            s.push_str(&alloc::format!("{}", i + 1));
        }
        s
    }

    /// Parses a key of strictly ascending 1-based indices, each at most `n`.
    pub fn parse_key(key: &str, n: usize) -> Result<Coalition, GameError> {
        let bad = || GameError::InvalidCoalitionKey(String::from(key));
        let mut mask = 0u32;
        let mut last = 0usize;
        for part in key.split(',') {
            let i: usize = part.trim().parse().map_err(|_| bad())?;
            if i == 0 || i > n || i <= last {
                return Err(bad());
            }
            last = i;
            mask |= 1 << (i - 1);
        }
        Ok(Coalition(mask))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("a game needs at least one player")]
    NoPlayers,
    #[error("{0} players exceeds the supported maximum of {MAX_PLAYERS}")]
    TooManyPlayers(usize),
    #[error("expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("value of the empty coalition must be 0")]
    NonzeroEmptyCoalition,
    #[error("non-finite value for coalition {0}")]
    NonFinite(Coalition),
    #[error("invalid coalition key {0:?}")]
    InvalidCoalitionKey(String),
    #[error("the core is empty")]
    EmptyCore,
    #[error(transparent)]
    Lp(#[from] LpError),
}

pub(crate) fn check_players(n: usize) -> Result<(), GameError> {
    if n == 0 {
        return Err(GameError::NoPlayers);
    }
    if n > MAX_PLAYERS {
        return Err(GameError::TooManyPlayers(n));
    }
    Ok(())
}

/// A TU-game `v: 2^N → R` with `v(∅) = 0`, stored densely by coalition mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGame {
    n: usize,
    values: Vec<f64>,
}

impl ClassicalGame {
    /// `values[mask]` is the value of the coalition with that mask; `values[0]` must be 0.
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self, GameError> {
        check_players(n)?;
        let expected = 1usize << n;
        if values.len() != expected {
            return Err(GameError::DimensionMismatch { expected, found: values.len() });
        }
        if values[0] != 0.0 {
            return Err(GameError::NonzeroEmptyCoalition);
        }
        if let Some(m) = values.iter().position(|v| !v.is_finite()) {
            return Err(GameError::NonFinite(Coalition(m as u32)));
        }
        Ok(ClassicalGame { n, values })
    }

    /// Builds a game from a value function on nonempty coalitions.
    pub fn from_fn(n: usize, mut f: impl FnMut(Coalition) -> f64) -> Result<Self, GameError> {
        check_players(n)?;
        let mut values = vec![0.0; 1 << n];
        for s in Coalition::all_nonempty(n) {
            values[s.mask() as usize] = f(s);
        }
        Self::new(n, values)
    }

    /// The additive game `v_r(S) = r(S)`.
    pub fn additive(r: &[f64]) -> Result<Self, GameError> {
        Self::from_fn(r.len(), |s| s.sum(r))
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    pub fn value(&self, s: Coalition) -> f64 {
        self.values[s.mask() as usize]
    }

    pub fn grand_value(&self) -> f64 {
        self.value(self.grand())
    }

    /// All `2ⁿ` values indexed by mask.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn check_len(&self, x: &[f64]) -> Result<(), GameError> {
        if x.len() != self.n {
            return Err(GameError::DimensionMismatch { expected: self.n, found: x.len() });
        }
        Ok(())
    }

    /// `x(S) >= v(S) - eps` for all `S` and `|x(N) - v(N)| <= eps`.
    pub fn core_membership(&self, x: &[f64], eps: f64) -> Result<bool, GameError> {
        self.check_len(x)?;
        let grand = self.grand();
        if libm::fabs(grand.sum(x) - self.grand_value()) > eps {
            return Ok(false);
        }
        Ok(Coalition::all_nonempty(self.n).all(|s| s.sum(x) >= self.value(s) - eps))
    }

    /// `{x : x(S) >= v(S) for S != N, x(N) = v(N)}`.
    pub fn core_system(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.n);
        let grand = self.grand();
        sys.add_eq(grand.indicator(self.n), self.grand_value());
        for s in Coalition::all_nonempty(self.n).filter(|&s| s != grand) {
            sys.add_ge(s.indicator(self.n), self.value(s));
        }
        sys
    }

    /// A max-min-slack core point, or `None` when the game is not balanced.
    pub fn core_nonempty(&self, tol: f64) -> Result<Option<Vec<f64>>, GameError> {
        Ok(self.core_system().solve(tol)?.into_point())
    }

    /// `{x >= 0 : x(S) <= v(S) for S != N, x(N) = v(N)}`.
    pub fn cost_core_system(&self) -> LinearSystem {
        let mut sys = LinearSystem::new(self.n);
        let grand = self.grand();
        sys.add_eq(grand.indicator(self.n), self.grand_value());
        for s in Coalition::all_nonempty(self.n).filter(|&s| s != grand) {
            sys.add_le(s.indicator(self.n), self.value(s));
        }
        for i in 0..self.n {
            sys.set_lower(i, 0.0);
        }
        sys
    }

    /// A point of the nonnegative cost core, or `None`.
    pub fn cost_core_nonempty(&self, tol: f64) -> Result<Option<Vec<f64>>, GameError> {
        Ok(self.cost_core_system().solve(tol)?.into_point())
    }

    /// `min { x_i : x in core }`.
    pub fn core_min_coordinate(&self, i: usize, tol: f64) -> Result<f64, GameError> {
        if i >= self.n {
            return Err(GameError::DimensionMismatch { expected: self.n, found: i + 1 });
        }
        let mut sys = self.core_system();
        let mut c = vec![0.0; self.n];
        c[i] = 1.0;
        sys.set_objective(c, Direction::Minimize);
        match sys.solve(tol)? {
            LpOutcome::Feasible { value, .. } => Ok(value),
            LpOutcome::Infeasible => Err(GameError::EmptyCore),
        }
    }

    /// Supermodularity with absolute slack [`CONVEXITY_EPS`].
    pub fn is_convex(&self) -> bool {
        self.is_convex_within(CONVEXITY_EPS)
    }

    /// Marginal form: `v(S+i) + v(S+j) <= v(S) + v(S+i+j) + eps` for `i < j`, `S ⊆ N∖{i,j}`.
    pub fn is_convex_within(&self, eps: f64) -> bool {
        let full = self.grand().mask();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let rest = full & !(1 << i) & !(1 << j);
                let mut s = rest;
                loop {
                    let si = s | 1 << i;
                    let sj = s | 1 << j;
                    let v = |m: u32| self.values[m as usize];
                    if v(si) + v(sj) > v(s) + v(si | sj) + eps {
                        return false;
                    }
                    if s == 0 {
                        break;
                    }
                    s = (s - 1) & rest;
                }
            }
        }
        true
    }

    /// `v(S) + v(T) <= v(S ∪ T) + eps` for disjoint nonempty `S`, `T`.
    pub fn is_superadditive_within(&self, eps: f64) -> bool {
        let full = self.grand().mask();
        for s in 1..=full {
            let rest = full & !s;
            // Each unordered pair once: T's lowest player exceeds S's.
            let mut t = rest;
            while t != 0 {
                if t.trailing_zeros() > s.trailing_zeros()
                    && self.values[s as usize] + self.values[t as usize] > self.values[(s | t) as usize] + eps
                {
                    return false;
                }
                t = (t - 1) & rest;
            }
        }
        true
    }

    pub fn is_superadditive(&self) -> bool {
        self.is_superadditive_within(CONVEXITY_EPS)
    }

    /// `S ↦ v(S) + K·r(S)`.
    pub fn shift_by_additive(&self, r: &[f64], k: f64) -> Result<ClassicalGame, GameError> {
        self.check_len(r)?;
        ClassicalGame::from_fn(self.n, |s| self.value(s) + k * s.sum(r))
    }

    /// Game with players relabeled: player `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<ClassicalGame, GameError> {
        self.check_len_usize(perm)?;
        let mut values = vec![0.0; self.values.len()];
        for s in Coalition::all_nonempty(self.n) {
            let image = Coalition::from_players(s.players().map(|i| perm[i]));
            values[image.mask() as usize] = self.value(s);
        }
        ClassicalGame::new(self.n, values)
    }

    fn check_len_usize(&self, p: &[usize]) -> Result<(), GameError> {
        if p.len() != self.n {
            return Err(GameError::DimensionMismatch { expected: self.n, found: p.len() });
        }
        Ok(())
    }
}
