//! Multiple risk-averse newsvendors with pooled uniform demand.
//!
//! A coalition `S` orders the critical-fractile quantity `q_S` for its pooled
//! demand `Y_S ~ U[a_S, b_S]` and earns `p·min(Y_S, q_S) − c·q_S`, which has an
//! α-cut uniform law with `α = (p − c)/p`. Cooperation is decided on the r-type
//! SSD-core of that game.

use alloc::vec::Vec;

use thiserror::Error;

use crate::coopgame::{check_players, Coalition, GameError};
use crate::distributions::Distribution;
use crate::lp::{LinearSystem, LpError};
use crate::ssdcore::{dc_nonempty_r, CoreError, StochasticGame};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NewsvendorError {
    #[error("prices must satisfy 0 < c < p (got c = {c}, p = {p})")]
    InvalidPrices { p: f64, c: f64 },
    #[error("coalition {coalition}: demand bounds must satisfy 0 <= a < b (got [{a}, {b}])")]
    InvalidDemand { coalition: Coalition, a: f64, b: f64 },
    #[error("expected {expected} coalition demands, found {found}")]
    WrongCoalitionCount { expected: usize, found: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewsvendorProblem {
    n: usize,
    /// `(a_S, b_S)` indexed by `mask - 1`.
    demand: Vec<(f64, f64)>,
    p: f64,
    c: f64,
}

impl NewsvendorProblem {
    /// `demand[mask - 1]` bounds the pooled demand of that coalition.
    pub fn new(n: usize, demand: Vec<(f64, f64)>, p: f64, c: f64) -> Result<Self, NewsvendorError> {
        check_players(n)?;
        if !(c.is_finite() && p.is_finite() && 0.0 < c && c < p) {
            return Err(NewsvendorError::InvalidPrices { p, c });
        }
        let expected = (1usize << n) - 1;
        if demand.len() != expected {
            return Err(NewsvendorError::WrongCoalitionCount { expected, found: demand.len() });
        }
        for (k, &(a, b)) in demand.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && 0.0 <= a && a < b) {
                let coalition = Coalition::from_mask(k as u32 + 1);
                return Err(NewsvendorError::InvalidDemand { coalition, a, b });
            }
        }
        Ok(NewsvendorProblem { n, demand, p, c })
    }

    pub fn from_fn(n: usize, f: impl FnMut(Coalition) -> (f64, f64), p: f64, c: f64) -> Result<Self, NewsvendorError> {
        check_players(n)?;
        Self::new(n, Coalition::all_nonempty(n).map(f).collect(), p, c)
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn price(&self) -> f64 {
        self.p
    }

    pub fn cost(&self) -> f64 {
        self.c
    }

    pub fn demand(&self, s: Coalition) -> (f64, f64) {
        self.demand[s.mask() as usize - 1]
    }

    /// Critical fractile `(p − c)/p`, also the α of every coalition's profit law.
    pub fn alpha(&self) -> f64 {
        (self.p - self.c) / self.p
    }

    /// `q_S = a_S + (b_S − a_S)(p − c)/p`.
    pub fn optimal_order(&self, s: Coalition) -> f64 {
        let (a, b) = self.demand(s);
        a + (b - a) * self.alpha()
    }

    /// Law of the coalition's profit under its optimal order.
    pub fn profit(&self, s: Coalition) -> Distribution {
        let (a, _) = self.demand(s);
        let q = self.optimal_order(s);
        Distribution::AlphaCutUniform { a: self.p * a - self.c * q, b: (self.p - self.c) * q, alpha: self.alpha() }
    }

    pub fn build_game(&self) -> Result<StochasticGame, NewsvendorError> {
        Ok(StochasticGame::from_fn(self.n, |s| self.profit(s))?)
    }

    /// `a_S·p − (b_S − a_S)·c`.
    pub fn protection(&self, s: Coalition) -> f64 {
        let (a, b) = self.demand(s);
        a * self.p - (b - a) * self.c
    }

    /// `p·(a_S + b_S)/2 − c·(b_S − a_S)/2`.
    pub fn market_quality(&self, s: Coalition) -> f64 {
        let (a, b) = self.demand(s);
        self.p * (a + b) / 2.0 - self.c * (b - a) / 2.0
    }

    /// The two cooperation rows for `S` as `(coef_N, rhs_S)`, meaning `r(S)·coef_N >= rhs_S`.
    fn theorem_rows(&self, s: Coalition) -> [(f64, f64); 2] {
        let grand = Coalition::grand(self.n);
        let weighted = |t: Coalition| {
            let (a, b) = self.demand(t);
            a * (self.p + self.c) + b * (self.p - self.c)
        };
        [(self.protection(grand), self.protection(s)), (weighted(grand), weighted(s))]
    }

    fn direct_rows(&self, s: Coalition) -> [(f64, f64); 2] {
        let al = self.alpha();
        let ends = |t: Coalition| match self.profit(t) {
            Distribution::AlphaCutUniform { a, b, .. } => (a, b),
            _ => unreachable!(),
        };
        let (an, bn) = ends(Coalition::grand(self.n));
        let (as_, bs) = ends(s);
        [(an, as_), ((2.0 - al) * bn + al * an, (2.0 - al) * bs + al * as_)]
    }

    fn metrics(&self) -> Vec<CoalitionMetrics> {
        Coalition::all_nonempty(self.n)
            .map(|s| CoalitionMetrics {
                coalition: s,
                protection: self.protection(s),
                market_quality: self.market_quality(s),
            })
            .collect()
    }

    fn binding(&self, r: &[f64], rows: impl Fn(Coalition) -> [(f64, f64); 2], tol: f64) -> Vec<Coalition> {
        let grand = Coalition::grand(self.n);
        Coalition::all_nonempty(self.n)
            .filter(|&s| s != grand)
            .filter(|&s| {
                let rs = s.sum(r);
                rows(s).iter().any(|&(coef, rhs)| {
                    rs * coef - rhs <= tol * libm::fmax(1.0, libm::fmax(libm::fabs(rhs), libm::fabs(rs * coef)))
                })
            })
            .collect()
    }

    /// Cooperation via the two product-form inequalities per coalition.
    pub fn cooperation_feasible(&self, tol: f64) -> Result<CooperationReport, NewsvendorError> {
        let n = self.n;
        let grand = Coalition::grand(n);
        let mut sys = LinearSystem::new(n);
        sys.add_eq(grand.indicator(n), 1.0);
        for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
            for (coef, rhs) in self.theorem_rows(s) {
                sys.add_ge(s.indicator(n).iter().map(|v| v * coef).collect(), rhs);
            }
        }
        for i in 0..n {
            sys.set_lower(i, 0.0);
        }
        let witness = sys.solve(tol)?.into_point();
        Ok(self.report(witness, |s| self.theorem_rows(s), tol))
    }

    /// Cooperation via the α-cut dominance conditions on `x(S) = r(S)·v(N)`.
    pub fn cooperation_feasible_direct(&self, tol: f64) -> Result<CooperationReport, NewsvendorError> {
        let witness = dc_nonempty_r(&self.build_game()?, tol)?;
        Ok(self.report(witness, |s| self.direct_rows(s), tol))
    }

    fn report(
        &self,
        witness: Option<Vec<f64>>,
        rows: impl Fn(Coalition) -> [(f64, f64); 2],
        tol: f64,
    ) -> CooperationReport {
        let binding = witness.as_deref().map(|r| self.binding(r, rows, tol)).unwrap_or_default();
        CooperationReport { feasible: witness.is_some(), witness, metrics: self.metrics(), binding }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalitionMetrics {
    pub coalition: Coalition,
    pub protection: f64,
    pub market_quality: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CooperationReport {
    pub feasible: bool,
    pub witness: Option<Vec<f64>>,
    pub metrics: Vec<CoalitionMetrics>,
    /// Coalitions other than `N` with a constraint tight at the witness.
    pub binding: Vec<Coalition>,
}
