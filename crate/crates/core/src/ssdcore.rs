//! Stochastic TU-games and their SSD-cores.
//!
//! An allocation `x` lies in the SSD-core when `x(S) ⪰ v(S)` for every
//! coalition and `x(N)` has the law of `v(N)`. For the structured allocation
//! types `x(S)` stays in the family of `v(N)`, so membership reduces to the
//! closed-form conditions of [`crate::ssd`] and nonemptiness to a linear
//! feasibility problem.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::coopgame::{check_players, ClassicalGame, Coalition, GameError};
use crate::distributions::{Distribution, DistributionError, Family};
use crate::linalg::{is_symmetric, symmetric_eigenvalues};
use crate::lp::{LinearSystem, LpError};
use crate::ssd::{dominance_conditions, dominates_within, Condition, SsdError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Ssd(#[from] SsdError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("expected {expected} coalition values, found {found}")]
    WrongCoalitionCount { expected: usize, found: usize },
    #[error("coalition {coalition} has family {found}, game family is {expected}")]
    MixedFamilies { coalition: Coalition, expected: Family, found: Family },
    #[error("coalition {coalition}: {source}")]
    InvalidCoalition { coalition: Coalition, source: DistributionError },
    #[error("coalition {coalition}: all alpha-cut values need the same alpha")]
    AlphaMismatch { coalition: Coalition },
    #[error("coalition {coalition}: all discrete values need the same number of realizations")]
    RealizationCountMismatch { coalition: Coalition },
    #[error("{allocation} allocations are not supported for the {family} family")]
    IncompatibleAllocationType { allocation: &'static str, family: Family },
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(Family),
    #[error("the grand coalition has zero variance")]
    ZeroGrandVariance,
    #[error("covariance matrix is not symmetric")]
    NotSymmetric,
    #[error("mean total {mean_total} is below the lower-bound total {lower_total}")]
    InvalidGap { mean_total: f64, lower_total: f64 },
    #[error("the lower-bound game is not convex")]
    NotConvex,
    #[error("process did not reach the lower boundary within {0} steps")]
    IterationCapExceeded(usize),
    #[error("coalition {0}: payoff law with a negative risk share is outside the family")]
    UnrepresentablePayoff(Coalition),
    #[error("expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// A stochastic game: one marginal law per nonempty coalition, all of one family.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    n: usize,
    /// Indexed by `mask - 1`.
    dists: Vec<Distribution>,
}

impl StochasticGame {
    /// `dists[mask - 1]` is the law of the coalition with that mask.
    pub fn new(n: usize, dists: Vec<Distribution>) -> Result<Self, CoreError> {
        check_players(n)?;
        let expected = (1usize << n) - 1;
        if dists.len() != expected {
            return Err(CoreError::WrongCoalitionCount { expected, found: dists.len() });
        }
        let family = dists[0].family();
        for (k, d) in dists.iter().enumerate() {
            let coalition = Coalition::from_mask(k as u32 + 1);
            if d.family() != family {
                return Err(CoreError::MixedFamilies { coalition, expected: family, found: d.family() });
            }
            d.validate().map_err(|source| CoreError::InvalidCoalition { coalition, source })?;
            match (d, &dists[0]) {
                (Distribution::AlphaCutUniform { alpha, .. }, Distribution::AlphaCutUniform { alpha: a0, .. })
                    if alpha != a0 =>
                {
                    return Err(CoreError::AlphaMismatch { coalition });
                }
                (
                    Distribution::DiscreteUniform { realizations },
                    Distribution::DiscreteUniform { realizations: r0 },
                ) if realizations.len() != r0.len() => {
                    return Err(CoreError::RealizationCountMismatch { coalition });
                }
                _ => {}
            }
        }
        Ok(StochasticGame { n, dists })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(Coalition) -> Distribution) -> Result<Self, CoreError> {
        check_players(n)?;
        Self::new(n, Coalition::all_nonempty(n).map(&mut f).collect())
    }

    pub fn players(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> Family {
        self.dists[0].family()
    }

    pub fn grand(&self) -> Coalition {
        Coalition::grand(self.n)
    }

    /// # Panics
    /// If `s` is empty or not a coalition of this game.
    pub fn value(&self, s: Coalition) -> &Distribution {
        &self.dists[s.mask() as usize - 1]
    }

    pub fn grand_value(&self) -> &Distribution {
        self.value(self.grand())
    }

    pub fn iter(&self) -> impl Iterator<Item = (Coalition, &Distribution)> {
        self.dists.iter().enumerate().map(|(k, d)| (Coalition::from_mask(k as u32 + 1), d))
    }

    /// Game with players relabeled: player `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<StochasticGame, CoreError> {
        if perm.len() != self.n {
            return Err(CoreError::DimensionMismatch { expected: self.n, found: perm.len() });
        }
        let mut dists = self.dists.clone();
        for (s, d) in self.iter() {
            let image = Coalition::from_players(s.players().map(|i| perm[i]));
            dists[image.mask() as usize - 1] = d.clone();
        }
        StochasticGame::new(self.n, dists)
    }

    /// `S ↦ E[v(S)]`.
    pub fn mean_game(&self) -> ClassicalGame {
        ClassicalGame::from_fn(self.n, |s| self.value(s).mean()).expect("validated game")
    }

    /// `S ↦ σ_S / σ_N`.
    pub fn deviation_game(&self) -> Result<ClassicalGame, CoreError> {
        let sigma_n = self.grand_value().std_dev();
        if sigma_n <= 0.0 {
            return Err(CoreError::ZeroGrandVariance);
        }
        Ok(ClassicalGame::from_fn(self.n, |s| if s == self.grand() { 1.0 } else { self.value(s).std_dev() / sigma_n })?)
    }

    /// `S ↦ a_S` for uniform games.
    pub fn lower_bound_game(&self) -> Result<ClassicalGame, CoreError> {
        if self.family() != Family::Uniform {
            return Err(CoreError::UnsupportedFamily(self.family()));
        }
        Ok(ClassicalGame::from_fn(self.n, |s| self.value(s).support().0)?)
    }

    pub fn derive_games(&self) -> DerivedGames {
        DerivedGames {
            mean: self.mean_game(),
            deviation: self.deviation_game().ok(),
            lower: self.lower_bound_game().ok(),
        }
    }
}

/// Mean, deviation and lower-bound games; the last two only when defined.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedGames {
    pub mean: ClassicalGame,
    /// `None` when `σ_N = 0`.
    pub deviation: Option<ClassicalGame>,
    /// `None` outside the uniform family.
    pub lower: Option<ClassicalGame>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Allocation {
    /// `x_i = r_i·v(N)`.
    R { r: Vec<f64> },
    /// `x_i = d_i + r_i(v(N) − μ_N)` with `r >= 0`.
    Dr { d: Vec<f64>, r: Vec<f64> },
    /// As [`Allocation::Dr`] with `r` of any sign.
    DrSigned { d: Vec<f64>, r: Vec<f64> },
    /// Jointly normal `x ~ N(mean, cov)`; `cov` is row-major `n × n`.
    Unstructured { mean: Vec<f64>, cov: Vec<f64> },
}

impl Allocation {
    pub fn kind(&self) -> &'static str {
        match self {
            Allocation::R { .. } => "r",
            Allocation::Dr { .. } => "dr",
            Allocation::DrSigned { .. } => "dr-signed",
            Allocation::Unstructured { .. } => "unstructured",
        }
    }

    /// Same allocation after relabeling player `i` as `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Allocation {
        let p = |v: &[f64]| {
            let mut out = vec![0.0; v.len()];
            for (i, x) in v.iter().enumerate() {
                out[perm[i]] = *x;
            }
            out
        };
        match self {
            Allocation::R { r } => Allocation::R { r: p(r) },
            Allocation::Dr { d, r } => Allocation::Dr { d: p(d), r: p(r) },
            Allocation::DrSigned { d, r } => Allocation::DrSigned { d: p(d), r: p(r) },
            Allocation::Unstructured { mean, cov } => {
                let n = mean.len();
                let mut c = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        c[perm[i] * n + perm[j]] = cov[i * n + j];
                    }
                }
                Allocation::Unstructured { mean: p(mean), cov: c }
            }
        }
    }
}

/// A scalar requirement on the allocation as a whole.
#[derive(Debug, Clone, PartialEq)]
pub struct Requirement {
    pub name: &'static str,
    pub value: f64,
    pub target: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionCheck {
    pub coalition: Coalition,
    /// Law of `x(S)`.
    pub payoff: Distribution,
    /// Conditions for `x(S) ⪰ v(S)`.
    pub conditions: Vec<Condition>,
    pub dominates: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// Efficiency, sign and (unstructured) positive semidefiniteness requirements.
    pub requirements: Vec<Requirement>,
    pub coalitions: Vec<CoalitionCheck>,
}

impl MembershipReport {
    /// First failed coalition condition in mask order.
    pub fn first_violation(&self) -> Option<(Coalition, Condition)> {
        self.coalitions.iter().find(|c| !c.dominates).and_then(|c| {
            let tol_free = c.conditions.iter().copied().find(|k| k.slack() < 0.0);
            tol_free.map(|k| (c.coalition, k))
        })
    }
}

fn close(value: f64, target: f64, tol: f64) -> bool {
    libm::fabs(value - target) <= tol * libm::fmax(1.0, libm::fabs(target))
}

fn requirement(name: &'static str, value: f64, target: f64, tol: f64) -> Requirement {
    Requirement { name, value, target, satisfied: close(value, target, tol) }
}

fn check_len(n: usize, v: &[f64]) -> Result<(), CoreError> {
    if v.len() != n {
        return Err(CoreError::DimensionMismatch { expected: n, found: v.len() });
    }
    Ok(())
}

fn nonnegative(name: &'static str, r: &[f64], tol: f64) -> Requirement {
    let min = r.iter().copied().fold(f64::INFINITY, f64::min);
    Requirement { name, value: min, target: 0.0, satisfied: min >= -tol }
}

/// Full SSD-core membership check with per-coalition detail.
pub fn dc_check(g: &StochasticGame, alloc: &Allocation, tol: f64) -> Result<MembershipReport, CoreError> {
    let n = g.players();
    let family = g.family();
    let vn = g.grand_value();
    let mu_n = vn.mean();
    let incompatible = || CoreError::IncompatibleAllocationType { allocation: alloc.kind(), family };
    let location_scale = matches!(family, Family::Normal | Family::Uniform | Family::AlphaCutUniform);

    let mut requirements = Vec::new();
    let mut coalitions = Vec::with_capacity((1 << n) - 1);
    let mut push = |s: Coalition, payoff: Distribution| -> Result<(), CoreError> {
        let conditions = dominance_conditions(&payoff, g.value(s))?;
        let dominates = conditions.iter().all(|c| c.holds(tol));
        coalitions.push(CoalitionCheck { coalition: s, payoff, conditions, dominates });
        Ok(())
    };

    match alloc {
        Allocation::R { r } => {
            check_len(n, r)?;
            requirements.push(requirement("r(N) = 1", r.iter().sum(), 1.0, tol));
            requirements.push(nonnegative("min r_i >= 0", r, tol));
            for s in Coalition::all_nonempty(n) {
                push(s, vn.scaled(libm::fmax(s.sum(r), 0.0))?)?;
            }
        }
        Allocation::Dr { d, r } | Allocation::DrSigned { d, r } => {
            if !location_scale {
                return Err(incompatible());
            }
            check_len(n, d)?;
            check_len(n, r)?;
            let signed = matches!(alloc, Allocation::DrSigned { .. });
            requirements.push(requirement("r(N) = 1", r.iter().sum(), 1.0, tol));
            requirements.push(requirement("d(N) = E[v(N)]", d.iter().sum(), mu_n, tol));
            if !signed {
                requirements.push(nonnegative("min r_i >= 0", r, tol));
            }
            for s in Coalition::all_nonempty(n) {
                let (ds, mut rs) = (s.sum(d), s.sum(r));
                if !signed || family != Family::Normal {
                    if rs < 0.0 && (!signed || rs >= -tol) {
                        rs = 0.0;
                    }
                    if rs < 0.0 {
                        // A uniform law is symmetric about its mean; other families are not.
                        if family != Family::Uniform {
                            return Err(CoreError::UnrepresentablePayoff(s));
                        }
                        rs = -rs;
                    }
                }
                push(s, vn.affine_image(ds, rs)?)?;
            }
        }
        Allocation::Unstructured { mean, cov } => {
            if family != Family::Normal {
                return Err(incompatible());
            }
            check_len(n, mean)?;
            check_len(n * n, cov)?;
            if !is_symmetric(cov, n, tol * libm::fmax(1.0, cov.iter().fold(0.0, |m, v| libm::fmax(m, libm::fabs(*v)))))
            {
                return Err(CoreError::NotSymmetric);
            }
            let min_eig = symmetric_eigenvalues(cov, n)[0];
            let sigma2_n = vn.variance();
            let block =
                |s: Coalition| -> f64 { s.players().flat_map(|i| s.players().map(move |j| cov[i * n + j])).sum() };
            requirements.push(requirement("sum(mean) = E[v(N)]", mean.iter().sum(), mu_n, tol));
            requirements.push(requirement("sum(cov) = Var[v(N)]", block(g.grand()), sigma2_n, tol));
            requirements.push(Requirement {
                name: "cov positive semidefinite",
                value: min_eig,
                target: 0.0,
                satisfied: min_eig >= -tol * libm::fmax(1.0, sigma2_n),
            });
            for s in Coalition::all_nonempty(n) {
                let payoff = Distribution::Normal { mu: s.sum(mean), sigma2: libm::fmax(block(s), 0.0) };
                push(s, payoff)?;
            }
        }
    }
    let member = requirements.iter().all(|r| r.satisfied) && coalitions.iter().all(|c| c.dominates);
    Ok(MembershipReport { member, requirements, coalitions })
}

pub fn dc_membership(g: &StochasticGame, alloc: &Allocation, tol: f64) -> Result<bool, CoreError> {
    Ok(dc_check(g, alloc, tol)?.member)
}

/// Membership of a jointly normal allocation `N(mean, cov)`.
pub fn unstructured_membership(g: &StochasticGame, mean: &[f64], cov: &[f64], tol: f64) -> Result<bool, CoreError> {
    dc_membership(g, &Allocation::Unstructured { mean: mean.to_vec(), cov: cov.to_vec() }, tol)
}

/// Undominated SSD-core membership of a `(d, r)` allocation in a normal game.
///
/// `x` is rejected when some `x(S)` is strictly dominated by `v(S)`, meaning
/// `v(S) ⪰ x(S)` holds and `x(S) ⪰ v(S)` does not.
pub fn udc_membership_dr(g: &StochasticGame, d: &[f64], r: &[f64], tol: f64) -> Result<bool, CoreError> {
    if g.family() != Family::Normal {
        return Err(CoreError::UnsupportedFamily(g.family()));
    }
    let n = g.players();
    check_len(n, d)?;
    check_len(n, r)?;
    let vn = g.grand_value();
    if !close(r.iter().sum(), 1.0, tol) || !close(d.iter().sum(), vn.mean(), tol) {
        return Ok(false);
    }
    for s in Coalition::all_nonempty(n) {
        let x = vn.affine_image(s.sum(d), s.sum(r))?;
        let v = g.value(s);
        if dominates_within(v, &x, tol)? && !dominates_within(&x, v, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn require_family(g: &StochasticGame, families: &[Family]) -> Result<(), CoreError> {
    if families.contains(&g.family()) {
        Ok(())
    } else {
        Err(CoreError::UnsupportedFamily(g.family()))
    }
}

/// Splits a point of the `(d, r)` program into its halves.
fn split(z: Vec<f64>, n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = z[n..].to_vec();
    let mut d = z;
    d.truncate(n);
    (d, r)
}

fn padded(s: Coalition, n: usize, d_coef: f64, r_coef: f64) -> Vec<f64> {
    let mut row = vec![0.0; 2 * n];
    for i in s.players() {
        row[i] = d_coef;
        row[n + i] = r_coef;
    }
    row
}

fn uniform_share(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

/// A `(d, r)` witness.
pub type DrPair = (Vec<f64>, Vec<f64>);

/// Nonemptiness of the `(d, r)` SSD-core of a normal game, with a witness.
///
/// For `σ_N > 0` this is `C(μ) ≠ ∅` and `C_cost(σ̂) ≠ ∅`; the witness pairs a
/// point of each. For `σ_N = 0` every payoff is deterministic and only the
/// mean conditions remain.
pub fn dc_nonempty_dr_normal(g: &StochasticGame, tol: f64) -> Result<Option<DrPair>, CoreError> {
    require_family(g, &[Family::Normal])?;
    let Some(d) = g.mean_game().core_nonempty(tol)? else {
        return Ok(None);
    };
    let r = match g.deviation_game() {
        Ok(sigma_hat) => match sigma_hat.cost_core_nonempty(tol)? {
            Some(r) => r,
            None => return Ok(None),
        },
        Err(CoreError::ZeroGrandVariance) => uniform_share(g.players()),
        Err(e) => return Err(e),
    };
    Ok(Some((d, r)))
}

/// Decides `∃ d, r >= 0`: `d(S) >= μ_S`, `d(S) >= a_S + r(S)(μ_N − a_N)`, `d(N) = μ_N`, `r(N) = 1`.
pub fn dr_condition_feasible(
    mean: &ClassicalGame,
    lower: &ClassicalGame,
    tol: f64,
) -> Result<Option<DrPair>, CoreError> {
    let n = mean.players();
    if lower.players() != n {
        return Err(CoreError::DimensionMismatch { expected: n, found: lower.players() });
    }
    let (mu_n, a_n) = (mean.grand_value(), lower.grand_value());
    let gap = mu_n - a_n;
    if gap < -tol * libm::fmax(1.0, libm::fabs(mu_n)) {
        return Err(CoreError::InvalidGap { mean_total: mu_n, lower_total: a_n });
    }
    let gap = libm::fmax(gap, 0.0);
    let grand = mean.grand();
    let mut sys = LinearSystem::new(2 * n);
    sys.add_eq(padded(grand, n, 1.0, 0.0), mu_n);
    sys.add_eq(padded(grand, n, 0.0, 1.0), 1.0);
    for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
        sys.add_ge(padded(s, n, 1.0, 0.0), mean.value(s));
        sys.add_ge(padded(s, n, 1.0, -gap), lower.value(s));
    }
    for i in 0..n {
        sys.set_lower(n + i, 0.0);
    }
    Ok(sys.solve(tol)?.into_point().map(|z| split(z, n)))
}

/// Outcome of the uniform `(d, r)` decision together with the structural flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionReport {
    pub nonempty: bool,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
    pub mean_core_nonempty: bool,
    pub lower_core_nonempty: bool,
    pub lower_convex: bool,
    /// Nonempty implies both cores nonempty; convex `a` with balanced `μ` implies nonempty.
    pub theorem_consistent: bool,
}

/// Exact decision of the `(d, r)` SSD-core of a uniform game.
pub fn dc_nonempty_dr_uniform(g: &StochasticGame, tol: f64) -> Result<DecisionReport, CoreError> {
    require_family(g, &[Family::Uniform])?;
    let mean = g.mean_game();
    let lower = g.lower_bound_game()?;
    let witness = dr_condition_feasible(&mean, &lower, tol)?;
    let mean_core_nonempty = mean.core_nonempty(tol)?.is_some();
    let lower_core_nonempty = lower.core_nonempty(tol)?.is_some();
    let lower_convex = lower.is_convex();
    let nonempty = witness.is_some();
    let theorem_consistent = (!nonempty || (mean_core_nonempty && lower_core_nonempty))
        && (!(lower_convex && mean_core_nonempty) || nonempty);
    Ok(DecisionReport { nonempty, witness, mean_core_nonempty, lower_core_nonempty, lower_convex, theorem_consistent })
}

/// Walks `d` down to a point `x` of `C(a)` with `x(N) = a_N` and returns `(x, r)`,
/// `r = (d − x)/(meanTotal − a_N)`.
///
/// Each step lowers the smallest-index player whose every containing coalition
/// has slack above `tol`, by the smallest such slack.
pub fn process_p(
    d: &[f64],
    lower: &ClassicalGame,
    mean_total: f64,
    tol: f64,
) -> Result<(Vec<f64>, Vec<f64>), CoreError> {
    let n = lower.players();
    check_len(n, d)?;
    if !lower.is_convex() {
        return Err(CoreError::NotConvex);
    }
    let a_n = lower.grand_value();
    let gap = mean_total - a_n;
    if gap < -tol * libm::fmax(1.0, libm::fabs(mean_total)) {
        return Err(CoreError::InvalidGap { mean_total, lower_total: a_n });
    }
    let grand = lower.grand();
    let cap = n << n;
    let mut x = d.to_vec();
    let mut steps = 0;
    while grand.sum(&x) - a_n > tol {
        if steps == cap {
            return Err(CoreError::IterationCapExceeded(cap));
        }
        steps += 1;
        let slack = |s: Coalition, x: &[f64]| s.sum(x) - lower.value(s);
        let step = (0..n).find_map(|k| {
            let t = Coalition::all_nonempty(n)
                .filter(|s| s.contains(k))
                .map(|s| slack(s, &x))
                .fold(f64::INFINITY, f64::min);
            (t > tol).then_some((k, t))
        });
        let Some((k, t)) = step else {
            return Err(CoreError::IterationCapExceeded(cap));
        };
        x[k] -= t;
    }
    let r = if gap > tol { d.iter().zip(&x).map(|(di, xi)| (di - xi) / gap).collect() } else { uniform_share(n) };
    Ok((x, r))
}

/// Nonemptiness of the `(d, r±)` SSD-core for normal and uniform games.
///
/// Uniform games first try `d ∈ C(μ)`, `x ∈ C(a)`, `r = (d − x)/(μ_N − a_N)` and
/// fall back to the exact program when that pair is not a member (with `r(S) < 0`
/// the lower end of `x(S)` is `d(S) − |r(S)|(μ_N − a_N)`).
pub fn dc_nonempty_dr_signed(g: &StochasticGame, tol: f64) -> Result<Option<DrPair>, CoreError> {
    require_family(g, &[Family::Normal, Family::Uniform])?;
    let n = g.players();
    let grand = g.grand();
    let mean = g.mean_game();
    let mu_n = mean.grand_value();
    let mut sys = LinearSystem::new(2 * n);
    sys.add_eq(padded(grand, n, 1.0, 0.0), mu_n);
    sys.add_eq(padded(grand, n, 0.0, 1.0), 1.0);
    for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
        sys.add_ge(padded(s, n, 1.0, 0.0), mean.value(s));
    }
    match g.family() {
        Family::Normal => {
            let sigma_n = g.grand_value().std_dev();
            if sigma_n <= 0.0 {
                return Ok(mean.core_nonempty(tol)?.map(|d| (d, uniform_share(n))));
            }
            for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
                let bound = g.value(s).std_dev() / sigma_n;
                sys.add_le(padded(s, n, 0.0, 1.0), bound);
                sys.add_ge(padded(s, n, 0.0, 1.0), -bound);
            }
        }
        _ => {
            let lower = g.lower_bound_game()?;
            let gap = mu_n - lower.grand_value();
            if let (Some(d), Some(x)) = (mean.core_nonempty(tol)?, lower.core_nonempty(tol)?) {
                let r: Vec<f64> = d.iter().zip(&x).map(|(di, xi)| (di - xi) / gap).collect();
                let candidate = Allocation::DrSigned { d: d.clone(), r: r.clone() };
                if dc_membership(g, &candidate, tol)? {
                    return Ok(Some((d, r)));
                }
            }
            for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
                sys.add_ge(padded(s, n, 1.0, -gap), lower.value(s));
                sys.add_ge(padded(s, n, 1.0, gap), lower.value(s));
            }
        }
    }
    Ok(sys.solve(tol)?.into_point().map(|z| split(z, n)))
}

/// Per-coalition rows `coef·r(S) >= rhs` (or `<=` when `upper`) of the r-type program.
fn r_type_rows(g: &StochasticGame, s: Coalition) -> Vec<(f64, f64, bool)> {
    let vn = g.grand_value();
    let vs = g.value(s);
    match (vn, vs) {
        (Distribution::Normal { .. }, Distribution::Normal { .. }) => {
            vec![(vn.mean(), vs.mean(), false), (vn.std_dev(), vs.std_dev(), true)]
        }
        (Distribution::Uniform { a: an, .. }, Distribution::Uniform { a: as_, .. }) => {
            vec![(vn.mean(), vs.mean(), false), (*an, *as_, false)]
        }
        (Distribution::Gamma { k: kn, theta: tn }, Distribution::Gamma { k: ks, theta: ts }) => {
            vec![(kn * tn, ks * ts, false), (*tn, *ts, false)]
        }
        (Distribution::DiscreteUniform { realizations: wn }, Distribution::DiscreteUniform { realizations: ws }) => {
            let (mut pn, mut ps) = (0.0, 0.0);
            wn.iter()
                .zip(ws)
                .map(|(a, b)| {
                    pn += a;
                    ps += b;
                    (pn, ps, false)
                })
                .collect()
        }
        (
            Distribution::AlphaCutUniform { a: an, b: bn, alpha },
            Distribution::AlphaCutUniform { a: as_, b: bs, .. },
        ) => {
            vec![(*an, *as_, false), ((2.0 - alpha) * bn + alpha * an, (2.0 - alpha) * bs + alpha * as_, false)]
        }
        _ => unreachable!("single-family game"),
    }
}

/// Nonemptiness of the r-type SSD-core, with a witness `r`.
///
/// Conditions are kept in product form `r(S)·c_N >= c_S`, so denominators of
/// any sign are handled by the LP.
pub fn dc_nonempty_r(g: &StochasticGame, tol: f64) -> Result<Option<Vec<f64>>, CoreError> {
    let n = g.players();
    let grand = g.grand();
    let mut sys = LinearSystem::new(n);
    sys.add_eq(grand.indicator(n), 1.0);
    for s in Coalition::all_nonempty(n).filter(|&s| s != grand) {
        for (coef, rhs, upper) in r_type_rows(g, s) {
            let row: Vec<f64> = s.indicator(n).iter().map(|v| v * coef).collect();
            if upper {
                sys.add_le(row, rhs);
            } else {
                sys.add_ge(row, rhs);
            }
        }
    }
    for i in 0..n {
        sys.set_lower(i, 0.0);
    }
    Ok(sys.solve(tol)?.into_point())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-9;

    fn normal_game(n: usize, f: impl Fn(Coalition) -> (f64, f64)) -> StochasticGame {
        StochasticGame::from_fn(n, |s| {
            let (mu, s2) = f(s);
            Distribution::normal(mu, s2).unwrap()
        })
        .unwrap()
    }

    fn uniform_game(n: usize, f: impl Fn(Coalition) -> (f64, f64)) -> StochasticGame {
        StochasticGame::from_fn(n, |s| {
            let (a, b) = f(s);
            Distribution::uniform(a, b).unwrap()
        })
        .unwrap()
    }

    fn appendix_game() -> StochasticGame {
        normal_game(2, |s| if s.len() == 1 { (10.0, 1.0) } else { (2.0, 10.0) })
    }

    fn game_31(mu2: f64, mu_n: f64) -> (ClassicalGame, ClassicalGame) {
        let a = ClassicalGame::from_fn(3, |s| match s.mask() {
            0b011 | 0b110 | 0b111 => 3.0,
            _ => 0.0,
        })
        .unwrap();
        let mu = ClassicalGame::from_fn(3, |s| match s.mask() {
            0b001 | 0b100 => 5.0,
            0b010 => mu2,
            0b111 => mu_n,
            m => a.value(Coalition::from_mask(m)),
        })
        .unwrap();
        (mu, a)
    }

    #[test]
    fn game_construction_checks() {
        let mixed = vec![
            Distribution::normal(0.0, 1.0).unwrap(),
            Distribution::uniform(0.0, 1.0).unwrap(),
            Distribution::normal(0.0, 1.0).unwrap(),
        ];
        assert!(matches!(StochasticGame::new(2, mixed), Err(CoreError::MixedFamilies { .. })));
        let short = vec![Distribution::normal(0.0, 1.0).unwrap()];
        assert!(matches!(StochasticGame::new(2, short), Err(CoreError::WrongCoalitionCount { .. })));
        let alphas = vec![
            Distribution::alpha_cut_uniform(0.0, 1.0, 0.5).unwrap(),
            Distribution::alpha_cut_uniform(0.0, 1.0, 0.5).unwrap(),
            Distribution::alpha_cut_uniform(0.0, 1.0, 0.6).unwrap(),
        ];
        assert!(matches!(StochasticGame::new(2, alphas), Err(CoreError::AlphaMismatch { .. })));
    }

    #[test]
    fn derived_games() {
        let g = appendix_game();
        let dg = g.derive_games();
        assert_eq!(dg.mean.values(), &[0.0, 10.0, 10.0, 2.0]);
        let dev = dg.deviation.unwrap();
        assert!((dev.value(Coalition::singleton(0)) - 1.0 / 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(dev.grand_value(), 1.0);
        assert!(dg.lower.is_none());
        let u = uniform_game(2, |s| if s.len() == 1 { (0.0, 2.0) } else { (1.0, 5.0) });
        assert_eq!(u.lower_bound_game().unwrap().values(), &[0.0, 0.0, 0.0, 1.0]);
        let flat = normal_game(2, |s| if s.len() == 1 { (1.0, 1.0) } else { (2.0, 0.0) });
        assert_eq!(flat.deviation_game(), Err(CoreError::ZeroGrandVariance));
    }

    #[test]
    fn membership_examples() {
        let (mu, a) = game_31(5.0, 15.0);
        // Realize the modified example with b_S = 2μ_S − a_S.
        let g = uniform_game(3, |s| {
            let (lo, m) = (a.value(s), mu.value(s));
            (lo, if m > lo { 2.0 * m - lo } else { lo + 1.0 })
        });
        // Singletons {1},{3} and {2} have μ > a; other coalitions get b = a + 1 so μ_S = a_S + 0.5.
        let alloc = Allocation::Dr { d: vec![5.0, 5.0, 5.0], r: vec![5.0 / 12.0, 2.0 / 12.0, 5.0 / 12.0] };
        assert!(dc_membership(&g, &alloc, TOL).unwrap());

        let bad = Allocation::Dr { d: vec![1.0, 1.0], r: vec![0.5, 0.5] };
        assert!(!dc_membership(&appendix_game(), &bad, TOL).unwrap());
        let report = dc_check(&appendix_game(), &bad, TOL).unwrap();
        let (s, c) = report.first_violation().unwrap();
        assert_eq!((s, c.name), (Coalition::singleton(0), "mean"));
    }

    #[test]
    fn incompatible_allocations() {
        let g = StochasticGame::from_fn(2, |_| Distribution::gamma(1.0, 1.0).unwrap()).unwrap();
        let alloc = Allocation::Dr { d: vec![1.0, 1.0], r: vec![0.5, 0.5] };
        assert!(matches!(dc_membership(&g, &alloc, TOL), Err(CoreError::IncompatibleAllocationType { .. })));
        let alloc = Allocation::Unstructured { mean: vec![1.0, 1.0], cov: vec![1.0, 0.0, 0.0, 1.0] };
        assert!(matches!(dc_membership(&g, &alloc, TOL), Err(CoreError::IncompatibleAllocationType { .. })));
    }

    #[test]
    fn normal_dr_examples() {
        assert_eq!(dc_nonempty_dr_normal(&appendix_game(), TOL).unwrap(), None);
        let g = normal_game(2, |s| if s.len() == 1 { (1.0, 1.0) } else { (3.0, 4.0) });
        let (d, r) = dc_nonempty_dr_normal(&g, TOL).unwrap().unwrap();
        assert!(dc_membership(&g, &Allocation::Dr { d, r }, 1e-8).unwrap());
        let single = normal_game(1, |_| (4.0, 2.0));
        assert_eq!(dc_nonempty_dr_normal(&single, TOL).unwrap(), Some((vec![4.0], vec![1.0])));
    }

    #[test]
    fn dr_condition_examples() {
        let (mu, a) = game_31(2.0, 12.0);
        assert_eq!(dr_condition_feasible(&mu, &a, TOL).unwrap(), None);
        let (mu, a) = game_31(5.0, 15.0);
        let (d, r) = dr_condition_feasible(&mu, &a, TOL).unwrap().unwrap();
        assert!(mu.core_membership(&d, 1e-9).unwrap());
        assert!(r.iter().all(|&x| x >= -1e-9));
        let (mu, a) = game_31(2.0, 12.0);
        assert!(matches!(dr_condition_feasible(&a, &mu, TOL), Err(CoreError::InvalidGap { .. })));
        let (d, r) = dr_condition_feasible(&a, &a, TOL).unwrap().unwrap();
        assert!(a.core_membership(&d, 1e-9).unwrap());
        assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_dr_examples() {
        let g = uniform_game(2, |s| if s.len() == 1 { (0.0, 2.0) } else { (1.0, 5.0) });
        let rep = dc_nonempty_dr_uniform(&g, TOL).unwrap();
        assert!(rep.nonempty && rep.lower_convex && rep.mean_core_nonempty && rep.theorem_consistent);
        let (d, r) = rep.witness.unwrap();
        assert!(dc_membership(&g, &Allocation::Dr { d, r }, 1e-8).unwrap());

        let g = uniform_game(2, |_| (0.0, 2.0));
        let rep = dc_nonempty_dr_uniform(&g, TOL).unwrap();
        assert!(!rep.nonempty && !rep.mean_core_nonempty && rep.theorem_consistent);

        let g = uniform_game(1, |_| (1.0, 3.0));
        let rep = dc_nonempty_dr_uniform(&g, TOL).unwrap();
        assert_eq!(rep.witness, Some((vec![2.0], vec![1.0])));
    }

    #[test]
    fn process_p_hand_trace() {
        let a = ClassicalGame::new(2, vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let (x, r) = process_p(&[1.5, 1.5], &a, 3.0, TOL).unwrap();
        assert_eq!(x, vec![0.0, 1.0]);
        assert_eq!(r, vec![0.75, 0.25]);
        let (x, r) = process_p(&[0.25, 0.75], &a, 1.0, TOL).unwrap();
        assert_eq!(x, vec![0.25, 0.75]);
        assert_eq!(r, vec![0.5, 0.5]);
        let (_, a31) = game_31(2.0, 12.0);
        assert_eq!(process_p(&[5.0, 2.0, 5.0], &a31, 12.0, TOL), Err(CoreError::NotConvex));
    }

    #[test]
    fn signed_examples() {
        assert_eq!(dc_nonempty_dr_signed(&appendix_game(), TOL).unwrap(), None);
        // σ_{1} = 0 pins r_1 = 0.
        let g = normal_game(2, |s| match s.mask() {
            1 => (1.0, 0.0),
            2 => (1.0, 4.0),
            _ => (3.0, 4.0),
        });
        let (_, r) = dc_nonempty_dr_signed(&g, TOL).unwrap().unwrap();
        assert!(r[0].abs() < 1e-9);
        let gamma = StochasticGame::from_fn(1, |_| Distribution::gamma(1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(dc_nonempty_dr_signed(&gamma, TOL), Err(CoreError::UnsupportedFamily(_))));
    }

    #[test]
    fn signed_uniform_falls_back_when_difference_witness_fails() {
        // μ = (12, 0.5; 13), a = (0, 0; 10): d - x from the two cores can give r_2 < 0
        // with too little room below d_2.
        let g = uniform_game(2, |s| match s.mask() {
            1 => (0.0, 24.0),
            2 => (0.0, 1.0),
            _ => (10.0, 16.0),
        });
        let (d, r) = dc_nonempty_dr_signed(&g, TOL).unwrap().unwrap();
        assert!(dc_membership(&g, &Allocation::DrSigned { d, r }, 1e-8).unwrap());
    }

    #[test]
    fn r_type_examples() {
        let g = uniform_game(2, |s| if s.len() == 1 { (0.0, 2.0) } else { (1.0, 5.0) });
        let r = dc_nonempty_r(&g, TOL).unwrap().unwrap();
        assert!(dc_membership(&g, &Allocation::R { r }, 1e-8).unwrap());
        assert!(dc_membership(&g, &Allocation::R { r: vec![0.5, 0.5] }, TOL).unwrap());
        let gamma = StochasticGame::from_fn(2, |s| Distribution::gamma(s.len() as f64, 1.0).unwrap()).unwrap();
        assert_eq!(dc_nonempty_r(&gamma, TOL).unwrap(), None);
        let single = normal_game(1, |_| (2.0, 1.0));
        assert_eq!(dc_nonempty_r(&single, TOL).unwrap(), Some(vec![1.0]));
    }

    #[test]
    fn unstructured_examples() {
        let g = normal_game(2, |s| if s.len() == 1 { (1.0, 1.0) } else { (3.0, 4.0) });
        assert!(unstructured_membership(&g, &[1.5, 1.5], &[1.0, 1.0, 1.0, 1.0], TOL).unwrap());
        assert!(!unstructured_membership(&g, &[1.5, 1.5], &[5.0, 1.0, 1.0, 5.0], TOL).unwrap());
        assert_eq!(unstructured_membership(&g, &[1.5, 1.5], &[1.0, 2.0, 1.0, 1.0], TOL), Err(CoreError::NotSymmetric));
        let single = normal_game(1, |_| (2.0, 3.0));
        assert!(unstructured_membership(&single, &[2.0], &[3.0], TOL).unwrap());
    }

    #[test]
    fn udc_examples() {
        let g = appendix_game();
        assert!(udc_membership_dr(&g, &[11.0, -9.0], &[0.95, 0.05], TOL).unwrap());
        assert!(udc_membership_dr(&g, &[-9.0, 11.0], &[0.05, 0.95], TOL).unwrap());
        assert!(!udc_membership_dr(&g, &[1.0, 1.0], &[0.5, 0.5], TOL).unwrap());
        // x(S) ~ v(S) everywhere: additive normal game with perfectly correlated shares.
        let h = normal_game(2, |s| match s.mask() {
            1 => (1.0, 1.0),
            2 => (2.0, 4.0),
            _ => (3.0, 9.0),
        });
        assert!(udc_membership_dr(&h, &[1.0, 2.0], &[1.0 / 3.0, 2.0 / 3.0], TOL).unwrap());
    }
}
