//! Distribution families for coalition values and stochastic payoffs.
//!
//! Values are validated on construction. A zero scale in [`Distribution::affine_image`]
//! yields the point-mass member of the family (e.g. a uniform law with `a == b`); those
//! members are accepted by every operation here but rejected by [`Distribution::validate`].

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::special::{bisect_increasing, gamma_p, ln_std_normal_cdf, std_normal_cdf};

/// Relative tolerance of the numeric quantile inversion.
pub const QUANTILE_TOLERANCE: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    Uniform,
    Gamma,
    DiscreteUniform,
    AlphaCutUniform,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Normal => "normal",
            Family::Uniform => "uniform",
            Family::Gamma => "gamma",
            Family::DiscreteUniform => "discrete_uniform",
            Family::AlphaCutUniform => "alpha_cut_uniform",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid {family} parameters: {reason}")]
    InvalidParameter { family: Family, reason: &'static str },
    #[error("a shifted gamma law is not a gamma law (only pure scaling is supported)")]
    NonScaleFamily,
    #[error("negative scale {0} is only supported for the normal family")]
    NegativeScale(f64),
    #[error("operation not supported for the {0} family")]
    UnsupportedFamily(Family),
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
}

/// A one-dimensional law from one of the supported families.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// `N(mu, sigma2)`; `sigma2` is the variance.
    Normal { mu: f64, sigma2: f64 },
    /// `U[a, b]`.
    Uniform { a: f64, b: f64 },
    /// `Γ(k, theta)` with shape `k` and scale `theta`.
    Gamma { k: f64, theta: f64 },
    /// Equiprobable realizations, sorted ascending.
    DiscreteUniform { realizations: Vec<f64> },
    /// Uniform CDF scaled by `alpha` on `[a, b)` with a jump to 1 at `b`.
    AlphaCutUniform { a: f64, b: f64, alpha: f64 },
}

fn invalid(family: Family, reason: &'static str) -> DistributionError {
    DistributionError::InvalidParameter { family, reason }
}

impl Distribution {
    pub fn normal(mu: f64, sigma2: f64) -> Result<Self, DistributionError> {
        let d = Distribution::Normal { mu, sigma2 };
        d.validate()?;
        Ok(d)
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self, DistributionError> {
        let d = Distribution::Uniform { a, b };
        d.validate()?;
        Ok(d)
    }

    pub fn gamma(k: f64, theta: f64) -> Result<Self, DistributionError> {
        let d = Distribution::Gamma { k, theta };
        d.validate()?;
        Ok(d)
    }

    /// Sorts the realizations; duplicates are kept.
    pub fn discrete_uniform(mut realizations: Vec<f64>) -> Result<Self, DistributionError> {
        if realizations.iter().any(|x| !x.is_finite()) {
            return Err(invalid(Family::DiscreteUniform, "realizations must be finite"));
        }
        realizations.sort_by(f64::total_cmp);
        let d = Distribution::DiscreteUniform { realizations };
        d.validate()?;
        Ok(d)
    }

    pub fn alpha_cut_uniform(a: f64, b: f64, alpha: f64) -> Result<Self, DistributionError> {
        let d = Distribution::AlphaCutUniform { a, b, alpha };
        d.validate()?;
        Ok(d)
    }

    /// Checks the family invariants. Point-mass members produced by a zero scale fail here.
    pub fn validate(&self) -> Result<(), DistributionError> {
        let fam = self.family();
        match self {
            Distribution::Normal { mu, sigma2 } => {
                if !mu.is_finite() || !sigma2.is_finite() {
                    return Err(invalid(fam, "parameters must be finite"));
                }
                if *sigma2 < 0.0 {
                    return Err(invalid(fam, "variance must be nonnegative"));
                }
            }
            Distribution::Uniform { a, b } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(invalid(fam, "bounds must be finite"));
                }
                if a >= b {
                    return Err(invalid(fam, "requires a < b"));
                }
            }
            Distribution::Gamma { k, theta } => {
                if !(k.is_finite() && *k > 0.0) {
                    return Err(invalid(fam, "shape must be positive"));
                }
                if !(theta.is_finite() && *theta > 0.0) {
                    return Err(invalid(fam, "scale must be positive"));
                }
            }
            Distribution::DiscreteUniform { realizations } => {
                if realizations.is_empty() {
                    return Err(invalid(fam, "needs at least one realization"));
                }
                if realizations.iter().any(|x| !x.is_finite()) {
                    return Err(invalid(fam, "realizations must be finite"));
                }
                if realizations.windows(2).any(|w| w[0] > w[1]) {
                    return Err(invalid(fam, "realizations must be sorted ascending"));
                }
            }
            Distribution::AlphaCutUniform { a, b, alpha } => {
                if !a.is_finite() || !b.is_finite() {
                    return Err(invalid(fam, "bounds must be finite"));
                }
                if a >= b {
                    return Err(invalid(fam, "requires a < b"));
                }
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(invalid(fam, "alpha must lie in (0, 1)"));
                }
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self {
            Distribution::Normal { .. } => Family::Normal,
            Distribution::Uniform { .. } => Family::Uniform,
            Distribution::Gamma { .. } => Family::Gamma,
            Distribution::DiscreteUniform { .. } => Family::DiscreteUniform,
            Distribution::AlphaCutUniform { .. } => Family::AlphaCutUniform,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Normal { mu, .. } => *mu,
            Distribution::Uniform { a, b } => 0.5 * (a + b),
            Distribution::Gamma { k, theta } => k * theta,
            Distribution::DiscreteUniform { realizations } => {
                realizations.iter().sum::<f64>() / realizations.len() as f64
            }
            Distribution::AlphaCutUniform { a, b, alpha } => alpha * 0.5 * (a + b) + (1.0 - alpha) * b,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            Distribution::Normal { sigma2, .. } => *sigma2,
            Distribution::Uniform { a, b } => (b - a) * (b - a) / 12.0,
            Distribution::Gamma { k, theta } => k * theta * theta,
            Distribution::DiscreteUniform { realizations } => {
                let m = self.mean();
                realizations.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / realizations.len() as f64
            }
            Distribution::AlphaCutUniform { a, b, alpha } => {
                // Centre at b to keep the second moment well conditioned.
                let w = b - a;
                let mean_c = -alpha * 0.5 * w;
                let second_c = alpha * w * w / 3.0;
                (second_c - mean_c * mean_c).max(0.0)
            }
        }
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance())
    }

    /// Right-continuous CDF `P(X <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mu, sigma2 } => {
                if *sigma2 == 0.0 {
                    step(x >= *mu)
                } else {
                    std_normal_cdf((x - mu) / libm::sqrt(*sigma2))
                }
            }
            Distribution::Uniform { a, b } => {
                if x < *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    (x - a) / (b - a)
                }
            }
            Distribution::Gamma { k, theta } => {
                if *theta == 0.0 {
                    step(x >= 0.0)
                } else {
                    gamma_p(*k, x / theta)
                }
            }
            Distribution::DiscreteUniform { realizations } => {
                let below = realizations.partition_point(|&w| w <= x);
                below as f64 / realizations.len() as f64
            }
            Distribution::AlphaCutUniform { a, b, alpha } => {
                if x < *a {
                    0.0
                } else if x >= *b {
                    1.0
                } else {
                    alpha * (x - a) / (b - a)
                }
            }
        }
    }

    /// Left limit `P(X < x)`; differs from [`Self::cdf`] only at atoms.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mu, sigma2 } if *sigma2 == 0.0 => step(x > *mu),
            Distribution::Uniform { a, b } if a == b => step(x > *a),
            Distribution::Gamma { theta, .. } if *theta == 0.0 => step(x > 0.0),
            Distribution::DiscreteUniform { realizations } => {
                let below = realizations.partition_point(|&w| w < x);
                below as f64 / realizations.len() as f64
            }
            Distribution::AlphaCutUniform { a, b, alpha } => {
                if x <= *a {
                    0.0
                } else if x > *b {
                    1.0
                } else if a == b {
                    0.0
                } else {
                    alpha * (x - a) / (b - a)
                }
            }
            _ => self.cdf(x),
        }
    }

    /// `ln P(X <= x)`, accurate in the lower tail of the normal family.
    pub fn ln_cdf(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal { mu, sigma2 } if *sigma2 > 0.0 => ln_std_normal_cdf((x - mu) / libm::sqrt(*sigma2)),
            _ => libm::log(self.cdf(x)),
        }
    }

    /// Inverse CDF for the continuous families.
    pub fn quantile(&self, p: f64) -> Result<f64, DistributionError> {
        if !(p > 0.0 && p < 1.0) {
            return Err(DistributionError::ProbabilityOutOfRange(p));
        }
        match self {
            Distribution::Uniform { a, b } => Ok(a + p * (b - a)),
            Distribution::Normal { mu, sigma2 } => {
                if *sigma2 == 0.0 {
                    return Ok(*mu);
                }
                let s = libm::sqrt(*sigma2);
                Ok(bisect_increasing(|x| self.cdf(x), p, mu - 40.0 * s, mu + 40.0 * s, QUANTILE_TOLERANCE))
            }
            Distribution::Gamma { k, theta } => {
                if *theta == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = (k * theta).max(*theta) * 2.0;
                while self.cdf(hi) < p {
                    hi *= 2.0;
                }
                Ok(bisect_increasing(|x| self.cdf(x), p, 0.0, hi, QUANTILE_TOLERANCE))
            }
            Distribution::DiscreteUniform { .. } | Distribution::AlphaCutUniform { .. } => {
                Err(DistributionError::UnsupportedFamily(self.family()))
            }
        }
    }

    /// Closed support `(lower, upper)`; infinite ends for unbounded families.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::Normal { mu, sigma2 } => {
                if *sigma2 == 0.0 {
                    (*mu, *mu)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            Distribution::Uniform { a, b } | Distribution::AlphaCutUniform { a, b, .. } => (*a, *b),
            Distribution::Gamma { theta, .. } => {
                if *theta == 0.0 {
                    (0.0, 0.0)
                } else {
                    (0.0, f64::INFINITY)
                }
            }
            Distribution::DiscreteUniform { realizations } => (realizations[0], realizations[realizations.len() - 1]),
        }
    }

    /// Points where the CDF has a kink or a jump.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Distribution::Normal { mu, sigma2 } => {
                if *sigma2 == 0.0 {
                    alloc::vec![*mu]
                } else {
                    Vec::new()
                }
            }
            Distribution::Uniform { a, b } | Distribution::AlphaCutUniform { a, b, .. } => alloc::vec![*a, *b],
            Distribution::Gamma { .. } => alloc::vec![0.0],
            Distribution::DiscreteUniform { realizations } => realizations.clone(),
        }
    }

    /// Law of `d + r·(X − E[X])`.
    ///
    /// Passing `d = r·E[X]` gives the law of `r·X`. Only the normal family accepts
    /// `r < 0`; gamma accepts only the pure-scaling case.
    pub fn affine_image(&self, d: f64, r: f64) -> Result<Distribution, DistributionError> {
        if r < 0.0 && self.family() != Family::Normal {
            return Err(DistributionError::NegativeScale(r));
        }
        let m = self.mean();
        Ok(match self {
            Distribution::Normal { sigma2, .. } => Distribution::Normal { mu: d, sigma2: r * r * sigma2 },
            Distribution::Uniform { a, b } => Distribution::Uniform { a: d + r * (a - m), b: d + r * (b - m) },
            Distribution::Gamma { k, theta } => {
                let expected = r * m;
                if libm::fabs(d - expected) > 1e-9 * libm::fmax(1.0, libm::fabs(expected)) {
                    return Err(DistributionError::NonScaleFamily);
                }
                Distribution::Gamma { k: *k, theta: r * theta }
            }
            Distribution::DiscreteUniform { realizations } => {
                Distribution::DiscreteUniform { realizations: realizations.iter().map(|w| d + r * (w - m)).collect() }
            }
            Distribution::AlphaCutUniform { a, b, alpha } => {
                Distribution::AlphaCutUniform { a: d + r * (a - m), b: d + r * (b - m), alpha: *alpha }
            }
        })
    }

    /// Law of `r·X` for `r >= 0`.
    pub fn scaled(&self, r: f64) -> Result<Distribution, DistributionError> {
        self.affine_image(r * self.mean(), r)
    }
}

fn step(on: bool) -> f64 {
    if on {
        1.0
    } else {
        0.0
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Normal { mu, sigma2 } => write!(f, "N({mu}, {sigma2})"),
            Distribution::Uniform { a, b } => write!(f, "U[{a}, {b}]"),
            Distribution::Gamma { k, theta } => write!(f, "Gamma({k}, {theta})"),
            Distribution::DiscreteUniform { realizations } => {
                f.write_str("DU{")?;
                for (i, w) in realizations.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{w}")?;
                }
                f.write_str("}")
            }
            Distribution::AlphaCutUniform { a, b, alpha } => write!(f, "U_{alpha}[{a}, {b}]"),
        }
    }
}
