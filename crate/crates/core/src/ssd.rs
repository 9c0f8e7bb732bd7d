//! Second-order stochastic dominance.
//!
//! `X ⪰ Y` iff `I(u) = ∫_{-∞}^u (F_X − F_Y) <= 0` for every `u`. Within a family
//! the relation reduces to a couple of parameter inequalities, exposed as
//! [`Condition`]s so callers can report which one failed. [`dominates_numeric`]
//! integrates the CDFs directly and works across families.

use alloc::vec::Vec;
use core::f64::consts::PI;

use thiserror::Error;

use crate::distributions::{Distribution, Family};
use crate::special::std_normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsdVerdict {
    LeftDominates,
    RightDominates,
    Equivalent,
    Incomparable,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsdError {
    #[error("closed-form comparison needs one family, got {left} and {right}")]
    FamilyMismatch { left: Family, right: Family },
    #[error("alpha-cut laws need a common alpha, got {left} and {right}")]
    AlphaMismatch { left: f64, right: f64 },
    #[error("discrete laws need the same number of realizations, got {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// One closed-form inequality `lhs >= rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    /// Prefix length for the discrete family, 0 otherwise.
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

impl Condition {
    fn new(name: &'static str, lhs: f64, rhs: f64) -> Self {
        Condition { name, index: 0, lhs, rhs }
    }

    pub fn slack(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// `lhs >= rhs - tol·max(1, |lhs|, |rhs|)`.
    pub fn holds(&self, tol: f64) -> bool {
        let scale = libm::fmax(1.0, libm::fmax(libm::fabs(self.lhs), libm::fabs(self.rhs)));
        self.lhs >= self.rhs - tol * scale
    }
}

/// The two inequalities for `U_α[a_x, b_x] ⪰ U_α[a_y, b_y]`.
pub fn alpha_cut_conditions(x: (f64, f64), y: (f64, f64), alpha: f64) -> [Condition; 2] {
    [
        Condition::new("lower", x.0, y.0),
        Condition::new("weighted", (2.0 - alpha) * x.1 + alpha * x.0, (2.0 - alpha) * y.1 + alpha * y.0),
    ]
}

/// The two inequalities for `U[a_x, b_x] ⪰ U[a_y, b_y]`; the mean one is kept doubled.
pub fn uniform_conditions(x: (f64, f64), y: (f64, f64)) -> [Condition; 2] {
    [Condition::new("lower", x.0, y.0), Condition::new("mean", x.0 + x.1, y.0 + y.1)]
}

/// Closed-form conditions equivalent to `x ⪰ y` for two laws of one family.
pub fn dominance_conditions(x: &Distribution, y: &Distribution) -> Result<Vec<Condition>, SsdError> {
    use Distribution::*;
    Ok(match (x, y) {
        (Normal { mu: mx, sigma2: sx }, Normal { mu: my, sigma2: sy }) => {
            alloc::vec![Condition::new("mean", *mx, *my), Condition::new("variance", *sy, *sx)]
        }
        (Uniform { a: ax, b: bx }, Uniform { a: ay, b: by }) => uniform_conditions((*ax, *bx), (*ay, *by)).to_vec(),
        (Gamma { k: kx, theta: tx }, Gamma { k: ky, theta: ty }) => {
            alloc::vec![Condition::new("mean", kx * tx, ky * ty), Condition::new("scale", *tx, *ty)]
        }
        (DiscreteUniform { realizations: wx }, DiscreteUniform { realizations: wy }) => {
            if wx.len() != wy.len() {
                return Err(SsdError::LengthMismatch { left: wx.len(), right: wy.len() });
            }
            let (mut sx, mut sy) = (0.0, 0.0);
            wx.iter()
                .zip(wy)
                .enumerate()
                .map(|(k, (a, b))| {
                    sx += a;
                    sy += b;
                    Condition { name: "prefix", index: k + 1, lhs: sx, rhs: sy }
                })
                .collect()
        }
        (AlphaCutUniform { a: ax, b: bx, alpha: alx }, AlphaCutUniform { a: ay, b: by, alpha: aly }) => {
            if alx != aly {
                return Err(SsdError::AlphaMismatch { left: *alx, right: *aly });
            }
            alpha_cut_conditions((*ax, *bx), (*ay, *by), *alx).to_vec()
        }
        _ => {
            return Err(SsdError::FamilyMismatch { left: x.family(), right: y.family() });
        }
    })
}

/// `x ⪰ y` with each condition relaxed by `tol` (relative to its magnitude, floor 1).
pub fn dominates_within(x: &Distribution, y: &Distribution, tol: f64) -> Result<bool, SsdError> {
    Ok(dominance_conditions(x, y)?.iter().all(|c| c.holds(tol)))
}

/// Exact closed-form test of `x ⪰ y`.
pub fn dominates_closed_form(x: &Distribution, y: &Distribution) -> Result<bool, SsdError> {
    dominates_within(x, y, 0.0)
}

pub fn compare_within(x: &Distribution, y: &Distribution, tol: f64) -> Result<SsdVerdict, SsdError> {
    let xy = dominates_within(x, y, tol)?;
    let yx = dominates_within(y, x, tol)?;
    Ok(match (xy, yx) {
        (true, true) => SsdVerdict::Equivalent,
        (true, false) => SsdVerdict::LeftDominates,
        (false, true) => SsdVerdict::RightDominates,
        (false, false) => SsdVerdict::Incomparable,
    })
}

pub fn compare(x: &Distribution, y: &Distribution) -> Result<SsdVerdict, SsdError> {
    compare_within(x, y, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Uniform grid size; CDF breakpoints are added on top.
    pub grid_points: usize,
    /// Quantile at which unbounded tails are cut.
    pub tail_probability: f64,
    /// Band on `I(u) / ∫(F_X + F_Y)` inside which the verdict is Borderline.
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { grid_points: 20001, tail_probability: 1e-7, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericVerdict {
    True,
    False,
    Borderline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericDominance {
    pub verdict: NumericVerdict,
    /// `max_u I(u) / ∫_{-∞}^u (F_X + F_Y)` over grid nodes with positive mass.
    pub max_ratio: f64,
    pub max_integral: f64,
    pub argmax: f64,
    /// Set when a violation was found beyond the grid in the lower tail.
    pub tail_violation: bool,
}

/// `∫_{-∞}^{u} F`, nonzero below the grid only for the normal family.
fn lower_tail_integral(d: &Distribution, u: f64) -> f64 {
    match d {
        Distribution::Normal { mu, sigma2 } if *sigma2 > 0.0 => {
            let s = libm::sqrt(*sigma2);
            let t = (u - mu) / s;
            let pdf = libm::exp(-0.5 * t * t) / libm::sqrt(2.0 * PI);
            libm::fmax(s * (t * std_normal_cdf(t) + pdf), 0.0)
        }
        _ => 0.0,
    }
}

fn truncated_support(d: &Distribution, tail: f64) -> (f64, f64) {
    let (mut lo, mut hi) = d.support();
    if lo == f64::NEG_INFINITY {
        lo = d.quantile(tail).unwrap_or(lo);
    }
    if hi == f64::INFINITY {
        hi = d.quantile(1.0 - tail).unwrap_or(hi);
    }
    (lo, hi)
}

/// Looks for `F_X > F_Y` far below `lo`, where the grid cannot see it.
fn lower_tail_probe(x: &Distribution, y: &Distribution, lo: f64, span: f64) -> bool {
    let (xlo, _) = x.support();
    let (ylo, _) = y.support();
    if xlo != f64::NEG_INFINITY {
        return false;
    }
    if ylo != f64::NEG_INFINITY {
        return true;
    }
    // Deepest probe decides: beyond it the log-CDF gap keeps its sign.
    let mut deepest = None;
    let mut step = span;
    while step < 1e100 {
        let z = lo - step;
        let (lx, ly) = (x.ln_cdf(z), y.ln_cdf(z));
        if lx.is_finite() && ly.is_finite() {
            deepest = Some(lx > ly + 1e-12 * libm::fabs(ly));
        }
        step *= 2.0;
    }
    deepest.unwrap_or(false)
}

/// Trapezoid-rule test of `x ⪰ y` on a truncated grid.
///
/// The nodes include every CDF breakpoint and the rule uses one-sided limits at
/// each node, so it is exact for piecewise-linear CDFs. The verdict compares
/// `I(u)` with the accumulated mass `∫(F_X + F_Y)` to be scale-free.
pub fn dominates_numeric(x: &Distribution, y: &Distribution, cfg: &OracleConfig) -> NumericDominance {
    let (xl, xh) = truncated_support(x, cfg.tail_probability);
    let (yl, yh) = truncated_support(y, cfg.tail_probability);
    let mut lo = libm::fmin(xl, yl);
    let mut hi = libm::fmax(xh, yh);
    if hi <= lo {
        lo -= 0.5;
        hi += 0.5;
    }
    let span = hi - lo;
    let m = cfg.grid_points.max(2);
    let mut nodes: Vec<f64> = (0..m).map(|i| lo + span * (i as f64) / ((m - 1) as f64)).collect();
    nodes.extend(x.breakpoints().into_iter().chain(y.breakpoints()).filter(|&b| b > lo && b < hi));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();

    let mut ix = lower_tail_integral(x, lo);
    let mut iy = lower_tail_integral(y, lo);
    let mut best = NumericDominance {
        verdict: NumericVerdict::Borderline,
        max_ratio: f64::NEG_INFINITY,
        max_integral: ix - iy,
        argmax: lo,
        tail_violation: false,
    };
    let record = |u: f64, ix: f64, iy: f64, best: &mut NumericDominance| {
        let integral = ix - iy;
        if integral > best.max_integral {
            best.max_integral = integral;
        }
        let mass = ix + iy;
        if mass > 0.0 {
            let ratio = integral / mass;
            if ratio > best.max_ratio {
                best.max_ratio = ratio;
                best.argmax = u;
            }
        }
    };
    record(lo, ix, iy, &mut best);
    for w in nodes.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = b - a;
        ix += 0.5 * h * (x.cdf(a) + x.cdf_left(b));
        iy += 0.5 * h * (y.cdf(a) + y.cdf_left(b));
        record(b, ix, iy, &mut best);
    }
    if !best.max_ratio.is_finite() {
        best.max_ratio = 0.0;
    }
    best.verdict = if best.max_ratio > cfg.tolerance {
        NumericVerdict::False
    } else if best.max_ratio < -cfg.tolerance {
        NumericVerdict::True
    } else {
        NumericVerdict::Borderline
    };
    if best.verdict != NumericVerdict::False && lower_tail_probe(x, y, lo, span.max(1.0)) {
        best.verdict = NumericVerdict::False;
        best.tail_violation = true;
    }
    best
}
