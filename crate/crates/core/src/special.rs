//! Special functions on top of `libm`.

use core::f64::consts::{FRAC_1_SQRT_2, PI};

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `ln Φ(z)`, finite far into the lower tail.
pub(crate) fn ln_std_normal_cdf(z: f64) -> f64 {
    if z > -30.0 {
        return libm::log(std_normal_cdf(z));
    }
    // Asymptotic expansion of the Mills ratio.
    let z2 = z * z;
    let series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    -0.5 * z2 - libm::log(-z) - 0.5 * libm::log(2.0 * PI) + libm::log(series)
}

const GAMMA_EPS: f64 = 1e-15;
const GAMMA_MAX_ITER: usize = 10_000;

/// Regularized lower incomplete gamma function `P(k, x)`.
pub(crate) fn gamma_p(k: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    if x < k + 1.0 {
        gamma_p_series(k, x)
    } else {
        1.0 - gamma_q_continued_fraction(k, x)
    }
}

fn ln_gamma_prefactor(k: f64, x: f64) -> f64 {
    k * libm::log(x) - x - libm::lgamma(k)
}

fn gamma_p_series(k: f64, x: f64) -> f64 {
    let mut term = 1.0 / k;
    let mut sum = term;
    let mut denom = k;
    for _ in 0..GAMMA_MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if libm::fabs(term) < libm::fabs(sum) * GAMMA_EPS {
            break;
        }
    }
    (sum * libm::exp(ln_gamma_prefactor(k, x))).min(1.0)
}

// Modified Lentz evaluation of the continued fraction for Q(k, x).
fn gamma_q_continued_fraction(k: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - k;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - k);
        b += 2.0;
        d = an * d + b;
        if libm::fabs(d) < TINY {
            d = TINY;
        }
        c = b + an / c;
        if libm::fabs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if libm::fabs(delta - 1.0) < GAMMA_EPS {
            break;
        }
    }
    (libm::exp(ln_gamma_prefactor(k, x)) * h).clamp(0.0, 1.0)
}

/// Bisection for the smallest `x` in `[lo, hi]` with `f(x) >= p`, to width `tol` relative to the larger end.
pub(crate) fn bisect_increasing(f: impl Fn(f64) -> f64, p: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    while hi - lo > tol * libm::fmax(libm::fmax(libm::fabs(lo), libm::fabs(hi)), f64::MIN_POSITIVE) {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
