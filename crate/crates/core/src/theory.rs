//! Limit functions of the mean-field process and their numerical inversion.
//!
//! The central object is the Borel-Tanner series
//!
//! ```text
//! S(c) = sum_{k>=1} k^(k-2) / (c k!) * (c e^-c)^k
//! ```
//!
//! which is simultaneously the limiting number of components per vertex of
//! the random graph at time `cn/2` and `1 - u(c)`, where `u(c)` is the limit
//! of the normalised transposition distance. For `c <= 1`, `u(c) = c/2`
//! exactly.
//!
//! The series is summed with a certified bound on the omitted tail. Two bounds
//! are available after `K` terms, and the smaller one is used:
//!
//! * the ratio of consecutive terms increases towards `rho = c e^(1-c)`, so
//!   for `c != 1` the tail is at most `t_K * rho / (1 - rho)`;
//! * Robbins' lower bound on `k!` gives `t_k <= rho^k k^(-5/2) / (c sqrt(2 pi))`,
//!   hence a tail of at most `rho^K (2/3) K^(-3/2) / (c sqrt(2 pi))`, which is
//!   what makes `c = 1` summable.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::CompensatedSum;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Largest `c` searched by [`invert_u`]. `1 - u(c)` behaves like `e^-c`, so
/// beyond this point `dc/dr` exceeds `1e5` and the inverse carries no usable
/// information. `u(12) ~= 0.999994`.
pub const INVERT_U_C_MAX: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesParams {
    /// Absolute target for the omitted tail.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for SeriesParams {
    fn default() -> Self {
        SeriesParams {
            tolerance: 1e-10,
            max_terms: 1_000_000,
        }
    }
}

impl SeriesParams {
    pub fn new(tolerance: f64, max_terms: usize) -> Result<Self> {
        if !(tolerance > 0.0) || max_terms == 0 {
            return Err(Error::domain(
                "series tolerance must be positive and max_terms at least 1",
            ));
        }
        Ok(SeriesParams {
            tolerance,
            max_terms,
        })
    }
}

/// A limit-function value together with a bound on its numerical error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryValue {
    pub value: f64,
    pub truncation_bound: f64,
}

impl TheoryValue {
    fn exact(value: f64) -> Self {
        TheoryValue {
            value,
            truncation_bound: 0.0,
        }
    }
}

fn check_positive(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("c must be positive and finite, got {c}")))
    }
}

/// `ln k!`, exact summation for small `k`, Stirling series above.
pub(crate) fn ln_factorial(k: u64) -> f64 {
    if k < 32 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let x = k as f64;
        (x + 0.5) * x.ln() - x + LN_SQRT_2PI + stirling_correction(x)
    }
}

/// `ln k! - (k ln k - k + ln sqrt(2 pi k))`.
fn stirling_correction(x: f64) -> f64 {
    let x2 = x * x;
    (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x
}

/// Natural log of the `k`-th term of `S(c)`.
fn ln_series_term(c: f64, k: u64) -> f64 {
    let x = k as f64;
    if k < 32 {
        (x - 2.0) * x.ln() - ln_factorial(k) + x * (c.ln() - c) - c.ln()
    } else {
        // Expand ln k! so that the O(k ln k) parts cancel symbolically.
        x * ln_rho(c) - 2.5 * x.ln() - LN_SQRT_2PI - stirling_correction(x) - c.ln()
    }
}

/// `ln(c e^(1-c)) = ln c - (c - 1)`, accurate near `c = 1`.
fn ln_rho(c: f64) -> f64 {
    (c - 1.0).ln_1p() - (c - 1.0)
}

/// Partial sum of `S(c)` and a certified bound on the tail, stopping as soon as
/// the bound reaches `tolerance` or `max_terms` terms have been summed.
fn series_with_bound(c: f64, params: SeriesParams) -> (f64, f64, usize) {
    let lr = ln_rho(c);
    let one_minus_rho = -lr.exp_m1();
    let pseries_scale = 2.0 / 3.0 / c * (-LN_SQRT_2PI).exp();
    let mut sum = CompensatedSum::default();
    let mut bound = f64::INFINITY;
    let mut k = 0u64;
    while (k as usize) < params.max_terms {
        k += 1;
        let term = ln_series_term(c, k).exp();
        sum.add(term);
        let kf = k as f64;
        let pseries = pseries_scale * (kf * lr).exp() * kf.powf(-1.5);
        let geometric = if one_minus_rho > 0.0 {
            term * (1.0 - one_minus_rho) / one_minus_rho
        } else {
            f64::INFINITY
        };
        bound = pseries.min(geometric);
        if bound <= params.tolerance {
            break;
        }
    }
    (sum.value(), bound, k as usize)
}

fn certified_series(c: f64, params: SeriesParams) -> Result<TheoryValue> {
    let (value, bound, terms) = series_with_bound(c, params);
    if bound > params.tolerance {
        return Err(Error::Truncation {
            bound,
            tolerance: params.tolerance,
            terms,
        });
    }
    Ok(TheoryValue {
        value: value.clamp(0.0, 1.0),
        truncation_bound: bound,
    })
}

/// Limit of `delta(sigma_{cn/2}) / n` for mean-field transpositions.
///
/// Uses the exact linear branch `c/2` for `c <= 1` and `1 - S(c)` above.
pub fn u_of_c(c: f64, params: SeriesParams) -> Result<TheoryValue> {
    check_positive(c)?;
    if c <= 1.0 {
        return Ok(TheoryValue::exact(c / 2.0));
    }
    match certified_series(c, params) {
        Ok(s) => Ok(TheoryValue {
            value: (1.0 - s.value).clamp(0.0, 1.0),
            truncation_bound: s.truncation_bound,
        }),
        // Just above 1 the series needs millions of terms; integrate the slope.
        Err(Error::Truncation { .. }) => {
            let (value, err) = u_by_slope_integral(c);
            Ok(TheoryValue {
                value,
                truncation_bound: err,
            })
        }
        Err(e) => Err(e),
    }
}

/// `u(c) = c/2 - (1/2) int_1^c theta(s)^2 ds` for `c > 1`, by composite
/// Simpson; the error estimate is the Richardson difference of two step sizes
/// plus the bisection tolerance of `theta`.
fn u_by_slope_integral(c: f64) -> (f64, f64) {
    let theta_sq = |s: f64| {
        let th = theta_of_c(s, 1e-15).map(|v| v.value).unwrap_or(0.0);
        th * th
    };
    let simpson = |m: usize| {
        let h = (c - 1.0) / m as f64;
        let mut acc = CompensatedSum::default();
        for i in 0..=m {
            let w = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc.add(w * theta_sq(1.0 + i as f64 * h));
        }
        acc.value() * h / 3.0
    };
    let fine = simpson(2048);
    let coarse = simpson(1024);
    let err = 0.5 * ((fine - coarse).abs() / 15.0 + 2.0e-15 * (c - 1.0));
    ((c / 2.0 - 0.5 * fine).clamp(0.0, 1.0), err.max(f64::EPSILON))
}

/// Limiting number of components per vertex, `S(c)`, always summed from the
/// series (it does not use the linear branch of [`u_of_c`]).
pub fn component_fraction(c: f64, params: SeriesParams) -> Result<TheoryValue> {
    check_positive(c)?;
    certified_series(c, params)
}

/// Survival probability of a Poisson(c) Galton-Watson tree: the largest root
/// of `theta = 1 - exp(-c theta)` in `[0, 1]`.
pub fn theta_of_c(c: f64, tol: f64) -> Result<TheoryValue> {
    check_positive(c)?;
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if c <= 1.0 {
        return Ok(TheoryValue::exact(0.0));
    }
    let f = |th: f64| th - 1.0 + (-c * th).exp();
    // e^-x <= 1 - x + x^2/2 makes f negative on (0, 2(c-1)/c^2).
    let mut lo = (c - 1.0) / (c * c);
    let mut hi = 1.0;
    if f(lo) >= 0.0 {
        // c so close to 1 that f rounds to zero at the bracket; the root is
        // below double resolution of the bracket width.
        return Ok(TheoryValue {
            value: 2.0 * lo,
            truncation_bound: 2.0 * lo,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(TheoryValue {
        value: 0.5 * (lo + hi),
        truncation_bound: 0.5 * (hi - lo),
    })
}

/// `P(Z = k)` for the Borel-Tanner law of the total progeny of a Poisson(c)
/// Galton-Watson tree: `e^(-ck) (ck)^(k-1) / k!`.
pub fn borel_tanner_pmf(c: f64, k: u64) -> Result<f64> {
    check_positive(c)?;
    if k == 0 {
        return Err(Error::domain("Borel-Tanner support starts at k = 1"));
    }
    let kf = k as f64;
    let ln_p = -c * kf + (kf - 1.0) * (c * kf).ln() - ln_factorial(k);
    Ok(ln_p.exp())
}

/// Total mass `sum_k P(Z = k)` of the Borel-Tanner law: `1` for `c <= 1`,
/// the extinction probability `1 - theta(c)` above.
///
/// For `c != 1` the tail is certified as for [`u_of_c`] (consecutive ratios
/// increase towards `rho = c e^(1-c)`; `P(Z = k) <= rho^k k^(-3/2) / (c sqrt(2 pi))`).
/// At `c = 1` the tail decays like `k^(-1/2)` and is instead added from its
/// asymptotic expansion `sum_{k>K} k^(-3/2) (1 - 1/(12k) + 1/(288k^2)) / sqrt(2 pi)`
/// through Hurwitz zeta values; the reported bound is then the size of the
/// first omitted order, `K^(-7/2)`.
pub fn borel_tanner_mass(c: f64, params: SeriesParams) -> Result<TheoryValue> {
    check_positive(c)?;
    let lr = ln_rho(c);
    let one_minus_rho = -lr.exp_m1();
    let scale = 2.0 / c * (-LN_SQRT_2PI).exp();
    let critical = c == 1.0;
    let mut sum = CompensatedSum::default();
    let mut bound = f64::INFINITY;
    let mut k = 0u64;
    while (k as usize) < params.max_terms {
        k += 1;
        let p = borel_tanner_pmf(c, k)?;
        sum.add(p);
        let kf = k as f64;
        if critical {
            if k >= 1000 {
                let a = kf + 1.0;
                let tail = (hurwitz_zeta(1.5, a) - hurwitz_zeta(2.5, a) / 12.0
                    + hurwitz_zeta(3.5, a) / 288.0)
                    * (-LN_SQRT_2PI).exp();
                sum.add(tail);
                bound = kf.powf(-3.5);
                break;
            }
            continue;
        }
        let pseries = scale * (kf * lr).exp() * kf.powf(-0.5);
        let geometric = if one_minus_rho > 0.0 {
            p * (1.0 - one_minus_rho) / one_minus_rho
        } else {
            f64::INFINITY
        };
        bound = pseries.min(geometric);
        if bound <= params.tolerance {
            break;
        }
    }
    if bound > params.tolerance {
        return Err(Error::Truncation {
            bound,
            tolerance: params.tolerance,
            terms: k as usize,
        });
    }
    Ok(TheoryValue {
        value: sum.value(),
        truncation_bound: bound,
    })
}

/// Hurwitz zeta `sum_{j>=0} (a + j)^(-s)` for `s > 1` and large `a`, by
/// Euler-Maclaurin with three Bernoulli corrections.
fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    let lead = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    let b2 = s * a.powf(-s - 1.0) / 12.0;
    let b4 = s * (s + 1.0) * (s + 2.0) * a.powf(-s - 3.0) / 720.0;
    let b6 = s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * a.powf(-s - 5.0) / 30240.0;
    lead + b2 - b4 + b6
}

/// Solves `u(c) = r` for `c`, with `|u(c) - r| <= tol`.
///
/// `r <= 1/2` uses the linear branch `c = 2r`. Above, the root is bracketed in
/// `(1, c_max]` with `c_max` doubled up to [`INVERT_U_C_MAX`], then bisected.
pub fn invert_u(r: f64, tol: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::domain(format!(
            "observed distance fraction {r} outside the range of u, which is (0, 1)"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    if r <= 0.5 {
        return Ok(2.0 * r);
    }
    let params = SeriesParams {
        tolerance: (0.25 * tol).max(1e-14),
        ..SeriesParams::default()
    };
    // Interval enclosure of u(c) from the partial sum and its tail bound.
    let enclose = |c: f64| {
        let (s, bound, _) = series_with_bound(c, params);
        if bound <= params.tolerance {
            (1.0 - s - bound, 1.0 - s)
        } else {
            let (u, err) = u_by_slope_integral(c);
            (u - err, u + err)
        }
    };

    let mut lo = 1.0;
    let mut hi = 2.0;
    loop {
        let (u_lo, _) = enclose(hi);
        if u_lo >= r {
            break;
        }
        if hi >= INVERT_U_C_MAX {
            return Err(Error::Range(format!(
                "observed distance fraction {r} exceeds u({INVERT_U_C_MAX}); \
                 the inverse is not informative this close to 1"
            )));
        }
        lo = hi;
        hi = (2.0 * hi).min(INVERT_U_C_MAX);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (u_lo, u_hi) = enclose(mid);
        if u_hi < r - tol {
            lo = mid;
        } else if u_lo > r + tol {
            hi = mid;
        } else if u_lo >= r - tol && u_hi <= r + tol {
            return Ok(mid);
        } else if u_hi - u_lo > tol {
            let (_, bound, terms) = series_with_bound(mid, params);
            return Err(Error::Truncation {
                bound,
                tolerance: tol,
                terms,
            });
        } else if u_hi < r {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            return Ok(mid);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Derivative of `u`: `u'(c) = (1 - theta(c)^2) / 2`. An event lowers the
/// component count unless both endpoints already lie in the giant component,
/// which happens with probability `theta^2`.
pub fn u_slope(c: f64) -> Result<f64> {
    let th = theta_of_c(c, 1e-14)?.value;
    Ok(0.5 * (1.0 - th * th))
}
