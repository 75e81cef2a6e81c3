//! Safeguarded bisection-Newton root finding on a bracketed interval.

use crate::{Error, Result};

/// Find the root of a strictly monotone `f` in `(lo, hi)` where
/// `f(lo) > 0 > f(hi)`. `df` is the derivative. Newton steps are taken when
/// they stay inside the current bracket and shrink it; otherwise bisect.
/// Converges to `|f| <= tol` or until the bracket collapses to machine width.
pub fn bisect_newton<F, G>(mut lo: f64, mut hi: f64, f: F, df: G, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    debug_assert!(lo < hi);
    let mut x = 0.5 * (lo + hi);
    let mut best = x;
    let mut best_f = f64::INFINITY;
    for _ in 0..200 {
        let fx = f(x);
        if fx.abs() < best_f {
            best_f = fx.abs();
            best = x;
        }
        if fx.abs() <= tol {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d.is_finite() && d != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // the bracket has collapsed to adjacent floats: `best` is as good as
        // f64 allows, even if rounding noise in f keeps |f| above tol
        if next <= lo || next >= hi || next == x {
            break;
        }
        x = next;
    }
    if best_f <= tol * 100.0 {
        Ok(best)
    } else {
        Err(Error::SecularConvergence {
            residual: best_f,
            lo,
            hi,
        })
    }
}

/// Establish a sign-changing bracket inside `(left, right)` by starting at
/// offsets from the endpoints and halving the offsets up to `retries` times.
/// `f` must be positive near `left` and negative near `right`.
pub fn bracket_from_poles<F>(
    left: f64,
    right: f64,
    mut off_lo: f64,
    mut off_hi: f64,
    retries: usize,
    f: F,
) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    for _ in 0..=retries {
        let lo = left + off_lo;
        let hi = right - off_hi;
        if lo < hi {
            let flo = f(lo);
            let fhi = f(hi);
            if flo > 0.0 && fhi < 0.0 {
                return Ok((lo, hi));
            }
            if flo <= 0.0 {
                off_lo *= 0.5;
            }
            if fhi >= 0.0 {
                off_hi *= 0.5;
            }
        } else {
            off_lo *= 0.5;
            off_hi *= 0.5;
        }
    }
    let lo = left + off_lo;
    let hi = right - off_hi;
    Err(Error::BracketFailure {
        lo,
        hi,
        flo: f(lo),
        fhi: f(hi),
        retries,
    })
}
