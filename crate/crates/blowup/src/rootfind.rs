//! Bracketed scalar root-finding: Newton steps safeguarded by bisection.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Finds `y` in `[lo, hi]` with `|f(y) - target| <= tol_f`, for `f`
/// monotone nondecreasing on the bracket. `df` is the derivative of `f`.
///
/// The bracket must satisfy `f(lo) <= target <= f(hi)`. If `tol_f` is
/// unreachable the search stops once the bracket narrows to a few ulps
/// and returns the midpoint; the achieved residual is returned alongside.
pub fn newton_bracketed<R: Real>(
    f: &mut dyn FnMut(R) -> Result<R>,
    df: &mut dyn FnMut(R) -> R,
    target: R,
    mut lo: R,
    mut hi: R,
    tol_f: R,
    max_iter: usize,
    seed: Option<R>,
) -> Result<(R, R)> {
    if lo > hi {
        core::mem::swap(&mut lo, &mut hi);
    }
    let mut y = match seed {
        Some(s) if s > lo && s < hi => s,
        _ => (lo + hi) * R::of(0.5),
    };
    let mut res = f(y)? - target;
    for _ in 0..max_iter {
        if res.abs() <= tol_f {
            return Ok((y, res));
        }
        if res > R::zero() {
            hi = y;
        } else {
            lo = y;
        }
        let width = hi - lo;
        if width <= (R::of(4.0) * R::epsilon() * hi.abs()).max(R::of(f64::MIN_POSITIVE)) {
            return Ok((y, res));
        }
        let d = df(y);
        let mut next = y - res / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = (lo + hi) * R::of(0.5);
        }
        y = next;
        res = f(y)? - target;
    }
    Err(Error::RootFind(format!(
        "no convergence after {max_iter} iterations; residual {res}, bracket [{lo}, {hi}]"
    )))
}

/// Plain bisection for a monotone nondecreasing `f` without derivative.
pub fn bisect<R: Real>(
    f: &mut dyn FnMut(R) -> Result<R>,
    target: R,
    mut lo: R,
    mut hi: R,
    tol_f: R,
    max_iter: usize,
) -> Result<(R, R)> {
    let mut y = (lo + hi) * R::of(0.5);
    let mut res = f(y)? - target;
    for _ in 0..max_iter {
        if res.abs() <= tol_f
            || (hi - lo) <= (R::of(4.0) * R::epsilon() * hi.abs()).max(R::of(f64::MIN_POSITIVE))
        {
            return Ok((y, res));
        }
        if res > R::zero() {
            hi = y;
        } else {
            lo = y;
        }
        y = (lo + hi) * R::of(0.5);
        res = f(y)? - target;
    }
    Ok((y, res))
}
