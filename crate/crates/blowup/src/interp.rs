//! Shape-preserving piecewise-cubic interpolation (Fritsch–Carlson) with a
//! power-law continuation beyond the last sample.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Monotone (shape-preserving) cubic interpolant. On monotone data the
/// interpolant is monotone; on general data it does not overshoot local
/// extrema, so nonnegative samples stay nonnegative.
#[derive(Debug, Clone)]
pub struct MonotoneCubic<R> {
    xs: Vec<R>,
    ys: Vec<R>,
    ds: Vec<R>,
    /// Log-log slope of the last segment, for power-law continuation.
    tail_exponent: R,
}

impl<R: Real> MonotoneCubic<R> {
    pub fn new(xs: Vec<R>, ys: Vec<R>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::Precondition("interpolation needs at least two samples".into()));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Precondition(format!(
                    "abscissae must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Precondition("samples must be finite".into()));
        }
        let n = xs.len();
        let h: Vec<R> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let slope: Vec<R> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![R::zero(); n];
        for i in 1..n - 1 {
            let (s0, s1) = (slope[i - 1], slope[i]);
            if s0 * s1 <= R::zero() {
                ds[i] = R::zero();
            } else {
                let w1 = R::of(2.0) * h[i] + h[i - 1];
                let w2 = h[i] + R::of(2.0) * h[i - 1];
                ds[i] = (w1 + w2) / (w1 / s0 + w2 / s1);
            }
        }
        ds[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), slope[0], slope.get(1).copied().unwrap_or(slope[0]));
        ds[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            slope[n - 2],
            if n >= 3 { slope[n - 3] } else { slope[n - 2] },
        );
        let tail_exponent = {
            let (x0, x1) = (xs[n - 2], xs[n - 1]);
            let (y0, y1) = (ys[n - 2], ys[n - 1]);
            if y0 > R::zero() && y1 > R::zero() && x0 > R::zero() {
                (y1 / y0).ln() / (x1 / x0).ln()
            } else {
                R::zero()
            }
        };
        Ok(MonotoneCubic { xs, ys, ds, tail_exponent })
    }

    pub fn x_min(&self) -> R {
        self.xs[0]
    }

    pub fn x_max(&self) -> R {
        *self.xs.last().unwrap()
    }

    pub fn values(&self) -> &[R] {
        &self.ys
    }

    /// Interpolated value; beyond the last sample the curve continues as
    /// the power law fitted to the final segment (constant if the data
    /// there is not positive), and before the first sample as a clamp.
    pub fn eval(&self, x: R) -> R {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x > self.xs[n - 1] {
            let yl = self.ys[n - 1];
            if yl > R::zero() && self.xs[n - 1] > R::zero() {
                return yl * (x / self.xs[n - 1]).powf(self.tail_exponent);
            }
            return yl;
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let h = self.xs[lo + 1] - self.xs[lo];
        let s = (x - self.xs[lo]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = R::of(2.0) * s3 - R::of(3.0) * s2 + R::one();
        let h10 = s3 - R::of(2.0) * s2 + s;
        let h01 = -R::of(2.0) * s3 + R::of(3.0) * s2;
        let h11 = s3 - s2;
        h00 * self.ys[lo] + h10 * h * self.ds[lo] + h01 * self.ys[lo + 1] + h11 * h * self.ds[lo + 1]
    }

    /// True when the sample values are nondecreasing.
    pub fn data_nondecreasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[1] >= w[0])
    }
}

fn edge_slope<R: Real>(h0: R, h1: R, s0: R, s1: R) -> R {
    let d = ((R::of(2.0) * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= R::zero() {
        R::zero()
    } else if s0 * s1 <= R::zero() && d.abs() > R::of(3.0) * s0.abs() {
        R::of(3.0) * s0
    } else {
        d
    }
}
