//! Adaptive Dormand–Prince 5(4) integration with step clamping to
//! caller-supplied sample points.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeOutcome<R> {
    Completed,
    /// A component exceeded the guard value; `t` is where it happened.
    GuardTripped { t: R },
}

/// Integrates `y' = rhs(t, y)` from `t0` through every point of `stops`
/// (strictly increasing, first > t0), invoking `on_sample` at each stop.
///
/// `guard` aborts the run once any solution component exceeds it.
pub fn dopri5<R: Real, const D: usize>(
    rhs: &dyn Fn(R, &[R; D]) -> [R; D],
    t0: R,
    y0: [R; D],
    stops: &[R],
    rtol: R,
    atol: R,
    guard: Option<R>,
    on_sample: &mut dyn FnMut(R, &[R; D]),
) -> Result<OdeOutcome<R>> {
    // Butcher tableau, Dormand–Prince 5(4).
    let a21 = R::of(1.0 / 5.0);
    let a31 = R::of(3.0 / 40.0);
    let a32 = R::of(9.0 / 40.0);
    let a41 = R::of(44.0 / 45.0);
    let a42 = R::of(-56.0 / 15.0);
    let a43 = R::of(32.0 / 9.0);
    let a51 = R::of(19372.0 / 6561.0);
    let a52 = R::of(-25360.0 / 2187.0);
    let a53 = R::of(64448.0 / 6561.0);
    let a54 = R::of(-212.0 / 729.0);
    let a61 = R::of(9017.0 / 3168.0);
    let a62 = R::of(-355.0 / 33.0);
    let a63 = R::of(46732.0 / 5247.0);
    let a64 = R::of(49.0 / 176.0);
    let a65 = R::of(-5103.0 / 18656.0);
    let b1 = R::of(35.0 / 384.0);
    let b3 = R::of(500.0 / 1113.0);
    let b4 = R::of(125.0 / 192.0);
    let b5 = R::of(-2187.0 / 6784.0);
    let b6 = R::of(11.0 / 84.0);
    // Error weights (5th order minus embedded 4th order).
    let e1 = R::of(71.0 / 57600.0);
    let e3 = R::of(-71.0 / 16695.0);
    let e4 = R::of(71.0 / 1920.0);
    let e5 = R::of(-17253.0 / 339200.0);
    let e6 = R::of(22.0 / 525.0);
    let e7 = R::of(-1.0 / 40.0);

    let c2 = R::of(0.2);
    let c3 = R::of(0.3);
    let c4 = R::of(0.8);
    let c5 = R::of(8.0 / 9.0);

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);

    let span = match stops.last() {
        Some(&end) => end - t0,
        None => return Ok(OdeOutcome::Completed),
    };
    let mut h = (span * R::of(1e-4)).max(R::of(1e-12));

    let axpy = |y: &[R; D], h: R, coeffs: &[(R, &[R; D])]| -> [R; D] {
        let mut out = *y;
        for i in 0..D {
            let mut acc = R::zero();
            for (c, k) in coeffs {
                acc += *c * k[i];
            }
            out[i] = y[i] + h * acc;
        }
        out
    };

    for &stop in stops {
        while t < stop {
            let mut step = h.min(stop - t);
            loop {
                let y2 = axpy(&y, step, &[(a21, &k1)]);
                let k2 = rhs(t + c2 * step, &y2);
                let y3 = axpy(&y, step, &[(a31, &k1), (a32, &k2)]);
                let k3 = rhs(t + c3 * step, &y3);
                let y4 = axpy(&y, step, &[(a41, &k1), (a42, &k2), (a43, &k3)]);
                let k4 = rhs(t + c4 * step, &y4);
                let y5 = axpy(&y, step, &[(a51, &k1), (a52, &k2), (a53, &k3), (a54, &k4)]);
                let k5 = rhs(t + c5 * step, &y5);
                let y6 = axpy(&y, step, &[(a61, &k1), (a62, &k2), (a63, &k3), (a64, &k4), (a65, &k5)]);
                let k6 = rhs(t + step, &y6);
                let ynew = axpy(&y, step, &[(b1, &k1), (b3, &k3), (b4, &k4), (b5, &k5), (b6, &k6)]);
                let k7 = rhs(t + step, &ynew);

                let mut err = R::zero();
                let mut finite = true;
                for i in 0..D {
                    let ei = step
                        * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
                    let scale = atol + rtol * y[i].abs().max(ynew[i].abs());
                    let r = ei / scale;
                    err += r * r;
                    finite &= ynew[i].is_finite();
                }
                err = (err / R::of(D as f64)).sqrt();

                if finite && err <= R::one() {
                    t += step;
                    y = ynew;
                    k1 = k7;
                    let grow = R::of(0.9) * err.max(R::of(1e-10)).powf(R::of(-0.2));
                    h = step * grow.min(R::of(5.0)).max(R::of(0.2));
                    if let Some(cap) = guard {
                        if y.iter().any(|v| v.abs() > cap) {
                            return Ok(OdeOutcome::GuardTripped { t });
                        }
                    }
                    break;
                }
                let shrink = if finite {
                    (R::of(0.9) * err.powf(R::of(-0.2))).max(R::of(0.1))
                } else {
                    R::of(0.25)
                };
                step *= shrink;
                if step <= R::of(16.0) * R::epsilon() * t.abs().max(R::one()) {
                    return Err(Error::StepCollapse { at: t.f64() });
                }
            }
        }
        on_sample(t, &y);
    }
    Ok(OdeOutcome::Completed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let stops = [1.0f64];
        let mut got = 0.0;
        dopri5(&rhs, 0.0, [1.0], &stops, 1e-10, 1e-12, None, &mut |_, y| got = y[0]).unwrap();
        assert!((got - (-1.0f64).exp()).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn two_dimensional_circle() {
        let rhs = |_t: f64, y: &[f64; 2]| [-y[1], y[0]];
        let stops = [std::f64::consts::PI];
        let mut got = [0.0; 2];
        dopri5(&rhs, 0.0, [1.0, 0.0], &stops, 1e-11, 1e-13, None, &mut |_, y| got = *y).unwrap();
        assert!((got[0] + 1.0).abs() < 1e-8 && got[1].abs() < 1e-8, "got {got:?}");
    }

    #[test]
    fn guard_trips() {
        let rhs = |_t: f64, y: &[f64; 1]| [y[0] * y[0]];
        let stops = [2.0f64];
        let out = dopri5(&rhs, 0.0, [1.0], &stops, 1e-8, 1e-10, Some(1e6), &mut |_, _| {});
        match out {
            Ok(OdeOutcome::GuardTripped { t }) => assert!(t < 1.01, "tripped at {t}"),
            other => panic!("expected guard trip, got {other:?}"),
        }
    }
}
