//! Randomized invariants over the public API.

use proptest::prelude::*;

use blowup::conditions::{check_keller_osserman, Verdict};
use blowup::interp::MonotoneCubic;
use blowup::model::Nonlinearity;
use blowup::{DualTransform, ProblemParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Round-trip, oddness, contraction and derivative range of the
    /// transform across the admissible parameter range.
    #[test]
    fn transform_structure(
        p in 1.2f64..3.5,
        gamma in 0.55f64..2.5,
        t in 1e-3f64..1e4,
        factor in 1.1f64..10.0,
    ) {
        let params = ProblemParams::new(p, gamma, 3).unwrap();
        let dual = DualTransform::new(params);
        let tol = 1e-10 * t;
        let y = dual.f_eval(t, tol).unwrap();
        let back = dual.f_inverse(y, tol).unwrap();
        prop_assert!((back - t).abs() <= 10.0 * tol.max(4.0 * f64::EPSILON * t));
        let y_neg = dual.f_eval(-t, tol).unwrap();
        prop_assert!((y + y_neg).abs() <= 1e-12 * y.abs().max(1e-300));
        prop_assert!(y > 0.0 && y <= t);
        let d = dual.f_prime_from_value(y);
        prop_assert!(d > 0.0 && d <= 1.0);
        // Strict monotonicity.
        let t2 = t * factor;
        let y2 = dual.f_eval(t2, 1e-10 * t2).unwrap();
        prop_assert!(y2 > y);
    }

    /// `𝒢⁻¹ ∘ 𝒢 = id` for power nonlinearities below the critical
    /// exponent.
    #[test]
    fn cal_g_roundtrip(
        p in 2.0f64..4.0,
        q_frac in 0.05f64..0.9,
        lam in 0.1f64..10.0,
        t in 1e-2f64..1e3,
    ) {
        let params = ProblemParams::new(p, 0.8, 3).unwrap();
        let q = q_frac * (p - 1.0);
        let g = Nonlinearity::power(lam, q).unwrap();
        let y = g.cal_g(&params, t).unwrap();
        let back = g.cal_g_inverse(&params, y, 1e-12).unwrap();
        prop_assert!((back - t).abs() <= 1e-8 * t, "t = {t}, back = {back}");
    }

    /// The Keller–Osserman verdict for `λ s^q` depends only on `(q, p)`;
    /// rescaling `λ` must never change it.
    #[test]
    fn keller_osserman_scale_invariance(
        lam in 1e-3f64..1e3,
        q in 0.1f64..2.5,
    ) {
        let params = ProblemParams::new(2.0, 1.0, 3).unwrap();
        let reference = check_keller_osserman(&Nonlinearity::power(1.0, q).unwrap(), &params)
            .unwrap()
            .verdict;
        let scaled = check_keller_osserman(&Nonlinearity::power(lam, q).unwrap(), &params)
            .unwrap()
            .verdict;
        prop_assert_eq!(reference, scaled);
    }

    /// Shape preservation: the interpolant of nondecreasing samples is
    /// nondecreasing between samples as well.
    #[test]
    fn pchip_preserves_monotone_data(steps in prop::collection::vec(0.0f64..1.0, 4..16)) {
        let mut ys = vec![0.0f64];
        for s in &steps {
            ys.push(ys.last().unwrap() + s);
        }
        let xs: Vec<f64> = (0..ys.len()).map(|i| i as f64).collect();
        let x_hi = *xs.last().unwrap();
        let c = MonotoneCubic::new(xs, ys).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=400 {
            let x = x_hi * k as f64 / 400.0;
            let v = c.eval(x);
            prop_assert!(v >= prev - 1e-12, "dip at x = {x}");
            prev = v;
        }
    }

    /// The growth verdict never flips with a positive scale factor either.
    #[test]
    fn partial_integrals_nondecreasing(e in -2.5f64..0.5) {
        let f = move |t: f64| t.powf(e);
        let v = blowup::conditions::classify_improper_integral(
            &f,
            blowup::conditions::ProbeSchedule::default(),
            blowup::conditions::ExpectedTail::Unknown,
        )
        .unwrap();
        for w in v.probe_values.windows(2) {
            prop_assert!(w[1].1 >= w[0].1 - 1e-12);
        }
        // Pure powers must never be misclassified to the wrong side.
        if e > -0.95 {
            prop_assert_eq!(v.verdict, Verdict::Holds);
        }
        if e < -1.05 {
            prop_assert_eq!(v.verdict, Verdict::Fails);
        }
    }
}

/// The numeric core is generic over the scalar; a coarse f32 instantiation
/// must reproduce the f64 values at its own precision.
#[test]
fn f32_instantiation_smoke() {
    let p64 = ProblemParams::new(2.0f64, 1.0, 3).unwrap();
    let d64 = DualTransform::new(p64);
    let p32 = ProblemParams::new(2.0f32, 1.0, 3).unwrap();
    let d32 = DualTransform::with_accuracy(p32, 1e-5);
    for &t in &[0.5f64, 1.0, 3.0, 10.0] {
        let y64 = d64.f_eval(t, 1e-10).unwrap();
        let y32 = d32.f_eval(t as f32, 1e-5).unwrap();
        assert!(
            (y64 - y32 as f64).abs() < 5e-4 * y64,
            "t = {t}: f32 {y32}, f64 {y64}"
        );
    }
    assert!((d32.asymptotic_a() as f64 - d64.asymptotic_a()).abs() < 1e-6);
}
