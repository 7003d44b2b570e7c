//! Cross-module property tests: algebraic laws of the piecewise substrate
//! under random inputs, and structural facts of the wavelet family that
//! hold for every order.

use blw_core::bspline::bspline;
use blw_core::dyadic::DyadicRational;
use blw_core::euler_frobenius::{constants, EulerFrobeniusData, TFlag};
use blw_core::localisation::build_psi;
use blw_core::piecewise::PiecewisePolynomial;
use blw_core::wavelet::{psi_series, Sign, WaveletSpec};
use proptest::prelude::*;

fn arb_dyadic() -> impl Strategy<Value = DyadicRational> {
    (-64i64..=64, 0u32..=4).prop_map(|(num, scale)| DyadicRational::new(num, scale))
}

/// Random spline-like piecewise polynomial: a small combination of
/// translated/dilated B-splines.
fn arb_poly() -> impl Strategy<Value = PiecewisePolynomial> {
    (prop::collection::vec(
        (-2.0f64..2.0, 0usize..4, -4i64..4, 0i32..2),
        1..4,
    ),)
        .prop_map(|(parts,)| {
            let terms: Vec<(f64, PiecewisePolynomial)> = parts
                .into_iter()
                .map(|(w, n, shift, d)| {
                    (
                        w,
                        bspline(n).translate_dilate(DyadicRational::integer(shift), d),
                    )
                })
                .collect();
            let refs: Vec<(f64, &PiecewisePolynomial)> =
                terms.iter().map(|(w, p)| (*w, p)).collect();
            PiecewisePolynomial::linear_combine(&refs)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combine_is_pointwise_linear(
        f in arb_poly(),
        g in arb_poly(),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        xs in prop::collection::vec(-6.0f64..10.0, 16),
    ) {
        let combo = PiecewisePolynomial::linear_combine(&[(a, &f), (b, &g)]);
        for x in xs {
            let direct = a * f.evaluate(x) + b * g.evaluate(x);
            let scale = 1.0f64.max(direct.abs());
            prop_assert!((combo.evaluate(x) - direct).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn translate_composition_law(
        f in arb_poly(),
        s in arb_dyadic(),
        t in arb_dyadic(),
    ) {
        let two = f.translate_dilate(s, 0).translate_dilate(t, 0);
        let one = f.translate_dilate(s + t, 0);
        prop_assert_eq!(two.knots(), one.knots());
        prop_assert_eq!(PiecewisePolynomial::sup_distance(&two, &one, 4), 0.0);
    }

    #[test]
    fn inner_product_symmetry_and_bilinearity(
        f in arb_poly(),
        g in arb_poly(),
        h in arb_poly(),
        a in -2.0f64..2.0,
    ) {
        let fg = f.inner_product(&g);
        prop_assert!((fg - g.inner_product(&f)).abs() <= 1e-13 * (1.0 + fg.abs()));
        let combo = PiecewisePolynomial::linear_combine(&[(a, &f), (1.0, &h)]);
        let lhs = combo.inner_product(&g);
        let rhs = a * fg + h.inner_product(&g);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn derivative_integrates_to_zero(n in 1usize..6, shift in -3i64..3) {
        // compactly supported continuous function: total derivative mass is
        // the boundary difference, which vanishes
        let f = bspline(n).translate_dilate(DyadicRational::integer(shift), 0);
        prop_assert!(f.differentiate().moment(0).abs() <= 1e-12);
    }
}

#[test]
fn psi_inner_vectors_alternate_and_cancel() {
    // for every order and t-choice the finite wavelet vector alternates in
    // sign and sums to zero (the alternating binomial sum vanishes)
    for n in 1..=4usize {
        let data = EulerFrobeniusData::compute(n).unwrap();
        for mask in 0..(1u32 << n) {
            let tchoice: Vec<TFlag> = (0..n)
                .map(|j| {
                    if mask & (1 << j) == 0 {
                        TFlag::UseR
                    } else {
                        TFlag::UseInvR
                    }
                })
                .collect();
            let spec = WaveletSpec::new(n, Sign::Plus, tchoice.clone()).unwrap();
            // tight truncation keeps only the inner vector rows visible at
            // the extreme keys; instead reconstruct the vector from the
            // coefficient's generating polynomial through the series API
            let s = psi_series(&spec, 1e-6).unwrap();
            assert!(!s.is_empty());
            let consts = constants(&data, &tchoice).unwrap();
            assert!(consts.gamma < 0.0);
            // the weights of any wavelet sum to zero: zeroth moment is 0
            let total: f64 = s.terms().values().sum();
            assert!(
                total.abs() <= 1e-9 * s.max_abs_weight(),
                "n={n} mask={mask}: {total}"
            );
        }
    }
}

#[test]
fn localised_sum_has_vanishing_moments() {
    // the closed form of the localised wavelet sum integrates x^m to zero
    // for m = 0..n
    for n in 1..=3usize {
        let built = build_psi(n, Sign::Plus, 1e-10).unwrap();
        for m in 0..=n {
            let v = built.closed_form.moment(m);
            assert!(v.abs() <= 1e-10, "n={n}, m={m}: {v}");
        }
    }
}

#[test]
fn beta_consistency_across_orders() {
    for n in 1..=5usize {
        let data = EulerFrobeniusData::compute(n).unwrap();
        let prod: f64 = data.rs.iter().map(|r| 1.0 + r).product();
        assert!((data.beta - prod).abs() <= 1e-10);
        assert!(data.delta > 0.0);
    }
}
