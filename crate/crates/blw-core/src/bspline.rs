//! Cardinal B-splines `B_n` and their structural identities.
//!
//! `B_0` is the indicator of `[0, 1)`; `B_n` is built by the pointwise
//! recursion `B_n(x) = (x/n) B_{n-1}(x) + ((n+1-x)/n) B_{n-1}(x-1)`,
//! applied coefficient-wise per piece. The convolution definition is kept
//! only as an independent test oracle.

use crate::dyadic::DyadicRational;
use crate::piecewise::PiecewisePolynomial;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

/// Default cap on the spline order; `B_{2n+1}` at `n = 5` needs 11.
pub const MAX_ORDER: usize = 11;

/// A validated B-spline order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BSplineOrder(usize);

impl BSplineOrder {
    pub fn new(n: usize) -> Result<Self> {
        Self::with_max(n, MAX_ORDER)
    }

    pub fn with_max(n: usize, max: usize) -> Result<Self> {
        if n > max {
            Err(Error::OrderTooLarge(n, max))
        } else {
            Ok(BSplineOrder(n))
        }
    }

    pub fn get(&self) -> usize {
        self.0
    }
}

fn cache() -> &'static Mutex<HashMap<usize, PiecewisePolynomial>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, PiecewisePolynomial>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The degree-`n` cardinal B-spline on knots `{0, 1, ..., n+1}`.
pub fn bspline(n: usize) -> PiecewisePolynomial {
    if let Some(b) = cache().lock().unwrap().get(&n) {
        return b.clone();
    }
    let b = build(n);
    cache().lock().unwrap().insert(n, b.clone());
    b
}

fn build(n: usize) -> PiecewisePolynomial {
    if n == 0 {
        return PiecewisePolynomial::indicator(
            DyadicRational::integer(0),
            DyadicRational::integer(1),
        );
    }
    let prev = bspline(n - 1);
    let prev_pieces = prev.pieces();
    let mut pieces: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        // On [m, m+1), in the local variable u = x - m:
        //   (x/n) B_{n-1} piece m  +  ((n+1-x)/n) B_{n-1} piece m-1,
        // both already expressed in the same local variable.
        let mut acc = vec![0.0; n + 1];
        if m < prev_pieces.len() {
            mul_linear_into(
                &prev_pieces[m],
                m as f64 / n as f64,
                1.0 / n as f64,
                &mut acc,
            );
        }
        if m >= 1 && m - 1 < prev_pieces.len() {
            mul_linear_into(
                &prev_pieces[m - 1],
                (n + 1 - m) as f64 / n as f64,
                -1.0 / n as f64,
                &mut acc,
            );
        }
        pieces.push(acc);
    }
    let knots = (0..=(n as i64 + 1)).map(DyadicRational::integer).collect();
    PiecewisePolynomial::new(knots, pieces).expect("B-spline recursion produced valid pieces")
}

/// acc += (a + b u) * p(u)
fn mul_linear_into(p: &[f64], a: f64, b: f64, acc: &mut Vec<f64>) {
    if acc.len() < p.len() + 1 {
        acc.resize(p.len() + 1, 0.0);
    }
    for (j, &c) in p.iter().enumerate() {
        acc[j] += a * c;
        acc[j + 1] += b * c;
    }
}

/// Two-scale coefficients: `B_n(x) = sum_k 2^{-n} binom(n+1, k) B_n(2x - k)`.
pub fn two_scale_expand(n: usize) -> Vec<(i64, f64)> {
    let scale = (-(n as f64)).exp2();
    (0..=(n as i64 + 1))
        .map(|k| (k, scale * binomial(n + 1, k as usize)))
        .collect()
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..k.min(n - k) {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Per-property report for the classical B-spline facts: support and
/// positivity, smoothness `C^{n-1}` at the knots, symmetry about `(n+1)/2`.
#[derive(Clone, Debug)]
pub struct BsplinePropertyReport {
    pub n: usize,
    pub support_ok: bool,
    pub positivity_ok: bool,
    pub smoothness_ok: bool,
    pub symmetry_ok: bool,
    pub max_knot_jump: f64,
    pub max_symmetry_err: f64,
}

impl BsplinePropertyReport {
    pub fn all_pass(&self) -> bool {
        self.support_ok && self.positivity_ok && self.smoothness_ok && self.symmetry_ok
    }
}

pub fn verify_bspline_properties(n: usize) -> BsplinePropertyReport {
    assert!(n >= 1);
    let b = bspline(n);
    let support_ok = b.support()
        == Some((
            DyadicRational::integer(0),
            DyadicRational::integer(n as i64 + 1),
        ));
    let positivity_ok = (0..=n as i64).all(|m| b.evaluate(m as f64 + 0.5) > 0.0);

    // continuity of derivatives 0..n-1 at every interior knot, via exact
    // one-sided limits of the piece polynomials
    let mut max_knot_jump = 0.0f64;
    let mut d = b.clone();
    for _ in 0..n {
        let knots = d.knots();
        let pieces = d.pieces();
        for j in 1..pieces.len() {
            let width = knots[j].diff_value(&knots[j - 1]);
            let left: f64 = pieces[j - 1]
                .iter()
                .rev()
                .fold(0.0, |acc, &c| acc * width + c);
            let right = pieces[j][0];
            max_knot_jump = max_knot_jump.max((left - right).abs());
        }
        d = d.differentiate();
    }
    let smoothness_ok = max_knot_jump <= 1e-10;

    let c = (n as f64 + 1.0) / 2.0;
    let mut max_symmetry_err = 0.0f64;
    for i in 0..100 {
        let x = c * (i as f64 + 0.5) / 100.0;
        max_symmetry_err = max_symmetry_err.max((b.evaluate(c - x) - b.evaluate(c + x)).abs());
    }
    let symmetry_ok = max_symmetry_err <= 1e-12;

    BsplinePropertyReport {
        n,
        support_ok,
        positivity_ok,
        smoothness_ok,
        symmetry_ok,
        max_knot_jump,
        max_symmetry_err,
    }
}

/// Checks `B_n' = B_{n-1} - B_{n-1}(. - 1)` away from knots.
pub fn derivative_identity_check(n: usize) -> bool {
    assert!(n >= 1);
    let lhs = bspline(n).differentiate();
    let prev = bspline(n - 1);
    let shifted = prev.translate_dilate(DyadicRational::integer(1), 0);
    let rhs = PiecewisePolynomial::linear_combine(&[(1.0, &prev), (-1.0, &shifted)]);
    PiecewisePolynomial::sup_distance(&lhs, &rhs, 8) <= 1e-12
}

/// The `(n+1)`-th derivative of `B_{2n+1}`, plus its dilated/shifted
/// variant.
#[derive(Clone, Debug)]
pub struct HighOrderDerivative {
    /// `B_{2n+1}^{(n+1)}`, by n+1 applications of [`PiecewisePolynomial::differentiate`].
    pub plain: PiecewisePolynomial,
    /// `x -> (d/dx)^{n+1} [B_{2n+1}(2x + n)] = 2^{n+1} B_{2n+1}^{(n+1)}(2x + n)`,
    /// the form the localisation identities are stated in.
    pub dilated: PiecewisePolynomial,
}

pub fn high_order_derivative(n: usize) -> HighOrderDerivative {
    let mut d = bspline(2 * n + 1);
    for _ in 0..=n {
        d = d.differentiate();
    }
    let composed = d.translate_dilate(DyadicRational::integer(-(n as i64)), 1);
    let dilated = PiecewisePolynomial::linear_combine(&[(((n + 1) as f64).exp2(), &composed)]);
    HighOrderDerivative { plain: d, dilated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn b0_is_indicator() {
        let b = bspline(0);
        assert_eq!(b.evaluate(0.0), 1.0);
        assert_eq!(b.evaluate(0.999), 1.0);
        assert_eq!(b.evaluate(1.0), 0.0);
    }

    #[test]
    fn b1_is_hat() {
        let b = bspline(1);
        assert_abs_diff_eq!(b.evaluate(0.5), 0.5);
        assert_abs_diff_eq!(b.evaluate(1.5), 0.5);
        assert_abs_diff_eq!(b.evaluate(1.0), 1.0);
    }

    #[test]
    fn b2_pieces_match_closed_form() {
        // x^2/2 ; -x^2+3x-3/2 ; x^2/2-3x+9/2 in global coordinates
        let b = bspline(2);
        let globals: [fn(f64) -> f64; 3] = [
            |x| 0.5 * x * x,
            |x| -x * x + 3.0 * x - 1.5,
            |x| 0.5 * x * x - 3.0 * x + 4.5,
        ];
        for (m, g) in globals.iter().enumerate() {
            for i in 0..10 {
                let x = m as f64 + (i as f64 + 0.5) / 10.0;
                assert_abs_diff_eq!(b.evaluate(x), g(x), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn unit_mass_all_orders() {
        for n in 0..=9 {
            assert_abs_diff_eq!(bspline(n).moment(0), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn properties_pass() {
        for n in [1, 2, 5] {
            let report = verify_bspline_properties(n);
            assert!(report.all_pass(), "n={n}: {report:?}");
        }
    }

    #[test]
    fn recursion_matches_convolution_oracle() {
        // B_n(x) = ∫_{x-1}^x B_{n-1}(s) ds, evaluated by piecewise quadrature
        for n in [1usize, 3, 5] {
            let b = bspline(n);
            let prev = bspline(n - 1);
            for i in 0..64 {
                let x = (n as f64 + 1.0) * (i as f64 + 0.31) / 64.0;
                let xd = DyadicRational::new((x * 4096.0).round() as i64, 12);
                let xv = xd.value();
                let lo = xd - DyadicRational::integer(1);
                let oracle = prev.integral_over(lo, xd);
                assert_abs_diff_eq!(b.evaluate(xv), oracle, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn two_scale_weights() {
        assert_eq!(two_scale_expand(0), vec![(0, 1.0), (1, 1.0)]);
        let w1 = two_scale_expand(1);
        assert_eq!(w1.len(), 3);
        assert_abs_diff_eq!(w1[0].1, 0.5);
        assert_abs_diff_eq!(w1[1].1, 1.0);
        assert_abs_diff_eq!(w1[2].1, 0.5);
        let w2 = two_scale_expand(2);
        let expected = [0.25, 0.75, 0.75, 0.25];
        for (k, (shift, w)) in w2.iter().enumerate() {
            assert_eq!(*shift, k as i64);
            assert_abs_diff_eq!(*w, expected[k]);
        }
    }

    #[test]
    fn two_scale_reproduces_bspline() {
        for n in 0..=6 {
            let b = bspline(n);
            let parts: Vec<PiecewisePolynomial> = two_scale_expand(n)
                .iter()
                .map(|&(k, _)| b.translate_dilate(DyadicRational::integer(k), 1))
                .collect();
            let terms: Vec<(f64, &PiecewisePolynomial)> = two_scale_expand(n)
                .iter()
                .zip(parts.iter())
                .map(|(&(_, w), p)| (w, p))
                .collect();
            let combo = PiecewisePolynomial::linear_combine(&terms);
            assert!(PiecewisePolynomial::sup_distance(&combo, &b, 8) <= 1e-13);
        }
    }

    #[test]
    fn derivative_identity() {
        for n in [1, 2, 6] {
            assert!(derivative_identity_check(n), "n={n}");
        }
    }

    #[test]
    fn positivity_random_points() {
        for n in 1..=6 {
            let b = bspline(n);
            let mut state = 0x9e3779b97f4a7c15u64;
            for _ in 0..500 {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                let u = (state >> 11) as f64 / (1u64 << 53) as f64;
                let x = u * (n as f64 + 1.0);
                assert!(b.evaluate(x) > 0.0, "B_{n}({x}) not positive");
            }
        }
    }

    #[test]
    fn third_spline_second_derivative_is_piecewise_linear() {
        // two applications of the differentiation identity by hand:
        // B_3'' = B_1 - 2 B_1(.-1) + B_1(.-2), supported on [0, 4]
        let mut d = bspline(3);
        d = d.differentiate().differentiate();
        let b1 = bspline(1);
        let rhs = PiecewisePolynomial::linear_combine(&[
            (1.0, &b1),
            (-2.0, &b1.translate_dilate(DyadicRational::integer(1), 0)),
            (1.0, &b1.translate_dilate(DyadicRational::integer(2), 0)),
        ]);
        assert_eq!(PiecewisePolynomial::sup_distance(&d, &rhs, 8), 0.0);
        assert_eq!(d.degree(), 1);
        assert_eq!(
            d.support(),
            Some((DyadicRational::integer(0), DyadicRational::integer(4)))
        );
    }

    #[test]
    fn high_order_derivative_identity() {
        // 2^{-n} sum_k (-1)^k binom(n+1,k) B_n(2x + (n-k))
        //   = 2^{-2n-1} * dilated variant, exactly, for n = 1..4
        for n in 1..=4usize {
            let hod = high_order_derivative(n);
            let b = bspline(n);
            let translates: Vec<(f64, PiecewisePolynomial)> = (0..=(n + 1))
                .map(|k| {
                    let w = (if k % 2 == 0 { 1.0 } else { -1.0 })
                        * binomial(n + 1, k)
                        * (-(n as f64)).exp2();
                    let shift = DyadicRational::integer(k as i64 - n as i64);
                    (w, b.translate_dilate(shift, 1))
                })
                .collect();
            let term_refs: Vec<(f64, &PiecewisePolynomial)> =
                translates.iter().map(|(w, p)| (*w, p)).collect();
            let lhs = PiecewisePolynomial::linear_combine(&term_refs);
            let rhs = PiecewisePolynomial::linear_combine(&[(
                (-(2.0 * n as f64 + 1.0)).exp2(),
                &hod.dilated,
            )]);
            assert!(
                PiecewisePolynomial::sup_distance(&lhs, &rhs, 8) <= 1e-11,
                "n={n}"
            );
        }
    }

    #[test]
    fn order_cap() {
        assert!(BSplineOrder::new(11).is_ok());
        assert!(BSplineOrder::new(12).is_err());
        assert!(BSplineOrder::with_max(12, 15).is_ok());
    }
}
