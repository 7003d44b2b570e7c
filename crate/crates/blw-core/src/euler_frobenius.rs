//! Symbol polynomials of the B-spline autocorrelation, their roots and the
//! derived constants.
//!
//! `P_n(omega)`, the periodised square modulus of the B-spline transform,
//! is a polynomial `U_{2n}` in `z = cos(omega/2)`, hence a polynomial
//! `U*_n` in `y = 1 - z^2`. Its roots `alpha_j > 1` yield the factors
//! `r_j = (2 alpha_j - 1) - 2 sqrt(alpha_j (alpha_j - 1)) in (0, 1)` that
//! govern the geometric decay of every series in the crate.
//!
//! Coefficient arithmetic is exact (arbitrary-precision rationals): the
//! recurrence denominators grow factorially and floating-point drift would
//! destroy the root brackets. Floats enter only at root polishing.

use crate::{Error, Result};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Which of `r_j`, `1/r_j` a construction uses for its `j`-th factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TFlag {
    UseR,
    UseInvR,
}

/// Variable a [`SymmetricPolynomial`] is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyVar {
    /// `z = cos(omega/2)`
    Z,
    /// `y = 1 - z^2`
    Y,
}

/// Exact-coefficient polynomial in `z` or `y`, ascending powers.
#[derive(Clone, Debug)]
pub struct SymmetricPolynomial {
    pub coeffs: Vec<BigRational>,
    pub var: PolyVar,
}

impl SymmetricPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval_rational(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().expect("coefficient fits in f64"))
            .collect()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs_f64()
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * x + c)
    }
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `U_m(z)`: `U_0 = 1`, `U_{k+1} = z U_k + (1 - z^2) U_k' / (k + 2)`.
pub fn u_polynomial(m: usize) -> SymmetricPolynomial {
    let mut u = vec![BigRational::one()];
    for k in 0..m {
        let mut next = vec![BigRational::zero(); u.len() + 1];
        // z * U_k
        for (i, c) in u.iter().enumerate() {
            next[i + 1] += c;
        }
        // (1 - z^2) U_k' / (k + 2)
        let div = big(k as i64 + 2);
        for (i, c) in u.iter().enumerate().skip(1) {
            let d = c * big(i as i64) / &div;
            next[i - 1] += &d;
            if i + 1 < next.len() {
                next[i + 1] -= &d;
            } else {
                next.push(-d);
            }
        }
        while next.len() > 1 && next.last().unwrap().is_zero() {
            next.pop();
        }
        u = next;
    }
    SymmetricPolynomial {
        coeffs: u,
        var: PolyVar::Z,
    }
}

/// `U*_n(y)`: substitute `z^2 = 1 - y` into `U_{2n}`; degree `n`,
/// `U*_n(0) = 1` exactly.
pub fn u_star(n: usize) -> SymmetricPolynomial {
    let u = u_polynomial(2 * n);
    let mut out = vec![BigRational::zero(); n + 1];
    for (i, c) in u.coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        debug_assert!(i % 2 == 0, "U_{{2n}} must be even");
        let p = i / 2;
        // (1 - y)^p expanded binomially
        let mut binom = BigRational::one();
        for (j, slot) in out.iter_mut().enumerate().take(p + 1) {
            let term = c * &binom * if j % 2 == 0 { big(1) } else { big(-1) };
            *slot += term;
            binom = binom * big((p - j) as i64) / big(j as i64 + 1);
        }
    }
    debug_assert!(out[0].is_one(), "U*(0) must be 1");
    SymmetricPolynomial {
        coeffs: out,
        var: PolyVar::Y,
    }
}

/// The `n` roots of `U*_n`, each strictly greater than 1, ascending.
///
/// Sign changes are bracketed on a geometric grid over `(1, bound]` with
/// exact rational evaluation, then polished by bisection and Newton.
pub fn find_alphas(n: usize) -> Result<Vec<f64>> {
    assert!(n >= 1);
    let star = u_star(n);
    let cf = star.coeffs_f64();
    let lead = *cf.last().unwrap();
    let bound = 1.0 + cf.iter().map(|c| (c / lead).abs()).fold(1.0, f64::max);

    let sign_at = |x: f64| -> i32 {
        let xr = BigRational::from_float(x).expect("finite grid point");
        let v = star.eval_rational(&xr);
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    };

    // geometric grid on alpha - 1, dense near 1 where roots cluster
    let mut brackets: Vec<(f64, f64)> = Vec::new();
    for density in [4usize, 8, 16] {
        brackets.clear();
        let steps = density * 64;
        let mut prev_x = 1.0;
        let mut prev_s = sign_at(1.0);
        for j in (0..=steps).rev() {
            let x = 1.0 + (bound - 1.0) * (-(j as f64) / density as f64).exp2();
            let s = sign_at(x);
            if s == 0 {
                brackets.push((x, x));
            } else if prev_s != 0 && s != prev_s {
                brackets.push((prev_x, x));
            }
            prev_x = x;
            prev_s = s;
        }
        if brackets.len() >= n {
            break;
        }
    }
    if brackets.len() != n {
        return Err(Error::RootBracketing {
            n,
            found: brackets.len(),
        });
    }

    let f = |x: f64| cf.iter().rev().fold(0.0, |acc, &c| acc * x + c);
    let df = |x: f64| {
        cf.iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * x + c * i as f64)
    };

    let mut roots = Vec::with_capacity(n);
    for &(mut lo, mut hi) in &brackets {
        if lo == hi {
            roots.push(lo);
            continue;
        }
        let mut flo = f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm == 0.0 || (hi - lo) <= 1e-15 * mid.abs() {
                lo = mid;
                hi = mid;
                break;
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..8 {
            let d = df(x);
            if d == 0.0 {
                break;
            }
            let step = f(x) / d;
            x -= step;
            if step.abs() <= 1e-15 * x.abs() {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for &r in &roots {
        if r <= 1.0 + 1e-9 {
            return Err(Error::RootNearUnity(r));
        }
    }
    Ok(roots)
}

/// `r_j = (2 alpha_j - 1) - 2 sqrt(alpha_j (alpha_j - 1))`, each in `(0, 1)`,
/// evaluated through the cancellation-free reciprocal of the conjugate.
pub fn rs_from_alphas(alphas: &[f64]) -> Result<Vec<f64>> {
    alphas
        .iter()
        .map(|&a| {
            if a <= 1.0 {
                Err(Error::RootNotAboveOne(a))
            } else if a <= 1.0 + 1e-9 {
                Err(Error::RootNearUnity(a))
            } else {
                Ok(1.0 / ((2.0 * a - 1.0) + 2.0 * (a * (a - 1.0)).sqrt()))
            }
        })
        .collect()
}

/// Roots, factors and order-level constants for one spline order.
#[derive(Clone, Debug)]
pub struct EulerFrobeniusData {
    pub n: usize,
    /// ascending, each > 1
    pub alphas: Vec<f64>,
    /// matching order, each in (0, 1), decreasing
    pub rs: Vec<f64>,
    /// `beta_n = 2^n sqrt(prod alpha_j r_j)`
    pub beta: f64,
    /// `delta_n = prod (1/r_j - r_j)`
    pub delta: f64,
    /// backward error `|U*_n(alpha_j)| / sum_i |c_i| alpha_j^i` per root
    pub residuals: Vec<f64>,
}

impl EulerFrobeniusData {
    pub fn compute(n: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<EulerFrobeniusData>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(d) = cache.lock().unwrap().get(&n) {
            return Ok(d.clone());
        }
        let data = if n == 0 {
            EulerFrobeniusData {
                n,
                alphas: vec![],
                rs: vec![],
                beta: 1.0,
                delta: 1.0,
                residuals: vec![],
            }
        } else {
            let alphas = find_alphas(n)?;
            let rs = rs_from_alphas(&alphas)?;
            let star = u_star(n);
            let cf = star.coeffs_f64();
            let residuals = alphas
                .iter()
                .map(|&a| {
                    let ar = BigRational::from_float(a).unwrap();
                    let raw = star.eval_rational(&ar).to_f64().unwrap().abs();
                    let scale: f64 = cf
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c.abs() * a.powi(i as i32))
                        .sum();
                    raw / scale
                })
                .collect();
            let beta = (n as f64).exp2()
                * alphas
                    .iter()
                    .zip(rs.iter())
                    .map(|(a, r)| a * r)
                    .product::<f64>()
                    .sqrt();
            let delta = rs.iter().map(|r| 1.0 / r - r).product();
            EulerFrobeniusData {
                n,
                alphas,
                rs,
                beta,
                delta,
                residuals,
            }
        };
        let data = Arc::new(data);
        cache.lock().unwrap().insert(n, data.clone());
        Ok(data)
    }

    /// `t_j` values for a t-choice.
    pub fn t_values(&self, tchoice: &[TFlag]) -> Result<Vec<f64>> {
        if tchoice.len() != self.n {
            return Err(Error::TChoiceLength {
                got: tchoice.len(),
                expected: self.n,
            });
        }
        Ok(self
            .rs
            .iter()
            .zip(tchoice.iter())
            .map(|(&r, flag)| match flag {
                TFlag::UseR => r,
                TFlag::UseInvR => 1.0 / r,
            })
            .collect())
    }
}

/// The constants of the localisation theorem for one t-choice.
#[derive(Clone, Copy, Debug)]
pub struct Constants {
    pub beta: f64,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub delta: f64,
}

pub fn constants(data: &EulerFrobeniusData, tchoice: &[TFlag]) -> Result<Constants> {
    let ts = data.t_values(tchoice)?;
    let prod_alpha_t: f64 = data
        .alphas
        .iter()
        .zip(ts.iter())
        .map(|(a, t)| a * t)
        .product();
    let prod_r: f64 = data.rs.iter().product();
    let prod_alpha: f64 = data.alphas.iter().product();
    let sign = if (data.n + 1).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    Ok(Constants {
        beta: data.beta,
        gamma: -prod_alpha_t.sqrt() * prod_r,
        gamma_tilde: (data.n as f64).exp2() * prod_alpha.sqrt() * prod_r / sign,
        delta: data.delta,
    })
}

/// `P_n(omega)` from the root factorisation with `t_j = r_j`:
/// product of `|e^{i omega} r_j + 1|^2 / (4 alpha_j r_j)`.
pub fn pn_product(data: &EulerFrobeniusData, omega: f64) -> f64 {
    let c = omega.cos();
    data.alphas
        .iter()
        .zip(data.rs.iter())
        .map(|(&a, &r)| (r * r + 2.0 * r * c + 1.0) / (4.0 * a * r))
        .product()
}

/// Truncated lattice-sum evaluation of `P_n(omega)` with a reported
/// integral tail bound; the independent oracle for [`pn_product`].
#[derive(Clone, Copy, Debug)]
pub struct PnDirect {
    pub value: f64,
    pub tail_bound: f64,
}

pub fn pn_direct(n: usize, omega: f64, truncation: usize) -> PnDirect {
    let s = (0.5 * omega).sin();
    if s.abs() < 1e-12 {
        // only the vanishing-denominator lattice term survives; limit is 1
        return PnDirect {
            value: 1.0,
            tail_bound: 0.0,
        };
    }
    let p = 2 * (n as i32 + 1);
    let amp = (2.0 * s).powi(p);
    let mut sum = 0.0;
    for k in -(truncation as i64)..=(truncation as i64) {
        sum += (omega + 2.0 * std::f64::consts::PI * k as f64).powi(-p);
    }
    let tau = 2.0 * std::f64::consts::PI * truncation as f64 - omega.abs();
    let tail = if tau > 0.0 {
        2.0 * amp * tau.powi(-(p - 1)) / (2.0 * std::f64::consts::PI * (p - 1) as f64)
    } else {
        f64::INFINITY
    };
    PnDirect {
        value: amp * sum,
        tail_bound: tail,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn frac(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn u_polynomial_small_orders() {
        assert_eq!(u_polynomial(0).coeffs, vec![big(1)]);
        // two recurrence steps by hand: U_1 = z, U_2 = z^2 + (1-z^2)/3
        assert_eq!(u_polynomial(2).coeffs, vec![frac(1, 3), big(0), frac(2, 3)]);
        assert_eq!(
            u_polynomial(4).coeffs,
            vec![frac(2, 15), big(0), frac(11, 15), big(0), frac(2, 15)]
        );
    }

    #[test]
    fn u_star_small_orders() {
        assert_eq!(u_star(0).coeffs, vec![big(1)]);
        assert_eq!(u_star(1).coeffs, vec![big(1), frac(-2, 3)]);
        // (2y^2 - 15y + 15)/15
        assert_eq!(u_star(2).coeffs, vec![big(1), big(-1), frac(2, 15)]);
    }

    #[test]
    fn u_even_structure() {
        for n in 1..=6 {
            let u = u_polynomial(2 * n);
            for (i, c) in u.coeffs.iter().enumerate() {
                if i % 2 == 1 {
                    assert!(c.is_zero(), "odd coefficient in U_{}", 2 * n);
                }
            }
        }
    }

    #[test]
    fn alphas_order_one_and_two() {
        let a1 = find_alphas(1).unwrap();
        assert_eq!(a1.len(), 1);
        assert_abs_diff_eq!(a1[0], 1.5, epsilon = 1e-14);

        let a2 = find_alphas(2).unwrap();
        let lo = (15.0 - 105f64.sqrt()) / 4.0;
        let hi = (15.0 + 105f64.sqrt()) / 4.0;
        assert_abs_diff_eq!(a2[0], lo, epsilon = 1e-12);
        assert_abs_diff_eq!(a2[1], hi, epsilon = 1e-12);
    }

    #[test]
    fn alphas_order_five_match_independent_solver() {
        // frozen from a 40-digit solve of U*_5 with mpmath
        let expected = [
            1.043_379_163_650_685_5,
            1.486_553_718_265_442_5,
            3.307_657_309_279_054_7,
            15.501_503_250_496_361,
            490.160_906_558_308_45,
        ];
        let got = find_alphas(5).unwrap();
        for (g, e) in got.iter().zip(expected.iter()) {
            assert!((g - e).abs() <= 1e-10 * e, "{g} vs {e}");
        }
    }

    #[test]
    fn residuals_and_factors() {
        for n in 1..=5 {
            let data = EulerFrobeniusData::compute(n).unwrap();
            for &res in &data.residuals {
                assert!(res <= 1e-11, "n={n} residual {res}");
            }
            // simplicity: derivative bounded away from zero at each root
            let star = u_star(n);
            let cf = star.coeffs_f64();
            for &a in &data.alphas {
                let d: f64 = cf
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (i, &c)| acc * a + c * i as f64);
                assert!(d.abs() > 1e-9, "n={n} root {a} nearly multiple");
            }
            for &r in &data.rs {
                assert!(r > 0.0 && r < 1.0);
            }
            // r * (1/r) consistency through the closed forms
            for (&a, &r) in data.alphas.iter().zip(data.rs.iter()) {
                let inv = (2.0 * a - 1.0) + 2.0 * (a * (a - 1.0)).sqrt();
                assert_abs_diff_eq!(r * inv, 1.0, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn factors_order_one_and_two() {
        let r1 = rs_from_alphas(&[1.5]).unwrap()[0];
        assert_abs_diff_eq!(r1, 2.0 - 3f64.sqrt(), epsilon = 1e-15);
        // paper closed forms: 2r_1 = (13-sqrt105) - sqrt(270-26 sqrt105)
        let s = 105f64.sqrt();
        let data = EulerFrobeniusData::compute(2).unwrap();
        assert_abs_diff_eq!(
            data.rs[0],
            ((13.0 - s) - (270.0 - 26.0 * s).sqrt()) / 2.0,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(
            data.rs[1],
            ((13.0 + s) - (270.0 + 26.0 * s).sqrt()) / 2.0,
            epsilon = 1e-10
        );
    }

    #[test]
    fn factors_reject_bad_alphas() {
        assert!(matches!(
            rs_from_alphas(&[0.9]),
            Err(Error::RootNotAboveOne(_))
        ));
        assert!(matches!(
            rs_from_alphas(&[1.0 + 1e-12]),
            Err(Error::RootNearUnity(_))
        ));
    }

    #[test]
    fn factor_map_monotone_decreasing_in_alpha() {
        let mut prev = f64::INFINITY;
        for i in 0..100 {
            let a = 1.001 + i as f64 * 0.37;
            let r = rs_from_alphas(&[a]).unwrap()[0];
            assert!(r < prev, "r not decreasing at alpha={a}");
            prev = r;
        }
    }

    #[test]
    fn beta_equals_product_form() {
        for n in 1..=5 {
            let data = EulerFrobeniusData::compute(n).unwrap();
            let prod: f64 = data.rs.iter().map(|r| 1.0 + r).product();
            assert_abs_diff_eq!(data.beta, prod, epsilon = 1e-10);
        }
    }

    #[test]
    fn pn_product_reference_values() {
        let d0 = EulerFrobeniusData::compute(0).unwrap();
        assert_eq!(pn_product(&d0, 0.7), 1.0);
        let d1 = EulerFrobeniusData::compute(1).unwrap();
        assert_abs_diff_eq!(pn_product(&d1, 0.0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            pn_product(&d1, std::f64::consts::PI),
            1.0 / 3.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn pn_direct_oracle() {
        let direct = pn_direct(1, std::f64::consts::PI, 10_000);
        assert_abs_diff_eq!(direct.value, 1.0 / 3.0, epsilon = 1e-8);
        assert!(direct.tail_bound < 1e-12);
        assert_eq!(pn_direct(3, 0.0, 10).value, 1.0);

        let d3 = EulerFrobeniusData::compute(3).unwrap();
        let direct3 = pn_direct(3, 1.0, 10_000);
        assert_abs_diff_eq!(direct3.value, pn_product(&d3, 1.0), epsilon = 1e-8);
        // frozen 40-digit reference
        assert_abs_diff_eq!(direct3.value, 0.714_512_870_399_482_9, epsilon = 1e-12);
    }

    #[test]
    fn constants_order_one() {
        let data = EulerFrobeniusData::compute(1).unwrap();
        let c = constants(&data, &[TFlag::UseR]).unwrap();
        let r = 2.0 - 3f64.sqrt();
        assert_abs_diff_eq!(c.beta, 3.0 - 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.gamma, -r * (1.5 * r).sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(c.delta, 2.0 * 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(c.gamma_tilde, 2.0 * r * 1.5f64.sqrt(), epsilon = 1e-14);

        let ci = constants(&data, &[TFlag::UseInvR]).unwrap();
        assert_abs_diff_eq!(ci.gamma, -(1.5 / r).sqrt() * r, epsilon = 1e-14);
        assert_eq!(ci.gamma_tilde, c.gamma_tilde);
    }
}
