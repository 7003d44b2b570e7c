//! Sequence-space quasi-norms characterizing Nikolskii-Besov smoothness.
//!
//! Two equivalent characterizations are computed from exact pairings of a
//! compactly supported piecewise polynomial `f`:
//!
//! * the wavelet form: `l^p` of `<f, sqrt2 phi(.-tau)>` at the coarse
//!   level plus a weighted `l^q` over levels of `l^p` of
//!   `<f, psi(2^d . - tau)>`;
//! * the B-spline form: the same aggregation built from `<f, B_n(.-tau)>`
//!   and `<f, B_{2n+1}^{(n+1)}(2^{d+1}. - tau)>`.
//!
//! A discretized modulus-of-smoothness norm serves as a heuristic sanity
//! oracle for the smoothness dichotomy; it is not a certified norm.

use crate::bspline::{binomial, bspline, high_order_derivative};
use crate::dyadic::DyadicRational;
use crate::euler_frobenius::EulerFrobeniusData;
use crate::piecewise::PiecewisePolynomial;
use crate::wavelet::{phi_series, psi_series, Sign, WaveletSpec};
use crate::{exec, Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Smoothness `s` and exponents `p, q in (0, inf]` for one spline order.
#[derive(Clone, Copy, Debug)]
pub struct BesovParams {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(n: usize, s: f64, p: f64, q: f64) -> Result<Self> {
        if p.is_nan() || q.is_nan() || p <= 0.0 || q <= 0.0 {
            return Err(Error::ParamsOutOfRange(format!(
                "p and q must be positive, got p={p}, q={q}"
            )));
        }
        let params = BesovParams { n, s, p, q };
        let (lo, hi) = params.admissible_range();
        if !(s > lo && s < hi) {
            return Err(Error::ParamsOutOfRange(format!(
                "s={s} outside admissible ({lo}, {hi}) for n={n}, p={p}"
            )));
        }
        Ok(params)
    }

    /// `max{1/p, 1} - 1 - n < s < n + min{1/p, 1}`.
    pub fn admissible_range(&self) -> (f64, f64) {
        let inv_p = 1.0 / self.p;
        (
            inv_p.max(1.0) - 1.0 - self.n as f64,
            self.n as f64 + inv_p.min(1.0),
        )
    }

    /// The level weight exponent `s - 1/p + 1`.
    fn weight_exp(&self) -> f64 {
        self.s - 1.0 / self.p + 1.0
    }
}

fn lp<I: Iterator<Item = f64>>(vals: I, p: f64) -> f64 {
    if p.is_infinite() {
        vals.fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        vals.map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Doubly indexed coefficients `mu_{d tau}`, levels `d = -1, 0, 1, ...`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CoefficientGrid {
    pub levels: BTreeMap<i32, BTreeMap<i64, f64>>,
}

impl CoefficientGrid {
    pub fn set(&mut self, d: i32, tau: i64, v: f64) {
        self.levels.entry(d).or_default().insert(tau, v);
    }

    pub fn get(&self, d: i32, tau: i64) -> f64 {
        self.levels
            .get(&d)
            .and_then(|m| m.get(&tau))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.levels.values().all(|m| m.is_empty())
    }

    fn level_lp(&self, d: i32, p: f64) -> f64 {
        self.levels
            .get(&d)
            .map(|m| lp(m.values().copied(), p))
            .unwrap_or(0.0)
    }
}

/// The sequence quasi-norm: `l^q` over levels of `l^p` over shifts.
pub fn sequence_norm(mu: &CoefficientGrid, params: &BesovParams) -> f64 {
    let per_level: Vec<f64> = mu
        .levels
        .keys()
        .map(|&d| mu.level_lp(d, params.p))
        .collect();
    lp(per_level.into_iter(), params.q)
}

/// The orthonormal system the wavelet-side pairings are taken against:
/// `h_{-1,tau} = sqrt2 phi(x - tau)`, `h_{d,tau} = psi(2^d x - tau)`,
/// built once from truncated series (all-r t-choice, `+` sign).
#[derive(Clone, Debug)]
pub struct WaveletBasis {
    pub n: usize,
    pub epsilon: f64,
    phi: PiecewisePolynomial,
    psi: PiecewisePolynomial,
}

impl WaveletBasis {
    pub fn new(n: usize, epsilon: f64) -> Result<Self> {
        let spec = WaveletSpec::all_r(n, Sign::Plus)?;
        let (phi, _) = phi_series(&spec, epsilon)?.materialize(None);
        let (psi, _) = psi_series(&spec, epsilon)?.materialize(None);
        Ok(WaveletBasis {
            n,
            epsilon,
            phi,
            psi,
        })
    }

    /// The basis function `h_{d tau}`.
    pub fn basis_function(&self, d: i32, tau: i64) -> PiecewisePolynomial {
        if d < 0 {
            let shifted = self.phi.translate_dilate(DyadicRational::integer(tau), 0);
            PiecewisePolynomial::linear_combine(&[(std::f64::consts::SQRT_2, &shifted)])
        } else {
            self.psi.translate_dilate(DyadicRational::integer(tau), d)
        }
    }

    /// Shifts whose (truncated) support meets `supp f` at level `d`.
    fn tau_range(&self, f: &PiecewisePolynomial, d: i32) -> (i64, i64) {
        let Some((u, v)) = f.support() else {
            return (0, -1);
        };
        let base = if d < 0 { &self.phi } else { &self.psi };
        let (a, b) = base.support().expect("basis functions are nonzero");
        let scale = if d < 0 { 1.0 } else { (d as f64).exp2() };
        let lo = (scale * u.value() - b.value()).floor() as i64;
        let hi = (scale * v.value() - a.value()).ceil() as i64;
        (lo, hi)
    }

    fn pair_level(
        &self,
        f: &PiecewisePolynomial,
        d: i32,
        window: Option<(i64, i64)>,
    ) -> Vec<(i64, f64)> {
        let (mut lo, mut hi) = self.tau_range(f, d);
        if let Some((wlo, whi)) = window {
            lo = lo.max(wlo);
            hi = hi.min(whi);
        }
        if lo > hi {
            return Vec::new();
        }
        let taus: Vec<i64> = (lo..=hi).collect();
        exec::map_collect(&taus, |&tau| {
            (tau, f.inner_product(&self.basis_function(d, tau)))
        })
    }
}

/// Coefficient analysis: `mu_{d tau} = 2^{d(s - 1/p + 1)} <f, h_{d tau}>`
/// over levels `-1..=D`.
pub fn analyze(
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
    tau_window: Option<(i64, i64)>,
    epsilon: f64,
) -> Result<CoefficientGrid> {
    let basis = WaveletBasis::new(params.n, epsilon)?;
    analyze_with(&basis, f, params, max_level, tau_window)
}

pub fn analyze_with(
    basis: &WaveletBasis,
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
    tau_window: Option<(i64, i64)>,
) -> Result<CoefficientGrid> {
    let mut grid = CoefficientGrid::default();
    if f.is_zero() {
        return Ok(grid);
    }
    for d in -1..=max_level {
        let w = (d as f64 * params.weight_exp()).exp2();
        for (tau, v) in basis.pair_level(f, d, tau_window) {
            grid.set(d, tau, w * v);
        }
    }
    Ok(grid)
}

/// Materializes the finite expansion
/// `f = sum mu_{d tau} 2^{-d(s - 1/p)} h_{d tau}`.
pub fn synthesize(
    mu: &CoefficientGrid,
    params: &BesovParams,
    epsilon: f64,
) -> Result<PiecewisePolynomial> {
    let basis = WaveletBasis::new(params.n, epsilon)?;
    synthesize_with(&basis, mu, params)
}

pub fn synthesize_with(
    basis: &WaveletBasis,
    mu: &CoefficientGrid,
    params: &BesovParams,
) -> Result<PiecewisePolynomial> {
    let mut parts: Vec<(f64, PiecewisePolynomial)> = Vec::new();
    for (&d, level) in &mu.levels {
        let w = (-(d as f64) * (params.s - 1.0 / params.p)).exp2();
        for (&tau, &m) in level {
            if m != 0.0 {
                parts.push((m * w, basis.basis_function(d, tau)));
            }
        }
    }
    let refs: Vec<(f64, &PiecewisePolynomial)> = parts.iter().map(|(w, p)| (*w, p)).collect();
    Ok(PiecewisePolynomial::linear_combine(&refs))
}

/// One computed norm with its per-level breakdown.
#[derive(Clone, Debug, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub first_term: f64,
    /// raw `l^p` shift masses per level `d = 0..=D`
    pub level_masses: Vec<f64>,
    /// weighted level contributions `2^{d(s-1/p+1)} * mass`
    pub level_terms: Vec<f64>,
}

/// The wavelet-side norm: coarse `l^p` block plus weighted `l^q` of the
/// raw wavelet pairings.
pub fn norm_star(
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
    epsilon: f64,
) -> Result<NormReport> {
    let basis = WaveletBasis::new(params.n, epsilon)?;
    norm_star_with(&basis, f, params, max_level)
}

pub fn norm_star_with(
    basis: &WaveletBasis,
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
) -> Result<NormReport> {
    let first = lp(
        basis.pair_level(f, -1, None).into_iter().map(|(_, v)| v),
        params.p,
    );
    let mut masses = Vec::new();
    let mut terms = Vec::new();
    for d in 0..=max_level {
        let mass = lp(
            basis.pair_level(f, d, None).into_iter().map(|(_, v)| v),
            params.p,
        );
        let w = (d as f64 * params.weight_exp()).exp2();
        masses.push(mass);
        terms.push(w * mass);
    }
    let second = lp(terms.iter().copied(), params.q);
    Ok(NormReport {
        value: first + second,
        first_term: first,
        level_masses: masses,
        level_terms: terms,
    })
}

/// The B-spline-side norm: pairings against `B_n(.-tau)` at the coarse
/// level and against the high-order derivative
/// `B_{2n+1}^{(n+1)}(2^{d+1}. - tau)` at finer levels. The derivative sits
/// on the B-spline exactly as written, so `f` needs no smoothness.
pub fn norm_circ(
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
    _epsilon: f64,
) -> Result<NormReport> {
    let n = params.n;
    let b = bspline(n);
    let deriv = high_order_derivative(n).plain;
    let first = lp(
        pair_translates(f, &b, 0).into_iter().map(|(_, v)| v),
        params.p,
    );
    let mut masses = Vec::new();
    let mut terms = Vec::new();
    for d in 0..=max_level {
        let mass = lp(
            pair_translates(f, &deriv, d + 1)
                .into_iter()
                .map(|(_, v)| v),
            params.p,
        );
        let w = (d as f64 * params.weight_exp()).exp2();
        masses.push(mass);
        terms.push(w * mass);
    }
    let second = lp(terms.iter().copied(), params.q);
    Ok(NormReport {
        value: first + second,
        first_term: first,
        level_masses: masses,
        level_terms: terms,
    })
}

/// `<f, g(2^d . - tau)>` for every shift whose support meets `supp f`.
fn pair_translates(f: &PiecewisePolynomial, g: &PiecewisePolynomial, d: i32) -> Vec<(i64, f64)> {
    let (Some((u, v)), Some((a, b))) = (f.support(), g.support()) else {
        return Vec::new();
    };
    let scale = (d as f64).exp2();
    let lo = (scale * u.value() - b.value()).floor() as i64;
    let hi = (scale * v.value() - a.value()).ceil() as i64;
    if lo > hi {
        return Vec::new();
    }
    let taus: Vec<i64> = (lo..=hi).collect();
    exec::map_collect(&taus, |&tau| {
        (
            tau,
            f.inner_product(&g.translate_dilate(DyadicRational::integer(tau), d)),
        )
    })
}

/// Two-sided constants for the coarse-level block, from the explicit
/// estimates of the equivalence proof.
#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceReport {
    pub star: f64,
    pub circ: f64,
    pub ratio: Option<f64>,
    /// `l^p` of the scaling-function pairings, without the sqrt2
    pub block_phi: f64,
    /// `l^p` of the B-spline pairings
    pub block_bspline: f64,
    pub block_ratio: Option<f64>,
    pub block_lower: f64,
    pub block_upper: f64,
    pub violation: bool,
}

pub fn equivalence_report(
    f: &PiecewisePolynomial,
    params: &BesovParams,
    max_level: i32,
    epsilon: f64,
) -> Result<EquivalenceReport> {
    let data = EulerFrobeniusData::compute(params.n)?;
    let basis = WaveletBasis::new(params.n, epsilon)?;
    let star = norm_star_with(&basis, f, params, max_level)?.value;
    let circ = norm_circ(f, params, max_level, epsilon)?.value;
    let ratio = (circ > 0.0).then(|| star / circ);

    let spec = WaveletSpec::all_r(params.n, Sign::Plus)?;
    let (phi, _) = phi_series(&spec, epsilon)?.materialize(None);
    let block_phi = lp(
        pair_translates(f, &phi, 0).into_iter().map(|(_, v)| v),
        params.p,
    );
    let block_bspline = lp(
        pair_translates(f, &bspline(params.n), 0)
            .into_iter()
            .map(|(_, v)| v),
        params.p,
    );
    let p = params.p;
    let (c_lower, c_upper) = if p <= 1.0 {
        (
            data.rs
                .iter()
                .map(|r| 1.0 + r.powf(p))
                .product::<f64>()
                .powf(-1.0 / p),
            data.rs
                .iter()
                .map(|r| 1.0 / (1.0 - r.powf(p)))
                .product::<f64>()
                .powf(1.0 / p),
        )
    } else {
        (
            data.rs.iter().map(|r| 1.0 + r).product::<f64>().recip(),
            data.rs.iter().map(|r| 1.0 / (1.0 - r)).product::<f64>(),
        )
    };
    let block_lower = data.beta * c_lower;
    let block_upper = data.beta * c_upper;
    let block_ratio = (block_bspline > 0.0).then(|| block_phi / block_bspline);
    let violation = match block_ratio {
        Some(rt) => rt < block_lower * (1.0 - 1e-6) || rt > block_upper * (1.0 + 1e-6),
        None => false,
    };
    Ok(EquivalenceReport {
        star,
        circ,
        ratio,
        block_phi,
        block_bspline,
        block_ratio,
        block_lower,
        block_upper,
        violation,
    })
}

/// Sampled `L^p` norm of a piecewise polynomial. Exact for `p = 2`,
/// Chebyshev-sampled sup for `p = inf`, fixed-order per-piece quadrature
/// otherwise.
fn lp_function_norm(f: &PiecewisePolynomial, p: f64) -> f64 {
    if f.is_zero() {
        return 0.0;
    }
    if p == 2.0 {
        return f.inner_product(f).max(0.0).sqrt();
    }
    let knots = f.knots();
    if p.is_infinite() {
        let mut worst = 0.0f64;
        for i in 0..f.pieces().len() {
            let a = knots[i].value();
            let w = knots[i + 1].diff_value(&knots[i]);
            for j in 0..32 {
                let x = a + w * (j as f64 + 0.5) / 32.0;
                worst = worst.max(f.evaluate(x).abs());
            }
        }
        return worst;
    }
    let rule = crate::quadrature::gauss_legendre(16);
    let mut acc = 0.0;
    for i in 0..f.pieces().len() {
        let a = knots[i].value();
        let w = knots[i + 1].diff_value(&knots[i]);
        let mut s = 0.0;
        for &(t, wt) in rule.iter() {
            let x = a + (t + 1.0) * 0.5 * w;
            s += wt * f.evaluate(x).abs().powf(p);
        }
        acc += s * w * 0.5;
    }
    acc.powf(1.0 / p)
}

/// `M`-th forward difference `Delta_h^M f` as exact piecewise algebra.
fn forward_difference(
    f: &PiecewisePolynomial,
    h: DyadicRational,
    order: usize,
) -> PiecewisePolynomial {
    let translates: Vec<(f64, PiecewisePolynomial)> = (0..=order)
        .map(|k| {
            let sign = if (order - k).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            let w = sign * binomial(order, k);
            // f(x + k h) = f(x - (-k h))
            (w, f.translate_dilate(-h.mul_int(k as i64), 0))
        })
        .collect();
    let refs: Vec<(f64, &PiecewisePolynomial)> = translates.iter().map(|(w, p)| (*w, p)).collect();
    PiecewisePolynomial::linear_combine(&refs)
}

/// Discretized modulus-of-smoothness norm over a dyadic `t` grid; the
/// modulus is estimated by maximizing over a dyadic net of step sizes.
/// A heuristic oracle for monotonicity and dichotomy checks only.
pub fn modulus_norm(
    f: &PiecewisePolynomial,
    order: usize,
    s: f64,
    p: f64,
    q: f64,
    grid: &[DyadicRational],
) -> Result<f64> {
    if !(1.0..=f64::INFINITY).contains(&p) || !(1.0..=f64::INFINITY).contains(&q) {
        return Err(Error::ParamsOutOfRange(format!(
            "modulus norm requires 1 <= p, q, got p={p}, q={q}"
        )));
    }
    let lo = (1.0 / p - 1.0).max(0.0);
    if !(s > lo && s < order as f64) {
        return Err(Error::ParamsOutOfRange(format!(
            "modulus norm requires {lo} < s < {order}, got s={s}"
        )));
    }
    let base = lp_function_norm(f, p);
    if f.is_zero() || grid.is_empty() {
        return Ok(base);
    }
    let omegas: Vec<f64> = exec::map_collect(grid, |&t| {
        // sup over |h| < t on a dyadic net approaching t
        [
            t.mul_pow2(-1),
            t.mul_int(3).mul_pow2(-2),
            t.mul_int(7).mul_pow2(-3),
            t.mul_int(15).mul_pow2(-4),
        ]
        .iter()
        .map(|&h| lp_function_norm(&forward_difference(f, h, order), p))
        .fold(0.0f64, f64::max)
    });
    let mut terms: Vec<f64> = Vec::with_capacity(grid.len());
    let mut weights: Vec<f64> = Vec::with_capacity(grid.len());
    for (i, (&t, om)) in grid.iter().zip(omegas.iter()).enumerate() {
        let tv = t.value();
        terms.push(tv.powf(-s) * om);
        let wnext = if i + 1 < grid.len() {
            (tv / grid[i + 1].value()).ln()
        } else if i > 0 {
            (grid[i - 1].value() / tv).ln()
        } else {
            std::f64::consts::LN_2
        };
        weights.push(wnext);
    }
    let semi = if q.is_infinite() {
        terms.iter().copied().fold(0.0f64, f64::max)
    } else {
        terms
            .iter()
            .zip(weights.iter())
            .map(|(t, w)| t.powf(q) * w)
            .sum::<f64>()
            .powf(1.0 / q)
    };
    Ok(base + semi)
}

/// Descending grid `t = 2^0, 2^-1, ..., 2^-levels`.
pub fn dyadic_grid(levels: u32) -> Vec<DyadicRational> {
    (0..=levels).map(|k| DyadicRational::new(1, k)).collect()
}
