//! Piecewise polynomials on dyadic knots.
//!
//! The one representation every function in this crate materializes to:
//! B-splines, scaling functions, wavelets and their localised sums. A value
//! is defined by a strictly increasing knot vector and, per interval
//! `[knot_i, knot_{i+1})`, a coefficient vector in the local variable
//! `x - knot_i`. Values are 0 outside `[first knot, last knot)` and
//! evaluation is right-continuous at every knot, the convention inherited
//! from the unit indicator on `[0, 1)`.

use crate::dyadic::DyadicRational;
use crate::quadrature::gauss_legendre;
use crate::Error;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::BTreeSet;

/// Coefficients below this magnitude mark a piece as identically zero for
/// canonical trimming; keeps truncated series supports finite.
pub const ZERO_PIECE_TOL: f64 = 1e-15;

/// Relative coefficient agreement below which `sup_distance` reports exact 0.
const COEFF_MATCH_REL_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct PiecewisePolynomial {
    knots: Vec<DyadicRational>,
    pieces: Vec<Vec<f64>>,
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// Re-express `p(u)` as a polynomial in `u - delta` (Taylor shift).
fn shift_poly(coeffs: &[f64], delta: f64) -> Vec<f64> {
    if delta == 0.0 {
        return coeffs.to_vec();
    }
    // Repeated synthetic division: in-place Taylor shift.
    let mut c = coeffs.to_vec();
    let n = c.len();
    for j in 0..n {
        for i in (j..n.saturating_sub(1)).rev() {
            let hi = c[i + 1];
            c[i] += delta * hi;
        }
    }
    c
}

impl PiecewisePolynomial {
    /// The identically-zero function.
    pub fn zero() -> Self {
        PiecewisePolynomial {
            knots: Vec::new(),
            pieces: Vec::new(),
        }
    }

    /// Build from knots and per-interval coefficient vectors; validates and
    /// trims to canonical form.
    pub fn new(knots: Vec<DyadicRational>, pieces: Vec<Vec<f64>>) -> Result<Self, Error> {
        if knots.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if knots.len() != pieces.len() + 1 {
            return Err(Error::InvalidPiecewise(format!(
                "{} knots with {} pieces",
                knots.len(),
                pieces.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPiecewise(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots, pieces }.canonical())
    }

    /// Indicator of `[a, b)`.
    pub fn indicator(a: DyadicRational, b: DyadicRational) -> Self {
        assert!(a < b);
        PiecewisePolynomial {
            knots: vec![a, b],
            pieces: vec![vec![1.0]],
        }
    }

    fn canonical(mut self) -> Self {
        let is_zero_piece = |p: &Vec<f64>| p.iter().all(|c| c.abs() < ZERO_PIECE_TOL);
        let mut lead = 0;
        while lead < self.pieces.len() && is_zero_piece(&self.pieces[lead]) {
            lead += 1;
        }
        let mut tail = self.pieces.len();
        while tail > lead && is_zero_piece(&self.pieces[tail - 1]) {
            tail -= 1;
        }
        if lead >= tail {
            return Self::zero();
        }
        self.pieces.drain(tail..);
        self.pieces.drain(..lead);
        self.knots.drain(tail + 1..);
        self.knots.drain(..lead);
        for p in &mut self.pieces {
            while p.len() > 1 && *p.last().unwrap() == 0.0 {
                p.pop();
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn knots(&self) -> &[DyadicRational] {
        &self.knots
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Support as `[first knot, last knot)`, or `None` for the zero function.
    pub fn support(&self) -> Option<(DyadicRational, DyadicRational)> {
        if self.is_zero() {
            None
        } else {
            Some((self.knots[0], *self.knots.last().unwrap()))
        }
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| p.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.pieces
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, &c| m.max(c.abs()))
    }

    fn piece_index_dyadic(&self, x: &DyadicRational) -> Option<usize> {
        if self.is_zero() {
            return None;
        }
        let idx = self.knots.partition_point(|k| k <= x);
        if idx == 0 || idx > self.pieces.len() {
            None
        } else {
            Some(idx - 1)
        }
    }

    /// Value at `x`; 0 outside the support, right-continuous at knots.
    pub fn evaluate(&self, x: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let idx = self.knots.partition_point(|k| k.value() <= x);
        if idx == 0 || idx > self.pieces.len() {
            return 0.0;
        }
        horner(&self.pieces[idx - 1], x - self.knots[idx - 1].value())
    }

    /// Weighted sum of piecewise polynomials on the union knot grid.
    pub fn linear_combine(terms: &[(f64, &PiecewisePolynomial)]) -> Self {
        let mut knot_set: BTreeSet<DyadicRational> = BTreeSet::new();
        for (_, f) in terms {
            knot_set.extend(f.knots.iter().copied());
        }
        if knot_set.len() < 2 {
            return Self::zero();
        }
        let knots: Vec<DyadicRational> = knot_set.into_iter().collect();
        let mut pieces = Vec::with_capacity(knots.len() - 1);
        for w in knots.windows(2) {
            let a = w[0];
            let mut acc: Vec<f64> = vec![0.0];
            for &(c, f) in terms {
                if c == 0.0 {
                    continue;
                }
                if let Some(i) = f.piece_index_dyadic(&a) {
                    let delta = a.diff_value(&f.knots[i]);
                    let shifted = shift_poly(&f.pieces[i], delta);
                    if acc.len() < shifted.len() {
                        acc.resize(shifted.len(), 0.0);
                    }
                    for (dst, s) in acc.iter_mut().zip(shifted.iter()) {
                        *dst += c * s;
                    }
                }
            }
            pieces.push(acc);
        }
        PiecewisePolynomial { knots, pieces }.canonical()
    }

    /// `x -> f(2^e x - shift)` with exact knot arithmetic.
    pub fn translate_dilate(&self, shift: DyadicRational, log2_dilation: i32) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let e = log2_dilation;
        let knots: Vec<DyadicRational> = self
            .knots
            .iter()
            .map(|&k| (k + shift).mul_pow2(-e))
            .collect();
        let pieces: Vec<Vec<f64>> = self
            .pieces
            .iter()
            .map(|p| {
                let lam = (e as f64).exp2();
                let mut mult = 1.0;
                p.iter()
                    .map(|&c| {
                        let out = c * mult;
                        mult *= lam;
                        out
                    })
                    .collect()
            })
            .collect();
        PiecewisePolynomial { knots, pieces }.canonical()
    }

    /// Piecewise derivative; distributional jumps at knots are dropped,
    /// valid almost everywhere.
    pub fn differentiate(&self) -> Self {
        let pieces: Vec<Vec<f64>> = self
            .pieces
            .iter()
            .map(|p| {
                if p.len() <= 1 {
                    vec![0.0]
                } else {
                    p.iter()
                        .enumerate()
                        .skip(1)
                        .map(|(j, &c)| c * j as f64)
                        .collect()
                }
            })
            .collect();
        PiecewisePolynomial {
            knots: self.knots.clone(),
            pieces,
        }
        .canonical()
    }

    fn merged_knots_in(
        &self,
        other: &Self,
        lo: DyadicRational,
        hi: DyadicRational,
    ) -> Vec<DyadicRational> {
        let mut set: BTreeSet<DyadicRational> = BTreeSet::new();
        set.insert(lo);
        set.insert(hi);
        for k in self.knots.iter().chain(other.knots.iter()) {
            if *k > lo && *k < hi {
                set.insert(*k);
            }
        }
        set.into_iter().collect()
    }

    /// Exact integral of the product over the common support, via
    /// Gauss-Legendre of sufficient order per merged interval.
    pub fn inner_product(&self, other: &Self) -> f64 {
        let (Some((a1, b1)), Some((a2, b2))) = (self.support(), other.support()) else {
            return 0.0;
        };
        let lo = a1.max(a2);
        let hi = b1.min(b2);
        if lo >= hi {
            return 0.0;
        }
        let grid = self.merged_knots_in(other, lo, hi);
        let mut total = 0.0;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (Some(fi), Some(gi)) = (self.piece_index_dyadic(&a), other.piece_index_dyadic(&a))
            else {
                continue;
            };
            let fp = &self.pieces[fi];
            let gp = &other.pieces[gi];
            let df = a.diff_value(&self.knots[fi]);
            let dg = a.diff_value(&other.knots[gi]);
            let width = b.diff_value(&a);
            let deg = (fp.len() - 1) + (gp.len() - 1);
            let rule = gauss_legendre(deg / 2 + 1);
            let mut s = 0.0;
            for &(t, wt) in rule.iter() {
                let u = (t + 1.0) * 0.5 * width;
                s += wt * horner(fp, df + u) * horner(gp, dg + u);
            }
            total += s * width * 0.5;
        }
        total
    }

    /// Exact `∫ x^m f(x) dx`.
    pub fn moment(&self, m: usize) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let k = self.knots[i].value();
            let width = self.knots[i + 1].diff_value(&self.knots[i]);
            let deg = m + p.len() - 1;
            let rule = gauss_legendre(deg / 2 + 1);
            let mut s = 0.0;
            for &(t, wt) in rule.iter() {
                let u = (t + 1.0) * 0.5 * width;
                s += wt * (k + u).powi(m as i32) * horner(p, u);
            }
            total += s * width * 0.5;
        }
        total
    }

    /// Exact `∫_a^b f(x) dx` (clamped to the support).
    pub fn integral_over(&self, a: DyadicRational, b: DyadicRational) -> f64 {
        let Some((s0, s1)) = self.support() else {
            return 0.0;
        };
        let lo = a.max(s0);
        let hi = b.min(s1);
        if lo >= hi {
            return 0.0;
        }
        let mut set: BTreeSet<DyadicRational> = BTreeSet::new();
        set.insert(lo);
        set.insert(hi);
        for k in &self.knots {
            if *k > lo && *k < hi {
                set.insert(*k);
            }
        }
        let grid: Vec<DyadicRational> = set.into_iter().collect();
        let mut total = 0.0;
        for w in grid.windows(2) {
            let Some(fi) = self.piece_index_dyadic(&w[0]) else {
                continue;
            };
            let p = &self.pieces[fi];
            let df = w[0].diff_value(&self.knots[fi]);
            let width = w[1].diff_value(&w[0]);
            let rule = gauss_legendre((p.len() - 1) / 2 + 1);
            let mut s = 0.0;
            for &(t, wt) in rule.iter() {
                s += wt * horner(p, df + (t + 1.0) * 0.5 * width);
            }
            total += s * width * 0.5;
        }
        total
    }

    /// Max of `|f - g|` over a Chebyshev grid on each merged piece.
    /// Reports exact 0 when the combined coefficient vectors agree within
    /// `1e-14` relative.
    pub fn sup_distance(f: &Self, g: &Self, samples_per_piece: usize) -> f64 {
        let diff = Self::linear_combine(&[(1.0, f), (-1.0, g)]);
        if diff.is_zero() {
            return 0.0;
        }
        let scale = f.max_abs_coeff().max(g.max_abs_coeff());
        if diff.max_abs_coeff() <= COEFF_MATCH_REL_TOL * scale {
            return 0.0;
        }
        let m = samples_per_piece.max(diff.degree() + 1);
        let mut worst = 0.0f64;
        for (i, p) in diff.pieces.iter().enumerate() {
            let width = diff.knots[i + 1].diff_value(&diff.knots[i]);
            for j in 0..m {
                let t = (std::f64::consts::PI * (2.0 * j as f64 + 1.0) / (2.0 * m as f64)).cos();
                let u = (t + 1.0) * 0.5 * width;
                worst = worst.max(horner(p, u).abs());
            }
        }
        worst
    }
}

impl Serialize for PiecewisePolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("PiecewisePolynomial", 2)?;
        st.serialize_field("knots", &self.knots)?;
        st.serialize_field("pieces", &self.pieces)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for PiecewisePolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            knots: Vec<DyadicRational>,
            pieces: Vec<Vec<f64>>,
        }
        let raw = Raw::deserialize(deserializer)?;
        PiecewisePolynomial::new(raw.knots, raw.pieces).map_err(serde::de::Error::custom)
    }
}
