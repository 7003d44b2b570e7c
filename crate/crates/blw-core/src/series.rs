//! Weighted sums of translates/dilates of one B-spline.
//!
//! `TranslateSeries` is the canonical in-memory form of every scaling
//! function, wavelet and localised sum: `f(x) = sum_k w_k B_n(2^d x - k)`
//! with dyadic shifts `k`. All the shift-operator algebra of the
//! localisation theorem runs on these weight maps; materialization to a
//! [`PiecewisePolynomial`] happens once at the end, so cancellation is
//! exact up to the float tail and tests measure truncation only.

use crate::bspline::bspline;
use crate::dyadic::DyadicRational;
use crate::piecewise::PiecewisePolynomial;
use crate::{Error, Result};
use serde::de::Error as DeError;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::collections::{BTreeMap, HashMap};

#[derive(Clone, Debug)]
pub struct TranslateSeries {
    base: usize,
    log2_dilation: i32,
    terms: BTreeMap<DyadicRational, f64>,
    epsilon: f64,
    tail_l1_bound: f64,
}

impl TranslateSeries {
    pub fn new(base: usize, log2_dilation: i32, epsilon: f64) -> Self {
        TranslateSeries {
            base,
            log2_dilation,
            terms: BTreeMap::new(),
            epsilon,
            tail_l1_bound: 0.0,
        }
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn log2_dilation(&self) -> i32 {
        self.log2_dilation
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Upper bound on the l1 weight mass discarded by truncation.
    pub fn tail_l1_bound(&self) -> f64 {
        self.tail_l1_bound
    }

    pub fn set_tail_l1_bound(&mut self, bound: f64) {
        self.tail_l1_bound = bound;
    }

    pub fn terms(&self) -> &BTreeMap<DyadicRational, f64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn weight_at(&self, key: DyadicRational) -> f64 {
        self.terms.get(&key).copied().unwrap_or(0.0)
    }

    pub fn accumulate(&mut self, key: DyadicRational, w: f64) {
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += w;
        if *entry == 0.0 {
            self.terms.remove(&key);
        }
    }

    pub fn max_abs_weight(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, &w| m.max(w.abs()))
    }

    pub fn l1_mass(&self) -> f64 {
        self.terms.values().map(|w| w.abs()).sum()
    }

    /// Drop stored weights below `threshold` in magnitude, adding their
    /// mass to the tail bound.
    pub fn prune(&mut self, threshold: f64) {
        let mut dropped = 0.0;
        self.terms.retain(|_, w| {
            if w.abs() < threshold {
                dropped += w.abs();
                false
            } else {
                true
            }
        });
        self.tail_l1_bound += dropped;
    }

    /// `f(x - s)`: shifts every key by `2^d s` exactly.
    pub fn translated_by(&self, s: DyadicRational) -> Self {
        let offset = s.mul_pow2(self.log2_dilation);
        let terms = self.terms.iter().map(|(&k, &w)| (k + offset, w)).collect();
        TranslateSeries {
            terms,
            ..self.clone()
        }
    }

    /// `f(2^e x)`: raises the dilation level, keys unchanged.
    pub fn dilated_outer(&self, e: i32) -> Self {
        TranslateSeries {
            log2_dilation: self.log2_dilation + e,
            ..self.clone()
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let terms = self.terms.iter().map(|(&k, &w)| (k, c * w)).collect();
        TranslateSeries {
            terms,
            tail_l1_bound: self.tail_l1_bound * c.abs(),
            ..self.clone()
        }
    }

    /// `self += c * other`; bases and dilations must agree.
    pub fn add_scaled(&mut self, other: &Self, c: f64) -> Result<()> {
        if self.base != other.base || self.log2_dilation != other.log2_dilation {
            return Err(Error::SeriesMismatch);
        }
        for (&k, &w) in &other.terms {
            self.accumulate(k, c * w);
        }
        self.tail_l1_bound += c.abs() * other.tail_l1_bound;
        self.epsilon = self.epsilon.max(other.epsilon);
        Ok(())
    }

    /// Pointwise value `sum_k w_k B_n(2^d x - k)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let b = bspline(self.base);
        let y = (self.log2_dilation as f64).exp2() * x;
        let width = self.base as f64 + 1.0;
        let mut acc = 0.0;
        for (&k, &w) in &self.terms {
            let u = y - k.value();
            if u >= 0.0 && u < width {
                acc += w * b.evaluate(u);
            }
        }
        acc
    }

    /// Support interval of all kept terms in `x` units.
    pub fn support(&self) -> Option<(DyadicRational, DyadicRational)> {
        let first = *self.terms.keys().next()?;
        let last = *self.terms.keys().last()?;
        let lo = first.mul_pow2(-self.log2_dilation);
        let hi =
            (last + DyadicRational::integer(self.base as i64 + 1)).mul_pow2(-self.log2_dilation);
        Some((lo, hi))
    }

    /// Materialize `sum w_k B(2^d . - k)` on a window (or everywhere);
    /// returns the polynomial and the absolute weight mass of terms whose
    /// support misses the window.
    pub fn materialize(
        &self,
        window: Option<(DyadicRational, DyadicRational)>,
    ) -> (PiecewisePolynomial, f64) {
        let b = bspline(self.base);
        let width = DyadicRational::integer(self.base as i64 + 1);
        let mut discarded = 0.0;
        let mut kept: Vec<(f64, PiecewisePolynomial)> = Vec::new();
        for (&k, &w) in &self.terms {
            let lo = k.mul_pow2(-self.log2_dilation);
            let hi = (k + width).mul_pow2(-self.log2_dilation);
            if let Some((a, bnd)) = window {
                if hi <= a || lo >= bnd {
                    discarded += w.abs();
                    continue;
                }
            }
            kept.push((w, b.translate_dilate(k, self.log2_dilation)));
        }
        let refs: Vec<(f64, &PiecewisePolynomial)> = kept.iter().map(|(w, p)| (*w, p)).collect();
        (PiecewisePolynomial::linear_combine(&refs), discarded)
    }

    /// Re-express every translate on the next-finer lattice through the
    /// two-scale weights; the represented function is unchanged.
    pub fn refine_to_next_dilation(&self) -> Self {
        let ts = crate::bspline::two_scale_expand(self.base);
        let mut out = TranslateSeries::new(self.base, self.log2_dilation + 1, self.epsilon);
        for (&k, &w) in &self.terms {
            let k2 = k.mul_pow2(1);
            for &(j, c) in &ts {
                out.accumulate(k2 + DyadicRational::integer(j), w * c);
            }
        }
        // the two-scale weights carry l1 mass 2
        out.tail_l1_bound = self.tail_l1_bound * 2.0;
        out
    }

    /// Exact `<self, other>` for dilation levels differing by at most one,
    /// via cached B-spline pair integrals.
    pub fn series_inner(&self, other: &Self) -> f64 {
        let (a, b) = if self.log2_dilation <= other.log2_dilation {
            (self, other)
        } else {
            (other, self)
        };
        let e = b.log2_dilation - a.log2_dilation;
        assert!(e <= 1, "series_inner supports dilation gaps 0 and 1");
        assert_eq!(a.base, b.base, "series_inner requires a common base order");
        let n = a.base as i64;
        let scale = (-(a.log2_dilation as f64)).exp2();
        // the distinct key offsets form a tiny set; memoize locally so the
        // double loop stays lock-free under rayon
        let mut local: HashMap<DyadicRational, f64> = HashMap::new();
        let mut total = 0.0;
        for (&k1, &w1) in &a.terms {
            let center = k1.mul_pow2(e);
            let lo = center - DyadicRational::integer(n + 1);
            let hi = center + DyadicRational::integer((n + 1) << e);
            let mut partial = 0.0;
            for (&k2, &w2) in b.terms.range(lo..=hi) {
                let c = k2 - center;
                let x = *local
                    .entry(c)
                    .or_insert_with(|| bspline_pair_integral(a.base, e, c));
                partial += w2 * x;
            }
            total += w1 * partial;
        }
        total * scale
    }
}

/// `X_e(c) = ∫ B_n(u) B_n(2^e u - c) du`.
fn bspline_pair_integral(n: usize, e: i32, c: DyadicRational) -> f64 {
    let b = bspline(n);
    b.inner_product(&b.translate_dilate(c, e))
}

impl Serialize for TranslateSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<((i64, u32), f64)> = self
            .terms
            .iter()
            .map(|(&k, &w)| ((k.numerator(), k.scale()), w))
            .collect();
        let mut st = serializer.serialize_struct("TranslateSeries", 5)?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("log2_dilation", &self.log2_dilation)?;
        st.serialize_field("epsilon", &self.epsilon)?;
        st.serialize_field("tail_l1_bound", &self.tail_l1_bound)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

impl<'de> Deserialize<'de> for TranslateSeries {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            base: usize,
            log2_dilation: i32,
            epsilon: f64,
            #[serde(default)]
            tail_l1_bound: f64,
            terms: Vec<((i64, u32), f64)>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let mut s = TranslateSeries::new(raw.base, raw.log2_dilation, raw.epsilon);
        s.tail_l1_bound = raw.tail_l1_bound;
        for ((num, sc), w) in raw.terms {
            if !w.is_finite() {
                return Err(D::Error::custom("non-finite series weight"));
            }
            s.accumulate(DyadicRational::new(num, sc), w);
        }
        Ok(s)
    }
}
