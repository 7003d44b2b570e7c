//! Scaling functions and wavelets as truncated B-spline translate series.
//!
//! For a sign choice (all `+` or all `-`) and a t-choice `t_j = r_j` or
//! `1/r_j` per factor, the scaling function is a geometric series of
//! integer translates of `B_n` and the wavelet is a double geometric
//! series of half-integer translates of `B_n(2.)` against a finite inner
//! coefficient vector of length `2n + 2`. Truncation is per geometric
//! factor with explicit discarded-mass bookkeeping, so tail bounds are
//! provable rather than observed.

use crate::bspline::{binomial, bspline, BSplineOrder};
use crate::dyadic::DyadicRational;
use crate::euler_frobenius::{constants, EulerFrobeniusData, TFlag};
use crate::piecewise::PiecewisePolynomial;
use crate::series::TranslateSeries;
use crate::{exec, Error, Result};

/// The global sign convention: either all `+` or all `-`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub(crate) fn sigma(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Selects one member of the `2^n x 2` family: order, sign, t-choice and
/// an optional whole-function recentering shift.
#[derive(Clone, Debug)]
pub struct WaveletSpec {
    pub n: usize,
    pub sign: Sign,
    pub tchoice: Vec<TFlag>,
    /// Extra dyadic shift: the built function is `raw(x - centering)`.
    pub centering: DyadicRational,
}

impl WaveletSpec {
    pub fn new(n: usize, sign: Sign, tchoice: Vec<TFlag>) -> Result<Self> {
        BSplineOrder::new(n)?;
        if tchoice.len() != n {
            return Err(Error::TChoiceLength {
                got: tchoice.len(),
                expected: n,
            });
        }
        Ok(WaveletSpec {
            n,
            sign,
            tchoice,
            centering: DyadicRational::zero(),
        })
    }

    pub fn all_r(n: usize, sign: Sign) -> Result<Self> {
        Self::new(n, sign, vec![TFlag::UseR; n])
    }

    pub fn with_centering(mut self, centering: DyadicRational) -> Self {
        self.centering = centering;
        self
    }

    /// Cardinality of the index set using `1/r`.
    pub fn c_invr(&self) -> usize {
        self.tchoice
            .iter()
            .filter(|f| **f == TFlag::UseInvR)
            .count()
    }

    pub fn c_r(&self) -> usize {
        self.n - self.c_invr()
    }

    /// Recentering that strips the `c_{1/r}` lattice offset from the
    /// scaling function, as the localisation theorem assumes.
    pub fn localisation_phi_centering(&self) -> DyadicRational {
        DyadicRational::integer(-self.sign.sigma() * self.c_invr() as i64)
    }

    /// Recentering for the wavelet, half as large and opposite.
    pub fn localisation_psi_centering(&self) -> DyadicRational {
        DyadicRational::new(self.sign.sigma() * self.c_invr() as i64, 1)
    }
}

/// Spikes on the integer lattice; the building block of the series
/// assembly via sequential convolution.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    pub(crate) lo: i64,
    pub(crate) w: Vec<f64>,
}

impl Lattice {
    fn delta(weight: f64) -> Self {
        Lattice {
            lo: 0,
            w: vec![weight],
        }
    }

    /// `sum_{m=0}^{count-1} ratio^m` at positions `stride * m`.
    fn geometric(ratio: f64, count: usize, stride: i64) -> Self {
        let mut w = Vec::with_capacity(count);
        let mut cur = 1.0;
        for _ in 0..count {
            w.push(cur);
            cur *= ratio;
        }
        if stride >= 0 {
            Lattice {
                lo: 0,
                w: spread(&w, stride as usize),
            }
        } else {
            let mut rev: Vec<f64> = w.into_iter().rev().collect();
            let spreadw = spread(&rev, (-stride) as usize);
            rev = spreadw;
            Lattice {
                lo: stride * (count as i64 - 1),
                w: rev,
            }
        }
    }

    fn convolve(&self, other: &Lattice) -> Lattice {
        let mut w = vec![0.0; self.w.len() + other.w.len() - 1];
        for (i, &a) in self.w.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.w.iter().enumerate() {
                w[i + j] += a * b;
            }
        }
        Lattice {
            lo: self.lo + other.lo,
            w,
        }
    }

    fn scaled(mut self, c: f64) -> Lattice {
        for v in &mut self.w {
            *v *= c;
        }
        self
    }
}

/// Insert `gap - 1` zeros between consecutive entries.
fn spread(w: &[f64], gap: usize) -> Vec<f64> {
    if gap <= 1 || w.len() <= 1 {
        return w.to_vec();
    }
    let mut out = vec![0.0; (w.len() - 1) * gap + 1];
    for (i, &v) in w.iter().enumerate() {
        out[i * gap] = v;
    }
    out
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(())
}

/// Number of kept powers of `r`: smallest `L` with `r^L <= epsilon`.
fn truncation_len(r: f64, epsilon: f64) -> usize {
    (epsilon.ln() / r.ln()).ceil().max(0.0) as usize
}

/// The scaling function `phi_n` as a weighted sum of `B_n(x - k)`.
///
/// Weights are `beta_n` times products of per-factor geometric weights
/// `(-r_j)^{l_j}`; orientation follows the sign and the t-choice, and the
/// `c_{1/r}` lattice offset of the general construction is included (use
/// the localisation centering to strip it).
pub fn phi_series(spec: &WaveletSpec, epsilon: f64) -> Result<TranslateSeries> {
    check_epsilon(epsilon)?;
    let data = EulerFrobeniusData::compute(spec.n)?;
    let sigma = spec.sign.sigma();
    let mut lat = Lattice::delta(data.beta);
    let mut full_mass = 1.0;
    let mut kept_mass = 1.0;
    for (j, flag) in spec.tchoice.iter().enumerate() {
        let r = data.rs[j];
        let len = truncation_len(r, epsilon) + 1;
        let stride = match flag {
            TFlag::UseR => -sigma,
            TFlag::UseInvR => sigma,
        };
        lat = lat.convolve(&Lattice::geometric(-r, len, stride));
        full_mass /= 1.0 - r;
        kept_mass *= (1.0 - r.powi(len as i32)) / (1.0 - r);
    }
    let offset = DyadicRational::integer(sigma * spec.c_invr() as i64) + spec.centering.mul_pow2(0);
    let mut series = TranslateSeries::new(spec.n, 0, epsilon);
    for (i, &w) in lat.w.iter().enumerate() {
        if w != 0.0 {
            series.accumulate(DyadicRational::integer(lat.lo + i as i64) + offset, w);
        }
    }
    series.set_tail_l1_bound(data.beta * (full_mass - kept_mass));
    Ok(series)
}

/// The finite inner coefficient vector of the wavelet: the product of the
/// alternating binomial vector with the expansion of
/// `prod_j (e^{∓ i omega/2} - 1/t_j)`, on the half-integer lattice.
/// Returned as spikes indexed by series key (key = minus the `v`-power).
pub(crate) fn psi_inner_lattice(n: usize, sign: Sign, inv_ts: &[f64]) -> Lattice {
    let sigma = sign.sigma();
    // (-1)^n prod (1/t_j - v^{-sigma}) as a lattice over v-powers
    let mut prod = Lattice::delta(if n.is_multiple_of(2) { 1.0 } else { -1.0 });
    for &it in inv_ts {
        let factor = if sigma > 0 {
            Lattice {
                lo: -1,
                w: vec![-1.0, it],
            }
        } else {
            Lattice {
                lo: 0,
                w: vec![it, -1.0],
            }
        };
        prod = prod.convolve(&factor);
    }
    let mut binom = Lattice {
        lo: -1,
        w: vec![0.0; n + 2],
    };
    for k in 0..=(n + 1) {
        // v-power n - k, ascending storage from power -1
        let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
        binom.w[n + 1 - k] = sign_k * binomial(n + 1, k);
    }
    let in_powers = prod.convolve(&binom);
    // keys are the negated v-powers
    let mut w: Vec<f64> = in_powers.w.iter().rev().copied().collect();
    let hi = in_powers.lo + in_powers.w.len() as i64 - 1;

    Lattice {
        lo: -hi,
        w: std::mem::take(&mut w),
    }
}

/// The wavelet `psi_{t_1..t_n}` as a weighted sum of `B_n(2x - k)`.
pub fn psi_series(spec: &WaveletSpec, epsilon: f64) -> Result<TranslateSeries> {
    check_epsilon(epsilon)?;
    let data = EulerFrobeniusData::compute(spec.n)?;
    let consts = constants(&data, &spec.tchoice)?;
    let sigma = spec.sign.sigma();
    let ts = data.t_values(&spec.tchoice)?;
    let inv_ts: Vec<f64> = ts.iter().map(|t| 1.0 / t).collect();

    let mut lat = psi_inner_lattice(spec.n, spec.sign, &inv_ts).scaled(consts.gamma);
    let inner_l1: f64 = lat.w.iter().map(|w| w.abs()).sum();
    let mut full_mass = 1.0;
    let mut kept_mass = 1.0;
    for (j, flag) in spec.tchoice.iter().enumerate() {
        let r = data.rs[j];
        let len = truncation_len(r, epsilon) + 1;
        let (stride_m, stride_l) = match flag {
            TFlag::UseR => (2 * sigma, -sigma),
            TFlag::UseInvR => (-2 * sigma, sigma),
        };
        lat = lat.convolve(&Lattice::geometric(-r, len, stride_m));
        lat = lat.convolve(&Lattice::geometric(-r, len, stride_l));
        let kept = (1.0 - r.powi(len as i32)) / (1.0 - r);
        full_mass /= (1.0 - r) * (1.0 - r);
        kept_mass *= kept * kept;
    }

    let offset =
        DyadicRational::integer(-sigma * spec.c_invr() as i64) + spec.centering.mul_pow2(1);
    let mut series = TranslateSeries::new(spec.n, 1, epsilon);
    for (i, &w) in lat.w.iter().enumerate() {
        if w != 0.0 {
            series.accumulate(DyadicRational::integer(lat.lo + i as i64) + offset, w);
        }
    }
    series.set_tail_l1_bound(inner_l1 * (full_mass - kept_mass));
    Ok(series)
}

/// Materialize a series on a window; returns the polynomial and the weight
/// mass of terms discarded outside the window.
pub fn series_to_polynomial(
    s: &TranslateSeries,
    window: (DyadicRational, DyadicRational),
) -> (PiecewisePolynomial, f64) {
    s.materialize(Some(window))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GramSystem {
    /// `<phi(.-k), phi(.-m)>`, expected close to the identity
    Phi,
    /// `<psi(.-k), psi(.-m)>`, expected close to the identity
    Psi,
    /// `[ <phi(.-k), psi(.-m)> | <psi(.-k), psi(2.-m)> ]`, expected close to 0
    Cross,
}

#[derive(Clone, Debug)]
pub struct GramMatrix {
    pub system: GramSystem,
    pub shift_range: i64,
    pub rows: Vec<Vec<f64>>,
}

impl GramMatrix {
    /// Max of `|G - I|` over the square layout.
    pub fn max_dev_identity(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter())
            .fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Gram matrix of translated systems over shifts `|k| <= shift_range`,
/// computed by exact piecewise inner products of the truncated series.
pub fn gram_matrix(
    system: GramSystem,
    spec: &WaveletSpec,
    shift_range: i64,
    epsilon: f64,
) -> Result<GramMatrix> {
    assert!(shift_range >= 1);
    let size = (2 * shift_range + 1) as usize;
    let rows = match system {
        GramSystem::Phi | GramSystem::Psi => {
            let s = match system {
                GramSystem::Phi => phi_series(spec, epsilon)?,
                _ => psi_series(spec, epsilon)?,
            };
            // G(k, m) depends on m - k only
            let offsets: Vec<i64> = (0..=2 * shift_range).collect();
            let g: Vec<f64> = exec::map_collect(&offsets, |&j| {
                s.series_inner(&s.translated_by(DyadicRational::integer(j)))
            });
            (0..size)
                .map(|i| {
                    (0..size)
                        .map(|j| g[(j as i64 - i as i64).unsigned_abs() as usize])
                        .collect()
                })
                .collect()
        }
        GramSystem::Cross => {
            let phi = phi_series(spec, epsilon)?;
            let psi = psi_series(spec, epsilon)?;
            let offsets: Vec<i64> = (-2 * shift_range..=2 * shift_range).collect();
            let a: Vec<f64> = exec::map_collect(&offsets, |&j| {
                phi.series_inner(&psi.translated_by(DyadicRational::integer(j)))
            });
            let psi_next = psi.dilated_outer(1);
            let offsets_b: Vec<i64> = (-3 * shift_range..=3 * shift_range).collect();
            let b: Vec<f64> = exec::map_collect(&offsets_b, |&c| {
                psi.series_inner(&psi_next.translated_by(DyadicRational::half(c)))
            });
            (0..size)
                .map(|i| {
                    let k = i as i64 - shift_range;
                    let mut row: Vec<f64> = (0..size)
                        .map(|j| {
                            let m = j as i64 - shift_range;
                            a[(m - k + 2 * shift_range) as usize]
                        })
                        .collect();
                    row.extend((0..size).map(|j| {
                        let m = j as i64 - shift_range;
                        b[(m - 2 * k + 3 * shift_range) as usize]
                    }));
                    row
                })
                .collect()
        }
    };
    Ok(GramMatrix {
        system,
        shift_range,
        rows,
    })
}

/// Moments `∫ x^m psi(x) dx` for `m = 0..=n`, computed exactly on the
/// truncated series; each should vanish up to the truncation tail.
pub fn vanishing_moments(spec: &WaveletSpec, epsilon: f64) -> Result<Vec<f64>> {
    let psi = psi_series(spec, epsilon)?;
    let b = bspline(spec.n);
    let mu: Vec<f64> = (0..=spec.n).map(|i| b.moment(i)).collect();
    let d = psi.log2_dilation();
    let mut out = Vec::with_capacity(spec.n + 1);
    for m in 0..=spec.n {
        let mut acc = 0.0;
        for (&k, &w) in psi.terms() {
            let kv = k.value();
            let mut inner = 0.0;
            for (i, mui) in mu.iter().enumerate().take(m + 1) {
                inner += binomial(m, i) * kv.powi((m - i) as i32) * mui;
            }
            acc += w * inner;
        }
        out.push(acc * (-(d as f64) * (m as f64 + 1.0)).exp2());
    }
    Ok(out)
}

/// Empirical coefficient decay: envelope fit of `ln |weight|` against the
/// shift distance from the series center, in `x` units.
#[derive(Clone, Copy, Debug)]
pub struct DecayCheck {
    pub rate: f64,
    pub ok: bool,
}

pub fn decay_check(s: &TranslateSeries) -> Result<DecayCheck> {
    assert!(!s.is_empty(), "decay_check requires a nonempty series");
    let data = EulerFrobeniusData::compute(s.base())?;
    let r_max = data.rs.iter().copied().fold(0.0f64, f64::max);
    let scale = (-(s.log2_dilation() as f64)).exp2();
    let (center, _) = s
        .terms()
        .iter()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .map(|(&k, &w)| (k.value() * scale, w))
        .unwrap();
    // envelope: max |w| per integer distance bucket; weights below the
    // per-factor truncation floor are corner artifacts, not tail samples
    let floor = s.epsilon() * s.max_abs_weight();
    let mut buckets: std::collections::BTreeMap<i64, f64> = std::collections::BTreeMap::new();
    for (&k, &w) in s.terms() {
        if w.abs() < floor {
            continue;
        }
        let d = ((k.value() * scale - center).abs()).round() as i64;
        let e = buckets.entry(d).or_insert(0.0);
        *e = e.max(w.abs());
    }
    let pts: Vec<(f64, f64)> = buckets
        .iter()
        .filter(|(&d, &w)| d >= 2 && w > 0.0)
        .map(|(&d, &w)| (d as f64, w.ln()))
        .collect();
    if pts.len() < 3 {
        return Ok(DecayCheck {
            rate: f64::INFINITY,
            ok: true,
        });
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let rate = -slope;
    let ok = r_max == 0.0 || rate >= 0.99 * (-r_max.ln());
    Ok(DecayCheck { rate, ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ef(n: usize) -> std::sync::Arc<EulerFrobeniusData> {
        EulerFrobeniusData::compute(n).unwrap()
    }

    #[test]
    fn phi_order_one_right_tail() {
        // phi_1^-(x) = 2 sqrt(alpha_1 r_1) sum_{l>=0} (-r_1)^l B_1(x - l)
        let spec = WaveletSpec::all_r(1, Sign::Minus).unwrap();
        let s = phi_series(&spec, 1e-12).unwrap();
        let data = ef(1);
        let amp = 2.0 * (data.alphas[0] * data.rs[0]).sqrt();
        for l in 0..10i64 {
            let expect = amp * (-data.rs[0]).powi(l as i32);
            assert_abs_diff_eq!(
                s.weight_at(DyadicRational::integer(l)),
                expect,
                epsilon = 1e-13
            );
        }
        assert_eq!(s.weight_at(DyadicRational::integer(-1)), 0.0);
        // expected term count: smallest L with r^L <= eps, plus the l = 0 term
        let l_cut = (1e-12f64.ln() / data.rs[0].ln()).ceil() as usize;
        assert_eq!(s.len(), l_cut + 1);
    }

    #[test]
    fn phi_order_one_left_tail_is_mirror() {
        let minus = phi_series(&WaveletSpec::all_r(1, Sign::Minus).unwrap(), 1e-12).unwrap();
        let plus = phi_series(&WaveletSpec::all_r(1, Sign::Plus).unwrap(), 1e-12).unwrap();
        for (k, w) in minus.terms() {
            assert_abs_diff_eq!(plus.weight_at(-*k), *w, epsilon = 1e-15);
        }
    }

    #[test]
    fn phi_inv_r_is_shifted_opposite_sign() {
        // all-UseInvR with one sign equals all-UseR with the opposite sign,
        // shifted by c_{1/r} = n
        for n in [1usize, 2] {
            for sign in [Sign::Plus, Sign::Minus] {
                let inv = phi_series(
                    &WaveletSpec::new(n, sign, vec![TFlag::UseInvR; n]).unwrap(),
                    1e-10,
                )
                .unwrap();
                let base =
                    phi_series(&WaveletSpec::all_r(n, sign.flipped()).unwrap(), 1e-10).unwrap();
                let shift = DyadicRational::integer(sign.sigma() * n as i64);
                for (&k, &w) in base.terms() {
                    assert_abs_diff_eq!(inv.weight_at(k + shift), w, epsilon = 1e-14);
                }
                assert_eq!(inv.len(), base.len());
            }
        }
    }

    #[test]
    fn phi_translates_are_orthonormal_order_one() {
        let spec = WaveletSpec::all_r(1, Sign::Minus).unwrap();
        let s = phi_series(&spec, 1e-12).unwrap();
        let g0 = s.series_inner(&s);
        let g1 = s.series_inner(&s.translated_by(DyadicRational::integer(1)));
        assert_abs_diff_eq!(g0, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g1, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn psi_inner_vector_order_one() {
        // matches the explicit order-1 display up to the global (-1)^n of
        // the general formula: [1/r, -(1+2/r), (2+1/r), -1] on descending
        // v-powers 1..-2, i.e. keys -1..2 after negation
        let data = ef(1);
        let r = data.rs[0];
        let lat = psi_inner_lattice(1, Sign::Plus, &[1.0 / r]);
        assert_eq!(lat.lo, -1);
        let expected = [1.0 / r, -(1.0 + 2.0 / r), 2.0 + 1.0 / r, -1.0];
        for (i, &e) in expected.iter().enumerate() {
            // stored keys ascend: key -1 holds the v^1 coefficient
            assert_abs_diff_eq!(lat.w[i], -e, epsilon = 1e-12);
        }
    }

    #[test]
    fn psi_inner_vector_order_two_matches_example() {
        // the worked order-2 example: coefficients on v-powers 2..-3
        let data = ef(2);
        let (r1, r2) = (data.rs[0], data.rs[1]);
        let lat = psi_inner_lattice(2, Sign::Plus, &[1.0 / r1, 1.0 / r2]);
        let s = 1.0 / r1 + 1.0 / r2;
        let p = 1.0 / (r1 * r2);
        let expected_desc = [
            p,
            -(s + 3.0 * p),
            1.0 + 3.0 * s + 3.0 * p,
            -(3.0 + 3.0 * s + p),
            3.0 + s,
            -1.0,
        ];
        assert_eq!(lat.lo, -2);
        assert_eq!(lat.w.len(), 6);
        for (i, &e) in expected_desc.iter().enumerate() {
            assert_abs_diff_eq!(lat.w[i], e, epsilon = 1e-10);
        }
        // alternating signs, and the plain binomial sum inside is zero
        for w in lat.w.windows(2) {
            assert!(w[0] * w[1] < 0.0);
        }
        let total: f64 = lat.w.iter().sum();
        assert_abs_diff_eq!(total, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn psi_translates_are_orthonormal() {
        for n in [1usize, 2] {
            let spec = WaveletSpec::all_r(n, Sign::Plus).unwrap();
            let s = psi_series(&spec, 1e-10).unwrap();
            assert_abs_diff_eq!(s.series_inner(&s), 1.0, epsilon = 1e-7);
            for j in 1..=3i64 {
                assert_abs_diff_eq!(
                    s.series_inner(&s.translated_by(DyadicRational::integer(j))),
                    0.0,
                    epsilon = 1e-7
                );
            }
        }
    }

    #[test]
    fn haar_case_is_exact() {
        let spec = WaveletSpec::all_r(0, Sign::Plus).unwrap();
        let g = gram_matrix(GramSystem::Psi, &spec, 2, 1e-10).unwrap();
        assert!(g.max_dev_identity() <= 1e-14);
        let phi = phi_series(&spec, 1e-10).unwrap();
        assert_eq!(phi.len(), 1);
        assert_abs_diff_eq!(phi.weight_at(DyadicRational::zero()), 1.0);
        let psi = psi_series(&spec, 1e-10).unwrap();
        let (p, _) = psi.materialize(None);
        // the Haar wavelet takes values +-1 on half-unit intervals
        assert_abs_diff_eq!(p.evaluate(0.25).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.evaluate(0.75).abs(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.evaluate(0.25) + p.evaluate(0.75), 0.0, epsilon = 1e-14);
        let m = vanishing_moments(&spec, 1e-10).unwrap();
        assert_eq!(m.len(), 1);
        assert_abs_diff_eq!(m[0], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn gram_deviation_shrinks_with_epsilon() {
        let spec = WaveletSpec::all_r(1, Sign::Minus).unwrap();
        let loose = gram_matrix(GramSystem::Phi, &spec, 4, 1e-8)
            .unwrap()
            .max_dev_identity();
        let tight = gram_matrix(GramSystem::Phi, &spec, 4, 1e-12)
            .unwrap()
            .max_dev_identity();
        assert!(tight <= loose, "{tight} vs {loose}");
    }

    #[test]
    fn cross_system_nearly_vanishes() {
        let spec = WaveletSpec::all_r(1, Sign::Minus).unwrap();
        let g = gram_matrix(GramSystem::Cross, &spec, 4, 1e-10).unwrap();
        assert!(g.max_abs() <= 1e-6, "{}", g.max_abs());
    }

    #[test]
    fn vanishing_moments_small_orders() {
        let m1 = vanishing_moments(&WaveletSpec::all_r(1, Sign::Plus).unwrap(), 1e-12).unwrap();
        for v in &m1 {
            assert!(v.abs() <= 1e-8, "{m1:?}");
        }
        let m2 = vanishing_moments(&WaveletSpec::all_r(2, Sign::Plus).unwrap(), 1e-12).unwrap();
        for v in &m2 {
            assert!(v.abs() <= 1e-7, "{m2:?}");
        }
    }

    #[test]
    fn decay_rates_match_slowest_factor() {
        let s1 = phi_series(&WaveletSpec::all_r(1, Sign::Minus).unwrap(), 1e-12).unwrap();
        let d1 = decay_check(&s1).unwrap();
        assert!(d1.ok);
        assert_abs_diff_eq!(d1.rate, -(2.0 - 3f64.sqrt()).ln(), epsilon = 1e-6);

        let s2 = phi_series(&WaveletSpec::all_r(2, Sign::Minus).unwrap(), 1e-12).unwrap();
        let d2 = decay_check(&s2).unwrap();
        assert!(d2.ok);
        assert!((d2.rate - 0.8425).abs() < 5e-3, "{}", d2.rate);

        let mut single = TranslateSeries::new(1, 0, 1e-10);
        single.accumulate(DyadicRational::zero(), 1.0);
        assert!(decay_check(&single).unwrap().ok);
    }

    #[test]
    fn epsilon_validation() {
        let spec = WaveletSpec::all_r(1, Sign::Plus).unwrap();
        assert!(matches!(
            phi_series(&spec, 0.0),
            Err(Error::EpsilonOutOfRange(_))
        ));
        assert!(matches!(
            psi_series(&spec, 1.5),
            Err(Error::EpsilonOutOfRange(_))
        ));
    }

    #[test]
    fn refinement_consistency() {
        // the phi series re-expressed on the next-finer B-spline lattice via
        // the two-scale weights reproduces the same function
        let spec = WaveletSpec::all_r(2, Sign::Minus).unwrap();
        let s = phi_series(&spec, 1e-10).unwrap();
        let refined = s.refine_to_next_dilation();
        let (a, _) = s.materialize(None);
        let (b, _) = refined.materialize(None);
        assert!(PiecewisePolynomial::sup_distance(&a, &b, 8) <= 1e-8);
    }
}
