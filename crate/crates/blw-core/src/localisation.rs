//! Shift operators and the compactly supported wavelet sums.
//!
//! The two-tap operators `(S^{step} F)(x) = F(x) + r F(x + step)` multiply
//! the series transform by `(1 + r e^{-i step omega})` and so annihilate
//! the matching geometric tails. Composing one pair per factor collapses
//! the scaling function to `Phi_n = beta_n B_n` and, after the pairwise
//! square-root combination of all `2^n` t-choices, collapses the wavelets
//! to `Psi_n`, a constant times the `(n+1)`-th derivative of
//! `B_{2n+1}(2x + n)` supported on `[-n/2, n/2 + 1]`.

use crate::bspline::{binomial, bspline, high_order_derivative};
use crate::dyadic::DyadicRational;
use crate::euler_frobenius::{constants, EulerFrobeniusData, TFlag};
use crate::piecewise::PiecewisePolynomial;
use crate::series::TranslateSeries;
use crate::wavelet::{phi_series, psi_series, Sign, WaveletSpec};
use crate::{exec, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    /// acts on an index in `J_r`
    S,
    /// acts on an index in `J_{1/r}`
    R,
}

/// One two-tap shift operator. `step` is the signed offset in
/// `F(x) + r_{index} F(x + step)`; the theorem uses steps `+-1` and `+-1/2`.
#[derive(Clone, Copy, Debug)]
pub struct ShiftOperatorSpec {
    pub kind: OpKind,
    /// 0-based index into the factor list of the series' order.
    pub index: usize,
    pub step: DyadicRational,
}

/// `F + r F(. + step)` as exact weight-map algebra.
pub fn apply_shift_op(
    op: &ShiftOperatorSpec,
    data: &EulerFrobeniusData,
    s: &TranslateSeries,
) -> Result<TranslateSeries> {
    if op.index >= data.n {
        return Err(Error::OperatorIndex {
            index: op.index,
            n: data.n,
        });
    }
    let r = data.rs[op.index];
    let mut out = s.clone();
    // F(x + step) = F(x - (-step))
    out.add_scaled(&s.translated_by(-op.step), r)?;
    Ok(out)
}

/// Localised scaling function: the operator cascade applied to `phi`,
/// with the collapsed series, its closed form `beta_n B_n`, and residual
/// bookkeeping.
#[derive(Clone, Debug)]
pub struct PhiBuild {
    pub series: TranslateSeries,
    pub closed_form: PiecewisePolynomial,
    pub center_weight: f64,
    pub max_off_center: f64,
}

pub fn build_phi(n: usize, sign: Sign, epsilon: f64) -> Result<PhiBuild> {
    build_phi_with(&WaveletSpec::all_r(n, sign)?, epsilon)
}

/// General t-choice variant; `spec.centering` is overridden by the
/// centering the theorem assumes.
pub fn build_phi_with(spec: &WaveletSpec, epsilon: f64) -> Result<PhiBuild> {
    let data = EulerFrobeniusData::compute(spec.n)?;
    let spec = spec
        .clone()
        .with_centering(spec.localisation_phi_centering());
    let sigma = spec.sign.sigma();
    let mut s = phi_series(&spec, epsilon)?;
    for (j, flag) in spec.tchoice.iter().enumerate() {
        let (kind, step) = match flag {
            TFlag::UseR => (OpKind::S, DyadicRational::integer(sigma)),
            TFlag::UseInvR => (OpKind::R, DyadicRational::integer(-sigma)),
        };
        s = apply_shift_op(
            &ShiftOperatorSpec {
                kind,
                index: j,
                step,
            },
            &data,
            &s,
        )?;
    }
    let center_weight = s.weight_at(DyadicRational::zero());
    let max_off_center = s
        .terms()
        .iter()
        .filter(|(k, _)| !k.is_zero())
        .map(|(_, w)| w.abs())
        .fold(0.0f64, f64::max);
    let closed_form = PiecewisePolynomial::linear_combine(&[(data.beta, &bspline(spec.n))]);
    Ok(PhiBuild {
        series: s,
        closed_form,
        center_weight,
        max_off_center,
    })
}

/// One of the `2^n` t-choices feeding the wavelet localisation.
#[derive(Clone, Debug)]
pub struct LambdaChoice {
    pub tchoice: Vec<TFlag>,
    pub sign: Sign,
}

/// The operator cascade applied to one wavelet: per `J_r` index the pair
/// `S^{-sigma} S^{+sigma/2}`, per `J_{1/r}` index the pair
/// `R^{+sigma} R^{-sigma/2}`; only the finite inner part survives.
pub fn build_lambda(choice: &LambdaChoice, epsilon: f64) -> Result<TranslateSeries> {
    let n = choice.tchoice.len();
    let data = EulerFrobeniusData::compute(n)?;
    let spec = WaveletSpec::new(n, choice.sign, choice.tchoice.clone())?;
    let spec = spec
        .clone()
        .with_centering(spec.localisation_psi_centering());
    let sigma = choice.sign.sigma();
    let mut s = psi_series(&spec, epsilon)?;
    for (j, flag) in choice.tchoice.iter().enumerate() {
        let steps = match flag {
            TFlag::UseR => [
                (OpKind::S, DyadicRational::new(sigma, 1)),
                (OpKind::S, DyadicRational::integer(-sigma)),
            ],
            TFlag::UseInvR => [
                (OpKind::R, DyadicRational::new(-sigma, 1)),
                (OpKind::R, DyadicRational::integer(sigma)),
            ],
        };
        for (kind, step) in steps {
            s = apply_shift_op(
                &ShiftOperatorSpec {
                    kind,
                    index: j,
                    step,
                },
                &data,
                &s,
            )?;
        }
    }
    Ok(s)
}

/// Localised wavelet sum with its closed form and residual measurements.
#[derive(Clone, Debug)]
pub struct PsiBuild {
    pub series: TranslateSeries,
    pub closed_form: PiecewisePolynomial,
    pub materialized: PiecewisePolynomial,
    /// sup |materialized - closed_form| over the full series support
    pub sup_distance: f64,
    /// largest sampled |value| outside the theorem's support window
    pub max_outside_support: f64,
}

/// Builds all `2^n` lambda series and folds them pairwise:
/// `T^j = (1/sqrt(r_j)) T^{j-1}[r_j] - sqrt(r_j) T^{j-1}[1/r_j]`.
pub fn build_psi(n: usize, sign: Sign, epsilon: f64) -> Result<PsiBuild> {
    assert!(n >= 1);
    let data = EulerFrobeniusData::compute(n)?;
    let masks: Vec<u32> = (0..(1u32 << n)).collect();
    let lambdas = exec::map_collect(&masks, |&mask| {
        let tchoice: Vec<TFlag> = (0..n)
            .map(|j| {
                if mask & (1 << j) == 0 {
                    TFlag::UseR
                } else {
                    TFlag::UseInvR
                }
            })
            .collect();
        build_lambda(&LambdaChoice { tchoice, sign }, epsilon)
    });
    let mut level: Vec<TranslateSeries> = lambdas.into_iter().collect::<Result<_>>()?;
    // entries are ordered by t-choice mask, so after each fold the next
    // factor's bit is again the lowest: partners sit at 2m and 2m + 1
    for j in 0..n {
        let r = data.rs[j];
        let mut next = Vec::with_capacity(level.len() / 2);
        for m in 0..(level.len() / 2) {
            let mut t = level[2 * m].scaled(1.0 / r.sqrt());
            t.add_scaled(&level[2 * m + 1], -r.sqrt())?;
            next.push(t);
        }
        level = next;
    }
    let series = level.pop().expect("fold leaves one series");

    let consts = constants(&data, &vec![TFlag::UseR; n])?;
    let hod = high_order_derivative(n);
    let amp = consts.delta * consts.gamma_tilde * (-(2.0 * n as f64 + 1.0)).exp2();
    let closed_form = PiecewisePolynomial::linear_combine(&[(amp, &hod.dilated)]);

    let (materialized, _) = series.materialize(None);
    let sup = PiecewisePolynomial::sup_distance(&materialized, &closed_form, 8);

    // sampled values outside [-n/2, n/2 + 1]
    let mut outside = 0.0f64;
    if let Some((lo, hi)) = materialized.support() {
        let (lo, hi) = (lo.value(), hi.value());
        let (a, b) = (-(n as f64) / 2.0, n as f64 / 2.0 + 1.0);
        let mut x = lo;
        while x < hi {
            if x < a || x > b {
                outside = outside.max(materialized.evaluate(x).abs());
            }
            x += 0.25;
        }
    }
    Ok(PsiBuild {
        series,
        closed_form,
        materialized,
        sup_distance: sup,
        max_outside_support: outside,
    })
}

/// Residuals of the dilation-connection identities tying the localised sum
/// to B-splines of the same order at two scales.
#[derive(Clone, Debug)]
pub struct DymReport {
    pub n: usize,
    /// order-1 identity, present when n == 1
    pub dym1: Option<f64>,
    /// order-2 identity, present when n == 2
    pub dym2: Option<f64>,
    /// the general identity in its real-side form
    pub dymm: f64,
}

impl DymReport {
    pub fn max_residual(&self) -> f64 {
        self.dym1
            .iter()
            .chain(self.dym2.iter())
            .fold(self.dymm, |m, &v| m.max(v))
    }
}

/// Checks the identities as piecewise-polynomial equalities on the closed
/// form `Psi_n` (itself verified against the operator cascade separately).
pub fn verify_dym_identities(n: usize) -> Result<DymReport> {
    assert!(n >= 1);
    let data = EulerFrobeniusData::compute(n)?;
    let consts = constants(&data, &vec![TFlag::UseR; n])?;
    let hod = high_order_derivative(n);
    let amp = consts.delta * consts.gamma_tilde * (-(2.0 * n as f64 + 1.0)).exp2();
    let psi_closed = PiecewisePolynomial::linear_combine(&[(amp, &hod.dilated)]);
    let norm = 1.0 / (consts.delta * consts.gamma_tilde);
    let b = bspline(n);

    let dym1 = (n == 1).then(|| {
        // Psi_1(y - 1/2) / (delta gamma~) = B_1(y) - 2 B_1(2y - 1)
        let lhs = PiecewisePolynomial::linear_combine(&[(
            norm,
            &psi_closed.translate_dilate(DyadicRational::half(1), 0),
        )]);
        let rhs = PiecewisePolynomial::linear_combine(&[
            (1.0, &b),
            (-2.0, &b.translate_dilate(DyadicRational::integer(1), 1)),
        ]);
        PiecewisePolynomial::sup_distance(&lhs, &rhs, 8)
    });

    let dym2 = (n == 2).then(|| {
        // Psi_2(x) / (delta gamma~) = B_2(x+1) - 3/2 B_2(2x+1) - 1/2 B_2(2x-1)
        let lhs = PiecewisePolynomial::linear_combine(&[(norm, &psi_closed)]);
        let rhs = PiecewisePolynomial::linear_combine(&[
            (1.0, &b.translate_dilate(DyadicRational::integer(-1), 0)),
            (-1.5, &b.translate_dilate(DyadicRational::integer(-1), 1)),
            (-0.5, &b.translate_dilate(DyadicRational::integer(1), 1)),
        ]);
        PiecewisePolynomial::sup_distance(&lhs, &rhs, 8)
    });

    // real-side general identity:
    // Psi_n(x - n/2) / (delta gamma~)
    //   = B_n(x) - 2^{1-n} sum_{k=0}^{[n/2]} binom(n+1, 2k+1) B_n(2x - (2k+1))
    let lhs = PiecewisePolynomial::linear_combine(&[(
        norm,
        &psi_closed.translate_dilate(DyadicRational::new(n as i64, 1), 0),
    )]);
    let mut terms: Vec<(f64, PiecewisePolynomial)> = vec![(1.0, b.clone())];
    let scale = (1.0 - n as f64).exp2();
    for k in 0..=(n / 2) {
        let shift = 2 * k as i64 + 1;
        terms.push((
            -scale * binomial(n + 1, 2 * k + 1),
            b.translate_dilate(DyadicRational::integer(shift), 1),
        ));
    }
    let refs: Vec<(f64, &PiecewisePolynomial)> = terms.iter().map(|(w, p)| (*w, p)).collect();
    let rhs = PiecewisePolynomial::linear_combine(&refs);
    let dymm = PiecewisePolynomial::sup_distance(&lhs, &rhs, 8);

    Ok(DymReport {
        n,
        dym1,
        dym2,
        dymm,
    })
}
