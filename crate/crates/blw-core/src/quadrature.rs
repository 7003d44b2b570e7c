//! Gauss-Legendre nodes and weights on [-1, 1].
//!
//! An order-`n` rule integrates polynomials of degree `2n - 1` exactly,
//! which is what makes every inner product in this crate exact up to
//! rounding: integrands are piecewise polynomial and the order is chosen
//! from the degrees.

use std::sync::{Arc, OnceLock};

/// Rules up to this order are built once and read lock-free; inner
/// products sit in parallel hot loops and must not contend on a mutex.
const PRECOMPUTED_MAX: usize = 32;

fn table() -> &'static Vec<Arc<Vec<(f64, f64)>>> {
    static TABLE: OnceLock<Vec<Arc<Vec<(f64, f64)>>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        (1..=PRECOMPUTED_MAX)
            .map(|n| Arc::new(compute(n)))
            .collect()
    })
}

/// Legendre polynomial value and derivative at `x` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes and weights of the order-`n` Gauss-Legendre rule.
pub fn gauss_legendre(n: usize) -> Arc<Vec<(f64, f64)>> {
    assert!(n >= 1, "quadrature order must be positive");
    if n <= PRECOMPUTED_MAX {
        table()[n - 1].clone()
    } else {
        Arc::new(compute(n))
    }
}

fn compute(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-based initial guess, then Newton.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}
