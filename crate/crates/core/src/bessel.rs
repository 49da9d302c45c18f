//! Bessel functions of order zero.
//!
//! Power series for `|x| ≤ 12`, Hankel asymptotic expansion beyond. Both
//! branches agree to about `1e-11` at the switchover.

use std::f64::consts::{FRAC_PI_4, PI};

const SWITCHOVER: f64 = 12.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `J₀(x)` by its power series.
fn j0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && mf > q.sqrt() {
            break;
        }
    }
    sum
}

/// `Y₀(x)` for `x > 0` by the series with the logarithmic `J₀` term.
fn y0_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut sum = 0.0;
    for m in 1..200 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        harmonic += 1.0 / mf;
        let t = -harmonic * term;
        sum += t;
        if t.abs() < 1e-18 * sum.abs().max(1e-300) && mf > q.sqrt() {
            break;
        }
    }
    (2.0 / PI) * (((0.5 * x).ln() + EULER_GAMMA) * j0_series(x) + sum)
}

/// Hankel asymptotic `P₀(x)`, `Q₀(x)`, truncated at the smallest term.
fn hankel_pq(x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..100 {
        let odd = (2 * k - 1) as f64;
        a *= -odd * odd / (8.0 * k as f64 * x);
        if a.abs() >= prev {
            break;
        }
        prev = a.abs();
        // a_k carries the sign of Π(-(2i-1)²); P and Q add an alternating factor.
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn asymptotic(x: f64) -> (f64, f64) {
    let (p, q) = hankel_pq(x);
    let (s, c) = (x - FRAC_PI_4).sin_cos();
    let amp = (2.0 / (PI * x)).sqrt();
    (amp * (p * c - q * s), amp * (p * s + q * c))
}

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= SWITCHOVER {
        j0_series(x)
    } else {
        asymptotic(x).0
    }
}

/// Bessel function of the second kind, order zero. `NaN` for `x < 0`,
/// `-∞` at zero.
pub fn bessel_y0(x: f64) -> f64 {
    if x < 0.0 || x.is_nan() {
        f64::NAN
    } else if x == 0.0 {
        f64::NEG_INFINITY
    } else if x <= SWITCHOVER {
        y0_series(x)
    } else {
        asymptotic(x).1
    }
}

/// `H₀⁽¹⁾(x) = J₀(x) + j·Y₀(x)` as `(re, im)`.
pub fn hankel1_0(x: f64) -> (f64, f64) {
    (bessel_j0(x), bessel_y0(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn switchover_branches_agree() {
        for x in [11.5, 12.0, 12.5, 14.0] {
            let (ja, ya) = asymptotic(x);
            assert!((ja - j0_series(x)).abs() < 1e-10, "J0 at {x}");
            assert!((ya - y0_series(x)).abs() < 1e-10, "Y0 at {x}");
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        // Reference values from published tables.
        assert!((bessel_j0(5.0) - -0.177_596_771_314_338_3).abs() < 1e-13);
        assert!((bessel_y0(1.0) - 0.088_256_964_215_676_96).abs() < 1e-13);
        assert!((bessel_y0(10.0) - 0.055_671_167_283_599_4).abs() < 1e-12);
        assert!((bessel_j0(30.0) - -0.086_367_983_581_040_2).abs() < 1e-11);
        assert!((bessel_j0(-5.0) - bessel_j0(5.0)).abs() == 0.0);
        assert!(bessel_y0(-1.0).is_nan());
        assert_eq!(bessel_y0(0.0), f64::NEG_INFINITY);
    }
}
