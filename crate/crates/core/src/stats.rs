//! Paired t-test and the special functions it needs.
//!
//! The two-sided p-value comes from the regularized incomplete beta function
//! evaluated by Lentz's continued fraction, so it is exact at any degrees of
//! freedom without table lookups.

use crate::error::{Error, Result};

/// Summary of a paired t-test against the zero-mean hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub struct TTestResult {
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator).
    pub sd: f64,
    pub t_statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub degrees_of_freedom: u32,
}

/// Tests whether the mean of paired differences is zero.
pub fn paired_t_test(diffs: &[f64]) -> Result<TTestResult> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::Stats(format!(
            "paired t-test needs at least 2 differences, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>();
    let sd = (ss / (nf - 1.0)).sqrt();
    let df = (n - 1) as u32;
    let (t, p) = if sd == 0.0 {
        // Degenerate sample: all differences equal. t is 0 when the common
        // value is 0, infinite otherwise.
        if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY * mean.signum(), 0.0)
        }
    } else {
        let t = mean / (sd / nf.sqrt());
        (t, student_t_two_sided_p(t, f64::from(df)))
    };
    Ok(TTestResult {
        mean,
        sd,
        t_statistic: t,
        p_value: p,
        degrees_of_freedom: df,
    })
}

/// Two-sided tail probability P(|T| > |t|) of Student's t with `df` degrees
/// of freedom: I_x(df/2, 1/2) at x = df / (df + t^2).
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return 0.0;
    }
    let x = df / (df + t * t);
    reg_inc_beta(x, df / 2.0, 0.5)
}

/// ln Γ(z) for z > 0, Lanczos approximation.
pub fn ln_gamma(z: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    debug_assert!(z > 0.0);
    let mut sum = 1.000000000190015;
    for (i, c) in COEFFS.iter().enumerate() {
        sum += c / (z + i as f64 + 1.0);
    }
    let tmp = z + 5.5;
    (z + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * sum / z).ln()
}

/// Regularized incomplete beta function I_x(a, b) via the continued fraction
/// of Lentz's method, with the symmetry switch for fast convergence.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front =
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front.exp()) * beta_cf(x, a, b) / a
    } else {
        1.0 - (ln_front.exp()) * beta_cf(1.0 - x, b, a) / b
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
    const TINY: f64 = 1e-30;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        // even step
        let aa = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        // odd step
        let aa = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
