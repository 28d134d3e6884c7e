//! Truncated exponentials and integer-order incomplete gamma functions.

use num_complex::Complex64;

use super::logvalue::{log_add_exp, CompensatedComplex, LogValue};
use crate::error::{Error, Result};

const LN_2PI_HALF: f64 = 0.918_938_533_204_672_8;

/// `log n!`, exact table below 24, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 24 {
        let mut p = 1.0f64;
        for k in 2..=n {
            p *= k as f64;
        }
        return p.ln();
    }
    let x = (n + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (x - 0.5) * x.ln() - x + LN_2PI_HALF + series
}

/// `log E_k(x)` where `E_k(x) = Σ_{j≤k} x^j / j!`, for `x ≥ 0`.
///
/// Accumulated as a running log-sum-exp, so the result is nondecreasing in
/// `k` bit for bit.
pub fn trunc_exp_log(k: u64, x: f64) -> LogValue {
    LogValue::from_log(trunc_exp_log_real(k, x))
}

pub(crate) fn trunc_exp_log_real(k: u64, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut acc = 0.0f64;
    for j in 1..=k {
        let term = j as f64 * lx - ln_factorial(j);
        acc = log_add_exp(acc, term);
    }
    acc
}

/// Truncated exponential `E_k(ζ)` of a complex argument.
///
/// Small arguments are summed directly with compensation; larger ones are
/// factored around the dominant term so the result cannot overflow.
pub fn trunc_exp_complex(k: u64, zeta: Complex64) -> LogValue {
    let r = zeta.norm();
    if r == 0.0 {
        return LogValue::ONE;
    }
    if r <= 30.0 {
        let mut acc = CompensatedComplex::default();
        let mut term = Complex64::new(1.0, 0.0);
        acc.add(term);
        for j in 1..=k {
            term = term * zeta / j as f64;
            acc.add(term);
        }
        return LogValue::from_complex(acc.value());
    }
    let lr = r.ln();
    let theta = zeta.arg();
    // Dominant term index of |ζ|^j / j!.
    let peak_index = (r.floor() as u64).min(k);
    let peak = peak_index as f64 * lr - ln_factorial(peak_index);
    let mut acc = CompensatedComplex::default();
    for j in 0..=k {
        let lm = j as f64 * lr - ln_factorial(j) - peak;
        if lm < -745.0 {
            continue;
        }
        acc.add(Complex64::from_polar(lm.exp(), j as f64 * theta));
    }
    LogValue::from_complex(acc.value()).scale_log(peak)
}

/// `log P(a, x)` with `P(a, x) = γ(a, x) / (a-1)!` for integer `a ≥ 1`.
pub fn log_regularized_lower_gamma(a: u64, x: f64) -> Result<f64> {
    if a == 0 {
        return Err(Error::invalid("incomplete gamma order must be >= 1"));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid(format!("incomplete gamma argument must be >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let af = a as f64;
    if x < af + 1.0 {
        // P = e^{-x} x^a / a! · Σ_i x^i / ((a+1)...(a+i)); all terms positive.
        let mut sum = 1.0f64;
        let mut term = 1.0f64;
        let mut i = 1.0f64;
        loop {
            term *= x / (af + i);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            i += 1.0;
        }
        Ok(-x + af * x.ln() - ln_factorial(a) + sum.ln())
    } else {
        // Q = e^{-x} E_{a-1}(x) ≤ ~1/2 here, so 1 - Q keeps full precision.
        let log_q = -x + trunc_exp_log_real(a - 1, x);
        Ok((-log_q.exp()).ln_1p())
    }
}

/// `γ(a, x) = ∫_0^x s^{a-1} e^{-s} ds` for integer `a ≥ 1`.
pub fn lower_incomplete_gamma(a: u64, x: f64) -> Result<f64> {
    let lp = log_regularized_lower_gamma(a, x)?;
    Ok((lp + ln_factorial(a - 1)).exp())
}
