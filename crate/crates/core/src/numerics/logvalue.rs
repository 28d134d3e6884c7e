//! Complex numbers stored as `(log |x|, x / |x|)`.
//!
//! Kernel values such as `e^{mQ}` exceed the `f64` range long before the
//! interesting regime of `m`, so weighted quantities are carried in this
//! form until a final subtraction or comparison.

use std::ops::{Div, Mul};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    /// `log |x|`; `-inf` encodes zero.
    pub log_magnitude: f64,
    /// Unit complex number `x / |x|` (`1` for zero).
    pub phase: Complex64,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { log_magnitude: f64::NEG_INFINITY, phase: Complex64::new(1.0, 0.0) };
    pub const ONE: LogValue = LogValue { log_magnitude: 0.0, phase: Complex64::new(1.0, 0.0) };

    /// Positive real number `e^{log_magnitude}`.
    pub fn from_log(log_magnitude: f64) -> Self {
        LogValue { log_magnitude, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn from_polar_log(log_magnitude: f64, angle: f64) -> Self {
        LogValue { log_magnitude, phase: Complex64::from_polar(1.0, angle) }
    }

    pub fn from_real(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            LogValue { log_magnitude: x.abs().ln(), phase: Complex64::new(x.signum(), 0.0) }
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let r = z.norm();
        if r == 0.0 {
            Self::ZERO
        } else {
            LogValue { log_magnitude: r.ln(), phase: z / r }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.log_magnitude.exp()
        }
    }

    /// Real part of the represented value.
    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    /// `|x|`.
    pub fn abs(&self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn conj(&self) -> Self {
        LogValue { log_magnitude: self.log_magnitude, phase: self.phase.conj() }
    }

    pub fn powi(&self, k: i32) -> Self {
        if self.is_zero() {
            return if k == 0 { Self::ONE } else { Self::ZERO };
        }
        LogValue { log_magnitude: self.log_magnitude * k as f64, phase: self.phase.powi(k) }
    }

    /// Scales by `e^{shift}` without touching the phase.
    pub fn scale_log(&self, shift: f64) -> Self {
        LogValue { log_magnitude: self.log_magnitude + shift, phase: self.phase }
    }

    /// Sum of a sequence of log-values, factored around the largest term.
    pub fn sum<I: IntoIterator<Item = LogValue>>(terms: I) -> LogValue {
        let terms: Vec<LogValue> = terms.into_iter().collect();
        let peak = terms.iter().map(|t| t.log_magnitude).fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let mut acc = CompensatedComplex::default();
        for t in &terms {
            if !t.is_zero() {
                acc.add(t.phase * (t.log_magnitude - peak).exp());
            }
        }
        LogValue::from_complex(acc.value()).scale_log(peak)
    }
}

impl Mul for LogValue {
    type Output = LogValue;
    fn mul(self, rhs: LogValue) -> LogValue {
        if self.is_zero() || rhs.is_zero() {
            return LogValue::ZERO;
        }
        LogValue { log_magnitude: self.log_magnitude + rhs.log_magnitude, phase: self.phase * rhs.phase }
    }
}

impl Div for LogValue {
    type Output = LogValue;
    fn div(self, rhs: LogValue) -> LogValue {
        if self.is_zero() {
            return LogValue::ZERO;
        }
        LogValue { log_magnitude: self.log_magnitude - rhs.log_magnitude, phase: self.phase * rhs.phase.conj() }
    }
}

/// `log(e^a + e^b)` without overflow. Never smaller than `max(a, b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log Σ e^{x_i}` over a slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let peak = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return peak;
    }
    let mut acc = Compensated::default();
    for &x in xs {
        acc.add((x - peak).exp());
    }
    peak + acc.value().ln()
}

/// Neumaier summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedComplex {
    re: Compensated,
    im: Compensated,
}

impl CompensatedComplex {
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_neg_infinity() {
        assert_eq!(LogValue::from_real(0.0).log_magnitude, f64::NEG_INFINITY);
        assert_eq!(LogValue::ZERO.to_complex(), Complex64::new(0.0, 0.0));
        assert!((LogValue::ZERO * LogValue::from_real(3.0)).is_zero());
    }

    #[test]
    fn multiplication_adds_logs() {
        let a = LogValue::from_log(700.0);
        let b = LogValue::from_log(650.5);
        assert_eq!((a * b).log_magnitude, 1350.5);
        let c = LogValue::from_complex(Complex64::new(0.0, 2.0)) * LogValue::from_real(-3.0);
        assert!((c.to_complex() - Complex64::new(0.0, -6.0)).norm() < 1e-14);
    }

    #[test]
    fn sum_handles_huge_terms() {
        let s = LogValue::sum([LogValue::from_log(1000.0), LogValue::from_log(1000.0)]);
        assert!((s.log_magnitude - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let cancel = LogValue::sum([LogValue::from_real(1.5), LogValue::from_real(-1.5)]);
        assert!(cancel.is_zero());
    }

    #[test]
    fn log_add_exp_is_monotone() {
        assert!(log_add_exp(5.0, -800.0) >= 5.0);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut c = Compensated::default();
        c.add(1e16);
        c.add(1.0);
        c.add(-1e16);
        assert_eq!(c.value(), 1.0);
    }
}
