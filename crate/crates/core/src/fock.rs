//! Closed forms for the Bargmann–Fock weight `Q(z) = |z|²`.
//!
//! Here `K_{m,n}(z,w) = m E_{n-1}(m z w̄)`, the droplet is `D̄(0; √τ)`, and
//! for `z_0` outside the droplet the Berezin measures tend to harmonic
//! measure of the exterior disk. The moment formulas below are exact and
//! serve as oracles for the general machinery.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::berezin::BerezinEvaluator;
use crate::error::{Error, Result};
use crate::kernel::ReproducingKernel;
use crate::numerics::{
    ln_factorial, log_regularized_lower_gamma, log_sum_exp, trunc_exp_complex, trunc_exp_log_real, LineRule,
    LogValue, PlanarQuadrature,
};
use crate::weights::Weight;

/// Exact Fock kernel.
#[derive(Clone, Debug)]
pub struct FockKernel {
    weight: Weight,
    m: f64,
    n: usize,
}

impl FockKernel {
    pub fn new(m: f64, n: usize) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid(format!("m must be positive, got {m}")));
        }
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        Ok(FockKernel { weight: Weight::fock(), m, n })
    }
}

impl ReproducingKernel for FockKernel {
    fn weight(&self) -> &Weight {
        &self.weight
    }

    fn m(&self) -> f64 {
        self.m
    }

    fn n(&self) -> usize {
        self.n
    }

    fn weighted_kernel(&self, z: Complex64, w: Complex64) -> LogValue {
        let e = trunc_exp_complex(self.n as u64 - 1, z * w.conj() * self.m);
        (LogValue::from_real(self.m) * e).scale_log(-0.5 * self.m * (z.norm_sqr() + w.norm_sqr()))
    }

    fn log_one_point(&self, z: Complex64) -> f64 {
        let x = self.m * z.norm_sqr();
        self.m.ln() + trunc_exp_log_real(self.n as u64 - 1, x) - x
    }
}

/// `K_{m,n}(z, w) = m E_{n-1}(m z w̄)`.
pub fn fock_kernel(m: f64, n: usize, z: Complex64, w: Complex64) -> Result<Complex64> {
    Ok(FockKernel::new(m, n)?.kernel(z, w))
}

/// How a moment was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    ClosedForm,
    Quadrature,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct FockMomentResult {
    pub j: usize,
    pub m: f64,
    pub n: usize,
    pub z0: Complex64,
    pub value: Complex64,
    pub method: MomentMethod,
}

/// `log(E_{j-1}(x) / E_{n-1}(x))` with `E_{-1} ≡ 0`.
pub fn log_trunc_exp_ratio(j: usize, n: usize, x: f64) -> f64 {
    if j == 0 {
        return f64::NEG_INFINITY;
    }
    trunc_exp_log_real(j as u64 - 1, x) - trunc_exp_log_real(n as u64 - 1, x)
}

fn check_moment_args(n: usize, j: usize, z0: Complex64) -> Result<()> {
    if z0 == Complex64::new(0.0, 0.0) {
        return Err(Error::invalid("moment centre z0 must be nonzero"));
    }
    if n <= j {
        return Err(Error::Degree(format!("need n >= j + 1, got n = {n}, j = {j}")));
    }
    Ok(())
}

/// Principal value `p.v. ∫ z^{-j} dB^{⟨z_0⟩}_{m,n} = z_0^{-j}(1 − E_{j−1}(m|z_0|²)/E_{n−1}(m|z_0|²))`.
pub fn pv_moment(m: f64, n: usize, j: usize, z0: Complex64) -> Result<FockMomentResult> {
    check_moment_args(n, j, z0)?;
    let x = m * z0.norm_sqr();
    let ratio = log_trunc_exp_ratio(j, n, x).exp();
    let value = z0.powi(-(j as i32)) * (1.0 - ratio);
    Ok(FockMomentResult { j, m, n, z0, value, method: MomentMethod::ClosedForm })
}

/// Moment over `D(0; r)`:
/// `z_0^{-ν} / E_{n-1}(m|z_0|²) · Σ_{j=ν}^{n-1} (m|z_0|²)^j/(j!(j-ν)!) γ(j-ν+1, mr²)`.
pub fn restricted_moment(m: f64, n: usize, nu: usize, z0: Complex64, r: f64) -> Result<FockMomentResult> {
    check_moment_args(n, nu, z0)?;
    if !(r > 0.0) {
        return Err(Error::invalid(format!("radius must be positive, got {r}")));
    }
    let x = m * z0.norm_sqr();
    let lx = x.ln();
    let s = m * r * r;
    // γ(a, s) / (j-ν)! = P(a, s) with a = j-ν+1
    let logs: Vec<f64> = (nu..n)
        .map(|j| {
            let lp = log_regularized_lower_gamma((j - nu + 1) as u64, s).expect("valid incomplete gamma args");
            j as f64 * lx - ln_factorial(j as u64) + lp
        })
        .collect();
    let log_sum = log_sum_exp(&logs) - trunc_exp_log_real(n as u64 - 1, x);
    let value = z0.powi(-(nu as i32)) * log_sum.exp();
    Ok(FockMomentResult { j: nu, m, n, z0, value, method: MomentMethod::ClosedForm })
}

/// `p.v. ∫ z^{-j} dB` by quadrature on a grid centred at the origin; the
/// uniform angular rule cancels the singular modes exactly.
pub fn pv_moment_quadrature(m: f64, n: usize, j: usize, z0: Complex64) -> Result<FockMomentResult> {
    check_moment_args(n, j, z0)?;
    let kernel = FockKernel::new(m, n)?;
    let ev = BerezinEvaluator::new(&kernel, z0)?;
    let quad = origin_quadrature(m, z0.norm() + 1.0 + 12.0 / m.sqrt(), 1024);
    let value = quad.integrate_complex(|z| z.powi(-(j as i32)) * ev.density(z));
    Ok(FockMomentResult { j, m, n, z0, value, method: MomentMethod::Quadrature })
}

/// Radial tensor rule around 0 with panels about `1/(4√m)` wide.
pub(crate) fn origin_quadrature(m: f64, r_max: f64, n_angular: usize) -> PlanarQuadrature {
    let panels = ((r_max * m.sqrt() * 4.0).ceil() as usize).max(16);
    let rule = LineRule::uniform(0.0, r_max, panels, 12);
    PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, n_angular)
}

/// Leading term of `E_l(lx) ≈ (2πl)^{-1/2} (ex)^l · x/(x−1)`, `x > 1`.
pub fn szego_asymptotic(l: u64, x: f64) -> Result<LogValue> {
    szego_asymptotic_with_margin(l, x, 0.05)
}

pub fn szego_asymptotic_with_margin(l: u64, x: f64, margin: f64) -> Result<LogValue> {
    if !(x > 1.0 + margin) {
        return Err(Error::OutOfDomain(format!("Szegő asymptotic needs x > 1 + {margin}, got {x}")));
    }
    if l == 0 {
        return Err(Error::invalid("Szegő asymptotic needs l >= 1"));
    }
    let lf = l as f64;
    let log = -0.5 * (2.0 * PI * lf).ln() + lf * (1.0 + x.ln()) + (x / (x - 1.0)).ln();
    Ok(LogValue::from_log(log))
}

/// Relative error of the Szegő leading term against direct summation.
pub fn szego_relative_error(l: u64, x: f64) -> Result<f64> {
    let approx = szego_asymptotic(l, x)?.log_magnitude;
    let exact = trunc_exp_log_real(l, l as f64 * x);
    Ok((approx - exact).exp_m1().abs())
}

/// Exterior disk problem: `|z_0| > √τ`, boundary circle `|ζ| = √τ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HarmonicMeasureSpec {
    pub tau: f64,
    pub z0: Complex64,
    pub boundary_samples: usize,
}

impl HarmonicMeasureSpec {
    pub fn new(tau: f64, z0: Complex64, boundary_samples: usize) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::invalid(format!("tau must be positive, got {tau}")));
        }
        if !(z0.norm_sqr() > tau) {
            return Err(Error::invalid(format!("z0 = {z0} must lie outside the disk |z|² <= {tau}")));
        }
        if boundary_samples < 8 {
            return Err(Error::invalid("need at least 8 boundary samples"));
        }
        Ok(HarmonicMeasureSpec { tau, z0, boundary_samples })
    }
}

/// Bounded harmonic extension of boundary data to the exterior of the disk,
/// evaluated at `z_0` with the trapezoid rule against the exterior Poisson kernel.
pub fn harmonic_extension<F: Fn(Complex64) -> f64>(spec: &HarmonicMeasureSpec, f: F) -> Result<f64> {
    if !(spec.z0.norm_sqr() > spec.tau) {
        return Err(Error::invalid("z0 must lie outside the droplet"));
    }
    let radius = spec.tau.sqrt();
    let numer = spec.z0.norm_sqr() - spec.tau;
    let n = spec.boundary_samples;
    let mut acc = crate::numerics::Compensated::default();
    for k in 0..n {
        let zeta = Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64);
        acc.add(f(zeta) * numer / (spec.z0 - zeta).norm_sqr());
    }
    Ok(acc.value() / n as f64)
}

/// Built-in test function `Re(z̄ / max(|z|², τ))`: `Re(1/z)` off the
/// droplet and `Re z / τ` on it, so its harmonic extension at any exterior
/// point is `Re(1/z_0)` while the Berezin transform feels the interior.
pub fn th5_test_function(tau: f64) -> impl Fn(Complex64) -> f64 + Sync + Copy {
    move |z: Complex64| z.conj().re / z.norm_sqr().max(tau)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HarmonicRow {
    pub m: f64,
    pub n: usize,
    pub berezin: f64,
    pub harmonic: f64,
    pub gap: f64,
}

/// How `n` follows `m`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum DegreeRule {
    /// `n = round(mτ)`.
    RoundMTau,
    /// `n = round(mτ) + M`.
    MTauPlus { offset: i64 },
    /// `n = round(mτ + √m)`, the slower `n/m → τ` regime.
    MTauPlusSqrtM,
}

impl DegreeRule {
    pub fn degree(&self, m: f64, tau: f64) -> usize {
        let n = match *self {
            DegreeRule::RoundMTau => (m * tau).round() as i64,
            DegreeRule::MTauPlus { offset } => (m * tau).round() as i64 + offset,
            DegreeRule::MTauPlusSqrtM => (m * tau + m.sqrt()).round() as i64,
        };
        n.max(1) as usize
    }
}

/// Berezin transform of `f` at `z_0` against the harmonic extension, for
/// each `m` in `m_list`.
pub fn th5_experiment<F>(spec: &HarmonicMeasureSpec, f: F, m_list: &[f64], rule: DegreeRule) -> Result<Vec<HarmonicRow>>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let harmonic = harmonic_extension(spec, &f)?;
    m_list
        .iter()
        .map(|&m| {
            let n = rule.degree(m, spec.tau);
            let kernel = FockKernel::new(m, n)?;
            let ev = BerezinEvaluator::new(&kernel, spec.z0)?;
            let r_max = spec.z0.norm().max(spec.tau.sqrt()) + 1.0 + 12.0 / m.sqrt();
            let quad = origin_quadrature(m, r_max, 512);
            let berezin = ev.transform(&f, &quad);
            Ok(HarmonicRow { m, n, berezin, harmonic, gap: (berezin - harmonic).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn kernel_small_cases() {
        let k = fock_kernel(7.0, 1, c(0.3, 2.0), c(-1.0, 0.4)).unwrap();
        assert!((k - c(7.0, 0.0)).norm() < 1e-12);
        let k = fock_kernel(1.0, 3, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!((k - c(2.5, 0.0)).norm() < 1e-14);
        assert!(FockKernel::new(0.0, 3).is_err());
        assert!(FockKernel::new(1.0, 0).is_err());
    }

    #[test]
    fn one_point_at_origin() {
        let k = FockKernel::new(5.0, 9).unwrap();
        assert!((k.one_point(c(0.0, 0.0)) - 5.0).abs() < 1e-13);
        let diag = k.weighted_kernel(c(0.4, -0.2), c(0.4, -0.2));
        assert!((diag.log_magnitude - k.log_one_point(c(0.4, -0.2))).abs() < 1e-12);
    }

    #[test]
    fn pv_moment_degenerate_and_error_cases() {
        let v = pv_moment(3.0, 4, 0, c(1.0, 1.0)).unwrap();
        assert_eq!(v.value, c(1.0, 0.0));
        assert!(matches!(pv_moment(3.0, 4, 0, c(0.0, 0.0)), Err(Error::InvalidArgument(_))));
        assert!(matches!(pv_moment(3.0, 2, 2, c(1.0, 0.0)), Err(Error::Degree(_))));
    }

    #[test]
    fn restricted_moment_full_plane_limit() {
        for &(m, n, nu) in &[(10.0f64, 12, 0usize), (10.0, 12, 2), (40.0, 40, 1)] {
            let z0 = c(1.5, 0.4);
            let r = (700.0 / m).sqrt();
            let a = restricted_moment(m, n, nu, z0, r).unwrap().value;
            let b = pv_moment(m, n, nu, z0).unwrap().value;
            assert!((a - b).norm() < 1e-9 * b.norm().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn szego_domain() {
        assert!(szego_asymptotic(10, 1.0).is_err());
        assert!(szego_asymptotic(10, 1.04).is_err());
        let v = szego_asymptotic(5000, 3.0).unwrap();
        assert!(v.log_magnitude.is_finite());
    }

    #[test]
    fn harmonic_extension_basics() {
        let spec = HarmonicMeasureSpec::new(1.0, c(1.5, 0.0), 256).unwrap();
        assert!((harmonic_extension(&spec, |_| 1.0).unwrap() - 1.0).abs() < 1e-12);
        let v = harmonic_extension(&spec, |z| (1.0 / z).re).unwrap();
        assert!((v - 1.0 / 1.5).abs() < 1e-12);
        assert!(HarmonicMeasureSpec::new(1.0, c(0.5, 0.0), 64).is_err());
    }

    #[test]
    fn degree_rules() {
        assert_eq!(DegreeRule::RoundMTau.degree(64.0, 1.0), 64);
        assert_eq!(DegreeRule::MTauPlus { offset: 2 }.degree(10.0, 0.5), 7);
        assert_eq!(DegreeRule::MTauPlusSqrtM.degree(64.0, 1.0), 72);
        assert_eq!(DegreeRule::RoundMTau.degree(0.1, 1.0), 1);
    }

    #[test]
    fn th5_test_function_matches_inverse_off_droplet() {
        let f = th5_test_function(1.0);
        for z in [c(1.0, 0.0), c(0.0, -1.0), c(1.2, 0.7)] {
            assert!((f(z) - (1.0 / z).re).abs() < 1e-15);
        }
        assert!((f(c(0.5, 0.3)) - 0.5).abs() < 1e-15);
        assert!(f(c(0.0, 0.0)).abs() < 1e-15);
    }
}
