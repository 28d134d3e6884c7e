//! Weights `Q`, their normalized Laplacians, growth data and the bivariate
//! holomorphic extension `ψ` with `ψ(z, z̄) = Q(z)`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A function holomorphic in two variables together with the mixed
/// partials the first-order kernel expansion needs.
pub trait BivariateAnalytic: Send + Sync + fmt::Debug {
    fn eval(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d1(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d2(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d1d2(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d1d1d2(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d1d2d2(&self, z: Complex64, w: Complex64) -> Complex64;
    fn d1d1d2d2(&self, z: Complex64, w: Complex64) -> Complex64;
}

/// `ψ(z, w) = g(zw)` for a real polynomial `g`; this is the extension of
/// every radial weight `Q(z) = g(|z|²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPolynomial {
    /// `g(s) = Σ coeffs[k] s^k`.
    pub coeffs: Vec<f64>,
}

impl ProductPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        ProductPolynomial { coeffs }
    }

    /// `g^{(order)}(s)`.
    fn derivative<T>(&self, order: usize, s: T) -> T
    where
        T: Copy + std::ops::Mul<Output = T> + std::ops::Add<Output = T> + From<f64>,
    {
        let mut acc = T::from(0.0);
        for (k, &c) in self.coeffs.iter().enumerate().skip(order).rev() {
            let falling: f64 = ((k - order + 1)..=k).map(|i| i as f64).product();
            acc = acc * s + T::from(c * falling);
        }
        acc
    }

    fn g(&self, s: Complex64, order: usize) -> Complex64 {
        self.derivative(order, s)
    }

    pub(crate) fn g_real(&self, s: f64, order: usize) -> f64 {
        self.derivative(order, s)
    }
}

impl BivariateAnalytic for ProductPolynomial {
    fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.g(z * w, 0)
    }
    fn d1(&self, z: Complex64, w: Complex64) -> Complex64 {
        w * self.g(z * w, 1)
    }
    fn d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        z * self.g(z * w, 1)
    }
    fn d1d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        let s = z * w;
        self.g(s, 1) + s * self.g(s, 2)
    }
    fn d1d1d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        let s = z * w;
        w * (self.g(s, 2) * 2.0 + s * self.g(s, 3))
    }
    fn d1d2d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        let s = z * w;
        z * (self.g(s, 2) * 2.0 + s * self.g(s, 3))
    }
    fn d1d1d2d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        let s = z * w;
        self.g(s, 2) * 2.0 + s * self.g(s, 3) * 4.0 + s * s * self.g(s, 4)
    }
}

/// `ψ(z, w) = zw − (t/2)(z² + w²)`, the extension of `|z|² − t Re z²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EllipticPsi {
    pub t: f64,
}

impl BivariateAnalytic for EllipticPsi {
    fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        z * w - (z * z + w * w) * (0.5 * self.t)
    }
    fn d1(&self, z: Complex64, w: Complex64) -> Complex64 {
        w - z * self.t
    }
    fn d2(&self, z: Complex64, w: Complex64) -> Complex64 {
        z - w * self.t
    }
    fn d1d2(&self, _: Complex64, _: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn d1d1d2(&self, _: Complex64, _: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn d1d2d2(&self, _: Complex64, _: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn d1d1d2d2(&self, _: Complex64, _: Complex64) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
}

/// JSON descriptor for the built-in weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightDescriptor {
    Fock,
    RadialPower { p: i64 },
    Quartic { c: f64 },
    Elliptic { t: f64 },
}

impl WeightDescriptor {
    pub fn build(&self) -> Result<Weight> {
        match *self {
            WeightDescriptor::Fock => Ok(Weight::fock()),
            WeightDescriptor::RadialPower { p } => Weight::radial_power(p),
            WeightDescriptor::Quartic { c } => Weight::quartic(c),
            WeightDescriptor::Elliptic { t } => Weight::elliptic(t),
        }
    }
}

type RealFn = Arc<dyn Fn(Complex64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Form {
    /// `Q(z) = g(|z|²)`.
    Product(Arc<ProductPolynomial>),
    Elliptic(Arc<EllipticPsi>),
    Custom { q: RealFn, radial: bool },
}

/// A weight `Q: ℂ → ℝ` with growth `Q(z) ≥ ρ log|z|²` near infinity.
#[derive(Clone)]
pub struct Weight {
    name: String,
    form: Form,
    growth_rho: f64,
    descriptor: Option<WeightDescriptor>,
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight").field("name", &self.name).field("growth_rho", &self.growth_rho).finish()
    }
}

impl Weight {
    /// Bargmann–Fock weight `Q(z) = |z|²`.
    pub fn fock() -> Self {
        Weight {
            name: "fock".into(),
            form: Form::Product(Arc::new(ProductPolynomial::new(vec![0.0, 1.0]))),
            growth_rho: 1.0,
            descriptor: Some(WeightDescriptor::Fock),
        }
    }

    /// `Q(z) = |z|^{2p}`.
    pub fn radial_power(p: i64) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid(format!("radial power needs p >= 1, got {p}")));
        }
        if p == 1 {
            return Ok(Self::fock());
        }
        let mut coeffs = vec![0.0; p as usize + 1];
        coeffs[p as usize] = 1.0;
        Ok(Weight {
            name: format!("radial_power(p={p})"),
            form: Form::Product(Arc::new(ProductPolynomial::new(coeffs))),
            growth_rho: f64::INFINITY,
            descriptor: Some(WeightDescriptor::RadialPower { p }),
        })
    }

    /// `Q(z) = |z|² + c|z|⁴`, strictly subharmonic on all of `ℂ`.
    pub fn quartic(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::invalid(format!("quartic perturbation needs c > 0, got {c}")));
        }
        Ok(Weight {
            name: format!("quartic(c={c})"),
            form: Form::Product(Arc::new(ProductPolynomial::new(vec![0.0, 1.0, c]))),
            growth_rho: f64::INFINITY,
            descriptor: Some(WeightDescriptor::Quartic { c }),
        })
    }

    /// `Q(z) = |z|² − t Re(z²)` for `0 ≤ t < 1`; the droplet is an ellipse.
    pub fn elliptic(t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&t) {
            return Err(Error::invalid(format!("elliptic weight needs 0 <= t < 1, got {t}")));
        }
        Ok(Weight {
            name: format!("elliptic(t={t})"),
            form: Form::Elliptic(Arc::new(EllipticPsi { t })),
            growth_rho: f64::INFINITY,
            descriptor: Some(WeightDescriptor::Elliptic { t }),
        })
    }

    /// A user weight given by `Q` alone; derivatives come from finite
    /// differences and the expansion features are unavailable.
    pub fn custom<F>(name: impl Into<String>, q: F, growth_rho: f64, radial: bool) -> Self
    where
        F: Fn(Complex64) -> f64 + Send + Sync + 'static,
    {
        Weight { name: name.into(), form: Form::Custom { q: Arc::new(q), radial }, growth_rho, descriptor: None }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn descriptor(&self) -> Option<&WeightDescriptor> {
        self.descriptor.as_ref()
    }

    pub fn growth_rho(&self) -> f64 {
        self.growth_rho
    }

    pub fn is_radial(&self) -> bool {
        match &self.form {
            Form::Product(_) => true,
            Form::Elliptic(e) => e.t == 0.0,
            Form::Custom { radial, .. } => *radial,
        }
    }

    pub fn q(&self, z: Complex64) -> f64 {
        match &self.form {
            Form::Product(g) => g.g_real(z.norm_sqr(), 0),
            Form::Elliptic(e) => z.norm_sqr() - e.t * (z.re * z.re - z.im * z.im),
            Form::Custom { q, .. } => q(z),
        }
    }

    /// `ΔQ` with `Δ = ∂∂̄`.
    pub fn laplacian(&self, z: Complex64) -> f64 {
        match &self.form {
            Form::Product(g) => {
                let s = z.norm_sqr();
                g.g_real(s, 1) + s * g.g_real(s, 2)
            }
            Form::Elliptic(_) => 1.0,
            Form::Custom { .. } => fd_laplacian(|p| self.q(p), z, 1e-5 * z.norm().max(1.0)),
        }
    }

    /// `Δ log ΔQ`, closed form where available.
    pub fn laplacian_log_laplacian(&self, z: Complex64) -> f64 {
        match &self.form {
            Form::Product(g) => {
                // ΔQ = h(s) with h = g' + s g''; Δ log h(|z|²) = (s (h'/h))' evaluated at s.
                let s = z.norm_sqr();
                let h = g.g_real(s, 1) + s * g.g_real(s, 2);
                let h1 = 2.0 * g.g_real(s, 2) + s * g.g_real(s, 3);
                let h2 = 3.0 * g.g_real(s, 3) + s * g.g_real(s, 4);
                let ratio = h1 / h;
                ratio + s * (h2 / h - ratio * ratio)
            }
            Form::Elliptic(_) => 0.0,
            Form::Custom { .. } => {
                let h = 1e-3 * z.norm().max(1.0);
                fd_laplacian(|p| self.laplacian(p).ln(), z, h)
            }
        }
    }

    /// `q(r) = Q(r)` and `q'(r)` along the positive axis, for radial weights.
    pub fn radial_profile(&self, r: f64) -> Option<(f64, f64)> {
        match &self.form {
            Form::Product(g) => Some((g.g_real(r * r, 0), 2.0 * r * g.g_real(r * r, 1))),
            Form::Elliptic(e) if e.t == 0.0 => Some((r * r, 2.0 * r)),
            Form::Custom { q, radial: true } => {
                let h = 1e-6 * r.max(1.0);
                let z = |x: f64| Complex64::new(x, 0.0);
                let d = if r > h { (q(z(r + h)) - q(z(r - h))) / (2.0 * h) } else { (q(z(r + h)) - q(z(r))) / h };
                Some((q(z(r)), d))
            }
            _ => None,
        }
    }

    pub fn psi(&self) -> Option<&dyn BivariateAnalytic> {
        match &self.form {
            Form::Product(g) => Some(g.as_ref()),
            Form::Elliptic(e) => Some(e.as_ref()),
            Form::Custom { .. } => None,
        }
    }

    pub(crate) fn require_psi(&self) -> Result<&dyn BivariateAnalytic> {
        self.psi().ok_or_else(|| {
            Error::UnsupportedWeight(format!("weight `{}` has no holomorphic extension ψ", self.name))
        })
    }

    /// Smallest value of `Q` on the plane, located by sampling for weights
    /// without a closed form.
    pub fn min_q(&self) -> f64 {
        match &self.form {
            Form::Product(_) | Form::Elliptic(_) => self.q(Complex64::new(0.0, 0.0)),
            Form::Custom { .. } => {
                let mut best = f64::INFINITY;
                for i in 0..=40 {
                    let r = 4.0 * i as f64 / 40.0;
                    for k in 0..32 {
                        best = best.min(self.q(Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 16.0)));
                    }
                }
                best
            }
        }
    }

    /// Smallest value of `Q` on the circle `|z| = r` (exact for radial weights).
    pub fn min_q_on_circle(&self, r: f64) -> f64 {
        if let Some((q, _)) = self.radial_profile(r) {
            return q;
        }
        (0..64)
            .map(|k| self.q(Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 32.0)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Radius beyond which every weighted monomial `|z|^{2(n-1)} e^{-mQ}` is
    /// below `e^{-margin}` times its scale: `mQ(r) − 2(n−1) log r ≥ margin + m min Q`.
    pub fn truncation_radius(&self, m: f64, n: usize, margin: f64) -> f64 {
        let target = margin + m * self.min_q();
        let excess = |r: f64| m * self.min_q_on_circle(r) - 2.0 * (n as f64 - 1.0).max(0.0) * r.ln() - target;
        let mut r = 1.0;
        while excess(r) < 0.0 {
            r *= 1.25;
            if r > 1e6 {
                break;
            }
        }
        r
    }

    /// Checks `Q(z) ≥ ρ log|z|²` on rings `|z| = r` for the given radii.
    pub fn check_growth(&self, radii: &[f64]) -> bool {
        if !self.growth_rho.is_finite() {
            return radii.iter().all(|&r| {
                (0..32).all(|k| {
                    let z = Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 16.0);
                    self.q(z) >= (r * r).ln()
                })
            });
        }
        radii.iter().all(|&r| {
            (0..32).all(|k| {
                let z = Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 16.0);
                self.q(z) >= self.growth_rho * (r * r).ln()
            })
        })
    }
}

/// ¼-normalized five-point Laplacian.
pub fn fd_laplacian<F: Fn(Complex64) -> f64>(f: F, z: Complex64, h: f64) -> f64 {
    let c = f(z);
    let sum = f(z + h) + f(z - h) + f(z + Complex64::new(0.0, h)) + f(z - Complex64::new(0.0, h)) - 4.0 * c;
    sum / (4.0 * h * h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_points(n: usize, radius: f64, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| c(rng.gen_range(-radius..radius), rng.gen_range(-radius..radius))).collect()
    }

    #[test]
    fn fock_definition() {
        let w = Weight::fock();
        assert_eq!(w.q(c(2.0, 0.0)), 4.0);
        assert_eq!(w.laplacian(c(0.0, 1.0)), 1.0);
        let psi = w.psi().unwrap();
        assert!((psi.eval(c(1.0, 1.0), c(2.0, 0.0)) - c(2.0, 2.0)).norm() < 1e-15);
        assert!(w.is_radial());
        for z in random_points(100, 3.0, 1) {
            assert!((psi.eval(z, z.conj()).re - w.q(z)).abs() < 1e-12);
            assert!(psi.eval(z, z.conj()).im.abs() < 1e-12);
        }
    }

    #[test]
    fn radial_power_values() {
        let w = Weight::radial_power(2).unwrap();
        assert!((w.laplacian(c(1.0, 0.0)) - 4.0).abs() < 1e-14);
        assert!((w.psi().unwrap().eval(c(2.0, 0.0), c(1.0, 0.0)) - c(4.0, 0.0)).norm() < 1e-14);
        assert!(Weight::radial_power(0).is_err());
        let p1 = Weight::radial_power(1).unwrap();
        let f = Weight::fock();
        for z in random_points(100, 2.0, 2) {
            assert_eq!(p1.q(z), f.q(z));
            assert_eq!(p1.laplacian(z), f.laplacian(z));
        }
        let w3 = Weight::radial_power(3).unwrap();
        // Δ|z|⁶ = 9|z|⁴
        assert!((w3.laplacian(c(0.5, 0.5)) - 9.0 * 0.25).abs() < 1e-13);
    }

    #[test]
    fn quartic_values() {
        let w = Weight::quartic(0.1).unwrap();
        assert!((w.laplacian(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((w.laplacian(c(1.0, 0.0)) - 1.4).abs() < 1e-14);
        assert!(Weight::quartic(0.0).is_err());
        assert!(Weight::quartic(-1.0).is_err());
        let psi = w.psi().unwrap();
        for z in random_points(100, 2.0, 3) {
            assert!((psi.eval(z, z.conj()) - c(w.q(z), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn closed_form_laplacians_match_finite_differences() {
        let weights = [Weight::fock(), Weight::radial_power(2).unwrap(), Weight::quartic(0.3).unwrap(), Weight::elliptic(0.4).unwrap()];
        for w in &weights {
            for z in random_points(50, 1.5, 4) {
                let fd = fd_laplacian(|p| w.q(p), z, 1e-3);
                assert!((fd - w.laplacian(z)).abs() < 1e-4 * (1.0 + w.laplacian(z)), "{}", w.name());
            }
        }
    }

    #[test]
    fn log_laplacian_term_matches_finite_differences() {
        let w = Weight::quartic(0.1).unwrap();
        for z in random_points(30, 1.2, 5) {
            let fd = fd_laplacian(|p| w.laplacian(p).ln(), z, 1e-3);
            assert!((fd - w.laplacian_log_laplacian(z)).abs() < 1e-5);
        }
        let w = Weight::radial_power(2).unwrap();
        assert!(w.laplacian_log_laplacian(c(0.7, -0.2)).abs() < 1e-12);
    }

    #[test]
    fn psi_mixed_partials_match_finite_differences() {
        let h = 1e-3;
        let weights = [Weight::quartic(0.2).unwrap(), Weight::radial_power(3).unwrap(), Weight::elliptic(0.3).unwrap()];
        for w in &weights {
            let psi = w.psi().unwrap();
            for (i, z) in random_points(10, 1.0, 6).into_iter().enumerate() {
                let v = random_points(10, 1.0, 7)[i];
                let hz = c(h, 0.0);
                let d1 = (psi.eval(z + hz, v) - psi.eval(z - hz, v)) / (2.0 * h);
                let d2 = (psi.eval(z, v + hz) - psi.eval(z, v - hz)) / (2.0 * h);
                let cross = |f: &dyn Fn(Complex64, Complex64) -> Complex64| {
                    (f(z + hz, v + hz) - f(z + hz, v - hz) - f(z - hz, v + hz) + f(z - hz, v - hz)) / (4.0 * h * h)
                };
                let d12 = cross(&|a, b| psi.eval(a, b));
                let d112 = cross(&|a, b| psi.d1(a, b));
                let d122 = cross(&|a, b| psi.d2(a, b));
                let d1122 = cross(&|a, b| psi.d1d2(a, b));
                assert!((d1 - psi.d1(z, v)).norm() < 1e-5);
                assert!((d2 - psi.d2(z, v)).norm() < 1e-5);
                assert!((d12 - psi.d1d2(z, v)).norm() < 1e-5);
                assert!((d112 - psi.d1d1d2(z, v)).norm() < 1e-5);
                assert!((d122 - psi.d1d2d2(z, v)).norm() < 1e-5);
                assert!((d1122 - psi.d1d1d2d2(z, v)).norm() < 1e-5);
            }
        }
    }

    #[test]
    fn growth_condition_on_rings() {
        assert!(Weight::fock().check_growth(&[2.0, 5.0, 50.0]));
        assert!(Weight::quartic(0.1).unwrap().check_growth(&[2.0, 5.0, 50.0]));
        assert!(Weight::elliptic(0.5).unwrap().check_growth(&[2.0, 5.0, 50.0]));
    }

    #[test]
    fn custom_weight_uses_finite_differences() {
        let w = Weight::custom("shifted", |z: Complex64| z.norm_sqr() + 0.5 * z.re, 1.0, false);
        assert!(w.psi().is_none());
        assert!((w.laplacian(c(0.3, 0.2)) - 1.0).abs() < 1e-4);
        assert!(w.require_psi().is_err());
    }

    #[test]
    fn descriptor_json() {
        let d: WeightDescriptor = serde_json::from_str(r#"{"kind": "quartic", "c": 0.1}"#).unwrap();
        assert_eq!(d, WeightDescriptor::Quartic { c: 0.1 });
        let d: WeightDescriptor = serde_json::from_str(r#"{"kind": "radial_power", "p": 2}"#).unwrap();
        assert_eq!(d.build().unwrap().laplacian(c(1.0, 0.0)), 4.0);
        let d: WeightDescriptor = serde_json::from_str(r#"{"kind": "fock"}"#).unwrap();
        assert_eq!(d.build().unwrap().name(), "fock");
        assert!(serde_json::from_str::<WeightDescriptor>(r#"{"kind": "cubic"}"#).is_err());
    }
}
