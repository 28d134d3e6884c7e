//! The first-order approximating kernel
//! `K_m^1(z,w) = (m b₀(z,w̄) + b₁(z,w̄)) e^{mψ(z,w̄)}` with `b₀ = ∂₁∂₂ψ` and
//! `b₁ = ½ ∂₁∂₂ log ∂₁∂₂ψ`, plus diagnostics comparing it and its diagonal
//! restriction with the true kernel.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::berezin::BerezinEvaluator;
use crate::error::{Error, Result};
use crate::kernel::ReproducingKernel;
use crate::numerics::LogValue;
use crate::potential::EquilibriumResult;
use crate::table::Table;
use crate::weights::{BivariateAnalytic, Weight};

#[derive(Clone, Debug)]
pub struct ExpansionEvaluator {
    weight: Weight,
    m: f64,
}

impl ExpansionEvaluator {
    pub fn new(weight: &Weight, m: f64) -> Result<Self> {
        weight.require_psi()?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::invalid(format!("m must be positive, got {m}")));
        }
        Ok(ExpansionEvaluator { weight: weight.clone(), m })
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    fn psi(&self) -> &dyn BivariateAnalytic {
        self.weight.psi().expect("checked in new")
    }

    pub fn b0(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.psi().d1d2(z, w)
    }

    pub fn b1(&self, z: Complex64, w: Complex64) -> Result<Complex64> {
        let p = self.psi();
        let d12 = p.d1d2(z, w);
        if d12.norm() == 0.0 {
            return Err(Error::OutOfDomain(format!("b0 vanishes at ({z}, {w})")));
        }
        let num = p.d1d1d2d2(z, w) * d12 - p.d1d1d2(z, w) * p.d1d2d2(z, w);
        Ok(num / (2.0 * d12 * d12))
    }

    /// `K_m^1(z,w) e^{-m(Q(z)+Q(w))/2}`.
    pub fn approx_kernel_log(&self, z: Complex64, w: Complex64) -> Result<LogValue> {
        let wb = w.conj();
        let amplitude = self.b0(z, wb) * self.m + self.b1(z, wb)?;
        let psi = self.psi().eval(z, wb) * self.m;
        let shift = psi.re - 0.5 * self.m * (self.weight.q(z) + self.weight.q(w));
        Ok(LogValue::from_complex(amplitude) * LogValue::from_polar_log(shift, psi.im))
    }
}

/// `b₀(z,w) = ∂₁∂₂ψ(z,w)`.
pub fn b0(weight: &Weight, z: Complex64, w: Complex64) -> Result<Complex64> {
    Ok(weight.require_psi()?.d1d2(z, w))
}

/// `b₁(z,w)` from the quotient formula.
pub fn b1(weight: &Weight, z: Complex64, w: Complex64) -> Result<Complex64> {
    ExpansionEvaluator::new(weight, 1.0)?.b1(z, w)
}

/// `mΔQ(z) + ½Δ log ΔQ(z)`.
pub fn diag_expansion(weight: &Weight, m: f64, z: Complex64) -> Result<f64> {
    let lap = weight.laplacian(z);
    if !(lap > 0.0) {
        return Err(Error::NotInX { z, laplacian: lap });
    }
    Ok(m * lap + 0.5 * weight.laplacian_log_laplacian(z))
}

/// `|K_{m,n}(z,z)e^{-mQ(z)} − diag_expansion|`.
pub fn diag_residual<K: ReproducingKernel + ?Sized>(kernel: &K, z: Complex64) -> Result<f64> {
    Ok((kernel.one_point(z) - diag_expansion(kernel.weight(), kernel.m(), z)?).abs())
}

/// `R(z,w) = 2Re ψ(z,w̄) − Q(z) − Q(w) + ΔQ(w)|w−z|²`, which is `O(|w−z|³)`.
pub fn taylor_remainder(weight: &Weight, z: Complex64, w: Complex64) -> Result<f64> {
    let psi = weight.require_psi()?;
    Ok(2.0 * psi.eval(z, w.conj()).re - weight.q(z) - weight.q(w) + weight.laplacian(w) * (w - z).norm_sqr())
}

/// Half the distance from `z_0` to the complement of `S_τ ∩ X`, capped at ½.
pub fn default_epsilon(equilibrium: &EquilibriumResult, weight: &Weight, z0: Complex64) -> f64 {
    (0.5 * equilibrium.distance_to_complement(weight, z0)).min(0.5)
}

/// Points of `D(z_0; ε)`: the centre and two rings of six.
fn disk_samples(z0: Complex64, eps: f64) -> Vec<Complex64> {
    let mut pts = vec![z0];
    for (r, offset) in [(0.5 * eps, 0.0), (eps, PI / 6.0)] {
        for k in 0..6 {
            pts.push(z0 + Complex64::from_polar(r, offset + k as f64 * PI / 3.0));
        }
    }
    pts
}

/// `sup |K_{m,n}(z,w) − K_m^1(z,w)| e^{-m(Q(z)+Q(w))/2}` over pairs from
/// a fixed sample of `D(z_0; ε)`.
pub fn expansion_sup_error<K: ReproducingKernel + ?Sized>(kernel: &K, z0: Complex64, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("epsilon must be positive, got {eps}")));
    }
    let ev = ExpansionEvaluator::new(kernel.weight(), kernel.m())?;
    let pts = disk_samples(z0, eps);
    let mut worst = 0.0f64;
    for &z in &pts {
        for &w in &pts {
            let exact = kernel.weighted_kernel(z, w).to_complex();
            let approx = ev.approx_kernel_log(z, w)?.to_complex();
            worst = worst.max((exact - approx).norm());
        }
    }
    Ok(worst)
}

/// Compensated log-profile of a Berezin density along a ray.
#[derive(Clone, Debug, Serialize)]
pub struct OffDiagReport {
    pub z0: Complex64,
    pub ray_direction: Complex64,
    pub m: f64,
    /// `(t, log density, m(Q − Q̂_τ))` at `z_0 + t·direction`.
    pub samples: Vec<(f64, f64, f64)>,
    pub fitted_slope: f64,
    pub d_k: f64,
    pub a_k: f64,
}

impl OffDiagReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["distance", "log_density", "compensation", "profile"]);
        for &(d, l, c) in &self.samples {
            t.push(vec![d.into(), l.into(), c.into(), (l + c).into()]);
        }
        t
    }
}

/// Samples `log B(z_0 + t·u) + m(Q − Q̂_τ)` and fits its slope against
/// `√m·min(d_K, t)` by least squares over `t ≤ d_K`.
pub fn offdiag_profile<K: ReproducingKernel + ?Sized>(
    kernel: &K,
    z0: Complex64,
    direction: Complex64,
    distances: &[f64],
    equilibrium: &EquilibriumResult,
) -> Result<OffDiagReport> {
    let weight = kernel.weight();
    let m = kernel.m();
    let d_k = equilibrium.distance_to_complement(weight, z0);
    if !(d_k > 0.0) {
        return Err(Error::invalid(format!("z0 = {z0} is not interior to the droplet")));
    }
    if !(direction.norm() > 0.0) {
        return Err(Error::invalid("direction must be nonzero"));
    }
    let u = direction / direction.norm();
    if distances.is_empty() || distances[0] <= 0.0 || distances.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("distances must be positive and strictly increasing"));
    }
    let mut a_k = f64::INFINITY;
    for ir in 0..=16 {
        let r = 0.5 * d_k * ir as f64 / 16.0;
        for k in 0..32 {
            a_k = a_k.min(weight.laplacian(z0 + Complex64::from_polar(r, k as f64 * PI / 16.0)));
        }
    }
    let ev = BerezinEvaluator::new(kernel, z0)?;
    let reference = ev.log_density(z0);
    let samples: Vec<(f64, f64, f64)> = distances
        .iter()
        .map(|&t| {
            let z = z0 + u * t;
            (t, ev.log_density(z), m * (weight.q(z) - equilibrium.eval_qhat(z)))
        })
        .collect();
    let fit: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(t, l, _)| *t <= d_k && *l > reference - 700.0)
        .map(|&(t, l, c)| (m.sqrt() * t.min(d_k), l + c))
        .collect();
    if fit.len() < 2 {
        return Err(Error::invalid("fewer than two usable samples within d_K"));
    }
    Ok(OffDiagReport { z0, ray_direction: u, m, samples, fitted_slope: least_squares_slope(&fit), d_k, a_k })
}

pub(crate) fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockKernel;
    use crate::kernel::BergmanSpace;
    use crate::potential::radial_equilibrium;
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
    fn coefficient_examples() {
        let fock = Weight::fock();
        assert_eq!(b0(&fock, c(0.3, 1.0), c(2.0, -1.0)).unwrap(), c(1.0, 0.0));
        assert_eq!(b1(&fock, c(0.3, 1.0), c(2.0, -1.0)).unwrap(), c(0.0, 0.0));
        let q = Weight::quartic(0.1).unwrap();
        let z = c(0.4, 0.7);
        assert!((b0(&q, z, z.conj()).unwrap().re - q.laplacian(z)).abs() < 1e-14);
        assert!((b1(&q, c(1.0, 0.0), c(1.0, 0.0)).unwrap().re - 0.2 / 1.96).abs() < 1e-14);
        let p2 = Weight::radial_power(2).unwrap();
        assert!((b0(&p2, c(1.0, 0.0), c(1.0, 0.0)).unwrap() - c(4.0, 0.0)).norm() < 1e-14);
        assert!(matches!(b1(&p2, c(0.0, 0.0), c(0.0, 0.0)), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn anti_diagonal_b1_is_half_log_laplacian() {
        let q = Weight::quartic(0.1).unwrap();
        for z in random_points(10, 1.5, 3) {
            let h = 1e-3;
            let fd = crate::weights::fd_laplacian(|p| q.laplacian(p).ln(), z, h);
            assert!((b1(&q, z, z.conj()).unwrap().re - 0.5 * fd).abs() < 1e-6);
        }
    }

    #[test]
    fn funrel_identity() {
        // b₁ = ½ ∂_w (∂_z b₀ / b₀), differentiated numerically in w.
        for weight in [Weight::quartic(0.1).unwrap(), Weight::radial_power(3).unwrap(), Weight::elliptic(0.3).unwrap()] {
            let psi = weight.psi().unwrap();
            let g = |z: Complex64, w: Complex64| psi.d1d1d2(z, w) / psi.d1d2(z, w);
            for (z, w) in random_points(8, 1.0, 5).into_iter().zip(random_points(8, 1.0, 6)) {
                let (z, w) = (z + c(0.6, 0.0), w + c(0.6, 0.0));
                let h = 1e-3;
                let d = (-g(z, w + 2.0 * h) + 8.0 * g(z, w + h) - 8.0 * g(z, w - h) + g(z, w - 2.0 * h)) / (12.0 * h);
                assert!((b1(&weight, z, w).unwrap() - 0.5 * d).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn fock_approx_kernel_is_gaussian() {
        let ev = ExpansionEvaluator::new(&Weight::fock(), 7.0).unwrap();
        for (z, w) in random_points(10, 2.0, 7).into_iter().zip(random_points(10, 2.0, 8)) {
            let v = ev.approx_kernel_log(z, w).unwrap();
            assert!((v.abs() - 7.0 * (-3.5 * (z - w).norm_sqr()).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn approx_kernel_is_hermitian() {
        let ev = ExpansionEvaluator::new(&Weight::quartic(0.2).unwrap(), 20.0).unwrap();
        for (z, w) in random_points(20, 1.0, 9).into_iter().zip(random_points(20, 1.0, 10)) {
            let a = ev.approx_kernel_log(z, w).unwrap().to_complex();
            let b = ev.approx_kernel_log(w, z).unwrap().to_complex().conj();
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        }
    }

    #[test]
    fn approx_kernel_diagonal() {
        let q = Weight::quartic(0.1).unwrap();
        let ev = ExpansionEvaluator::new(&q, 10.0).unwrap();
        let z = c(1.0, 0.0);
        let d = ev.approx_kernel_log(z, z).unwrap().to_f64();
        assert!((d - diag_expansion(&q, 10.0, z).unwrap()).abs() < 1e-12);
        assert!((d - 14.10204).abs() < 1e-5);
    }

    #[test]
    fn diag_expansion_examples() {
        assert_eq!(diag_expansion(&Weight::fock(), 9.0, c(0.5, 0.5)).unwrap(), 9.0);
        let p2 = Weight::radial_power(2).unwrap();
        let z = c(0.6, -0.3);
        assert!((diag_expansion(&p2, 5.0, z).unwrap() - 20.0 * z.norm_sqr()).abs() < 1e-12);
        assert!(matches!(diag_expansion(&p2, 5.0, c(0.0, 0.0)), Err(Error::NotInX { .. })));
        assert!(ExpansionEvaluator::new(&Weight::custom("flat", |z| z.norm_sqr(), 1.0, true), 1.0).is_err());
    }

    #[test]
    fn fock_residual_is_tail() {
        let k = FockKernel::new(40.0, 40).unwrap();
        let r = diag_residual(&k, c(0.3, 0.0)).unwrap();
        assert!((0.0..=1e-3).contains(&r));
    }

    #[test]
    fn taylor_remainder_is_cubic() {
        let q = Weight::quartic(0.3).unwrap();
        for (z, dir) in random_points(6, 1.0, 11).into_iter().zip(random_points(6, 1.0, 12)) {
            let u = dir / dir.norm();
            let ratios: Vec<f64> = [1e-1, 5e-2, 2.5e-2, 1.25e-2]
                .iter()
                .map(|&d| taylor_remainder(&q, z, z + u * d).unwrap().abs() / d.powi(3))
                .collect();
            let bound = 4.0 * ratios[0] + 1.0;
            assert!(ratios.iter().all(|&r| r <= bound), "{ratios:?}");
        }
    }

    #[test]
    fn expansion_error_is_order_one_over_m() {
        let q = Weight::quartic(0.1).unwrap();
        let eq = radial_equilibrium(&q, 1.0).unwrap();
        let z0 = c(0.3, 0.0);
        let eps = default_epsilon(&eq, &q, z0);
        assert!((eps - 0.5).abs() < 1e-12 || eps < 0.5);
        let errs: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|&m| expansion_sup_error(&BergmanSpace::radial(&q, m, m as usize).unwrap(), z0, eps).unwrap())
            .collect();
        let constant = errs[0] * 16.0;
        for (e, m) in errs.iter().zip([16.0, 32.0, 64.0]) {
            assert!(*e <= 1.5 * constant / m, "{errs:?}");
        }
    }

    #[test]
    fn offdiag_fock_slope() {
        let eq = radial_equilibrium(&Weight::fock(), 1.0).unwrap();
        let dist: Vec<f64> = (1..=40).map(|i| i as f64 * 0.025).collect();
        let slope = |m: f64| {
            let k = FockKernel::new(m, m as usize).unwrap();
            offdiag_profile(&k, c(0.0, 0.0), c(1.0, 0.0), &dist, &eq).unwrap()
        };
        let r16 = slope(16.0);
        let r64 = slope(64.0);
        assert!(r16.fitted_slope < 0.0);
        assert!(r64.fitted_slope.abs() >= 1.2 * r16.fitted_slope.abs());
        assert!((r16.d_k - 1.0).abs() < 1e-9);
        assert_eq!(r16.a_k, 1.0);
        assert_eq!(r16.to_table().len(), 40);
        let k = FockKernel::new(16.0, 16).unwrap();
        assert!(offdiag_profile(&k, c(1.5, 0.0), c(1.0, 0.0), &dist, &eq).is_err());
        assert!(offdiag_profile(&k, c(0.0, 0.0), c(1.0, 0.0), &[0.2, 0.1], &eq).is_err());
    }
}
