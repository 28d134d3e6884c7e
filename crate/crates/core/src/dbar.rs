//! The `∂̄` problem in `L²_{mQ,n}`: Cauchy transform, Bergman projection
//! onto `H_{m,n}`, the norm-minimal solution `u* = Cf − P_{m,n} Cf`, and a
//! numerical check of the weighted bound
//! `‖u*‖²_{mQ} ≤ 2e^{M₀ q_τ} / (am + β̂ c_τ) · ‖f‖²_{mQ}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{BergmanSpace, ReproducingKernel};
use crate::numerics::{CompensatedComplex, LineRule, PlanarQuadrature};
use crate::potential::EquilibriumResult;
use crate::weights::Weight;

/// `]x[`, the largest integer strictly smaller than `x`.
pub fn strict_floor(x: f64) -> i64 {
    let f = x.floor();
    if f == x { f as i64 - 1 } else { f as i64 }
}

/// The compactly supported bump `A·exp(1 − 1/(1 − |z−c|²/ρ²))`, equal to
/// `A` at the centre.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothBump {
    pub center: Complex64,
    pub radius: f64,
    pub amplitude: f64,
}

impl SmoothBump {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid(format!("bump radius must be positive, got {radius}")));
        }
        Ok(SmoothBump { center, radius, amplitude: 1.0 })
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let s = (z - self.center).norm_sqr() / (self.radius * self.radius);
        if s >= 1.0 { 0.0 } else { self.amplitude * (1.0 - 1.0 / (1.0 - s)).exp() }
    }

    /// Midpoint grid covering the support with `cells` cells per diameter.
    pub fn quadrature(&self, cells: usize) -> Result<PlanarQuadrature> {
        PlanarQuadrature::cartesian(self.center, self.radius, 2.0 * self.radius / cells.max(2) as f64)
    }
}

/// `Cf(w) = ∫ f(z)/(w − z) dA(z)` for `f` sampled on a quadrature.
///
/// The node nearest to `w` is dropped when `w` lies within half a cell of
/// it: `1/(w − z)` averages to zero over a disk centred at `w`.
#[derive(Clone, Debug)]
pub struct CauchyTransform {
    nodes: Vec<Complex64>,
    weighted: Vec<Complex64>,
    exclusion: Vec<f64>,
}

impl CauchyTransform {
    pub fn new<F: Fn(Complex64) -> Complex64>(f: F, quadrature: &PlanarQuadrature) -> Self {
        let mut nodes = Vec::new();
        let mut weighted = Vec::new();
        let mut exclusion = Vec::new();
        for (z, w) in quadrature.nodes.iter().zip(&quadrature.weights) {
            let v = f(*z);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            nodes.push(*z);
            weighted.push(v * *w);
            exclusion.push(0.5 * (w * PI).sqrt());
        }
        CauchyTransform { nodes, weighted, exclusion }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        let mut acc = CompensatedComplex::default();
        for ((z, fw), ex) in self.nodes.iter().zip(&self.weighted).zip(&self.exclusion) {
            let d = w - z;
            if d.norm() < *ex {
                continue;
            }
            acc.add(fw / d);
        }
        acc.value()
    }

    /// `∫ f dA`, the coefficient of `1/w` at infinity.
    pub fn total_mass(&self) -> Complex64 {
        self.weighted.iter().sum()
    }
}

pub fn cauchy_transform<F: Fn(Complex64) -> Complex64>(f: F, quadrature: &PlanarQuadrature, w: Complex64) -> Complex64 {
    CauchyTransform::new(f, quadrature).eval(w)
}

/// A quadrature on `D(0; r)` fine enough for weighted `L²` norms in `H_{m,n}`.
pub fn norm_quadrature(weight: &Weight, m: f64, n: usize) -> PlanarQuadrature {
    let r = weight.truncation_radius(m, n + 1, 40.0);
    let panels = (2.0 * r * m.sqrt()).ceil() as usize + 8;
    let rule = LineRule::uniform(0.0, r, panels, 12);
    let n_angular = (2 * n + 16).next_power_of_two().max(64);
    PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, n_angular)
}

/// `⟨u, e_j⟩_{mQ}` for `j < n`, with `u` given by its values at the nodes.
pub fn bergman_project(basis: &BergmanSpace, u_values: &[Complex64], quadrature: &PlanarQuadrature) -> Vec<Complex64> {
    let half = 0.5 * basis.m();
    let w = basis.weight();
    let rows: Vec<Vec<Complex64>> = quadrature.map_nodes(|z| basis.weighted_basis(z));
    let damp: Vec<f64> = quadrature.nodes.iter().map(|z| (-half * w.q(*z)).exp()).collect();
    project_rows(&rows, u_values, &damp, &quadrature.weights, basis.n())
}

fn project_rows(rows: &[Vec<Complex64>], u: &[Complex64], damp: &[f64], weights: &[f64], n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| {
            let mut acc = CompensatedComplex::default();
            for i in 0..rows.len() {
                acc.add(u[i] * damp[i] * rows[i][j].conj() * weights[i]);
            }
            acc.value()
        })
        .collect()
}

/// `u* = Cf − P_{m,n} Cf` sampled on a norm quadrature.
#[derive(Clone, Debug)]
pub struct MinimalSolution<'a> {
    basis: &'a BergmanSpace,
    cauchy: CauchyTransform,
    coefficients: Vec<Complex64>,
    /// `u* e^{-mQ/2}` at the quadrature nodes.
    weighted_values: Vec<Complex64>,
    particular_norm_sq: f64,
    norm_sq: f64,
    orthogonality_residual: f64,
}

impl<'a> MinimalSolution<'a> {
    pub fn new<F: Fn(Complex64) -> Complex64>(
        basis: &'a BergmanSpace,
        f: F,
        f_quadrature: &PlanarQuadrature,
        quadrature: &PlanarQuadrature,
    ) -> Self {
        let cauchy = CauchyTransform::new(f, f_quadrature);
        let half = 0.5 * basis.m();
        let weight = basis.weight();
        let damp: Vec<f64> = quadrature.nodes.iter().map(|z| (-half * weight.q(*z)).exp()).collect();
        let cf: Vec<Complex64> = quadrature.nodes.par_iter().map(|z| cauchy.eval(*z)).collect();
        let rows: Vec<Vec<Complex64>> = quadrature.map_nodes(|z| basis.weighted_basis(z));
        let n = basis.n();
        let coefficients = project_rows(&rows, &cf, &damp, &quadrature.weights, n);
        let weighted_values: Vec<Complex64> = (0..rows.len())
            .map(|i| {
                let mut acc = CompensatedComplex::default();
                acc.add(cf[i] * damp[i]);
                for j in 0..n {
                    acc.add(-coefficients[j] * rows[i][j]);
                }
                acc.value()
            })
            .collect();
        let particular: Vec<f64> = cf.iter().zip(&damp).map(|(c, d)| (c * d).norm_sqr()).collect();
        let particular_norm_sq = quadrature.sum_values(&particular);
        let sq: Vec<f64> = weighted_values.iter().map(|v| v.norm_sqr()).collect();
        let norm_sq = quadrature.sum_values(&sq);
        let ones = vec![1.0; rows.len()];
        let residual_coeffs = project_rows(&rows, &weighted_values, &ones, &quadrature.weights, n);
        let worst = residual_coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let orthogonality_residual = if norm_sq > 0.0 { worst / norm_sq.sqrt() } else { 0.0 };
        MinimalSolution { basis, cauchy, coefficients, weighted_values, particular_norm_sq, norm_sq, orthogonality_residual }
    }

    /// Coefficients of `P_{m,n} Cf` in the orthonormal basis.
    pub fn projection_coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// `u*(w)`.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let lift = 0.5 * self.basis.m() * self.basis.weight().q(w);
        let mut acc = CompensatedComplex::default();
        acc.add(self.cauchy.eval(w));
        for (c, e) in self.coefficients.iter().zip(self.basis.weighted_basis_log(w)) {
            acc.add(-c * e.scale_log(lift).to_complex());
        }
        acc.value()
    }

    /// `‖u*‖²_{mQ}`.
    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// `‖Cf‖²_{mQ}`.
    pub fn particular_norm_sq(&self) -> f64 {
        self.particular_norm_sq
    }

    /// `max_j |⟨u*, e_j⟩_{mQ}| / ‖u*‖_{mQ}`.
    pub fn orthogonality_residual(&self) -> f64 {
        self.orthogonality_residual
    }

    /// `‖u* + Σ g_j e_j‖²_{mQ}` on the same quadrature.
    pub fn perturbed_norm_sq(&self, g: &[Complex64], quadrature: &PlanarQuadrature) -> f64 {
        let vals: Vec<f64> = quadrature
            .nodes
            .iter()
            .zip(&self.weighted_values)
            .map(|(z, u)| (u + self.basis.weighted_combination(g, *z)).norm_sqr())
            .collect();
        quadrature.sum_values(&vals)
    }
}

/// Values of `u*` at `eval_points`.
pub fn minimal_solution<F: Fn(Complex64) -> Complex64>(
    basis: &BergmanSpace,
    f: F,
    f_quadrature: &PlanarQuadrature,
    eval_points: &[Complex64],
) -> Vec<Complex64> {
    let q = norm_quadrature(basis.weight(), basis.m(), basis.n());
    let sol = MinimalSolution::new(basis, f, f_quadrature, &q);
    eval_points.par_iter().map(|w| sol.eval(*w)).collect()
}

/// Constants entering the bound, with `a = inf ΔQ` over the support of the
/// datum and `m₀ = max(2M₀, (1 + M₀)/τ)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DbarBoundParams {
    pub m_zero_growth: f64,
    pub bpar: f64,
    pub tau: f64,
    pub q_tau: f64,
    pub c_tau: f64,
    pub a: f64,
    pub m0: f64,
}

impl DbarBoundParams {
    /// Checks `β̂ log(1+|z|²) ≤ M₀ Q̂_τ(z)` on rings out to `|z| = 100`.
    pub fn new(m_zero_growth: f64, bpar: f64, equilibrium: &EquilibriumResult, weight: &Weight, support: &SmoothBump) -> Result<Self> {
        if !(m_zero_growth > 0.0 && bpar > 0.0) {
            return Err(Error::invalid("M0 and bpar must be positive"));
        }
        let radii = [0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 30.0, 100.0];
        for r in radii {
            for k in 0..32 {
                let z = Complex64::from_polar(r, k as f64 * PI / 16.0);
                let lhs = bpar * (1.0 + r * r).ln();
                if lhs > m_zero_growth * equilibrium.eval_qhat(z) + 1e-12 {
                    return Err(Error::GrowthViolation(format!(
                        "bpar·log(1+|z|²) exceeds M0·Q̂_τ at z = {z}"
                    )));
                }
            }
        }
        let mut a = f64::INFINITY;
        for ir in 0..=16 {
            let r = support.radius * ir as f64 / 16.0;
            for k in 0..32 {
                a = a.min(weight.laplacian(support.center + Complex64::from_polar(r, k as f64 * PI / 16.0)));
            }
        }
        let tau = equilibrium.tau();
        Ok(DbarBoundParams {
            m_zero_growth,
            bpar,
            tau,
            q_tau: equilibrium.q_tau(),
            c_tau: equilibrium.c_tau(),
            a,
            m0: (2.0 * m_zero_growth).max((1.0 + m_zero_growth) / tau),
        })
    }

    /// `n ≥ ](m − M₀)τ + β̂[` and `m ≥ m₀`.
    pub fn in_regime(&self, m: f64, n: usize) -> bool {
        let threshold = strict_floor((m - self.m_zero_growth) * self.tau + self.bpar);
        n as i64 >= threshold && m >= self.m0
    }

    /// `2e^{M₀ q_τ} / (am + β̂ c_τ)`.
    pub fn factor(&self, m: f64) -> f64 {
        2.0 * (self.m_zero_growth * self.q_tau).exp() / (self.a * m + self.bpar * self.c_tau)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorBhRecord {
    pub weight: String,
    pub m: f64,
    pub n: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub regime_ok: bool,
    pub support_ok: bool,
    pub orthogonality_residual: f64,
}

/// Computes `‖u*‖²` and the bound for the datum `f = bump`.
pub fn verify_cor_bh(
    basis: &BergmanSpace,
    bump: &SmoothBump,
    params: &DbarBoundParams,
    equilibrium: &EquilibriumResult,
    f_quadrature: &PlanarQuadrature,
    quadrature: &PlanarQuadrature,
) -> CorBhRecord {
    let weight = basis.weight();
    let m = basis.m();
    let f = |z: Complex64| Complex64::new(bump.eval(z), 0.0);
    let sol = MinimalSolution::new(basis, f, f_quadrature, quadrature);
    let f_norm_sq = f_quadrature.integrate(|z| bump.eval(z).powi(2) * (-m * weight.q(z)).exp());
    let lhs = sol.norm_sq();
    let rhs = params.factor(m) * f_norm_sq;
    let ratio = if rhs == 0.0 { 0.0 } else { lhs / rhs };
    let support_ok = (0..64).all(|k| {
        let z = bump.center + Complex64::from_polar(bump.radius, k as f64 * PI / 32.0);
        equilibrium.distance_to_complement(weight, z) > 0.0
    });
    CorBhRecord {
        weight: weight.name().to_string(),
        m,
        n: basis.n(),
        lhs,
        rhs,
        ratio,
        regime_ok: params.in_regime(m, basis.n()),
        support_ok,
        orthogonality_residual: sol.orthogonality_residual(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::radial_equilibrium;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// For radial `f`, `Cf(w) = F(|w|)/w` with `F(r) = 2∫₀ʳ f(s) s ds`.
    fn radial_cauchy(bump: &SmoothBump, w: Complex64) -> Complex64 {
        let r = w.norm().min(bump.radius);
        let rule = LineRule::uniform(0.0, r, 40, 12);
        let mass: f64 = rule.nodes.iter().zip(&rule.weights).map(|(s, wt)| 2.0 * wt * s * bump.eval(c(*s, 0.0))).sum();
        mass / w
    }

    #[test]
    fn strict_floor_cases() {
        assert_eq!(strict_floor(3.0), 2);
        assert_eq!(strict_floor(3.5), 3);
        assert_eq!(strict_floor(0.2), 0);
        assert_eq!(strict_floor(-1.0), -2);
        assert_eq!(strict_floor(-0.5), -1);
    }

    #[test]
    fn cauchy_of_zero_is_zero() {
        let q = PlanarQuadrature::cartesian(c(0.0, 0.0), 0.3, 0.01).unwrap();
        assert_eq!(cauchy_transform(|_| c(0.0, 0.0), &q, c(0.1, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn cauchy_matches_radial_formula() {
        let bump = SmoothBump::new(c(0.0, 0.0), 0.3).unwrap();
        let ct = CauchyTransform::new(|z| c(bump.eval(z), 0.0), &bump.quadrature(120).unwrap());
        for w in [c(2.0, 1.0), c(0.5, 0.0), c(0.1, 0.05), c(-0.2, 0.1)] {
            let exact = radial_cauchy(&bump, w);
            let err = (ct.eval(w) - exact).norm();
            assert!(err < 2e-3 * exact.norm().max(1e-3), "{w}: {err}");
        }
        let far = c(50.0, -20.0);
        assert!((ct.eval(far) * far - ct.total_mass()).norm() < 1e-6);
    }

    #[test]
    fn cauchy_inverts_dbar() {
        let bump = SmoothBump::new(c(0.1, -0.05), 0.3).unwrap();
        let f = |z: Complex64| c(bump.eval(z), 0.0) * (c(1.0, 0.0) + z);
        let ct = CauchyTransform::new(f, &bump.quadrature(800).unwrap());
        let p = c(0.15, 0.0);
        let h = 1e-2;
        let d = |e: Complex64| (-ct.eval(p + e * 2.0) + ct.eval(p + e) * 8.0 - ct.eval(p - e) * 8.0 + ct.eval(p - e * 2.0)) / (12.0 * h);
        let (dx, dy) = (d(c(h, 0.0)), d(c(0.0, h)));
        let dbar = 0.5 * (dx + c(0.0, 1.0) * dy);
        assert!((dbar - f(p)).norm() < 2e-2 * f(p).norm(), "{dbar} vs {}", f(p));
    }

    #[test]
    fn projection_of_basis_element() {
        let w = Weight::quartic(0.1).unwrap();
        let basis = BergmanSpace::radial(&w, 6.0, 6).unwrap();
        let q = norm_quadrature(&w, 6.0, 6);
        let k = 2;
        let u: Vec<Complex64> = q.nodes.iter().map(|z| basis.weighted_basis(*z)[k] * (3.0 * w.q(*z)).exp()).collect();
        let coeffs = bergman_project(&basis, &u, &q);
        for (j, cj) in coeffs.iter().enumerate() {
            let target = if j == k { 1.0 } else { 0.0 };
            assert!((cj - target).norm() < 1e-10, "{j}: {cj}");
        }
        let again: Vec<Complex64> = q.nodes.iter().map(|z| basis.weighted_combination(&coeffs, *z) * (3.0 * w.q(*z)).exp()).collect();
        let twice = bergman_project(&basis, &again, &q);
        for (a, b) in coeffs.iter().zip(&twice) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn projection_kills_antiholomorphic_factor() {
        let w = Weight::fock();
        let basis = BergmanSpace::radial(&w, 4.0, 5).unwrap();
        let q = norm_quadrature(&w, 4.0, 5);
        let bump = SmoothBump::new(c(0.0, 0.0), 0.8).unwrap();
        let u: Vec<Complex64> = q.nodes.iter().map(|z| z.conj() * bump.eval(*z)).collect();
        assert!(bergman_project(&basis, &u, &q).iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn minimal_solution_properties() {
        let w = Weight::fock();
        let (m, n) = (8.0, 8);
        let basis = BergmanSpace::radial(&w, m, n).unwrap();
        let q = norm_quadrature(&w, m, n);
        let bump = SmoothBump::new(c(0.0, 0.0), 0.3).unwrap();
        let fq = bump.quadrature(60).unwrap();
        let sol = MinimalSolution::new(&basis, |z| c(bump.eval(z), 0.0) * (c(0.5, 0.0) + z * z), &fq, &q);
        assert!(sol.orthogonality_residual() < 1e-6);
        assert!(sol.norm_sq() <= sol.particular_norm_sq());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.1).collect();
            assert!(sol.perturbed_norm_sq(&g, &q) >= sol.norm_sq());
        }
        let zero = minimal_solution(&basis, |_| c(0.0, 0.0), &fq, &[c(0.3, 0.0), c(1.0, 1.0)]);
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn bound_holds_for_fock() {
        let w = Weight::fock();
        let eq = radial_equilibrium(&w, 1.0).unwrap();
        let bump = SmoothBump::new(c(0.0, 0.0), 0.3).unwrap();
        let params = DbarBoundParams::new(1.0, 0.5, &eq, &w, &bump).unwrap();
        assert_eq!(params.a, 1.0);
        assert_eq!(params.m0, 2.0);
        let basis = BergmanSpace::radial(&w, 8.0, 8).unwrap();
        let rec = verify_cor_bh(&basis, &bump, &params, &eq, &bump.quadrature(60).unwrap(), &norm_quadrature(&w, 8.0, 8));
        assert!(rec.regime_ok && rec.support_ok);
        assert!(rec.ratio > 0.0 && rec.ratio <= 1.0, "{rec:?}");
        assert!(!params.in_regime(8.0, 5));
        assert!(!params.in_regime(1.5, 8));
    }

    #[test]
    fn rejects_excessive_bpar() {
        let w = Weight::fock();
        let eq = radial_equilibrium(&w, 1.0).unwrap();
        let bump = SmoothBump::new(c(0.0, 0.0), 0.3).unwrap();
        assert!(DbarBoundParams::new(1.0, 3.0, &eq, &w, &bump).is_err());
    }
}
