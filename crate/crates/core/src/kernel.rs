//! Orthonormal structure of `H_{m,n} = A²_{mQ} ∩ P_n` and its reproducing
//! kernel `K_{m,n}`.
//!
//! Radial weights have orthogonal monomials, so the space is described by the
//! norms `h_j = ∫ |z|^{2j} e^{-mQ} dA`. Other weights go through the Gram
//! matrix of norm-scaled monomials and its Cholesky factor.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_sum_exp, CompensatedComplex, LineRule, LogValue, PlanarQuadrature};
use crate::weights::{Weight, WeightDescriptor};

/// Common interface of the closed-form and quadrature-built kernels.
pub trait ReproducingKernel: Send + Sync {
    fn weight(&self) -> &Weight;
    fn m(&self) -> f64;
    fn n(&self) -> usize;

    /// `K_{m,n}(z, w) e^{-m(Q(z)+Q(w))/2}`.
    fn weighted_kernel(&self, z: Complex64, w: Complex64) -> LogValue;

    /// `K_{m,n}(z, w)` in log form.
    fn kernel_log(&self, z: Complex64, w: Complex64) -> LogValue {
        let shift = 0.5 * self.m() * (self.weight().q(z) + self.weight().q(w));
        self.weighted_kernel(z, w).scale_log(shift)
    }

    fn kernel(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.kernel_log(z, w).to_complex()
    }

    /// `log(K_{m,n}(z,z) e^{-mQ(z)})`.
    fn log_one_point(&self, z: Complex64) -> f64 {
        self.weighted_kernel(z, z).log_magnitude
    }

    /// The one-point function `K_{m,n}(z,z) e^{-mQ(z)}`.
    fn one_point(&self, z: Complex64) -> f64 {
        self.log_one_point(z).exp()
    }
}

/// Cholesky factor `P^T G P = L L^*` of the scaled Gram matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GramFactor {
    /// `log s_j` where `s_j² ≈ ∫ |z|^{2j} e^{-mQ} dA`.
    pub log_scales: Vec<f64>,
    /// Row-major lower triangle of `L`, `n × n`.
    pub lower: Vec<Complex64>,
    /// Pivot order; the identity unless the pivoted fallback was used.
    pub permutation: Vec<usize>,
    /// `(max L_jj / min L_jj)²`.
    pub condition_estimate: f64,
}

#[derive(Clone, Debug)]
enum Construction {
    Radial { log_norms: Vec<f64> },
    Gram(GramFactor),
}

/// Orthonormal basis data for `H_{m,n}`.
#[derive(Clone, Debug)]
pub struct BergmanSpace {
    weight: Weight,
    m: f64,
    n: usize,
    construction: Construction,
}

/// Scaled Gram matrices beyond this condition estimate are rejected.
pub const CONDITION_CUTOFF: f64 = 1e12;

/// Margin (in units of the exponent) for the default truncation radius.
pub const TAIL_MARGIN: f64 = 80.0;

impl BergmanSpace {
    /// Radial weights use one-dimensional norms; everything else assembles
    /// the Gram matrix on `quadrature`.
    pub fn build(weight: &Weight, m: f64, n: usize, quadrature: &PlanarQuadrature) -> Result<Self> {
        if weight.radial_profile(1.0).is_some() {
            Self::radial(weight, m, n)
        } else {
            Self::gram(weight, m, n, quadrature)
        }
    }

    /// Radial construction; `h_j` by composite Gauss–Legendre in `r`, summed
    /// in the log domain.
    pub fn radial(weight: &Weight, m: f64, n: usize) -> Result<Self> {
        check_mn(m, n)?;
        if weight.radial_profile(1.0).is_none() {
            return Err(Error::UnsupportedWeight(format!("`{}` is not radial", weight.name())));
        }
        let rule = radial_norm_rule(weight, m, n);
        let q: Vec<f64> = rule.nodes.iter().map(|&r| weight.radial_profile(r).unwrap().0).collect();
        let lr: Vec<f64> = rule.nodes.iter().map(|r| r.ln()).collect();
        let lw: Vec<f64> = rule.weights.iter().map(|w| (2.0 * w).ln()).collect();
        let log_norms: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|j| {
                let exps: Vec<f64> = (0..rule.nodes.len())
                    .map(|i| (2 * j + 1) as f64 * lr[i] - m * q[i] + lw[i])
                    .collect();
                log_sum_exp(&exps)
            })
            .collect();
        Ok(BergmanSpace { weight: weight.clone(), m, n, construction: Construction::Radial { log_norms } })
    }

    /// Gram-matrix construction on an explicit planar quadrature.
    pub fn gram(weight: &Weight, m: f64, n: usize, quadrature: &PlanarQuadrature) -> Result<Self> {
        check_mn(m, n)?;
        let factor = gram_factor(weight, m, n, quadrature)?;
        Ok(BergmanSpace { weight: weight.clone(), m, n, construction: Construction::Gram(factor) })
    }

    /// A radial tensor rule adequate for the Gram route of this `(weight, m, n)`.
    pub fn default_quadrature(weight: &Weight, m: f64, n: usize) -> PlanarQuadrature {
        let rule = radial_norm_rule(weight, m, n);
        let n_angular = (4 * n + 64).next_power_of_two().max(128);
        PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, n_angular)
    }

    pub fn log_norms(&self) -> Option<&[f64]> {
        match &self.construction {
            Construction::Radial { log_norms } => Some(log_norms),
            Construction::Gram(_) => None,
        }
    }

    pub fn gram_factor(&self) -> Option<&GramFactor> {
        match &self.construction {
            Construction::Gram(g) => Some(g),
            Construction::Radial { .. } => None,
        }
    }

    /// Log-form values of `e_j(z) e^{-mQ(z)/2}` for `j < n`.
    pub fn weighted_basis_log(&self, z: Complex64) -> Vec<LogValue> {
        let half_q = 0.5 * self.m * self.weight.q(z);
        match &self.construction {
            Construction::Radial { log_norms } => monomials_log(z, log_norms, half_q),
            Construction::Gram(g) => {
                let v = monomials_log(z, &g.log_scales, half_q);
                let permuted: Vec<LogValue> = g.permutation.iter().map(|&p| v[p]).collect();
                forward_solve_log(&g.lower, self.n, &permuted)
            }
        }
    }

    /// `e_j(z) e^{-mQ(z)/2}` as ordinary complex numbers.
    pub fn weighted_basis(&self, z: Complex64) -> Vec<Complex64> {
        self.weighted_basis_log(z).iter().map(LogValue::to_complex).collect()
    }

    /// Evaluates `Σ c_j e_j(z)` weighted by `e^{-mQ(z)/2}`.
    pub fn weighted_combination(&self, coeffs: &[Complex64], z: Complex64) -> Complex64 {
        let mut acc = CompensatedComplex::default();
        for (c, e) in coeffs.iter().zip(self.weighted_basis(z)) {
            acc.add(c * e);
        }
        acc.value()
    }

    /// Serializable snapshot; needs a built-in weight.
    pub fn to_record(&self) -> Result<BasisRecord> {
        let weight = self
            .weight
            .descriptor()
            .cloned()
            .ok_or_else(|| Error::UnsupportedWeight(format!("`{}` has no descriptor", self.weight.name())))?;
        let (log_norms, gram) = match &self.construction {
            Construction::Radial { log_norms } => (Some(log_norms.clone()), None),
            Construction::Gram(g) => (None, Some(g.clone())),
        };
        Ok(BasisRecord { weight, m: self.m, n: self.n, log_norms, gram })
    }

    pub fn from_record(record: &BasisRecord) -> Result<Self> {
        let weight = record.weight.build()?;
        check_mn(record.m, record.n)?;
        let construction = match (&record.log_norms, &record.gram) {
            (Some(l), None) if l.len() == record.n => Construction::Radial { log_norms: l.clone() },
            (None, Some(g)) if g.log_scales.len() == record.n && g.lower.len() == record.n * record.n => {
                Construction::Gram(g.clone())
            }
            _ => return Err(Error::invalid("basis record must carry exactly one of log_norms / gram of size n")),
        };
        Ok(BergmanSpace { weight, m: record.m, n: record.n, construction })
    }
}

impl ReproducingKernel for BergmanSpace {
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
        let ez = self.weighted_basis_log(z);
        let ew = if z == w { ez.clone() } else { self.weighted_basis_log(w) };
        LogValue::sum(ez.iter().zip(&ew).map(|(a, b)| *a * b.conj()))
    }

    fn log_one_point(&self, z: Complex64) -> f64 {
        let ez = self.weighted_basis_log(z);
        let exps: Vec<f64> = ez.iter().map(|e| 2.0 * e.log_magnitude).collect();
        log_sum_exp(&exps)
    }
}

/// JSON form of a [`BergmanSpace`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisRecord {
    pub weight: WeightDescriptor,
    pub m: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_norms: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gram: Option<GramFactor>,
}

fn check_mn(m: f64, n: usize) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::invalid(format!("m must be a positive number, got {m}")));
    }
    if n == 0 {
        return Err(Error::invalid("n must be at least 1"));
    }
    Ok(())
}

/// Radial line rule on `[0, r_max]` fine enough for every `h_j`, `j < n`.
fn radial_norm_rule(weight: &Weight, m: f64, n: usize) -> LineRule {
    let r_max = weight.truncation_radius(m, n, TAIL_MARGIN);
    let panels = ((r_max * m.sqrt() * 4.0).ceil() as usize).clamp(64, 4000);
    LineRule::uniform(0.0, r_max, panels, 16)
}

/// `z^j / s_j · e^{-half_q}` in log form, `s_j = e^{log_scales[j]/2}`.
fn monomials_log(z: Complex64, log_sq_norms: &[f64], half_q: f64) -> Vec<LogValue> {
    let r = z.norm();
    if r == 0.0 {
        let mut out = vec![LogValue::ZERO; log_sq_norms.len()];
        if let Some(first) = out.first_mut() {
            *first = LogValue::from_log(-0.5 * log_sq_norms[0] - half_q);
        }
        return out;
    }
    let lr = r.ln();
    let unit = z / r;
    let mut phase = Complex64::new(1.0, 0.0);
    log_sq_norms
        .iter()
        .enumerate()
        .map(|(j, &ln)| {
            let v = LogValue { log_magnitude: j as f64 * lr - 0.5 * ln - half_q, phase };
            phase *= unit;
            v
        })
        .collect()
}

/// Solves `L a = v` for log-form `v` by scaling out the largest entry.
fn forward_solve_log(lower: &[Complex64], n: usize, v: &[LogValue]) -> Vec<LogValue> {
    let peak = v.iter().map(|x| x.log_magnitude).fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return vec![LogValue::ZERO; n];
    }
    let scaled: Vec<Complex64> = v.iter().map(|x| x.scale_log(-peak).to_complex()).collect();
    let a = forward_solve(lower, n, &scaled);
    a.into_iter().map(|x| LogValue::from_complex(x).scale_log(peak)).collect()
}

fn forward_solve(lower: &[Complex64], n: usize, b: &[Complex64]) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let mut acc = b[i];
        for k in 0..i {
            acc -= lower[i * n + k] * x[k];
        }
        x[i] = acc / lower[i * n + i];
    }
    x
}

/// Complex Cholesky `G = L L^*`; `None` if a pivot is not positive.
pub(crate) fn cholesky(g: &[Complex64], n: usize) -> Option<Vec<Complex64>> {
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k].conj();
            }
            if i == j {
                if !(sum.re > 0.0) {
                    return None;
                }
                l[i * n + i] = Complex64::new(sum.re.sqrt(), 0.0);
            } else {
                l[i * n + j] = sum / l[j * n + j].re;
            }
        }
    }
    Some(l)
}

/// Cholesky with diagonal pivoting; returns the factor of the permuted
/// matrix, the permutation and the numerical rank.
pub(crate) fn pivoted_cholesky(g: &[Complex64], n: usize, rel_tol: f64) -> (Vec<Complex64>, Vec<usize>, usize) {
    let mut a = g.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let max_diag = (0..n).map(|i| g[i * n + i].re).fold(0.0, f64::max);
    let mut rank = 0;
    for k in 0..n {
        // Schur-complement diagonals
        let (piv, best) = (k..n)
            .map(|i| {
                let mut d = a[i * n + i].re;
                for t in 0..k {
                    d -= l[i * n + t].norm_sqr();
                }
                (i, d)
            })
            .fold((k, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if !(best > rel_tol * max_diag) {
            break;
        }
        if piv != k {
            perm.swap(k, piv);
            for c in 0..n {
                a.swap(k * n + c, piv * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k, r * n + piv);
            }
            for t in 0..k {
                l.swap(k * n + t, piv * n + t);
            }
        }
        let d = best.sqrt();
        l[k * n + k] = Complex64::new(d, 0.0);
        for i in (k + 1)..n {
            let mut sum = a[i * n + k];
            for t in 0..k {
                sum -= l[i * n + t] * l[k * n + t].conj();
            }
            l[i * n + k] = sum / d;
        }
        rank += 1;
    }
    (l, perm, rank)
}

fn condition_estimate(l: &[Complex64], n: usize) -> f64 {
    let diag: Vec<f64> = (0..n).map(|i| l[i * n + i].re).collect();
    let hi = diag.iter().copied().fold(0.0, f64::max);
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    (hi / lo).powi(2)
}

fn gram_factor(weight: &Weight, m: f64, n: usize, quadrature: &PlanarQuadrature) -> Result<GramFactor> {
    // log s_j² = log Σ_i w_i |z_i|^{2j} e^{-mQ(z_i)}
    let lq: Vec<f64> = quadrature.nodes.iter().map(|&z| m * weight.q(z)).collect();
    let lr: Vec<f64> = quadrature.nodes.iter().map(|z| z.norm().ln()).collect();
    let lw: Vec<f64> = quadrature.weights.iter().map(|w| w.ln()).collect();
    let log_scales: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|j| {
            let exps: Vec<f64> = (0..lq.len())
                .map(|i| if j == 0 { lw[i] - lq[i] } else { 2.0 * j as f64 * lr[i] - lq[i] + lw[i] })
                .collect();
            log_sum_exp(&exps)
        })
        .collect();

    const CHUNK: usize = 2048;
    let partials: Vec<Vec<Complex64>> = quadrature
        .nodes
        .par_chunks(CHUNK)
        .zip(quadrature.weights.par_chunks(CHUNK))
        .map(|(zs, ws)| {
            let mut g = vec![Complex64::new(0.0, 0.0); n * n];
            for (z, w) in zs.iter().zip(ws) {
                let v: Vec<Complex64> =
                    monomials_log(*z, &log_scales, 0.5 * m * weight.q(*z)).iter().map(LogValue::to_complex).collect();
                for j in 0..n {
                    let vj = v[j] * *w;
                    for k in 0..=j {
                        g[j * n + k] += vj * v[k].conj();
                    }
                }
            }
            g
        })
        .collect();
    let mut g = vec![Complex64::new(0.0, 0.0); n * n];
    for p in partials {
        for (a, b) in g.iter_mut().zip(p) {
            *a += b;
        }
    }
    for j in 0..n {
        for k in 0..j {
            g[k * n + j] = g[j * n + k].conj();
        }
    }

    if let Some(lower) = cholesky(&g, n) {
        let cond = condition_estimate(&lower, n);
        if cond <= CONDITION_CUTOFF {
            return Ok(GramFactor { log_scales, lower, permutation: (0..n).collect(), condition_estimate: cond });
        }
    }
    let (lower, permutation, rank) = pivoted_cholesky(&g, n, 1e-14);
    let cond = if rank == n { condition_estimate(&lower, n) } else { f64::INFINITY };
    if rank < n || cond > CONDITION_CUTOFF {
        return Err(Error::Conditioning { condition: cond, rank, dim: n });
    }
    Ok(GramFactor { log_scales, lower, permutation, condition_estimate: cond })
}
