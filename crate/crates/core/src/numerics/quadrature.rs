//! Planar quadrature against `dA = dx dy / π`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logvalue::{Compensated, CompensatedComplex};
use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` split at `breaks`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LineRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// `breaks` must be increasing; each consecutive pair is one panel.
    pub fn composite(breaks: &[f64], per_panel: usize) -> Self {
        let (x, w) = gauss_legendre(per_panel);
        let mut nodes = Vec::with_capacity(per_panel * breaks.len());
        let mut weights = Vec::with_capacity(per_panel * breaks.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (xi, wi) in x.iter().zip(&w) {
                nodes.push(mid + half * xi);
                weights.push(half * wi);
            }
        }
        LineRule { nodes, weights }
    }

    /// Uniform panels on `[a, b]`.
    pub fn uniform(a: f64, b: f64, panels: usize, per_panel: usize) -> Self {
        let breaks: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
        Self::composite(&breaks, per_panel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    RadialTensor,
    CartesianGrid,
}

/// Nodes and positive weights such that `Σ w_i f(z_i) ≈ ∫ f dA`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlanarQuadrature {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
    pub r_max: f64,
    pub center: Complex64,
    pub scheme: Scheme,
}

impl PlanarQuadrature {
    /// Gauss–Legendre in radius times the uniform rule in angle on `D(0; r_max)`.
    pub fn radial(r_max: f64, n_radial: usize, n_angular: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }
        if n_radial < 2 || n_angular < 4 {
            return Err(Error::invalid(format!(
                "need n_radial >= 2 and n_angular >= 4, got {n_radial} and {n_angular}"
            )));
        }
        let rule = LineRule::composite(&[0.0, r_max], n_radial);
        Ok(Self::from_radial_rule(Complex64::new(0.0, 0.0), &rule, n_angular))
    }

    /// Radial tensor rule around `center` with a prescribed radial line rule.
    ///
    /// The angular grid is uniform and contains the antipode of each node, so
    /// odd angular modes cancel exactly.
    pub fn from_radial_rule(center: Complex64, rule: &LineRule, n_angular: usize) -> Self {
        let r_max = rule.nodes.iter().copied().fold(0.0, f64::max);
        let angles: Vec<Complex64> = (0..n_angular)
            .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n_angular as f64))
            .collect();
        let mut nodes = Vec::with_capacity(rule.nodes.len() * n_angular);
        let mut weights = Vec::with_capacity(rule.nodes.len() * n_angular);
        for (&r, &w) in rule.nodes.iter().zip(&rule.weights) {
            // r dr dθ / π with dθ = 2π / n_angular
            let wr = 2.0 * w * r / n_angular as f64;
            for a in &angles {
                nodes.push(center + a * r);
                weights.push(wr);
            }
        }
        PlanarQuadrature { nodes, weights, r_max, center, scheme: Scheme::RadialTensor }
    }

    /// Uniform panels of `per_panel` Gauss points on `[0, r_max]` around `center`.
    pub fn centered(center: Complex64, r_max: f64, panels: usize, per_panel: usize, n_angular: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::invalid(format!("r_max must be positive, got {r_max}")));
        }
        let rule = LineRule::uniform(0.0, r_max, panels.max(1), per_panel.max(2));
        Ok(Self::from_radial_rule(center, &rule, n_angular.max(4)))
    }

    /// Midpoint rule on the square `[-extent, extent]²` around `center`.
    pub fn cartesian(center: Complex64, extent: f64, spacing: f64) -> Result<Self> {
        if !(extent > 0.0 && spacing > 0.0) {
            return Err(Error::invalid("cartesian grid needs positive extent and spacing"));
        }
        let cells = (2.0 * extent / spacing).round().max(1.0) as usize;
        let h = 2.0 * extent / cells as f64;
        let w = h * h / std::f64::consts::PI;
        let mut nodes = Vec::with_capacity(cells * cells);
        for i in 0..cells {
            for j in 0..cells {
                let x = -extent + (i as f64 + 0.5) * h;
                let y = -extent + (j as f64 + 0.5) * h;
                nodes.push(center + Complex64::new(x, y));
            }
        }
        let weights = vec![w; nodes.len()];
        Ok(PlanarQuadrature { nodes, weights, r_max: extent * std::f64::consts::SQRT_2, center, scheme: Scheme::CartesianGrid })
    }

    /// Same rule mapped by `z ↦ center + scale·z`; weights pick up `scale²`.
    pub fn affine(&self, center: Complex64, scale: f64) -> Self {
        PlanarQuadrature {
            nodes: self.nodes.iter().map(|z| center + z * scale).collect(),
            weights: self.weights.iter().map(|w| w * scale * scale).collect(),
            r_max: self.r_max * scale,
            center: center + self.center * scale,
            scheme: self.scheme,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sequential compensated sum; bit-reproducible.
    pub fn integrate<F: Fn(Complex64) -> f64>(&self, f: F) -> f64 {
        let mut acc = Compensated::default();
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(w * f(*z));
        }
        acc.value()
    }

    pub fn integrate_complex<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut acc = CompensatedComplex::default();
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            acc.add(f(*z) * *w);
        }
        acc.value()
    }

    /// Integrates with the node loop split across threads.
    ///
    /// With `deterministic` the partial sums are taken over fixed chunks and
    /// combined in order, so the result does not depend on scheduling.
    pub fn par_integrate<F: Fn(Complex64) -> f64 + Sync>(&self, f: F, deterministic: bool) -> f64 {
        const CHUNK: usize = 4096;
        if deterministic {
            let partials: Vec<f64> = self
                .nodes
                .par_chunks(CHUNK)
                .zip(self.weights.par_chunks(CHUNK))
                .map(|(zs, ws)| {
                    let mut acc = Compensated::default();
                    for (z, w) in zs.iter().zip(ws) {
                        acc.add(w * f(*z));
                    }
                    acc.value()
                })
                .collect();
            let mut acc = Compensated::default();
            for p in partials {
                acc.add(p);
            }
            acc.value()
        } else {
            self.nodes.par_iter().zip(self.weights.par_iter()).map(|(z, w)| w * f(*z)).sum()
        }
    }

    /// Evaluates `f` at every node, in node order.
    pub fn map_nodes<T: Send, F: Fn(Complex64) -> T + Sync>(&self, f: F) -> Vec<T> {
        self.nodes.par_iter().map(|z| f(*z)).collect()
    }

    /// `Σ w_i v_i` for values already evaluated at the nodes.
    pub fn sum_values(&self, values: &[f64]) -> f64 {
        let mut acc = Compensated::default();
        for (v, w) in values.iter().zip(&self.weights) {
            acc.add(w * v);
        }
        acc.value()
    }

    pub fn sum_values_complex(&self, values: &[Complex64]) -> Complex64 {
        let mut acc = CompensatedComplex::default();
        for (v, w) in values.iter().zip(&self.weights) {
            acc.add(v * *w);
        }
        acc.value()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // ∫ x^12 = 2/13
        let v: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(12)).sum();
        assert!((v - 2.0 / 13.0).abs() < 1e-14);
        let (x, _) = gauss_legendre(64);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn unit_disk_has_unit_area() {
        let q = PlanarQuadrature::radial(1.0, 4, 8).unwrap();
        assert!((q.integrate(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!(q.weights.iter().all(|&w| w > 0.0));
        assert_eq!(q.nodes.len(), q.weights.len());
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(PlanarQuadrature::radial(0.0, 4, 8).is_err());
        assert!(PlanarQuadrature::radial(-1.0, 4, 8).is_err());
        assert!(PlanarQuadrature::radial(1.0, 1, 8).is_err());
        assert!(PlanarQuadrature::radial(1.0, 4, 3).is_err());
    }

    #[test]
    fn cartesian_grid_area() {
        let q = PlanarQuadrature::cartesian(Complex64::new(0.0, 0.0), 1.0, 0.1).unwrap();
        assert!((q.integrate(|_| 1.0) - 4.0 / std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn deterministic_parallel_sum_is_reproducible() {
        let q = PlanarQuadrature::centered(Complex64::new(0.1, 0.0), 5.0, 20, 10, 64).unwrap();
        let f = |z: Complex64| (-z.norm_sqr()).exp() * (1.0 + z.re);
        let a = q.par_integrate(f, true);
        let b = q.par_integrate(f, true);
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - q.integrate(f)).abs() < 1e-13);
    }
}
