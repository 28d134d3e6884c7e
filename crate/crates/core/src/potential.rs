//! The equilibrium potential `Q̂_τ`, the largest subharmonic minorant of `Q`
//! growing like `τ log|z|² + O(1)`, and its coincidence set (the droplet)
//! `S_τ = {Q = Q̂_τ}`.
//!
//! Radial weights have a closed form. Everything else goes through a
//! projected SOR solver for the discrete obstacle problem on a square grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::Table;
use crate::weights::Weight;

/// Grid and iteration parameters for [`psor_obstacle_solve`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Half-width of the square `[−extent, extent]²`.
    pub extent: f64,
    pub spacing: f64,
    pub omega: f64,
    /// Sweep budget for a single inner solve.
    pub max_iter: usize,
    /// Stopping threshold on the sup-norm of one sweep's update.
    pub tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { extent: 3.0, spacing: 0.02, omega: 1.8, max_iter: 200_000, tol: 1e-8 }
    }
}

impl GridSpec {
    fn validate(&self) -> Result<usize> {
        if !(self.extent > 0.0 && self.spacing > 0.0 && self.spacing < self.extent) {
            return Err(Error::invalid(format!(
                "grid needs 0 < spacing < extent, got spacing {} extent {}",
                self.spacing, self.extent
            )));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::invalid(format!("relaxation factor must lie in (0, 2), got {}", self.omega)));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("tol and max_iter must be positive"));
        }
        let cells = (2.0 * self.extent / self.spacing).round() as usize;
        if cells < 8 {
            return Err(Error::invalid("grid has fewer than 8 cells per side"));
        }
        Ok(cells + 1)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    /// Total PSOR sweeps over all outer iterations.
    pub iterations: usize,
    /// Sup-norm update of the last sweep.
    pub residual: f64,
    pub outer_iterations: usize,
    /// The constant `c` in the boundary data `τ log|z|² + c`.
    pub boundary_constant: f64,
    /// Discrete Laplacian mass `Σ Δ_h u · h²/π`.
    pub mass: f64,
}

/// Solution of the discrete obstacle problem on `[−extent, extent]²`.
#[derive(Clone, Debug)]
pub struct GridPotential {
    origin: f64,
    spacing: f64,
    size: usize,
    values: Vec<f64>,
    obstacle: Vec<f64>,
    mask: Vec<bool>,
    x_mask: Vec<bool>,
    tau: f64,
    constant: f64,
}

impl GridPotential {
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Nodes per side.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.origin + i as f64 * self.spacing, self.origin + j as f64 * self.spacing)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.size + i]
    }

    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        self.mask[j * self.size + i]
    }

    /// The mask intersected with `{ΔQ > 0}`.
    pub fn in_trimmed_mask(&self, i: usize, j: usize) -> bool {
        self.x_mask[j * self.size + i]
    }

    /// Droplet area in `dA` units.
    pub fn area(&self) -> f64 {
        self.mask.iter().filter(|&&b| b).count() as f64 * self.spacing * self.spacing / std::f64::consts::PI
    }

    /// Radius of the disk with the droplet's area.
    pub fn radius_estimate(&self) -> f64 {
        self.area().sqrt()
    }

    /// `Σ Δ_h u · h²/π` over interior nodes, with the ¼-normalized stencil.
    pub fn mass(&self) -> f64 {
        laplacian_mass(&self.values, self.size)
    }

    /// Bilinear interpolation inside the grid, the exterior form outside.
    pub fn eval(&self, z: Complex64) -> f64 {
        let n = self.size;
        let fx = (z.re - self.origin) / self.spacing;
        let fy = (z.im - self.origin) / self.spacing;
        let top = (n - 1) as f64;
        if !(0.0..=top).contains(&fx) || !(0.0..=top).contains(&fy) {
            return self.tau * z.norm_sqr().ln() + self.constant;
        }
        let i = (fx.floor() as usize).min(n - 2);
        let j = (fy.floor() as usize).min(n - 2);
        let (a, b) = (fx - i as f64, fy - j as f64);
        let v = |i: usize, j: usize| self.values[j * n + i];
        (1.0 - a) * (1.0 - b) * v(i, j) + a * (1.0 - b) * v(i + 1, j) + (1.0 - a) * b * v(i, j + 1) + a * b * v(i + 1, j + 1)
    }

    fn nearest(&self, z: Complex64) -> Option<(usize, usize)> {
        let i = ((z.re - self.origin) / self.spacing).round();
        let j = ((z.im - self.origin) / self.spacing).round();
        let top = (self.size - 1) as f64;
        if (0.0..=top).contains(&i) && (0.0..=top).contains(&j) {
            Some((i as usize, j as usize))
        } else {
            None
        }
    }

    /// Largest stencil residual `|avg₄(u) − u|` at interior nodes farther
    /// than `dilation` cells from the mask.
    pub fn max_residual_off_mask(&self, dilation: usize) -> f64 {
        let n = self.size;
        let dilated = dilate(&self.mask, n, dilation);
        let mut worst = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                if dilated[k] {
                    continue;
                }
                let avg = 0.25 * (self.values[k - 1] + self.values[k + 1] + self.values[k - n] + self.values[k + n]);
                worst = worst.max((avg - self.values[k]).abs());
            }
        }
        worst
    }

    /// Largest jump `|D₊u − D₋u|` of one-sided difference quotients at
    /// nodes adjacent to the mask boundary.
    pub fn max_gradient_jump(&self) -> f64 {
        let n = self.size;
        let h = self.spacing;
        let mut worst = 0.0f64;
        for j in 1..n - 1 {
            for i in 1..n - 1 {
                let k = j * n + i;
                let near_edge = [k - 1, k + 1, k - n, k + n].iter().any(|&p| self.mask[p] != self.mask[k]);
                if !near_edge {
                    continue;
                }
                let u = &self.values;
                let jx = ((u[k + 1] - u[k]) - (u[k] - u[k - 1])) / h;
                let jy = ((u[k + n] - u[k]) - (u[k] - u[k - n])) / h;
                worst = worst.max(jx.abs()).max(jy.abs());
            }
        }
        worst
    }

    /// Columns `x, y, qhat, q, in_droplet`.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["x", "y", "qhat", "q", "in_droplet"]);
        for j in 0..self.size {
            for i in 0..self.size {
                let z = self.node(i, j);
                let k = j * self.size + i;
                t.push(vec![z.re.into(), z.im.into(), self.values[k].into(), self.obstacle[k].into(), self.mask[k].into()]);
            }
        }
        t
    }
}

#[derive(Clone, Debug)]
enum Representation {
    Radial { weight: Weight, radius: f64, q_at_radius: f64 },
    Grid(GridPotential),
}

/// `Q̂_τ` with a description of its droplet and the constants `q_τ`, `c_τ`.
#[derive(Clone, Debug)]
pub struct EquilibriumResult {
    tau: f64,
    repr: Representation,
    q_tau: f64,
    c_tau: f64,
    diagnostics: SolverDiagnostics,
}

impl EquilibriumResult {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn eval_qhat(&self, z: Complex64) -> f64 {
        match &self.repr {
            Representation::Radial { weight, radius, q_at_radius } => {
                let r2 = z.norm_sqr();
                if r2 <= radius * radius {
                    weight.q(z)
                } else {
                    q_at_radius + self.tau * (r2 / (radius * radius)).ln()
                }
            }
            Representation::Grid(g) => g.eval(z),
        }
    }

    /// `R_τ` for radial weights.
    pub fn droplet_radius(&self) -> Option<f64> {
        match &self.repr {
            Representation::Radial { radius, .. } => Some(*radius),
            Representation::Grid(_) => None,
        }
    }

    pub fn grid(&self) -> Option<&GridPotential> {
        match &self.repr {
            Representation::Grid(g) => Some(g),
            Representation::Radial { .. } => None,
        }
    }

    /// Exact radius for radial results, area-equivalent radius otherwise.
    pub fn radius_estimate(&self) -> f64 {
        match &self.repr {
            Representation::Radial { radius, .. } => *radius,
            Representation::Grid(g) => g.radius_estimate(),
        }
    }

    pub fn q_tau(&self) -> f64 {
        self.q_tau
    }

    pub fn c_tau(&self) -> f64 {
        self.c_tau
    }

    pub fn diagnostics(&self) -> &SolverDiagnostics {
        &self.diagnostics
    }

    pub fn contains(&self, z: Complex64) -> bool {
        match &self.repr {
            Representation::Radial { radius, .. } => z.norm() <= *radius,
            Representation::Grid(g) => g.nearest(z).is_some_and(|(i, j)| g.in_mask(i, j)),
        }
    }

    /// `dist(z, ℂ \ (S_τ ∩ X))`, zero when `z` is outside.
    pub fn distance_to_complement(&self, weight: &Weight, z: Complex64) -> f64 {
        match &self.repr {
            Representation::Radial { radius, .. } => {
                let d = radius - z.norm();
                if d <= 0.0 {
                    return 0.0;
                }
                trim_by_laplacian(weight, z, d)
            }
            Representation::Grid(g) => {
                if !g.nearest(z).is_some_and(|(i, j)| g.in_trimmed_mask(i, j)) {
                    return 0.0;
                }
                let mut best = f64::INFINITY;
                for j in 0..g.size {
                    for i in 0..g.size {
                        if !g.in_trimmed_mask(i, j) {
                            best = best.min((g.node(i, j) - z).norm());
                        }
                    }
                }
                best
            }
        }
    }
}

/// Shrinks `d` to the distance from `z` to the nearest sampled point of
/// `D(z; d)` where `ΔQ ≤ 0`.
fn trim_by_laplacian(weight: &Weight, z: Complex64, d: f64) -> f64 {
    let mut best = d;
    if weight.laplacian(z) <= 0.0 {
        return 0.0;
    }
    for ir in 1..=64 {
        let r = d * ir as f64 / 64.0;
        if r >= best {
            break;
        }
        for k in 0..64 {
            let p = z + Complex64::from_polar(r, k as f64 * std::f64::consts::PI / 32.0);
            if weight.laplacian(p) <= 0.0 {
                best = best.min(r);
            }
        }
    }
    // Isolated zeros such as the origin for |z|^{2p} are missed by the polar sampling.
    let origin_laplacian = weight.laplacian(Complex64::new(0.0, 0.0));
    if origin_laplacian <= 0.0 {
        best = best.min(z.norm());
    }
    best
}

/// Solves `r q'(r)/2 = τ` by bisection.
pub fn radial_droplet_radius(weight: &Weight, tau: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    if tau > weight.growth_rho() {
        return Err(Error::GrowthViolation(format!(
            "tau = {tau} exceeds the growth exponent {} of `{}`",
            weight.growth_rho(),
            weight.name()
        )));
    }
    let flux = |r: f64| -> Result<f64> {
        let (_, dq) = weight
            .radial_profile(r)
            .ok_or_else(|| Error::UnsupportedWeight(format!("`{}` is not radial", weight.name())))?;
        Ok(0.5 * r * dq - tau)
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while flux(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::GrowthViolation(format!("r q'(r)/2 stays below tau = {tau} up to r = 1e6")));
        }
    }
    while hi - lo > 1e-12 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if flux(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Closed-form equilibrium for a radial weight.
pub fn radial_equilibrium(weight: &Weight, tau: f64) -> Result<EquilibriumResult> {
    let radius = radial_droplet_radius(weight, tau)?;
    let (q_at_radius, _) = weight.radial_profile(radius).expect("radius implies radial");
    let q_tau = (0..=64)
        .map(|k| weight.radial_profile(radius * k as f64 / 64.0).unwrap().0)
        .fold(q_at_radius, f64::max);
    Ok(EquilibriumResult {
        tau,
        repr: Representation::Radial { weight: weight.clone(), radius, q_at_radius },
        q_tau,
        c_tau: (1.0 + radius * radius).powi(-2),
        diagnostics: SolverDiagnostics { mass: tau, boundary_constant: q_at_radius - tau * (radius * radius).ln(), ..Default::default() },
    })
}

/// `Q̂_τ(z)` for a radial weight.
pub fn radial_qhat(weight: &Weight, tau: f64, z: Complex64) -> Result<f64> {
    Ok(radial_equilibrium(weight, tau)?.eval_qhat(z))
}

fn laplacian_mass(u: &[f64], n: usize) -> f64 {
    let mut acc = crate::numerics::Compensated::default();
    for j in 1..n - 1 {
        for i in 1..n - 1 {
            let k = j * n + i;
            acc.add(u[k - 1] + u[k + 1] + u[k - n] + u[k + n] - 4.0 * u[k]);
        }
    }
    acc.value() / (4.0 * std::f64::consts::PI)
}

fn dilate(mask: &[bool], n: usize, cells: usize) -> Vec<bool> {
    let mut out = mask.to_vec();
    for _ in 0..cells {
        let prev = out.clone();
        for j in 0..n {
            for i in 0..n {
                let k = j * n + i;
                if prev[k] {
                    continue;
                }
                out[k] = (i > 0 && prev[k - 1])
                    || (i + 1 < n && prev[k + 1])
                    || (j > 0 && prev[k - n])
                    || (j + 1 < n && prev[k + n]);
            }
        }
    }
    out
}

struct Problem {
    n: usize,
    omega: f64,
    tol: f64,
    max_iter: usize,
    obstacle: Vec<f64>,
    log_r2: Vec<f64>,
    boundary: Vec<usize>,
    tau: f64,
}

impl Problem {
    fn set_boundary(&self, u: &mut [f64], c: f64) {
        for &k in &self.boundary {
            u[k] = self.tau * self.log_r2[k] + c;
        }
    }

    /// Lexicographic PSOR until the sup-norm update drops below `tol`.
    fn sweep_to_convergence(&self, u: &mut [f64]) -> Result<(usize, f64)> {
        let n = self.n;
        let mut last = f64::INFINITY;
        for it in 1..=self.max_iter {
            let mut worst = 0.0f64;
            for j in 1..n - 1 {
                let row = j * n;
                for k in row + 1..row + n - 1 {
                    let avg = 0.25 * (u[k - 1] + u[k + 1] + u[k - n] + u[k + n]);
                    let next = (u[k] + self.omega * (avg - u[k])).min(self.obstacle[k]);
                    worst = worst.max((next - u[k]).abs());
                    u[k] = next;
                }
            }
            last = worst;
            if worst < self.tol {
                return Ok((it, worst));
            }
        }
        Err(Error::SolverFailure { iterations: self.max_iter, residual: last })
    }
}

/// Projected SOR for `max(Δ_h u, u − Q) = 0` with boundary data
/// `τ log|z|² + c`; `c` is tuned by a secant iteration until the discrete
/// Laplacian mass equals `τ`.
pub fn psor_obstacle_solve(weight: &Weight, tau: f64, spec: &GridSpec) -> Result<EquilibriumResult> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau must be positive, got {tau}")));
    }
    let n = spec.validate()?;
    let h = 2.0 * spec.extent / (n - 1) as f64;
    let origin = -spec.extent;
    let node = |k: usize| Complex64::new(origin + (k % n) as f64 * h, origin + (k / n) as f64 * h);
    let obstacle: Vec<f64> = (0..n * n).map(|k| weight.q(node(k))).collect();
    let log_r2: Vec<f64> = (0..n * n).map(|k| node(k).norm_sqr().max(h * h).ln()).collect();
    let boundary: Vec<usize> = (0..n * n).filter(|&k| k % n == 0 || k % n == n - 1 || k / n == 0 || k / n == n - 1).collect();
    let problem = Problem { n, omega: spec.omega, tol: spec.tol, max_iter: spec.max_iter, obstacle, log_r2, boundary, tau };

    // τ log|z|² + c₀ touches Q from below, so c₀ bounds the true constant from below.
    let c0 = (0..n * n)
        .filter(|&k| node(k).norm_sqr() > 0.0)
        .map(|k| problem.obstacle[k] - tau * problem.log_r2[k])
        .fold(f64::INFINITY, f64::min);

    let mut u: Vec<f64> = (0..n * n).map(|k| (tau * problem.log_r2[k] + c0).min(problem.obstacle[k])).collect();
    let mut sweeps = 0usize;
    let mut last_update = 0.0;
    let mut solve = |u: &mut Vec<f64>, c: f64| -> Result<f64> {
        problem.set_boundary(u, c);
        let (it, upd) = problem.sweep_to_convergence(u)?;
        sweeps += it;
        last_update = upd;
        Ok(laplacian_mass(u, n) - tau)
    };

    let mass_tol = 1e-5 * tau;
    let mut c_prev = c0;
    let mut g_prev = solve(&mut u, c0)?;
    let mut c = c0 + if g_prev < 0.0 { 0.1 } else { -0.1 };
    let mut outer = 1;
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    if g_prev < 0.0 { lo = c0 } else { hi = c0 }
    while g_prev.abs() > mass_tol {
        let g = solve(&mut u, c)?;
        outer += 1;
        if g.abs() <= mass_tol {
            break;
        }
        if g < 0.0 { lo = lo.max(c) } else { hi = hi.min(c) }
        let mut next = if g != g_prev { c - g * (c - c_prev) / (g - g_prev) } else { c + 0.1 };
        if lo.is_finite() && hi.is_finite() && !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        c_prev = c;
        g_prev = g;
        c = next;
        if outer > 60 {
            return Err(Error::SolverFailure { iterations: sweeps, residual: g.abs() });
        }
    }
    if outer == 1 {
        c = c0;
    }

    let mask: Vec<bool> = (0..n * n)
        .map(|k| problem.obstacle[k] - u[k] <= 1e-6 * (1.0 + problem.obstacle[k].abs()))
        .collect();
    for j in 0..n {
        for i in 0..n {
            let edge = i.min(j).min(n - 1 - i).min(n - 1 - j);
            if edge <= 2 && mask[j * n + i] {
                return Err(Error::DomainTooSmall(format!(
                    "droplet reaches the boundary ring at {}; enlarge the extent {}",
                    node(j * n + i),
                    spec.extent
                )));
            }
        }
    }
    let x_mask: Vec<bool> = (0..n * n).map(|k| mask[k] && weight.laplacian(node(k)) > 0.0).collect();
    let mut q_tau = f64::NEG_INFINITY;
    let mut max_r2 = 0.0f64;
    for k in (0..n * n).filter(|&k| mask[k]) {
        q_tau = q_tau.max(problem.obstacle[k]);
        max_r2 = max_r2.max(node(k).norm_sqr());
    }
    if !q_tau.is_finite() {
        return Err(Error::SolverFailure { iterations: sweeps, residual: last_update });
    }
    let mass = laplacian_mass(&u, n);
    let grid = GridPotential { origin, spacing: h, size: n, values: u, obstacle: problem.obstacle, mask, x_mask, tau, constant: c };
    Ok(EquilibriumResult {
        tau,
        repr: Representation::Grid(grid),
        q_tau,
        c_tau: (1.0 + max_r2).powi(-2),
        diagnostics: SolverDiagnostics {
            iterations: sweeps,
            residual: last_update,
            outer_iterations: outer,
            boundary_constant: c,
            mass,
        },
    })
}

/// Closed form for radial weights, PSOR otherwise.
pub fn equilibrium(weight: &Weight, tau: f64, spec: &GridSpec) -> Result<EquilibriumResult> {
    if weight.radial_profile(1.0).is_some() {
        radial_equilibrium(weight, tau)
    } else {
        psor_obstacle_solve(weight, tau, spec)
    }
}

/// `(q_τ, c_τ)`.
pub fn constants(result: &EquilibriumResult) -> (f64, f64) {
    (result.q_tau, result.c_tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn radial_radii() {
        assert!((radial_droplet_radius(&Weight::fock(), 0.49).unwrap() - 0.7).abs() < 1e-11);
        let p2 = Weight::radial_power(2).unwrap();
        assert!((radial_droplet_radius(&p2, 1.0).unwrap() - 0.5f64.powf(0.25)).abs() < 1e-11);
        let c4 = 0.1;
        let r = radial_droplet_radius(&Weight::quartic(c4).unwrap(), 1.0).unwrap();
        let r2 = (-1.0 + (1.0 + 8.0 * c4).sqrt()) / (4.0 * c4);
        assert!((r * r - r2).abs() < 1e-10);
        let mut prev = 0.0;
        for tau in [0.1, 0.3, 0.6, 1.0] {
            let r = radial_droplet_radius(&p2, tau).unwrap();
            assert!(r > prev);
            prev = r;
        }
    }

    #[test]
    fn radial_qhat_values() {
        let eq = radial_equilibrium(&Weight::fock(), 1.0).unwrap();
        assert!((eq.eval_qhat(c(0.0, 2.0)) - (1.0 + 4f64.ln())).abs() < 1e-10);
        assert_eq!(eq.eval_qhat(c(0.3, 0.4)), 0.25);
        let r = eq.droplet_radius().unwrap();
        let inside = eq.eval_qhat(c(r * (1.0 - 1e-12), 0.0));
        let outside = eq.eval_qhat(c(r * (1.0 + 1e-12), 0.0));
        assert!((inside - outside).abs() < 1e-10);
    }

    #[test]
    fn fock_constants() {
        for tau in [1.0, 0.25] {
            let eq = radial_equilibrium(&Weight::fock(), tau).unwrap();
            let (q, ct) = constants(&eq);
            assert!((q - tau).abs() < 1e-11);
            assert!((ct - (1.0 + tau).powi(-2)).abs() < 1e-11);
        }
    }

    #[test]
    fn growth_violation() {
        assert!(matches!(radial_droplet_radius(&Weight::fock(), 2.0), Err(Error::GrowthViolation(_))));
        assert!(radial_droplet_radius(&Weight::elliptic(0.3).unwrap(), 1.0).is_err());
    }

    #[test]
    fn distance_respects_zero_of_laplacian() {
        let p2 = Weight::radial_power(2).unwrap();
        let eq = radial_equilibrium(&p2, 1.0).unwrap();
        assert_eq!(eq.distance_to_complement(&p2, c(0.0, 0.0)), 0.0);
        let d = eq.distance_to_complement(&p2, c(0.2, 0.0));
        assert!((d - 0.2).abs() < 1e-12);
        let fock = Weight::fock();
        let eq = radial_equilibrium(&fock, 1.0).unwrap();
        assert!((eq.distance_to_complement(&fock, c(0.3, 0.0)) - 0.7).abs() < 1e-12);
        assert_eq!(eq.distance_to_complement(&fock, c(1.3, 0.0)), 0.0);
    }

    #[test]
    fn psor_fock_coarse() {
        let spec = GridSpec { extent: 2.5, spacing: 0.1, ..GridSpec::default() };
        let eq = psor_obstacle_solve(&Weight::fock(), 1.0, &spec).unwrap();
        let g = eq.grid().unwrap();
        assert!((eq.radius_estimate() - 1.0).abs() < 0.2);
        assert!((g.mass() - 1.0).abs() < 1e-3);
        for j in 0..g.size() {
            for i in 0..g.size() {
                assert!(g.value(i, j) <= Weight::fock().q(g.node(i, j)) + 1e-12);
            }
        }
        assert!(g.max_residual_off_mask(2) <= 10.0 * spec.tol);
        let exact = radial_equilibrium(&Weight::fock(), 1.0).unwrap();
        for z in [c(0.3, 0.2), c(1.4, -0.5), c(-2.0, 1.0)] {
            assert!((eq.eval_qhat(z) - exact.eval_qhat(z)).abs() < 2e-2);
        }
    }

    #[test]
    fn psor_elliptic_droplet() {
        let t = 0.4;
        let spec = GridSpec { extent: 3.0, spacing: 0.05, ..GridSpec::default() };
        let eq = psor_obstacle_solve(&Weight::elliptic(t).unwrap(), 1.0, &spec).unwrap();
        let g = eq.grid().unwrap();
        assert!((g.area() - 1.0).abs() < 0.05, "area {}", g.area());
        let a = ((1.0 + t) / (1.0 - t)).sqrt();
        let b = ((1.0 - t) / (1.0 + t)).sqrt();
        assert!(eq.contains(c(0.9 * a, 0.0)) && !eq.contains(c(1.1 * a, 0.0)));
        assert!(eq.contains(c(0.0, 0.85 * b)) && !eq.contains(c(0.0, 1.15 * b)));
    }

    #[test]
    fn psor_rejects_small_domain() {
        let spec = GridSpec { extent: 0.8, spacing: 0.05, ..GridSpec::default() };
        assert!(matches!(psor_obstacle_solve(&Weight::fock(), 1.0, &spec), Err(Error::DomainTooSmall(_))));
    }

    #[test]
    fn psor_reports_non_convergence() {
        let spec = GridSpec { extent: 3.0, spacing: 0.05, max_iter: 3, ..GridSpec::default() };
        assert!(matches!(psor_obstacle_solve(&Weight::fock(), 1.0, &spec), Err(Error::SolverFailure { .. })));
    }

    #[test]
    fn grid_spec_json_defaults() {
        let s: GridSpec = serde_json::from_str(r#"{"spacing": 0.05}"#).unwrap();
        assert_eq!(s.omega, 1.8);
        assert_eq!(s.spacing, 0.05);
        assert!(serde_json::from_str::<GridSpec>(r#"{"spacing": 0.05, "bogus": 1}"#).is_err());
    }
}
