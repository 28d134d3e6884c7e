//! Berezin densities `|K(z,z_0)|² / K(z_0,z_0) · e^{-mQ(z)}`, the Berezin
//! transform, the rescaled density and convergence diagnostics.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::ReproducingKernel;
use crate::numerics::{LineRule, PlanarQuadrature};

/// Berezin density at a fixed base point `z_0`.
pub struct BerezinEvaluator<'a, K: ReproducingKernel + ?Sized> {
    kernel: &'a K,
    z0: Complex64,
    log_one_point_z0: f64,
}

impl<'a, K: ReproducingKernel + ?Sized> BerezinEvaluator<'a, K> {
    pub fn new(kernel: &'a K, z0: Complex64) -> Result<Self> {
        let log_one_point_z0 = kernel.log_one_point(z0);
        if !log_one_point_z0.is_finite() {
            return Err(Error::invalid(format!("K(z0, z0) vanishes numerically at z0 = {z0}")));
        }
        Ok(BerezinEvaluator { kernel, z0, log_one_point_z0 })
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn kernel(&self) -> &K {
        self.kernel
    }

    /// `K(z_0, z_0) e^{-mQ(z_0)}`.
    pub fn one_point_z0(&self) -> f64 {
        self.log_one_point_z0.exp()
    }

    pub fn log_density(&self, z: Complex64) -> f64 {
        2.0 * self.kernel.weighted_kernel(z, self.z0).log_magnitude - self.log_one_point_z0
    }

    pub fn density(&self, z: Complex64) -> f64 {
        self.log_density(z).exp()
    }

    /// `𝔅_{m,n} f(z_0) = ∫ f dB^{⟨z_0⟩}`.
    pub fn transform<F: Fn(Complex64) -> f64 + ?Sized>(&self, f: &F, quadrature: &PlanarQuadrature) -> f64 {
        let dens = quadrature.map_nodes(|z| self.density(z));
        let vals: Vec<f64> = quadrature.nodes.iter().zip(&dens).map(|(z, d)| if *d == 0.0 { 0.0 } else { f(*z) * d }).collect();
        quadrature.sum_values(&vals)
    }

    /// Total mass, which is 1 up to quadrature error.
    pub fn mass(&self, quadrature: &PlanarQuadrature) -> f64 {
        self.transform(&|_| 1.0, quadrature)
    }

    /// Mass of the density on `{indicator(z)}`.
    pub fn mass_outside<F: Fn(Complex64) -> bool>(&self, indicator: F, quadrature: &PlanarQuadrature) -> f64 {
        self.transform(&|z| if indicator(z) { 1.0 } else { 0.0 }, quadrature)
    }

    /// `m ΔQ(z_0)`, the square of the blow-up scale.
    pub fn blowup_scale(&self) -> Result<f64> {
        let lap = self.kernel.weight().laplacian(self.z0);
        if !(lap > 0.0) {
            return Err(Error::NotInX { z: self.z0, laplacian: lap });
        }
        Ok(self.kernel.m() * lap)
    }

    /// `(1/(mΔQ(z_0))) · B(z_0 + z/√(mΔQ(z_0)))`.
    pub fn normalized_density(&self, z: Complex64) -> Result<f64> {
        let s = self.blowup_scale()?;
        Ok(self.density(self.z0 + z / s.sqrt()) / s)
    }

    /// `∫ |B̂(z) − e^{-|z|²}| dA` over `quadrature`, given in rescaled
    /// coordinates (see [`tv_quadrature`]).
    pub fn tv_to_gaussian(&self, quadrature: &PlanarQuadrature) -> Result<f64> {
        let s = self.blowup_scale()?;
        let root = s.sqrt();
        let diffs = quadrature.map_nodes(|z| (self.density(self.z0 + z / root) / s - (-z.norm_sqr()).exp()).abs());
        Ok(quadrature.sum_values(&diffs))
    }

    /// A quadrature centred at `z_0` reaching `r_max`, with radial panels
    /// about `1/(4√m)` wide.
    pub fn quadrature(&self, r_max: f64) -> PlanarQuadrature {
        let m = self.kernel.m();
        let panels = ((r_max * m.sqrt() * 4.0).ceil() as usize).clamp(16, 2000);
        let rule = LineRule::uniform(0.0, r_max, panels, 12);
        let n_angular = ((8.0 * std::f64::consts::PI * r_max.min(4.0) * m.sqrt()).ceil() as usize)
            .next_power_of_two()
            .clamp(128, 2048);
        PlanarQuadrature::from_radial_rule(self.z0, &rule, n_angular)
    }

    /// [`Self::quadrature`] with a radius that captures all but `e^{-40}` of
    /// the weighted tail.
    pub fn default_quadrature(&self) -> PlanarQuadrature {
        let w = self.kernel.weight();
        let r = w.truncation_radius(self.kernel.m(), self.kernel.n(), 40.0);
        self.quadrature(r + self.z0.norm())
    }
}

/// Rescaled-coordinate rule on `D(0; 8)`; both densities are below `e^{-64}` at its edge.
pub fn tv_quadrature() -> PlanarQuadrature {
    let rule = LineRule::uniform(0.0, 8.0, 32, 12);
    PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, 256)
}

/// The standard Gaussian density `e^{-|z|²}` against `dA`.
#[derive(Clone, Copy, Debug, Default)]
pub struct GaussianReference;

impl GaussianReference {
    pub fn density(&self, z: Complex64) -> f64 {
        (-z.norm_sqr()).exp()
    }
}
