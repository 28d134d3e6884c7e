use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::DegreeRule;
use crate::potential::GridSpec;
use crate::weights::WeightDescriptor;

/// The configuration shipped with the crate.
pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.json");

/// Default seed for every randomized sample.
pub const DEFAULT_SEED: u64 = 20_080_527;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub weight: WeightDescriptor,
    #[serde(default = "one")]
    pub tau: f64,
    pub m_schedule: Vec<f64>,
    #[serde(default = "round_m_tau")]
    pub n_rule: DegreeRule,
    /// Base points, each written as `[re, im]`.
    pub z0: Vec<Complex64>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub offdiag: OffDiagConfig,
    #[serde(default)]
    pub concentration: ConcentrationConfig,
    #[serde(default)]
    pub fock: FockConfig,
    #[serde(default)]
    pub dbar: DbarConfig,
    /// Extra kernel-diag points drawn uniformly from the droplet.
    #[serde(default)]
    pub random_points: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

fn round_m_tau() -> DegreeRule {
    DegreeRule::RoundMTau
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Tail margin (in units of the exponent) for truncation radii.
    pub tail_margin: f64,
    /// Radius of the rescaled disk used for total variation.
    pub tv_radius: f64,
    pub tv_panels: usize,
    pub tv_angular: usize,
    pub per_panel: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { tail_margin: 40.0, tv_radius: 8.0, tv_panels: 32, tv_angular: 256, per_panel: 12 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OffDiagConfig {
    pub direction: Complex64,
    pub max_distance: f64,
    pub samples: usize,
}

impl Default for OffDiagConfig {
    fn default() -> Self {
        OffDiagConfig { direction: Complex64::new(1.0, 0.0), max_distance: 1.5, samples: 60 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationConfig {
    /// Mass is measured outside `|z| ≤ factor · R_τ`.
    pub radius_factor: f64,
}

impl Default for ConcentrationConfig {
    fn default() -> Self {
        ConcentrationConfig { radius_factor: 1.2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FockConfig {
    /// Exterior point for the harmonic-measure table and centre of the moments.
    pub z0: Complex64,
    pub boundary_samples: usize,
    pub orders: Vec<usize>,
    /// Radius of the restricted moments.
    pub disk_radius: f64,
}

impl Default for FockConfig {
    fn default() -> Self {
        FockConfig { z0: Complex64::new(1.5, 0.0), boundary_samples: 512, orders: vec![1, 2], disk_radius: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbarConfig {
    pub bump_center: Complex64,
    pub bump_radius: f64,
    /// Cells per bump diameter for the Cauchy-transform grid.
    pub cells: usize,
    pub m_zero_growth: f64,
    pub bpar: f64,
}

impl Default for DbarConfig {
    fn default() -> Self {
        DbarConfig { bump_center: Complex64::new(0.0, 0.0), bump_radius: 0.3, cells: 60, m_zero_growth: 1.0, bpar: 0.5 }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read config: {e}")))?;
        Self::from_json(&text)
    }

    pub fn shipped() -> Self {
        Self::from_json(DEFAULT_CONFIG).expect("shipped config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.weight.build().map_err(|e| Error::config("weight", e.to_string()))?;
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::config("tau", "must be a positive number"));
        }
        if self.m_schedule.is_empty() {
            return Err(Error::config("m_schedule", "must not be empty"));
        }
        for (i, &m) in self.m_schedule.iter().enumerate() {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::config(format!("m_schedule[{i}]"), "must be positive"));
            }
            if i > 0 && m <= self.m_schedule[i - 1] {
                return Err(Error::config(format!("m_schedule[{i}]"), "must be strictly increasing"));
            }
            if let DegreeRule::MTauPlus { offset } = self.n_rule {
                if (m * self.tau).round() as i64 + offset < 1 {
                    return Err(Error::config("n_rule.offset", format!("gives n < 1 at m = {m}")));
                }
            }
        }
        if self.z0.is_empty() {
            return Err(Error::config("z0", "needs at least one base point"));
        }
        let q = &self.quadrature;
        if !(q.tail_margin > 0.0 && q.tv_radius > 0.0) || q.tv_panels == 0 || q.tv_angular < 4 || q.per_panel < 2 {
            return Err(Error::config("quadrature", "margins and radii must be positive, tv_angular >= 4, per_panel >= 2"));
        }
        if !(self.offdiag.direction.norm() > 0.0) {
            return Err(Error::config("offdiag.direction", "must be nonzero"));
        }
        if !(self.offdiag.max_distance > 0.0) || self.offdiag.samples < 2 {
            return Err(Error::config("offdiag", "needs max_distance > 0 and at least 2 samples"));
        }
        if !(self.concentration.radius_factor > 0.0) {
            return Err(Error::config("concentration.radius_factor", "must be positive"));
        }
        if self.fock.z0.norm_sqr() <= self.tau {
            return Err(Error::config("fock.z0", "must lie outside the droplet |z|² ≤ tau"));
        }
        if self.fock.boundary_samples < 8 {
            return Err(Error::config("fock.boundary_samples", "must be at least 8"));
        }
        if !(self.fock.disk_radius > 0.0) {
            return Err(Error::config("fock.disk_radius", "must be positive"));
        }
        let d = &self.dbar;
        if !(d.bump_radius > 0.0 && d.m_zero_growth > 0.0 && d.bpar > 0.0) || d.cells < 4 {
            return Err(Error::config("dbar", "bump_radius, m_zero_growth and bpar must be positive, cells >= 4"));
        }
        Ok(())
    }

    pub fn degree(&self, m: f64) -> usize {
        self.n_rule.degree(m, self.tau)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_valid() {
        let cfg = ExperimentConfig::shipped();
        assert_eq!(cfg.seed, DEFAULT_SEED);
        assert_eq!(cfg.hash(), ExperimentConfig::shipped().hash());
        assert_eq!(cfg.hash().len(), 64);
    }

    #[test]
    fn errors_carry_field_paths() {
        let base = r#"{"weight": {"kind": "fock"}, "m_schedule": [4, 8], "z0": [[0.1, 0.0]]}"#;
        assert!(ExperimentConfig::from_json(base).is_ok());
        let cases = [
            (r#"{"weight": {"kind": "fock"}, "m_schedule": [8, 4], "z0": [[0.1, 0.0]]}"#, "m_schedule[1]"),
            (r#"{"weight": {"kind": "fock"}, "m_schedule": [4], "z0": []}"#, "z0"),
            (r#"{"weight": {"kind": "quartic", "c": -1}, "m_schedule": [4], "z0": [[0, 0]]}"#, "weight"),
            (r#"{"weight": {"kind": "fock"}, "m_schedule": [4], "z0": [[0, 0]], "grid": {"omega": "x"}}"#, "grid.omega"),
            (r#"{"weight": {"kind": "fock"}, "m_schedule": [4], "z0": [[0, 0]], "typo": 1}"#, "typo"),
            (
                r#"{"weight": {"kind": "fock"}, "m_schedule": [4], "z0": [[0, 0]], "n_rule": {"rule": "m_tau_plus", "offset": -9}}"#,
                "n_rule.offset",
            ),
        ];
        for (text, want) in cases {
            match ExperimentConfig::from_json(text) {
                Err(Error::Config { path, .. }) => assert_eq!(path, want, "{text}"),
                other => panic!("expected config error for {text}, got {other:?}"),
            }
        }
    }
}
