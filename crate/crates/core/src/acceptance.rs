//! The fourteen acceptance criteria, each with fixed parameters.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::berezin::{tv_quadrature, BerezinEvaluator};
use crate::dbar::{norm_quadrature, verify_cor_bh, DbarBoundParams, SmoothBump};
use crate::error::Result;
use crate::expansion::{diag_expansion, offdiag_profile};
use crate::experiment::{run, split_quadrature, Command, ExperimentConfig, RunOptions};
use crate::fock::{
    fock_kernel, pv_moment, pv_moment_quadrature, szego_relative_error, th5_experiment, th5_test_function, DegreeRule,
    FockKernel, HarmonicMeasureSpec,
};
use crate::kernel::{BergmanSpace, ReproducingKernel};
use crate::numerics::PlanarQuadrature;
use crate::potential::{equilibrium, psor_obstacle_solve, GridSpec};
use crate::table::Table;
use crate::weights::Weight;

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

type Check = fn() -> Result<(bool, String)>;

const CRITERIA: [(&str, Check); 14] = [
    ("normalization", normalization),
    ("fock closed form", fock_closed_form),
    ("berezin mass", berezin_mass),
    ("exact gaussian case", exact_gaussian),
    ("diagonal expansion", diagonal_expansion),
    ("gaussian convergence trend", gaussian_trend),
    ("droplet concentration", droplet_concentration),
    ("off-diagonal damping", offdiag_damping),
    ("obstacle solver", obstacle_solver),
    ("szego asymptotic", szego),
    ("fock moments", fock_moments),
    ("harmonic measure", harmonic_measure),
    ("dbar bound", dbar_bound),
    ("determinism", determinism),
];

pub fn criterion_count() -> usize {
    CRITERIA.len()
}

/// Runs criterion `id` (1-based). Numerical errors count as failures.
pub fn run_criterion(id: usize) -> CriterionResult {
    let (name, check) = CRITERIA[id - 1];
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name, passed, detail }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA.len()).into_par_iter().map(run_criterion).collect()
}

pub fn to_table(results: &[CriterionResult]) -> Table {
    let mut t = Table::new(["id", "name", "passed", "detail"]);
    for r in results {
        t.push(vec![r.id.into(), r.name.into(), r.passed.into(), r.detail.clone().into()]);
    }
    t
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn normalization() -> Result<(bool, String)> {
    let disk = PlanarQuadrature::radial(1.0, 16, 16)?.integrate(|_| 1.0);
    let mut worst: f64 = 0.0;
    for m in [1.0f64, 4.0, 25.0] {
        let quad = PlanarQuadrature::centered(c(0.0, 0.0), (80.0 / m).sqrt(), 16, 12, 16)?;
        let g = quad.integrate(|z| (-m * z.norm_sqr()).exp());
        worst = worst.max((g - 1.0 / m).abs());
    }
    let disk_err = (disk - 1.0).abs();
    Ok((disk_err <= 1e-10 && worst <= 1e-8, format!("disk error {disk_err:.2e}, gaussian error {worst:.2e}")))
}

fn fock_closed_form() -> Result<(bool, String)> {
    let weight = Weight::fock();
    let mut rng = ChaCha8Rng::seed_from_u64(crate::experiment::DEFAULT_SEED);
    let mut sample = || Complex64::from_polar(2.0 * rng.gen::<f64>().sqrt(), 2.0 * std::f64::consts::PI * rng.gen::<f64>());
    let pairs: Vec<(Complex64, Complex64)> = (0..200).map(|_| (sample(), sample())).collect();
    let mut worst: f64 = 0.0;
    let mut worst_scaled: f64 = 0.0;
    let mut offenders = 0;
    let mut worst_condition: f64 = 0.0;
    for (m, n) in [(4.0, 4), (10.0, 12), (30.0, 30)] {
        let space = BergmanSpace::gram(&weight, m, n, &BergmanSpace::default_quadrature(&weight, m, n))?;
        for &(z, w) in &pairs {
            let exact = fock_kernel(m, n, z, w)?;
            let diff = (space.kernel(z, w) - exact).norm();
            // |K(z,w)| <= sqrt(K(z,z) K(w,w)); the ratio is the conditioning of the value.
            let scale = (fock_kernel(m, n, z, z)?.re * fock_kernel(m, n, w, w)?.re).sqrt();
            let rel = diff / exact.norm();
            if rel > 1e-7 {
                offenders += 1;
                worst_condition = worst_condition.max(scale / exact.norm());
            }
            worst = worst.max(rel);
            worst_scaled = worst_scaled.max(diff / scale);
        }
    }
    Ok((
        worst <= 1e-7,
        format!(
            "max relative error {worst:.2e}; {offenders} of 600 pairs above 1e-7, worst condition {worst_condition:.2e}; \
             error relative to sqrt(K(z,z)K(w,w)) {worst_scaled:.2e}"
        ),
    ))
}

fn berezin_mass() -> Result<(bool, String)> {
    let weights = [Weight::fock(), Weight::quartic(0.1)?, Weight::elliptic(0.3)?];
    let mut worst: f64 = 0.0;
    for weight in &weights {
        for (m, n) in [(8.0, 8), (16.0, 16), (32.0, 32)] {
            let space = crate::experiment::build_space(weight, m, n)?;
            for z0 in [c(0.0, 0.0), c(0.3, 0.2), c(0.9, 0.0)] {
                let ev = BerezinEvaluator::new(&space, z0)?;
                worst = worst.max((ev.mass(&ev.default_quadrature()) - 1.0).abs());
            }
        }
    }
    Ok((worst <= 1e-6, format!("max |mass - 1| {worst:.2e} over 27 cases")))
}

fn exact_gaussian() -> Result<(bool, String)> {
    let quad = tv_quadrature();
    let mut worst: f64 = 0.0;
    for m in [5.0, 50.0] {
        for n in [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144] {
            let kernel = FockKernel::new(m, n)?;
            let ev = BerezinEvaluator::new(&kernel, c(0.0, 0.0))?;
            worst = worst.max(ev.tv_to_gaussian(&quad)?);
        }
    }
    Ok((worst <= 1e-6, format!("max tv {worst:.2e}")))
}

const QUARTIC_MS: [f64; 3] = [16.0, 32.0, 64.0];

fn quartic_space(m: f64) -> Result<BergmanSpace> {
    crate::experiment::build_space(&Weight::quartic(0.1)?, m, m.round() as usize)
}

fn diagonal_expansion() -> Result<(bool, String)> {
    let weight = Weight::quartic(0.1)?;
    let z0 = c(0.3, 0.0);
    let mut residuals = Vec::new();
    for m in QUARTIC_MS {
        let space = quartic_space(m)?;
        residuals.push((space.one_point(z0) - diag_expansion(&weight, m, z0)?).abs());
    }
    let scaled: Vec<f64> = residuals.iter().zip(QUARTIC_MS).map(|(r, m)| r * m).collect();
    let bounded = scaled.iter().all(|&s| s <= 2.0 * scaled[0]);
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    Ok((bounded && decreasing, format!("residual {}, residual*m {}", sci(&residuals), sci(&scaled))))
}

fn gaussian_trend() -> Result<(bool, String)> {
    let quad = tv_quadrature();
    let mut tv = Vec::new();
    for m in QUARTIC_MS {
        let space = quartic_space(m)?;
        tv.push(BerezinEvaluator::new(&space, c(0.3, 0.0))?.tv_to_gaussian(&quad)?);
    }
    Ok((tv[2] < tv[1] && tv[1] < tv[0], format!("tv {}", sci(&tv))))
}

fn droplet_concentration() -> Result<(bool, String)> {
    let weight = Weight::fock();
    let ms = [20.0, 40.0, 80.0];
    let z0 = c(0.5, 0.0);
    let mut masses = Vec::new();
    for m in ms {
        let n = m as usize;
        let kernel = FockKernel::new(m, n)?;
        let ev = BerezinEvaluator::new(&kernel, z0)?;
        let quad = split_quadrature(m, 1.2, weight.truncation_radius(m, n, 40.0) + 1.0, 12, 1024);
        masses.push(ev.mass_outside(|z| z.norm() > 1.2, &quad));
    }
    let factors: Vec<f64> = masses.windows(2).map(|w| w[0] / w[1]).collect();
    let logs: Vec<f64> = masses.iter().map(|x| x.ln()).collect();
    let r2 = r_squared(&ms, &logs);
    let ok = factors.iter().all(|&f| f >= 5.0) && r2 >= 0.9;
    Ok((ok, format!("mass outside {}, factors {factors:.2?}, R^2 {r2:.4}", sci(&masses))))
}

fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if syy == 0.0 {
        return 1.0;
    }
    sxy * sxy / (sxx * syy)
}

fn offdiag_damping() -> Result<(bool, String)> {
    let distances: Vec<f64> = (1..=60).map(|i| 1.5 * i as f64 / 60.0).collect();
    let mut ok = true;
    let mut detail = Vec::new();
    for weight in [Weight::fock(), Weight::quartic(0.1)?] {
        let eq = equilibrium(&weight, 1.0, &GridSpec::default())?;
        let mut slopes = Vec::new();
        for m in [16.0, 64.0] {
            let space = crate::experiment::build_space(&weight, m, m as usize)?;
            slopes.push(offdiag_profile(&space, c(0.0, 0.0), c(1.0, 0.0), &distances, &eq)?.fitted_slope);
        }
        let ratio = slopes[1] / slopes[0];
        ok &= slopes.iter().all(|&s| s < 0.0) && ratio >= 1.5;
        detail.push(format!("{}: slopes {:.4} {:.4} ratio {ratio:.3}", weight.name(), slopes[0], slopes[1]));
    }
    Ok((ok, detail.join("; ")))
}

fn obstacle_solver() -> Result<(bool, String)> {
    let spec = GridSpec { spacing: 0.02, ..GridSpec::default() };
    let h = spec.spacing;
    let (fock, power) = rayon::join(
        || psor_obstacle_solve(&Weight::fock(), 1.0, &spec),
        || psor_obstacle_solve(&Weight::radial_power(2)?, 1.0, &spec),
    );
    let (fock, power) = (fock?, power?);
    let fock_err = (fock.radius_estimate() - 1.0).abs();
    let mass_err = (fock.diagnostics().mass - 1.0).abs();
    let power_err = (power.radius_estimate() - 0.5f64.powf(0.25)).abs();
    let ok = fock_err <= 2.0 * h && mass_err <= 1e-3 && power_err <= 2.0 * h;
    Ok((ok, format!("fock radius error {fock_err:.2e}, mass error {mass_err:.2e}, p=2 radius error {power_err:.2e}")))
}

fn szego() -> Result<(bool, String)> {
    let e200 = szego_relative_error(200, 2.0)?;
    let e400 = szego_relative_error(400, 2.0)?;
    Ok((e200 <= 2e-2 && e400 < e200, format!("relative error {e200:.3e} at l=200, {e400:.3e} at l=400")))
}

fn fock_moments() -> Result<(bool, String)> {
    let z0 = c(1.5, 0.0);
    let mut worst: f64 = 0.0;
    for j in [1, 2] {
        let closed = pv_moment(10.0, 12, j, z0)?.value;
        let quad = pv_moment_quadrature(10.0, 12, j, z0)?.value;
        worst = worst.max((closed - quad).norm());
    }
    let limit = (pv_moment(50.0, 50, 1, z0)?.value - 1.0 / z0).norm();
    Ok((worst <= 1e-6 && limit <= 1e-3, format!("closed vs quadrature {worst:.2e}, distance to 1/z0 {limit:.2e}")))
}

fn harmonic_measure() -> Result<(bool, String)> {
    let spec = HarmonicMeasureSpec::new(1.0, c(1.5, 0.0), 512)?;
    let rows = th5_experiment(&spec, th5_test_function(1.0), &[64.0, 256.0], DegreeRule::RoundMTau)?;
    let (g64, g256) = (rows[0].gap, rows[1].gap);
    Ok((g256 < g64 && g256 <= 5e-2, format!("gap {g64:.3e} at m=64, {g256:.3e} at m=256")))
}

fn dbar_bound() -> Result<(bool, String)> {
    let bump = SmoothBump::new(c(0.0, 0.0), 0.3)?;
    let f_quad = bump.quadrature(60)?;
    let mut ok = true;
    let mut worst_ratio: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    let mut in_regime = 0;
    for weight in [Weight::fock(), Weight::quartic(0.1)?] {
        let eq = equilibrium(&weight, 1.0, &GridSpec::default())?;
        let params = DbarBoundParams::new(1.0, 0.5, &eq, &weight, &bump)?;
        for m in [8.0, 16.0, 32.0] {
            let n = m as usize;
            let space = crate::experiment::build_space(&weight, m, n)?;
            let rec = verify_cor_bh(&space, &bump, &params, &eq, &f_quad, &norm_quadrature(&weight, m, n));
            if rec.regime_ok && rec.support_ok {
                in_regime += 1;
                worst_ratio = worst_ratio.max(rec.ratio);
                worst_orth = worst_orth.max(rec.orthogonality_residual);
                ok &= rec.ratio <= 1.0 && rec.orthogonality_residual <= 1e-6;
            }
        }
    }
    ok &= in_regime > 0;
    Ok((ok, format!("{in_regime} in-regime cases, max ratio {worst_ratio:.3e}, max orthogonality {worst_orth:.2e}")))
}

const DETERMINISM_CONFIG: &str = r#"{
    "weight": {"kind": "quartic", "c": 0.1},
    "m_schedule": [8, 16],
    "z0": [[0.3, 0.0], [0.0, 0.2]],
    "random_points": 2,
    "grid": {"spacing": 0.1},
    "offdiag": {"samples": 12},
    "fock": {"boundary_samples": 64},
    "dbar": {"cells": 24}
}"#;

/// Runs every writer except `accept` twice and compares the files byte for byte.
fn determinism() -> Result<(bool, String)> {
    let config = ExperimentConfig::from_json(DETERMINISM_CONFIG)?;
    let commands: Vec<Command> = Command::ALL.into_iter().filter(|c| *c != Command::Accept).collect();
    let mut dirs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir()?;
        for &command in &commands {
            run(command, &config, &RunOptions { out: dir.path().to_path_buf(), deterministic: true })?;
        }
        dirs.push(dir);
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())?.map(|e| e.map(|e| e.file_name())).collect::<std::io::Result<_>>()?;
    names.sort();
    let mut differing = Vec::new();
    for name in &names {
        if std::fs::read(dirs[0].path().join(name))? != std::fs::read(dirs[1].path().join(name))? {
            differing.push(name.to_string_lossy().into_owned());
        }
    }
    let ok = differing.is_empty() && names.len() >= commands.len();
    Ok((ok, format!("{} files compared, {} differ {differing:?}", names.len(), differing.len())))
}

fn sci(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}
