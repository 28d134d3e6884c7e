//! JSON-configured experiment runners producing CSV and JSON tables.

mod config;
mod output;

use std::f64::consts::PI;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use config::{
    ConcentrationConfig, DbarConfig, ExperimentConfig, FockConfig, OffDiagConfig, QuadratureConfig, DEFAULT_CONFIG,
    DEFAULT_SEED,
};
pub use output::OutputDir;

use crate::berezin::BerezinEvaluator;
use crate::dbar::{norm_quadrature, verify_cor_bh, DbarBoundParams, SmoothBump};
use crate::error::Result;
use crate::expansion::{default_epsilon, diag_expansion, expansion_sup_error, offdiag_profile};
use crate::fock::{
    pv_moment, pv_moment_quadrature, restricted_moment, th5_experiment, th5_test_function, DegreeRule,
    HarmonicMeasureSpec,
};
use crate::kernel::{BergmanSpace, ReproducingKernel};
use crate::numerics::{LineRule, PlanarQuadrature};
use crate::potential::{equilibrium, psor_obstacle_solve, EquilibriumResult};
use crate::table::{Cell, Table};
use crate::weights::Weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    KernelDiag,
    BerezinConc,
    GaussianTv,
    Offdiag,
    Obstacle,
    FockHarmonic,
    FockMoments,
    DbarBound,
    Accept,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::KernelDiag,
        Command::BerezinConc,
        Command::GaussianTv,
        Command::Offdiag,
        Command::Obstacle,
        Command::FockHarmonic,
        Command::FockMoments,
        Command::DbarBound,
        Command::Accept,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::KernelDiag => "kernel-diag",
            Command::BerezinConc => "berezin-conc",
            Command::GaussianTv => "gaussian-tv",
            Command::Offdiag => "offdiag",
            Command::Obstacle => "obstacle",
            Command::FockHarmonic => "fock-harmonic",
            Command::FockMoments => "fock-moments",
            Command::DbarBound => "dbar-bound",
            Command::Accept => "accept",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub deterministic: bool,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// `false` only when `accept` finds a failing criterion.
    pub passed: bool,
}

pub fn metadata(command: Command, config: &ExperimentConfig, deterministic: bool) -> Vec<(String, String)> {
    vec![
        ("generator".into(), format!("bergman-lab {}", env!("CARGO_PKG_VERSION"))),
        ("command".into(), command.name().into()),
        ("config_sha256".into(), config.hash()),
        ("seed".into(), config.seed.to_string()),
        ("deterministic".into(), deterministic.to_string()),
    ]
}

/// Runs one subcommand. The config is validated before anything is written.
pub fn run(command: Command, config: &ExperimentConfig, options: &RunOptions) -> Result<RunSummary> {
    config.validate()?;
    let out = OutputDir::new(&options.out, metadata(command, config, options.deterministic))?;
    let mut files = Vec::new();
    let mut passed = true;
    match command {
        Command::KernelDiag => files.push(out.write_table("kernel_diag.csv", &kernel_diag(config)?)?),
        Command::BerezinConc => files.push(out.write_table("berezin_conc.csv", &berezin_conc(config)?)?),
        Command::GaussianTv => files.push(out.write_table("gaussian_tv.csv", &gaussian_tv(config)?)?),
        Command::Offdiag => {
            let (summary, profiles) = offdiag(config)?;
            files.push(out.write_table("offdiag_summary.csv", &summary)?);
            for (name, table) in profiles {
                files.push(out.write_table(&name, &table)?);
            }
        }
        Command::Obstacle => {
            let (summary, grid) = obstacle(config)?;
            files.push(out.write_table("obstacle.csv", &summary)?);
            files.push(out.write_table("obstacle_grid.csv", &grid)?);
        }
        Command::FockHarmonic => files.push(out.write_table("fock_harmonic.csv", &fock_harmonic(config)?)?),
        Command::FockMoments => files.push(out.write_table("fock_moments.csv", &fock_moments(config)?)?),
        Command::DbarBound => files.push(out.write_json("dbar_bound.json", &dbar_bound(config)?)?),
        Command::Accept => {
            let results = crate::acceptance::run_all();
            passed = results.iter().all(|r| r.passed);
            files.push(out.write_table("acceptance.csv", &crate::acceptance::to_table(&results))?);
        }
    }
    Ok(RunSummary { files, passed })
}

/// Radial norms for radial weights, the Gram route otherwise.
pub fn build_space(weight: &Weight, m: f64, n: usize) -> Result<BergmanSpace> {
    BergmanSpace::build(weight, m, n, &BergmanSpace::default_quadrature(weight, m, n))
}

fn weight_and_equilibrium(config: &ExperimentConfig) -> Result<(Weight, EquilibriumResult)> {
    let weight = config.weight.build()?;
    let eq = equilibrium(&weight, config.tau, &config.grid)?;
    Ok((weight, eq))
}

fn sample_droplet(eq: &EquilibriumResult, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = 0.8 * eq.radius_estimate();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count && attempts < 100 * count.max(1) {
        attempts += 1;
        let r = r_max * rng.gen::<f64>().sqrt();
        let z = Complex64::from_polar(r, 2.0 * PI * rng.gen::<f64>());
        if eq.contains(z) {
            out.push(z);
        }
    }
    out
}

fn for_each_m<T: Send, F>(config: &ExperimentConfig, f: F) -> Result<Vec<T>>
where
    F: Fn(f64, usize) -> Result<T> + Sync + Send,
{
    config.m_schedule.par_iter().map(|&m| f(m, config.degree(m))).collect()
}

fn kernel_diag(config: &ExperimentConfig) -> Result<Table> {
    let (weight, eq) = weight_and_equilibrium(config)?;
    let mut points = config.z0.clone();
    points.extend(sample_droplet(&eq, config.random_points, config.seed));
    let blocks = for_each_m(config, |m, n| {
        let space = build_space(&weight, m, n)?;
        points
            .iter()
            .map(|&z| {
                let one_point = space.one_point(z);
                let diag = diag_expansion(&weight, m, z).unwrap_or(f64::NAN);
                let eps = default_epsilon(&eq, &weight, z);
                let sup = if eps > 0.0 && diag.is_finite() { expansion_sup_error(&space, z, eps)? } else { f64::NAN };
                let residual = (one_point - diag).abs();
                Ok(vec![
                    m.into(),
                    n.into(),
                    z.re.into(),
                    z.im.into(),
                    one_point.into(),
                    diag.into(),
                    residual.into(),
                    (residual * m).into(),
                    eps.into(),
                    sup.into(),
                ])
            })
            .collect::<Result<Vec<Vec<Cell>>>>()
    })?;
    let mut t = Table::new([
        "m",
        "n",
        "z_re",
        "z_im",
        "one_point",
        "diag_expansion",
        "residual",
        "residual_times_m",
        "epsilon",
        "expansion_sup_error",
    ]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

/// Radial tensor rule about the origin with a panel break at `split`.
pub fn split_quadrature(m: f64, split: f64, r_max: f64, per_panel: usize, n_angular: usize) -> PlanarQuadrature {
    let width = 0.25 / m.sqrt();
    let mut breaks = vec![0.0];
    for (a, b) in [(0.0, split), (split, r_max.max(split * 1.5))] {
        let k = ((b - a) / width).ceil().max(1.0) as usize;
        breaks.extend((1..=k).map(|i| a + (b - a) * i as f64 / k as f64));
    }
    let rule = LineRule::composite(&breaks, per_panel);
    PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, n_angular)
}

fn berezin_conc(config: &ExperimentConfig) -> Result<Table> {
    let (weight, eq) = weight_and_equilibrium(config)?;
    let split = config.concentration.radius_factor * eq.radius_estimate();
    let blocks = for_each_m(config, |m, n| {
        let space = build_space(&weight, m, n)?;
        config
            .z0
            .iter()
            .map(|&z0| {
                let ev = BerezinEvaluator::new(&space, z0)?;
                let r_max = weight.truncation_radius(m, n, config.quadrature.tail_margin) + z0.norm();
                let quad = split_quadrature(m, split, r_max, config.quadrature.per_panel, 1024);
                let mass = ev.mass(&quad);
                let outside = ev.mass_outside(|z| z.norm() > split, &quad);
                Ok(vec![m.into(), n.into(), z0.re.into(), z0.im.into(), split.into(), mass.into(), outside.into()])
            })
            .collect::<Result<Vec<Vec<Cell>>>>()
    })?;
    let mut t = Table::new(["m", "n", "z_re", "z_im", "outside_radius", "mass", "mass_outside"]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

pub fn tv_quadrature_from(q: &QuadratureConfig) -> PlanarQuadrature {
    let rule = LineRule::uniform(0.0, q.tv_radius, q.tv_panels, q.per_panel);
    PlanarQuadrature::from_radial_rule(Complex64::new(0.0, 0.0), &rule, q.tv_angular)
}

fn gaussian_tv(config: &ExperimentConfig) -> Result<Table> {
    let weight = config.weight.build()?;
    let quad = tv_quadrature_from(&config.quadrature);
    let blocks = for_each_m(config, |m, n| {
        let space = build_space(&weight, m, n)?;
        config
            .z0
            .iter()
            .map(|&z0| {
                let ev = BerezinEvaluator::new(&space, z0)?;
                let tv = ev.tv_to_gaussian(&quad)?;
                Ok(vec![m.into(), n.into(), z0.re.into(), z0.im.into(), ev.blowup_scale()?.into(), tv.into()])
            })
            .collect::<Result<Vec<Vec<Cell>>>>()
    })?;
    let mut t = Table::new(["m", "n", "z_re", "z_im", "blowup_scale", "tv"]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

type NamedTables = Vec<(String, Table)>;

fn offdiag(config: &ExperimentConfig) -> Result<(Table, NamedTables)> {
    let (weight, eq) = weight_and_equilibrium(config)?;
    let o = &config.offdiag;
    let distances: Vec<f64> = (1..=o.samples).map(|i| o.max_distance * i as f64 / o.samples as f64).collect();
    let blocks = for_each_m(config, |m, n| {
        let space = build_space(&weight, m, n)?;
        config
            .z0
            .iter()
            .enumerate()
            .map(|(i, &z0)| {
                let rep = offdiag_profile(&space, z0, o.direction, &distances, &eq)?;
                let row: Vec<Cell> = vec![
                    m.into(),
                    n.into(),
                    z0.re.into(),
                    z0.im.into(),
                    rep.fitted_slope.into(),
                    rep.d_k.into(),
                    rep.a_k.into(),
                ];
                Ok((row, (format!("offdiag_profile_m{m}_z{i}.csv"), rep.to_table())))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut t = Table::new(["m", "n", "z_re", "z_im", "fitted_slope", "d_k", "a_k"]);
    let mut profiles = Vec::new();
    for (row, profile) in blocks.into_iter().flatten() {
        t.push(row);
        profiles.push(profile);
    }
    Ok((t, profiles))
}

fn obstacle(config: &ExperimentConfig) -> Result<(Table, Table)> {
    let weight = config.weight.build()?;
    let eq = psor_obstacle_solve(&weight, config.tau, &config.grid)?;
    let grid = eq.grid().expect("solver returns a grid");
    let radial = crate::potential::radial_droplet_radius(&weight, config.tau).ok();
    let d = eq.diagnostics();
    let mut t = Table::new([
        "weight",
        "tau",
        "spacing",
        "radius",
        "radial_radius",
        "area",
        "mass",
        "q_tau",
        "c_tau",
        "boundary_constant",
        "sweeps",
        "outer_iterations",
        "last_update",
    ]);
    t.push(vec![
        weight.name().into(),
        config.tau.into(),
        grid.spacing().into(),
        eq.radius_estimate().into(),
        radial.unwrap_or(f64::NAN).into(),
        grid.area().into(),
        d.mass.into(),
        eq.q_tau().into(),
        eq.c_tau().into(),
        d.boundary_constant.into(),
        d.iterations.into(),
        d.outer_iterations.into(),
        d.residual.into(),
    ]);
    Ok((t, grid.to_table()))
}

fn fock_harmonic(config: &ExperimentConfig) -> Result<Table> {
    let spec = HarmonicMeasureSpec::new(config.tau, config.fock.z0, config.fock.boundary_samples)?;
    let f = th5_test_function(config.tau);
    let mut t = Table::new(["schedule", "m", "n", "berezin", "harmonic", "gap"]);
    let mut rules = vec![("configured", config.n_rule)];
    if config.n_rule != DegreeRule::MTauPlusSqrtM {
        rules.push(("m_tau_plus_sqrt_m", DegreeRule::MTauPlusSqrtM));
    }
    for (label, rule) in rules {
        for row in th5_experiment(&spec, f, &config.m_schedule, rule)? {
            t.push(vec![label.into(), row.m.into(), row.n.into(), row.berezin.into(), row.harmonic.into(), row.gap.into()]);
        }
    }
    Ok(t)
}

fn fock_moments(config: &ExperimentConfig) -> Result<Table> {
    let z0 = config.fock.z0;
    let blocks = for_each_m(config, |m, n| {
        config
            .fock
            .orders
            .iter()
            .filter(|&&j| j < n)
            .map(|&j| {
                let closed = pv_moment(m, n, j, z0)?.value;
                let quad = pv_moment_quadrature(m, n, j, z0)?.value;
                let disk = restricted_moment(m, n, j, z0, config.fock.disk_radius)?.value;
                Ok(vec![
                    m.into(),
                    n.into(),
                    j.into(),
                    closed.re.into(),
                    closed.im.into(),
                    quad.re.into(),
                    quad.im.into(),
                    (closed - quad).norm().into(),
                    disk.re.into(),
                    disk.im.into(),
                ])
            })
            .collect::<Result<Vec<Vec<Cell>>>>()
    })?;
    let mut t = Table::new([
        "m",
        "n",
        "j",
        "closed_re",
        "closed_im",
        "quadrature_re",
        "quadrature_im",
        "difference",
        "disk_re",
        "disk_im",
    ]);
    blocks.into_iter().flatten().for_each(|row| t.push(row));
    Ok(t)
}

fn dbar_bound(config: &ExperimentConfig) -> Result<Vec<crate::dbar::CorBhRecord>> {
    let (weight, eq) = weight_and_equilibrium(config)?;
    let d = &config.dbar;
    let bump = SmoothBump::new(d.bump_center, d.bump_radius)?;
    let params = DbarBoundParams::new(d.m_zero_growth, d.bpar, &eq, &weight, &bump)?;
    let f_quad = bump.quadrature(d.cells)?;
    for_each_m(config, |m, n| {
        let space = build_space(&weight, m, n)?;
        Ok(verify_cor_bh(&space, &bump, &params, &eq, &f_quad, &norm_quadrature(&weight, m, n)))
    })
}
