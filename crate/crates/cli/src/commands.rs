use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use tripod_core::calibration::{calibrate_gamma0, small_coupling_grid, Calibration, CalibrationRequest};
use tripod_core::fidelity::{sweep, SweepRequest};
use tripod_core::fit::{f_of_tau_relation, fit_noise_response, FitModel, Intercept};
use tripod_core::geometric::{adiabatic_holonomy, adiabatic_target, dark_block_fidelity, loop_propagator};
use tripod_core::peak::find_optimal_point;
use tripod_core::report::{format_sig, InterleavedMatrix};
use tripod_core::robustness::robustness;
use tripod_core::{Fit, Optimum, Robustness};

use crate::config::RunConfig;

/// λ² values for sweeps and robustness when none are given.
pub const COUPLING_SWEEP: [f64; 7] = [0.0, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05];

pub const IDEAL_SWEEP_FILE: &str = "ideal_sweep.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const OPTIMAL_FILE: &str = "optimal.json";
pub const FIT_FILE: &str = "fit.json";
pub const ROBUSTNESS_FILE: &str = "robustness.json";

pub fn noisy_sweep_file(lambda_sq: f64) -> String {
    format!("noisy_sweep_lambda_sq_{}.csv", format_sig(lambda_sq, 6))
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json<S: Serialize>(path: &Path, value: &S) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

fn prepare_out(cfg: &RunConfig) -> anyhow::Result<&Path> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating output directory {}", cfg.out.display()))?;
    Ok(&cfg.out)
}

fn lambda_list(cfg: &RunConfig, default: &[f64]) -> anyhow::Result<Vec<f64>> {
    let list = cfg.lambda_sq.clone().unwrap_or_else(|| default.to_vec());
    if list.is_empty() {
        bail!("lambda^2 list is empty");
    }
    let mut seen = BTreeSet::new();
    for l in &list {
        if !seen.insert(format_sig(*l, 6)) {
            bail!("lambda^2 value {l} given twice");
        }
    }
    Ok(list)
}

/// Replaces `gamma0` by a calibrated value when a target `F2` is set.
pub fn apply_calibration(cfg: &mut RunConfig) -> anyhow::Result<Option<Calibration<f64>>> {
    let Some(target) = cfg.calibrate_f2 else {
        return Ok(None);
    };
    let req = CalibrationRequest {
        states: cfg.states,
        steps: cfg.steps,
        window: cfg.window,
        ..CalibrationRequest::new(cfg.loop_family, cfg.omega, target)
    };
    let cal = calibrate_gamma0(&req).context("calibrating gamma0")?;
    cfg.gamma0 = cal.gamma0;
    Ok(Some(cal))
}

fn run_sweep(cfg: &RunConfig, lambda_sq: Vec<f64>) -> anyhow::Result<Vec<tripod_core::Curve>> {
    Ok(sweep(&SweepRequest {
        family: cfg.loop_family,
        omega: cfg.omega,
        omega_tau: cfg.omega_tau_grid()?,
        lambda_sq,
        base_noise: cfg.base_noise()?,
        states: cfg.states,
        steps: cfg.steps,
    })?)
}

pub fn ideal_sweep(cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    if let Some(list) = &cfg.lambda_sq {
        if list.as_slice() != [0.0] {
            bail!("ideal-sweep runs at lambda^2 = 0 only; use noisy-sweep for {list:?}");
        }
    }
    let curves = run_sweep(cfg, vec![0.0])?;
    let out = prepare_out(cfg)?;
    let csv = out.join(IDEAL_SWEEP_FILE);
    write_text(&csv, &curves[0].to_csv())?;
    let resolved = RunConfig {
        lambda_sq: Some(vec![0.0]),
        ..cfg.clone()
    };
    let config = out.join(CONFIG_FILE);
    write_json(&config, &resolved)?;
    Ok(vec![csv, config])
}

pub fn noisy_sweep(cfg: &RunConfig) -> anyhow::Result<Vec<PathBuf>> {
    let lambda_sq = lambda_list(cfg, &COUPLING_SWEEP)?;
    let curves = run_sweep(cfg, lambda_sq.clone())?;
    let out = prepare_out(cfg)?;
    let mut written = Vec::with_capacity(curves.len() + 1);
    for curve in &curves {
        let path = out.join(noisy_sweep_file(curve.lambda_sq));
        write_text(&path, &curve.to_csv())?;
        written.push(path);
    }
    let resolved = RunConfig {
        lambda_sq: Some(lambda_sq),
        ..cfg.clone()
    };
    let config = out.join(CONFIG_FILE);
    write_json(&config, &resolved)?;
    written.push(config);
    Ok(written)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OptimalTable {
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub calibration: Option<Calibration<f64>>,
    pub rows: Vec<Optimum>,
}

fn optimal_points(cfg: &RunConfig, lambda_sq: &[f64]) -> anyhow::Result<Vec<Optimum>> {
    let base = cfg.base_noise()?;
    lambda_sq
        .iter()
        .map(|&l| {
            find_optimal_point(cfg.loop_family, cfg.omega, &base.with_lambda_sq(l), cfg.states, cfg.steps, &cfg.window)
                .with_context(|| format!("optimal point at lambda^2 = {l}"))
        })
        .collect()
}

pub fn optimal(cfg: &RunConfig, calibration: Option<Calibration<f64>>) -> anyhow::Result<OptimalTable> {
    let lambda_sq = lambda_list(cfg, &small_coupling_grid::<f64>())?;
    let rows = optimal_points(cfg, &lambda_sq)?;
    let table = OptimalTable {
        config: RunConfig {
            lambda_sq: Some(lambda_sq),
            ..cfg.clone()
        },
        calibration,
        rows,
    };
    write_json(&prepare_out(cfg)?.join(OPTIMAL_FILE), &table)?;
    Ok(table)
}

/// One row of an optimal-point table; other keys are ignored.
#[derive(Clone, Copy, Debug, Deserialize)]
pub struct TableRow {
    pub lambda_sq: f64,
    pub omega_tau_star: f64,
    pub f_star: f64,
}

#[derive(Debug, Deserialize)]
struct TableFile {
    rows: Vec<TableRow>,
}

pub fn read_table(path: &Path) -> anyhow::Result<Vec<TableRow>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading table {}", path.display()))?;
    let file: TableFile = serde_json::from_str(&text).with_context(|| format!("parsing table {}", path.display()))?;
    Ok(file.rows)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub config: RunConfig,
    pub points: usize,
    pub f_linear: Fit,
    pub tau_linear: Fit,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f_quartic: Option<Fit>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau_cubic: Option<Fit>,
    /// `dF*/dτ*` implied by the two linear fits.
    pub f_of_tau_slope: f64,
}

pub fn fit_rows(cfg: &RunConfig, rows: &[TableRow]) -> anyhow::Result<FitReport> {
    let f_pts: Vec<[f64; 2]> = rows.iter().map(|r| [r.lambda_sq, r.f_star]).collect();
    let t_pts: Vec<[f64; 2]> = rows.iter().map(|r| [r.lambda_sq, r.omega_tau_star]).collect();
    let intercept = |model: FitModel| -> anyhow::Result<Intercept<f64>> {
        Ok(if cfg.free_intercept {
            Intercept::Free
        } else {
            Intercept::Fixed(model.natural_intercept(cfg.loop_family)?)
        })
    };
    let fit = |pts: &[[f64; 2]], model: FitModel| -> anyhow::Result<Fit> {
        fit_noise_response(pts, model, intercept(model)?).with_context(|| format!("{model} fit"))
    };
    let f_linear = fit(&f_pts, FitModel::FLinear)?;
    let tau_linear = fit(&t_pts, FitModel::TauLinear)?;
    let optional = |pts: &[[f64; 2]], model: FitModel| fit_noise_response(pts, model, intercept(model).ok()?).ok();
    let f_of_tau_slope = f_of_tau_relation(&f_linear, &tau_linear)?;
    Ok(FitReport {
        config: cfg.clone(),
        points: rows.len(),
        f_quartic: optional(&f_pts, FitModel::FQuartic),
        tau_cubic: optional(&t_pts, FitModel::TauCubic),
        f_linear,
        tau_linear,
        f_of_tau_slope,
    })
}

pub fn fit(cfg: &RunConfig, calibration: Option<Calibration<f64>>) -> anyhow::Result<FitReport> {
    let (rows, cfg) = match &cfg.table {
        Some(path) => (read_table(path)?, cfg.clone()),
        None => {
            let table = optimal(cfg, calibration)?;
            let rows = table
                .rows
                .iter()
                .map(|p| TableRow {
                    lambda_sq: p.lambda_sq,
                    omega_tau_star: p.omega_tau_star,
                    f_star: p.f_star,
                })
                .collect();
            (rows, table.config)
        }
    };
    let report = fit_rows(&cfg, &rows)?;
    write_json(&prepare_out(&cfg)?.join(FIT_FILE), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub config: RunConfig,
    pub rows: Vec<Robustness>,
}

pub fn robustness_table(cfg: &RunConfig) -> anyhow::Result<RobustnessTable> {
    let lambda_sq = lambda_list(cfg, &COUPLING_SWEEP)?;
    let base = cfg.base_noise()?;
    let rows = lambda_sq
        .iter()
        .map(|&l| {
            robustness(cfg.loop_family, cfg.omega, &base.with_lambda_sq(l), cfg.states, cfg.steps, &cfg.window)
                .with_context(|| format!("robustness at lambda^2 = {l}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table = RobustnessTable {
        config: RunConfig {
            lambda_sq: Some(lambda_sq),
            ..cfg.clone()
        },
        rows,
    };
    write_json(&prepare_out(cfg)?.join(ROBUSTNESS_FILE), &table)?;
    Ok(table)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub config: RunConfig,
    pub solid_angle: f64,
    /// Dark-block holonomy, 2x2 interleaved.
    pub holonomy: InterleavedMatrix,
    pub omega_tau: f64,
    /// Full 4x4 propagator over one traversal.
    pub propagator: InterleavedMatrix,
    /// Its dark block in the start frame.
    pub dark_block: InterleavedMatrix,
    /// Fidelity of the dark block against the adiabatic target.
    pub gate_fidelity: f64,
}

pub fn holonomy(cfg: &RunConfig) -> anyhow::Result<HolonomyReport> {
    let omega_tau = match cfg.tau {
        Some(t) => t,
        None => cfg.loop_family.revival_time(1, 1.0)?,
    };
    let spec = cfg.loop_family.build(cfg.omega, omega_tau / cfg.omega)?;
    let hol = adiabatic_holonomy(&spec)?;
    let exact = loop_propagator(&spec)?;
    let target = adiabatic_target(&spec)?;
    let block = exact.dark_block();
    Ok(HolonomyReport {
        config: RunConfig {
            tau: Some(omega_tau),
            ..cfg.clone()
        },
        solid_angle: spec.solid_angle()?,
        holonomy: InterleavedMatrix::from_matrix(&hol),
        omega_tau,
        propagator: InterleavedMatrix::from_matrix(&exact.matrix),
        dark_block: InterleavedMatrix::from_matrix(&block),
        gate_fidelity: dark_block_fidelity(&target.dark_block(), &block),
    })
}
