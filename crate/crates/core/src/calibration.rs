//! Choice of the flat high-temperature rate `γ₀` from a target `F2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{fit_noise_response, FitModel, FitResult, Intercept};
use crate::open_system::NoiseModel;
use crate::path::LoopFamily;
use crate::peak::{find_optimal_point, OptimalPoint, PeakWindow};
use crate::scalar::Real;

/// Reference value of the small-coupling fidelity slope.
pub const REFERENCE_F2: f64 = 6.34;

/// `γ₀` (units of `Ω`) for which the standard loop has `F2 = 6.34` over
/// `λ² ∈ [1e-4, 1e-3]`, found with [`calibrate_gamma0`] at the default
/// sample size and step count.
pub const DEFAULT_GAMMA0: f64 = 1.007_282_255_400_95;

/// Integrator steps per loop.
pub const DEFAULT_STEPS: usize = 1000;

/// Flat-rate model at the default `γ₀`.
pub fn default_noise<T: Real>(lambda_sq: T) -> NoiseModel<T> {
    NoiseModel::high_temperature(lambda_sq, T::lit(DEFAULT_GAMMA0))
}

/// `λ² = 1e-4, 2e-4, …, 1e-3`.
pub fn small_coupling_grid<T: Real>() -> Vec<T> {
    (1..=10).map(|i| T::lit(f64::from(i) * 1e-4)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationRequest<T> {
    pub family: LoopFamily,
    pub omega: T,
    pub target_f2: T,
    pub lambda_sq: Vec<T>,
    pub states: usize,
    pub steps: usize,
    pub window: PeakWindow<T>,
    /// Relative tolerance on the fitted `F2`.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> CalibrationRequest<T> {
    pub fn new(family: LoopFamily, omega: T, target_f2: T) -> Self {
        Self {
            family,
            omega,
            target_f2,
            lambda_sq: small_coupling_grid(),
            states: crate::fidelity::DEFAULT_STATES,
            steps: DEFAULT_STEPS,
            window: PeakWindow::default(),
            tolerance: T::lit(1e-6),
            max_iterations: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Calibration<T> {
    pub gamma0: T,
    pub target_f2: T,
    pub fitted_f2: T,
    pub iterations: usize,
    pub fit: FitResult<T>,
    pub points: Vec<OptimalPoint<T>>,
}

/// Optimal points over the request's λ² grid at a given `γ₀`, and the
/// fixed-intercept linear fit of `F*`.
pub fn measure_f2<T: Real>(req: &CalibrationRequest<T>, gamma0: T) -> Result<(FitResult<T>, Vec<OptimalPoint<T>>)> {
    let points = req
        .lambda_sq
        .iter()
        .map(|&l| {
            find_optimal_point(
                req.family,
                req.omega,
                &NoiseModel::high_temperature(l, gamma0),
                req.states,
                req.steps,
                &req.window,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let data: Vec<[T; 2]> = points.iter().map(|p| [p.lambda_sq, p.f_star]).collect();
    let fit = fit_noise_response(&data, FitModel::FLinear, Intercept::Fixed(T::one()))?;
    Ok((fit, points))
}

/// Rescales `γ₀` until the fitted `F2` meets the target. `F*` depends on
/// `λ²γ₀` only, so `F2` is nearly proportional to `γ₀` and the fixed-point
/// update `γ₀ ← γ₀·target/F2` converges in a few rounds.
pub fn calibrate_gamma0<T: Real>(req: &CalibrationRequest<T>) -> Result<Calibration<T>> {
    if !(req.target_f2.is_finite() && req.target_f2 > T::zero()) {
        return Err(Error::InvalidNoise(format!("target F2 {} must be positive", req.target_f2)));
    }
    let mut gamma0 = T::lit(DEFAULT_GAMMA0);
    for iteration in 1..=req.max_iterations.max(1) {
        let (fit, points) = measure_f2(req, gamma0)?;
        let f2 = fit.coefficients[0].value;
        if !(f2 > T::zero()) {
            return Err(Error::InvalidNoise(format!("fitted F2 {f2} is not positive at gamma0 {gamma0}")));
        }
        let ratio = req.target_f2 / f2;
        if (ratio - T::one()).abs() <= req.tolerance || iteration == req.max_iterations.max(1) {
            return Ok(Calibration {
                gamma0,
                target_f2: req.target_f2,
                fitted_f2: f2,
                iterations: iteration,
                fit,
                points,
            });
        }
        gamma0 = gamma0 * ratio;
    }
    unreachable!("loop returns on its last iteration")
}
