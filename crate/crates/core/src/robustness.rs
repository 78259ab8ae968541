//! Relative advantage of the optimal point over near-adiabatic operation.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fidelity::{bloch_states, mean_fidelity_over};
use crate::open_system::NoiseModel;
use crate::path::LoopFamily;
use crate::peak::{find_optimal_point, PeakWindow};
use crate::scalar::Real;

/// Revival index standing in for the adiabatic limit.
pub const ADIABATIC_REVIVAL: u32 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RobustnessPoint<T> {
    pub lambda_sq: T,
    pub omega_tau_star: T,
    pub f_star: T,
    /// `Ωτ` at which the adiabatic reference is taken.
    pub omega_tau_adiab: T,
    pub f_adiab: T,
    pub robustness: T,
}

/// `R = (F* − F_adiab) / F*` with `F_adiab` the mean fidelity at the third
/// revival of the family.
pub fn robustness<T: Real>(
    family: LoopFamily,
    omega: T,
    noise: &NoiseModel<T>,
    states: usize,
    steps: usize,
    window: &PeakWindow<T>,
) -> Result<RobustnessPoint<T>> {
    let opt = find_optimal_point(family, omega, noise, states, steps, window)?;
    let tau3 = family.revival_time(ADIABATIC_REVIVAL, omega)?;
    let spec = family.build(omega, tau3)?;
    let f_adiab = mean_fidelity_over(&spec, noise, &bloch_states(states)?, steps)?;
    Ok(RobustnessPoint {
        lambda_sq: noise.lambda_sq,
        omega_tau_star: opt.omega_tau_star,
        f_star: opt.f_star,
        omega_tau_adiab: tau3 * omega,
        f_adiab,
        robustness: (opt.f_star - f_adiab) / opt.f_star,
    })
}
