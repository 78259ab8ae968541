//! Mean gate fidelity over dark-subspace inputs and (Ωτ, λ²) sweeps.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric::{adiabatic_target, loop_propagator, TransportPicture};
use crate::linalg::{inner, ComplexVector};
use crate::open_system::{evolve_operators, NoiseModel};
use crate::path::{LoopFamily, LoopSpec};
use crate::report::format_sig;
use crate::scalar::Real;
use crate::tripod::{eigenframe, Matrix4, SphericalPoint};

/// Smallest admissible sample size.
pub const MIN_STATES: usize = 6;
pub const DEFAULT_STATES: usize = 100;

/// A pure input `cos(ϑ/2)|D0⟩ + e^{iφ} sin(ϑ/2)|D1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochState<T> {
    pub polar: T,
    pub azimuth: T,
    /// Amplitudes on `(D0, D1)`.
    pub amplitudes: [Complex<T>; 2],
    /// The state in the lab basis, built from the frame at the reference point.
    pub state: ComplexVector<T, 4>,
}

impl<T: Real> BlochState<T> {
    pub fn bloch_vector(&self) -> [T; 3] {
        let (st, ct) = self.polar.sin_cos();
        let (sp, cp) = self.azimuth.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Lab-basis embedding with respect to the dark pair at `point`.
    pub fn embed(&self, point: &SphericalPoint<T>) -> ComplexVector<T, 4> {
        let [d0, d1] = eigenframe(point).dark();
        let [a, b] = self.amplitudes;
        std::array::from_fn(|i| a * d0[i] + b * d1[i])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputStateSet<T> {
    reference: SphericalPoint<T>,
    states: Vec<BlochState<T>>,
}

impl<T: Real> InputStateSet<T> {
    pub fn count(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BlochState<T>] {
        &self.states
    }

    pub fn reference(&self) -> &SphericalPoint<T> {
        &self.reference
    }

    /// Arithmetic mean of the Bloch vectors.
    pub fn mean_bloch_vector(&self) -> [T; 3] {
        let n = T::lit(self.states.len() as f64);
        let mut acc = [T::zero(); 3];
        for s in &self.states {
            for (a, v) in acc.iter_mut().zip(s.bloch_vector()) {
                *a = *a + v;
            }
        }
        acc.map(|a| a / n)
    }
}

/// Golden-spiral lattice on the Bloch sphere of the dark pair at the north
/// pole of the parameter sphere (`θ = 0, φ = 0`, `Ω = 1`).
pub fn bloch_states<T: Real>(n: usize) -> Result<InputStateSet<T>> {
    let pole = SphericalPoint::new(T::zero(), T::zero(), T::one())?;
    bloch_states_at(&pole, n)
}

/// Golden-spiral lattice built on the dark pair at `reference`.
pub fn bloch_states_at<T: Real>(reference: &SphericalPoint<T>, n: usize) -> Result<InputStateSet<T>> {
    if n < MIN_STATES {
        return Err(Error::TooFewStates { min: MIN_STATES, got: n });
    }
    reference.validate()?;
    let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
    let two_pi = T::PI() + T::PI();
    let nf = T::lit(n as f64);
    let half = T::lit(0.5);
    let mut states = Vec::with_capacity(n);
    for i in 0..n {
        let z = T::one() - T::lit((2 * i + 1) as f64) / nf;
        let polar = z.max(-T::one()).min(T::one()).acos();
        let azimuth = (golden * T::lit(i as f64)) % two_pi;
        let amplitudes = [
            Complex::new((polar * half).cos(), T::zero()),
            Complex::from_polar((polar * half).sin(), azimuth),
        ];
        let mut s = BlochState {
            polar,
            azimuth,
            amplitudes,
            state: [Complex::new(T::zero(), T::zero()); 4],
        };
        s.state = s.embed(reference);
        states.push(s);
    }
    Ok(InputStateSet {
        reference: *reference,
        states,
    })
}

/// Fidelity of each input, `Tr{σ_ad σ}` with `σ_ad = U_ad σ₀ U_ad†`.
///
/// The inputs are re-embedded on the dark pair at the loop start. For a
/// silent noise model the exact propagator is used; otherwise the four
/// dark-pair outer products are evolved once and recombined per state.
pub fn per_state_fidelities<T: Real>(
    spec: &LoopSpec<T>,
    noise: &NoiseModel<T>,
    inputs: &InputStateSet<T>,
    steps: usize,
) -> Result<Vec<T>> {
    noise.validate()?;
    let start = spec.start_point();
    let target = adiabatic_target(spec)?.matrix;
    let [d0, d1] = eigenframe(&start).dark();

    if noise.is_silent() {
        let u = loop_propagator(spec)?.matrix;
        return Ok(inputs
            .states()
            .iter()
            .map(|s| {
                let psi = s.embed(&start);
                inner(&target.mul_vec(&psi), &u.mul_vec(&psi)).norm_sqr()
            })
            .collect());
    }

    let dark = [d0, d1];
    let basis: Vec<Matrix4<T>> = (0..4)
        .map(|jk| Matrix4::outer(&dark[jk / 2], &dark[jk % 2]))
        .collect();
    let picture = TransportPicture::new(spec)?;
    let out = evolve_operators(&picture, noise, &basis, steps)?;

    Ok(inputs
        .states()
        .iter()
        .map(|s| {
            let psi = s.embed(&start);
            let t = target.mul_vec(&psi);
            let c = s.amplitudes;
            let mut f = Complex::new(T::zero(), T::zero());
            for (jk, o) in out.iter().enumerate() {
                f = f + c[jk / 2] * c[jk % 2].conj() * o.sandwich(&t, &t);
            }
            f.re
        })
        .collect())
}

/// Mean fidelity over a prepared input set; the sum runs in input order.
pub fn mean_fidelity_over<T: Real>(
    spec: &LoopSpec<T>,
    noise: &NoiseModel<T>,
    inputs: &InputStateSet<T>,
    steps: usize,
) -> Result<T> {
    let f = per_state_fidelities(spec, noise, inputs, steps)?;
    let n = T::lit(f.len() as f64);
    Ok(f.into_iter().fold(T::zero(), |a, x| a + x) / n)
}

/// Mean fidelity over an `n`-point golden-spiral sample.
pub fn mean_fidelity<T: Real>(spec: &LoopSpec<T>, noise: &NoiseModel<T>, n: usize, steps: usize) -> Result<T> {
    let inputs = bloch_states(n)?;
    mean_fidelity_over(spec, noise, &inputs, steps)
}

/// `points` evenly spaced values from `start` to `stop` inclusive. A single
/// point yields `[start]`.
pub fn uniform_grid<T: Real>(start: T, stop: T, points: usize) -> Result<Vec<T>> {
    if points == 0 {
        return Err(Error::InvalidGrid("grid has no points".into()));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::InvalidGrid("grid bounds must be finite".into()));
    }
    if points == 1 {
        return Ok(vec![start]);
    }
    if !(stop > start) {
        return Err(Error::InvalidGrid(format!("stop {stop} must exceed start {start}")));
    }
    let span = stop - start;
    let last = T::lit((points - 1) as f64);
    Ok((0..points)
        .map(|i| if i + 1 == points { stop } else { start + span * T::lit(i as f64) / last })
        .collect())
}

fn check_grid<T: Real>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid("grid has no points".into()));
    }
    if let Some(x) = grid.iter().find(|x| !(x.is_finite() && **x > T::zero())) {
        return Err(Error::InvalidGrid(format!("grid value {x} must be positive")));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSample<T> {
    pub omega_tau: T,
    pub mean_fidelity: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub states: usize,
    pub steps: usize,
    pub noise_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve<T> {
    pub lambda_sq: T,
    pub samples: Vec<SweepSample<T>>,
    pub metadata: SweepMetadata,
}

impl<T: Real> SweepCurve<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("omega_tau,mean_fidelity\n");
        for s in &self.samples {
            out.push_str(&format_sig(s.omega_tau.as_f64(), 12));
            out.push(',');
            out.push_str(&format_sig(s.mean_fidelity.as_f64(), 12));
            out.push('\n');
        }
        out
    }

    /// Largest sample, first one on ties.
    pub fn max_sample(&self) -> Option<SweepSample<T>> {
        self.samples
            .iter()
            .copied()
            .fold(None, |best: Option<SweepSample<T>>, s| match best {
                Some(b) if b.mean_fidelity >= s.mean_fidelity => Some(b),
                _ => Some(s),
            })
    }
}

/// One sweep job: a loop family, an Ωτ grid and the λ² values at which the
/// base noise model is evaluated.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRequest<T> {
    pub family: LoopFamily,
    pub omega: T,
    pub omega_tau: Vec<T>,
    pub lambda_sq: Vec<T>,
    pub base_noise: NoiseModel<T>,
    pub states: usize,
    pub steps: usize,
}

/// One curve per λ², in the order given. Grid points are evaluated in
/// parallel; results do not depend on the worker count.
pub fn sweep<T: Real>(req: &SweepRequest<T>) -> Result<Vec<SweepCurve<T>>> {
    if req.lambda_sq.is_empty() {
        return Ok(Vec::new());
    }
    check_grid(&req.omega_tau)?;
    if !(req.omega.is_finite() && req.omega > T::zero()) {
        return Err(Error::InvalidPoint(format!("Rabi scale {} must be positive", req.omega)));
    }
    let noises: Vec<NoiseModel<T>> = req.lambda_sq.iter().map(|&l| req.base_noise.with_lambda_sq(l)).collect();
    for n in &noises {
        n.validate()?;
    }
    let inputs = bloch_states(req.states)?;
    let cols = req.omega_tau.len();
    let values: Vec<T> = (0..noises.len() * cols)
        .into_par_iter()
        .map(|k| {
            let tau = req.omega_tau[k % cols] / req.omega;
            let spec = req.family.build(req.omega, tau)?;
            mean_fidelity_over(&spec, &noises[k / cols], &inputs, req.steps)
        })
        .collect::<Result<_>>()?;

    Ok(noises
        .iter()
        .enumerate()
        .map(|(row, noise)| SweepCurve {
            lambda_sq: noise.lambda_sq,
            samples: req
                .omega_tau
                .iter()
                .zip(&values[row * cols..(row + 1) * cols])
                .map(|(&omega_tau, &mean_fidelity)| SweepSample { omega_tau, mean_fidelity })
                .collect(),
            metadata: SweepMetadata {
                states: req.states,
                steps: req.steps,
                noise_label: noise.label.clone(),
            },
        })
        .collect())
}
