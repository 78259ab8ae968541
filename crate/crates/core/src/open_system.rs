//! Lindblad evolution along a loop, with the bath coupled to the `|0⟩↔|e⟩`
//! transition.
//!
//! The coupling `A = |0⟩⟨e| + |e⟩⟨0|` is split into eigenoperators of the
//! instantaneous Hamiltonian, `A_ω = Σ_{ε'−ε=ω} P_ε A P_ε'`, with Bohr
//! frequencies `ω ∈ {0, ±Ω, ±2Ω}`. Each channel gets a rate `γ(ω)` and a
//! Lamb shift `s(ω)` from the [`NoiseModel`].
//!
//! Integration runs in the transport picture of
//! [`TransportPicture`](crate::geometric::TransportPicture):
//! `σ̇_R = −i[H(0) + D(t,0), σ_R] + λ² Γ_R(t) σ_R`, where the coherent
//! generator is constant on every arc. The coherent part is propagated
//! exactly and the dissipator with classical fourth-order Runge–Kutta in
//! the corresponding interaction frame (Lawson RK4), on a fixed grid.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometric::{arc_steps, TransportPicture};
use crate::linalg::herm_eig;
use crate::path::LoopSpec;
use crate::scalar::Real;
use crate::tolerance;
use crate::tripod::{eigenframe, Level, Matrix4, SphericalPoint};

/// Bohr-frequency harmonics, in units of `Ω`.
pub const HARMONICS: [i32; 5] = [-2, -1, 0, 1, 2];

/// Bath parameters. Rate tables are keyed by the Bohr frequency in units of
/// `Ω`; missing keys mean zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct NoiseModel<T> {
    pub lambda_sq: T,
    pub gamma: BTreeMap<i32, T>,
    #[serde(default)]
    pub lamb_shift: BTreeMap<i32, T>,
    #[serde(default)]
    pub label: String,
}

impl<T: Real> NoiseModel<T> {
    /// Flat rate `γ₀` on every channel, no Lamb shift.
    pub fn high_temperature(lambda_sq: T, gamma0: T) -> Self {
        Self {
            lambda_sq,
            gamma: HARMONICS.iter().map(|&m| (m, gamma0)).collect(),
            lamb_shift: BTreeMap::new(),
            label: format!("high-T gamma0={gamma0}"),
        }
    }

    pub fn noiseless() -> Self {
        Self {
            lambda_sq: T::zero(),
            gamma: BTreeMap::new(),
            lamb_shift: BTreeMap::new(),
            label: "noiseless".into(),
        }
    }

    pub fn with_lambda_sq(&self, lambda_sq: T) -> Self {
        Self {
            lambda_sq,
            ..self.clone()
        }
    }

    pub fn gamma_at(&self, harmonic: i32) -> T {
        self.gamma.get(&harmonic).copied().unwrap_or_else(T::zero)
    }

    pub fn shift_at(&self, harmonic: i32) -> T {
        self.lamb_shift.get(&harmonic).copied().unwrap_or_else(T::zero)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_sq.is_finite() && self.lambda_sq >= T::zero()) {
            return Err(Error::InvalidNoise(format!("lambda_sq {} must be >= 0", self.lambda_sq)));
        }
        for (m, g) in &self.gamma {
            if !HARMONICS.contains(m) {
                return Err(Error::InvalidNoise(format!("no transition at {m}·Ω")));
            }
            if !(g.is_finite() && *g >= T::zero()) {
                return Err(Error::InvalidNoise(format!("rate {g} at {m}·Ω must be >= 0")));
            }
        }
        for (m, s) in &self.lamb_shift {
            if !HARMONICS.contains(m) {
                return Err(Error::InvalidNoise(format!("no transition at {m}·Ω")));
            }
            if !s.is_finite() {
                return Err(Error::InvalidNoise(format!("non-finite Lamb shift at {m}·Ω")));
            }
        }
        Ok(())
    }

    /// True when the dissipator vanishes identically.
    pub fn is_silent(&self) -> bool {
        self.lambda_sq.is_zero()
            || (self.gamma.values().all(|g| g.is_zero()) && self.lamb_shift.values().all(|s| s.is_zero()))
    }
}

/// Validated density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: Matrix4<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: Matrix4<T>) -> Result<Self> {
        let tol = T::tol(tolerance::DENSITY);
        if !matrix.is_finite() {
            return Err(Error::InvalidDensity("non-finite entries".into()));
        }
        if !matrix.is_hermitian(tol) {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (residual {})",
                matrix.hermiticity_residual()
            )));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidDensity(format!("trace {tr} is not 1")));
        }
        Ok(Self { matrix })
    }

    pub fn pure(state: &[Complex<T>; 4]) -> Result<Self> {
        Self::new(Matrix4::outer(state, state))
    }

    pub fn matrix(&self) -> &Matrix4<T> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> T {
        herm_eig(&self.matrix)
            .map(|e| e.eigenvalues[0])
            .unwrap_or_else(|_| T::neg_infinity())
    }

    /// Flags (without clamping) eigenvalues below the positivity floor.
    pub fn violates_positivity(&self) -> bool {
        self.min_eigenvalue() < T::lit(tolerance::POSITIVITY_FLOOR)
    }

    /// `⟨ψ|σ|ψ⟩`.
    pub fn expectation(&self, psi: &[Complex<T>; 4]) -> T {
        self.matrix.sandwich(psi, psi).re
    }
}

/// One eigenoperator `A_ω` with `ω = harmonic·Ω`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpOperator<T> {
    pub harmonic: i32,
    pub operator: Matrix4<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct JumpOperatorSet<T> {
    pub omega: T,
    pub operators: Vec<JumpOperator<T>>,
}

impl<T: Real> JumpOperatorSet<T> {
    pub fn frequency(&self, op: &JumpOperator<T>) -> T {
        self.omega * T::lit(f64::from(op.harmonic))
    }

    pub fn sum(&self) -> Matrix4<T> {
        self.operators
            .iter()
            .fold(Matrix4::zeros(), |acc, o| acc + o.operator)
    }

    pub fn get(&self, harmonic: i32) -> Option<&Matrix4<T>> {
        self.operators
            .iter()
            .find(|o| o.harmonic == harmonic)
            .map(|o| &o.operator)
    }

    /// Every operator conjugated as `U† A U`.
    pub fn conjugated(&self, u: &Matrix4<T>) -> Self {
        let ud = u.adjoint();
        Self {
            omega: self.omega,
            operators: self
                .operators
                .iter()
                .map(|o| JumpOperator {
                    harmonic: o.harmonic,
                    operator: ud * o.operator * *u,
                })
                .collect(),
        }
    }
}

/// `|0⟩⟨e| + |e⟩⟨0|`.
pub fn bath_coupling<T: Real>() -> Matrix4<T> {
    let zero = Level::Zero.ket();
    let e = Level::Excited.ket();
    Matrix4::outer(&zero, &e) + Matrix4::outer(&e, &zero)
}

/// Eigenoperator decomposition of the bath coupling at `p`.
pub fn jump_operators<T: Real>(p: &SphericalPoint<T>) -> JumpOperatorSet<T> {
    let frame = eigenframe(p);
    let projectors = frame.projectors();
    // Energies of the projectors in units of Ω.
    let levels = [0i32, 1, -1];
    let a = bath_coupling::<T>();
    let mut ops: Vec<JumpOperator<T>> = HARMONICS
        .iter()
        .map(|&harmonic| JumpOperator {
            harmonic,
            operator: Matrix4::zeros(),
        })
        .collect();
    for (i, pe) in projectors.iter().enumerate() {
        let left = *pe * a;
        for (j, pf) in projectors.iter().enumerate() {
            let m = levels[j] - levels[i];
            let slot = (m + 2) as usize;
            ops[slot].operator += left * *pf;
        }
    }
    JumpOperatorSet {
        omega: p.omega,
        operators: ops,
    }
}

/// `Γσ = Σ_ω γ(ω)[A_ω σ A_ω† − ½{A_ω†A_ω, σ}] − i[Σ_ω s(ω) A_ω†A_ω, σ]`.
///
/// Linear in `σ`; accepts any operator, not only density matrices.
pub fn dissipator<T: Real>(ops: &JumpOperatorSet<T>, noise: &NoiseModel<T>, sigma: &Matrix4<T>) -> Matrix4<T> {
    let half = T::lit(0.5);
    let mut out = Matrix4::zeros();
    let mut lamb = Matrix4::zeros();
    for op in &ops.operators {
        let a = op.operator;
        let ad = a.adjoint();
        let ada = ad * a;
        let g = noise.gamma_at(op.harmonic);
        if !g.is_zero() {
            out += (a * *sigma * ad - ada.anticommutator(sigma).scale_real(half)).scale_real(g);
        }
        let s = noise.shift_at(op.harmonic);
        if !s.is_zero() {
            lamb += ada.scale_real(s);
        }
    }
    if lamb.frobenius_norm() > T::zero() {
        out -= lamb.commutator(sigma).scale(Complex::new(T::zero(), T::one()));
    }
    out
}

/// Dissipator acting on a density matrix.
pub fn dissipator_apply<T: Real>(
    ops: &JumpOperatorSet<T>,
    noise: &NoiseModel<T>,
    sigma: &DensityMatrix<T>,
) -> Matrix4<T> {
    dissipator(ops, noise, sigma.matrix())
}

/// Precomputed per-arc channels for one integration grid.
struct StepChannels<T> {
    /// Transport-picture jump operators and `A†A`, by harmonic.
    ops: Vec<(T, T, Matrix4<T>, Matrix4<T>, Matrix4<T>)>,
}

impl<T: Real> StepChannels<T> {
    fn at(picture: &TransportPicture<T>, noise: &NoiseModel<T>, arc: usize, s: T) -> Result<Self> {
        let (p, _) = picture.loop_spec().arc_point(arc, s)?;
        let r = picture.transport(arc, s)?;
        let set = jump_operators(&p).conjugated(&r);
        let ops = set
            .operators
            .iter()
            .filter_map(|o| {
                let g = noise.gamma_at(o.harmonic);
                let sh = noise.shift_at(o.harmonic);
                if g.is_zero() && sh.is_zero() {
                    return None;
                }
                let ad = o.operator.adjoint();
                Some((g, sh, o.operator, ad, ad * o.operator))
            })
            .collect();
        Ok(Self { ops })
    }

    /// `λ² Γ_R(t) x`.
    fn apply(&self, lambda_sq: T, x: &Matrix4<T>) -> Matrix4<T> {
        let half = T::lit(0.5);
        let mut out = Matrix4::zeros();
        let mut lamb = Matrix4::zeros();
        for (g, sh, a, ad, ada) in &self.ops {
            if !g.is_zero() {
                out += (*a * *x * *ad - ada.anticommutator(x).scale_real(half)).scale_real(*g);
            }
            if !sh.is_zero() {
                lamb += ada.scale_real(*sh);
            }
        }
        if !self.ops.iter().all(|o| o.1.is_zero()) {
            out -= lamb.commutator(x).scale(Complex::new(T::zero(), T::one()));
        }
        out.scale_real(lambda_sq)
    }
}

/// Evolves a batch of lab-frame operators around the loop (the map is
/// linear, so inputs need not be density matrices). Returns lab-frame
/// operators at `t = τ`.
pub fn evolve_operators<T: Real>(
    picture: &TransportPicture<T>,
    noise: &NoiseModel<T>,
    inputs: &[Matrix4<T>],
    steps: usize,
) -> Result<Vec<Matrix4<T>>> {
    noise.validate()?;
    if steps == 0 {
        return Err(Error::StepCountTooSmall {
            steps,
            drift: f64::INFINITY,
        });
    }
    let spec = picture.loop_spec();
    let total = spec.total_time();
    // R(0, 0) = 1, so the picture starts out equal to the lab frame.
    let mut ys: Vec<Matrix4<T>> = inputs.to_vec();
    let silent = noise.is_silent();

    for (i, arc) in picture.arcs().iter().enumerate() {
        if silent {
            let u = picture.arc_evolution(i, arc.duration);
            for y in ys.iter_mut() {
                *y = y.conjugate_by(&u);
            }
            continue;
        }
        let n = arc_steps(arc.duration, total, steps);
        let h = arc.duration / T::lit(n as f64);
        let half_h = h * T::lit(0.5);
        let u_half = picture.arc_evolution(i, half_h);
        let u_full = picture.arc_evolution(i, h);
        let lsq = noise.lambda_sq;
        let sixth = h / T::lit(6.0);

        let mut c_start = StepChannels::at(picture, noise, i, T::zero())?;
        for k in 0..n {
            let s0 = h * T::lit(k as f64);
            let c_mid = StepChannels::at(picture, noise, i, s0 + half_h)?;
            let c_end = StepChannels::at(picture, noise, i, s0 + h)?;
            for y in ys.iter_mut() {
                let k1 = c_start.apply(lsq, y);
                let y_half = y.conjugate_by(&u_half);
                let k1_half = k1.conjugate_by(&u_half);
                let k2 = c_mid.apply(lsq, &(y_half + k1_half.scale_real(half_h)));
                let k3 = c_mid.apply(lsq, &(y_half + k2.scale_real(half_h)));
                let y_full = y.conjugate_by(&u_full);
                let k4 = c_end.apply(lsq, &(y_full + k3.conjugate_by(&u_half).scale_real(h)));
                let incr = k1.conjugate_by(&u_full)
                    + (k2 + k3).conjugate_by(&u_half).scale_real(T::lit(2.0))
                    + k4;
                *y = y_full + incr.scale_real(sixth);
            }
            c_start = c_end;
        }
    }

    let r_end = picture.closing_transport();
    let outputs: Vec<Matrix4<T>> = ys.iter().map(|y| y.conjugate_by(&r_end)).collect();

    // Rounding alone drifts by about steps·ε, which matters only for f32.
    let limit = T::lit(tolerance::TRACE_DRIFT).max(T::epsilon() * T::lit(16.0 * steps as f64));
    let mut worst = T::zero();
    for (a, b) in inputs.iter().zip(outputs.iter()) {
        worst = worst.max((a.trace() - b.trace()).norm());
    }
    if !(worst <= limit) {
        return Err(Error::StepCountTooSmall {
            steps,
            drift: worst.as_f64(),
        });
    }
    Ok(outputs)
}

/// Density matrix at loop closure, in the lab frame.
pub fn evolve_density<T: Real>(
    spec: &LoopSpec<T>,
    noise: &NoiseModel<T>,
    sigma0: &DensityMatrix<T>,
    steps: usize,
) -> Result<DensityMatrix<T>> {
    let picture = TransportPicture::new(spec)?;
    let out = evolve_operators(&picture, noise, &[*sigma0.matrix()], steps)?;
    // Validation tolerance is looser than the input check: rounding
    // accumulates over the step grid.
    let m = out[0];
    let tol = T::tol(1e-8);
    if !m.is_hermitian(tol) || (m.trace().re - T::one()).abs() > tol {
        return Err(Error::StepCountTooSmall {
            steps,
            drift: (m.trace().re - T::one()).abs().as_f64(),
        });
    }
    let half = T::lit(0.5);
    Ok(DensityMatrix {
        matrix: (m + m.adjoint()).scale_real(half),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometric::loop_propagator;
    use crate::linalg::frobenius_distance;
    use crate::path::{optimal_time, standard_not_loop, wedge_loop};
    use crate::tripod::FrameState;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    type M4 = Matrix4<f64>;

    fn pt(theta: f64, phi: f64) -> SphericalPoint<f64> {
        SphericalPoint::new(theta, phi, 1.0).unwrap()
    }

    fn random_density(entries: &[f64]) -> DensityMatrix<f64> {
        // σ = B B† / Tr(B B†) with B from the entries.
        let b = M4::from_fn(|i, j| Complex::new(entries[4 * i + j], entries[16 + 4 * i + j]));
        let bb = b * b.adjoint();
        let tr = bb.trace().re;
        DensityMatrix::new(bb.scale_real(1.0 / tr)).unwrap()
    }

    #[test]
    fn decomposition_is_complete_at_pole() {
        let set = jump_operators(&pt(0.0, 0.0));
        assert!(frobenius_distance(&set.sum(), &bath_coupling()) < 1e-14);
    }

    #[test]
    fn pole_channels_from_projector_algebra() {
        // At the pole D0 = |0⟩, D1 = |1⟩, D± = (|a⟩ ± |e⟩)/√2. The coupling
        // takes |0⟩ into |e⟩ = (D+ − D−)/√2 and back, so only the ±Ω
        // channels survive: A_{+Ω} = P0 A P+ + P− A P0, and no dark-dark or
        // bright-bright element appears.
        let set = jump_operators(&pt(0.0, 0.0));
        let f = eigenframe(&pt(0.0, 0.0));
        let d0 = f.state(FrameState::Dark0);
        let bp = f.state(FrameState::BrightPlus);
        let bm = f.state(FrameState::BrightMinus);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect_plus = M4::outer(&d0, &bp).scale_real(r) + M4::outer(&bm, &d0).scale_real(-r);
        assert!(frobenius_distance(set.get(1).unwrap(), &expect_plus) < 1e-15);
        assert!(set.get(0).unwrap().frobenius_norm() < 1e-15);
        assert!(set.get(2).unwrap().frobenius_norm() < 1e-15);
        assert!(set.get(-2).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn silent_noise_gives_zero_dissipator() {
        let set = jump_operators(&pt(0.3, 0.9));
        let sigma = DensityMatrix::pure(&Level::Zero.ket()).unwrap();
        let noise = NoiseModel::high_temperature(0.01, 0.0);
        assert_eq!(dissipator_apply(&set, &noise, &sigma), M4::zeros());
    }

    #[test]
    fn maximally_mixed_input_at_pole() {
        // For σ = 1/4 the dissipator is Σ γ(ω)/4 · [A_ω, A_ω†]. At the pole
        // [A_{±Ω}, A_{±Ω}†] = ±(|D−⟩⟨D−| − |D+⟩⟨D+|)/2 and the rest vanish,
        // so flat rates give zero and unequal rates (γ₊, γ₋) give
        // (γ₊ − γ₋)/8 · (|D−⟩⟨D−| − |D+⟩⟨D+|).
        let p = pt(0.0, 0.0);
        let set = jump_operators(&p);
        let sigma = DensityMatrix::new(M4::identity().scale_real(0.25)).unwrap();
        let flat = dissipator_apply(&set, &NoiseModel::high_temperature(1.0, 0.7), &sigma);
        assert!(flat.frobenius_norm() < 1e-15);

        let mut noise = NoiseModel::<f64>::noiseless();
        noise.lambda_sq = 1.0;
        noise.gamma.insert(1, 0.7);
        noise.gamma.insert(-1, 0.2);
        let got = dissipator_apply(&set, &noise, &sigma);
        let f = eigenframe(&p);
        let bp = f.state(FrameState::BrightPlus);
        let bm = f.state(FrameState::BrightMinus);
        let expect = (M4::outer(&bm, &bm) - M4::outer(&bp, &bp)).scale_real((0.7 - 0.2) / 8.0);
        assert!(frobenius_distance(&got, &expect) < 1e-15);
    }

    #[test]
    fn lamb_shift_is_a_commutator() {
        let p = pt(1.0, 0.4);
        let set = jump_operators(&p);
        let mut noise = NoiseModel::<f64>::noiseless();
        noise.lambda_sq = 1.0;
        noise.lamb_shift.insert(1, 0.5);
        let sigma = DensityMatrix::pure(&Level::One.ket()).unwrap();
        let out = dissipator_apply(&set, &noise, &sigma);
        let a = set.get(1).unwrap();
        let hls = (a.adjoint() * *a).scale_real(0.5);
        let expect = hls.commutator(sigma.matrix()).scale(Complex::new(0.0, -1.0));
        assert!(frobenius_distance(&out, &expect) < 1e-15);
    }

    #[test]
    fn noise_validation() {
        assert!(NoiseModel::high_temperature(-0.1, 1.0).validate().is_err());
        assert!(NoiseModel::high_temperature(0.1, -1.0).validate().is_err());
        let mut n = NoiseModel::high_temperature(0.1, 1.0);
        n.gamma.insert(3, 1.0);
        assert!(n.validate().is_err());
        assert!(NoiseModel::high_temperature(0.1, 1.0).validate().is_ok());
    }

    #[test]
    fn noise_json_round_trip() {
        let mut n = NoiseModel::high_temperature(0.02, 1.5);
        n.lamb_shift.insert(-1, 0.25);
        let s = serde_json::to_string(&n).unwrap();
        assert!(s.contains("\"-2\":1.5"));
        let back: NoiseModel<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, n);
        assert!(serde_json::from_str::<NoiseModel<f64>>("{\"lambda_sq\":0.1,\"gamma\":{},\"bogus\":1}").is_err());
    }

    #[test]
    fn density_validation() {
        let mut m = M4::identity().scale_real(0.25);
        assert!(DensityMatrix::new(m).is_ok());
        m[(0, 1)] = Complex::new(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(M4::identity()).is_err());
    }

    #[test]
    fn unitary_limit_matches_exact_propagator() {
        for tau in [optimal_time(1, 1, 1.0).unwrap(), 9.0, 31.0] {
            let l = standard_not_loop(1.0, tau).unwrap();
            let u = loop_propagator(&l).unwrap().matrix;
            let mut psi = [Complex::new(0.6, 0.0), Complex::new(0.0, 0.8), Complex::new(0.0, 0.0), Complex::new(0.0, 0.0)];
            psi[0] = Complex::new(0.6, 0.0);
            let s0 = DensityMatrix::pure(&psi).unwrap();
            let out = evolve_density(&l, &NoiseModel::noiseless(), &s0, 1000).unwrap();
            let expect = s0.matrix().conjugate_by(&u);
            assert!(frobenius_distance(out.matrix(), &expect) < 1e-7);
        }
    }

    #[test]
    fn zero_lambda_with_rates_runs_the_integrator_path() {
        // γ > 0 but λ² = 0 is silent; λ² > 0 with γ = 0 must match too.
        let l = wedge_loop(2, 1.0, 20.0).unwrap();
        let s0 = DensityMatrix::pure(&Level::One.ket()).unwrap();
        let u = loop_propagator(&l).unwrap().matrix;
        let mut n = NoiseModel::high_temperature(0.05, 0.0);
        n.lamb_shift.clear();
        let out = evolve_density(&l, &n, &s0, 500).unwrap();
        assert!(frobenius_distance(out.matrix(), &s0.matrix().conjugate_by(&u)) < 1e-12);
    }

    #[test]
    fn zero_steps_rejected() {
        let l = standard_not_loop(1.0, 10.0).unwrap();
        let s0 = DensityMatrix::pure(&Level::Zero.ket()).unwrap();
        let n = NoiseModel::high_temperature(0.01, 1.0);
        assert!(matches!(evolve_density(&l, &n, &s0, 0), Err(Error::StepCountTooSmall { .. })));
    }

    #[test]
    fn noisy_run_keeps_trace_and_hermiticity() {
        for (tau, lsq) in [(10.0f64, 0.005f64), (18.25, 0.02), (40.0, 0.05)] {
            let l = standard_not_loop(1.0, tau).unwrap();
            let s0 = DensityMatrix::pure(&Level::Zero.ket()).unwrap();
            let out = evolve_density(&l, &NoiseModel::high_temperature(lsq, 1.0), &s0, 2000).unwrap();
            assert!((out.matrix().trace().re - 1.0).abs() < 1e-8);
            assert!(!out.violates_positivity());
        }
    }

    #[test]
    fn noise_lowers_overlap_with_ideal_output() {
        let l = standard_not_loop(1.0, optimal_time(1, 1, 1.0).unwrap()).unwrap();
        let u = loop_propagator(&l).unwrap().matrix;
        let psi = Level::Zero.ket::<f64>();
        let ideal = u.mul_vec(&psi);
        let s0 = DensityMatrix::pure(&psi).unwrap();
        let mut last = 1.0 + 1e-12;
        for lsq in [0.0, 0.005, 0.01, 0.05] {
            let out = evolve_density(&l, &NoiseModel::high_temperature(lsq, 1.0), &s0, 2000).unwrap();
            let f = out.expectation(&ideal);
            assert!(f <= last, "{lsq}: {f} > {last}");
            last = f;
        }
        assert!(last < 0.99);
    }

    fn angles() -> impl Strategy<Value = (f64, f64)> {
        (0.0f64..PI, 0.0f64..(2.0 * PI))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn completeness_and_adjoint_pairs((t, p) in angles()) {
            let set = jump_operators(&pt(t, p));
            prop_assert!(frobenius_distance(&set.sum(), &bath_coupling()) <= 1e-11);
            for m in HARMONICS {
                let a = set.get(m).unwrap();
                let b = set.get(-m).unwrap();
                prop_assert!(frobenius_distance(&b, &a.adjoint()) <= 1e-14);
            }
        }

        #[test]
        fn dissipator_is_traceless_and_hermitian(
            (t, p) in angles(),
            entries in prop::collection::vec(-1.0f64..1.0, 32),
            shift in -1.0f64..1.0,
        ) {
            let set = jump_operators(&pt(t, p));
            let mut noise = NoiseModel::high_temperature(1.0, 0.8);
            noise.gamma.insert(2, 0.1);
            noise.lamb_shift.insert(1, shift);
            let sigma = random_density(&entries);
            let out = dissipator_apply(&set, &noise, &sigma);
            prop_assert!(out.trace().norm() <= 1e-11);
            prop_assert!(out.is_hermitian(1e-11));
        }
    }
}
