//! Exact non-adiabatic propagators for pole-triangle loops, the adiabatic
//! holonomy, and a brute-force time-ordered integrator used as an oracle.
//!
//! Along an arc the spectrum is fixed and the transport operator
//! `R(t, t₀) = Σ_k |D_k(t)⟩⟨D_k(t₀)|` has a constant Hermitian generator
//! `D = −i R†∂ₜR`. The arc propagator is then
//! `U = e^{iΔt·D} e^{−iΔt·(H(t₀) + D)}`.
//!
//! [`TransportPicture`] expresses the whole loop in the frame rotated by
//! `R(t, 0)`, where the coherent generator is piecewise constant. The
//! master-equation integrator uses the same object, so the unitary and
//! dissipative parts share one frame convention.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{exp_i_hermitian, herm_eig, sigma_y, ComplexMatrix, EigenSystem};
use crate::path::LoopSpec;
use crate::scalar::Real;
use crate::tripod::{eigenframe, eigenframe_rate, hamiltonian, Matrix4};

pub type Matrix2<T> = ComplexMatrix<T, 2>;

/// Dark-subspace columns of the 4×4 operators.
pub const DARK: [usize; 2] = [0, 1];

/// Generator of the transport operator along one arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportGenerator<T> {
    pub matrix: Matrix4<T>,
    pub arc_index: usize,
}

impl<T: Real> TransportGenerator<T> {
    pub fn is_zero(&self) -> bool {
        self.matrix.frobenius_norm().is_zero()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PropagatorKind {
    Exact,
    Adiabatic,
    Oracle,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatePropagator<T: Real> {
    pub matrix: Matrix4<T>,
    pub loop_spec: LoopSpec<T>,
    pub kind: PropagatorKind,
}

impl<T: Real> GatePropagator<T> {
    /// Block on `span{D0(0), D1(0)}` in the frame at the loop start.
    pub fn dark_block(&self) -> Matrix2<T> {
        let f = eigenframe(&self.loop_spec.start_point()).vectors;
        (f.adjoint() * self.matrix * f).block(DARK)
    }
}

fn minus_i<T: Real>() -> Complex<T> {
    Complex::new(T::zero(), -T::one())
}

/// `D(t₀, t₀) = −i Σ_k |∂ₜD_k⟩⟨D_k|` at the start of an arc.
pub fn transport_generator<T: Real>(spec: &LoopSpec<T>, arc_index: usize) -> Result<TransportGenerator<T>> {
    let (p, s) = spec.arc_point(arc_index, T::zero())?;
    let f = eigenframe(&p).vectors;
    let fdot = eigenframe_rate(&p, s.theta_dot, s.phi_dot);
    Ok(TransportGenerator {
        matrix: (fdot * f.adjoint()).scale(minus_i()),
        arc_index,
    })
}

/// `D(t, t₀) = −i R(t,t₀)† ∂ₜR(t,t₀)` at local time `s` into the arc.
pub fn transport_generator_at<T: Real>(spec: &LoopSpec<T>, arc_index: usize, s: T) -> Result<Matrix4<T>> {
    let (p0, _) = spec.arc_point(arc_index, T::zero())?;
    let (p, smp) = spec.arc_point(arc_index, s)?;
    let f0 = eigenframe(&p0).vectors;
    let f = eigenframe(&p).vectors;
    let fdot = eigenframe_rate(&p, smp.theta_dot, smp.phi_dot);
    Ok((f0 * f.adjoint() * fdot * f0.adjoint()).scale(minus_i()))
}

/// Exact propagator across one arc.
pub fn arc_propagator<T: Real>(spec: &LoopSpec<T>, arc_index: usize) -> Result<Matrix4<T>> {
    let dt = spec.arc(arc_index)?.duration;
    let d = transport_generator(spec, arc_index)?.matrix;
    let (p, _) = spec.arc_point(arc_index, T::zero())?;
    let h = hamiltonian(&p);
    Ok(exp_i_hermitian(&d, dt)? * exp_i_hermitian(&(h + d), -dt)?)
}

/// Exact propagator of the full loop, `U = U_last ⋯ U_2 U_1`.
pub fn loop_propagator<T: Real>(spec: &LoopSpec<T>) -> Result<GatePropagator<T>> {
    let mut u = Matrix4::identity();
    for i in 0..spec.arcs().len() {
        u = arc_propagator(spec, i)? * u;
    }
    Ok(GatePropagator {
        matrix: u,
        loop_spec: spec.clone(),
        kind: PropagatorKind::Exact,
    })
}

/// Per-arc data in the transport picture.
#[derive(Clone, Debug)]
pub struct PictureArc<T> {
    pub start_time: T,
    pub duration: T,
    /// `D(t, 0)`, constant on the arc.
    pub coupling: Matrix4<T>,
    /// Spectral decomposition of `H(0) + D(t, 0)`.
    pub generator: EigenSystem<T, 4>,
}

/// The loop seen from the frame transported by `R(t, 0) = F(t) F(0)†`,
/// with `F` the analytic eigenframe. There `σ_R = R†σR` obeys
/// `σ̇_R = −i[H(0) + D(t,0), σ_R] + (dissipator)`.
#[derive(Clone, Debug)]
pub struct TransportPicture<T: Real> {
    spec: LoopSpec<T>,
    frame0: Matrix4<T>,
    h0: Matrix4<T>,
    arcs: Vec<PictureArc<T>>,
}

impl<T: Real> TransportPicture<T> {
    pub fn new(spec: &LoopSpec<T>) -> Result<Self> {
        let start = spec.start_point();
        let frame0 = eigenframe(&start).vectors;
        let h0 = hamiltonian(&start);
        let starts = spec.arc_start_times();
        let mut arcs = Vec::with_capacity(spec.arcs().len());
        for (i, arc) in spec.arcs().iter().enumerate() {
            // F(t)†Ḟ(t) is constant along the arc; evaluate it at the start.
            let (p, s) = spec.arc_point(i, T::zero())?;
            let f = eigenframe(&p).vectors;
            let fdot = eigenframe_rate(&p, s.theta_dot, s.phi_dot);
            let coupling = (frame0 * f.adjoint() * fdot * frame0.adjoint()).scale(minus_i());
            let generator = herm_eig(&(h0 + coupling))?;
            arcs.push(PictureArc {
                start_time: starts[i],
                duration: arc.duration,
                coupling,
                generator,
            });
        }
        Ok(Self {
            spec: spec.clone(),
            frame0,
            h0,
            arcs,
        })
    }

    pub fn loop_spec(&self) -> &LoopSpec<T> {
        &self.spec
    }

    pub fn arcs(&self) -> &[PictureArc<T>] {
        &self.arcs
    }

    /// Analytic eigenframe at the loop start.
    pub fn initial_frame(&self) -> &Matrix4<T> {
        &self.frame0
    }

    pub fn initial_hamiltonian(&self) -> &Matrix4<T> {
        &self.h0
    }

    /// `R(t, 0)` at local time `s` of arc `index`.
    pub fn transport(&self, index: usize, s: T) -> Result<Matrix4<T>> {
        let (p, _) = self.spec.arc_point(index, s)?;
        Ok(eigenframe(&p).vectors * self.frame0.adjoint())
    }

    /// `R(τ, 0)`.
    pub fn closing_transport(&self) -> Matrix4<T> {
        let last = self.arcs.len() - 1;
        self.transport(last, self.arcs[last].duration)
            .expect("last arc exists")
    }

    /// Coherent propagator of arc `index` in the transport picture.
    pub fn arc_evolution(&self, index: usize, s: T) -> Matrix4<T> {
        self.arcs[index].generator.exp_i(-s)
    }

    /// Lab-frame loop propagator, `R(τ,0) ∏ e^{−iΔt(H(0)+D_k)}`.
    pub fn propagator(&self) -> Matrix4<T> {
        let mut u = Matrix4::identity();
        for (i, arc) in self.arcs.iter().enumerate() {
            u = self.arc_evolution(i, arc.duration) * u;
        }
        self.closing_transport() * u
    }
}

/// Closed-form holonomy `exp(iσ_y ω)` on `span{D0(0), D1(0)}`, with `ω` the
/// signed solid angle of a pole triangle.
pub fn adiabatic_holonomy<T: Real>(spec: &LoopSpec<T>) -> Result<Matrix2<T>> {
    let omega = spec.solid_angle()?;
    exp_i_hermitian(&sigma_y(), omega)
}

/// Holonomy by path-ordered integration of the adiabatic transport
/// `ψ̇ = [Ṗ, P]ψ` of the dark projector, midpoint rule with
/// `steps_per_arc` slices per arc. Works for any loop.
pub fn adiabatic_holonomy_numeric<T: Real>(spec: &LoopSpec<T>, steps_per_arc: usize) -> Result<Matrix2<T>> {
    let steps = steps_per_arc.max(1);
    let mut w = Matrix4::identity();
    for (i, arc) in spec.arcs().iter().enumerate() {
        let h = arc.duration / T::lit(steps as f64);
        for k in 0..steps {
            let s = (T::lit(k as f64) + T::lit(0.5)) * h;
            let (p, smp) = spec.arc_point(i, s)?;
            let f = eigenframe(&p).vectors;
            let fdot = eigenframe_rate(&p, smp.theta_dot, smp.phi_dot);
            let mut proj = Matrix4::zeros();
            let mut proj_dot = Matrix4::zeros();
            for &c in &DARK {
                let v = f.column(c);
                let vd = fdot.column(c);
                proj += Matrix4::outer(&v, &v);
                proj_dot += Matrix4::outer(&vd, &v) + Matrix4::outer(&v, &vd);
            }
            // [Ṗ, P] is anti-Hermitian; i[Ṗ, P] is its Hermitian partner.
            let kato = proj_dot.commutator(&proj).scale(Complex::new(T::zero(), T::one()));
            w = exp_i_hermitian(&kato, -h)? * w;
        }
    }
    let f0 = eigenframe(&spec.start_point()).vectors;
    Ok((f0.adjoint() * w * f0).block(DARK))
}

/// 4×4 adiabatic target in the lab basis: the holonomy on the dark pair and
/// dynamical phases `e^{∓iΩτ}` on the bright states.
pub fn adiabatic_target<T: Real>(spec: &LoopSpec<T>) -> Result<GatePropagator<T>> {
    let hol = match adiabatic_holonomy(spec) {
        Ok(h) => h,
        Err(Error::UnsupportedLoop) => adiabatic_holonomy_numeric(spec, 4000)?,
        Err(e) => return Err(e),
    };
    let phase = spec.omega_scale() * spec.total_time();
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = hol[(i, j)];
        }
    }
    m[(2, 2)] = Complex::from_polar(T::one(), -phase);
    m[(3, 3)] = Complex::from_polar(T::one(), phase);
    let f0 = eigenframe(&spec.start_point()).vectors;
    Ok(GatePropagator {
        matrix: f0 * m * f0.adjoint(),
        loop_spec: spec.clone(),
        kind: PropagatorKind::Adiabatic,
    })
}

/// Time-ordered product `∏ e^{−iH(t_mid)Δt}` with arc-local midpoint
/// sampling. `steps` is spread over the arcs in proportion to duration.
pub fn schrodinger_oracle<T: Real>(spec: &LoopSpec<T>, steps: usize) -> Result<GatePropagator<T>> {
    let total = spec.total_time();
    let mut u = Matrix4::identity();
    for (i, arc) in spec.arcs().iter().enumerate() {
        let n = arc_steps(arc.duration, total, steps);
        let h = arc.duration / T::lit(n as f64);
        for k in 0..n {
            let s = (T::lit(k as f64) + T::lit(0.5)) * h;
            let (p, _) = spec.arc_point(i, s)?;
            u = exp_i_hermitian(&hamiltonian(&p), -h)? * u;
        }
    }
    Ok(GatePropagator {
        matrix: u,
        loop_spec: spec.clone(),
        kind: PropagatorKind::Oracle,
    })
}

/// Share of a total step budget given to an arc (at least one).
pub(crate) fn arc_steps<T: Real>(duration: T, total: T, steps: usize) -> usize {
    let share = (duration / total * T::lit(steps as f64)).round();
    share.to_usize().unwrap_or(1).max(1)
}

/// Bloch-sphere average of `|⟨ψ|A†B|ψ⟩|²` for two qubit blocks,
/// `(|Tr M|² + Tr M†M) / 6` with `M = A†B`.
pub fn dark_block_fidelity<T: Real>(target: &Matrix2<T>, actual: &Matrix2<T>) -> T {
    let m = target.adjoint() * *actual;
    let tr = m.trace();
    let mm = (m.adjoint() * m).trace().re;
    (tr.norm_sqr() + mm) / T::lit(6.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use crate::path::{optimal_time, pole_triangle, standard_not_loop, wedge_loop, ArcSegment};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    type M4 = Matrix4<f64>;

    fn not_block() -> Matrix2<f64> {
        ComplexMatrix::from_real([[0.0, 1.0], [-1.0, 0.0]])
    }

    #[test]
    fn zero_speed_arc_has_zero_generator() {
        // Degenerate equatorial arc with no angular motion.
        let l = pole_triangle(1.0, 0.0, 0.0, [1.0, 2.0, 1.0]).unwrap();
        assert!(transport_generator(&l, 1).unwrap().is_zero());
        assert!(matches!(transport_generator(&l, 3), Err(Error::IndexOutOfRange { index: 3, len: 3 })));
    }

    #[test]
    fn first_arc_generator_matches_hand_derivative() {
        // At (θ, φ) = (0, 0): ∂θD0 = 0, ∂θD1 = −|a⟩, ∂θD± = |1⟩/√2.
        let l = standard_not_loop(1.0, 18.0).unwrap();
        let theta_dot = l.arcs()[0].angular_speed();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex::new(x, 0.0);
        let d_dot = [
            [c(0.0); 4],
            [c(0.0), c(0.0), c(-1.0), c(0.0)],
            [c(0.0), c(r), c(0.0), c(0.0)],
            [c(0.0), c(r), c(0.0), c(0.0)],
        ];
        let frame = [
            [c(1.0), c(0.0), c(0.0), c(0.0)],
            [c(0.0), c(1.0), c(0.0), c(0.0)],
            [c(0.0), c(0.0), c(r), c(r)],
            [c(0.0), c(0.0), c(r), c(-r)],
        ];
        let mut g = M4::zeros();
        for k in 0..4 {
            g += M4::outer(&d_dot[k], &frame[k]);
        }
        let expect = g.scale(Complex::new(0.0, -theta_dot));
        let got = transport_generator(&l, 0).unwrap().matrix;
        assert!(frobenius_distance(&got, &expect) < 1e-14);
        assert!(got.is_hermitian(1e-14));
    }

    #[test]
    fn generator_constant_along_each_arc() {
        let l = wedge_loop(3, 1.2, 20.0).unwrap();
        for i in 0..3 {
            let d0 = transport_generator(&l, i).unwrap().matrix;
            for k in 1..10 {
                let s = l.arcs()[i].duration * k as f64 / 10.0;
                let d = transport_generator_at(&l, i, s).unwrap();
                assert!(frobenius_distance(&d, &d0) <= 1e-9);
            }
        }
    }

    #[test]
    fn static_arc_reduces_to_plain_exponential() {
        let l = pole_triangle(1.0, 0.0, 0.0, [1.0, 2.5, 1.0]).unwrap();
        let (p, _) = l.arc_point(1, 0.0).unwrap();
        let expect = exp_i_hermitian(&hamiltonian(&p), -2.5).unwrap();
        assert!(frobenius_distance(&arc_propagator(&l, 1).unwrap(), &expect) < 1e-13);
        // Oracle is exact for a static Hamiltonian regardless of the step count.
        let arcs = vec![
            ArcSegment::meridian(0.0, 0.0, 0.0, 2.0),
        ];
        let still = LoopSpec::new(1.0, arcs).unwrap();
        let oracle = schrodinger_oracle(&still, 7).unwrap().matrix;
        let exact = exp_i_hermitian(&hamiltonian(&still.start_point()), -2.0).unwrap();
        assert!(frobenius_distance(&oracle, &exact) < 1e-13);
    }

    #[test]
    fn vanishing_duration_gives_identity() {
        let l = pole_triangle(1.0, 0.0, FRAC_PI_2, [1e-14, 1.0, 1.0]).unwrap();
        assert!(frobenius_distance(&arc_propagator(&l, 0).unwrap(), &M4::identity()) < 1e-12);
    }

    #[test]
    fn revival_gives_exact_not_on_dark_pair() {
        let tau = optimal_time(1, 1, 1.0).unwrap();
        let u = loop_propagator(&standard_not_loop(1.0, tau).unwrap()).unwrap();
        assert!(u.matrix.is_unitary(1e-10));
        assert!(frobenius_distance(&u.dark_block(), &not_block()) < 1e-9);
    }

    #[test]
    fn slow_loop_approaches_holonomy() {
        let u = loop_propagator(&standard_not_loop(1.0, 1000.0).unwrap()).unwrap();
        assert!(frobenius_distance(&u.dark_block(), &not_block()) < 1e-2);
    }

    #[test]
    fn fast_loop_is_not_a_not_gate() {
        let u = loop_propagator(&standard_not_loop(1.0, 5.0).unwrap()).unwrap();
        let f = dark_block_fidelity(&not_block(), &u.dark_block());
        assert!(f < 0.99, "fidelity {f}");
    }

    #[test]
    fn transport_picture_matches_arc_product() {
        for (n, tau) in [(1, 7.3), (2, 15.0), (3, 40.0)] {
            let l = wedge_loop(n, 1.4, tau).unwrap();
            let lab = loop_propagator(&l).unwrap().matrix;
            let pic = TransportPicture::new(&l).unwrap().propagator();
            assert!(frobenius_distance(&lab, &pic) < 1e-11, "n={n}");
        }
    }

    #[test]
    fn composed_product_matches_oracle() {
        let l = standard_not_loop(1.0, 12.0).unwrap();
        let exact = loop_propagator(&l).unwrap().matrix;
        let oracle = schrodinger_oracle(&l, 20_000).unwrap().matrix;
        assert!(frobenius_distance(&exact, &oracle) < 1e-6);
    }

    #[test]
    fn holonomy_closed_forms() {
        let h = adiabatic_holonomy(&standard_not_loop(1.0, 10.0).unwrap()).unwrap();
        assert!(frobenius_distance(&h, &not_block()) < 1e-15);
        let flat = pole_triangle(1.0, 0.0, 0.0, [1.0, 1.0, 1.0]).unwrap();
        let h0 = adiabatic_holonomy(&flat).unwrap();
        assert!(frobenius_distance(&h0, &Matrix2::identity()) < 1e-15);
        let h2 = adiabatic_holonomy(&wedge_loop(2, 1.0, 10.0).unwrap()).unwrap();
        let (s, c) = FRAC_PI_4.sin_cos();
        assert!(frobenius_distance(&h2, &ComplexMatrix::from_real([[c, s], [-s, c]])) < 1e-15);
        let odd = LoopSpec::new(
            1.0,
            vec![ArcSegment::meridian(0.0, 0.0, 1.0, 1.0), ArcSegment::meridian(0.0, 1.0, 0.0, 1.0)],
        )
        .unwrap();
        assert_eq!(adiabatic_holonomy(&odd), Err(Error::UnsupportedLoop));
    }

    #[test]
    fn numeric_holonomy_agrees_with_closed_form() {
        for l in [
            standard_not_loop(1.0, 10.0).unwrap(),
            wedge_loop(2, 1.0, 10.0).unwrap(),
            pole_triangle(1.0, 0.4, 2.0, [1.0, 3.0, 0.5]).unwrap(),
            standard_not_loop(1.0, 10.0).unwrap().reversed().unwrap(),
        ] {
            let closed = adiabatic_holonomy(&l).unwrap();
            let numeric = adiabatic_holonomy_numeric(&l, 2000).unwrap();
            assert!(frobenius_distance(&closed, &numeric) < 1e-6);
        }
    }

    #[test]
    fn target_carries_bright_phases() {
        let l = standard_not_loop(1.0, PI).unwrap();
        let t = adiabatic_target(&l).unwrap().matrix;
        assert!(t.is_unitary(1e-14));
        let f = eigenframe(&l.start_point());
        let bp = f.state(crate::tripod::FrameState::BrightPlus);
        let phase = t.sandwich(&bp, &bp);
        assert!((phase - Complex::from_polar(1.0, -PI)).norm() < 1e-14);
    }

    #[test]
    fn dark_block_fidelity_of_identical_unitaries_is_one() {
        let u = adiabatic_holonomy(&wedge_loop::<f64>(3, 1.0, 1.0).unwrap()).unwrap();
        assert!((dark_block_fidelity(&u, &u) - 1.0).abs() < 1e-14);
    }
}
