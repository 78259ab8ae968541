//! The four-level tripod: three degenerate ground levels `|0⟩, |1⟩, |a⟩`
//! coupled to one excited level `|e⟩` by real Rabi frequencies.
//!
//! The Rabi triple lives on a sphere of radius `Ω`, parametrized by polar
//! angle `θ` and azimuth `φ`. The spectrum is `{−Ω, 0, 0, +Ω}` everywhere on
//! the sphere; the zero-energy (dark) doublet carries the qubit.

use num_complex::Complex;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

pub type Matrix4<T> = ComplexMatrix<T, 4>;

/// Fixed ordering of the tripod levels in every 4×4 operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Zero = 0,
    One = 1,
    Ancilla = 2,
    Excited = 3,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::Zero, Level::One, Level::Ancilla, Level::Excited];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn ket<T: Real>(self) -> [Complex<T>; 4] {
        let mut v = [Complex::zero(); 4];
        v[self.index()] = Complex::new(T::one(), T::zero());
        v
    }
}

/// Point on the parameter sphere of radius `omega`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint<T> {
    pub theta: T,
    pub phi: T,
    pub omega: T,
}

impl<T: Real> SphericalPoint<T> {
    pub fn new(theta: T, phi: T, omega: T) -> Result<Self> {
        let p = Self { theta, phi, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.phi.is_finite()) {
            return Err(Error::InvalidPoint("non-finite angle".into()));
        }
        let slack = T::tol(1e-9);
        if self.theta < -slack || self.theta > T::PI() + slack {
            return Err(Error::InvalidPoint(format!("theta {} outside [0, π]", self.theta)));
        }
        if !(self.omega.is_finite() && self.omega > T::zero()) {
            return Err(Error::InvalidPoint(format!("omega {} must be positive", self.omega)));
        }
        Ok(())
    }

    /// Unit vector `(sinθ sinφ, sinθ cosφ, cosθ)` in `(Ω0, Ω1, Ωa)` order.
    pub fn direction(&self) -> [T; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * sp, st * cp, ct]
    }
}

/// Rabi frequencies `(Ω0, Ω1, Ωa)` at a point of the sphere.
pub fn rabi_from_angles<T: Real>(p: &SphericalPoint<T>) -> (T, T, T) {
    let [x, y, z] = p.direction();
    (p.omega * x, p.omega * y, p.omega * z)
}

/// `H = |e⟩(Ω0⟨0| + Ω1⟨1| + Ωa⟨a|) + h.c.`
pub fn hamiltonian<T: Real>(p: &SphericalPoint<T>) -> Matrix4<T> {
    let (o0, o1, oa) = rabi_from_angles(p);
    let e = Level::Excited.index();
    let mut h = Matrix4::zeros();
    for (level, rabi) in [(Level::Zero, o0), (Level::One, o1), (Level::Ancilla, oa)] {
        let r = Complex::new(rabi, T::zero());
        h[(e, level.index())] = r;
        h[(level.index(), e)] = r;
    }
    h
}

/// Column order of the analytic eigenframe.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameState {
    Dark0 = 0,
    Dark1 = 1,
    BrightPlus = 2,
    BrightMinus = 3,
}

/// Closed-form eigenbasis in a fixed gauge, columns `(D0, D1, D+, D−)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenFrame<T> {
    pub vectors: Matrix4<T>,
    /// `(0, 0, +Ω, −Ω)`.
    pub eigenvalues: [T; 4],
}

impl<T: Real> EigenFrame<T> {
    pub fn state(&self, s: FrameState) -> [Complex<T>; 4] {
        self.vectors.column(s as usize)
    }

    pub fn dark(&self) -> [[Complex<T>; 4]; 2] {
        [self.state(FrameState::Dark0), self.state(FrameState::Dark1)]
    }

    /// Projectors onto the eigenspaces of `0`, `+Ω` and `−Ω`.
    pub fn projectors(&self) -> [Matrix4<T>; 3] {
        let [d0, d1] = self.dark();
        let bp = self.state(FrameState::BrightPlus);
        let bm = self.state(FrameState::BrightMinus);
        [
            Matrix4::outer(&d0, &d0) + Matrix4::outer(&d1, &d1),
            Matrix4::outer(&bp, &bp),
            Matrix4::outer(&bm, &bm),
        ]
    }
}

fn frame_from_real<T: Real>(cols: [[T; 4]; 4]) -> Matrix4<T> {
    Matrix4::from_fn(|i, j| Complex::new(cols[j][i], T::zero()))
}

/// Analytic eigenframe at `p`.
///
/// `D0 = cosφ|0⟩ − sinφ|1⟩`,
/// `D1 = cosθ sinφ|0⟩ + cosθ cosφ|1⟩ − sinθ|a⟩`,
/// `D± = (±|e⟩ + sinθ sinφ|0⟩ + sinθ cosφ|1⟩ + cosθ|a⟩)/√2`.
pub fn eigenframe<T: Real>(p: &SphericalPoint<T>) -> EigenFrame<T> {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let r = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let cols = [
        [cp, -sp, z, z],
        [ct * sp, ct * cp, -st, z],
        [r * st * sp, r * st * cp, r * ct, r],
        [r * st * sp, r * st * cp, r * ct, -r],
    ];
    EigenFrame {
        vectors: frame_from_real(cols),
        eigenvalues: [z, z, p.omega, -p.omega],
    }
}

/// Time derivative of the eigenframe columns along a path with angular
/// rates `theta_dot` and `phi_dot`.
pub fn eigenframe_rate<T: Real>(p: &SphericalPoint<T>, theta_dot: T, phi_dot: T) -> Matrix4<T> {
    let (st, ct) = p.theta.sin_cos();
    let (sp, cp) = p.phi.sin_cos();
    let r = T::FRAC_1_SQRT_2();
    let z = T::zero();
    let td = theta_dot;
    let pd = phi_dot;
    let cols = [
        [-sp * pd, -cp * pd, z, z],
        [
            -st * sp * td + ct * cp * pd,
            -st * cp * td - ct * sp * pd,
            -ct * td,
            z,
        ],
        [
            r * (ct * sp * td + st * cp * pd),
            r * (ct * cp * td - st * sp * pd),
            -r * st * td,
            z,
        ],
        [
            r * (ct * sp * td + st * cp * pd),
            r * (ct * cp * td - st * sp * pd),
            -r * st * td,
            z,
        ],
    ];
    frame_from_real(cols)
}
