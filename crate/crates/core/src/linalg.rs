//! Dense complex linear algebra for the tiny fixed-size matrices used here
//! (2×2 qubit blocks and 4×4 tripod operators).
//!
//! Everything is stack allocated and `Copy`. The Hermitian eigensolver is a
//! cyclic complex Jacobi iteration, which reaches machine precision at these
//! sizes and keeps degenerate eigenvectors in a deterministic basis.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tolerance;

/// Column vector of length `N`.
pub type ComplexVector<T, const N: usize> = [Complex<T>; N];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexMatrix<T, const N: usize> {
    data: [[Complex<T>; N]; N],
}

impl<T: Real, const N: usize> ComplexMatrix<T, N> {
    pub const DIM: usize = N;

    pub fn zeros() -> Self {
        Self {
            data: [[Complex::zero(); N]; N],
        }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = Complex::one();
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.data[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn from_rows(rows: [[Complex<T>; N]; N]) -> Self {
        Self { data: rows }
    }

    /// Real matrix promoted to complex.
    pub fn from_real(rows: [[T; N]; N]) -> Self {
        Self::from_fn(|i, j| Complex::new(rows[i][j], T::zero()))
    }

    pub fn diagonal(diag: [Complex<T>; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.data[i][i] = diag[i];
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: [ComplexVector<T, N>; N]) -> Self {
        Self::from_fn(|i, j| cols[j][i])
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &ComplexVector<T, N>, v: &ComplexVector<T, N>) -> Self {
        Self::from_fn(|i, j| u[i] * v[j].conj())
    }

    pub fn column(&self, j: usize) -> ComplexVector<T, N> {
        let mut c = [Complex::zero(); N];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = self.data[i][j];
        }
        c
    }

    pub fn rows(&self) -> &[[Complex<T>; N]; N] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.data[j][i])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..N).fold(Complex::zero(), |acc, i| acc + self.data[i][i])
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.data[i][j] * s)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<T>()
            .sqrt()
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// `{A, B} = AB + BA`.
    pub fn anticommutator(&self, other: &Self) -> Self {
        *self * *other + *other * *self
    }

    pub fn mul_vec(&self, v: &ComplexVector<T, N>) -> ComplexVector<T, N> {
        let mut out = [Complex::zero(); N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).fold(Complex::zero(), |acc, k| acc + self.data[i][k] * v[k]);
        }
        out
    }

    /// `⟨u|A|v⟩`.
    pub fn sandwich(&self, u: &ComplexVector<T, N>, v: &ComplexVector<T, N>) -> Complex<T> {
        inner(u, &self.mul_vec(v))
    }

    /// `‖A − A†‖_F`.
    pub fn hermiticity_residual(&self) -> T {
        (*self - self.adjoint()).frobenius_norm()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_residual() <= tol
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_residual(&self) -> T {
        (self.adjoint() * *self - Self::identity()).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitarity_residual() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `UAU†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        *u * *self * u.adjoint()
    }

    /// Sub-block on the given row/column indices.
    pub fn block<const M: usize>(&self, idx: [usize; M]) -> ComplexMatrix<T, M> {
        ComplexMatrix::from_fn(|i, j| self.data[idx[i]][idx[j]])
    }

    /// Row-major entries with real and imaginary parts interleaved
    /// (`2·N²` numbers).
    pub fn to_interleaved(&self) -> Vec<T> {
        self.data
            .iter()
            .flatten()
            .flat_map(|z| [z.re, z.im])
            .collect()
    }

    pub fn from_interleaved(values: &[T]) -> Option<Self> {
        if values.len() != 2 * N * N {
            return None;
        }
        Some(Self::from_fn(|i, j| {
            let k = 2 * (i * N + j);
            Complex::new(values[k], values[k + 1])
        }))
    }
}

pub fn inner<T: Real, const N: usize>(u: &ComplexVector<T, N>, v: &ComplexVector<T, N>) -> Complex<T> {
    u.iter()
        .zip(v.iter())
        .fold(Complex::zero(), |acc, (a, b)| acc + a.conj() * *b)
}

pub fn vector_norm<T: Real, const N: usize>(v: &ComplexVector<T, N>) -> T {
    inner(v, v).re.sqrt()
}

impl<T, const N: usize> Index<(usize, usize)> for ComplexMatrix<T, N> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i][j]
    }
}

impl<T, const N: usize> IndexMut<(usize, usize)> for ComplexMatrix<T, N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i][j]
    }
}

impl<T: Real, const N: usize> Add for ComplexMatrix<T, N> {
    type Output = Self;

    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<T: Real, const N: usize> AddAssign for ComplexMatrix<T, N> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..N {
            for j in 0..N {
                self.data[i][j] = self.data[i][j] + rhs.data[i][j];
            }
        }
    }
}

impl<T: Real, const N: usize> Sub for ComplexMatrix<T, N> {
    type Output = Self;

    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<T: Real, const N: usize> SubAssign for ComplexMatrix<T, N> {
    fn sub_assign(&mut self, rhs: Self) {
        for i in 0..N {
            for j in 0..N {
                self.data[i][j] = self.data[i][j] - rhs.data[i][j];
            }
        }
    }
}

impl<T: Real, const N: usize> Neg for ComplexMatrix<T, N> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.data[i][j])
    }
}

impl<T: Real, const N: usize> Mul for ComplexMatrix<T, N> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.data[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..N {
                    out.data[i][j] = out.data[i][j] + a * rhs.data[k][j];
                }
            }
        }
        out
    }
}

/// Spectral decomposition `A = V diag(λ) V†` of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenSystem<T, const N: usize> {
    /// Ascending.
    pub eigenvalues: [T; N],
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: ComplexMatrix<T, N>,
}

impl<T: Real, const N: usize> EigenSystem<T, N> {
    /// `V f(λ) V†` for a scalar function applied to the spectrum.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T, N> {
        let v = self.eigenvectors;
        let mut d = [Complex::zero(); N];
        for (di, &l) in d.iter_mut().zip(self.eigenvalues.iter()) {
            *di = f(l);
        }
        let vd = ComplexMatrix::from_fn(|i, j| v[(i, j)] * d[j]);
        vd * v.adjoint()
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T, N> {
        self.map_spectrum(|l| Complex::new(l, T::zero()))
    }

    /// `e^{isA}` from the stored decomposition.
    pub fn exp_i(&self, s: T) -> ComplexMatrix<T, N> {
        self.map_spectrum(|l| Complex::from_polar(T::one(), s * l))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending; ties keep the order in which Jacobi
/// left them, which is deterministic for a given input.
pub fn herm_eig<T: Real, const N: usize>(a: &ComplexMatrix<T, N>) -> Result<EigenSystem<T, N>> {
    let scale = a.frobenius_norm().max(T::one());
    let residual = a.hermiticity_residual();
    if !a.is_finite() || residual > T::tol(tolerance::HERMITIAN_PRECHECK) * scale {
        return Err(Error::NonHermitianInput {
            residual: residual.as_f64(),
        });
    }

    // Symmetrize so rounding in the input does not leak into the rotations.
    let half = T::lit(0.5);
    let mut m = ComplexMatrix::from_fn(|i, j| (a[(i, j)] + a[(j, i)].conj()) * half);
    let mut v = ComplexMatrix::<T, N>::identity();
    let norm = m.frobenius_norm();
    let threshold = T::epsilon() * T::lit(tolerance::JACOBI_CONVERGENCE / f64::EPSILON) * norm;

    for _sweep in 0..64 {
        let off = off_diagonal_norm(&m);
        if off <= threshold || off.is_zero() {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() {
                    continue;
                }
                let phase = apq / mag;
                let tau = (m[(q, q)].re - m[(p, p)].re) / (T::lit(2.0) * mag);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                rotate(&mut m, &mut v, p, q, c, phase * s);
            }
        }
    }

    let mut order: [usize; N] = [0; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut eigenvalues = [T::zero(); N];
    for (k, &i) in order.iter().enumerate() {
        eigenvalues[k] = m[(i, i)].re;
    }
    let eigenvectors = ComplexMatrix::from_fn(|r, k| v[(r, order[k])]);
    Ok(EigenSystem {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_norm<T: Real, const N: usize>(m: &ComplexMatrix<T, N>) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        for j in 0..N {
            if i != j {
                acc = acc + m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Applies `M ← J† M J`, `V ← V J` with the plane rotation
/// `J_pp = J_qq = c`, `J_pq = s`, `J_qp = −s̄` (with `|s|² + c² = 1`).
fn rotate<T: Real, const N: usize>(
    m: &mut ComplexMatrix<T, N>,
    v: &mut ComplexMatrix<T, N>,
    p: usize,
    q: usize,
    c: T,
    s: Complex<T>,
) {
    // Columns: M ← M J.
    for k in 0..N {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * s.conj();
        m[(k, q)] = mkp * s + mkq * c;
    }
    // Rows: M ← J† M.
    for k in 0..N {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * s;
        m[(q, k)] = mpk * s.conj() + mqk * c;
    }
    m[(p, q)] = Complex::zero();
    m[(q, p)] = Complex::zero();
    m[(p, p)].im = T::zero();
    m[(q, q)].im = T::zero();
    for k in 0..N {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s.conj();
        v[(k, q)] = vkp * s + vkq * c;
    }
}

/// `e^{isA}` for Hermitian `A`, via the spectral decomposition.
pub fn exp_i_hermitian<T: Real, const N: usize>(a: &ComplexMatrix<T, N>, s: T) -> Result<ComplexMatrix<T, N>> {
    if !s.is_finite() {
        return Err(Error::InvalidDuration(format!("non-finite exponent scale {s}")));
    }
    Ok(herm_eig(a)?.exp_i(s))
}

/// `‖A − B‖_F`. Mismatched dimensions are rejected at compile time.
pub fn frobenius_distance<T: Real, const N: usize>(a: &ComplexMatrix<T, N>, b: &ComplexMatrix<T, N>) -> T {
    (*a - *b).frobenius_norm()
}

/// Pauli `σ_y` on a two-dimensional space.
pub fn sigma_y<T: Real>() -> ComplexMatrix<T, 2> {
    let i = Complex::new(T::zero(), T::one());
    ComplexMatrix::from_rows([[Complex::zero(), -i], [i, Complex::zero()]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M4 = ComplexMatrix<f64, 4>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn hermitian_from(entries: &[f64]) -> M4 {
        let mut m = M4::zeros();
        let mut k = 0;
        for i in 0..4 {
            m[(i, i)] = c(entries[k], 0.0);
            k += 1;
            for j in (i + 1)..4 {
                m[(i, j)] = c(entries[k], entries[k + 1]);
                m[(j, i)] = m[(i, j)].conj();
                k += 2;
            }
        }
        m
    }

    #[test]
    fn diagonal_input_sorts_ascending() {
        let omega = 1.3;
        let a = M4::diagonal([c(0.0, 0.0), c(0.0, 0.0), c(omega, 0.0), c(-omega, 0.0)]);
        let eig = herm_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, [-omega, 0.0, 0.0, omega]);
        assert!(eig.eigenvectors.is_unitary(1e-14));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = M4::zeros();
        a[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(herm_eig(&a), Err(Error::NonHermitianInput { .. })));
        assert!(exp_i_hermitian(&a, 1.0).is_err());
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let u = exp_i_hermitian(&M4::zeros(), 3.7).unwrap();
        assert!(frobenius_distance(&u, &M4::identity()) < 1e-15);
    }

    #[test]
    fn exp_of_diagonal_pauli_z_at_pi() {
        let z = ComplexMatrix::<f64, 2>::diagonal([c(1.0, 0.0), c(-1.0, 0.0)]);
        let u = exp_i_hermitian(&z, std::f64::consts::PI).unwrap();
        let expect = ComplexMatrix::<f64, 2>::diagonal([c(-1.0, 0.0), c(-1.0, 0.0)]);
        assert!(frobenius_distance(&u, &expect) < 1e-14);
    }

    #[test]
    fn exp_of_sigma_y_at_quarter_turn_is_not_gate() {
        // σ_y in the span of the first two basis vectors of a 4-level space.
        let mut a = M4::zeros();
        a[(0, 1)] = c(0.0, -1.0);
        a[(1, 0)] = c(0.0, 1.0);
        let u = exp_i_hermitian(&a, std::f64::consts::FRAC_PI_2).unwrap();
        let block: ComplexMatrix<f64, 2> = u.block([0, 1]);
        let expect = ComplexMatrix::from_real([[0.0, 1.0], [-1.0, 0.0]]);
        assert!(frobenius_distance(&block, &expect) < 1e-14);
        // Complement untouched.
        assert!((u[(2, 2)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[(3, 3)] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn distance_between_plus_and_minus_identity() {
        let i2 = ComplexMatrix::<f64, 2>::identity();
        assert_eq!(frobenius_distance(&i2, &i2), 0.0);
        let d = frobenius_distance(&i2, &-i2);
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn interleaved_layout_is_row_major() {
        let m = ComplexMatrix::<f64, 2>::from_rows([[c(1.0, 2.0), c(3.0, 4.0)], [c(5.0, 6.0), c(7.0, 8.0)]]);
        let flat = m.to_interleaved();
        assert_eq!(flat, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        assert_eq!(ComplexMatrix::from_interleaved(&flat), Some(m));
        assert_eq!(ComplexMatrix::<f64, 2>::from_interleaved(&flat[1..]), None);
    }

    #[test]
    fn single_precision_decomposition() {
        let a = ComplexMatrix::<f32, 2>::from_rows([
            [Complex::new(1.0, 0.0), Complex::new(0.5, -0.25)],
            [Complex::new(0.5, 0.25), Complex::new(-2.0, 0.0)],
        ]);
        let eig = herm_eig(&a).unwrap();
        assert!(frobenius_distance(&eig.reconstruct(), &a) < 1e-5);
        assert!(eig.eigenvectors.is_unitary(1e-5));
    }

    fn entries() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-3.0f64..3.0, 16)
    }

    proptest! {
        #[test]
        fn reconstruction_and_unitarity(e in entries()) {
            let a = hermitian_from(&e);
            let eig = herm_eig(&a).unwrap();
            let norm = a.frobenius_norm().max(1e-300);
            prop_assert!(frobenius_distance(&eig.reconstruct(), &a) <= 1e-12 * norm);
            prop_assert!(eig.eigenvectors.is_unitary(1e-12));
            for w in eig.eigenvalues.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let sum: f64 = eig.eigenvalues.iter().sum();
            prop_assert!((sum - a.trace().re).abs() <= 1e-12 * norm);
        }

        #[test]
        fn exponential_group_law(e in entries(), s in -5.0f64..5.0, t in -5.0f64..5.0) {
            let a = hermitian_from(&e);
            let lhs = exp_i_hermitian(&a, s).unwrap() * exp_i_hermitian(&a, t).unwrap();
            let rhs = exp_i_hermitian(&a, s + t).unwrap();
            prop_assert!(frobenius_distance(&lhs, &rhs) <= 1e-11);
        }

        #[test]
        fn exponential_is_unitary(e in entries(), s in -8.0f64..8.0) {
            // ‖sA‖ stays below 100 for these ranges.
            let a = hermitian_from(&e);
            prop_assert!(exp_i_hermitian(&a, s).unwrap().is_unitary(1e-12));
        }
    }
}
