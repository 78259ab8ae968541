//! Fixed-intercept polynomial fits of the optimal working point against λ².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::LoopFamily;
use crate::scalar::Real;

/// Functional forms in `x = λ²`. Coefficients are reported with the signs
/// of the printed laws, so a fidelity that falls with noise has `F2 > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// `F = 1 − F2·x`
    FLinear,
    /// `F = 1 − F2·x + F4·x²`
    FQuartic,
    /// `Ωτ = Ωτ₁ − τ2·x`
    TauLinear,
    /// `Ωτ = Ωτ₁ − τ2·x + τ4·x² − τ6·x³`
    TauCubic,
}

impl FitModel {
    pub const ALL: [FitModel; 4] = [Self::FLinear, Self::FQuartic, Self::TauLinear, Self::TauCubic];

    /// `(power of x, sign)` per free coefficient.
    pub fn terms(self) -> &'static [(i32, i8)] {
        match self {
            Self::FLinear | Self::TauLinear => &[(1, -1)],
            Self::FQuartic => &[(1, -1), (2, 1)],
            Self::TauCubic => &[(1, -1), (2, 1), (3, -1)],
        }
    }

    pub fn coefficient_names(self) -> &'static [&'static str] {
        match self {
            Self::FLinear => &["F2"],
            Self::FQuartic => &["F2", "F4"],
            Self::TauLinear => &["tau2"],
            Self::TauCubic => &["tau2", "tau4", "tau6"],
        }
    }

    pub fn is_fidelity(self) -> bool {
        matches!(self, Self::FLinear | Self::FQuartic)
    }

    pub fn is_linear(self) -> bool {
        matches!(self, Self::FLinear | Self::TauLinear)
    }

    /// Noiseless value: 1 for fidelities, `Ωτ*₁` of the family for times.
    pub fn natural_intercept<T: Real>(self, family: LoopFamily) -> Result<T> {
        if self.is_fidelity() {
            Ok(T::one())
        } else {
            family.revival_time(1, T::one())
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::FLinear => "f-linear",
            Self::FQuartic => "f-quartic",
            Self::TauLinear => "tau-linear",
            Self::TauCubic => "tau-cubic",
        }
    }
}

impl std::fmt::Display for FitModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::ModelMismatch(format!("unknown fit model '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Intercept<T> {
    Fixed(T),
    Free,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitCoefficient<T> {
    pub name: String,
    pub value: T,
    pub std_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FitResult<T> {
    pub model: FitModel,
    pub intercept: T,
    pub intercept_free: bool,
    /// Standard error of a free intercept, zero when fixed.
    pub intercept_std_error: T,
    pub coefficients: Vec<FitCoefficient<T>>,
    /// Euclidean norm of the residual vector.
    pub residual_norm: T,
    /// Largest absolute residual.
    pub max_residual: T,
    /// Input `(λ², y)` pairs.
    pub points: Vec<[T; 2]>,
}

impl<T: Real> FitResult<T> {
    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.coefficients.iter().find(|c| c.name == name).map(|c| c.value)
    }

    pub fn predict(&self, x: T) -> T {
        self.model
            .terms()
            .iter()
            .zip(&self.coefficients)
            .fold(self.intercept, |acc, (&(p, sign), c)| {
                acc + T::lit(f64::from(sign)) * c.value * x.powi(p)
            })
    }

    /// `actual − predicted` per input point.
    pub fn residuals(&self) -> Vec<T> {
        self.points.iter().map(|&[x, y]| y - self.predict(x)).collect()
    }
}

/// Ordinary least-squares solution with standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares<T> {
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    pub residuals: Vec<T>,
}

/// Solves `min ‖A β − b‖₂` by Householder QR on column-scaled `A`
/// (`rows[i]` is row `i` of `A`). Needs more rows than columns; the error
/// variance is estimated with `m − p` degrees of freedom.
pub fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Result<LeastSquares<T>> {
    let m = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if m != rhs.len() || rows.iter().any(|r| r.len() != p) || p == 0 {
        return Err(Error::ModelMismatch("ragged design matrix".into()));
    }
    if m <= p {
        return Err(Error::UnderdeterminedFit { points: m, params: p });
    }
    if rows.iter().flatten().chain(rhs).any(|v| !v.is_finite()) {
        return Err(Error::ModelMismatch("non-finite fit input".into()));
    }

    let mut scale = vec![T::zero(); p];
    for (j, s) in scale.iter_mut().enumerate() {
        *s = rows.iter().map(|r| r[j] * r[j]).fold(T::zero(), |a, b| a + b).sqrt();
        if s.is_zero() {
            return Err(Error::ModelMismatch(format!("design column {j} vanishes")));
        }
    }
    // Column-major working copy.
    let mut a: Vec<Vec<T>> = (0..p).map(|j| rows.iter().map(|r| r[j] / scale[j]).collect()).collect();
    let mut b = rhs.to_vec();

    for k in 0..p {
        let norm = a[k][k..].iter().map(|v| *v * *v).fold(T::zero(), |x, y| x + y).sqrt();
        if norm <= T::epsilon() * T::lit(m as f64) {
            return Err(Error::ModelMismatch("design matrix is rank deficient".into()));
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[k][k..].to_vec();
        v[0] = v[0] - alpha;
        let vv = v.iter().map(|x| *x * *x).fold(T::zero(), |x, y| x + y);
        if vv.is_zero() {
            continue;
        }
        let two = T::lit(2.0);
        for col in a.iter_mut().skip(k) {
            let d = v.iter().zip(&col[k..]).map(|(x, y)| *x * *y).fold(T::zero(), |x, y| x + y);
            let f = two * d / vv;
            for (c, vi) in col[k..].iter_mut().zip(&v) {
                *c = *c - f * *vi;
            }
        }
        let d = v.iter().zip(&b[k..]).map(|(x, y)| *x * *y).fold(T::zero(), |x, y| x + y);
        let f = two * d / vv;
        for (c, vi) in b[k..].iter_mut().zip(&v) {
            *c = *c - f * *vi;
        }
    }

    // Back substitution for the scaled coefficients.
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let mut s = b[i];
        for j in i + 1..p {
            s = s - a[j][i] * beta[j];
        }
        beta[i] = s / a[i][i];
    }

    // R⁻¹ column by column; diag((RᵀR)⁻¹) is the row-wise squared norm of R⁻¹.
    let mut rinv = vec![vec![T::zero(); p]; p];
    for c in 0..p {
        for i in (0..=c).rev() {
            let mut s = if i == c { T::one() } else { T::zero() };
            for j in i + 1..=c {
                s = s - a[j][i] * rinv[j][c];
            }
            rinv[i][c] = s / a[i][i];
        }
    }

    let residuals: Vec<T> = rows
        .iter()
        .zip(rhs)
        .map(|(r, y)| {
            let fit = r
                .iter()
                .zip(&beta)
                .zip(&scale)
                .fold(T::zero(), |acc, ((x, bj), sj)| acc + *x * *bj / *sj);
            *y - fit
        })
        .collect();
    let rss = residuals.iter().map(|r| *r * *r).fold(T::zero(), |x, y| x + y);
    let sigma_sq = rss / T::lit((m - p) as f64);

    let coefficients = beta.iter().zip(&scale).map(|(b, s)| *b / *s).collect();
    let std_errors = (0..p)
        .map(|i| {
            let d = rinv[i].iter().map(|v| *v * *v).fold(T::zero(), |x, y| x + y);
            (sigma_sq * d).sqrt() / scale[i]
        })
        .collect();
    Ok(LeastSquares {
        coefficients,
        std_errors,
        residuals,
    })
}

/// Fits `(λ², y)` pairs to one of the noise-response laws.
pub fn fit_noise_response<T: Real>(points: &[[T; 2]], model: FitModel, intercept: Intercept<T>) -> Result<FitResult<T>> {
    let terms = model.terms();
    let free = matches!(intercept, Intercept::Free);
    let params = terms.len() + usize::from(free);
    if points.len() < params + 1 {
        return Err(Error::UnderdeterminedFit {
            points: points.len(),
            params,
        });
    }
    let offset = match intercept {
        Intercept::Fixed(c) => c,
        Intercept::Free => T::zero(),
    };
    let rows: Vec<Vec<T>> = points
        .iter()
        .map(|&[x, _]| {
            let mut r: Vec<T> = terms.iter().map(|&(p, s)| T::lit(f64::from(s)) * x.powi(p)).collect();
            if free {
                r.push(T::one());
            }
            r
        })
        .collect();
    let rhs: Vec<T> = points.iter().map(|&[_, y]| y - offset).collect();
    let ls = least_squares(&rows, &rhs)?;

    let (intercept, intercept_std_error) = if free {
        (ls.coefficients[terms.len()], ls.std_errors[terms.len()])
    } else {
        (offset, T::zero())
    };
    let coefficients = model
        .coefficient_names()
        .iter()
        .zip(ls.coefficients.iter().zip(&ls.std_errors))
        .map(|(name, (&value, &std_error))| FitCoefficient {
            name: (*name).to_string(),
            value,
            std_error,
        })
        .collect();
    let mut result = FitResult {
        model,
        intercept,
        intercept_free: free,
        intercept_std_error,
        coefficients,
        residual_norm: T::zero(),
        max_residual: T::zero(),
        points: points.to_vec(),
    };
    let res = result.residuals();
    result.residual_norm = res.iter().map(|r| *r * *r).fold(T::zero(), |a, b| a + b).sqrt();
    result.max_residual = res.iter().map(|r| r.abs()).fold(T::zero(), T::max);
    Ok(result)
}

/// Slope of `F* = 1 + s·(Ωτ* − Ωτ*₁)` implied by the two linear laws,
/// `s = F2 / τ2`.
pub fn f_of_tau_relation<T: Real>(f_fit: &FitResult<T>, tau_fit: &FitResult<T>) -> Result<T> {
    if f_fit.model != FitModel::FLinear || tau_fit.model != FitModel::TauLinear {
        return Err(Error::ModelMismatch(format!(
            "need f-linear and tau-linear fits, got {} and {}",
            f_fit.model, tau_fit.model
        )));
    }
    let f2 = f_fit.coefficients[0].value;
    let tau2 = tau_fit.coefficients[0].value;
    if f2.is_zero() {
        return Ok(T::zero());
    }
    if tau2.is_zero() {
        return Err(Error::ModelMismatch("tau2 vanishes; slope undefined".into()));
    }
    Ok(f2 / tau2)
}
