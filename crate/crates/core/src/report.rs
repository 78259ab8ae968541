//! Text formats shared by the library and the runner.

use serde::{Deserialize, Serialize};

use crate::linalg::ComplexMatrix;
use crate::scalar::Real;

/// C-style `%.{sig}g`: `sig` significant digits, trailing zeros dropped,
/// scientific notation below `1e-4` or at `10^sig` and above.
pub fn format_sig(x: f64, sig: usize) -> String {
    let sig = sig.max(1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // The exponent after rounding decides the style.
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Square complex matrix as `2·N²` reals, row-major, re/im interleaved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleavedMatrix {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl InterleavedMatrix {
    pub fn from_matrix<T: Real, const N: usize>(m: &ComplexMatrix<T, N>) -> Self {
        Self {
            dim: N,
            values: m.to_interleaved().into_iter().map(Real::as_f64).collect(),
        }
    }

    pub fn to_matrix<const N: usize>(&self) -> Option<ComplexMatrix<f64, N>> {
        if self.dim != N {
            return None;
        }
        ComplexMatrix::from_interleaved(&self.values)
    }
}
