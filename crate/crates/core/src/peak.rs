//! Optimal-working-point search: coarse scan, golden-section refinement,
//! parabolic polish.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{bloch_states, mean_fidelity_over};
use crate::open_system::NoiseModel;
use crate::path::LoopFamily;
use crate::scalar::Real;

/// Search window as multiples of the family's first revival `Ωτ*₁`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
pub struct PeakWindow<T> {
    pub lower: T,
    pub upper: T,
    pub coarse_points: usize,
    /// Final bracket width in `Ωτ`.
    pub tolerance: T,
}

impl<T: Real> Default for PeakWindow<T> {
    fn default() -> Self {
        Self {
            lower: T::lit(0.7),
            upper: T::lit(1.3),
            coarse_points: 45,
            tolerance: T::lit(1e-4),
        }
    }
}

impl<T: Real> PeakWindow<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower > T::zero() && self.upper > self.lower) {
            return Err(Error::InvalidGrid(format!(
                "peak window [{}, {}] must satisfy 0 < lower < upper",
                self.lower, self.upper
            )));
        }
        if self.coarse_points < 3 {
            return Err(Error::InvalidGrid("peak window needs at least 3 coarse points".into()));
        }
        if !(self.tolerance.is_finite() && self.tolerance > T::zero()) {
            return Err(Error::InvalidGrid("peak tolerance must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Maximum<T> {
    pub x: T,
    pub value: T,
    /// Coarse-grid neighbours of the best sample.
    pub bracket: [T; 2],
    pub evaluations: usize,
}

/// Maximizes `f` on `[lo, hi]`. The coarse scan runs in parallel; the best
/// sample must be interior and the scan must not be flat.
pub fn maximize_in_window<T, F>(f: F, lo: T, hi: T, coarse_points: usize, tolerance: T) -> Result<Maximum<T>>
where
    T: Real,
    F: Fn(T) -> Result<T> + Sync,
{
    let no_peak = || Error::NoPeakInWindow {
        lo: lo.as_f64(),
        hi: hi.as_f64(),
    };
    if !(hi > lo) || coarse_points < 3 {
        return Err(no_peak());
    }
    let last = T::lit((coarse_points - 1) as f64);
    let xs: Vec<T> = (0..coarse_points)
        .map(|i| lo + (hi - lo) * T::lit(i as f64) / last)
        .collect();
    let ys: Vec<T> = xs.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;

    let (best, _) = ys
        .iter()
        .enumerate()
        .fold((0, T::neg_infinity()), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    let (lo_v, hi_v) = ys.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| (a.min(v), b.max(v)));
    let flat = T::tol(1e-12) * hi_v.abs().max(T::one());
    if best == 0 || best == coarse_points - 1 || hi_v - lo_v <= flat {
        return Err(no_peak());
    }

    let bracket = [xs[best - 1], xs[best + 1]];
    let mut evaluated: Vec<(T, T)> = vec![(xs[best - 1], ys[best - 1]), (xs[best], ys[best]), (xs[best + 1], ys[best + 1])];
    let mut evaluations = coarse_points;

    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let (mut a, mut b) = (bracket[0], bracket[1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    evaluations += 2;
    evaluated.push((c, fc));
    evaluated.push((d, fd));
    while b - a > tolerance {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
            evaluated.push((c, fc));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
            evaluated.push((d, fd));
        }
        evaluations += 1;
    }

    // Parabola through the best evaluated point and its nearest evaluated
    // neighbours on either side.
    let (mut bx, mut bv) = evaluated
        .iter()
        .copied()
        .fold((xs[best], T::neg_infinity()), |acc, p| if p.1 > acc.1 { p } else { acc });
    let left = evaluated.iter().copied().filter(|p| p.0 < bx).fold(None, |acc: Option<(T, T)>, p| match acc {
        Some(q) if q.0 >= p.0 => Some(q),
        _ => Some(p),
    });
    let right = evaluated.iter().copied().filter(|p| p.0 > bx).fold(None, |acc: Option<(T, T)>, p| match acc {
        Some(q) if q.0 <= p.0 => Some(q),
        _ => Some(p),
    });
    if let (Some((x0, y0)), Some((x2, y2))) = (left, right) {
        let (x1, y1) = (bx, bv);
        let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
        let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if den != T::zero() {
            let xv = x1 - T::lit(0.5) * num / den;
            if xv > x0 && xv < x2 && xv.is_finite() {
                let yv = f(xv)?;
                evaluations += 1;
                if yv > bv {
                    bx = xv;
                    bv = yv;
                }
            }
        }
    }

    Ok(Maximum {
        x: bx,
        value: bv,
        bracket,
        evaluations,
    })
}

/// Coordinates of the first fidelity revival under noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct OptimalPoint<T> {
    pub lambda_sq: T,
    pub omega_tau_star: T,
    pub tau_star: T,
    pub f_star: T,
    /// Coarse bracket in `Ωτ`.
    pub bracket: [T; 2],
    pub tolerance: T,
    pub evaluations: usize,
}

/// Peak search for one noise model. `window` is relative to `Ωτ*₁`.
pub fn find_optimal_point<T: Real>(
    family: LoopFamily,
    omega: T,
    noise: &NoiseModel<T>,
    states: usize,
    steps: usize,
    window: &PeakWindow<T>,
) -> Result<OptimalPoint<T>> {
    noise.validate()?;
    window.validate()?;
    let inputs = bloch_states(states)?;
    let centre = family.revival_time(1, T::one())?;
    let m = maximize_in_window(
        |x| {
            let spec = family.build(omega, x / omega)?;
            mean_fidelity_over(&spec, noise, &inputs, steps)
        },
        window.lower * centre,
        window.upper * centre,
        window.coarse_points,
        window.tolerance,
    )?;
    Ok(OptimalPoint {
        lambda_sq: noise.lambda_sq,
        omega_tau_star: m.x,
        tau_star: m.x / omega,
        f_star: m.value,
        bracket: m.bracket,
        tolerance: window.tolerance,
        evaluations: m.evaluations,
    })
}
