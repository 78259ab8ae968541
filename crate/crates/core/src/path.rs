//! Closed control paths on the parameter sphere built from geodesic arcs:
//! meridians (θ varies at fixed φ) and the equator (φ varies at θ = π/2).
//!
//! Each arc is traversed at constant angular speed, so the transport
//! generator is constant along it.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tolerance;
use crate::tripod::SphericalPoint;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcKind {
    Meridian,
    Equator,
}

/// One geodesic arc. `fixed_angle` is the azimuth φ of a meridian; for the
/// equator it is the polar angle and must be π/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment<T> {
    pub kind: ArcKind,
    pub fixed_angle: T,
    pub start_angle: T,
    pub end_angle: T,
    pub duration: T,
}

/// Angles and angular rates at one instant of a loop.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathSample<T> {
    pub theta: T,
    pub phi: T,
    pub theta_dot: T,
    pub phi_dot: T,
}

impl<T: Real> ArcSegment<T> {
    pub fn meridian(phi: T, theta_start: T, theta_end: T, duration: T) -> Self {
        Self {
            kind: ArcKind::Meridian,
            fixed_angle: phi,
            start_angle: theta_start,
            end_angle: theta_end,
            duration,
        }
    }

    pub fn equator(phi_start: T, phi_end: T, duration: T) -> Self {
        Self {
            kind: ArcKind::Equator,
            fixed_angle: T::FRAC_PI_2(),
            start_angle: phi_start,
            end_angle: phi_end,
            duration,
        }
    }

    pub fn angular_length(&self) -> T {
        (self.end_angle - self.start_angle).abs()
    }

    pub fn angular_speed(&self) -> T {
        (self.end_angle - self.start_angle) / self.duration
    }

    /// Sample at local time `s ∈ [0, duration]`.
    pub fn sample(&self, s: T) -> PathSample<T> {
        let rate = self.angular_speed();
        let moving = self.start_angle + rate * s;
        match self.kind {
            ArcKind::Meridian => PathSample {
                theta: moving,
                phi: self.fixed_angle,
                theta_dot: rate,
                phi_dot: T::zero(),
            },
            ArcKind::Equator => PathSample {
                theta: self.fixed_angle,
                phi: moving,
                theta_dot: T::zero(),
                phi_dot: rate,
            },
        }
    }

    /// `(θ, φ)` at the start and end of the arc.
    pub fn endpoints(&self) -> ((T, T), (T, T)) {
        let a = self.sample(T::zero());
        let b = match self.kind {
            ArcKind::Meridian => (self.end_angle, self.fixed_angle),
            ArcKind::Equator => (self.fixed_angle, self.end_angle),
        };
        ((a.theta, a.phi), b)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.fixed_angle, self.start_angle, self.end_angle]
            .iter()
            .all(|a| a.is_finite());
        if !finite {
            return Err(Error::InvalidLoop("non-finite arc angle".into()));
        }
        if !(self.duration.is_finite() && self.duration > T::zero()) {
            return Err(Error::InvalidDuration(format!(
                "arc duration {} must be positive",
                self.duration
            )));
        }
        if self.kind == ArcKind::Equator
            && (self.fixed_angle - T::FRAC_PI_2()).abs() > T::tol(tolerance::GEOMETRY)
        {
            return Err(Error::InvalidLoop("equator arc must sit at θ = π/2".into()));
        }
        if self.kind == ArcKind::Meridian {
            let slack = T::tol(tolerance::GEOMETRY);
            for th in [self.start_angle, self.end_angle] {
                if th < -slack || th > T::PI() + slack {
                    return Err(Error::InvalidLoop(format!("meridian angle {th} outside [0, π]")));
                }
            }
        }
        Ok(())
    }
}

/// Closed loop: an ordered list of arcs driven at fixed `Ω`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LoopSpecRaw<T>", into = "LoopSpecRaw<T>")]
#[serde(bound = "T: Real")]
pub struct LoopSpec<T> {
    omega_scale: T,
    arcs: Vec<ArcSegment<T>>,
    total_time: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Real")]
struct LoopSpecRaw<T> {
    omega_scale: T,
    arcs: Vec<ArcSegment<T>>,
    #[serde(default)]
    total_time: Option<T>,
}

impl<T: Real> TryFrom<LoopSpecRaw<T>> for LoopSpec<T> {
    type Error = Error;

    fn try_from(raw: LoopSpecRaw<T>) -> Result<Self> {
        let spec = LoopSpec::new(raw.omega_scale, raw.arcs)?;
        if let Some(t) = raw.total_time {
            if (t - spec.total_time).abs() > T::tol(1e-9) * spec.total_time.max(T::one()) {
                return Err(Error::InvalidLoop(format!(
                    "total_time {t} disagrees with arc durations ({})",
                    spec.total_time
                )));
            }
        }
        Ok(spec)
    }
}

impl<T: Real> From<LoopSpec<T>> for LoopSpecRaw<T> {
    fn from(spec: LoopSpec<T>) -> Self {
        Self {
            omega_scale: spec.omega_scale,
            arcs: spec.arcs,
            total_time: Some(spec.total_time),
        }
    }
}

fn unit_vector<T: Real>(theta: T, phi: T) -> [T; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

impl<T: Real> LoopSpec<T> {
    /// Validates arc continuity (in `(θ, φ)`, so the analytic frame is
    /// continuous) and closure (on the sphere).
    pub fn new(omega_scale: T, arcs: Vec<ArcSegment<T>>) -> Result<Self> {
        if !(omega_scale.is_finite() && omega_scale > T::zero()) {
            return Err(Error::InvalidLoop(format!("omega {omega_scale} must be positive")));
        }
        if arcs.is_empty() {
            return Err(Error::InvalidLoop("no arcs".into()));
        }
        for a in &arcs {
            a.validate()?;
        }
        let tol = T::tol(tolerance::GEOMETRY);
        for (i, pair) in arcs.windows(2).enumerate() {
            let (_, end) = pair[0].endpoints();
            let (start, _) = pair[1].endpoints();
            if (end.0 - start.0).abs() > tol || (end.1 - start.1).abs() > tol {
                return Err(Error::InvalidLoop(format!("arcs {i} and {} do not connect", i + 1)));
            }
        }
        let (first, _) = arcs[0].endpoints();
        let (_, last) = arcs[arcs.len() - 1].endpoints();
        let a = unit_vector(first.0, first.1);
        let b = unit_vector(last.0, last.1);
        let gap = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| (*x - *y) * (*x - *y))
            .sum::<T>()
            .sqrt();
        if gap > tol {
            return Err(Error::InvalidLoop(format!("loop not closed (gap {gap})")));
        }
        let total_time = arcs.iter().map(|a| a.duration).sum();
        Ok(Self {
            omega_scale,
            arcs,
            total_time,
        })
    }

    pub fn omega_scale(&self) -> T {
        self.omega_scale
    }

    pub fn arcs(&self) -> &[ArcSegment<T>] {
        &self.arcs
    }

    pub fn total_time(&self) -> T {
        self.total_time
    }

    pub fn arc(&self, index: usize) -> Result<&ArcSegment<T>> {
        self.arcs.get(index).ok_or(Error::IndexOutOfRange {
            index,
            len: self.arcs.len(),
        })
    }

    /// Start time of each arc.
    pub fn arc_start_times(&self) -> Vec<T> {
        let mut t = T::zero();
        self.arcs
            .iter()
            .map(|a| {
                let s = t;
                t = t + a.duration;
                s
            })
            .collect()
    }

    pub fn start_point(&self) -> SphericalPoint<T> {
        let s = self.arcs[0].sample(T::zero());
        SphericalPoint {
            theta: s.theta,
            phi: s.phi,
            omega: self.omega_scale,
        }
    }

    /// Point on the sphere at local time `s` of arc `index`.
    pub fn arc_point(&self, index: usize, s: T) -> Result<(SphericalPoint<T>, PathSample<T>)> {
        let arc = self.arc(index)?;
        let smp = arc.sample(s);
        Ok((
            SphericalPoint {
                theta: smp.theta,
                phi: smp.phi,
                omega: self.omega_scale,
            },
            smp,
        ))
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Result<Self> {
        let arcs = self
            .arcs
            .iter()
            .rev()
            .map(|a| ArcSegment {
                start_angle: a.end_angle,
                end_angle: a.start_angle,
                ..*a
            })
            .collect();
        Self::new(self.omega_scale, arcs)
    }

    /// Same geometry with all durations rescaled to a new total time.
    pub fn with_total_time(&self, tau: T) -> Result<Self> {
        if !(tau.is_finite() && tau > T::zero()) {
            return Err(Error::InvalidDuration(format!("total time {tau} must be positive")));
        }
        let k = tau / self.total_time;
        let arcs = self
            .arcs
            .iter()
            .map(|a| ArcSegment {
                duration: a.duration * k,
                ..*a
            })
            .collect();
        Self::new(self.omega_scale, arcs)
    }

    /// Pole → equator meridian, equator arc, equator → pole meridian.
    pub fn is_pole_triangle(&self) -> bool {
        let tol = T::tol(tolerance::GEOMETRY);
        let half = T::FRAC_PI_2();
        match self.arcs.as_slice() {
            [a, b, c] => {
                a.kind == ArcKind::Meridian
                    && b.kind == ArcKind::Equator
                    && c.kind == ArcKind::Meridian
                    && a.start_angle.abs() <= tol
                    && (a.end_angle - half).abs() <= tol
                    && (c.start_angle - half).abs() <= tol
                    && c.end_angle.abs() <= tol
            }
            _ => false,
        }
    }

    /// Signed solid angle enclosed by a pole triangle: its equatorial
    /// opening `Δφ`.
    pub fn solid_angle(&self) -> Result<T> {
        if !self.is_pole_triangle() {
            return Err(Error::UnsupportedLoop);
        }
        let eq = &self.arcs[1];
        Ok(eq.end_angle - eq.start_angle)
    }
}

/// Loop with durations proportional to the arc angular lengths of the
/// pole triangle opening `π/(2n)`; `n = 1` is the NOT loop.
pub fn wedge_loop<T: Real>(n: u32, omega: T, tau: T) -> Result<LoopSpec<T>> {
    if n < 1 {
        return Err(Error::InvalidOrder(i64::from(n)));
    }
    if !(tau.is_finite() && tau > T::zero()) {
        return Err(Error::InvalidDuration(format!("total time {tau} must be positive")));
    }
    let half = T::FRAC_PI_2();
    let opening = half / T::lit(f64::from(n));
    let total_angle = half + opening + half;
    let speed = total_angle / tau;
    LoopSpec::new(
        omega,
        vec![
            ArcSegment::meridian(T::zero(), T::zero(), half, half / speed),
            ArcSegment::equator(T::zero(), opening, opening / speed),
            ArcSegment::meridian(opening, half, T::zero(), half / speed),
        ],
    )
}

/// NOT loop: pole → `(π/2, 0)` → `(π/2, π/2)` → pole in equal thirds.
pub fn standard_not_loop<T: Real>(omega: T, tau: T) -> Result<LoopSpec<T>> {
    wedge_loop(1, omega, tau)
}

/// Pole triangle with an arbitrary equatorial opening and per-arc
/// durations. Starts at the pole with azimuth `phi_start`.
pub fn pole_triangle<T: Real>(omega: T, phi_start: T, opening: T, durations: [T; 3]) -> Result<LoopSpec<T>> {
    let half = T::FRAC_PI_2();
    let phi_end = phi_start + opening;
    LoopSpec::new(
        omega,
        vec![
            ArcSegment::meridian(phi_start, T::zero(), half, durations[0]),
            ArcSegment::equator(phi_start, phi_end, durations[1]),
            ArcSegment::meridian(phi_end, half, T::zero(), durations[2]),
        ],
    )
}

/// Angles and rates at time `t ∈ [0, τ]`. Arc boundaries belong to the
/// later arc, except `t = τ`.
pub fn angles_at<T: Real>(spec: &LoopSpec<T>, t: T) -> Result<PathSample<T>> {
    let total = spec.total_time();
    // Summed durations can land an ulp away from the nominal end time.
    let slack = total * T::epsilon() * T::lit(8.0);
    if !(t >= T::zero() && t <= total + slack) {
        return Err(Error::TimeOutOfRange {
            t: t.as_f64(),
            total: total.as_f64(),
        });
    }
    let starts = spec.arc_start_times();
    let last = spec.arcs().len() - 1;
    let t = t.min(total);
    let idx = starts.iter().rposition(|&s| s <= t).unwrap_or(0).min(last);
    let local = (t - starts[idx]).min(spec.arcs()[idx].duration);
    Ok(spec.arcs()[idx].sample(local))
}

/// Closed-form revival time `τ*_k(n) = ((2n+1)π / 2nΩ)·√(16k²n² − 1)`.
pub fn optimal_time<T: Real>(k: u32, n: u32, omega: T) -> Result<T> {
    if k < 1 {
        return Err(Error::InvalidOrder(i64::from(k)));
    }
    if n < 1 {
        return Err(Error::InvalidOrder(i64::from(n)));
    }
    let kf = T::lit(f64::from(k));
    let nf = T::lit(f64::from(n));
    let two = T::lit(2.0);
    let prefactor = (two * nf + T::one()) * T::PI() / (two * nf * omega);
    Ok(prefactor * (T::lit(16.0) * kf * kf * nf * nf - T::one()).sqrt())
}

/// Family of pole-triangle loops, parametrized by total time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LoopFamily {
    Standard,
    Wedge(u32),
}

impl LoopFamily {
    pub fn order(self) -> u32 {
        match self {
            LoopFamily::Standard => 1,
            LoopFamily::Wedge(n) => n,
        }
    }

    pub fn build<T: Real>(self, omega: T, tau: T) -> Result<LoopSpec<T>> {
        wedge_loop(self.order(), omega, tau)
    }

    /// `τ*_k` for this family.
    pub fn revival_time<T: Real>(self, k: u32, omega: T) -> Result<T> {
        optimal_time(k, self.order(), omega)
    }
}

impl fmt::Display for LoopFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoopFamily::Standard => write!(f, "standard"),
            LoopFamily::Wedge(n) => write!(f, "wedge:{n}"),
        }
    }
}

impl FromStr for LoopFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "standard" {
            return Ok(LoopFamily::Standard);
        }
        let n = s
            .strip_prefix("wedge:")
            .ok_or_else(|| Error::InvalidLoop(format!("unknown loop '{s}' (expected standard or wedge:n)")))?;
        let n: u32 = n
            .parse()
            .map_err(|_| Error::InvalidLoop(format!("bad wedge order in '{s}'")))?;
        if n < 1 {
            return Err(Error::InvalidOrder(0));
        }
        Ok(LoopFamily::Wedge(n))
    }
}

impl Serialize for LoopFamily {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LoopFamily {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
