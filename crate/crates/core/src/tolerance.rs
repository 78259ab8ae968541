//! Named numerical tolerances. Values are stated for `f64`; the
//! [`Real::tol`](crate::Real::tol) mapping widens them for `f32`.

/// Precondition check for Hermitian inputs.
pub const HERMITIAN_PRECHECK: f64 = 1e-10;

/// Postcondition checks on decompositions and exponentials.
pub const POSTCHECK: f64 = 1e-12;

/// Loop closure and arc continuity on the parameter sphere.
pub const GEOMETRY: f64 = 1e-9;

/// Density-matrix Hermiticity and trace validation.
pub const DENSITY: f64 = 1e-10;

/// Trace drift beyond which an integration is deemed under-resolved.
pub const TRACE_DRIFT: f64 = 1e-6;

/// Negative eigenvalue floor for numerically evolved density matrices.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

/// Jacobi sweeps stop once the off-diagonal mass drops below this fraction
/// of the matrix norm.
pub const JACOBI_CONVERGENCE: f64 = 1e-15;
