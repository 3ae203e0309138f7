//! Desk-scale numerics for second order elliptic problems at the tip of a
//! crack with homogeneous Neumann conditions on both crack sides.
//!
//! The library covers the full analytic pipeline for `-Δu = f u` on a ball
//! minus a crack surface:
//!
//! * [`geometry`] — the crack-straightening shear diffeomorphism and the
//!   coefficient fields `A`, `μ`, `β`, `dA` it induces, with the proved
//!   bounds (ellipticity, `½ ≤ μ ≤ 2`, `β(y) = y + O(|y|²)`) as testable
//!   invariants.
//! * [`slitmesh`] — conforming triangulations of a disk with a duplicated-edge
//!   slit (graded toward the tip) and of the unit sphere with a cut along the
//!   half-equator.
//! * [`fem`] — P1 assembly and solve of `-div(A∇U) = f̃ U` with natural
//!   conditions on the slit and Dirichlet data on the outer circle.
//! * [`exact`] — closed-form references on the slit disk: crack harmonics
//!   `r^{k/2} cos(kθ/2)` and Bessel modes `J_{k/2}(√λ r) cos(kθ/2)`.
//! * [`frequency`] — the height `H(r)`, energy `E(r)` and Almgren quotient
//!   `N(r) = E/H` from discrete fields, with monotonicity and growth audits
//!   and extrapolation of `γ = lim N(r)`.
//! * [`spectrum`] — the Neumann eigenproblem on the sphere with a cut:
//!   eigenvalues `μ_k = k(k+2N-4)/4` by formula, the closed-form circle basis,
//!   and a surface-FEM eigensolver validated against the formula.
//! * [`blowup`] — rescalings `W^λ = U(λ·)/√H(λ)`, Fourier coefficients
//!   `φ_{k,i}`, remainder functionals `Υ_{k,i}`, asymptotic coefficients
//!   `α_i`, and convergence checks for the blow-up limit.
//! * [`io`] — line-based text formats for meshes, fields, traces and
//!   eigenpairs with bit-exact round trips.
//!
//! All entry points are deterministic: identical inputs produce bit-identical
//! outputs on one machine, independent of thread count.

pub mod blowup;
pub mod error;
pub mod exact;
pub mod fem;
pub mod frequency;
pub mod geometry;
pub mod io;
pub mod quad;
pub mod slitmesh;
pub mod sparse;
pub mod spectrum;

pub use error::Error;

/// Shorthand result type used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Which side of the slit a point on the crack belongs to.
///
/// The angular convention is shared by every module: `θ ∈ [0, 2π]` measured
/// from the upper side of the slit, so `Upper` resolves `θ = 0` and `Lower`
/// resolves `θ = 2π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Upper,
    Lower,
}

impl Side {
    /// Angle on the slit under the shared branch convention.
    pub fn slit_angle(self) -> f64 {
        match self {
            Side::Upper => 0.0,
            Side::Lower => 2.0 * std::f64::consts::PI,
        }
    }
}
