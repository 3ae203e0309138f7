//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A crack profile failed validation (`g(0) = 0`, `∇g(0) = 0`, dimension).
    #[error("invalid crack profile: {0}")]
    InvalidProfile(String),

    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Mesh construction failed.
    #[error("mesh construction: {0}")]
    Mesh(String),

    /// The requested grading cannot meet the 20° minimum-angle floor.
    #[error("minimum angle {found_deg:.2}° below the 20° floor")]
    MinAngle { found_deg: f64 },

    /// The reduced system `stiffness - mass_f` is not positive definite;
    /// the potential violates the smallness regime.
    #[error("system matrix is not positive definite (potential too strong for this radius)")]
    IndefiniteSystem,

    /// An iterative solver did not reach its tolerance.
    #[error("solver failed: {0}")]
    SolverFail(String),

    /// Too few mesh layers inside the requested radius for reliable quadrature.
    #[error("radius {radius} has only {layers} mesh layers inside (need {need})")]
    RadiusTooSmall { radius: f64, layers: usize, need: usize },

    /// `H(r) > 0` must hold for nontrivial solutions; the trivial solution is
    /// excluded by contract.
    #[error("H({radius}) = {value} is not positive; the field is trivial or the radius is degenerate")]
    HNotPositive { radius: f64, value: f64 },

    /// `2γ` is not close to an integer: under-resolved mesh or non-convergence.
    #[error("frequency limit {gamma} is not within 0.1/2 of a half-integer")]
    HalfIntegerMismatch { gamma: f64 },

    /// The extrapolated limit of `H(r)/r^{2γ}` came out non-positive.
    #[error("extrapolated limit of H(r)/r^(2γ) is {value}, expected > 0")]
    NonPositiveLimit { value: f64 },

    /// The gradient of an exact solution is direction-dependent at the tip.
    #[error("gradient of a crack harmonic with odd k is singular at the tip")]
    GradientSingular,

    /// A `1/|y|`-weighted quadrature met an under-resolved tip region.
    #[error("singular quadrature: only {layers} graded layers inside r = {radius} (need {need})")]
    SingularQuadrature { radius: f64, layers: usize, need: usize },

    /// The asymptotic coefficients varied too much across radii.
    #[error("alpha spread {spread:.3e} exceeds {limit:.0}% of |alpha| = {scale:.3e}")]
    SpreadTooLarge { spread: f64, scale: f64, limit: f64 },

    /// Rescaled-solution errors failed to decrease along the λ schedule.
    #[error("blow-up error increased at λ = {lambda}: {current:.3e} > {previous:.3e} × slack")]
    NonDecreasingError { lambda: f64, current: f64, previous: f64 },

    /// Two run directories hold different scenarios.
    #[error("scenario mismatch: {a} vs {b}")]
    ScenarioMismatch { a: String, b: String },

    /// A text artifact failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
