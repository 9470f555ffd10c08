//! Error type shared by the whole crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The chart stopped being an immersion: the Gram determinant
    /// `EG - F^2` of the first fundamental form is not positive.
    #[error("degenerate jet at (u = {u:.6}, v = {v:.6}): EG - F^2 = {gram:.3e} <= 0")]
    DegenerateJet { u: f64, v: f64, gram: f64 },

    /// The quadratic direction equation has no real root pair:
    /// `f^2 - eg <= 0`, so the point carries no asymptotic directions.
    #[error("non-hyperbolic point: f^2 - eg = {disc:.3e} <= 0")]
    NonHyperbolic { disc: f64 },

    /// An integrated line ran out of the hyperbolic region. Carries the
    /// last accepted state of the integration.
    #[error(
        "trajectory left the hyperbolic region at t = {t:.6}, w = {w:.6} (f^2 - eg = {disc:.3e})"
    )]
    LeftHyperbolic { t: f64, w: f64, disc: f64 },

    /// `f = 0` makes the stable-root sign choice ambiguous; the caller is
    /// outside the regime where one branch varies continuously.
    #[error("branch selection ambiguous: f = 0 at the evaluated point")]
    BranchAmbiguous,

    /// The adaptive integrator would need a step below `min_step`.
    #[error("adaptive step underflow at t = {t:.6}: step {step:.3e} < min_step {min_step:.3e}")]
    StepUnderflow { t: f64, step: f64, min_step: f64 },

    /// Stereographic projection evaluated too close to the pole.
    #[error("stereographic projection near the pole: 1 - x4 = {margin:.3e}")]
    PoleSingularity { margin: f64 },

    /// `|eps|` exceeds the immersion guard for jet evaluation.
    #[error(
        "eps = {eps} exceeds the immersion guard {guard}; use the unguarded variant to override"
    )]
    EpsGuard { eps: f64, guard: f64 },

    /// Extrapolation ladder is unusable (too few rungs or rungs too close).
    #[error("ill-conditioned extrapolation ladder: {0}")]
    IllConditioned(String),

    /// A third-order perturbation derivative was requested but the field
    /// does not supply one.
    #[error("third-order perturbation derivatives unavailable; supply h_uuv and h_uvv")]
    MissingThirdDerivative,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
