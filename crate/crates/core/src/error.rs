use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModeError {
    #[error("invalid beam geometry: {0}")]
    InvalidGeometry(&'static str),
    #[error(
        "insufficient quadrature resolution: {points} points per axis, half-width {half_width_in_widths:.3} w(z) \
         (need >= 512 points and >= 3 w(z))"
    )]
    InsufficientResolution { points: usize, half_width_in_widths: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("state norm {norm} deviates from 1 by more than 1e-9")]
    NotNormalized { norm: f64 },
    #[error("state has non-finite amplitudes")]
    NonFinite,
    #[error("epsilon {0} outside [0, 1]")]
    EpsilonOutOfRange(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElementError {
    #[error("retardation {0} rad outside [0, 2π)")]
    RetardationOutOfRange(f64),
    #[error("orientation {0} is not finite")]
    NonFiniteOrientation(f64),
    #[error("state annihilated by filter at element {index}")]
    StateAnnihilated { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum So3Error {
    #[error(
        "not maximally nonseparable (concurrence {concurrence}); SO(3) representation undefined"
    )]
    NotMaximallyNonseparable { concurrence: f64 },
    #[error("element {index} is a polarization filter; trajectories require unitary elements")]
    NonUnitaryElement { index: usize },
    #[error("invalid SO(3) point: {0}")]
    InvalidPoint(String),
    #[error("samples_per_element must be at least {min}, got {got}")]
    TooFewSamples { got: usize, min: usize },
    #[error(
        "trajectory not cyclic (final state differs from ±initial by {distance:.3e}); \
         topological phase undefined as a discrete invariant"
    )]
    NotCyclic { distance: f64 },
    #[error(transparent)]
    Element(#[from] ElementError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InterferenceError {
    #[error("invalid interference configuration: {0}")]
    InvalidConfig(String),
    #[error("ring of radius {radius} lies outside the image (usable radius {limit})")]
    RingOutsideImage { radius: f64, limit: f64 },
    #[error("intensity on the sampling ring is identically zero")]
    ZeroRing,
    #[error("singularity polarity defined only for closed-trajectory settings (θ = ±45°), got θ = {0}°")]
    PolarityUndefined(f64),
    #[error("core bracket {bracket:.6} is neither bright (>= 1.5) nor dark (<= 0.5); polarity indeterminate")]
    PolarityIndeterminate { bracket: f64 },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Element(#[from] ElementError),
}
