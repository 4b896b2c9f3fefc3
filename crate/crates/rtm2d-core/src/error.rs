//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the numerical kernels and solvers.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside a function's mathematical domain.
    #[error("domain error in {func}: argument {arg} not allowed")]
    Domain { func: &'static str, arg: f64 },

    /// Kernel evaluated at coincident source and observation points.
    #[error("coincident points: kernel {func} is singular at |x - y| = 0")]
    Coincidence { func: &'static str },

    /// Intermediate cylinder-function value exceeded the floating-point range.
    #[error("cylinder function overflow at order {order}, argument {arg:.3e}")]
    SpecfunOverflow { order: u32, arg: f64 },

    /// Malformed boundary description.
    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    /// Boundary node count must be even and at least 8.
    #[error("invalid node count {0}: need an even count >= 8")]
    InvalidNodeCount(usize),

    /// Modal denominator vanished (degenerate wave number / radius pairing).
    #[error("singular modal configuration at order {order}: |denominator| = {denom:.3e}")]
    SingularMode { order: i32, denom: f64 },

    /// Too few samples to resolve the requested modal truncation.
    #[error("projection needs >= {required} circle samples for M_max, got {samples}")]
    InsufficientSamples { samples: usize, required: usize },

    /// Incident-field projection would alias: modal coefficients do not decay.
    #[error(
        "modal truncation too small: |a_{{±{m_max}}}| = {edge:.3e} vs max {max:.3e}; increase M_max"
    )]
    ModalAliasing { m_max: u32, edge: f64, max: f64 },

    /// Field evaluation requested inside the modal expansion's circle.
    #[error("evaluation point at radius {r:.6} lies inside the expansion circle of radius {rho}")]
    InsideExpansionCircle { r: f64, rho: f64 },

    /// Boundary-integral matrix is near-singular (interior resonance).
    #[error(
        "boundary integral system ill-conditioned (estimate {cond:.3e}); \
         the wave number is likely near an interior resonance, perturb k and retry"
    )]
    InteriorResonance { cond: f64 },

    /// Linear solve did not reach the required residual.
    #[error("linear solve residual {residual:.3e} exceeds {limit:.3e}")]
    SolveResidual { residual: f64, limit: f64 },

    /// Scene not supported by the selected solver.
    #[error("unsupported scene: {0}")]
    UnsupportedScene(String),

    /// Solver failure annotated with the (source, polarization) indices.
    #[error("forward solve failed at source {source_index}, polarization {polarization}: {inner}")]
    SourceSolve {
        source_index: usize,
        polarization: usize,
        inner: Box<Error>,
    },

    /// Source and receiver rings differ where they must coincide.
    #[error("aperture mismatch: {0}")]
    ApertureMismatch(String),

    /// Datasets stacked across frequencies must share scene and aperture.
    #[error("scene mismatch: {0}")]
    SceneMismatch(String),

    /// Requested cross-section offset lies outside the image grid.
    #[error("cross-section offset {offset} outside grid range [{lo}, {hi}]")]
    OffsetOutsideGrid { offset: f64, lo: f64, hi: f64 },

    /// Artifact file I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Artifact metadata (de)serialization failure.
    #[error("metadata error on {path}: {source}")]
    Metadata {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    /// Binary artifact does not match its sidecar.
    #[error("artifact format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
