//! Two-dimensional transverse-electric (TE) electromagnetic reverse-time-migration
//! imaging toolkit.
//!
//! The crate covers the full desk pipeline for imaging extended obstacles from
//! point-source/point-receiver scattering data:
//!
//! * [`specfun`] — real-argument cylinder functions (Bessel J/Y, Hankel H¹) for
//!   integer orders, the numerical bedrock of every kernel below.
//! * [`green`] — the 2D Helmholtz fundamental solution, its gradient/Hessian,
//!   the dyadic (electric-field) Green function and its imaginary part, and the
//!   TE dipole reduction.
//! * [`geometry`] — parametric scatterer boundaries, quadrature nodes and
//!   normals, source/receiver apertures, and sampling grids.
//! * [`forward`] — synthetic data generation: a modal (Mie) solver for circles,
//!   a Nyström boundary-integral solver for general smooth scenes, and seeded
//!   measurement noise.
//! * [`rtm`] — the cross-correlation imaging functionals (single/dual
//!   polarization, multi-frequency stacking) and cross-section extraction.
//! * [`verify`] — numerical identity checks: exact and far-field
//!   Helmholtz–Kirchhoff relations, energy flux, data reciprocity, and the
//!   image-vs-scattered-energy consistency test.
//! * [`io`] — binary + JSON-sidecar artifact formats for datasets and images.

pub mod error;
pub mod forward;
pub mod geometry;
pub mod green;
pub mod io;
pub mod rtm;
pub mod specfun;
pub mod verify;

pub use error::{Error, Result};

pub use forward::{IncidentField, NoiseRecord, ScatterDataSet, Scene, SceneBody, SolverSelection};
pub use geometry::{Aperture, BoundaryCondition, ParametricBoundary, SamplingGrid};
pub use green::{DyadicValue, WaveConfig};
pub use rtm::{CrossSection, ImageGrid, KernelVariant};
pub use verify::IdentityReport;

/// A point in the plane.
pub type Point = nalgebra::Vector2<f64>;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
