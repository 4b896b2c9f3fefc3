//! Experiment configuration: a TOML file describing the scene, wave list,
//! aperture, sampling grid, imaging options, solver selection, optional
//! noise, optional cross-sections, and identity-check parameters.
//!
//! Unknown fields are rejected so that typos fail loudly. The canonical
//! digest is the SHA-256 of the resolved configuration (after command-line
//! overrides), serialized as JSON; it changes iff any field changes.

use nalgebra::Vector2;
use rtm2d_core::forward::{Scene, SceneBody, SolverKind, SolverSelection};
use rtm2d_core::geometry::{
    make_aperture, Aperture, BoundaryCondition, ParametricBoundary, SamplingGrid,
};
use rtm2d_core::green::WaveConfig;
use rtm2d_core::rtm::{Axis, KernelVariant};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: String,
    pub wave: WaveSection,
    pub aperture: ApertureSection,
    #[serde(default, rename = "body")]
    pub bodies: Vec<BodySection>,
    pub grid: GridSection,
    pub imaging: ImagingSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub noise: Option<NoiseSection>,
    #[serde(default, rename = "cross_section")]
    pub cross_sections: Vec<CrossSectionSection>,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSection {
    pub wavelengths: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApertureSection {
    pub sources: usize,
    pub receivers: usize,
    pub source_radius: f64,
    pub receiver_radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySection {
    pub shape: ParametricBoundary,
    pub boundary: BoundaryCondition,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Polarization: the shorthand axis names or an explicit vector
/// (normalized on load).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationSpec {
    Named(String),
    Vector([f64; 2]),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagingSection {
    pub polarizations: Vec<PolarizationSpec>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelVariant,
}

fn default_kernel() -> KernelVariant {
    KernelVariant::PointSource
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_method")]
    pub method: SolverKind,
    #[serde(default = "default_ppw")]
    pub points_per_wavelength: f64,
}

fn default_method() -> SolverKind {
    SolverKind::Auto
}

fn default_ppw() -> f64 {
    16.0
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: default_method(),
            points_per_wavelength: default_ppw(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub mu: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionSection {
    pub axis: Axis,
    pub offset: f64,
}

/// Identity-check parameters with spec-pinned defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub ring_radius_wavelengths: f64,
    pub ring_points: usize,
    pub pairs: usize,
    pub exact_tolerance: f64,
    pub farfield_radius_wavelengths: f64,
    pub farfield_points: usize,
    pub exponent_window: [f64; 2],
    pub energy_radius_wavelengths: f64,
    pub energy_points: usize,
    pub energy_tolerance: f64,
    pub reciprocity_tolerance: f64,
    pub consistency_min_correlation: f64,
    pub consistency_samples: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self {
            ring_radius_wavelengths: 5.0,
            ring_points: 512,
            pairs: 20,
            exact_tolerance: 1e-10,
            farfield_radius_wavelengths: 100.0,
            farfield_points: 1024,
            exponent_window: [
                rtm2d_core::verify::FARFIELD_EXPONENT_WINDOW.0,
                rtm2d_core::verify::FARFIELD_EXPONENT_WINDOW.1,
            ],
            energy_radius_wavelengths: 100.0,
            energy_points: 512,
            energy_tolerance: 1e-8,
            reciprocity_tolerance: 1e-6,
            consistency_min_correlation: 0.95,
            consistency_samples: 50,
        }
    }
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: Self = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: String| CliError::Config(m);
        if self.wave.wavelengths.is_empty() {
            return Err(cfg("wave.wavelengths must not be empty".to_string()));
        }
        for (i, l) in self.wave.wavelengths.iter().enumerate() {
            if !(l.is_finite() && *l > 0.0) {
                return Err(cfg(format!("wavelength #{i} must be positive, got {l}")));
            }
            if self.wave.wavelengths[..i].iter().any(|m| m == l) {
                return Err(cfg(format!("duplicate wavelength {l}")));
            }
        }
        self.aperture()?;
        let grid = self.sampling_grid()?;
        let scene = self.scene()?;
        for body in &scene.bodies {
            body.boundary
                .validate()
                .and_then(|_| body.bc.validate_scene())
                .map_err(|e| cfg(e.to_string()))?;
        }
        let rmin = self
            .aperture
            .source_radius
            .min(self.aperture.receiver_radius);
        if grid.circumradius() >= rmin {
            return Err(cfg(format!(
                "grid circumradius {:.3} must lie strictly inside both aperture rings (min radius {rmin})",
                grid.circumradius()
            )));
        }
        self.polarizations()?;
        if let Some(noise) = &self.noise {
            if !(noise.mu >= 0.0 && noise.mu.is_finite()) {
                return Err(cfg(format!("noise.mu must be >= 0, got {}", noise.mu)));
            }
        }
        if self.solver.points_per_wavelength <= 0.0 {
            return Err(cfg(
                "solver.points_per_wavelength must be positive".to_string()
            ));
        }
        for cs in &self.cross_sections {
            let (lo, hi) = match cs.axis {
                Axis::X1 => (grid.ymin, grid.ymax),
                Axis::X2 => (grid.xmin, grid.xmax),
            };
            if cs.offset < lo || cs.offset > hi {
                return Err(cfg(format!(
                    "cross-section offset {} outside grid range [{lo}, {hi}]",
                    cs.offset
                )));
            }
        }
        if self.verify.pairs == 0 || self.verify.ring_points < 8 || self.verify.farfield_points < 8
        {
            return Err(cfg("verify section has degenerate parameters".to_string()));
        }
        Ok(())
    }

    pub fn waves(&self) -> Result<Vec<WaveConfig>, CliError> {
        self.wave
            .wavelengths
            .iter()
            .map(|l| WaveConfig::from_wavelength(*l).map_err(|e| CliError::Config(e.to_string())))
            .collect()
    }

    pub fn aperture(&self) -> Result<Aperture, CliError> {
        make_aperture(
            self.aperture.sources,
            self.aperture.source_radius,
            self.aperture.receivers,
            self.aperture.receiver_radius,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn sampling_grid(&self) -> Result<SamplingGrid, CliError> {
        SamplingGrid::new(
            self.grid.xmin,
            self.grid.xmax,
            self.grid.ymin,
            self.grid.ymax,
            self.grid.nx,
            self.grid.ny,
        )
        .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn scene(&self) -> Result<Scene, CliError> {
        Ok(Scene {
            bodies: self
                .bodies
                .iter()
                .map(|b| SceneBody {
                    boundary: b.shape.clone(),
                    bc: b.boundary.clone(),
                })
                .collect(),
        })
    }

    pub fn polarizations(&self) -> Result<Vec<Vector2<f64>>, CliError> {
        if self.imaging.polarizations.is_empty() {
            return Err(CliError::Config(
                "imaging.polarizations must not be empty".to_string(),
            ));
        }
        self.imaging
            .polarizations
            .iter()
            .map(|spec| match spec {
                PolarizationSpec::Named(name) => match name.as_str() {
                    "e1" => Ok(Vector2::new(1.0, 0.0)),
                    "e2" => Ok(Vector2::new(0.0, 1.0)),
                    other => Err(CliError::Config(format!(
                        "unknown polarization name {other:?}; use \"e1\", \"e2\" or a vector"
                    ))),
                },
                PolarizationSpec::Vector(v) => {
                    let vec = Vector2::new(v[0], v[1]);
                    let n = vec.norm();
                    if n == 0.0 || !n.is_finite() {
                        Err(CliError::Config(
                            "polarization vector must be nonzero".to_string(),
                        ))
                    } else {
                        Ok(vec / n)
                    }
                }
            })
            .collect()
    }

    pub fn solver_selection(&self) -> SolverSelection {
        SolverSelection {
            kind: self.solver.method,
            points_per_wavelength: self.solver.points_per_wavelength,
        }
    }

    /// Canonical digest of the resolved configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
