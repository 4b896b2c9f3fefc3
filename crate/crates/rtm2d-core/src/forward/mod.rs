//! Synthetic scattering data: `E^s(x_r, x_s)` for every source, receiver and
//! polarization, via the modal solver (single circles) or the Nyström
//! boundary-integral solver (general smooth PEC/impedance scenes), plus the
//! seeded measurement-noise model.

pub mod mie;
pub mod nystrom;

pub use mie::{
    mie_eval_scattered, mie_project_incident, mie_solve, modal_truncation, projection_truncation,
    ModalProjection, ModalSolution,
};
pub use nystrom::{nystrom_solve, NystromOperator, NystromSystem};

use crate::error::{Error, Result};
use crate::geometry::{Aperture, BoundaryCondition, ParametricBoundary};
use crate::green::{self, WaveConfig};
use crate::{Point, C64};
use nalgebra::Vector2;
use rand::SeedableRng;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::Arc;

/// Incident TE field driving a forward solve.
#[derive(Debug, Clone, Copy)]
pub enum IncidentField {
    /// Point electric dipole at `source` with in-plane unit polarization.
    Dipole {
        source: Point,
        polarization: Vector2<f64>,
    },
    /// Regular field whose electric field is `Im G(·, z) p`.
    ImDyadicSource {
        z: Point,
        polarization: Vector2<f64>,
    },
    /// Identically zero field.
    Zero,
}

impl IncidentField {
    /// `H3` value and gradient at `x`.
    pub fn eval(&self, x: Point, wave: &WaveConfig) -> Result<(C64, Vector2<C64>)> {
        match self {
            Self::Dipole {
                source,
                polarization,
            } => green::dipole_h3_with_grad(x, *source, *polarization, wave),
            Self::ImDyadicSource { z, polarization } => {
                Ok(green::im_dyadic_h3_with_grad(x, *z, *polarization, wave))
            }
            Self::Zero => Ok((C64::new(0.0, 0.0), Vector2::zeros())),
        }
    }
}

/// One scatterer component: a boundary plus its boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneBody {
    pub boundary: ParametricBoundary,
    pub bc: BoundaryCondition,
}

/// A scattering scene (possibly empty, possibly multi-component).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Scene {
    pub bodies: Vec<SceneBody>,
}

impl Scene {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(boundary: ParametricBoundary, bc: BoundaryCondition) -> Self {
        Self {
            bodies: vec![SceneBody { boundary, bc }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for body in &self.bodies {
            body.boundary.validate()?;
            body.bc.validate()?;
        }
        Ok(())
    }

    /// Canonical content digest; identifies the scene in dataset metadata.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scene serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// The single circle body, if that is the whole scene.
    pub fn as_single_circle(&self) -> Option<(f64, Point, &BoundaryCondition)> {
        match self.bodies.as_slice() {
            [body] => match &body.boundary {
                ParametricBoundary::Circle { radius, center } => {
                    Some((*radius, Point::new(center[0], center[1]), &body.bc))
                }
                _ => None,
            },
            _ => None,
        }
    }

    pub fn bounding_radius(&self) -> f64 {
        self.bodies
            .iter()
            .map(|b| b.boundary.bounding_radius())
            .fold(0.0, f64::max)
    }
}

/// Noise provenance attached to a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRecord {
    /// Noise level μ (fraction of the peak scattered magnitude).
    pub mu: f64,
    pub seed: u64,
}

/// Forward solver selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// Modal solver for single circles, boundary integral otherwise.
    Auto,
    Mie,
    Nystrom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSelection {
    pub kind: SolverKind,
    /// Boundary nodes per wavelength for the Nyström discretization.
    pub points_per_wavelength: f64,
}

impl Default for SolverSelection {
    fn default() -> Self {
        Self {
            kind: SolverKind::Auto,
            points_per_wavelength: 16.0,
        }
    }
}

/// Scattered-field tensor `E^s[s][r][p]` (complex 2-vectors) with full
/// provenance: aperture, wave, scene digest, and noise record.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterDataSet {
    pub aperture: Aperture,
    pub wave: WaveConfig,
    pub polarizations: Vec<Vector2<f64>>,
    pub scene_digest: String,
    pub noise: Option<NoiseRecord>,
    data: Vec<[C64; 2]>,
}

impl ScatterDataSet {
    pub fn zeros(
        aperture: Aperture,
        wave: WaveConfig,
        polarizations: Vec<Vector2<f64>>,
        scene_digest: String,
    ) -> Self {
        let len = aperture.n_src * aperture.n_rec * polarizations.len();
        Self {
            aperture,
            wave,
            polarizations,
            scene_digest,
            noise: None,
            data: vec![[C64::new(0.0, 0.0); 2]; len],
        }
    }

    pub fn n_polarizations(&self) -> usize {
        self.polarizations.len()
    }

    #[inline]
    fn index(&self, s: usize, r: usize, p: usize) -> usize {
        (s * self.aperture.n_rec + r) * self.polarizations.len() + p
    }

    /// `E^s(x_r, x_s; p)` as a complex 2-vector.
    #[inline]
    pub fn entry(&self, s: usize, r: usize, p: usize) -> [C64; 2] {
        self.data[self.index(s, r, p)]
    }

    pub fn set_entry(&mut self, s: usize, r: usize, p: usize, value: [C64; 2]) {
        let idx = self.index(s, r, p);
        self.data[idx] = value;
    }

    pub fn values(&self) -> &[[C64; 2]] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [[C64; 2]] {
        &mut self.data
    }

    /// Largest vector magnitude `|E^s|` over the tensor.
    pub fn max_magnitude(&self) -> f64 {
        self.data
            .iter()
            .map(|[a, b]| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(0.0, f64::max)
    }

    /// Little-endian `(re, im)` byte image in `(s, r, p, component)` order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.data.len() * 32);
        for [a, b] in &self.data {
            for c in [a, b] {
                out.extend_from_slice(&c.re.to_le_bytes());
                out.extend_from_slice(&c.im.to_le_bytes());
            }
        }
        out
    }

    /// Content digest of the binary tensor image.
    pub fn data_digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_le_bytes()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|[a, b]| {
            a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()
        })
    }
}

fn check_polarizations(polarizations: &[Vector2<f64>]) -> Result<()> {
    if polarizations.is_empty() {
        return Err(Error::UnsupportedScene(
            "at least one polarization is required".to_string(),
        ));
    }
    for p in polarizations {
        if (p.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain {
                func: "generate_dataset(polarization)",
                arg: p.norm(),
            });
        }
    }
    Ok(())
}

/// Computes the scattered-field tensor for all (source, receiver,
/// polarization) combinations. Deterministic: identical inputs produce a
/// bit-identical tensor.
pub fn generate_dataset(
    scene: &Scene,
    aperture: &Aperture,
    wave: &WaveConfig,
    polarizations: &[Vector2<f64>],
    solver: SolverSelection,
) -> Result<ScatterDataSet> {
    scene.validate()?;
    check_polarizations(polarizations)?;
    let mut out = ScatterDataSet::zeros(
        aperture.clone(),
        *wave,
        polarizations.to_vec(),
        scene.digest(),
    );
    if scene.bodies.is_empty() {
        return Ok(out);
    }

    let use_mie = match solver.kind {
        SolverKind::Mie => true,
        SolverKind::Nystrom => false,
        SolverKind::Auto => scene.as_single_circle().is_some(),
    };

    let receivers = aperture.receiver_points();
    let n_p = polarizations.len();
    let tasks: Vec<(usize, usize)> = (0..aperture.n_src)
        .flat_map(|s| (0..n_p).map(move |p| (s, p)))
        .collect();

    let annotate = |s: usize, p: usize| {
        move |e: Error| Error::SourceSolve {
            source_index: s,
            polarization: p,
            inner: Box::new(e),
        }
    };

    let rows: Vec<Vec<[C64; 2]>> = if use_mie {
        let (rho, center, bc) = scene.as_single_circle().ok_or_else(|| {
            Error::UnsupportedScene(
                "modal solver requires a scene with exactly one circle".to_string(),
            )
        })?;
        let m_max = mie::projection_truncation(wave.k * rho);
        let samples = (4 * m_max as usize).max(256).next_multiple_of(2);
        tasks
            .par_iter()
            .map(|&(s, p)| {
                let incident = IncidentField::Dipole {
                    source: aperture.source_position(s),
                    polarization: polarizations[p],
                };
                let run = || -> Result<Vec<[C64; 2]>> {
                    let proj = mie_project_incident(
                        mie::incident_sampler(incident, *wave),
                        center,
                        rho,
                        wave,
                        m_max,
                        samples,
                    )?;
                    let sol = mie_solve(&proj, bc)?;
                    receivers
                        .iter()
                        .map(|&x_r| {
                            let (_, e) = mie_eval_scattered(&sol, x_r)?;
                            Ok([e.x, e.y])
                        })
                        .collect()
                };
                run().map_err(annotate(s, p))
            })
            .collect::<Result<_>>()?
    } else {
        let op = Arc::new(NystromOperator::assemble(
            scene,
            wave,
            solver.points_per_wavelength,
        )?);
        tasks
            .par_iter()
            .map(|&(s, p)| {
                let incident = IncidentField::Dipole {
                    source: aperture.source_position(s),
                    polarization: polarizations[p],
                };
                let run = || -> Result<Vec<[C64; 2]>> {
                    let system = op.solve(&incident)?;
                    receivers
                        .iter()
                        .map(|&x_r| {
                            let (_, e) = system.scattered_field(x_r)?;
                            Ok([e.x, e.y])
                        })
                        .collect()
                };
                run().map_err(annotate(s, p))
            })
            .collect::<Result<_>>()?
    };

    for ((s, p), row) in tasks.into_iter().zip(rows) {
        for (r, value) in row.into_iter().enumerate() {
            out.set_entry(s, r, p, value);
        }
    }
    debug_assert!(out.all_finite());
    Ok(out)
}

/// Adds i.i.d. complex Gaussian noise to every component of every entry:
/// each real and imaginary part receives `μ σ N(0,1)` where
/// `σ = max_{s,r,p} |E^s|` (vector magnitude) of the clean tensor.
///
/// Reproducible from the seed; `μ = 0` returns a bit-identical tensor.
pub fn add_noise(data: &ScatterDataSet, mu: f64, seed: u64) -> Result<ScatterDataSet> {
    if mu < 0.0 || !mu.is_finite() {
        return Err(Error::Domain {
            func: "add_noise",
            arg: mu,
        });
    }
    let mut out = data.clone();
    out.noise = Some(NoiseRecord { mu, seed });
    if mu == 0.0 {
        return Ok(out);
    }
    let sigma = mu * data.max_magnitude();
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let normal = rand_distr::StandardNormal;
    for entry in out.values_mut() {
        for component in entry.iter_mut() {
            let dre: f64 = normal.sample(&mut rng);
            let dim: f64 = normal.sample(&mut rng);
            *component += C64::new(sigma * dre, sigma * dim);
        }
    }
    Ok(out)
}
