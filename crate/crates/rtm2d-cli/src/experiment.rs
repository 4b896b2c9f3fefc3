//! Experiment orchestration: configuration in, artifacts on disk out.
//!
//! `run` produces, per wavelength, a dataset (`dataset_XX.bin/.json`) and an
//! image (`image_XX.bin/.json`); multi-wavelength runs add the stacked image
//! (`image_stack.bin/.json`). Requested cross-sections become CSV files and
//! a `manifest.json` records the resolved config digest and every artifact.
//! Seeded runs are idempotent: re-running writes byte-identical artifacts.
//!
//! `verify` runs the identity checks and writes `reports.jsonl`.

use crate::config::ExperimentConfig;
use crate::error::CliError;
use rand::{Rng, SeedableRng};
use rtm2d_core::forward::{add_noise, generate_dataset, IncidentField, ScatterDataSet};
use rtm2d_core::geometry::BoundaryCondition;
use rtm2d_core::green::WaveConfig;
use rtm2d_core::rtm::{cross_section, image, image_multifreq, Axis, ImageGrid};
use rtm2d_core::verify::{
    energy_flux, hk_exact, hk_farfield, reciprocity_check, scattered_energy_consistency, IdentityReport,
};
use rtm2d_core::{io, Point};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Per-run manifest written next to the artifacts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub config_digest: String,
    pub seed: Option<u64>,
    pub wavelengths: Vec<f64>,
    pub artifacts: Vec<ArtifactRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub path: String,
    pub kind: String,
    pub digest: String,
}

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
}

fn resolved(config: &ExperimentConfig, overrides: &Overrides) -> (ExperimentConfig, PathBuf) {
    let mut resolved = config.clone();
    if let Some(seed) = overrides.seed {
        if let Some(noise) = &mut resolved.noise {
            noise.seed = seed;
        }
    }
    let out = overrides
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(&resolved.output_dir));
    (resolved, out)
}

/// Per-wavelength noise seed: the base seed advanced by the wavelength index.
fn wavelength_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

fn generate_all(
    config: &ExperimentConfig,
) -> Result<(Vec<WaveConfig>, Vec<ScatterDataSet>), CliError> {
    let scene = config.scene()?;
    let aperture = config.aperture()?;
    let polarizations = config.polarizations()?;
    let selection = config.solver_selection();
    let waves = config.waves()?;
    let mut datasets = Vec::with_capacity(waves.len());
    for (i, wave) in waves.iter().enumerate() {
        let clean = generate_dataset(&scene, &aperture, wave, &polarizations, selection)?;
        let data = match &config.noise {
            Some(noise) => add_noise(&clean, noise.mu, wavelength_seed(noise.seed, i))?,
            None => clean,
        };
        datasets.push(data);
    }
    Ok((waves, datasets))
}

/// Runs the full pipeline for a configuration; returns the manifest.
pub fn run_experiment(
    config: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<Manifest, CliError> {
    let (config, out_dir) = resolved(config, overrides);
    config.validate()?;
    let grid = config.sampling_grid()?;
    let polarizations = config.polarizations()?;
    let variant = config.imaging.kernel;

    let (_waves, datasets) = generate_all(&config)?;

    let mut artifacts = Vec::new();
    let mut record = |path: &Path, kind: &str, digest: String| {
        artifacts.push(ArtifactRecord {
            path: path.display().to_string(),
            kind: kind.to_string(),
            digest,
        });
    };

    let mut images: Vec<(String, ImageGrid)> = Vec::new();
    for (i, data) in datasets.iter().enumerate() {
        let stem = out_dir.join(format!("dataset_{i:02}"));
        io::save_dataset(data, &stem)?;
        record(
            &stem.with_extension("bin"),
            "scatter-dataset",
            data.data_digest(),
        );
        let img = image(data, &grid, &polarizations, variant)?;
        images.push((format!("image_{i:02}"), img));
    }
    if datasets.len() > 1 {
        let stacked = image_multifreq(&datasets, &grid, &polarizations, variant)?;
        images.push(("image_stack".to_string(), stacked));
    }

    for (name, img) in &images {
        let stem = out_dir.join(name);
        io::save_image(img, &stem)?;
        record(&stem.with_extension("bin"), "image-grid", img.data_digest());
        for (j, cs_request) in config.cross_sections.iter().enumerate() {
            let cs = cross_section(img, cs_request.axis, cs_request.offset)?;
            let axis_tag = match cs_request.axis {
                Axis::X1 => "x1",
                Axis::X2 => "x2",
            };
            let path = out_dir.join(format!("{name}_profile_{j}_{axis_tag}.csv"));
            io::save_cross_section_csv(&cs, &path)?;
            record(&path, "cross-section", String::new());
        }
    }

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: config.digest(),
        seed: config.noise.as_ref().map(|n| n.seed),
        wavelengths: config.wave.wavelengths.clone(),
        artifacts,
    };
    let manifest_bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    io::atomic_write(&out_dir.join("manifest.json"), &manifest_bytes)?;
    Ok(manifest)
}

/// Runs the identity-check suite; writes `reports.jsonl` into the output
/// directory and fails with exit code 4 when any check fails.
pub fn verify_suite(
    config: &ExperimentConfig,
    overrides: &Overrides,
) -> Result<Vec<IdentityReport>, CliError> {
    let (config, out_dir) = resolved(config, overrides);
    config.validate()?;
    let v = &config.verify;
    let waves = config.waves()?;
    let wave = waves[0];
    let scene = config.scene()?;
    let aperture = config.aperture()?;

    let mut reports: Vec<IdentityReport> = Vec::new();

    // Exact Helmholtz-Kirchhoff identity over seeded random pairs; the
    // report aggregates the worst pair.
    {
        let radius = v.ring_radius_wavelengths * wave.lambda;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x524d_3244);
        let span = radius / 2.5;
        let mut worst: Option<IdentityReport> = None;
        for _ in 0..v.pairs {
            let x = Point::new(rng.random_range(-span..span), rng.random_range(-span..span));
            let z = Point::new(rng.random_range(-span..span), rng.random_range(-span..span));
            let report = hk_exact(x, z, radius, &wave, v.ring_points, v.exact_tolerance)?;
            if worst
                .as_ref()
                .map(|w| report.residual > w.residual)
                .unwrap_or(true)
            {
                worst = Some(report);
            }
        }
        let mut report = worst.expect("at least one pair");
        report.extra.insert("pairs".to_string(), v.pairs as f64);
        reports.push(report);
    }

    // Far-field identities.
    reports.extend(hk_farfield(
        Point::new(0.4 * wave.lambda, 0.1 * wave.lambda),
        Point::new(-0.2 * wave.lambda, 0.25 * wave.lambda),
        v.farfield_radius_wavelengths * wave.lambda,
        &wave,
        v.farfield_points,
        (v.exponent_window[0], v.exponent_window[1]),
    )?);

    // Energy flux on a modal solution: the scene's circle when available,
    // a stock PEC unit circle otherwise.
    {
        use rtm2d_core::forward::mie::{incident_sampler, mie_project_incident, mie_solve};
        let (rho, center, bc) = match scene.as_single_circle() {
            Some((rho, center, bc))
                if !matches!(bc, BoundaryCondition::Impedance { eta }
                    if matches!(eta, rtm2d_core::geometry::EtaProfile::HalfSplit { .. })) =>
            {
                (rho, center, bc.clone())
            }
            _ => (1.0, Point::zeros(), BoundaryCondition::Pec),
        };
        let m_max = rtm2d_core::forward::projection_truncation(wave.k * rho);
        let incident = IncidentField::Dipole {
            source: aperture.source_position(0),
            polarization: config.polarizations()?[0],
        };
        let proj = mie_project_incident(
            incident_sampler(incident, wave),
            center,
            rho,
            &wave,
            m_max,
            (4 * m_max as usize).max(256),
        )?;
        let sol = mie_solve(&proj, &bc)?;
        reports.push(energy_flux(
            &sol,
            v.energy_radius_wavelengths * wave.lambda + rho,
            v.energy_points.max(4 * m_max as usize),
            v.energy_tolerance,
        )?);
    }

    // Reciprocity on the configured scene and aperture (coincident rings
    // required; checked by the op itself).
    if aperture.coincident() {
        let data = generate_dataset(
            &scene,
            &aperture,
            &wave,
            &config.polarizations()?,
            config.solver_selection(),
        )?;
        reports.push(reciprocity_check(&data, v.reciprocity_tolerance)?);
    }

    // Image-vs-scattered-energy consistency for single penetrable circles.
    if let Some((rho, center, BoundaryCondition::Penetrable { .. })) = scene.as_single_circle() {
        let points = consistency_sample_points(center, rho, v.consistency_samples);
        reports.push(scattered_energy_consistency(
            &scene,
            &points,
            &wave,
            &aperture,
            config.solver_selection(),
            v.consistency_min_correlation,
        )?);
    }

    io::save_reports_jsonl(&reports, &out_dir.join("reports.jsonl"))?;
    let failed = reports.iter().filter(|r| !r.pass).count();
    if failed > 0 {
        return Err(CliError::IdentityFailed {
            failed,
            total: reports.len(),
        });
    }
    Ok(reports)
}

/// Deterministic sample points for the consistency check: rays through the
/// body spanning interior, boundary zone, and exterior.
pub fn consistency_sample_points(center: Point, rho: f64, count: usize) -> Vec<Point> {
    let radii = [0.3, 0.7, 1.0, 1.3, 1.7];
    let n_angles = count.div_ceil(radii.len());
    let mut points = Vec::with_capacity(count);
    'outer: for (i, scale) in radii.iter().cycle().enumerate() {
        let angle = std::f64::consts::TAU * (i / radii.len()) as f64 / n_angles as f64
            + 0.1 * (i % radii.len()) as f64;
        let p = center + rho * *scale * Point::new(angle.cos(), angle.sin());
        points.push(p);
        if points.len() == count {
            break 'outer;
        }
    }
    points
}
