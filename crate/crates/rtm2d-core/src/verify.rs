//! Numerical identity checks behind the imaging functional's resolution and
//! positivity structure:
//!
//! * [`hk_exact`] — the exact Helmholtz–Kirchhoff identity on an enclosing
//!   ring: `∮ (conj(g(x,ξ)) ∂ν g(ξ,z) - ∂ν conj(g(x,ξ)) g(ξ,z)) ds = 2i Im g(x,z)`;
//!   the quadrature residual is the only error, and it decays spectrally.
//! * [`hk_farfield`] — the far-field correlation identities:
//!   `k ∮ conj(g(z,ξ)) g(x,ξ) ds → Im g(x,z)` and
//!   `k ∮ conj(G(x,ξ))^T G(ξ,z) ds → Im G(x,z)`. The remainders are bounded
//!   by `C/R`; on a full ring the leading radiation-defect terms cancel
//!   between the conjugate pair, so the measured decay is `Θ(1/R²)`. The
//!   empirical exponent comes from runs at `R` and `2R`.
//! * [`energy_flux`] — scattered-power balance
//!   `Im ∮ conj(H3^s) ∂ν H3^s ds = k ∮ |H3_∞|² dθ`, plus the sign of the
//!   boundary absorption for impedance bodies.
//! * [`scattered_energy_consistency`] — proportionality between the imaging
//!   functional and the independently computed scattered energy of the
//!   point-spread source `Im G(·,z) p` (penetrable circles).
//! * [`reciprocity_check`] — data-integrity gate
//!   `q · E^s(x_r, x_s; p) = p · E^s(x_s, x_r; q)` on coincident apertures.

use crate::error::{Error, Result};
use crate::forward::{
    generate_dataset, mie::incident_sampler, mie_project_incident, mie_solve,
    projection_truncation, IncidentField, ScatterDataSet, Scene, SolverSelection,
};
use crate::geometry::{Aperture, BoundaryCondition};
use crate::green::{self, WaveConfig};
use crate::rtm::{image_at_points, KernelVariant};
use crate::{Point, C64};
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::time::Instant;

/// Outcome of one identity check, serializable as a JSON line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityReport {
    pub name: String,
    pub k: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    pub residual: f64,
    pub expected_order: String,
    pub pass: bool,
    pub runtime_s: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, f64>,
}

fn ring_point(radius: f64, i: usize, n: usize) -> (Point, Vector2<f64>) {
    let theta = TAU * i as f64 / n as f64;
    let rhat = Vector2::new(theta.cos(), theta.sin());
    (radius * Point::new(rhat.x, rhat.y), rhat)
}

/// Exact Helmholtz–Kirchhoff identity on the ring `|ξ| = radius` enclosing
/// both points; the residual is pure trapezoid error.
pub fn hk_exact(
    x: Point,
    z: Point,
    radius: f64,
    wave: &WaveConfig,
    n: usize,
    tolerance: f64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    if x.norm() >= radius || z.norm() >= radius {
        return Err(Error::Domain {
            func: "hk_exact",
            arg: x.norm().max(z.norm()),
        });
    }
    let mut sum = C64::new(0.0, 0.0);
    for i in 0..n {
        let (xi, rhat) = ring_point(radius, i, n);
        let g_x = green::g2(x, xi, wave)?;
        let g_z = green::g2(xi, z, wave)?;
        let dg_z = {
            let grad = green::grad_g2(xi, z, wave)?;
            grad.x * rhat.x + grad.y * rhat.y
        };
        let dg_x = {
            // ∂/∂ν(ξ) of g(x, ξ) = radial derivative in the second slot;
            // g is symmetric, so differentiate g(ξ, x) in ξ.
            let grad = green::grad_g2(xi, x, wave)?;
            grad.x * rhat.x + grad.y * rhat.y
        };
        sum += g_x.conj() * dg_z - dg_x.conj() * g_z;
    }
    sum *= TAU * radius / n as f64;
    let expected = C64::new(0.0, 2.0) * green::im_g2(x, z, wave);
    let residual = (sum - expected).norm();
    Ok(IdentityReport {
        name: "hk_exact".to_string(),
        k: wave.k,
        radius: Some(radius),
        quadrature_points: Some(n),
        residual,
        expected_order: "spectral in N, independent of R".to_string(),
        pass: residual <= tolerance,
        runtime_s: start.elapsed().as_secs_f64(),
        extra: BTreeMap::new(),
    })
}

/// Decay-exponent window matching the measured full-ring remainder order
/// (`Θ(1/R²)`); anything slower than the `C/R` bound or other regressions
/// fall outside it.
pub const FARFIELD_EXPONENT_WINDOW: (f64, f64) = (1.8, 2.2);

/// The analysis bound's one-sided guarantee: the remainder decays at least like `1/R`
/// up to the window slack.
pub const FARFIELD_EXPONENT_FLOOR: f64 = 0.8;

fn hk_farfield_residuals(
    x: Point,
    z: Point,
    radius: f64,
    wave: &WaveConfig,
    n: usize,
) -> (f64, f64) {
    let mut scalar = C64::new(0.0, 0.0);
    let mut dyadic = Matrix2::from_element(C64::new(0.0, 0.0));
    for i in 0..n {
        let (xi, _) = ring_point(radius, i, n);
        let g_zx = green::g2(z, xi, wave).expect("ring separation");
        let g_xx = green::g2(x, xi, wave).expect("ring separation");
        scalar += g_zx.conj() * g_xx;
        let gd_x = green::dyadic_g2(x, xi, wave).expect("ring separation");
        let gd_z = green::dyadic_g2(xi, z, wave).expect("ring separation");
        dyadic += gd_x.map(|c| c.conj()).transpose() * gd_z;
    }
    let w = TAU * radius / n as f64 * wave.k;
    scalar *= w;
    dyadic *= C64::from(w);

    let scalar_residual = (scalar - green::im_g2(x, z, wave)).norm();
    let im_d = green::im_dyadic_g2(x, z, wave);
    let mut frob = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            frob += (dyadic[(i, j)] - im_d[(i, j)]).norm_sqr();
        }
    }
    (scalar_residual, frob.sqrt())
}

/// Far-field Helmholtz–Kirchhoff identities at ring radius `R` and `2R`; the
/// reports carry the residuals and the empirical decay exponent
/// `log2(res(R)/res(2R))`, which must sit in `exponent_window` to pass.
/// The remainder bound is `C/R`; full rings measure exponent ≈ 2 because the
/// leading defect cancels between the conjugated kernels, so the default
/// window is [`FARFIELD_EXPONENT_WINDOW`].
pub fn hk_farfield(
    x: Point,
    z: Point,
    radius: f64,
    wave: &WaveConfig,
    n: usize,
    exponent_window: (f64, f64),
) -> Result<Vec<IdentityReport>> {
    let start = Instant::now();
    let (scalar_r, dyadic_r) = hk_farfield_residuals(x, z, radius, wave, n);
    let (scalar_2r, dyadic_2r) = hk_farfield_residuals(x, z, 2.0 * radius, wave, n);
    let make = |name: &str, res: f64, res2: f64| {
        let exponent = (res / res2).log2();
        let pass = exponent >= FARFIELD_EXPONENT_FLOOR
            && exponent >= exponent_window.0
            && exponent <= exponent_window.1;
        let mut extra = BTreeMap::new();
        extra.insert("residual_2r".to_string(), res2);
        extra.insert("decay_exponent".to_string(), exponent);
        IdentityReport {
            name: name.to_string(),
            k: wave.k,
            radius: Some(radius),
            quadrature_points: Some(n),
            residual: res,
            expected_order: "bounded by C/R; measured R^-2 on full rings".to_string(),
            pass,
            runtime_s: start.elapsed().as_secs_f64(),
            extra,
        }
    };
    Ok(vec![
        make("hk_farfield_scalar", scalar_r, scalar_2r),
        make("hk_farfield_dyadic", dyadic_r, dyadic_2r),
    ])
}

/// Energy-flux identity for a modal solution: the ring flux
/// `Im ∮ conj(H3^s) ∂ν H3^s ds` (trapezoid quadrature of field values) must
/// equal the far-field power `4 Σ |b_m|²` computed from the coefficients.
/// Both quantities must be nonnegative (up to -1e-12).
///
/// For impedance bodies the total-field flux is also measured; it equals
/// minus the boundary absorption, so `flux_total - power <= 0` is asserted
/// (the identity gains a positive absorption term on the boundary side).
pub fn energy_flux(
    sol: &crate::forward::ModalSolution,
    radius: f64,
    n: usize,
    tolerance: f64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    if radius <= sol.rho {
        return Err(Error::Domain {
            func: "energy_flux",
            arg: radius,
        });
    }
    let mut flux = 0.0;
    for i in 0..n {
        let theta = TAU * i as f64 / n as f64;
        let (u, du) = sol.scattered_h3_polar(radius, theta)?;
        flux += (u.conj() * du).im;
    }
    flux *= TAU * radius / n as f64;
    let power = sol.scattered_power();

    let scale = flux.abs().max(power.abs()).max(f64::MIN_POSITIVE);
    let residual = (flux - power).abs() / scale;
    let mut pass = residual <= tolerance && flux >= -1e-12 && power >= -1e-12;
    let mut extra = BTreeMap::new();
    extra.insert("ring_flux".to_string(), flux);
    extra.insert("farfield_power".to_string(), power);

    if matches!(sol.bc, BoundaryCondition::Impedance { .. }) {
        let mut total_flux = 0.0;
        for i in 0..n {
            let theta = TAU * i as f64 / n as f64;
            let (u, du) = sol.total_h3_polar(radius, theta)?;
            total_flux += (u.conj() * du).im;
        }
        total_flux *= TAU * radius / n as f64;
        let absorption_balance = total_flux - power;
        extra.insert("total_flux".to_string(), total_flux);
        extra.insert("absorption_balance".to_string(), absorption_balance);
        pass = pass && absorption_balance <= 1e-12 * scale.max(1.0);
    }

    Ok(IdentityReport {
        name: "energy_flux".to_string(),
        k: sol.wave.k,
        radius: Some(radius),
        quadrature_points: Some(n),
        residual,
        expected_order: "exact (quadrature-limited)".to_string(),
        pass,
        runtime_s: start.elapsed().as_secs_f64(),
        extra,
    })
}

/// Pearson correlation coefficient.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va.sqrt() * vb.sqrt()).max(f64::MIN_POSITIVE)
}

/// Image-vs-scattered-energy consistency for a single penetrable circle.
///
/// For each sample point `z`, the scattered energy
/// `T(z) = k ∮ |Ψ_∞(·,z)|² dθ` of the body's response to the incident field
/// `Im G(·,z) p` is computed by the modal transmission solver, independently
/// of the imaging pipeline. The image `Î(z)` from the generated dataset must
/// correlate with `T(z)` (correlation >= `min_correlation`) with a positive
/// fitted scale.
pub fn scattered_energy_consistency(
    scene: &Scene,
    sample_points: &[Point],
    wave: &WaveConfig,
    aperture: &Aperture,
    solver: SolverSelection,
    min_correlation: f64,
) -> Result<IdentityReport> {
    let start = Instant::now();
    let Some((rho, center, bc)) = scene.as_single_circle() else {
        return Err(Error::UnsupportedScene(
            "consistency check needs a single penetrable circle".to_string(),
        ));
    };
    if !matches!(bc, BoundaryCondition::Penetrable { .. }) {
        return Err(Error::UnsupportedScene(
            "consistency check needs a penetrable body".to_string(),
        ));
    }
    let polarization = Vector2::new(1.0, 0.0);

    // Independent side: modal scattered power of the point-spread source.
    let m_max = projection_truncation(wave.k * rho);
    let samples = (4 * m_max as usize).max(256);
    let mut energies = Vec::with_capacity(sample_points.len());
    for &z in sample_points {
        let incident = IncidentField::ImDyadicSource { z, polarization };
        let proj = mie_project_incident(
            incident_sampler(incident, *wave),
            center,
            rho,
            wave,
            m_max,
            samples,
        )?;
        let sol = mie_solve(&proj, bc)?;
        energies.push(sol.scattered_power());
    }

    // Imaging side.
    let data = generate_dataset(scene, aperture, wave, &[polarization], solver)?;
    let images = image_at_points(
        &data,
        sample_points,
        &[polarization],
        KernelVariant::PointSource,
    )?;

    let corr = correlation(&images, &energies);
    // Least-squares scale through the origin: image ≈ scale * energy.
    let num: f64 = images.iter().zip(&energies).map(|(i, t)| i * t).sum();
    let den: f64 = energies.iter().map(|t| t * t).sum();
    let scale = num / den.max(f64::MIN_POSITIVE);

    let mut extra = BTreeMap::new();
    extra.insert("correlation".to_string(), corr);
    extra.insert("fitted_scale".to_string(), scale);
    extra.insert("samples".to_string(), sample_points.len() as f64);

    Ok(IdentityReport {
        name: "scattered_energy_consistency".to_string(),
        k: wave.k,
        radius: Some(rho),
        quadrature_points: None,
        residual: (1.0 - corr).max(0.0),
        expected_order: "proportional up to O(1/Rs + 1/Rr)".to_string(),
        pass: corr >= min_correlation && scale > 0.0,
        runtime_s: start.elapsed().as_secs_f64(),
        extra,
    })
}

/// Electromagnetic reciprocity of a dataset with coincident source and
/// receiver rings: `q · E^s(x_r, x_s; p) = p · E^s(x_s, x_r; q)` over all
/// transducer pairs and polarization pairs, relative to the tensor maximum.
pub fn reciprocity_check(data: &ScatterDataSet, tolerance: f64) -> Result<IdentityReport> {
    let start = Instant::now();
    if !data.aperture.coincident() {
        return Err(Error::ApertureMismatch(format!(
            "reciprocity needs coincident rings, got {}x{} at radii {} and {}",
            data.aperture.n_src, data.aperture.n_rec, data.aperture.r_src, data.aperture.r_rec
        )));
    }
    let n = data.aperture.n_src;
    let pols = &data.polarizations;
    let scale = data.max_magnitude();
    let mut worst = 0.0_f64;
    for (pi, p) in pols.iter().enumerate() {
        for (qi, q) in pols.iter().enumerate() {
            for s in 0..n {
                for r in 0..n {
                    let e_rs = data.entry(s, r, pi);
                    let e_sr = data.entry(r, s, qi);
                    let lhs = e_rs[0] * q.x + e_rs[1] * q.y;
                    let rhs = e_sr[0] * p.x + e_sr[1] * p.y;
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    let residual = if scale > 0.0 { worst / scale } else { 0.0 };
    Ok(IdentityReport {
        name: "reciprocity".to_string(),
        k: data.wave.k,
        radius: Some(data.aperture.r_src),
        quadrature_points: Some(n),
        residual,
        expected_order: "solver accuracy".to_string(),
        pass: residual <= tolerance,
        runtime_s: start.elapsed().as_secs_f64(),
        extra: BTreeMap::new(),
    })
}
