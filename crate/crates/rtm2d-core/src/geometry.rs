//! Scatterer boundaries, boundary conditions, source/receiver apertures, and
//! sampling grids.
//!
//! Boundaries are smooth closed curves parameterized counterclockwise over
//! `[0, 2π)`. The stock shapes:
//!
//! * circle of radius `ρ`: `x(θ) = c + ρ (cos θ, sin θ)`;
//! * kite: `x(θ) = c + s (cos θ + 0.65 cos 2θ - 0.65, 1.5 sin θ)`;
//! * n-leaf: `x(θ) = c + (1 + 0.2 cos nθ)(cos θ, sin θ)`.

use crate::error::{Error, Result};
use crate::Point;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Parametric scatterer boundary (closed, smooth, counterclockwise).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParametricBoundary {
    Circle { radius: f64, center: [f64; 2] },
    Kite { center: [f64; 2], scale: f64 },
    Leaf { n: u32, center: [f64; 2] },
}

impl ParametricBoundary {
    pub fn circle(radius: f64, center: Point) -> Self {
        Self::Circle {
            radius,
            center: [center.x, center.y],
        }
    }

    pub fn kite(center: Point, scale: f64) -> Self {
        Self::Kite {
            center: [center.x, center.y],
            scale,
        }
    }

    pub fn leaf(n: u32, center: Point) -> Self {
        Self::Leaf {
            n,
            center: [center.x, center.y],
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Circle { radius, .. } if !(radius.is_finite() && *radius > 0.0) => Err(
                Error::InvalidBoundary(format!("circle radius must be positive, got {radius}")),
            ),
            Self::Kite { scale, .. } if !(scale.is_finite() && *scale > 0.0) => Err(
                Error::InvalidBoundary(format!("kite scale must be positive, got {scale}")),
            ),
            Self::Leaf { n: 0, .. } => Err(Error::InvalidBoundary(
                "leaf requires n >= 1 lobes".to_string(),
            )),
            _ => Ok(()),
        }
    }

    pub fn center(&self) -> Point {
        let c = match self {
            Self::Circle { center, .. } | Self::Kite { center, .. } | Self::Leaf { center, .. } => {
                center
            }
        };
        Point::new(c[0], c[1])
    }

    /// Position at parameter `θ`.
    pub fn point(&self, theta: f64) -> Point {
        let c = self.center();
        match self {
            Self::Circle { radius, .. } => c + *radius * Point::new(theta.cos(), theta.sin()),
            Self::Kite { scale, .. } => {
                c + *scale
                    * Point::new(
                        theta.cos() + 0.65 * (2.0 * theta).cos() - 0.65,
                        1.5 * theta.sin(),
                    )
            }
            Self::Leaf { n, .. } => {
                let r = 1.0 + 0.2 * (*n as f64 * theta).cos();
                c + r * Point::new(theta.cos(), theta.sin())
            }
        }
    }

    /// `x'(θ)`.
    pub fn derivative(&self, theta: f64) -> Vector2<f64> {
        match self {
            Self::Circle { radius, .. } => *radius * Vector2::new(-theta.sin(), theta.cos()),
            Self::Kite { scale, .. } => {
                *scale * Vector2::new(-theta.sin() - 1.3 * (2.0 * theta).sin(), 1.5 * theta.cos())
            }
            Self::Leaf { n, .. } => {
                let nf = *n as f64;
                let r = 1.0 + 0.2 * (nf * theta).cos();
                let dr = -0.2 * nf * (nf * theta).sin();
                Vector2::new(
                    dr * theta.cos() - r * theta.sin(),
                    dr * theta.sin() + r * theta.cos(),
                )
            }
        }
    }

    /// `x''(θ)`.
    pub fn second_derivative(&self, theta: f64) -> Vector2<f64> {
        match self {
            Self::Circle { radius, .. } => -*radius * Vector2::new(theta.cos(), theta.sin()),
            Self::Kite { scale, .. } => {
                *scale * Vector2::new(-theta.cos() - 2.6 * (2.0 * theta).cos(), -1.5 * theta.sin())
            }
            Self::Leaf { n, .. } => {
                let nf = *n as f64;
                let r = 1.0 + 0.2 * (nf * theta).cos();
                let dr = -0.2 * nf * (nf * theta).sin();
                let ddr = -0.2 * nf * nf * (nf * theta).cos();
                Vector2::new(
                    ddr * theta.cos() - 2.0 * dr * theta.sin() - r * theta.cos(),
                    ddr * theta.sin() + 2.0 * dr * theta.cos() - r * theta.sin(),
                )
            }
        }
    }

    /// Curve length by the periodic trapezoid rule (spectrally accurate).
    pub fn length(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.derivative(TAU * i as f64 / n as f64).norm())
            .sum::<f64>()
            * TAU
            / n as f64
    }

    /// Largest distance of the boundary from the origin (sampled).
    pub fn bounding_radius(&self) -> f64 {
        (0..512)
            .map(|i| self.point(TAU * i as f64 / 512.0).norm())
            .fold(0.0, f64::max)
    }
}

/// Impedance profile along the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EtaProfile {
    /// Spatially constant impedance.
    Constant(f64),
    /// One value above the body's center line (`x2 >= center.y`), another below.
    HalfSplit { upper: f64, lower: f64 },
}

impl EtaProfile {
    pub fn at(&self, point: Point, center: Point) -> f64 {
        match self {
            Self::Constant(eta) => *eta,
            Self::HalfSplit { upper, lower } => {
                if point.y >= center.y {
                    *upper
                } else {
                    *lower
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Constant(eta) => *eta > 0.0 && eta.is_finite(),
            Self::HalfSplit { upper, lower } => {
                *upper > 0.0 && *lower > 0.0 && upper.is_finite() && lower.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidBoundary(
                "impedance eta must be positive and finite".to_string(),
            ))
        }
    }
}

/// Boundary condition attached to one scatterer component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Perfect electric conductor; Neumann condition on the TE field H3.
    Pec,
    /// Impedance condition; Robin condition `∂ν H3 + (ik/η) H3 = 0`.
    Impedance { eta: EtaProfile },
    /// Penetrable body with constant refractive index `n0 > 0`; user scenes
    /// additionally require `n0 != 1` (see [`BoundaryCondition::validate_scene`]).
    Penetrable { n0: f64 },
}

impl BoundaryCondition {
    /// Solver-level validation. `n0 = 1` is allowed here so that no-contrast
    /// diagnostics can run; user-facing scenes go through
    /// [`BoundaryCondition::validate_scene`].
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Pec => Ok(()),
            Self::Impedance { eta } => eta.validate(),
            Self::Penetrable { n0 } => {
                if *n0 > 0.0 && n0.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidBoundary(format!(
                        "penetrable index must be positive, got {n0}"
                    )))
                }
            }
        }
    }

    /// Full validation for user scenes: also rejects the contrast-free
    /// `n0 = 1`.
    pub fn validate_scene(&self) -> Result<()> {
        self.validate()?;
        if let Self::Penetrable { n0: 1.0 } = self {
            return Err(Error::InvalidBoundary(
                "penetrable index n0 = 1 has no contrast".to_string(),
            ));
        }
        Ok(())
    }
}

/// Boundary discretization: nodes at `θ_i = 2π i / N`, unit outward normals,
/// and Jacobians `|x'(θ_i)|`.
#[derive(Debug, Clone)]
pub struct BoundaryNodes {
    pub points: Vec<Point>,
    pub normals: Vec<Vector2<f64>>,
    pub jacobians: Vec<f64>,
}

/// Discretizes a boundary with `n` uniform parameter nodes (`n` even, >= 8).
pub fn boundary_nodes(boundary: &ParametricBoundary, n: usize) -> Result<BoundaryNodes> {
    boundary.validate()?;
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::InvalidNodeCount(n));
    }
    let mut points = Vec::with_capacity(n);
    let mut normals = Vec::with_capacity(n);
    let mut jacobians = Vec::with_capacity(n);
    for i in 0..n {
        let theta = TAU * i as f64 / n as f64;
        let d = boundary.derivative(theta);
        let jac = d.norm();
        points.push(boundary.point(theta));
        // Counterclockwise parameterization: (x2', -x1') points outward.
        normals.push(Vector2::new(d.y, -d.x) / jac);
        jacobians.push(jac);
    }
    Ok(BoundaryNodes {
        points,
        normals,
        jacobians,
    })
}

/// Source/receiver rings: uniformly spaced transducers with the arc-length
/// weights `|Γ|/N = 2πR/N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aperture {
    pub n_src: usize,
    pub r_src: f64,
    pub n_rec: usize,
    pub r_rec: f64,
}

/// Builds an aperture; all counts and radii must be positive.
pub fn make_aperture(n_src: usize, r_src: f64, n_rec: usize, r_rec: f64) -> Result<Aperture> {
    if n_src == 0 || n_rec == 0 {
        return Err(Error::InvalidBoundary(
            "aperture needs at least one source and one receiver".to_string(),
        ));
    }
    if !(r_src > 0.0 && r_rec > 0.0) {
        return Err(Error::InvalidBoundary(
            "aperture radii must be positive".to_string(),
        ));
    }
    Ok(Aperture {
        n_src,
        r_src,
        n_rec,
        r_rec,
    })
}

impl Aperture {
    pub fn source_position(&self, j: usize) -> Point {
        let theta = TAU * j as f64 / self.n_src as f64;
        self.r_src * Point::new(theta.cos(), theta.sin())
    }

    pub fn receiver_position(&self, j: usize) -> Point {
        let theta = TAU * j as f64 / self.n_rec as f64;
        self.r_rec * Point::new(theta.cos(), theta.sin())
    }

    /// `|Γ_s|/N_s = 2π R_s / N_s`.
    pub fn source_weight(&self) -> f64 {
        TAU * self.r_src / self.n_src as f64
    }

    /// `|Γ_r|/N_r = 2π R_r / N_r`.
    pub fn receiver_weight(&self) -> f64 {
        TAU * self.r_rec / self.n_rec as f64
    }

    pub fn source_points(&self) -> Vec<Point> {
        (0..self.n_src).map(|j| self.source_position(j)).collect()
    }

    pub fn receiver_points(&self) -> Vec<Point> {
        (0..self.n_rec).map(|j| self.receiver_position(j)).collect()
    }

    /// Source and receiver rings coincide transducer-by-transducer.
    pub fn coincident(&self) -> bool {
        self.n_src == self.n_rec && self.r_src == self.r_rec
    }
}

/// Vertex-centered rectangular sampling grid (nodes include the corners).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

impl SamplingGrid {
    pub fn new(xmin: f64, xmax: f64, ymin: f64, ymax: f64, nx: usize, ny: usize) -> Result<Self> {
        if !(xmax > xmin && ymax > ymin) || nx < 2 || ny < 2 {
            return Err(Error::InvalidBoundary(format!(
                "invalid grid [{xmin},{xmax}]x[{ymin},{ymax}] {nx}x{ny}"
            )));
        }
        Ok(Self {
            xmin,
            xmax,
            ymin,
            ymax,
            nx,
            ny,
        })
    }

    /// Node x-coordinate; the symmetric form keeps the midpoint of a
    /// symmetric range exactly at zero.
    pub fn x_coord(&self, ix: usize) -> f64 {
        let n = (self.nx - 1) as f64;
        (self.xmin * (n - ix as f64) + self.xmax * ix as f64) / n
    }

    pub fn y_coord(&self, iy: usize) -> f64 {
        let n = (self.ny - 1) as f64;
        (self.ymin * (n - iy as f64) + self.ymax * iy as f64) / n
    }

    pub fn node(&self, ix: usize, iy: usize) -> Point {
        Point::new(self.x_coord(ix), self.y_coord(iy))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All nodes, x-fastest within each y-row.
    pub fn nodes(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(self.node(ix, iy));
            }
        }
        out
    }

    /// Largest node distance from the origin (a corner).
    pub fn circumradius(&self) -> f64 {
        [
            Point::new(self.xmin, self.ymin),
            Point::new(self.xmin, self.ymax),
            Point::new(self.xmax, self.ymin),
            Point::new(self.xmax, self.ymax),
        ]
        .iter()
        .map(|p| p.norm())
        .fold(0.0, f64::max)
    }
}
