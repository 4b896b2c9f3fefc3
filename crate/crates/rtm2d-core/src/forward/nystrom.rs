//! Nyström discretization of the direct boundary integral equation for the
//! total TE field trace `u = H3|_Γ` on smooth closed scatterers.
//!
//! Exterior Green representation with the incident field regular inside each
//! body gives, for PEC (`∂ν u = 0`) and impedance (`∂ν u = -(ik/η) u`)
//! components,
//!
//! ```text
//! (1/2) u - K u - S(γ u) = u^i  on Γ,   γ = ik/η (0 for PEC),
//! ```
//!
//! where `K` is the double-layer and `S` the single-layer operator. The
//! logarithmic singularities are handled by the spectral product quadrature
//! with the classical weights
//!
//! ```text
//! R_l = -(2π/n) Σ_{m=1}^{n-1} cos(m l π/n)/m - (-1)^l π/n²,   N = 2n,
//! ```
//!
//! after the kernel splits `L = L1 ln(4 sin²((t-τ)/2)) + L2` and
//! `M = M1 ln(4 sin²((t-τ)/2)) + M2`. Multi-component scenes assemble the
//! coupled block system, so multiple scattering is captured.
//!
//! The equation shares the classical interior-resonance defect: it
//! degenerates when k² is an interior Dirichlet eigenvalue of a component.
//! A condition estimate guards this and asks the caller to perturb k.

use crate::error::{Error, Result};
use crate::forward::{IncidentField, Scene};
use crate::geometry::BoundaryCondition;
use crate::green::{self, WaveConfig};
use crate::specfun;
use crate::{Point, C64};
use nalgebra::{DMatrix, DVector, Vector2};
use rayon::prelude::*;
use std::f64::consts::{PI, TAU};
use std::sync::Arc;

const I: C64 = C64::new(0.0, 1.0);
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative residual every boundary solve must reach.
pub const SOLVE_RESIDUAL_LIMIT: f64 = 1e-10;

/// Condition-estimate threshold for the interior-resonance guard.
pub const RESONANCE_COND_LIMIT: f64 = 1e8;

struct Component {
    start: usize,
    len: usize,
    /// Product-quadrature weights `R_l` for this component's node count.
    kress: Vec<f64>,
}

/// Assembled and factorized boundary-integral operator for one scene and
/// wave number; shared by all right-hand sides.
pub struct NystromOperator {
    wave: WaveConfig,
    nodes: Vec<Point>,
    normals: Vec<Vector2<f64>>,
    jacobians: Vec<f64>,
    /// Unnormalized outward normals `ν |x'|`.
    raw_normals: Vec<Vector2<f64>>,
    /// Robin coefficients `γ = ik/η` per node (zero on PEC components).
    gammas: Vec<C64>,
    /// Trapezoid weight `2π/N_c` per node.
    weights: Vec<f64>,
    components: Vec<Component>,
    matrix: DMatrix<C64>,
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
    cond_estimate: f64,
}

/// One solved right-hand side: the boundary trace of the total field.
#[derive(Clone)]
pub struct NystromSystem {
    op: Arc<NystromOperator>,
    /// Total-field boundary trace `u_j` at the nodes.
    pub density: DVector<C64>,
    pub rhs: DVector<C64>,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

fn kress_weights(n_nodes: usize) -> Vec<f64> {
    let half = n_nodes / 2;
    (0..n_nodes)
        .map(|l| {
            let mut sum = 0.0;
            for m in 1..half {
                sum += ((m * l) as f64 * PI / half as f64).cos() / m as f64;
            }
            let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
            -TAU / half as f64 * sum - sign * PI / (half as f64 * half as f64)
        })
        .collect()
}

/// Even node count from the points-per-wavelength rule, with a floor.
fn node_count(length: f64, lambda: f64, ppw: f64) -> usize {
    let n = (ppw * length / lambda).ceil() as usize;
    (n.max(32) + 1) & !1
}

impl NystromOperator {
    /// Discretizes and factorizes the block system for a PEC/impedance scene.
    pub fn assemble(scene: &Scene, wave: &WaveConfig, points_per_wavelength: f64) -> Result<Self> {
        scene.validate()?;
        if scene.bodies.is_empty() {
            return Err(Error::UnsupportedScene(
                "boundary solver needs at least one body".to_string(),
            ));
        }

        let mut nodes = Vec::new();
        let mut normals = Vec::new();
        let mut raw_normals = Vec::new();
        let mut jacobians = Vec::new();
        let mut gammas = Vec::new();
        let mut weights = Vec::new();
        let mut curvature_terms = Vec::new(); // n·x'' at each node
        let mut components = Vec::new();

        for body in &scene.bodies {
            match &body.bc {
                BoundaryCondition::Pec | BoundaryCondition::Impedance { .. } => {}
                BoundaryCondition::Penetrable { .. } => {
                    return Err(Error::UnsupportedScene(
                        "boundary solver handles PEC and impedance components only".to_string(),
                    ))
                }
            }
            let n = node_count(
                body.boundary.length(512),
                wave.lambda,
                points_per_wavelength,
            );
            let start = nodes.len();
            let center = body.boundary.center();
            for i in 0..n {
                let theta = TAU * i as f64 / n as f64;
                let x = body.boundary.point(theta);
                let d = body.boundary.derivative(theta);
                let dd = body.boundary.second_derivative(theta);
                let jac = d.norm();
                let raw = Vector2::new(d.y, -d.x);
                nodes.push(x);
                normals.push(raw / jac);
                raw_normals.push(raw);
                jacobians.push(jac);
                curvature_terms.push(raw.dot(&dd));
                weights.push(TAU / n as f64);
                gammas.push(match &body.bc {
                    BoundaryCondition::Pec => C64::new(0.0, 0.0),
                    BoundaryCondition::Impedance { eta } => I * wave.k / eta.at(x, center),
                    BoundaryCondition::Penetrable { .. } => unreachable!(),
                });
            }
            components.push(Component {
                start,
                len: n,
                kress: kress_weights(n),
            });
        }

        let n_total = nodes.len();
        let comp_of = {
            let mut map = vec![0usize; n_total];
            for (ci, c) in components.iter().enumerate() {
                for slot in map.iter_mut().skip(c.start).take(c.len) {
                    *slot = ci;
                }
            }
            map
        };

        let k = wave.k;
        let mut matrix = DMatrix::from_element(n_total, n_total, C64::new(0.0, 0.0));
        // Column-major fill: each column j is the contribution of source node
        // j to every collocation node i.
        matrix
            .as_mut_slice()
            .par_chunks_mut(n_total)
            .enumerate()
            .try_for_each(|(jn, col)| -> Result<()> {
                let cj = &components[comp_of[jn]];
                let lj = jn - cj.start;
                let yj = nodes[jn];
                let nj = raw_normals[jn];
                let jac_j = jacobians[jn];
                let gamma_j = gammas[jn];
                let wj = weights[jn];
                for (in_, slot) in col.iter_mut().enumerate() {
                    if in_ == jn {
                        // Diagonal: L1(t,t) = 0, L2(t,t) = n·x''/(4π|x'|²)
                        // (equals -1/(4π) on the unit circle),
                        // M1(t,t) = -|x'|/(4π),
                        // M2(t,t) = (i/4 - C/(2π) - ln(k|x'|/2)/(2π)) |x'|.
                        let l2 = curvature_terms[jn] / (4.0 * PI * jac_j * jac_j);
                        let m1 = -jac_j / (4.0 * PI);
                        let m2 = (0.25 * I
                            - C64::from(EULER_GAMMA / (2.0 * PI))
                            - C64::from((k * jac_j / 2.0).ln() / (2.0 * PI)))
                            * jac_j;
                        let r0 = cj.kress[0];
                        *slot = C64::from(0.5)
                            - (r0 * (gamma_j * m1) + wj * (C64::from(l2) + gamma_j * m2));
                        continue;
                    }
                    let xi = nodes[in_];
                    let d = yj - xi;
                    let r = d.norm();
                    let kr = k * r;
                    let (h0, h1) = specfun::hankel1_01(kr)?;
                    let q = nj.dot(&d) / r;
                    let l_raw = -0.25 * I * k * h1 * q;
                    let m_raw = 0.25 * I * h0 * jac_j;
                    if comp_of[in_] == comp_of[jn] {
                        // Same component: spectral log-quadrature.
                        let li = in_ - cj.start;
                        let l = li.abs_diff(lj);
                        let (j0, j1) = specfun::bessel_j01(kr)?;
                        let l1 = k / (4.0 * PI) * j1 * q;
                        let m1 = -j0 / (4.0 * PI) * jac_j;
                        let sin_half = ((li as f64 - lj as f64) * PI / cj.len as f64).sin();
                        let log_term = (4.0 * sin_half * sin_half).ln();
                        let l2 = l_raw - l1 * log_term;
                        let m2 = m_raw - m1 * log_term;
                        *slot = -(cj.kress[l] * (C64::from(l1) + gamma_j * m1)
                            + wj * (l2 + gamma_j * m2));
                    } else {
                        // Distinct components: smooth kernel, plain trapezoid.
                        *slot = -wj * (l_raw + gamma_j * m_raw);
                    }
                }
                Ok(())
            })?;

        let lu = matrix.clone().lu();
        let cond_estimate = estimate_condition(&matrix, &lu);
        if cond_estimate > RESONANCE_COND_LIMIT {
            return Err(Error::InteriorResonance {
                cond: cond_estimate,
            });
        }

        Ok(Self {
            wave: *wave,
            nodes,
            normals,
            jacobians,
            raw_normals,
            gammas,
            weights,
            components,
            matrix,
            lu,
            cond_estimate,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn cond_estimate(&self) -> f64 {
        self.cond_estimate
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn normals(&self) -> &[Vector2<f64>] {
        &self.normals
    }

    pub fn jacobians(&self) -> &[f64] {
        &self.jacobians
    }

    pub fn component_sizes(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.len).collect()
    }

    /// Solves for one incident field; the right-hand side is the incident
    /// trace at the collocation nodes.
    pub fn solve(self: &Arc<Self>, incident: &IncidentField) -> Result<NystromSystem> {
        let n = self.n_nodes();
        let mut rhs = DVector::from_element(n, C64::new(0.0, 0.0));
        for i in 0..n {
            rhs[i] = incident.eval(self.nodes[i], &self.wave)?.0;
        }
        let rhs_norm = rhs.norm();
        if rhs_norm == 0.0 {
            return Ok(NystromSystem {
                op: Arc::clone(self),
                density: DVector::from_element(n, C64::new(0.0, 0.0)),
                rhs,
                residual: 0.0,
            });
        }
        let density = self.lu.solve(&rhs).ok_or(Error::InteriorResonance {
            cond: f64::INFINITY,
        })?;
        let residual = (&self.matrix * &density - &rhs).norm() / rhs_norm;
        if residual > SOLVE_RESIDUAL_LIMIT {
            return Err(Error::SolveResidual {
                residual,
                limit: SOLVE_RESIDUAL_LIMIT,
            });
        }
        Ok(NystromSystem {
            op: Arc::clone(self),
            density,
            rhs,
            residual,
        })
    }
}

/// Condition estimate `||A||_1 * ρ(A^{-1})`, the spectral radius obtained by
/// a short, deterministic inverse power iteration.
fn estimate_condition(
    a: &DMatrix<C64>,
    lu: &nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
) -> f64 {
    let n = a.nrows();
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|c| c.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut v = DVector::from_fn(n, |i, _| C64::new(if i % 2 == 0 { 1.0 } else { -1.0 }, 0.0));
    v /= C64::from(v.norm());
    let mut growth = 0.0;
    for _ in 0..8 {
        let Some(w) = lu.solve(&v) else {
            return f64::INFINITY;
        };
        growth = w.norm();
        if !growth.is_finite() || growth == 0.0 {
            return f64::INFINITY;
        }
        v = w / C64::from(growth);
    }
    norm1 * growth
}

impl NystromSystem {
    pub fn operator(&self) -> &NystromOperator {
        &self.op
    }

    /// Scattered `H3` and `E` at an exterior observation point, from the
    /// representation `u^s = D u + S(γ u)` with plain trapezoid quadrature
    /// (spectrally accurate away from the boundary).
    pub fn scattered_field(&self, x: Point) -> Result<(C64, Vector2<C64>)> {
        let op = &*self.op;
        let k = op.wave.k;
        let mut val = C64::new(0.0, 0.0);
        let mut grad = Vector2::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for j in 0..op.n_nodes() {
            let u = self.density[j];
            if u.norm() == 0.0 {
                continue;
            }
            let w = op.weights[j];
            let yj = op.nodes[j];
            let d = yj - x;
            let r = d.norm();
            let kr = k * r;
            let (h0, h1) = specfun::hankel1_01(kr)?;
            // Double layer: ∂ν(y) g · |x'|, via the unnormalized normal.
            let q = op.raw_normals[j].dot(&d) / r;
            let dl = -0.25 * I * k * h1 * q;
            let sl = 0.25 * I * h0 * op.jacobians[j];
            val += w * u * (dl + op.gammas[j] * sl);

            // Gradients with respect to x: ∇x ∂ν(y) g = -Hess(g) ν,
            // ∇x g from the closed form.
            let hess = green::hessian_g2(x, yj, &op.wave)?;
            let nu = op.normals[j];
            let dl_grad = Vector2::new(
                -(hess[(0, 0)] * nu.x + hess[(0, 1)] * nu.y),
                -(hess[(1, 0)] * nu.x + hess[(1, 1)] * nu.y),
            );
            let sl_grad = green::grad_g2(x, yj, &op.wave)?;
            let jac = C64::from(op.jacobians[j]);
            grad += (dl_grad * jac + sl_grad * (op.gammas[j] * jac)) * (C64::from(w) * u);
        }
        let e = Vector2::new(I / k * grad.y, -I / k * grad.x);
        Ok((val, e))
    }
}

/// Assembles and solves the boundary system for one incident field.
pub fn nystrom_solve(
    scene: &Scene,
    incident: &IncidentField,
    wave: &WaveConfig,
    points_per_wavelength: f64,
) -> Result<NystromSystem> {
    let op = Arc::new(NystromOperator::assemble(
        scene,
        wave,
        points_per_wavelength,
    )?);
    op.solve(incident)
}
