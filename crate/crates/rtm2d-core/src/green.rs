//! 2D Helmholtz fundamental solution `g(x,y) = (i/4) H0^{(1)}(k|x-y|)`, its
//! gradient and Hessian, the dyadic Green function
//! `G = g I + (1/k^2) ∇∇ g`, the (smooth) imaginary part of `G`, and the
//! reduction of an in-plane electric dipole to the out-of-plane TE magnetic
//! field `H3`.
//!
//! Conventions: time dependence `e^{-i ω t}`, so outgoing waves carry
//! `e^{+ikr}` and the outgoing Hankel family is `H^{(1)}`.
//!
//! TE reduction used throughout the crate (see `docs/te-reduction.md`):
//! fields `(E1, E2, H3)` with `curl E = ik H3 ẑ` and
//! `curl(H3 ẑ) = -ik n E`, hence `E = (i/(k n)) (∂2 H3, -∂1 H3)`.

use crate::error::{Error, Result};
use crate::specfun;
use crate::{Point, C64};
use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Wave number and derived wavelength; governs every kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveConfig {
    /// Wave number `k` (rad/length), strictly positive.
    pub k: f64,
    /// Wavelength `2π/k`, derived from `k` at construction.
    pub lambda: f64,
}

impl WaveConfig {
    pub fn from_wavenumber(k: f64) -> Result<Self> {
        if k <= 0.0 || !k.is_finite() {
            return Err(Error::Domain {
                func: "WaveConfig::from_wavenumber",
                arg: k,
            });
        }
        Ok(Self { k, lambda: TAU / k })
    }

    pub fn from_wavelength(lambda: f64) -> Result<Self> {
        if lambda <= 0.0 || !lambda.is_finite() {
            return Err(Error::Domain {
                func: "WaveConfig::from_wavelength",
                arg: lambda,
            });
        }
        Ok(Self {
            k: TAU / lambda,
            lambda,
        })
    }
}

/// Symmetric complex 2x2 field kernel (value of the dyadic Green function).
pub type DyadicValue = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

/// Switch to the Taylor branch of `Im G` when `kr` drops below this.
const IM_SERIES_LIMIT: f64 = 1e-3;

fn separation(x: Point, y: Point, func: &'static str) -> Result<(f64, Vector2<f64>)> {
    let d = x - y;
    let r = d.norm();
    if r == 0.0 {
        return Err(Error::Coincidence { func });
    }
    Ok((r, d / r))
}

/// Fundamental solution `g(x,y) = (i/4) H0^{(1)}(k|x-y|)`; symmetric in `(x,y)`.
pub fn g2(x: Point, y: Point, wave: &WaveConfig) -> Result<C64> {
    let (r, _) = separation(x, y, "g2")?;
    let (h0, _) = specfun::hankel1_01(wave.k * r)?;
    Ok(0.25 * I * h0)
}

/// `Im g(x,y) = J0(k|x-y|)/4`, smooth through coincidence.
pub fn im_g2(x: Point, y: Point, wave: &WaveConfig) -> f64 {
    let r = (x - y).norm();
    let (j0, _) = specfun::bessel_j01(wave.k * r).expect("kr >= 0");
    0.25 * j0
}

/// `∇_x g(x,y) = -(ik/4) H1^{(1)}(kr) r̂`, with `r̂ = (x-y)/r`.
pub fn grad_g2(x: Point, y: Point, wave: &WaveConfig) -> Result<Vector2<C64>> {
    let (r, rhat) = separation(x, y, "grad_g2")?;
    let (_, h1) = specfun::hankel1_01(wave.k * r)?;
    let factor = -0.25 * I * wave.k * h1;
    Ok(Vector2::new(factor * rhat.x, factor * rhat.y))
}

/// Hessian `∂_i ∂_j g(x,y)` with respect to `x`:
/// `(i/4)[k^2 H0'' r̂_i r̂_j + (k/r) H0' (δ_ij - r̂_i r̂_j)]`,
/// `H0' = -H1`, `H0'' = -H0 + H1/(kr)`.
pub fn hessian_g2(x: Point, y: Point, wave: &WaveConfig) -> Result<Matrix2<C64>> {
    let (r, rhat) = separation(x, y, "hessian_g2")?;
    let kr = wave.k * r;
    let (h0, h1) = specfun::hankel1_01(kr)?;
    let k2 = wave.k * wave.k;
    let radial = 0.25 * I * k2 * (-h0 + h1 / kr);
    let transverse = 0.25 * I * k2 * (-h1 / kr);
    Ok(symmetric_from_parts(radial, transverse, rhat))
}

/// Assembles `a r̂ r̂ᵀ + b (I - r̂ r̂ᵀ)` with exactly equal off-diagonals.
fn symmetric_from_parts<T>(a: T, b: T, rhat: Vector2<f64>) -> Matrix2<T>
where
    T: Copy
        + std::ops::Mul<f64, Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>,
{
    let (cx, cy) = (rhat.x, rhat.y);
    let off = (a - b) * (cx * cy);
    Matrix2::new(
        a * (cx * cx) + b * (cy * cy),
        off,
        off,
        a * (cy * cy) + b * (cx * cx),
    )
}

/// Dyadic Green function `G(x,y) = g I + (1/k^2) ∇∇ g`; exactly symmetric.
pub fn dyadic_g2(x: Point, y: Point, wave: &WaveConfig) -> Result<DyadicValue> {
    let (r, rhat) = separation(x, y, "dyadic_g2")?;
    let kr = wave.k * r;
    let (h0, h1) = specfun::hankel1_01(kr)?;
    let g = 0.25 * I * h0;
    // (1/k^2) Hess entries: (i/4)[H0'' r̂r̂ + (H0'/(kr)) (I - r̂r̂)]
    let radial = 0.25 * I * (-h0 + h1 / kr);
    let transverse = 0.25 * I * (-h1 / kr);
    let mut m = symmetric_from_parts(radial, transverse, rhat);
    m[(0, 0)] += g;
    m[(1, 1)] += g;
    Ok(m)
}

/// `(J0(x), J0''(x), J0'(x)/x)` by short Taylor series, for `x` near zero.
fn j0_pieces_series(x: f64) -> (f64, f64, f64) {
    let q = 0.25 * x * x;
    let mut j0 = 1.0;
    let mut a = 0.0; // J0''
    let mut b = 0.0; // J0'/x
    let mut term = 1.0; // q^m / (m!)^2 with sign
    for m in 1..=6u32 {
        let mf = m as f64;
        term *= -q / (mf * mf);
        j0 += term;
        // x^{2m-2} coefficient pieces: J0'' gets 2m(2m-1), J0'/x gets 2m,
        // both scaled by term / x^{2m} * x^{2m-2} = term / x^2 = -term'/(...)
        // Work directly: term = (-1)^m q^m/(m!)^2 = (-1)^m x^{2m}/(4^m (m!)^2).
        let coeff = term / (x * x).max(f64::MIN_POSITIVE);
        a += coeff * (2.0 * mf) * (2.0 * mf - 1.0);
        b += coeff * (2.0 * mf);
    }
    if x == 0.0 {
        // Exact limits: J0''(0) = -1/2, J0'(x)/x -> -1/2.
        (1.0, -0.5, -0.5)
    } else {
        (j0, a, b)
    }
}

/// `(J0(x), J0''(x), J0'(x)/x)` via Bessel evaluations, `x` not tiny.
fn j0_pieces(x: f64) -> (f64, f64, f64) {
    if x < IM_SERIES_LIMIT {
        return j0_pieces_series(x);
    }
    let (j0, j1) = specfun::bessel_j01(x).expect("x > 0");
    (j0, -j0 + j1 / x, -j1 / x)
}

/// `Im G(x,z) = (1/4)(I + ∇∇/k^2) J0(k|x-z|)`, smooth everywhere including
/// coincidence, where it equals `I/8`.
pub fn im_dyadic_g2(x: Point, z: Point, wave: &WaveConfig) -> Matrix2<f64> {
    let d = x - z;
    let r = d.norm();
    let kr = wave.k * r;
    let rhat = if r == 0.0 {
        Vector2::new(1.0, 0.0)
    } else {
        d / r
    };
    let (j0, a, b) = j0_pieces(kr);
    // (1/4)[ (J0 + B) I + (A - B) r̂ r̂ᵀ ]
    symmetric_from_parts(0.25 * (j0 + a), 0.25 * (j0 + b), rhat)
}

/// `∇_x Im g(x,z) = -(k/4) J1(kr) r̂`, smooth (vanishes at coincidence).
pub fn im_g2_grad(x: Point, z: Point, wave: &WaveConfig) -> Vector2<f64> {
    let d = x - z;
    let r = d.norm();
    if r == 0.0 {
        return Vector2::zeros();
    }
    let (_, j1) = specfun::bessel_j01(wave.k * r).expect("kr > 0");
    let factor = -0.25 * wave.k * j1;
    (d / r) * factor
}

/// Hessian of `Im g`: `(k^2/4)[J0'' r̂r̂ + (J0'/(kr)) (I - r̂r̂)]`, smooth.
pub fn im_g2_hessian(x: Point, z: Point, wave: &WaveConfig) -> Matrix2<f64> {
    let d = x - z;
    let r = d.norm();
    let kr = wave.k * r;
    let rhat = if r == 0.0 {
        Vector2::new(1.0, 0.0)
    } else {
        d / r
    };
    let (_, a, b) = j0_pieces(kr);
    let k2 = wave.k * wave.k;
    symmetric_from_parts(0.25 * k2 * a, 0.25 * k2 * b, rhat)
}

/// Out-of-plane magnetic field of the in-plane unit electric dipole at `x_s`
/// with polarization `p`:
/// `H3(x) = (1/(ik)) (p2 ∂1 g - p1 ∂2 g)(x, x_s)`.
///
/// The gradient part of the dyadic incident field `G p` is curl-free and
/// therefore does not contribute.
pub fn dipole_h3(x: Point, x_s: Point, p: Vector2<f64>, wave: &WaveConfig) -> Result<C64> {
    let grad = grad_g2(x, x_s, wave)?;
    Ok((grad.x * p.y - grad.y * p.x) / (I * wave.k))
}

/// `dipole_h3` together with its gradient with respect to `x`:
/// `∇ H3 = (1/(ik)) Hess(g) (p2, -p1)`.
pub fn dipole_h3_with_grad(
    x: Point,
    x_s: Point,
    p: Vector2<f64>,
    wave: &WaveConfig,
) -> Result<(C64, Vector2<C64>)> {
    let grad = grad_g2(x, x_s, wave)?;
    let hess = hessian_g2(x, x_s, wave)?;
    let scale = (I * wave.k).inv();
    let value = (grad.x * p.y - grad.y * p.x) * scale;
    let g = Vector2::new(
        (hess[(0, 0)] * p.y - hess[(0, 1)] * p.x) * scale,
        (hess[(1, 0)] * p.y - hess[(1, 1)] * p.x) * scale,
    );
    Ok((value, g))
}

/// `H3` (value and gradient) of the regular incident field whose electric
/// field is `Im G(·,z) p`; used as the probing source of the consistency
/// check between the image and the scattered energy.
pub fn im_dyadic_h3_with_grad(
    x: Point,
    z: Point,
    p: Vector2<f64>,
    wave: &WaveConfig,
) -> (C64, Vector2<C64>) {
    let grad = im_g2_grad(x, z, wave);
    let hess = im_g2_hessian(x, z, wave);
    let scale = (I * wave.k).inv();
    let value = scale * (grad.x * p.y - grad.y * p.x);
    let g = Vector2::new(
        scale * (hess[(0, 0)] * p.y - hess[(0, 1)] * p.x),
        scale * (hess[(1, 0)] * p.y - hess[(1, 1)] * p.x),
    );
    (value, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn wave() -> WaveConfig {
        WaveConfig::from_wavelength(1.0).unwrap()
    }

    fn random_pairs(n: usize, spread: f64) -> Vec<(Point, Point)> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x9e3779b9);
        (0..n)
            .map(|_| {
                let a = Point::new(
                    rng.random_range(-spread..spread),
                    rng.random_range(-spread..spread),
                );
                let mut b = a;
                while (a - b).norm() < 1e-3 {
                    b = Point::new(
                        rng.random_range(-spread..spread),
                        rng.random_range(-spread..spread),
                    );
                }
                (a, b)
            })
            .collect()
    }

    #[test]
    fn wave_config_consistency() {
        let w = WaveConfig::from_wavelength(0.25).unwrap();
        assert_relative_eq!(w.k * w.lambda, TAU, max_relative = 1e-15);
        assert!(WaveConfig::from_wavenumber(-1.0).is_err());
    }

    #[test]
    fn g2_symmetric_in_arguments() {
        let w = wave();
        for (x, y) in random_pairs(100, 3.0) {
            let a = g2(x, y, &w).unwrap();
            let b = g2(y, x, &w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn g2_imaginary_part_near_coincidence() {
        let w = wave();
        let r = 1e-6 / w.k;
        let v = g2(Point::new(0.0, 0.0), Point::new(r, 0.0), &w).unwrap();
        assert!((v.im - 0.25).abs() < 1e-9);
    }

    #[test]
    fn g2_matches_series_oracle_at_kr_one() {
        // Independent ascending series for J0 and Y0 at argument 1.
        let q = 0.25;
        let (mut j0, mut term) = (1.0, 1.0);
        for m in 1..40 {
            term *= -q / ((m * m) as f64);
            j0 += term;
        }
        let (mut sum, mut term, mut h) = (0.0, 1.0, 0.0);
        for m in 1..40 {
            term *= q / ((m * m) as f64);
            h += 1.0 / m as f64;
            sum += if m % 2 == 1 { h * term } else { -h * term };
        }
        let gamma = 0.577_215_664_901_532_9;
        let y0 = (2.0 / std::f64::consts::PI) * ((0.5f64.ln() + gamma) * j0 + sum);
        let oracle = 0.25 * I * C64::new(j0, y0);

        let w = wave();
        let v = g2(Point::new(0.0, 0.0), Point::new(1.0 / w.k, 0.0), &w).unwrap();
        assert!((v - oracle).norm() < 1e-10 * oracle.norm());
    }

    #[test]
    fn g2_coincidence_error() {
        let w = wave();
        let p = Point::new(0.3, -0.2);
        assert!(matches!(
            g2(p, p, &w).unwrap_err(),
            Error::Coincidence { .. }
        ));
    }

    #[test]
    fn grad_antisymmetric_under_swap() {
        let w = wave();
        for (x, y) in random_pairs(20, 2.0) {
            let a = grad_g2(x, y, &w).unwrap();
            let b = grad_g2(y, x, &w).unwrap();
            assert!((a + b).norm() < 1e-14 * a.norm());
        }
    }

    #[test]
    fn grad_matches_finite_difference() {
        let w = wave();
        let h = 1e-5 * w.lambda;
        for (x, y) in random_pairs(20, 2.0) {
            let grad = grad_g2(x, y, &w).unwrap();
            let fd = Vector2::new(
                (g2(x + Point::new(h, 0.0), y, &w).unwrap()
                    - g2(x - Point::new(h, 0.0), y, &w).unwrap())
                    / (2.0 * h),
                (g2(x + Point::new(0.0, h), y, &w).unwrap()
                    - g2(x - Point::new(0.0, h), y, &w).unwrap())
                    / (2.0 * h),
            );
            assert!((grad - fd).norm() <= 1e-6 * grad.norm(), "x={x:?} y={y:?}");
        }
    }

    #[test]
    fn grad_tangential_component_vanishes() {
        let w = wave();
        for (x, y) in random_pairs(20, 2.0) {
            let grad = grad_g2(x, y, &w).unwrap();
            let rhat = (x - y).normalize();
            let that = Vector2::new(-rhat.y, rhat.x);
            let tangential = grad.x * that.x + grad.y * that.y;
            assert!(tangential.norm() <= 1e-12 * grad.norm());
        }
    }

    #[test]
    fn dyadic_exactly_symmetric() {
        let w = wave();
        for (x, y) in random_pairs(100, 3.0) {
            let g = dyadic_g2(x, y, &w).unwrap();
            assert_eq!(g[(0, 1)], g[(1, 0)]);
        }
    }

    #[test]
    fn hessian_matches_second_differences() {
        let w = wave();
        let h = 1e-4 * w.lambda;
        for &kr in &[0.5, 3.0, 50.0] {
            let x = Point::new(kr / w.k, 0.1);
            let y = Point::new(0.0, 0.1);
            let hess = hessian_g2(x, y, &w).unwrap();
            let e = [Point::new(h, 0.0), Point::new(0.0, h)];
            let g0 = g2(x, y, &w).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = if i == j {
                        (g2(x + e[i], y, &w).unwrap() - 2.0 * g0 + g2(x - e[i], y, &w).unwrap())
                            / (h * h)
                    } else {
                        (g2(x + e[0] + e[1], y, &w).unwrap()
                            - g2(x + e[0] - e[1], y, &w).unwrap()
                            - g2(x - e[0] + e[1], y, &w).unwrap()
                            + g2(x - e[0] - e[1], y, &w).unwrap())
                            / (4.0 * h * h)
                    };
                    let scale = hess.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    assert!(
                        (hess[(i, j)] - fd).norm() <= 1e-5 * scale,
                        "kr={kr} ({i},{j}): {:?} vs {fd:?}",
                        hess[(i, j)]
                    );
                }
            }
        }
    }

    #[test]
    fn dyadic_columns_satisfy_helmholtz() {
        // Five-point stencil (Δ + k²) applied to each column of G(·, y).
        let w = wave();
        let h = w.lambda / 200.0;
        let y = Point::new(0.0, 0.0);
        let x = Point::new(1.3, 0.9);
        let k2 = w.k * w.k;
        for col in 0..2 {
            for row in 0..2 {
                let f = |p: Point| dyadic_g2(p, y, &w).unwrap()[(row, col)];
                let lap = (f(x + Point::new(h, 0.0))
                    + f(x - Point::new(h, 0.0))
                    + f(x + Point::new(0.0, h))
                    + f(x - Point::new(0.0, h))
                    - 4.0 * f(x))
                    / (h * h);
                let residual = lap + k2 * f(x);
                let scale = k2 * dyadic_g2(x, y, &w).unwrap().column(col).norm();
                assert!(
                    residual.norm() <= 1e-4 * scale,
                    "({row},{col}): residual {residual:?}"
                );
            }
        }
    }

    #[test]
    fn im_dyadic_coincidence_value() {
        let w = wave();
        let z = Point::new(0.7, -0.4);
        let m = im_dyadic_g2(z, z, &w);
        assert_relative_eq!(m[(0, 0)], 0.125, max_relative = 1e-14);
        assert_relative_eq!(m[(1, 1)], 0.125, max_relative = 1e-14);
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn im_dyadic_agrees_with_im_of_dyadic() {
        let w = wave();
        for (x, y) in random_pairs(50, 2.0) {
            if w.k * (x - y).norm() < 1e-3 {
                continue;
            }
            let exact = dyadic_g2(x, y, &w).unwrap();
            let im = im_dyadic_g2(x, y, &w);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((exact[(i, j)].im - im[(i, j)]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn im_dyadic_series_matches_bessel_branch_at_switch() {
        let w = wave();
        let z = Point::zeros();
        for &kr in &[5e-4, 1e-3, 2e-3] {
            let x = Point::new(kr / w.k, 0.0);
            let via_series = {
                let (j0, a, b) = j0_pieces_series(kr);
                symmetric_from_parts(0.25 * (j0 + a), 0.25 * (j0 + b), Vector2::new(1.0, 0.0))
            };
            let actual = im_dyadic_g2(x, z, &w);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((via_series[(i, j)] - actual[(i, j)]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn im_dyadic_decays() {
        let w = wave();
        let z = Point::zeros();
        let at0 = im_dyadic_g2(z, z, &w).norm();
        let far = im_dyadic_g2(Point::new(40.0 / w.k, 0.0), z, &w).norm();
        assert!(at0 / far >= 10.0, "ratio {}", at0 / far);
    }

    #[test]
    fn dipole_reconstructs_dyadic_incident() {
        // E = (i/k)(∂2 H3, -∂1 H3) must reproduce G(x, x_s) p.
        let w = wave();
        let x_s = Point::new(50.0, 10.0);
        let p = Vector2::new(0.6, 0.8);
        let h = 1e-4 * w.lambda;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = Point::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let d1 = (dipole_h3(x + Point::new(h, 0.0), x_s, p, &w).unwrap()
                - dipole_h3(x - Point::new(h, 0.0), x_s, p, &w).unwrap())
                / (2.0 * h);
            let d2 = (dipole_h3(x + Point::new(0.0, h), x_s, p, &w).unwrap()
                - dipole_h3(x - Point::new(0.0, h), x_s, p, &w).unwrap())
                / (2.0 * h);
            let e = Vector2::new(I / w.k * d2, -I / w.k * d1);
            let expected = dyadic_g2(x, x_s, &w).unwrap() * Vector2::new(p.x.into(), p.y.into());
            assert!((e - expected).norm() <= 1e-5 * expected.norm(), "x={x:?}");
        }
    }

    #[test]
    fn dipole_rotation_invariant() {
        let w = wave();
        let rot = nalgebra::Rotation2::new(0.83);
        let x = Point::new(0.9, -0.3);
        let x_s = Point::new(40.0, 25.0);
        let p = Vector2::new(0.28, -0.96);
        let a = dipole_h3(x, x_s, p, &w).unwrap();
        let b = dipole_h3(rot * x, rot * x_s, rot * p, &w).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
    }

    #[test]
    fn dipole_vanishes_on_axis() {
        let w = wave();
        let x_s = Point::new(100.0, 0.0);
        let x = Point::new(1.5, 0.0);
        let h3 = dipole_h3(x, x_s, Vector2::new(1.0, 0.0), &w).unwrap();
        assert_eq!(h3, C64::new(0.0, 0.0));
    }

    #[test]
    fn dipole_grad_matches_finite_difference() {
        let w = wave();
        let x_s = Point::new(30.0, -20.0);
        let p = Vector2::new(0.0, 1.0);
        let x = Point::new(0.4, 1.1);
        let h = 1e-4 * w.lambda;
        let (_, grad) = dipole_h3_with_grad(x, x_s, p, &w).unwrap();
        let fd = Vector2::new(
            (dipole_h3(x + Point::new(h, 0.0), x_s, p, &w).unwrap()
                - dipole_h3(x - Point::new(h, 0.0), x_s, p, &w).unwrap())
                / (2.0 * h),
            (dipole_h3(x + Point::new(0.0, h), x_s, p, &w).unwrap()
                - dipole_h3(x - Point::new(0.0, h), x_s, p, &w).unwrap())
                / (2.0 * h),
        );
        assert!((grad - fd).norm() <= 1e-6 * grad.norm());
    }

    #[test]
    fn im_dyadic_incident_matches_finite_difference() {
        let w = wave();
        let z = Point::new(0.2, 0.5);
        let p = Vector2::new(1.0, 0.0);
        let h = 1e-4 * w.lambda;
        for x in [
            Point::new(1.0, 0.3),
            Point::new(0.21, 0.5),
            Point::new(-1.4, 2.0),
        ] {
            let (v, grad) = im_dyadic_h3_with_grad(x, z, p, &w);
            let val = |q: Point| im_dyadic_h3_with_grad(q, z, p, &w).0;
            let fd = Vector2::new(
                (val(x + Point::new(h, 0.0)) - val(x - Point::new(h, 0.0))) / (2.0 * h),
                (val(x + Point::new(0.0, h)) - val(x - Point::new(0.0, h))) / (2.0 * h),
            );
            assert!((grad - fd).norm() <= 1e-5 * grad.norm().max(v.norm() * w.k));
        }
    }

    proptest! {
        #[test]
        fn im_part_is_quarter_j0(
            xx in -3.0f64..3.0, xy in -3.0f64..3.0,
            yx in -3.0f64..3.0, yy in -3.0f64..3.0,
        ) {
            let x = Point::new(xx, xy);
            let y = Point::new(yx, yy);
            prop_assume!((x - y).norm() > 1e-6);
            let w = wave();
            let v = g2(x, y, &w).unwrap();
            let j0 = specfun::bessel_j(0, w.k * (x - y).norm()).unwrap();
            prop_assert!((v.im - 0.25 * j0).abs() <= 1e-12);
        }

        #[test]
        fn grad_fd_property(
            xx in -2.0f64..2.0, xy in -2.0f64..2.0,
            angle in 0.0f64..std::f64::consts::TAU,
            dist in 0.2f64..3.0,
        ) {
            let w = wave();
            let x = Point::new(xx, xy);
            let y = x + dist * Point::new(angle.cos(), angle.sin());
            let h = 1e-5 * w.lambda;
            let grad = grad_g2(x, y, &w).unwrap();
            let fd_x = (g2(x + Point::new(h, 0.0), y, &w).unwrap()
                - g2(x - Point::new(h, 0.0), y, &w).unwrap()) / (2.0 * h);
            prop_assert!((grad.x - fd_x).norm() <= 1e-6 * grad.norm());
        }
    }
}
