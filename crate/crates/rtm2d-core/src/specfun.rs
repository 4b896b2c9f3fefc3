//! Real-argument cylinder functions for integer orders: Bessel J and Y, the
//! outgoing Hankel function H⁽¹⁾ = J + iY, and their derivatives.
//!
//! Evaluation strategy per the accuracy budget of the downstream kernels
//! (target ≈ 1e-10 relative, errors dominated by quadrature elsewhere):
//!
//! * ascending power series for orders 0 and 1 when `x < 12`;
//! * Hankel's large-argument asymptotic expansion when `x >= 12`;
//! * upward three-term recurrence for higher orders while `m < x`
//!   (stable direction for J there, always stable for Y);
//! * Miller's backward recurrence with the even-order normalization
//!   `J0 + 2*J2 + 2*J4 + ... = 1` for J when `m >= x`.
//!
//! Negative orders are not exposed; callers use `J_{-m} = (-1)^m J_m` and
//! `H_{-m} = (-1)^m H_m`.
//!
//! All functions are pure: identical inputs give bit-identical outputs.

use crate::error::{Error, Result};
use crate::C64;
use std::f64::consts::{FRAC_PI_4, PI};

/// Non-negative integer cylinder-function order.
pub type CylinderOrder = u32;

/// Euler–Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between ascending series and asymptotic expansion.
const SERIES_LIMIT: f64 = 12.0;

/// Magnitude at which recurrences rescale or bail out.
const RESCALE_LIMIT: f64 = 1e250;
const OVERFLOW_LIMIT: f64 = 1e280;

/// J₀ and J₁ by ascending series, for `0 <= x < 12`.
fn j01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    // J0 = sum (-q)^m / (m!)^2
    let mut term = 1.0_f64;
    let mut j0 = 1.0_f64;
    let mut m = 1.0;
    while term.abs() > 1e-18 * j0.abs().max(1.0) {
        term *= -q / (m * m);
        j0 += term;
        m += 1.0;
    }
    // J1 = (x/2) * sum (-q)^m / (m! (m+1)!)
    let mut term = 0.5 * x;
    let mut j1 = term;
    let mut m = 1.0;
    while term.abs() > 1e-18 * j1.abs().max(1e-30) {
        term *= -q / (m * (m + 1.0));
        j1 += term;
        m += 1.0;
    }
    (j0, j1)
}

/// Y₀ and Y₁ by ascending series with logarithmic terms, for `0 < x < 12`.
fn y01_series(x: f64) -> (f64, f64) {
    let (j0, j1) = j01_series(x);
    let q = 0.25 * x * x;
    let lg = (0.5 * x).ln();

    // Y0 = (2/pi) [ (ln(x/2) + gamma) J0 + sum_{m>=1} (-1)^{m+1} H_m q^m / (m!)^2 ]
    let mut sum = 0.0;
    let mut term = 1.0; // q^m / (m!)^2
    let mut harmonic = 0.0;
    let mut m = 1.0;
    let mut sign = 1.0;
    loop {
        term *= q / (m * m);
        harmonic += 1.0 / m;
        let contrib = sign * harmonic * term;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
        sign = -sign;
        m += 1.0;
    }
    let y0 = (2.0 / PI) * ((lg + EULER_GAMMA) * j0 + sum);

    // Y1 = (2/pi) ln(x/2) J1 - 2/(pi x)
    //      - (x/(2 pi)) sum_{k>=0} (H_k + H_{k+1} - 2 gamma) (-q)^k / (k! (k+1)!)
    let mut sum = 1.0 - 2.0 * EULER_GAMMA; // k = 0 term: H_0 + H_1 - 2g = 1 - 2g
    let mut term = 1.0; // (-q)^k / (k! (k+1)!)
    let mut hk = 0.0;
    let mut hk1 = 1.0;
    let mut k = 1.0;
    loop {
        term *= -q / (k * (k + 1.0));
        hk += 1.0 / k;
        hk1 += 1.0 / (k + 1.0);
        let contrib = (hk + hk1 - 2.0 * EULER_GAMMA) * term;
        sum += contrib;
        if contrib.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
        k += 1.0;
    }
    let y1 = (2.0 / PI) * lg * j1 - 2.0 / (PI * x) - x / (2.0 * PI) * sum;
    (y0, y1)
}

/// Amplitude/phase pieces of Hankel's expansion for order `nu`, `x >= 12`:
/// returns `(P, Q)` with
/// `J = sqrt(2/(pi x)) (P cos chi - Q sin chi)`,
/// `Y = sqrt(2/(pi x)) (P sin chi + Q cos chi)`,
/// `chi = x - (2 nu + 1) pi/4`.
fn asymptotic_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut c = 1.0; // c_j = prod (mu - (2i-1)^2) / (j! (8x)^j)
    let mut prev = f64::INFINITY;
    for j in 1..40u32 {
        let odd = (2 * j - 1) as f64;
        c *= (mu - odd * odd) / (j as f64 * 8.0 * x);
        if c.abs() >= prev {
            break; // divergent tail reached, stop at the smallest term
        }
        prev = c.abs();
        let sign = if (j / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if j % 2 == 1 {
            q += sign * c;
        } else {
            p += sign * c;
        }
        if c.abs() < 1e-17 {
            break;
        }
    }
    (p, q)
}

fn j01_asymptotic(x: f64) -> (f64, f64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - 3.0 * FRAC_PI_4;
    (
        amp * (p0 * chi0.cos() - q0 * chi0.sin()),
        amp * (p1 * chi1.cos() - q1 * chi1.sin()),
    )
}

fn y01_asymptotic(x: f64) -> (f64, f64) {
    let amp = (2.0 / (PI * x)).sqrt();
    let (p0, q0) = asymptotic_pq(0.0, x);
    let (p1, q1) = asymptotic_pq(1.0, x);
    let chi0 = x - FRAC_PI_4;
    let chi1 = x - 3.0 * FRAC_PI_4;
    (
        amp * (p0 * chi0.sin() + q0 * chi0.cos()),
        amp * (p1 * chi1.sin() + q1 * chi1.cos()),
    )
}

fn j01(x: f64) -> (f64, f64) {
    if x < SERIES_LIMIT {
        j01_series(x)
    } else {
        j01_asymptotic(x)
    }
}

fn y01(x: f64) -> (f64, f64) {
    if x < SERIES_LIMIT {
        y01_series(x)
    } else {
        y01_asymptotic(x)
    }
}

/// `J_m(x)` for all orders `0..=m_max` in one pass.
pub fn bessel_j_seq(m_max: CylinderOrder, x: f64) -> Result<Vec<f64>> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            func: "bessel_j",
            arg: x,
        });
    }
    let n = m_max as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; n];
        out[0] = 1.0;
        return Ok(out);
    }
    let (j0, j1) = j01(x);
    if m_max == 0 {
        return Ok(vec![j0]);
    }
    if (m_max as f64) < x {
        // Upward recurrence, stable while the order stays below the argument.
        let mut out = Vec::with_capacity(n);
        out.push(j0);
        out.push(j1);
        for m in 1..m_max as usize {
            let next = (2.0 * m as f64 / x) * out[m] - out[m - 1];
            out.push(next);
        }
        return Ok(out);
    }
    miller_backward(m_max, x)
}

/// Miller's backward recurrence with even-order normalization.
fn miller_backward(m_max: CylinderOrder, x: f64) -> Result<Vec<f64>> {
    let n = m_max as usize + 1;
    let start = m_max as usize + 25 + (3.0 * (m_max as f64).sqrt()).ceil() as usize;
    let mut out = vec![0.0; n];
    let mut vp = 0.0_f64; // v_{k+1}
    let mut v = 1e-30_f64; // v_k
    let mut norm = 0.0_f64; // J0 + 2 J2 + 2 J4 + ...
    if start.is_multiple_of(2) {
        norm = 2.0 * v;
    }
    for k in (1..=start).rev() {
        let vm = (2.0 * k as f64 / x) * v - vp;
        vp = v;
        v = vm;
        let order = k - 1;
        if order < n {
            out[order] = v;
        }
        if order % 2 == 0 {
            norm += if order == 0 { v } else { 2.0 * v };
        }
        if v.abs() > RESCALE_LIMIT {
            let s = 1e-250;
            v *= s;
            vp *= s;
            norm *= s;
            for o in &mut out {
                *o *= s;
            }
        }
    }
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::SpecfunOverflow {
            order: m_max,
            arg: x,
        });
    }
    for o in &mut out {
        *o /= norm;
    }
    Ok(out)
}

/// `Y_m(x)` for all orders `0..=m_max` in one pass (upward recurrence).
pub fn bessel_y_seq(m_max: CylinderOrder, x: f64) -> Result<Vec<f64>> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            func: "bessel_y",
            arg: x,
        });
    }
    let (y0, y1) = y01(x);
    let mut out = Vec::with_capacity(m_max as usize + 1);
    out.push(y0);
    if m_max == 0 {
        return Ok(out);
    }
    out.push(y1);
    for m in 1..m_max as usize {
        let next = (2.0 * m as f64 / x) * out[m] - out[m - 1];
        if next.abs() > OVERFLOW_LIMIT {
            return Err(Error::SpecfunOverflow {
                order: m as u32 + 1,
                arg: x,
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// `(J0(x), J1(x))` without allocation; the kernel-evaluation fast path.
pub fn bessel_j01(x: f64) -> Result<(f64, f64)> {
    if x < 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            func: "bessel_j",
            arg: x,
        });
    }
    Ok(j01(x))
}

/// `(H0^{(1)}(x), H1^{(1)}(x))` without allocation.
pub fn hankel1_01(x: f64) -> Result<(C64, C64)> {
    if x <= 0.0 || !x.is_finite() {
        return Err(Error::Domain {
            func: "hankel1",
            arg: x,
        });
    }
    let (j0, j1) = j01(x);
    let (y0, y1) = y01(x);
    Ok((C64::new(j0, y0), C64::new(j1, y1)))
}

/// Bessel function of the first kind `J_m(x)`, `x >= 0`.
pub fn bessel_j(m: CylinderOrder, x: f64) -> Result<f64> {
    Ok(bessel_j_seq(m, x)?[m as usize])
}

/// Bessel function of the second kind `Y_m(x)`, `x > 0`.
pub fn bessel_y(m: CylinderOrder, x: f64) -> Result<f64> {
    Ok(bessel_y_seq(m, x)?[m as usize])
}

/// Outgoing Hankel function `H_m^{(1)}(x) = J_m(x) + i Y_m(x)`, `x > 0`.
pub fn hankel1(m: CylinderOrder, x: f64) -> Result<C64> {
    Ok(C64::new(bessel_j(m, x)?, bessel_y(m, x)?))
}

/// `H_m^{(1)}(x)` for all orders `0..=m_max`.
pub fn hankel1_seq(m_max: CylinderOrder, x: f64) -> Result<Vec<C64>> {
    let j = bessel_j_seq(m_max, x)?;
    let y = bessel_y_seq(m_max, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(re, im)| C64::new(re, im))
        .collect())
}

/// Derivative from the standard recurrence `f'_m = f_{m-1} - (m/x) f_m`,
/// `f'_0 = -f_1`, applied to a sequence of same-family values.
pub fn deriv_from_seq<T>(seq: &[T], m: CylinderOrder, x: f64) -> T
where
    T: Copy
        + std::ops::Sub<Output = T>
        + std::ops::Neg<Output = T>
        + std::ops::Mul<f64, Output = T>,
{
    let m = m as usize;
    if m == 0 {
        -seq[1]
    } else {
        seq[m - 1] - seq[m] * (m as f64 / x)
    }
}

/// `J'_m(x)`.
pub fn bessel_j_deriv(m: CylinderOrder, x: f64) -> Result<f64> {
    if x == 0.0 {
        // Series limits: J0' = 0, J1' = 1/2, higher orders 0.
        return match m {
            1 => Ok(0.5),
            _ => Ok(0.0),
        };
    }
    let seq = bessel_j_seq(m.max(1), x)?;
    Ok(deriv_from_seq(&seq, m, x))
}

/// `Y'_m(x)`.
pub fn bessel_y_deriv(m: CylinderOrder, x: f64) -> Result<f64> {
    let seq = bessel_y_seq(m.max(1), x)?;
    Ok(deriv_from_seq(&seq, m, x))
}

/// `H_m^{(1)'}(x)`.
pub fn hankel1_deriv(m: CylinderOrder, x: f64) -> Result<C64> {
    let seq = hankel1_seq(m.max(1), x)?;
    Ok(deriv_from_seq(&seq, m, x))
}
