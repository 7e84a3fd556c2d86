//! Complete elliptic integral of the first kind and Jacobi elliptic
//! functions, in the parameter convention `m = k²`.
//!
//! ```text
//! K(m) = π / (2 AGM(1, √(1-m)))
//! ```
//!
//! The Jacobi functions use the descending Landen (AGM) recursion: starting
//! from `a₀ = 1`, `b₀ = √(1-m)`, `c₀ = √m`, iterate the AGM until `c_n`
//! vanishes, set `φ_n = 2ⁿ a_n u` and recurse back with
//! `φ_{j-1} = (φ_j + asin(c_j sin φ_j / a_j)) / 2`. Then `sn = sin φ₀` and
//! `cn = cos φ₀`, and `dn` follows from `dn² = cn² + (1-m) sn²`, which stays
//! accurate as `m → 1`.

use std::f64::consts::PI;

use crate::error::{CrbError, Result};

const AGM_MAX_ITER: usize = 64;
const AGM_TOL: f64 = 1e-15;
/// Below this distance from `m = 1` the hyperbolic limit is used.
pub const SECH_LIMIT: f64 = 1e-14;

fn check_param(m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&m) || !m.is_finite() {
        return Err(CrbError::Domain(format!(
            "elliptic parameter must satisfy 0 <= m < 1, got {m}"
        )));
    }
    Ok(())
}

/// Complete elliptic integral of the first kind `K(m)`.
pub fn complete_elliptic_k(m: f64) -> Result<f64> {
    check_param(m)?;
    let (mut a, mut b) = (1.0_f64, (1.0 - m).sqrt());
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    Ok(PI / (2.0 * a))
}

/// Jacobi elliptic functions `(cn, sn, dn)` of argument `u` and parameter `m`.
pub fn jacobi_cn_sn_dn(u: f64, m: f64) -> Result<(f64, f64, f64)> {
    check_param(m)?;
    if !u.is_finite() {
        return Err(CrbError::Domain(format!("argument must be finite, got {u}")));
    }
    let m1 = 1.0 - m;
    if m1 < SECH_LIMIT {
        let sech = 1.0 / u.cosh();
        return Ok((sech, u.tanh(), sech));
    }
    if m == 0.0 {
        return Ok((u.cos(), u.sin(), 1.0));
    }
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = m1.sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = 2f64.powi(n as i32) * a[n] * u;
    for j in (1..=n).rev() {
        let arg = (c[j] / a[j] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + arg.asin());
    }
    let (sn, cn) = phi.sin_cos();
    let dn = (cn * cn + m1 * sn * sn).sqrt();
    Ok((cn, sn, dn))
}
