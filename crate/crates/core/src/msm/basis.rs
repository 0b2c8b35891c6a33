//! Nodal basis for grid interpolation: the C¹ cubic numerical Hermite
//! interpolant with support |ξ| < 2.

use crate::{Error, Result};

pub const INTERPOLATION_ORDER: u32 = 3;

pub fn basis_phi(xi: f64, p: u32) -> Result<f64> {
    if p != INTERPOLATION_ORDER {
        return Err(Error::Unsupported {
            what: "interpolation order",
            value: p,
            supported: INTERPOLATION_ORDER,
        });
    }
    Ok(phi(xi))
}

#[inline]
pub(crate) fn phi(xi: f64) -> f64 {
    let t = xi.abs();
    if t <= 1.0 {
        (1.0 - t) * (1.0 + t - 1.5 * t * t)
    } else if t <= 2.0 {
        -0.5 * (t - 1.0) * (2.0 - t) * (2.0 - t)
    } else {
        0.0
    }
}

/// dΦ/dξ.
#[inline]
pub(crate) fn phi_slope(xi: f64) -> f64 {
    let t = xi.abs();
    let d = if t <= 1.0 {
        t * (-5.0 + 4.5 * t)
    } else if t <= 2.0 {
        -1.5 * t * t + 5.0 * t - 4.0
    } else {
        0.0
    };
    if xi < 0.0 {
        -d
    } else {
        d
    }
}

/// Weights and slopes of the four nodes `floor(t)-1 ..= floor(t)+2` around
/// the fractional grid coordinate `t`. Returns the first node index.
#[inline]
pub(crate) fn stencil_1d(t: f64) -> (i64, [f64; 4], [f64; 4]) {
    let base = t.floor();
    let first = base as i64 - 1;
    let mut w = [0.0; 4];
    let mut dw = [0.0; 4];
    for k in 0..4 {
        let xi = t - (base - 1.0 + k as f64);
        w[k] = phi(xi);
        dw[k] = phi_slope(xi);
    }
    (first, w, dw)
}
