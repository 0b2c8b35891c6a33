//! Kernel splitting of 1/r into a short-range part and a telescoping sum of
//! smooth level kernels.

use crate::{Error, Result};

/// Smoothing order supported by this implementation (γ is a degree-4 polynomial).
pub const SMOOTHING_ORDER: u32 = 2;

/// C² Taylor smoothing of 1/ρ.
pub fn gamma(rho: f64, m: u32) -> Result<f64> {
    if m != SMOOTHING_ORDER {
        return Err(Error::Unsupported {
            what: "smoothing order",
            value: m,
            supported: SMOOTHING_ORDER,
        });
    }
    Ok(gamma2(rho))
}

#[inline]
pub(crate) fn gamma2(rho: f64) -> f64 {
    if rho < 1.0 {
        let r2 = rho * rho;
        15.0 / 8.0 - 1.25 * r2 + 0.375 * r2 * r2
    } else {
        1.0 / rho
    }
}

#[inline]
pub(crate) fn gamma2_slope(rho: f64) -> f64 {
    if rho < 1.0 {
        rho * (-2.5 + 1.5 * rho * rho)
    } else {
        -1.0 / (rho * rho)
    }
}

/// Short-range kernel `1/r − γ(r/a)/a`, identically zero for `r ≥ a`.
pub fn kernel_g_star(r: f64, a: f64) -> Result<f64> {
    if r.is_nan() || r <= 0.0 {
        return Err(Error::Domain(r));
    }
    Ok(g_star(r, a).0)
}

/// Value and radial derivative of the short-range kernel.
#[inline]
pub(crate) fn g_star(r: f64, a: f64) -> (f64, f64) {
    if r >= a {
        return (0.0, 0.0);
    }
    let rho = r / a;
    let inv = 1.0 / r;
    (inv - gamma2(rho) / a, -inv * inv - gamma2_slope(rho) / (a * a))
}

/// Level-k smooth kernel. For `k < l−1` it is the difference of the smoothed
/// kernels at scales `2^k a` and `2^{k+1} a`; at the top level it is the
/// smoothed kernel alone.
pub fn kernel_g_level(r: f64, a: f64, k: usize, l: usize) -> Result<f64> {
    if k >= l {
        return Err(Error::LevelIndex { level: k, levels: l });
    }
    if r.is_nan() || r < 0.0 {
        return Err(Error::Domain(r));
    }
    Ok(g_level(r, a, k, l))
}

#[inline]
pub(crate) fn g_level(r: f64, a: f64, k: usize, l: usize) -> f64 {
    let ak = a * (1u64 << k) as f64;
    let inner = gamma2(r / ak) / ak;
    if k + 1 == l {
        return inner;
    }
    let ak1 = 2.0 * ak;
    if r >= ak1 {
        return 0.0;
    }
    inner - gamma2(r / ak1) / ak1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(0.0, 2).unwrap(), 1.875);
        assert_eq!(gamma(1.0, 2).unwrap(), 1.0);
        assert_eq!(gamma(2.0, 2).unwrap(), 0.5);
        assert!(gamma(0.5, 3).is_err());
    }

    #[test]
    fn gamma_is_c2_at_one() {
        let below = 1.0 - 1e-12;
        assert!((gamma2(below) - 1.0).abs() < 1e-11);
        assert!((gamma2_slope(below) + 1.0).abs() < 1e-11);
        // second derivatives: -5/2 + 9/2 ρ² and 2/ρ³ both equal 2 at ρ = 1
        let h = 1e-5;
        let left = (gamma2_slope(1.0 - h) - gamma2_slope(1.0 - 2.0 * h)) / h;
        let right = (gamma2_slope(1.0 + 2.0 * h) - gamma2_slope(1.0 + h)) / h;
        assert!((left - 2.0).abs() < 1e-3 && (right - 2.0).abs() < 1e-3);
    }

    #[test]
    fn g_star_values() {
        assert_eq!(kernel_g_star(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(kernel_g_star(2.0, 1.0).unwrap(), 0.0);
        assert!((kernel_g_star(0.5, 1.0).unwrap() - 0.4140625).abs() < 1e-15);
        assert!(kernel_g_star(0.0, 1.0).is_err());
    }

    #[test]
    fn level_kernel_values() {
        assert_eq!(kernel_g_level(2.0, 1.0, 0, 1).unwrap(), 0.5);
        assert_eq!(kernel_g_level(4.0, 1.0, 1, 3).unwrap(), 0.0);
        assert_eq!(kernel_g_level(9.0, 2.0, 1, 4).unwrap(), 0.0);
        assert!(kernel_g_level(1.0, 1.0, 3, 3).is_err());
        let at_zero = kernel_g_level(0.0, 2.0, 1, 3).unwrap();
        assert!((at_zero - (1.875 / 4.0 - 1.875 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn telescoping_recovers_coulomb() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let l = rng.random_range(1..=5usize);
            let a = rng.random_range(0.5..15.0);
            let r = rng.random_range(1e-3..=4.0 * (1u64 << (l - 1)) as f64 * a);
            let mut sum = kernel_g_star(r, a).unwrap();
            for k in 0..l {
                sum += kernel_g_level(r, a, k, l).unwrap();
            }
            assert!((sum - 1.0 / r).abs() * r <= 1e-12, "r={r} a={a} l={l}");
        }
    }
}
