//! Per-step floating-point operation model of the multilevel summation and
//! the speedup formulas of the two distribution plans.

use std::f64::consts::PI;
use std::io::Write;

use crate::{Error, Result};

/// Flops per particle of a simple-cutoff evaluation.
pub const Q_G_SIMPLE_CUTOFF: f64 = 301.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopParams {
    pub n: f64,
    /// Box edge length L.
    pub box_l: f64,
    pub a: f64,
    pub h: f64,
    /// Overrides the mean neighbour distance `N^{-1/3} L`.
    pub h_star: Option<f64>,
    pub m: u32,
    pub p: u32,
}

impl FlopParams {
    pub fn new(n: f64, box_l: f64, a: f64, h: f64) -> Self {
        FlopParams { n, box_l, a, h, h_star: None, m: 2, p: 3 }
    }

    pub fn h_star(&self) -> f64 {
        self.h_star.unwrap_or_else(|| self.n.powf(-1.0 / 3.0) * self.box_l)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{what} must be positive, got {v}")))
            }
        };
        positive(self.n, "N")?;
        positive(self.a, "a")?;
        positive(self.h, "h")?;
        positive(self.h_star(), "h*")?;
        if self.m == 0 || self.p == 0 {
            return Err(Error::Config("m and p must be positive".into()));
        }
        Ok(())
    }
}

/// Term-by-term flop totals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlopBreakdown {
    pub short_range: f64,
    pub interpolation: f64,
    pub grid: f64,
}

impl FlopBreakdown {
    pub fn total(&self) -> f64 {
        self.short_range + self.interpolation + self.grid
    }
}

pub fn msm_flops_general_terms(params: &FlopParams) -> Result<FlopBreakdown> {
    params.validate()?;
    let (m, p) = (params.m as f64, params.p as f64);
    let n = params.n;
    let hs = params.h_star();
    let short_coeff = 4.0 * PI * m / 3.0 + 32.0 * PI / 3.0 + 81.0 / 2.0;
    Ok(FlopBreakdown {
        short_range: short_coeff * (params.a / hs).powi(3) * n,
        interpolation: (6.0 * p.powi(3) + 31.0 * p * p + 36.0 * p + 17.0) * n,
        grid: ((4.0 * params.a / params.h).powi(3) + 14.0 * (p + 2.0)) * (8.0 / 7.0) * (hs / params.h).powi(3) * n,
    })
}

pub fn msm_flops_general(params: &FlopParams) -> Result<f64> {
    Ok(msm_flops_general_terms(params)?.total())
}

/// The four-term instantiation for m = 2, p = 3, h* = 1.
pub fn msm_flops_simplified_terms(a: f64, h: f64, n: f64) -> FlopBreakdown {
    let a3 = a * a * a;
    FlopBreakdown {
        short_range: 77.7 * a3 * n,
        interpolation: 566.0 * n,
        grid: 73.0 * a3 / h.powi(6) * n + 80.0 / h.powi(3) * n,
    }
}

pub fn msm_flops_simplified(a: f64, h: f64, n: f64) -> f64 {
    msm_flops_simplified_terms(a, h, n).total()
}

pub fn q_ratio(q_f: f64, q_g: f64) -> Result<f64> {
    if !(q_g > 0.0 && q_g.is_finite()) || !q_f.is_finite() {
        return Err(Error::Config(format!("Q_G must be positive, got {q_g}")));
    }
    Ok(q_f / q_g)
}

pub fn speedup_plan1(q_ratio: f64) -> f64 {
    q_ratio / 2.0
}

/// `Q / (1 + K/(T Q))`, the quoted plan-2 closed form.
pub fn speedup_plan2(q_ratio: f64, t: f64, k: f64) -> f64 {
    q_ratio / (1.0 + k / (t * q_ratio))
}

/// `T R_F / (T R_G + K R_F) = Q / (1 + K Q / T)`, the speedup implied by the
/// plan-2 makespan.
pub fn speedup_plan2_makespan(q_ratio: f64, t: f64, k: f64) -> f64 {
    q_ratio / (1.0 + k * q_ratio / t)
}

/// Writes `term,general,simplified` rows plus a total row.
pub fn write_flops_csv(params: &FlopParams, mut out: impl Write) -> Result<()> {
    let g = msm_flops_general_terms(params)?;
    let s = msm_flops_simplified_terms(params.a, params.h, params.n);
    writeln!(out, "term,general,simplified")?;
    writeln!(out, "short_range,{:e},{:e}", g.short_range, s.short_range)?;
    writeln!(out, "interpolation,{:e},{:e}", g.interpolation, s.interpolation)?;
    writeln!(out, "grid,{:e},{:e}", g.grid, s.grid)?;
    writeln!(out, "total,{:e},{:e}", g.total(), s.total())?;
    Ok(())
}
