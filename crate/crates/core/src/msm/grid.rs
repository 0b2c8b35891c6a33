//! Lattices of the grid hierarchy and the transfers between them.
//!
//! Every level is a window onto the infinite lattice `index · 2^k h`
//! anchored at the box origin. Windows only grow with the particle extent,
//! so results do not depend on how far a lattice reaches past the charges.

use rayon::prelude::*;

use super::basis::{phi, stencil_1d};
use super::kernel::g_level;
use super::MsmConfig;
use crate::{Error, ParticleSystem, Result, Vec3};

/// Nodes added beyond the particle region on each side of the finest level.
pub const FINE_MARGIN: i64 = 2;
/// Extra coarse nodes beyond what the restriction stencil strictly needs.
const COARSE_MARGIN: i64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct MsmGridLevel {
    pub level: usize,
    pub spacing: f64,
    /// Position of the first node.
    pub origin: Vec3,
    /// Lattice index of the first node along each axis.
    pub start: [i64; 3],
    pub dims: [usize; 3],
    /// q_μ^k, x-major then y then z.
    pub charge: Vec<f64>,
    /// u_μ^k
    pub potential: Vec<f64>,
}

impl MsmGridLevel {
    fn new(level: usize, spacing: f64, start: [i64; 3], end: [i64; 3]) -> Self {
        let dims = [
            (end[0] - start[0] + 1) as usize,
            (end[1] - start[1] + 1) as usize,
            (end[2] - start[2] + 1) as usize,
        ];
        let len = dims[0] * dims[1] * dims[2];
        MsmGridLevel {
            level,
            spacing,
            origin: Vec3::new(
                start[0] as f64 * spacing,
                start[1] as f64 * spacing,
                start[2] as f64 * spacing,
            ),
            start,
            dims,
            charge: vec![0.0; len],
            potential: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.charge.len()
    }

    pub fn is_empty(&self) -> bool {
        self.charge.is_empty()
    }

    /// Last lattice index along each axis.
    pub fn end(&self) -> [i64; 3] {
        [
            self.start[0] + self.dims[0] as i64 - 1,
            self.start[1] + self.dims[1] as i64 - 1,
            self.start[2] + self.dims[2] as i64 - 1,
        ]
    }

    /// Flat offset of lattice index `idx`, if it lies in this window.
    pub fn offset(&self, idx: [i64; 3]) -> Option<usize> {
        let mut local = [0usize; 3];
        for ax in 0..3 {
            let l = idx[ax] - self.start[ax];
            if l < 0 || l >= self.dims[ax] as i64 {
                return None;
            }
            local[ax] = l as usize;
        }
        Some((local[0] * self.dims[1] + local[1]) * self.dims[2] + local[2])
    }

    pub fn node_position(&self, idx: [i64; 3]) -> Vec3 {
        Vec3::new(
            idx[0] as f64 * self.spacing,
            idx[1] as f64 * self.spacing,
            idx[2] as f64 * self.spacing,
        )
    }

    pub fn total_charge(&self) -> f64 {
        self.charge.iter().sum()
    }
}

/// Lattices covering the box and every particle, zero-filled.
pub fn build_grid_hierarchy(system: &ParticleSystem, config: &MsmConfig) -> Result<Vec<MsmGridLevel>> {
    config.validate()?;
    let (lo, hi) = system.extent();
    let h = config.spacing_h;
    let mut start = [0i64; 3];
    let mut end = [0i64; 3];
    for ax in 0..3 {
        start[ax] = (lo[ax] / h).floor() as i64 - FINE_MARGIN;
        end[ax] = (hi[ax] / h).ceil() as i64 + FINE_MARGIN;
    }
    let mut levels = Vec::with_capacity(config.levels_l);
    levels.push(MsmGridLevel::new(0, h, start, end));
    for k in 1..config.levels_l {
        for ax in 0..3 {
            start[ax] = start[ax].div_euclid(2) - COARSE_MARGIN;
            end[ax] = (end[ax] + 1).div_euclid(2) + COARSE_MARGIN;
        }
        levels.push(MsmGridLevel::new(k, h * (1u64 << k) as f64, start, end));
    }
    for lv in &levels {
        if lv.dims.iter().any(|&d| d < 2) {
            return Err(Error::Config(format!("level {} has fewer than 2 points per axis", lv.level)));
        }
    }
    Ok(levels)
}

/// Interpolation stencil of one particle on a level.
pub(crate) struct ParticleStencil {
    first: [i64; 3],
    w: [[f64; 4]; 3],
    dw: [[f64; 4]; 3],
}

fn particle_stencil(level: &MsmGridLevel, index: usize, position: Vec3) -> Result<ParticleStencil> {
    let mut first = [0i64; 3];
    let mut w = [[0.0; 4]; 3];
    let mut dw = [[0.0; 4]; 3];
    let end = level.end();
    for ax in 0..3 {
        let (f, wa, dwa) = stencil_1d(position[ax] / level.spacing);
        if f < level.start[ax] || f + 3 > end[ax] {
            return Err(Error::OutOfCoverage { index, position });
        }
        first[ax] = f;
        w[ax] = wa;
        dw[ax] = dwa;
    }
    Ok(ParticleStencil { first, w, dw })
}

/// Spreads point charges onto the finest lattice with the nodal basis.
pub fn anterpolate(system: &ParticleSystem, level0: &mut MsmGridLevel) -> Result<()> {
    level0.charge.iter_mut().for_each(|q| *q = 0.0);
    for (i, (&pos, &q)) in system.positions.iter().zip(&system.charges).enumerate() {
        let st = particle_stencil(level0, i, pos)?;
        let base = level0.offset(st.first).expect("stencil checked against coverage");
        let (sy, sz) = (level0.dims[1] * level0.dims[2], level0.dims[2]);
        for a in 0..4 {
            let wa = q * st.w[0][a];
            for b in 0..4 {
                let wab = wa * st.w[1][b];
                let row = base + a * sy + b * sz;
                for c in 0..4 {
                    level0.charge[row + c] += wab * st.w[2][c];
                }
            }
        }
    }
    Ok(())
}

/// Potential per unit charge interpolated at each particle.
pub fn interpolate_to_atoms(level0: &MsmGridLevel, system: &ParticleSystem) -> Result<Vec<f64>> {
    Ok(interpolate_with_gradient(level0, system)?
        .into_iter()
        .map(|(u, _)| u)
        .collect())
}

/// Interpolated potential and its spatial gradient at each particle.
pub fn interpolate_with_gradient(level0: &MsmGridLevel, system: &ParticleSystem) -> Result<Vec<(f64, Vec3)>> {
    let h = level0.spacing;
    let (sy, sz) = (level0.dims[1] * level0.dims[2], level0.dims[2]);
    system
        .positions
        .iter()
        .enumerate()
        .map(|(i, &pos)| {
            let st = particle_stencil(level0, i, pos)?;
            let base = level0.offset(st.first).expect("stencil checked against coverage");
            let mut u = 0.0;
            let mut grad = Vec3::ZERO;
            for a in 0..4 {
                for b in 0..4 {
                    let row = base + a * sy + b * sz;
                    for c in 0..4 {
                        let un = level0.potential[row + c];
                        u += st.w[0][a] * st.w[1][b] * st.w[2][c] * un;
                        grad.x += st.dw[0][a] * st.w[1][b] * st.w[2][c] * un;
                        grad.y += st.w[0][a] * st.dw[1][b] * st.w[2][c] * un;
                        grad.z += st.w[0][a] * st.w[1][b] * st.dw[2][c] * un;
                    }
                }
            }
            Ok((u, grad / h))
        })
        .collect()
}

/// For each fine node along one axis, the coarse nodes it couples to and
/// their weights `Φ(i/2 − j)`, as local coarse offsets.
fn transfer_weights(fine_start: i64, fine_len: usize, coarse_start: i64, coarse_len: usize) -> Result<Vec<Vec<(usize, f64)>>> {
    (0..fine_len as i64)
        .map(|l| {
            let i = fine_start + l;
            let t = i as f64 / 2.0;
            let base = t.floor() as i64;
            let mut out = Vec::with_capacity(4);
            for j in base - 1..=base + 2 {
                let w = phi(t - j as f64);
                if w == 0.0 {
                    continue;
                }
                let local = j - coarse_start;
                if local < 0 || local >= coarse_len as i64 {
                    return Err(Error::Hierarchy(format!(
                        "coarse node {j} needed by fine node {i} is outside the coarse lattice"
                    )));
                }
                out.push((local as usize, w));
            }
            Ok(out)
        })
        .collect()
}

/// Per axis, for each fine index, the coarse nodes it feeds and their weights.
type AxisWeights = [Vec<Vec<(usize, f64)>>; 3];

fn check_pair(fine: &MsmGridLevel, coarse: &MsmGridLevel) -> Result<AxisWeights> {
    if coarse.level != fine.level + 1 {
        return Err(Error::Hierarchy(format!(
            "expected level {} below level {}, got {}",
            fine.level + 1,
            fine.level,
            coarse.level
        )));
    }
    if coarse.spacing != 2.0 * fine.spacing {
        return Err(Error::Hierarchy(format!(
            "coarse spacing {} is not twice the fine spacing {}",
            coarse.spacing, fine.spacing
        )));
    }
    Ok([
        transfer_weights(fine.start[0], fine.dims[0], coarse.start[0], coarse.dims[0])?,
        transfer_weights(fine.start[1], fine.dims[1], coarse.start[1], coarse.dims[1])?,
        transfer_weights(fine.start[2], fine.dims[2], coarse.start[2], coarse.dims[2])?,
    ])
}

/// q^{k+1}_μ = Σ_ν Φ-weights · q^k_ν.
pub fn restrict(fine: &MsmGridLevel, coarse: &mut MsmGridLevel) -> Result<()> {
    let w = check_pair(fine, coarse)?;
    coarse.charge.iter_mut().for_each(|q| *q = 0.0);
    let [fx, fy, fz] = fine.dims;
    let (cy, cz) = (coarse.dims[1], coarse.dims[2]);
    for x in 0..fx {
        for y in 0..fy {
            for z in 0..fz {
                let q = fine.charge[(x * fy + y) * fz + z];
                if q == 0.0 {
                    continue;
                }
                for &(jx, wx) in &w[0][x] {
                    for &(jy, wy) in &w[1][y] {
                        let row = (jx * cy + jy) * cz;
                        let wxy = q * wx * wy;
                        for &(jz, wz) in &w[2][z] {
                            coarse.charge[row + jz] += wxy * wz;
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Adds the coarse potential interpolated onto the fine nodes. The fine
/// potential must already hold its lattice-cutoff part.
pub fn prolongate(coarse: &MsmGridLevel, fine: &mut MsmGridLevel) -> Result<()> {
    let w = check_pair(fine, coarse)?;
    let [_, fy, fz] = fine.dims;
    let (cy, cz) = (coarse.dims[1], coarse.dims[2]);
    let cu = &coarse.potential;
    fine.potential
        .par_chunks_mut(fy * fz)
        .enumerate()
        .for_each(|(x, plane)| {
            for y in 0..fy {
                for z in 0..fz {
                    let mut acc = 0.0;
                    for &(jx, wx) in &w[0][x] {
                        for &(jy, wy) in &w[1][y] {
                            let row = (jx * cy + jy) * cz;
                            let mut s = 0.0;
                            for &(jz, wz) in &w[2][z] {
                                s += wz * cu[row + jz];
                            }
                            acc += wx * wy * s;
                        }
                    }
                    plane[y * fz + z] += acc;
                }
            }
        });
    Ok(())
}

/// Dense stencil of kernel samples at integer node offsets in
/// `[-r, r]` along each axis.
struct Stencil {
    radius: [usize; 3],
    values: Vec<f64>,
}

impl Stencil {
    fn sample(radius: [usize; 3], spacing: f64, kernel: impl Fn(f64) -> f64) -> Self {
        let n = [2 * radius[0] + 1, 2 * radius[1] + 1, 2 * radius[2] + 1];
        let mut values = Vec::with_capacity(n[0] * n[1] * n[2]);
        for dx in -(radius[0] as i64)..=radius[0] as i64 {
            for dy in -(radius[1] as i64)..=radius[1] as i64 {
                for dz in -(radius[2] as i64)..=radius[2] as i64 {
                    let r = spacing * ((dx * dx + dy * dy + dz * dz) as f64).sqrt();
                    values.push(kernel(r));
                }
            }
        }
        Stencil { radius, values }
    }

    /// u_μ = Σ_ν stencil[μ − ν] · q_ν. Each x-plane of the output is owned by
    /// one task and receives the non-zero sources in a fixed order, so the
    /// result does not depend on the thread count.
    fn convolve(&self, charge: &[f64], dims: [usize; 3]) -> Vec<f64> {
        let [nx, ny, nz] = dims;
        let [rx, ry, rz] = self.radius.map(|r| r as i64);
        let (sny, snz) = (2 * ry as usize + 1, 2 * rz as usize + 1);
        let sources: Vec<Vec<(i64, i64, f64)>> = charge
            .chunks(ny * nz)
            .map(|plane| {
                plane
                    .iter()
                    .enumerate()
                    .filter(|(_, &q)| q != 0.0)
                    .map(|(o, &q)| ((o / nz) as i64, (o % nz) as i64, q))
                    .collect()
            })
            .collect();
        let mut out = vec![0.0; nx * ny * nz];
        out.par_chunks_mut(ny * nz).enumerate().for_each(|(x, plane)| {
            let x = x as i64;
            for sx in (x - rx).max(0)..=(x + rx).min(nx as i64 - 1) {
                let dx = x - sx;
                for &(sy, sz, q) in &sources[sx as usize] {
                    let z_lo = (sz - rz).max(0);
                    let z_hi = (sz + rz).min(nz as i64 - 1);
                    let run = (z_hi - z_lo + 1) as usize;
                    for y in (sy - ry).max(0)..=(sy + ry).min(ny as i64 - 1) {
                        let dy = y - sy;
                        let st = ((dx + rx) as usize * sny + (dy + ry) as usize) * snz + (z_lo - sz + rz) as usize;
                        let dst = (y as usize) * nz + z_lo as usize;
                        let k = &self.values[st..st + run];
                        for (u, w) in plane[dst..dst + run].iter_mut().zip(k) {
                            *u += q * w;
                        }
                    }
                }
            }
        });
        out
    }
}

/// Node radius of the lattice-cutoff stencil, `⌈2a/h⌉`.
pub fn lattice_cutoff_radius(config: &MsmConfig) -> usize {
    (2.0 * config.cutoff_a / config.spacing_h).ceil() as usize
}

/// Partial potentials `u^{k,cutoff}` from the level-k kernel, which vanishes
/// beyond `2^{k+1} a`.
pub fn lattice_cutoff(level: &MsmGridLevel, config: &MsmConfig) -> Result<Vec<f64>> {
    let l = config.levels_l;
    if level.level + 1 >= l {
        return Err(Error::LevelIndex { level: level.level, levels: l - 1 });
    }
    let r = lattice_cutoff_radius(config);
    let (a, k) = (config.cutoff_a, level.level);
    let stencil = Stencil::sample([r; 3], level.spacing, |d| g_level(d, a, k, l));
    Ok(stencil.convolve(&level.charge, level.dims))
}

/// Dense all-pairs sum with the top-level kernel.
pub fn top_level(level: &mut MsmGridLevel, config: &MsmConfig) -> Result<()> {
    let l = config.levels_l;
    if level.level + 1 != l {
        return Err(Error::LevelIndex { level: level.level, levels: l });
    }
    let radius = level.dims.map(|d| d - 1);
    let (a, k) = (config.cutoff_a, level.level);
    let stencil = Stencil::sample(radius, level.spacing, |d| g_level(d, a, k, l));
    level.potential = stencil.convolve(&level.charge, level.dims);
    Ok(())
}
