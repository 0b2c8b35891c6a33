//! Multilevel summation of Coulomb potentials and forces.

pub mod basis;
pub mod grid;
pub mod kernel;

use std::io::Write;

pub use basis::{basis_phi, INTERPOLATION_ORDER};
pub use grid::{
    anterpolate, build_grid_hierarchy, interpolate_to_atoms, interpolate_with_gradient, lattice_cutoff,
    lattice_cutoff_radius, prolongate, restrict, top_level, MsmGridLevel,
};
pub use kernel::{gamma, kernel_g_level, kernel_g_star, SMOOTHING_ORDER};

use crate::reference::{pair_sum, PotentialResult};
use crate::{Error, ParticleSystem, Result, UnitsConfig, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MsmConfig {
    pub cutoff_a: f64,
    pub spacing_h: f64,
    pub levels_l: usize,
    pub interp_order_p: u32,
    pub smoothing_m: u32,
}

impl MsmConfig {
    pub fn new(cutoff_a: f64, spacing_h: f64, levels_l: usize) -> Self {
        MsmConfig {
            cutoff_a,
            spacing_h,
            levels_l,
            interp_order_p: INTERPOLATION_ORDER,
            smoothing_m: SMOOTHING_ORDER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff_a > 0.0 && self.cutoff_a.is_finite()) {
            return Err(Error::Config(format!("cutoff a must be positive, got {}", self.cutoff_a)));
        }
        if !(self.spacing_h > 0.0 && self.spacing_h.is_finite()) {
            return Err(Error::Config(format!("spacing h must be positive, got {}", self.spacing_h)));
        }
        if self.levels_l < 1 || self.levels_l > 30 {
            return Err(Error::Config(format!("levels must be in 1..=30, got {}", self.levels_l)));
        }
        if self.cutoff_a / self.spacing_h < 1.0 {
            return Err(Error::Config(format!(
                "a/h must be at least 1, got {}/{}",
                self.cutoff_a, self.spacing_h
            )));
        }
        if self.interp_order_p != INTERPOLATION_ORDER {
            return Err(Error::Unsupported {
                what: "interpolation order",
                value: self.interp_order_p,
                supported: INTERPOLATION_ORDER,
            });
        }
        if self.smoothing_m != SMOOTHING_ORDER {
            return Err(Error::Unsupported {
                what: "smoothing order",
                value: self.smoothing_m,
                supported: SMOOTHING_ORDER,
            });
        }
        Ok(())
    }
}

/// Short-range potentials per unit charge and the matching forces.
pub fn short_range(system: &ParticleSystem, config: &MsmConfig, units: &UnitsConfig) -> Result<(Vec<f64>, Vec<Vec3>)> {
    config.validate()?;
    let a = config.cutoff_a;
    pair_sum(system, units, Some(a), |r| kernel::g_star(r, a))
}

/// Full multilevel evaluation.
pub fn msm_potential(system: &ParticleSystem, config: &MsmConfig, units: &UnitsConfig) -> Result<PotentialResult> {
    msm_potential_with_levels(system, config, units).map(|(r, _)| r)
}

/// As [`msm_potential`], also returning the filled grid hierarchy.
pub fn msm_potential_with_levels(
    system: &ParticleSystem,
    config: &MsmConfig,
    units: &UnitsConfig,
) -> Result<(PotentialResult, Vec<MsmGridLevel>)> {
    config.validate()?;
    units.validate()?;
    let (short, mut forces) = short_range(system, config, units)?;

    let mut levels = build_grid_hierarchy(system, config)?;
    let l = levels.len();
    anterpolate(system, &mut levels[0])?;
    for k in 0..l - 1 {
        let (fine, coarse) = levels.split_at_mut(k + 1);
        fine[k].potential = lattice_cutoff(&fine[k], config)?;
        restrict(&fine[k], &mut coarse[0])?;
    }
    top_level(&mut levels[l - 1], config)?;
    for k in (0..l - 1).rev() {
        let (fine, coarse) = levels.split_at_mut(k + 1);
        prolongate(&coarse[0], &mut fine[k])?;
    }

    let self_coeff = kernel::gamma2(0.0) / config.cutoff_a;
    let interp = interpolate_with_gradient(&levels[0], system)?;
    let k_c = units.coulomb_constant;
    let mut long = Vec::with_capacity(system.len());
    for (i, (u, grad)) in interp.into_iter().enumerate() {
        let q = system.charges[i];
        long.push(u - q * self_coeff);
        forces[i] -= grad * (k_c * q);
    }

    let potential: Vec<f64> = short.iter().zip(&long).map(|(s, l)| s + l).collect();
    let total_energy = PotentialResult::energy_from_potentials(&system.charges, &potential, units);
    Ok((
        PotentialResult {
            per_particle_potential: potential,
            per_particle_force: forces,
            total_energy,
            short_part: Some(short),
            long_part: Some(long),
        },
        levels,
    ))
}

/// Writes every lattice node as `level,ix,iy,iz,x,y,z,charge,potential`.
pub fn write_levels_csv(levels: &[MsmGridLevel], mut out: impl Write) -> Result<()> {
    writeln!(out, "level,ix,iy,iz,x,y,z,charge,potential")?;
    for lv in levels {
        let end = lv.end();
        for ix in lv.start[0]..=end[0] {
            for iy in lv.start[1]..=end[1] {
                for iz in lv.start[2]..=end[2] {
                    let idx = [ix, iy, iz];
                    let o = lv.offset(idx).expect("index within window");
                    let p = lv.node_position(idx);
                    writeln!(
                        out,
                        "{},{ix},{iy},{iz},{},{},{},{:e},{:e}",
                        lv.level, p.x, p.y, p.z, lv.charge[o], lv.potential[o]
                    )?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::direct_coulomb;
    use crate::system::{generate_random_system, ChargeScheme};

    fn pair(r: f64) -> ParticleSystem {
        ParticleSystem::new(
            vec![Vec3::new(5.0, 5.0, 5.0), Vec3::new(5.0 + r, 5.0, 5.0)],
            vec![Vec3::ZERO; 2],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            Vec3::splat(10.0),
        )
        .unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn config_validation() {
        assert!(MsmConfig::new(8.0, 2.0, 3).validate().is_ok());
        assert!(MsmConfig::new(1.0, 2.0, 3).validate().is_err());
        assert!(MsmConfig::new(8.0, 0.0, 3).validate().is_err());
        assert!(MsmConfig::new(8.0, 2.0, 0).validate().is_err());
        let mut c = MsmConfig::new(8.0, 2.0, 2);
        c.interp_order_p = 5;
        assert!(matches!(c.validate(), Err(Error::Unsupported { value: 5, .. })));
        c.interp_order_p = 3;
        c.smoothing_m = 3;
        assert!(matches!(c.validate(), Err(Error::Unsupported { value: 3, .. })));
    }

    #[test]
    fn short_range_examples() {
        let u = UnitsConfig::reduced();
        let cfg = MsmConfig::new(1.0, 1.0, 1);
        let (phi, _) = short_range(&pair(0.5), &cfg, &u).unwrap();
        assert!((phi[0] - 0.4140625).abs() < 1e-15);
        assert!((phi[1] - 0.4140625).abs() < 1e-15);
        let (phi, f) = short_range(&pair(1.0), &cfg, &u).unwrap();
        assert_eq!(phi, vec![0.0, 0.0]);
        assert_eq!(f, vec![Vec3::ZERO; 2]);
        let one = ParticleSystem::new(vec![Vec3::splat(1.0)], vec![Vec3::ZERO], vec![1.0], vec![1.0], Vec3::splat(2.0)).unwrap();
        assert_eq!(short_range(&one, &cfg, &u).unwrap().0, vec![0.0]);
        let mut c = pair(1.0);
        c.positions[1] = c.positions[0];
        assert!(matches!(short_range(&c, &cfg, &u), Err(Error::CoincidentParticles(0, 1))));
    }

    #[test]
    fn on_grid_single_level_matches_direct() {
        let u = UnitsConfig::reduced();
        let pts = [[1, 2, 3], [4, 4, 1], [2, 5, 5], [6, 1, 2], [3, 3, 6]];
        let positions: Vec<Vec3> = pts.iter().map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64) * 2.0).collect();
        let n = positions.len();
        let s = ParticleSystem::new(
            positions,
            vec![Vec3::ZERO; n],
            vec![1.0, -1.0, 0.5, -0.7, 0.2],
            vec![1.0; n],
            Vec3::splat(14.0),
        )
        .unwrap();
        let r = msm_potential(&s, &MsmConfig::new(4.0, 2.0, 1), &u).unwrap();
        let d = direct_coulomb(&s, &u).unwrap();
        for i in 0..n {
            assert!((r.per_particle_potential[i] - d.per_particle_potential[i]).abs() < 1e-10);
        }
        assert!((r.total_energy - d.total_energy).abs() < 1e-10);
    }

    #[test]
    fn parts_add_up() {
        let u = UnitsConfig::physical();
        let s = generate_random_system(40, Vec3::splat(16.0), ChargeScheme::RandomNeutral, 1.5, 3).unwrap();
        let r = msm_potential(&s, &MsmConfig::new(6.0, 2.0, 2), &u).unwrap();
        let sp = r.short_part.as_ref().unwrap();
        let lp = r.long_part.as_ref().unwrap();
        for i in 0..s.len() {
            assert_eq!(r.per_particle_potential[i], sp[i] + lp[i]);
        }
        let e = PotentialResult::energy_from_potentials(&s.charges, &r.per_particle_potential, &u);
        assert_eq!(e, r.total_energy);
    }

    #[test]
    fn accuracy_on_random_neutral_system() {
        let u = UnitsConfig::physical();
        let s = generate_random_system(500, Vec3::splat(40.0), ChargeScheme::RandomNeutral, 1.5, 42).unwrap();
        let d = direct_coulomb(&s, &u).unwrap();
        let r = msm_potential(&s, &MsmConfig::new(8.0, 2.0, 3), &u).unwrap();
        let num: f64 = r.per_particle_potential.iter().zip(&d.per_particle_potential).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = d.per_particle_potential.iter().map(|b| b * b).sum();
        assert!((num / den).sqrt() < 0.01, "{}", (num / den).sqrt());
        assert!(rel_err(r.total_energy, d.total_energy) < 0.01);
    }

    #[test]
    fn forces_match_finite_differences() {
        let u = UnitsConfig::reduced();
        let s = generate_random_system(50, Vec3::splat(14.0), ChargeScheme::RandomNeutral, 1.2, 21).unwrap();
        let cfg = MsmConfig::new(5.0, 2.0, 2);
        let r = msm_potential(&s, &cfg, &u).unwrap();
        let eps = 1e-4;
        for i in [0, 17, 49] {
            for ax in 0..3 {
                let mut p = s.clone();
                p.positions[i][ax] += eps;
                let ep = msm_potential(&p, &cfg, &u).unwrap().total_energy;
                p.positions[i][ax] -= 2.0 * eps;
                let em = msm_potential(&p, &cfg, &u).unwrap().total_energy;
                let fd = -(ep - em) / (2.0 * eps);
                let an = r.per_particle_force[i][ax];
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-2), "{i} {ax}: {fd} vs {an}");
            }
        }
    }

    #[test]
    fn net_force_small_but_not_asserted_zero() {
        let u = UnitsConfig::reduced();
        let s = generate_random_system(80, Vec3::splat(16.0), ChargeScheme::RandomNeutral, 1.2, 5).unwrap();
        let r = msm_potential(&s, &MsmConfig::new(6.0, 2.0, 2), &u).unwrap();
        let sum_abs: f64 = r.per_particle_force.iter().map(|f| f.norm()).sum();
        assert!(r.net_force().norm() < 1e-2 * sum_abs);
    }

    #[test]
    fn levels_csv_header_and_rows() {
        let s = pair(1.0);
        let cfg = MsmConfig::new(2.0, 2.0, 2);
        let (_, lv) = msm_potential_with_levels(&s, &cfg, &UnitsConfig::reduced()).unwrap();
        let mut buf = Vec::new();
        write_levels_csv(&lv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("level,ix,iy,iz,x,y,z,charge,potential\n"));
        let rows = lv.iter().map(|l| l.len()).sum::<usize>();
        assert_eq!(text.lines().count(), rows + 1);
    }
}
