//! Shared fixtures for the criterion benches.

use pmsm_core::parareal::PararealConfig;
use pmsm_core::{
    generate_random_system, ChargeScheme, CutoffParams, Electrostatics, ForceModel, MsmConfig, ParticleSystem,
    PropagatorSpec, Vec3,
};

/// Neutral random ions at roughly liquid density for `n`.
pub fn ions(n: usize, seed: u64) -> ParticleSystem {
    let edge = (n as f64 * 128.0).cbrt().max(8.0);
    generate_random_system(n, Vec3::splat(edge), ChargeScheme::RandomNeutral, 1.5, seed)
        .expect("fixture placement")
        .with_uniform_mass(12.0)
}

pub fn msm(a: f64) -> ForceModel {
    ForceModel::new(Electrostatics::Msm(MsmConfig::new(a, 2.0, 3)))
}

pub fn cutoff(rc: f64) -> ForceModel {
    ForceModel::new(Electrostatics::SimpleCutoff(CutoffParams::new(rc)))
}

/// MSM fine and simple-cutoff coarse propagators in reduced units.
pub fn parareal_config(window: usize) -> PararealConfig {
    let fine = PropagatorSpec::new(
        ForceModel::new(Electrostatics::Msm(MsmConfig::new(8.0, 2.0, 2))),
        0.01,
        10,
    );
    let coarse = PropagatorSpec::new(cutoff(6.0), 0.01, 10);
    PararealConfig::new(fine, coarse, window, 5, 1e-6)
}

pub fn parareal_system() -> ParticleSystem {
    generate_random_system(10, Vec3::splat(10.0), ChargeScheme::RandomNeutral, 2.0, 42).expect("fixture placement")
}
