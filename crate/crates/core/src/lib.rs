//! Multilevel-summation electrostatics, molecular dynamics and parallel-in-time
//! integration, with a cost model for distributing the work.

pub mod cost;
pub mod dynamics;
mod error;
pub mod msm;
pub mod parareal;
pub mod reference;
pub mod system;
mod vec3;
pub mod xyz;

pub use error::{Error, Result};
pub use system::{generate_random_system, ChargeScheme, ParticleSystem, UnitsConfig};
pub use vec3::Vec3;

pub use dynamics::{
    energy_report, propagate, verlet_step, Electrostatics, EnergyReport, ForceField, ForceModel, PropagatorSpec,
    Repulsion, VerletState,
};
pub use msm::{msm_potential, MsmConfig, MsmGridLevel};
pub use parareal::{
    parareal_run, ConvergenceReport, Executor, PararealConfig, RayonExecutor, SequentialExecutor,
};
pub use reference::{direct_coulomb, simple_cutoff, wolf_summation, CutoffParams, PotentialResult};
