//! Velocity-Verlet integration and the slice propagators used by parareal.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::cost::{msm_flops_simplified, Q_G_SIMPLE_CUTOFF};
use crate::msm::{msm_potential, MsmConfig};
use crate::reference::{direct_coulomb, simple_cutoff, wolf_summation, CutoffParams, PotentialResult};
use crate::system::kinetic_energy;
use crate::xyz::format_frame;
use crate::{Error, ParticleSystem, Result, UnitsConfig, Vec3};

/// Anything that can produce energies and forces from positions and charges.
pub trait ForceField: Send + Sync {
    fn evaluate(&self, system: &ParticleSystem, units: &UnitsConfig) -> Result<PotentialResult>;

    /// Modelled floating-point operations for one evaluation on `n` particles.
    fn cost_flops_per_step(&self, n: usize) -> f64;

    fn name(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Electrostatics {
    Direct,
    SimpleCutoff(CutoffParams),
    Wolf(CutoffParams),
    Msm(MsmConfig),
}

/// Short-range wall `ε (σ/r)^12` summed over all pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Repulsion {
    pub epsilon: f64,
    pub sigma: f64,
}

impl Default for Repulsion {
    fn default() -> Self {
        Repulsion { epsilon: 0.1, sigma: 1.0 }
    }
}

impl Repulsion {
    /// Adds the repulsive energy and forces into `result`.
    fn apply(&self, system: &ParticleSystem, result: &mut PotentialResult) -> Result<()> {
        let s12 = self.sigma.powi(12);
        let mut energy = 0.0;
        for i in 0..system.len() {
            for j in i + 1..system.len() {
                let d = system.positions[i] - system.positions[j];
                let r2 = d.norm2();
                if r2 == 0.0 {
                    return Err(Error::CoincidentParticles(i, j));
                }
                let inv6 = 1.0 / (r2 * r2 * r2);
                let e = self.epsilon * s12 * inv6 * inv6;
                energy += e;
                let f = d * (12.0 * e / r2);
                result.per_particle_force[i] += f;
                result.per_particle_force[j] -= f;
            }
        }
        result.total_energy += energy;
        Ok(())
    }
}

/// Pair cost of the all-pairs loop.
const DIRECT_PAIR_FLOPS: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceModel {
    pub electrostatics: Electrostatics,
    pub repulsion: Option<Repulsion>,
}

impl ForceModel {
    pub fn new(electrostatics: Electrostatics) -> Self {
        ForceModel { electrostatics, repulsion: None }
    }

    pub fn with_repulsion(mut self, repulsion: Repulsion) -> Self {
        self.repulsion = Some(repulsion);
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.electrostatics {
            Electrostatics::Direct => {}
            Electrostatics::SimpleCutoff(p) => p.validate()?,
            Electrostatics::Wolf(p) => {
                p.validate()?;
                if p.wolf_alpha.is_none() {
                    return Err(Error::Config("wolf summation needs wolf_alpha".into()));
                }
            }
            Electrostatics::Msm(c) => c.validate()?,
        }
        if let Some(r) = &self.repulsion {
            if !(r.epsilon >= 0.0 && r.sigma > 0.0 && r.epsilon.is_finite() && r.sigma.is_finite()) {
                return Err(Error::Config("repulsion needs epsilon ≥ 0 and sigma > 0".into()));
            }
        }
        Ok(())
    }
}

impl ForceField for ForceModel {
    fn evaluate(&self, system: &ParticleSystem, units: &UnitsConfig) -> Result<PotentialResult> {
        let mut result = match &self.electrostatics {
            Electrostatics::Direct => direct_coulomb(system, units)?,
            Electrostatics::SimpleCutoff(p) => simple_cutoff(system, p, units)?,
            Electrostatics::Wolf(p) => wolf_summation(system, p, units)?,
            Electrostatics::Msm(c) => msm_potential(system, c, units)?,
        };
        if let Some(rep) = &self.repulsion {
            rep.apply(system, &mut result)?;
        }
        Ok(result)
    }

    fn cost_flops_per_step(&self, n: usize) -> f64 {
        let n = n as f64;
        match &self.electrostatics {
            Electrostatics::Direct => DIRECT_PAIR_FLOPS * n * (n - 1.0) / 2.0,
            Electrostatics::SimpleCutoff(_) | Electrostatics::Wolf(_) => Q_G_SIMPLE_CUTOFF * n,
            Electrostatics::Msm(c) => msm_flops_simplified(c.cutoff_a, c.spacing_h, n),
        }
    }

    fn name(&self) -> String {
        let base = match &self.electrostatics {
            Electrostatics::Direct => "direct".to_string(),
            Electrostatics::SimpleCutoff(p) => format!("simple-cutoff(rc={})", p.cutoff),
            Electrostatics::Wolf(p) => format!("wolf(rc={} alpha={})", p.cutoff, p.wolf_alpha.unwrap_or(0.0)),
            Electrostatics::Msm(c) => format!("msm(a={} h={} l={})", c.cutoff_a, c.spacing_h, c.levels_l),
        };
        if self.repulsion.is_some() {
            format!("{base}+repulsion")
        } else {
            base
        }
    }
}

/// A system together with the force acting on it at its current positions.
#[derive(Debug, Clone)]
pub struct VerletState {
    pub system: ParticleSystem,
    pub forces: Vec<Vec3>,
    pub potential_energy: f64,
    pub steps_taken: usize,
}

impl VerletState {
    pub fn new(system: ParticleSystem, force_field: &dyn ForceField, units: &UnitsConfig) -> Result<Self> {
        let eval = force_field.evaluate(&system, units)?;
        Ok(VerletState {
            system,
            forces: eval.per_particle_force,
            potential_energy: eval.total_energy,
            steps_taken: 0,
        })
    }

    /// One velocity-Verlet step, reusing the stored force as the leading force.
    pub fn step(&mut self, force_field: &dyn ForceField, dt: f64, units: &UnitsConfig) -> Result<()> {
        let s = &mut self.system;
        let c = 0.5 * dt * units.force_to_accel;
        for i in 0..s.len() {
            s.velocities[i] += self.forces[i] * (c / s.masses[i]);
            s.positions[i] += s.velocities[i] * dt;
        }
        let eval = force_field.evaluate(s, units)?;
        for i in 0..s.len() {
            s.velocities[i] += eval.per_particle_force[i] * (c / s.masses[i]);
        }
        self.forces = eval.per_particle_force;
        self.potential_energy = eval.total_energy;
        self.steps_taken += 1;
        if !s.is_finite() || !self.potential_energy.is_finite() {
            return Err(Error::NonFinite { step: self.steps_taken });
        }
        Ok(())
    }

    pub fn energy(&self, units: &UnitsConfig) -> EnergyReport {
        let kinetic = kinetic_energy(&self.system) / units.force_to_accel;
        EnergyReport {
            kinetic,
            potential: self.potential_energy,
            total: kinetic + self.potential_energy,
        }
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("dt must be positive, got {dt}")));
    }
    Ok(())
}

/// Single step from a bare system (evaluates the leading force first).
pub fn verlet_step(
    system: &ParticleSystem,
    force_field: &dyn ForceField,
    dt: f64,
    units: &UnitsConfig,
) -> Result<ParticleSystem> {
    check_dt(dt)?;
    let mut st = VerletState::new(system.clone(), force_field, units)?;
    st.step(force_field, dt, units)?;
    Ok(st.system)
}

/// One slice of `steps_per_slice` integrator steps.
#[derive(Clone)]
pub struct PropagatorSpec {
    pub force_field: Arc<dyn ForceField>,
    pub dt: f64,
    pub steps_per_slice: usize,
}

impl fmt::Debug for PropagatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PropagatorSpec")
            .field("force_field", &self.force_field.name())
            .field("dt", &self.dt)
            .field("steps_per_slice", &self.steps_per_slice)
            .finish()
    }
}

impl PropagatorSpec {
    pub fn new(force_field: impl ForceField + 'static, dt: f64, steps_per_slice: usize) -> Self {
        PropagatorSpec {
            force_field: Arc::new(force_field),
            dt,
            steps_per_slice,
        }
    }

    pub fn slice_length(&self) -> f64 {
        self.dt * self.steps_per_slice as f64
    }

    pub fn validate(&self) -> Result<()> {
        check_dt(self.dt)?;
        if self.steps_per_slice == 0 {
            return Err(Error::Config("steps_per_slice must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn propagate(spec: &PropagatorSpec, system: &ParticleSystem, units: &UnitsConfig) -> Result<ParticleSystem> {
    spec.validate()?;
    let ff = spec.force_field.as_ref();
    let mut st = VerletState::new(system.clone(), ff, units)?;
    for _ in 0..spec.steps_per_slice {
        st.step(ff, spec.dt, units)?;
    }
    Ok(st.system)
}

/// Energies in the units of `coulomb_constant` (kcal/mol with physical units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn energy_report(system: &ParticleSystem, force_field: &dyn ForceField, units: &UnitsConfig) -> Result<EnergyReport> {
    let potential = force_field.evaluate(system, units)?.total_energy;
    let kinetic = kinetic_energy(system) / units.force_to_accel;
    Ok(EnergyReport {
        kinetic,
        potential,
        total: kinetic + potential,
    })
}

pub const ENERGY_CSV_HEADER: &str = "step,time_fs,kinetic,potential,total";

pub fn energy_csv_row(step: usize, dt: f64, e: &EnergyReport) -> String {
    format!("{step},{},{:e},{:e},{:e}", step as f64 * dt, e.kinetic, e.potential, e.total)
}

/// Runs `steps` steps, calling `observe` on the initial state and after every
/// step with the step index and energies.
pub fn run_md<F>(
    system: ParticleSystem,
    force_field: &dyn ForceField,
    dt: f64,
    steps: usize,
    units: &UnitsConfig,
    mut observe: F,
) -> Result<ParticleSystem>
where
    F: FnMut(usize, &ParticleSystem, &EnergyReport) -> Result<()>,
{
    check_dt(dt)?;
    units.validate()?;
    let mut st = VerletState::new(system, force_field, units)?;
    observe(0, &st.system, &st.energy(units))?;
    for step in 1..=steps {
        st.step(force_field, dt, units)?;
        observe(step, &st.system, &st.energy(units))?;
    }
    Ok(st.system)
}

/// Streams extended-XYZ frames and energy rows to two writers.
pub struct TrajectoryWriter<T: Write, E: Write> {
    traj: T,
    energy: E,
    dt: f64,
}

impl<T: Write, E: Write> TrajectoryWriter<T, E> {
    pub fn new(traj: T, mut energy: E, dt: f64) -> Result<Self> {
        writeln!(energy, "{ENERGY_CSV_HEADER}")?;
        Ok(TrajectoryWriter { traj, energy, dt })
    }

    pub fn record(&mut self, step: usize, system: &ParticleSystem, e: &EnergyReport) -> Result<()> {
        let comment = format!("step={step} time_fs={}", step as f64 * self.dt);
        self.traj.write_all(format_frame(system, &comment).as_bytes())?;
        writeln!(self.energy, "{}", energy_csv_row(step, self.dt, e))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.traj.flush()?;
        self.energy.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{generate_random_system, ChargeScheme};
    use proptest::prelude::*;

    fn two_charges(sep: f64) -> ParticleSystem {
        ParticleSystem::new(
            vec![Vec3::new(4.0, 5.0, 5.0), Vec3::new(4.0 + sep, 5.0, 5.0)],
            vec![Vec3::ZERO; 2],
            vec![1.0, 1.0],
            vec![1.0, 1.0],
            Vec3::splat(10.0),
        )
        .unwrap()
    }

    fn direct() -> ForceModel {
        ForceModel::new(Electrostatics::Direct)
    }

    #[test]
    fn free_flight() {
        let mut s = two_charges(2.0);
        s.charges = vec![0.0, 0.0];
        s.velocities = vec![Vec3::new(0.1, -0.2, 0.3), Vec3::new(0.0, 0.5, 0.0)];
        let next = verlet_step(&s, &direct(), 0.5, &UnitsConfig::physical()).unwrap();
        for i in 0..2 {
            assert_eq!(next.positions[i], s.positions[i] + s.velocities[i] * 0.5);
            assert_eq!(next.velocities[i], s.velocities[i]);
        }
    }

    #[test]
    fn hand_evaluated_step() {
        let s = two_charges(2.0);
        let next = verlet_step(&s, &direct(), 0.001, &UnitsConfig::reduced()).unwrap();
        assert!((s.positions[0].x - next.positions[0].x - 1.25e-7).abs() < 1e-15);
        assert!((next.positions[1].x - s.positions[1].x - 1.25e-7).abs() < 1e-15);
    }

    #[test]
    fn reversibility() {
        let u = UnitsConfig::reduced();
        let ff = direct();
        let mut st = VerletState::new(two_charges(2.0), &ff, &u).unwrap();
        for _ in 0..100 {
            st.step(&ff, 0.01, &u).unwrap();
        }
        st.system.velocities.iter_mut().for_each(|v| *v = -*v);
        let mut back = VerletState::new(st.system, &ff, &u).unwrap();
        for _ in 0..100 {
            back.step(&ff, 0.01, &u).unwrap();
        }
        let start = two_charges(2.0);
        for i in 0..2 {
            assert!((back.system.positions[i] - start.positions[i]).norm() < 1e-8);
        }
    }

    #[test]
    fn single_slice_equals_step() {
        let u = UnitsConfig::physical();
        let s = generate_random_system(10, Vec3::splat(12.0), ChargeScheme::RandomNeutral, 2.0, 1).unwrap();
        let spec = PropagatorSpec::new(direct(), 0.5, 1);
        assert_eq!(propagate(&spec, &s, &u).unwrap(), verlet_step(&s, &direct(), 0.5, &u).unwrap());
    }

    #[test]
    fn fine_and_coarse_differ() {
        let u = UnitsConfig::reduced();
        let s = generate_random_system(10, Vec3::splat(12.0), ChargeScheme::RandomNeutral, 2.0, 1).unwrap();
        let f = PropagatorSpec::new(ForceModel::new(Electrostatics::Msm(MsmConfig::new(8.0, 2.0, 2))), 0.01, 5);
        let g = PropagatorSpec::new(ForceModel::new(Electrostatics::SimpleCutoff(CutoffParams::new(6.0))), 0.01, 5);
        assert_ne!(propagate(&f, &s, &u).unwrap(), propagate(&g, &s, &u).unwrap());
    }

    #[test]
    fn energy_report_parts() {
        let u = UnitsConfig::physical();
        let s = two_charges(3.0);
        let e = energy_report(&s, &direct(), &u).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert_eq!(e.total, e.potential);

        let mut free = s.clone();
        free.charges = vec![0.0, 0.0];
        free.velocities = vec![Vec3::new(0.01, 0.0, 0.0), Vec3::new(-0.01, 0.0, 0.0)];
        let e0 = energy_report(&free, &direct(), &u).unwrap();
        assert_eq!(e0.total, e0.kinetic);
        let later = propagate(&PropagatorSpec::new(direct(), 1.0, 10), &free, &u).unwrap();
        assert_eq!(energy_report(&later, &direct(), &u).unwrap().total, e0.total);
    }

    #[test]
    fn repulsion_adds_gradient_consistent_forces() {
        let u = UnitsConfig::reduced();
        let ff = direct().with_repulsion(Repulsion::default());
        let s = two_charges(1.1);
        let r = ff.evaluate(&s, &u).unwrap();
        let eps = 1e-6;
        let mut p = s.clone();
        p.positions[1].x += eps;
        let ep = ff.evaluate(&p, &u).unwrap().total_energy;
        p.positions[1].x -= 2.0 * eps;
        let em = ff.evaluate(&p, &u).unwrap().total_energy;
        let fd = -(ep - em) / (2.0 * eps);
        assert!((fd - r.per_particle_force[1].x).abs() < 1e-6 * fd.abs());
        assert!(r.total_energy > direct().evaluate(&s, &u).unwrap().total_energy);
    }

    #[test]
    fn invalid_inputs() {
        let s = two_charges(2.0);
        let u = UnitsConfig::reduced();
        assert!(verlet_step(&s, &direct(), 0.0, &u).is_err());
        assert!(propagate(&PropagatorSpec::new(direct(), 0.1, 0), &s, &u).is_err());
        let wolf = ForceModel::new(Electrostatics::Wolf(CutoffParams::new(5.0)));
        assert!(wolf.validate().is_err());
    }

    #[test]
    fn non_finite_state_is_reported() {
        let u = UnitsConfig::reduced();
        let mut s = two_charges(1e-9);
        s.masses = vec![1e-300, 1e-300];
        let err = propagate(&PropagatorSpec::new(direct(), 1.0, 3), &s, &u).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn writer_rows() {
        let u = UnitsConfig::physical();
        let s = two_charges(3.0);
        let (mut traj, mut energy) = (Vec::new(), Vec::new());
        let mut w = TrajectoryWriter::new(&mut traj, &mut energy, 0.5).unwrap();
        run_md(s, &direct(), 0.5, 4, &u, |k, sys, e| w.record(k, sys, e)).unwrap();
        w.finish().unwrap();
        let text = String::from_utf8(energy).unwrap();
        assert_eq!(text.lines().next().unwrap(), ENERGY_CSV_HEADER);
        assert_eq!(text.lines().count(), 6);
        assert_eq!(String::from_utf8(traj).unwrap().lines().count(), 5 * 4);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn composition_is_bitwise(seed in 0u64..1000, k in 1usize..6) {
            let u = UnitsConfig::physical();
            let s = generate_random_system(6, Vec3::splat(10.0), ChargeScheme::RandomNeutral, 2.0, seed).unwrap();
            let half = PropagatorSpec::new(direct(), 0.5, k);
            let full = PropagatorSpec::new(direct(), 0.5, 2 * k);
            let twice = propagate(&half, &propagate(&half, &s, &u).unwrap(), &u).unwrap();
            prop_assert_eq!(propagate(&full, &s, &u).unwrap(), twice);
        }

        #[test]
        fn reversible_on_random_systems(seed in 0u64..1000) {
            let u = UnitsConfig::reduced();
            let s = generate_random_system(5, Vec3::splat(8.0), ChargeScheme::AllPlusOne, 2.0, seed).unwrap();
            let spec = PropagatorSpec::new(direct(), 0.005, 50);
            let mut fwd = propagate(&spec, &s, &u).unwrap();
            fwd.velocities.iter_mut().for_each(|v| *v = -*v);
            let back = propagate(&spec, &fwd, &u).unwrap();
            for i in 0..s.len() {
                prop_assert!((back.positions[i] - s.positions[i]).norm() < 1e-8);
            }
        }
    }
}
