//! Particle systems, unit conventions and deterministic fixture generation.
//!
//! Units: positions in Å, time in fs, mass in amu, charge in elementary
//! charges. Energies are in whatever unit the Coulomb constant implies
//! (kcal/mol for [`UnitsConfig::physical`]).

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, Vec3};

/// Coulomb constant in kcal·Å/(mol·e²).
pub const COULOMB_KCAL: f64 = 332.0636;

/// Converts kcal/(mol·Å·amu) into Å/fs².
pub const KCAL_PER_AMU_TO_ACCEL: f64 = 4.184e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitsConfig {
    /// Prefactor 1/(4πε₀) in energy·Å/e².
    pub coulomb_constant: f64,
    /// Factor turning force/mass into acceleration in Å/fs².
    pub force_to_accel: f64,
}

impl UnitsConfig {
    pub fn physical() -> Self {
        UnitsConfig {
            coulomb_constant: COULOMB_KCAL,
            force_to_accel: KCAL_PER_AMU_TO_ACCEL,
        }
    }

    /// k_C = 1 and unit conversion 1, for analytic checks.
    pub fn reduced() -> Self {
        UnitsConfig {
            coulomb_constant: 1.0,
            force_to_accel: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coulomb_constant > 0.0 && self.coulomb_constant.is_finite()) {
            return Err(Error::Config(format!(
                "coulomb_constant must be positive, got {}",
                self.coulomb_constant
            )));
        }
        if !(self.force_to_accel > 0.0 && self.force_to_accel.is_finite()) {
            return Err(Error::Config(format!(
                "force_to_accel must be positive, got {}",
                self.force_to_accel
            )));
        }
        Ok(())
    }
}

impl Default for UnitsConfig {
    fn default() -> Self {
        UnitsConfig::physical()
    }
}

/// N particles with open boundaries. The box only fixes grid extents and
/// the generation volume; particles may leave it during dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    pub positions: Vec<Vec3>,
    pub velocities: Vec<Vec3>,
    pub charges: Vec<f64>,
    pub masses: Vec<f64>,
    pub box_dims: Vec3,
}

impl ParticleSystem {
    /// Builds a system and checks every construction invariant.
    pub fn new(
        positions: Vec<Vec3>,
        velocities: Vec<Vec3>,
        charges: Vec<f64>,
        masses: Vec<f64>,
        box_dims: Vec3,
    ) -> Result<Self> {
        let sys = ParticleSystem {
            positions,
            velocities,
            charges,
            masses,
            box_dims,
        };
        sys.validate()?;
        for (i, p) in sys.positions.iter().enumerate() {
            for ax in 0..3 {
                if p[ax] < 0.0 || p[ax] > sys.box_dims[ax] {
                    return Err(Error::InvalidSystem(format!(
                        "particle {i} at {p} lies outside the box {}",
                        sys.box_dims
                    )));
                }
            }
        }
        Ok(sys)
    }

    /// Checks lengths, finiteness and masses, but not box containment.
    pub fn validate(&self) -> Result<()> {
        let n = self.positions.len();
        if n == 0 {
            return Err(Error::InvalidSystem("system has no particles".into()));
        }
        if self.velocities.len() != n || self.charges.len() != n || self.masses.len() != n {
            return Err(Error::InvalidSystem(format!(
                "length mismatch: {} positions, {} velocities, {} charges, {} masses",
                n,
                self.velocities.len(),
                self.charges.len(),
                self.masses.len()
            )));
        }
        if !self.box_dims.is_finite() || self.box_dims.x <= 0.0 || self.box_dims.y <= 0.0 || self.box_dims.z <= 0.0
        {
            return Err(Error::InvalidSystem(format!("box {} must be positive", self.box_dims)));
        }
        for i in 0..n {
            if !self.positions[i].is_finite() || !self.velocities[i].is_finite() || !self.charges[i].is_finite() {
                return Err(Error::InvalidSystem(format!("particle {i} has a non-finite field")));
            }
            if !(self.masses[i] > 0.0 && self.masses[i].is_finite()) {
                return Err(Error::InvalidSystem(format!(
                    "particle {i} has non-positive mass {}",
                    self.masses[i]
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn with_uniform_mass(mut self, mass: f64) -> Self {
        self.masses.iter_mut().for_each(|m| *m = mass);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.positions.iter().all(|p| p.is_finite()) && self.velocities.iter().all(|v| v.is_finite())
    }

    /// Smallest and largest corner of the region spanned by the box and
    /// every particle position.
    pub fn extent(&self) -> (Vec3, Vec3) {
        self.positions
            .iter()
            .fold((Vec3::ZERO, self.box_dims), |(lo, hi), p| (lo.min(*p), hi.max(*p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeScheme {
    AllPlusOne,
    /// +1, −1, +1, … in index order.
    Alternating,
    /// The alternating charges shuffled by the seeded generator.
    RandomNeutral,
}

impl std::str::FromStr for ChargeScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_plus_one" | "all-plus-one" => Ok(ChargeScheme::AllPlusOne),
            "alternating" => Ok(ChargeScheme::Alternating),
            "random_neutral" | "random-neutral" => Ok(ChargeScheme::RandomNeutral),
            other => Err(Error::Config(format!("unknown charge scheme '{other}'"))),
        }
    }
}

/// Attempts allowed per requested particle before giving up.
pub const PLACEMENT_ATTEMPTS_PER_PARTICLE: usize = 10_000;

/// Uniform rejection sampling in the box. Masses are 1 amu, velocities zero.
pub fn generate_random_system(
    n: usize,
    box_dims: Vec3,
    scheme: ChargeScheme,
    min_separation: f64,
    seed: u64,
) -> Result<ParticleSystem> {
    if n == 0 {
        return Err(Error::Config("n must be at least 1".into()));
    }
    if min_separation.is_nan() || min_separation < 0.0 {
        return Err(Error::Config(format!("min_separation must be non-negative, got {min_separation}")));
    }
    if !(box_dims.x > 0.0 && box_dims.y > 0.0 && box_dims.z > 0.0) {
        return Err(Error::Config(format!("box {box_dims} must be positive")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let budget = PLACEMENT_ATTEMPTS_PER_PARTICLE * n;
    let min2 = min_separation * min_separation;
    let mut positions: Vec<Vec3> = Vec::with_capacity(n);
    let mut attempts = 0;
    while positions.len() < n {
        if attempts == budget {
            return Err(Error::Placement {
                placed: positions.len(),
                requested: n,
                attempts,
            });
        }
        attempts += 1;
        let p = Vec3::new(
            rng.random::<f64>() * box_dims.x,
            rng.random::<f64>() * box_dims.y,
            rng.random::<f64>() * box_dims.z,
        );
        if positions.iter().all(|q| (*q - p).norm2() >= min2) {
            positions.push(p);
        }
    }
    let mut charges: Vec<f64> = match scheme {
        ChargeScheme::AllPlusOne => vec![1.0; n],
        ChargeScheme::Alternating | ChargeScheme::RandomNeutral => {
            (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
        }
    };
    if scheme == ChargeScheme::RandomNeutral {
        charges.shuffle(&mut rng);
    }
    ParticleSystem::new(positions, vec![Vec3::ZERO; n], charges, vec![1.0; n], box_dims)
}

pub fn total_charge(system: &ParticleSystem) -> f64 {
    system.charges.iter().sum()
}

pub fn center_of_mass(system: &ParticleSystem) -> Vec3 {
    let mut weighted = Vec3::ZERO;
    let mut mass = 0.0;
    for (p, m) in system.positions.iter().zip(&system.masses) {
        weighted += *p * *m;
        mass += m;
    }
    weighted / mass
}

/// Σ ½ m |v|², in amu·Å²/fs² (divide by `force_to_accel` for energy units).
pub fn kinetic_energy(system: &ParticleSystem) -> f64 {
    system
        .velocities
        .iter()
        .zip(&system.masses)
        .map(|(v, m)| 0.5 * m * v.norm2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_particle_generation() {
        let s = generate_random_system(1, Vec3::splat(10.0), ChargeScheme::AllPlusOne, 0.0, 7).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.charges[0], 1.0);
        assert_eq!(s.velocities[0], Vec3::ZERO);
    }

    #[test]
    fn alternating_pair_is_neutral() {
        let s = generate_random_system(2, Vec3::splat(10.0), ChargeScheme::Alternating, 1.0, 1).unwrap();
        assert_eq!(total_charge(&s), 0.0);
    }

    #[test]
    fn random_neutral_respects_separation() {
        let s = generate_random_system(100, Vec3::splat(20.0), ChargeScheme::RandomNeutral, 1.0, 42).unwrap();
        let mut pairs = 0;
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert!((s.positions[i] - s.positions[j]).norm() >= 1.0);
                pairs += 1;
            }
        }
        assert_eq!(pairs, 4950);
        assert_eq!(total_charge(&s), 0.0);
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_random_system(50, Vec3::splat(15.0), ChargeScheme::RandomNeutral, 1.0, 9).unwrap();
        let b = generate_random_system(50, Vec3::splat(15.0), ChargeScheme::RandomNeutral, 1.0, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_random_system(50, Vec3::splat(15.0), ChargeScheme::RandomNeutral, 1.0, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn crowded_box_fails_placement() {
        let err = generate_random_system(50, Vec3::splat(2.0), ChargeScheme::AllPlusOne, 1.5, 3).unwrap_err();
        assert!(matches!(err, Error::Placement { requested: 50, .. }));
    }

    #[test]
    fn diagnostics() {
        let s = ParticleSystem::new(
            vec![Vec3::ZERO],
            vec![Vec3::new(3.0, 0.0, 0.0)],
            vec![1.0],
            vec![2.0],
            Vec3::splat(1.0),
        )
        .unwrap();
        assert_eq!(kinetic_energy(&s), 9.0);

        let line = ParticleSystem::new(
            vec![Vec3::ZERO, Vec3::new(1.0, 0.0, 0.0), Vec3::new(2.0, 0.0, 0.0)],
            vec![Vec3::ZERO; 3],
            vec![1.0, -1.0, 1.0],
            vec![1.0; 3],
            Vec3::splat(3.0),
        )
        .unwrap();
        assert_eq!(center_of_mass(&line), Vec3::new(1.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_bad_systems() {
        let bad_mass = ParticleSystem::new(vec![Vec3::ZERO], vec![Vec3::ZERO], vec![1.0], vec![0.0], Vec3::splat(1.0));
        assert!(bad_mass.is_err());
        let mismatch = ParticleSystem::new(vec![Vec3::ZERO; 2], vec![Vec3::ZERO], vec![1.0], vec![1.0], Vec3::splat(1.0));
        assert!(mismatch.is_err());
        let outside = ParticleSystem::new(
            vec![Vec3::new(2.0, 0.0, 0.0)],
            vec![Vec3::ZERO],
            vec![1.0],
            vec![1.0],
            Vec3::splat(1.0),
        );
        assert!(outside.is_err());
        let nan = ParticleSystem::new(
            vec![Vec3::new(f64::NAN, 0.0, 0.0)],
            vec![Vec3::ZERO],
            vec![1.0],
            vec![1.0],
            Vec3::splat(1.0),
        );
        assert!(nan.is_err());
        assert!(UnitsConfig { coulomb_constant: 0.0, force_to_accel: 1.0 }.validate().is_err());
    }
}
