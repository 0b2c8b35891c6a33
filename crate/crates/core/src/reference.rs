//! Pairwise electrostatics: the brute-force Coulomb oracle and the two cheap
//! cutoff force fields used as coarse propagators.
//!
//! Per-particle potentials are stored per unit charge,
//! `φ_i = Σ_{j≠i} q_j κ(r_ij)`, and the energy is `½ k_C Σ_i q_i φ_i`.

use std::f64::consts::PI;

use crate::{Error, ParticleSystem, Result, UnitsConfig, Vec3};

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialResult {
    pub per_particle_potential: Vec<f64>,
    pub per_particle_force: Vec<Vec3>,
    pub total_energy: f64,
    pub short_part: Option<Vec<f64>>,
    pub long_part: Option<Vec<f64>>,
}

impl PotentialResult {
    /// `½ k_C Σ q_i φ_i`, summed in particle order.
    pub fn energy_from_potentials(charges: &[f64], potentials: &[f64], units: &UnitsConfig) -> f64 {
        let mut acc = 0.0;
        for (q, phi) in charges.iter().zip(potentials) {
            acc += q * phi;
        }
        0.5 * units.coulomb_constant * acc
    }

    pub fn net_force(&self) -> Vec3 {
        self.per_particle_force.iter().fold(Vec3::ZERO, |a, f| a + *f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffParams {
    pub cutoff: f64,
    pub wolf_alpha: Option<f64>,
}

impl CutoffParams {
    pub fn new(cutoff: f64) -> Self {
        CutoffParams { cutoff, wolf_alpha: None }
    }

    pub fn wolf(cutoff: f64, alpha: f64) -> Self {
        CutoffParams {
            cutoff,
            wolf_alpha: Some(alpha),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::Config(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        if let Some(a) = self.wolf_alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("wolf_alpha must be non-negative, got {a}")));
            }
        }
        Ok(())
    }
}

/// Sums a radial pair kernel over all pairs closer than `cutoff`.
///
/// `kernel(r)` returns `(κ(r), κ'(r))`. Pairs are visited as `i < j` in
/// index order so the arithmetic is reproducible.
pub(crate) fn pair_sum<K>(
    system: &ParticleSystem,
    units: &UnitsConfig,
    cutoff: Option<f64>,
    kernel: K,
) -> Result<(Vec<f64>, Vec<Vec3>)>
where
    K: Fn(f64) -> (f64, f64),
{
    let n = system.len();
    let k_c = units.coulomb_constant;
    let cut2 = cutoff.map(|c| c * c);
    let mut phi = vec![0.0; n];
    let mut force = vec![Vec3::ZERO; n];
    for i in 0..n {
        let ri = system.positions[i];
        let qi = system.charges[i];
        for j in i + 1..n {
            let d = ri - system.positions[j];
            let r2 = d.norm2();
            if r2 == 0.0 {
                return Err(Error::CoincidentParticles(i, j));
            }
            if let Some(c2) = cut2 {
                if r2 >= c2 {
                    continue;
                }
            }
            let r = r2.sqrt();
            let qj = system.charges[j];
            let (value, slope) = kernel(r);
            phi[i] += qj * value;
            phi[j] += qi * value;
            // F_i = -dU/dr_i = -k q_i q_j κ'(r) d/r
            let f = d * (-k_c * qi * qj * slope / r);
            force[i] += f;
            force[j] -= f;
        }
    }
    Ok((phi, force))
}

fn assemble(system: &ParticleSystem, units: &UnitsConfig, phi: Vec<f64>, force: Vec<Vec3>) -> PotentialResult {
    let total_energy = PotentialResult::energy_from_potentials(&system.charges, &phi, units);
    PotentialResult {
        per_particle_potential: phi,
        per_particle_force: force,
        total_energy,
        short_part: None,
        long_part: None,
    }
}

fn coulomb_kernel(r: f64) -> (f64, f64) {
    let inv = 1.0 / r;
    (inv, -inv * inv)
}

/// Exact all-pairs Coulomb sum, O(N²).
pub fn direct_coulomb(system: &ParticleSystem, units: &UnitsConfig) -> Result<PotentialResult> {
    let (phi, force) = pair_sum(system, units, None, coulomb_kernel)?;
    Ok(assemble(system, units, phi, force))
}

/// Coulomb truncated at `params.cutoff`; pairs at or beyond it contribute nothing.
pub fn simple_cutoff(system: &ParticleSystem, params: &CutoffParams, units: &UnitsConfig) -> Result<PotentialResult> {
    params.validate()?;
    let (phi, force) = pair_sum(system, units, Some(params.cutoff), coulomb_kernel)?;
    Ok(assemble(system, units, phi, force))
}

/// Damped, shifted Coulomb kernel `erfc(αr)/r` truncated at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfKernel {
    pub alpha: f64,
    pub cutoff: f64,
    /// erfc(αa)/a
    shift: f64,
    /// −d/dr[erfc(αr)/r] at r = a
    force_shift: f64,
}

impl WolfKernel {
    pub fn new(cutoff: f64, alpha: f64) -> Self {
        let a = cutoff;
        let shift = libm::erfc(alpha * a) / a;
        WolfKernel {
            alpha,
            cutoff,
            shift,
            force_shift: Self::damped_force(alpha, a),
        }
    }

    fn damped_force(alpha: f64, r: f64) -> f64 {
        libm::erfc(alpha * r) / (r * r) + 2.0 * alpha / PI.sqrt() * (-alpha * alpha * r * r).exp() / r
    }

    /// Damped shifted potential `erfc(αr)/r − erfc(αa)/a`; zero at and past `a`.
    pub fn shifted_potential(&self, r: f64) -> f64 {
        if r >= self.cutoff {
            return 0.0;
        }
        libm::erfc(self.alpha * r) / r - self.shift
    }

    /// Damped shifted force pair energy (per unit charges) and its radial
    /// derivative. Both the value and the derivative vanish at `a`.
    pub fn pair(&self, r: f64) -> (f64, f64) {
        if r >= self.cutoff {
            return (0.0, 0.0);
        }
        let value = self.shifted_potential(r) + self.force_shift * (r - self.cutoff);
        let slope = -Self::damped_force(self.alpha, r) + self.force_shift;
        (value, slope)
    }

    /// Per-particle self energy coefficient `erfc(αa)/(2a) + α/√π`.
    pub fn self_coefficient(&self) -> f64 {
        self.shift / 2.0 + self.alpha / PI.sqrt()
    }
}

/// Wolf summation in its damped-shifted-force form. The force is the exact
/// negative gradient of the returned energy and goes to zero at the cutoff.
pub fn wolf_summation(system: &ParticleSystem, params: &CutoffParams, units: &UnitsConfig) -> Result<PotentialResult> {
    params.validate()?;
    let alpha = params
        .wolf_alpha
        .ok_or_else(|| Error::Config("wolf summation needs wolf_alpha".into()))?;
    let kernel = WolfKernel::new(params.cutoff, alpha);
    let (mut phi, force) = pair_sum(system, units, Some(params.cutoff), |r| kernel.pair(r))?;
    let c = kernel.self_coefficient();
    for (p, q) in phi.iter_mut().zip(&system.charges) {
        *p -= 2.0 * q * c;
    }
    Ok(assemble(system, units, phi, force))
}
