use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use pmsm_core::xyz::load_system;
use pmsm_core::{
    generate_random_system, ChargeScheme, CutoffParams, Electrostatics, ForceModel, MsmConfig, ParticleSystem,
    Repulsion, UnitsConfig, Vec3,
};

use crate::args::{FieldKind, FieldParams, GenSpec, Scheme, SystemArgs, Units};
use crate::error::{CliError, CliResult};

pub fn generate(spec: &GenSpec, seed: u64) -> CliResult<ParticleSystem> {
    let scheme = match spec.scheme {
        Scheme::AllPlusOne => ChargeScheme::AllPlusOne,
        Scheme::Alternating => ChargeScheme::Alternating,
        Scheme::RandomNeutral => ChargeScheme::RandomNeutral,
    };
    let mut s = generate_random_system(spec.n, Vec3::splat(spec.box_edge), scheme, spec.min_sep, seed)?;
    if let Some(m) = spec.mass {
        if !(m.is_finite() && m > 0.0) {
            return Err(CliError::Config(format!("mass must be positive, got {m}")));
        }
        s = s.with_uniform_mass(m);
    }
    Ok(s)
}

pub fn load(args: &SystemArgs, seed: u64) -> CliResult<(ParticleSystem, UnitsConfig)> {
    let units = match args.units {
        Units::Physical => UnitsConfig::physical(),
        Units::Reduced => UnitsConfig::reduced(),
    };
    let system = match &args.input {
        Some(path) => {
            let mut s = load_system(path).map_err(|e| match e {
                pmsm_core::Error::Io(io) => CliError::Config(format!("cannot read {}: {io}", path.display())),
                other => CliError::Core(other),
            })?;
            if let Some(m) = args.generate.mass {
                s = s.with_uniform_mass(m);
            }
            s.validate()?;
            s
        }
        None => generate(&args.generate, seed)?,
    };
    Ok((system, units))
}

pub fn force_model(kind: FieldKind, p: &FieldParams) -> CliResult<ForceModel> {
    let electrostatics = match kind {
        FieldKind::Direct => Electrostatics::Direct,
        FieldKind::SimpleCutoff => Electrostatics::SimpleCutoff(CutoffParams::new(p.cutoff)),
        FieldKind::Wolf => Electrostatics::Wolf(CutoffParams::wolf(p.cutoff, p.alpha)),
        FieldKind::Msm => Electrostatics::Msm(MsmConfig::new(p.a, p.h, p.levels)),
    };
    let mut model = ForceModel::new(electrostatics);
    if p.repulsion {
        model = model.with_repulsion(Repulsion::default());
    }
    model.validate()?;
    Ok(model)
}

pub fn positive(name: &str, v: f64) -> CliResult<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

pub fn at_least_one(name: &str, v: usize) -> CliResult<()> {
    if v >= 1 {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be at least 1")))
    }
}

pub fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    fs::create_dir_all(dir).map_err(pmsm_core::Error::from)?;
    Ok(BufWriter::new(File::create(dir.join(name)).map_err(pmsm_core::Error::from)?))
}
