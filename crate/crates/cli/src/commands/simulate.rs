use std::io::Write;

use pmsm_core::dynamics::{energy_csv_row, run_md, ENERGY_CSV_HEADER};
use pmsm_core::msm::{msm_potential_with_levels, write_levels_csv};
use pmsm_core::xyz::{format_frame, save_system};
use pmsm_core::{Electrostatics, ForceField, ForceModel, ParticleSystem, UnitsConfig};

use crate::args::{Cli, GenArgs, SimulateArgs};
use crate::common::{at_least_one, create, force_model, generate, load, positive};
use crate::error::CliResult;

/// Writes `msm_levels.csv` when the model is MSM.
pub fn dump_levels(model: &ForceModel, system: &ParticleSystem, units: &UnitsConfig, out: &std::path::Path) -> CliResult {
    if let Electrostatics::Msm(cfg) = model.electrostatics {
        let (_, levels) = msm_potential_with_levels(system, &cfg, units)?;
        let mut w = create(out, "msm_levels.csv")?;
        write_levels_csv(&levels, &mut w)?;
        w.flush().map_err(pmsm_core::Error::from)?;
    } else {
        eprintln!("pmsm: --dump-levels ignored for {}", model.name());
    }
    Ok(())
}

pub fn simulate(cli: &Cli, a: &SimulateArgs) -> CliResult {
    positive("dt", a.dt)?;
    at_least_one("frame-every", a.frame_every)?;
    let (system, units) = load(&a.system, cli.seed)?;
    let model = force_model(a.force_field, &a.field)?;
    if a.dump_levels {
        dump_levels(&model, &system, &units, &a.out)?;
    }
    let mut energy = create(&a.out, "energy.csv")?;
    let mut traj = create(&a.out, "trajectory.xyz")?;
    writeln!(energy, "{ENERGY_CSV_HEADER}").map_err(pmsm_core::Error::from)?;
    let mut first = None;
    let mut last = None;
    let dt = a.dt;
    run_md(system, &model, dt, a.steps, &units, |step, s, e| {
        writeln!(energy, "{}", energy_csv_row(step, dt, e))?;
        if step % a.frame_every == 0 || step == a.steps {
            let comment = format!("step={step} time_fs={}", step as f64 * dt);
            traj.write_all(format_frame(s, &comment).as_bytes())?;
        }
        first.get_or_insert(e.total);
        last = Some(e.total);
        Ok(())
    })?;
    energy.flush().map_err(pmsm_core::Error::from)?;
    traj.flush().map_err(pmsm_core::Error::from)?;
    let (e0, e1) = (first.unwrap_or(0.0), last.unwrap_or(0.0));
    let drift = if e0 != 0.0 { ((e1 - e0) / e0).abs() } else { (e1 - e0).abs() };
    println!("force_field {}", model.name());
    println!("steps {} dt {}", a.steps, a.dt);
    println!("total_energy initial {e0:.10e} final {e1:.10e} relative_drift {drift:.3e}");
    Ok(())
}

pub fn gen(cli: &Cli, a: &GenArgs) -> CliResult {
    let s = generate(&a.generate, cli.seed)?;
    if let Some(dir) = a.output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(pmsm_core::Error::from)?;
    }
    save_system(&s, &a.output)?;
    let q: f64 = s.charges.iter().sum();
    println!("wrote {} particles (net charge {q}) to {}", s.len(), a.output.display());
    Ok(())
}
