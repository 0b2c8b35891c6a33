use std::io::Write;

use pmsm_core::{direct_coulomb, ForceField, PotentialResult};

use crate::args::{Cli, CompareArgs};
use crate::commands::simulate::dump_levels;
use crate::common::{create, force_model, load};
use crate::error::{CliError, CliResult};

pub const PARTICLES_HEADER: &str = "field,particle,potential_direct,potential_field,potential_abs_error,force_error_norm";
pub const SUMMARY_HEADER: &str = "field,energy_direct,energy_field,energy_rel_error,potential_rel_rms,force_rel_rms";

fn rel_rms(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

pub fn compare(cli: &Cli, a: &CompareArgs) -> CliResult {
    if a.fields.is_empty() {
        return Err(CliError::Config("no fields to compare".into()));
    }
    let (system, units) = load(&a.system, cli.seed)?;
    let models = a.fields.iter().map(|&k| force_model(k, &a.field)).collect::<CliResult<Vec<_>>>()?;
    let oracle = direct_coulomb(&system, &units)?;
    let mut particles = create(&a.out, "compare_particles.csv")?;
    let mut summary = create(&a.out, "compare_summary.csv")?;
    let io = |e: std::io::Error| CliError::Core(e.into());
    writeln!(particles, "{PARTICLES_HEADER}").map_err(io)?;
    writeln!(summary, "{SUMMARY_HEADER}").map_err(io)?;
    println!("{SUMMARY_HEADER}");
    for model in &models {
        if a.dump_levels {
            dump_levels(model, &system, &units, &a.out)?;
        }
        let mut bare = *model;
        bare.repulsion = None;
        let r: PotentialResult = bare.evaluate(&system, &units)?;
        let name = bare.name();
        let (mut dp, mut np, mut df, mut nf) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..system.len() {
            let (pd, pf) = (oracle.per_particle_potential[i], r.per_particle_potential[i]);
            let ferr = (r.per_particle_force[i] - oracle.per_particle_force[i]).norm();
            writeln!(particles, "{name},{i},{pd:e},{pf:e},{:e},{ferr:e}", (pf - pd).abs()).map_err(io)?;
            dp += (pf - pd).powi(2);
            np += pd * pd;
            df += ferr * ferr;
            nf += oracle.per_particle_force[i].norm2();
        }
        let e_rel = if oracle.total_energy != 0.0 {
            ((r.total_energy - oracle.total_energy) / oracle.total_energy).abs()
        } else {
            (r.total_energy - oracle.total_energy).abs()
        };
        let row = format!(
            "{name},{:e},{:e},{e_rel:e},{:e},{:e}",
            oracle.total_energy,
            r.total_energy,
            rel_rms(dp, np),
            rel_rms(df, nf)
        );
        writeln!(summary, "{row}").map_err(io)?;
        println!("{row}");
    }
    particles.flush().map_err(io)?;
    summary.flush().map_err(io)?;
    Ok(())
}
