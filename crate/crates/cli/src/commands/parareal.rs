use std::io::Write;
use std::path::Path;

use pmsm_core::parareal::{
    fine_sequential, parareal_run, rms_position_difference, ConvergenceReport, Executor, PararealConfig,
    RayonExecutor, SequentialExecutor, SkipHeuristic,
};
use pmsm_core::xyz::format_frame;
use pmsm_core::{Error, ForceField, PropagatorSpec};

use crate::args::{Cli, PararealArgs};
use crate::common::{at_least_one, create, force_model, load, positive};
use crate::error::{CliError, CliResult};

pub const VERIFY_HEADER: &str = "point,time,rms_deviation";

fn write_report(report: &ConvergenceReport, out: &Path) -> CliResult {
    let mut conv = create(out, "convergence.csv")?;
    report.write_csv(&mut conv)?;
    conv.flush().map_err(Error::from)?;
    let mut counts = create(out, "parareal_counts.csv")?;
    report.write_counts_csv(&mut counts)?;
    counts.flush().map_err(Error::from)?;
    Ok(())
}

pub fn parareal(cli: &Cli, a: &PararealArgs) -> CliResult {
    positive("dt", a.dt)?;
    at_least_one("steps-per-slice", a.steps_per_slice)?;
    at_least_one("points", a.points)?;
    at_least_one("window", a.window)?;
    at_least_one("max-iter", a.max_iter)?;
    if a.tol.is_nan() || a.tol <= 0.0 {
        return Err(CliError::Config(format!("tol must be positive, got {}", a.tol)));
    }
    let (system, units) = load(&a.system, cli.seed)?;
    let fine = force_model(a.fine, &a.field)?;
    let coarse = force_model(a.coarse, &a.field)?;
    let (fine_name, coarse_name) = (fine.name(), coarse.name());
    let fine_spec = PropagatorSpec::new(fine, a.dt, a.steps_per_slice);
    let mut cfg = PararealConfig::new(
        fine_spec.clone(),
        PropagatorSpec::new(coarse, a.dt, a.steps_per_slice),
        a.window,
        a.max_iter,
        a.tol,
    );
    cfg.short_circuit = !a.no_short_circuit;
    if let Some(threshold) = a.skip_threshold {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(CliError::Config(format!("skip-threshold must be non-negative, got {threshold}")));
        }
        cfg.skip = Some(SkipHeuristic { threshold });
    }
    cfg.validate()?;

    let executor: Box<dyn Executor> = if cli.threads == 1 {
        Box::new(SequentialExecutor)
    } else {
        Box::new(RayonExecutor::new(cli.threads)?)
    };
    println!("fine {fine_name} coarse {coarse_name}");
    let outcome = match parareal_run(&system, a.points, &cfg, &units, executor.as_ref()) {
        Ok(o) => o,
        Err(Error::NonConvergence { window, max_iter, report }) => {
            write_report(&report, &a.out)?;
            return Err(Error::NonConvergence { window, max_iter, report }.into());
        }
        Err(e) => return Err(e.into()),
    };
    write_report(&outcome.report, &a.out)?;

    let slice = fine_spec.slice_length();
    let mut traj = create(&a.out, "parareal_trajectory.xyz")?;
    for (i, s) in outcome.trajectory.iter().enumerate() {
        let comment = format!("point={} time={}", i + 1, (i + 1) as f64 * slice);
        traj.write_all(format_frame(s, &comment).as_bytes()).map_err(Error::from)?;
    }
    traj.flush().map_err(Error::from)?;

    let r = &outcome.report;
    let iters: Vec<String> = r.windows.iter().map(|w| w.iterations.to_string()).collect();
    println!("windows {} iterations [{}]", r.windows.len(), iters.join(", "));
    println!("g_evals {} f_evals {} f_skipped {}", r.g_evals, r.f_evals, r.f_skipped);

    if a.verify {
        let oracle = fine_sequential(&system, a.points, &fine_spec, &units)?;
        let mut w = create(&a.out, "verify.csv")?;
        writeln!(w, "{VERIFY_HEADER}").map_err(Error::from)?;
        let mut worst = 0.0f64;
        for (i, (p, o)) in outcome.trajectory.iter().zip(&oracle).enumerate() {
            let d = rms_position_difference(p, o);
            worst = worst.max(d);
            writeln!(w, "{},{},{d:e}", i + 1, (i + 1) as f64 * slice).map_err(Error::from)?;
        }
        w.flush().map_err(Error::from)?;
        println!("verify max_rms_deviation {worst:.3e} tol {:e}", a.tol);
    }
    Ok(())
}
