use pmsm_core::parareal::{
    fine_sequential, parareal_init, parareal_iterate, parareal_run, rms_position_difference, PararealConfig,
    RayonExecutor, SequentialExecutor, SkipHeuristic,
};
use pmsm_core::reference::CutoffParams;
use pmsm_core::{
    generate_random_system, ChargeScheme, Electrostatics, Error, ForceModel, MsmConfig, ParticleSystem,
    PropagatorSpec, Repulsion, UnitsConfig, Vec3,
};

fn specs(repulsion: bool) -> (PropagatorSpec, PropagatorSpec) {
    let mut fine = ForceModel::new(Electrostatics::Msm(MsmConfig::new(8.0, 2.0, 2)));
    let mut coarse = ForceModel::new(Electrostatics::SimpleCutoff(CutoffParams::new(6.0)));
    if repulsion {
        fine = fine.with_repulsion(Repulsion::default());
        coarse = coarse.with_repulsion(Repulsion::default());
    }
    (PropagatorSpec::new(fine, 0.01, 10), PropagatorSpec::new(coarse, 0.01, 10))
}

fn ions() -> ParticleSystem {
    generate_random_system(10, Vec3::splat(10.0), ChargeScheme::RandomNeutral, 2.0, 42).unwrap()
}

/// Five ion pairs sitting at the balance point of attraction and repulsion,
/// spaced far enough apart that they barely feel each other.
fn resting_dimers(spacing: f64) -> ParticleSystem {
    let r_eq = (12.0f64 * 0.1).powf(1.0 / 11.0);
    let mut positions = Vec::new();
    let mut charges = Vec::new();
    for d in 0..5 {
        let c = Vec3::new(2.0 + spacing * d as f64, 5.0, 5.0);
        positions.extend([c, c + Vec3::new(0.0, r_eq, 0.0)]);
        charges.extend([1.0, -1.0]);
    }
    let box_size = Vec3::new(4.0 + 4.0 * spacing, 10.0, 10.0);
    ParticleSystem::new(positions, vec![Vec3::ZERO; 10], charges, vec![1.0; 10], box_size).unwrap()
}

fn worst_error(a: &[ParticleSystem], b: &[ParticleSystem]) -> f64 {
    a.iter().zip(b).map(|(x, y)| rms_position_difference(x, y)).fold(0.0, f64::max)
}

#[test]
fn skip_heuristic_saves_half_the_fine_work_on_resting_dimers() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(true);
    let s = resting_dimers(20.0);
    let mut cfg = PararealConfig::new(fine.clone(), coarse, 8, 4, 1e-6);
    cfg.short_circuit = false;
    cfg.skip = Some(SkipHeuristic { threshold: 1e-8 });
    let out = parareal_run(&s, 8, &cfg, &u, &SequentialExecutor).unwrap();
    let r = &out.report;
    assert_eq!(r.f_evals + r.f_skipped, 8 * 4);
    assert!(r.f_skipped * 2 >= r.f_evals + r.f_skipped, "skipped {} of {}", r.f_skipped, r.f_evals + r.f_skipped);
    let oracle = fine_sequential(&s, 8, &fine, &u).unwrap();
    assert!(worst_error(&out.trajectory, &oracle) < 10.0 * cfg.tol);
}

#[test]
fn skipping_never_triggers_with_zero_threshold() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(true);
    let mut cfg = PararealConfig::new(fine, coarse, 8, 3, 1e-6);
    cfg.short_circuit = false;
    cfg.skip = Some(SkipHeuristic { threshold: 0.0 });
    let out = parareal_run(&resting_dimers(20.0), 8, &cfg, &u, &SequentialExecutor).unwrap();
    assert_eq!(out.report.f_skipped, 0);
    assert_eq!(out.report.f_evals, 8 * 3);
}

#[test]
fn rayon_executor_reproduces_sequential_run_bitwise() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(false);
    let cfg = PararealConfig::new(fine, coarse, 4, 5, 1e-6);
    let seq = parareal_run(&ions(), 12, &cfg, &u, &SequentialExecutor).unwrap();
    let par = parareal_run(&ions(), 12, &cfg, &u, &RayonExecutor::new(4).unwrap()).unwrap();
    assert_eq!(seq.trajectory, par.trajectory);
    assert_eq!(seq.report, par.report);
}

#[test]
fn iterate_change_shrinks_each_iteration() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(false);
    let cfg = PararealConfig::new(fine, coarse, 8, 4, 1e-6);
    let mut w = parareal_init(&ions(), 8, &cfg, &u).unwrap();
    let mut prev = f64::INFINITY;
    for _ in 0..3 {
        let summary = parareal_iterate(&mut w, &cfg, &u, &SequentialExecutor).unwrap();
        let worst = summary.change_rms.iter().copied().fold(0.0, f64::max);
        assert!(worst < prev, "{worst} !< {prev}");
        prev = worst;
    }
}

#[test]
fn trajectory_has_one_state_per_point_and_windows_tile_the_run() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(false);
    let cfg = PararealConfig::new(fine, coarse, 4, 5, 1e-6);
    let out = parareal_run(&ions(), 10, &cfg, &u, &SequentialExecutor).unwrap();
    assert_eq!(out.trajectory.len(), 10);
    let firsts: Vec<_> = out.report.windows.iter().map(|w| (w.first_point, w.points)).collect();
    assert_eq!(firsts, vec![(1, 4), (5, 4), (9, 2)]);
    assert_eq!(out.report.point_iterations.len(), 10);
}

#[test]
fn too_few_iterations_is_reported_as_non_convergence() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(false);
    let cfg = PararealConfig::new(fine, coarse, 8, 1, 1e-12);
    let err = parareal_run(&ions(), 8, &cfg, &u, &SequentialExecutor).unwrap_err();
    assert!(matches!(err, Error::NonConvergence { .. }), "{err:?}");
}

#[test]
fn report_csv_has_one_row_per_point_and_iteration() {
    let u = UnitsConfig::reduced();
    let (fine, coarse) = specs(false);
    let cfg = PararealConfig::new(fine, coarse, 8, 5, 1e-6);
    let out = parareal_run(&ions(), 8, &cfg, &u, &SequentialExecutor).unwrap();
    let mut buf = Vec::new();
    out.report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("window,point,iteration,delta_rms,converged"));
    assert_eq!(lines.count(), 8 * out.report.windows[0].iterations);
}
