//! Parallel-in-time integration over sliding computational windows.
//!
//! Row `k` of a window holds the iterates `λ_n^k` for `n = 0..=T_W`, with
//! row 0 the coarse initialization and `λ_0^k = v` throughout.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dynamics::{propagate, PropagatorSpec};
use crate::{Error, ParticleSystem, Result, UnitsConfig, Vec3};

/// Runs independent propagations; implementations decide how.
pub trait Executor: Sync {
    fn map(
        &self,
        inputs: &[&ParticleSystem],
        f: &(dyn Fn(&ParticleSystem) -> Result<ParticleSystem> + Sync),
    ) -> Vec<Result<ParticleSystem>>;
}

/// In-order evaluation on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialExecutor;

impl Executor for SequentialExecutor {
    fn map(
        &self,
        inputs: &[&ParticleSystem],
        f: &(dyn Fn(&ParticleSystem) -> Result<ParticleSystem> + Sync),
    ) -> Vec<Result<ParticleSystem>> {
        inputs.iter().map(|s| f(s)).collect()
    }
}

/// Evaluation on a dedicated rayon pool.
#[derive(Debug, Clone)]
pub struct RayonExecutor {
    pool: Arc<rayon::ThreadPool>,
}

impl RayonExecutor {
    pub fn new(threads: usize) -> Result<Self> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {threads} threads: {e}")))?;
        Ok(RayonExecutor { pool: Arc::new(pool) })
    }
}

impl Executor for RayonExecutor {
    fn map(
        &self,
        inputs: &[&ParticleSystem],
        f: &(dyn Fn(&ParticleSystem) -> Result<ParticleSystem> + Sync),
    ) -> Vec<Result<ParticleSystem>> {
        self.pool.install(|| inputs.par_iter().map(|s| f(s)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkipHeuristic {
    /// Å; an F evaluation is skipped when its input moved less than this.
    pub threshold: f64,
}

#[derive(Debug, Clone)]
pub struct PararealConfig {
    pub window: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub fine: PropagatorSpec,
    pub coarse: PropagatorSpec,
    pub skip: Option<SkipHeuristic>,
    /// Stop iterating a window as soon as every point has converged.
    pub short_circuit: bool,
}

impl PararealConfig {
    pub fn new(fine: PropagatorSpec, coarse: PropagatorSpec, window: usize, max_iter: usize, tol: f64) -> Self {
        PararealConfig {
            window,
            max_iter,
            tol,
            fine,
            coarse,
            skip: None,
            short_circuit: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("window must hold at least one time point".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) && self.tol != f64::INFINITY {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        self.fine.validate()?;
        self.coarse.validate()?;
        let (f, g) = (self.fine.slice_length(), self.coarse.slice_length());
        if (f - g).abs() > 1e-12 * f.abs().max(g.abs()) {
            return Err(Error::Config(format!(
                "fine slice {f} fs and coarse slice {g} fs must span the same time"
            )));
        }
        if let Some(s) = &self.skip {
            if s.threshold.is_nan() || s.threshold < 0.0 {
                return Err(Error::Config(format!("skip threshold must be non-negative, got {}", s.threshold)));
            }
        }
        Ok(())
    }
}

/// Componentwise difference of two states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateDelta {
    pub dpos: Vec<Vec3>,
    pub dvel: Vec<Vec3>,
    pub rms_pos: f64,
    pub max_pos: f64,
}

impl StateDelta {
    /// `a − b`.
    pub fn between(a: &ParticleSystem, b: &ParticleSystem) -> Self {
        let dpos: Vec<Vec3> = a.positions.iter().zip(&b.positions).map(|(x, y)| *x - *y).collect();
        let dvel = a.velocities.iter().zip(&b.velocities).map(|(x, y)| *x - *y).collect();
        let (rms_pos, max_pos) = norms(&dpos);
        StateDelta { dpos, dvel, rms_pos, max_pos }
    }

    /// `base + self`; charges, masses and box come from `base`.
    pub fn apply_to(&self, base: &ParticleSystem) -> ParticleSystem {
        let mut out = base.clone();
        for (p, d) in out.positions.iter_mut().zip(&self.dpos) {
            *p += *d;
        }
        for (v, d) in out.velocities.iter_mut().zip(&self.dvel) {
            *v += *d;
        }
        out
    }
}

fn norms(d: &[Vec3]) -> (f64, f64) {
    if d.is_empty() {
        return (0.0, 0.0);
    }
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for v in d {
        sum += v.norm2();
        max = max.max(v.x.abs()).max(v.y.abs()).max(v.z.abs());
    }
    ((sum / (3 * d.len()) as f64).sqrt(), max)
}

/// RMS over all position components of `a − b`.
pub fn rms_position_difference(a: &ParticleSystem, b: &ParticleSystem) -> f64 {
    StateDelta::between(a, b).rms_pos
}

#[derive(Debug, Clone)]
pub struct PararealWindow {
    /// `lambda[k][n]`, rows `0..=iterations`.
    pub lambda: Vec<Vec<ParticleSystem>>,
    /// Coarse results `g_n` of the latest sweep, index `n − 1`.
    pub g_vals: Vec<ParticleSystem>,
    /// Fine results of the latest iteration (`None` where skipped).
    pub f_vals: Vec<Option<ParticleSystem>>,
    /// Corrections `Δ_n` of the latest iteration.
    pub delta_vals: Vec<StateDelta>,
    /// Number of leading points that have converged.
    pub converged_through: usize,
    pub g_evals: usize,
    pub f_evals: usize,
    pub f_skipped: usize,
}

impl PararealWindow {
    pub fn len(&self) -> usize {
        self.g_vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g_vals.is_empty()
    }

    pub fn iterations(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn latest(&self) -> &[ParticleSystem] {
        self.lambda.last().expect("window has an initialization row")
    }
}

/// Per-iteration outcome within one window.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSummary {
    pub iteration: usize,
    /// `RMS(λ_n^k − λ_n^{k−1})` for `n = 1..=T_W`.
    pub change_rms: Vec<f64>,
    /// `RMS(Δ_n)` positions for `n = 1..=T_W`.
    pub delta_rms: Vec<f64>,
    pub skipped: Vec<usize>,
}

/// Coarse chain `λ'_n = G(λ'_{n−1})` over `points` slices.
pub fn parareal_init(v: &ParticleSystem, points: usize, config: &PararealConfig, units: &UnitsConfig) -> Result<PararealWindow> {
    config.validate()?;
    let mut row = Vec::with_capacity(points + 1);
    row.push(v.clone());
    let mut g_vals = Vec::with_capacity(points);
    for n in 1..=points {
        let g = propagate(&config.coarse, &row[n - 1], units)?;
        g_vals.push(g.clone());
        row.push(g);
    }
    Ok(PararealWindow {
        lambda: vec![row],
        g_vals,
        f_vals: Vec::new(),
        delta_vals: Vec::new(),
        converged_through: 0,
        g_evals: points,
        f_evals: 0,
        f_skipped: 0,
    })
}

/// Points `n` whose fine evaluation may be skipped in the next iteration:
/// the input `λ_{n−1}` moved by less than the threshold in the last iteration.
pub fn metastable_skip(window: &PararealWindow, config: &PararealConfig) -> Vec<usize> {
    let Some(skip) = &config.skip else {
        return Vec::new();
    };
    let k = window.iterations();
    if k < 1 || window.delta_vals.is_empty() {
        return Vec::new();
    }
    let (cur, prev) = (&window.lambda[k], &window.lambda[k - 1]);
    (1..=window.len())
        .filter(|&n| rms_position_difference(&cur[n - 1], &prev[n - 1]) < skip.threshold)
        .collect()
}

/// Computes row `k + 1` from row `k`.
pub fn parareal_iterate(
    window: &mut PararealWindow,
    config: &PararealConfig,
    units: &UnitsConfig,
    executor: &dyn Executor,
) -> Result<IterationSummary> {
    let t_w = window.len();
    let skipped = metastable_skip(window, config);
    let mut skip_mask = vec![false; t_w + 1];
    for &n in &skipped {
        skip_mask[n] = true;
    }

    let prev = window.latest().to_vec();
    let inputs: Vec<&ParticleSystem> = (1..=t_w).filter(|&n| !skip_mask[n]).map(|n| &prev[n - 1]).collect();
    let fine = |s: &ParticleSystem| propagate(&config.fine, s, units);
    let mut computed = executor.map(&inputs, &fine).into_iter();
    window.f_evals += inputs.len();
    window.f_skipped += skipped.len();

    let mut f_vals = Vec::with_capacity(t_w);
    let mut deltas = Vec::with_capacity(t_w);
    for n in 1..=t_w {
        if skip_mask[n] {
            f_vals.push(None);
            deltas.push(window.delta_vals[n - 1].clone());
        } else {
            let f = computed.next().expect("one result per input")?;
            deltas.push(StateDelta::between(&f, &window.g_vals[n - 1]));
            f_vals.push(Some(f));
        }
    }

    let mut row = Vec::with_capacity(t_w + 1);
    row.push(prev[0].clone());
    let mut g_vals = Vec::with_capacity(t_w);
    for n in 1..=t_w {
        let g = if n == 1 {
            window.g_vals[0].clone()
        } else {
            window.g_evals += 1;
            propagate(&config.coarse, &row[n - 1], units)?
        };
        row.push(deltas[n - 1].apply_to(&g));
        g_vals.push(g);
    }

    let change_rms: Vec<f64> = (1..=t_w).map(|n| rms_position_difference(&row[n], &prev[n])).collect();
    let delta_rms = deltas.iter().map(|d| d.rms_pos).collect();
    window.converged_through = change_rms.iter().take_while(|&&c| c <= config.tol).count();
    window.lambda.push(row);
    window.g_vals = g_vals;
    window.f_vals = f_vals;
    window.delta_vals = deltas;
    Ok(IterationSummary {
        iteration: window.iterations(),
        change_rms,
        delta_rms,
        skipped,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub window: usize,
    /// Global time-point index, 1-based.
    pub point: usize,
    pub iteration: usize,
    pub delta_rms: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSummary {
    pub window: usize,
    pub first_point: usize,
    pub points: usize,
    pub iterations: usize,
    pub g_evals: usize,
    pub f_evals: usize,
    pub f_skipped: usize,
    /// Largest `RMS(Δ_n)` per iteration.
    pub max_delta_rms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ReportRow>,
    pub windows: Vec<WindowSummary>,
    /// Iteration at which each point (index `T_n − 1`) first converged.
    pub point_iterations: Vec<usize>,
    pub g_evals: usize,
    pub f_evals: usize,
    pub f_skipped: usize,
}

impl ConvergenceReport {
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "window,point,iteration,delta_rms,converged")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{:e},{}", r.window, r.point, r.iteration, r.delta_rms, r.converged as u8)?;
        }
        Ok(())
    }

    pub fn write_counts_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "window,first_point,points,iterations,g_evals,f_evals,f_skipped")?;
        for w in &self.windows {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                w.window, w.first_point, w.points, w.iterations, w.g_evals, w.f_evals, w.f_skipped
            )?;
        }
        let iters: usize = self.windows.iter().map(|w| w.iterations).sum();
        let points: usize = self.windows.iter().map(|w| w.points).sum();
        writeln!(
            out,
            "total,1,{points},{iters},{},{},{}",
            self.g_evals, self.f_evals, self.f_skipped
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PararealOutcome {
    /// States at `T_1..=T_total`.
    pub trajectory: Vec<ParticleSystem>,
    pub report: ConvergenceReport,
}

/// Iterates one window to convergence; returns its final row.
#[allow(clippy::too_many_arguments)]
fn run_window(
    index: usize,
    first_point: usize,
    v: &ParticleSystem,
    points: usize,
    config: &PararealConfig,
    units: &UnitsConfig,
    executor: &dyn Executor,
    report: &mut ConvergenceReport,
) -> Result<Vec<ParticleSystem>> {
    let mut window = parareal_init(v, points, config, units)?;
    let mut converged_at: Vec<Option<usize>> = vec![None; points];
    let mut max_delta = Vec::new();
    for _ in 0..config.max_iter {
        let s = parareal_iterate(&mut window, config, units, executor)?;
        max_delta.push(s.delta_rms.iter().cloned().fold(0.0, f64::max));
        for n in 1..=points {
            let ok = s.change_rms[n - 1] <= config.tol;
            if ok && converged_at[n - 1].is_none() {
                converged_at[n - 1] = Some(s.iteration);
            }
            if !ok {
                converged_at[n - 1] = None;
            }
            report.rows.push(ReportRow {
                window: index,
                point: first_point + n - 1,
                iteration: s.iteration,
                delta_rms: s.change_rms[n - 1],
                converged: ok,
            });
        }
        if config.short_circuit && window.converged_through == points {
            break;
        }
    }
    report.g_evals += window.g_evals;
    report.f_evals += window.f_evals;
    report.f_skipped += window.f_skipped;
    report.windows.push(WindowSummary {
        window: index,
        first_point,
        points,
        iterations: window.iterations(),
        g_evals: window.g_evals,
        f_evals: window.f_evals,
        f_skipped: window.f_skipped,
        max_delta_rms: max_delta,
    });
    if window.converged_through < points {
        return Err(Error::NonConvergence {
            window: index,
            max_iter: config.max_iter,
            report: Box::new(report.clone()),
        });
    }
    report
        .point_iterations
        .extend(converged_at.into_iter().map(|c| c.unwrap_or(window.iterations())));
    let mut row = window.lambda.pop().expect("window has rows");
    row.remove(0);
    Ok(row)
}

/// Integrates `total_points` slices from `v`, window by window.
pub fn parareal_run(
    v: &ParticleSystem,
    total_points: usize,
    config: &PararealConfig,
    units: &UnitsConfig,
    executor: &dyn Executor,
) -> Result<PararealOutcome> {
    config.validate()?;
    units.validate()?;
    if total_points == 0 {
        return Err(Error::Config("total_points must be at least 1".into()));
    }
    let mut report = ConvergenceReport::default();
    let mut trajectory = Vec::with_capacity(total_points);
    let mut start = v.clone();
    let mut index = 0;
    while trajectory.len() < total_points {
        let points = config.window.min(total_points - trajectory.len());
        let first = trajectory.len() + 1;
        let row = run_window(index, first, &start, points, config, units, executor, &mut report)?;
        start = row.last().expect("window is non-empty").clone();
        trajectory.extend(row);
        index += 1;
    }
    Ok(PararealOutcome { trajectory, report })
}

/// Sequential fine trajectory at `T_1..=T_points`.
pub fn fine_sequential(v: &ParticleSystem, points: usize, spec: &PropagatorSpec, units: &UnitsConfig) -> Result<Vec<ParticleSystem>> {
    let mut out: Vec<ParticleSystem> = Vec::with_capacity(points);
    let mut cur = v.clone();
    for _ in 0..points {
        cur = propagate(spec, &cur, units)?;
        out.push(cur.clone());
    }
    Ok(out)
}
