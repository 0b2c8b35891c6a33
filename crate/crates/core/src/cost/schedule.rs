//! Discrete-event simulation of the two calculation-distribution plans.
//!
//! Time is counted in quanta of R_G; an F task lasts `Q` quanta. Correction
//! tasks (Δ bookkeeping) take no time and occupy no unit.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plan {
    /// Alternating full-window G phase on one unit and parallel F phase.
    One,
    /// Eager dispatch of every F as soon as its input exists.
    Two,
}

impl std::str::FromStr for Plan {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" | "plan1" => Ok(Plan::One),
            "2" | "plan2" => Ok(Plan::Two),
            other => Err(Error::Schedule(format!("unknown plan '{other}'"))),
        }
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plan::One => "1",
            Plan::Two => "2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleParams {
    pub t_total: u64,
    pub t_w: u64,
    pub k: u64,
    /// R_F / R_G; must be a positive integer.
    pub q_ratio: u64,
}

impl ScheduleParams {
    pub fn windows(&self) -> u64 {
        self.t_total / self.t_w
    }

    pub fn validate(&self, plan: Plan) -> Result<()> {
        if self.t_total == 0 || self.t_w == 0 || self.k == 0 || self.q_ratio == 0 {
            return Err(Error::Schedule("T, T_W, K and Q must all be positive".into()));
        }
        if !self.t_total.is_multiple_of(self.t_w) {
            return Err(Error::Schedule(format!(
                "T_total = {} is not a multiple of T_W = {}",
                self.t_total, self.t_w
            )));
        }
        if plan == Plan::One && self.t_w != self.q_ratio {
            return Err(Error::Schedule(format!(
                "plan 1 needs T_W = Q, got T_W = {} and Q = {}",
                self.t_w, self.q_ratio
            )));
        }
        let tasks = match plan {
            Plan::One => 2 * self.t_total,
            Plan::Two => 3 * self.t_total * self.k,
        };
        if tasks > 50_000_000 {
            return Err(Error::Schedule(format!("{tasks} tasks is too many to simulate")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    G,
    F,
    Correction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pool {
    Fixed(usize),
    G,
    F,
    Free,
}

#[derive(Debug, Clone)]
struct Task {
    kind: TaskKind,
    window: u64,
    n: u64,
    k: u64,
    duration: u64,
    deps: Vec<usize>,
    pool: Pool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledTask {
    pub id: usize,
    pub kind: TaskKind,
    pub window: u64,
    pub n: u64,
    pub k: u64,
    pub unit: Option<usize>,
    pub start: u64,
    pub end: u64,
    pub deps: Vec<usize>,
}

impl ScheduledTask {
    pub fn label(&self) -> String {
        let kind = match self.kind {
            TaskKind::G => "G",
            TaskKind::F => "F",
            TaskKind::Correction => "D",
        };
        format!("{kind}(w={},n={},k={})", self.window, self.n, self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleResult {
    pub makespan: u64,
    pub units_used: usize,
    pub g_units: usize,
    pub f_units: usize,
    pub utilization: f64,
    /// Ordered by task id.
    pub events: Vec<ScheduledTask>,
}

struct Builder {
    tasks: Vec<Task>,
}

impl Builder {
    #[allow(clippy::too_many_arguments)]
    fn add(&mut self, kind: TaskKind, window: u64, n: u64, k: u64, duration: u64, deps: Vec<usize>, pool: Pool) -> usize {
        self.tasks.push(Task { kind, window, n, k, duration, deps, pool });
        self.tasks.len() - 1
    }
}

fn plan1_tasks(p: &ScheduleParams) -> Vec<Task> {
    let mut b = Builder { tasks: Vec::new() };
    let q = p.q_ratio;
    let mut barrier: Option<usize> = None;
    for w in 0..p.windows() {
        let mut prev = barrier;
        for n in 1..=p.t_w {
            prev = Some(b.add(TaskKind::G, w, n, 0, 1, prev.into_iter().collect(), Pool::Fixed(0)));
        }
        let g_phase = prev.expect("window has at least one point");
        let fs: Vec<usize> = (1..=p.t_w)
            .map(|n| b.add(TaskKind::F, w, n, 0, q, vec![g_phase], Pool::Fixed((n - 1) as usize)))
            .collect();
        barrier = Some(b.add(TaskKind::Correction, w, p.t_w, 1, 0, fs, Pool::Free));
    }
    b.tasks
}

fn plan2_tasks(p: &ScheduleParams) -> Vec<Task> {
    let mut b = Builder { tasks: Vec::new() };
    let (t, q) = (p.t_total, p.q_ratio);
    // lambda[n] of the current row; None stands for the initial condition.
    let mut f_prev_row: Vec<usize> = Vec::new();
    for k in 0..p.k {
        let mut lambda_prev: Option<usize> = None;
        let mut f_row = Vec::with_capacity(t as usize);
        for n in 1..=t {
            let g = b.add(TaskKind::G, 0, n, k, 1, lambda_prev.into_iter().collect(), Pool::G);
            let mut f_deps = vec![g];
            f_deps.extend(lambda_prev);
            f_row.push(b.add(TaskKind::F, 0, n, k, q, f_deps, Pool::F));
            lambda_prev = Some(if k == 0 {
                g
            } else {
                b.add(TaskKind::Correction, 0, n, k, 0, vec![g, f_prev_row[(n - 1) as usize]], Pool::Free)
            });
        }
        f_prev_row = f_row;
    }
    b.tasks
}

#[derive(Default)]
struct UnitPool {
    free_at: Vec<u64>,
    ids: Vec<usize>,
}

impl UnitPool {
    /// Lowest-numbered idle unit, or a new one.
    fn acquire(&mut self, now: u64, next_id: &mut usize) -> (usize, usize) {
        if let Some(slot) = self.free_at.iter().position(|&f| f <= now) {
            return (slot, self.ids[slot]);
        }
        self.free_at.push(now);
        self.ids.push(*next_id);
        *next_id += 1;
        (self.free_at.len() - 1, self.ids[self.ids.len() - 1])
    }
}

fn run(tasks: &[Task]) -> Result<ScheduleResult> {
    let n = tasks.len();
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut waiting: Vec<usize> = vec![0; n];
    for (id, t) in tasks.iter().enumerate() {
        waiting[id] = t.deps.len();
        for &d in &t.deps {
            dependents[d].push(id);
        }
    }
    let fixed_units = tasks
        .iter()
        .filter_map(|t| match t.pool {
            Pool::Fixed(u) => Some(u + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0);
    let mut fixed_free = vec![0u64; fixed_units];
    let mut fixed_used = vec![false; fixed_units];
    let mut next_unit = fixed_units;
    let (mut g_pool, mut f_pool) = (UnitPool::default(), UnitPool::default());
    let mut slots: Vec<Option<ScheduledTask>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    let mut busy = 0u64;

    let mut dispatch = |id: usize, now: u64, heap: &mut BinaryHeap<Reverse<(u64, usize)>>| {
        let t = &tasks[id];
        let (unit, start) = match t.pool {
            Pool::Free => (None, now),
            Pool::Fixed(u) => {
                fixed_used[u] = true;
                (Some(u), now.max(fixed_free[u]))
            }
            Pool::G | Pool::F => {
                let pool = if t.pool == Pool::G { &mut g_pool } else { &mut f_pool };
                let (slot, unit) = pool.acquire(now, &mut next_unit);
                pool.free_at[slot] = now + t.duration;
                (Some(unit), now)
            }
        };
        let end = start + t.duration;
        if let Pool::Fixed(u) = t.pool {
            fixed_free[u] = end;
        }
        busy += t.duration;
        slots[id] = Some(ScheduledTask {
            id,
            kind: t.kind,
            window: t.window,
            n: t.n,
            k: t.k,
            unit,
            start,
            end,
            deps: t.deps.clone(),
        });
        heap.push(Reverse((end, id)));
    };

    for id in 0..n {
        if waiting[id] == 0 {
            dispatch(id, 0, &mut heap);
        }
    }
    let mut done = 0;
    while let Some(Reverse((now, id))) = heap.pop() {
        done += 1;
        for &d in &dependents[id] {
            waiting[d] -= 1;
            if waiting[d] == 0 {
                dispatch(d, now, &mut heap);
            }
        }
    }
    if done != n {
        return Err(Error::Schedule("task graph has a cycle".into()));
    }
    let events: Vec<ScheduledTask> = slots.into_iter().map(|s| s.expect("every task ran")).collect();
    let makespan = events.iter().map(|e| e.end).max().unwrap_or(0);
    let g_units = g_pool.ids.len();
    let f_units = f_pool.ids.len();
    let units_used = fixed_used.iter().filter(|&&u| u).count() + g_units + f_units;
    let utilization = if makespan == 0 || units_used == 0 {
        0.0
    } else {
        busy as f64 / (units_used as f64 * makespan as f64)
    };
    Ok(ScheduleResult { makespan, units_used, g_units, f_units, utilization, events })
}

pub fn simulate_schedule(plan: Plan, params: &ScheduleParams) -> Result<ScheduleResult> {
    params.validate(plan)?;
    let tasks = match plan {
        Plan::One => plan1_tasks(params),
        Plan::Two => plan2_tasks(params),
    };
    let result = run(&tasks)?;
    validate_event_log(&result.events)?;
    Ok(result)
}

/// No task starts before its dependencies end and no unit runs two tasks at once.
pub fn validate_event_log(events: &[ScheduledTask]) -> Result<()> {
    for e in events {
        for &d in &e.deps {
            if events[d].end > e.start {
                return Err(Error::Schedule(format!(
                    "{} starts at {} before dependency {} ends at {}",
                    e.label(),
                    e.start,
                    events[d].label(),
                    events[d].end
                )));
            }
        }
    }
    let mut by_unit: Vec<(usize, u64, u64)> = events
        .iter()
        .filter(|e| e.end > e.start)
        .filter_map(|e| e.unit.map(|u| (u, e.start, e.end)))
        .collect();
    by_unit.sort_unstable();
    for w in by_unit.windows(2) {
        if w[0].0 == w[1].0 && w[1].1 < w[0].2 {
            return Err(Error::Schedule(format!("unit {} runs two tasks at time {}", w[0].0, w[1].1)));
        }
    }
    Ok(())
}

/// Makespan predicted by the closed forms, in R_G quanta.
///
/// For plan 2 the dependency chain is at most `T` rows deep, so `K > T`
/// does not lengthen the run.
pub fn closed_form_makespan(plan: Plan, p: &ScheduleParams) -> u64 {
    match plan {
        Plan::One => 2 * p.windows() * p.q_ratio,
        Plan::Two => p.t_total + p.k.min(p.t_total) * p.q_ratio,
    }
}

/// Sequential fine run time divided by the makespan.
pub fn simulated_speedup(p: &ScheduleParams, result: &ScheduleResult) -> f64 {
    (p.t_total * p.q_ratio) as f64 / result.makespan as f64
}

pub fn write_events_csv(result: &ScheduleResult, mut out: impl Write) -> Result<()> {
    writeln!(out, "task,unit,start,end")?;
    for e in &result.events {
        let unit = e.unit.map(|u| u.to_string()).unwrap_or_else(|| "-".into());
        writeln!(out, "{},{unit},{},{}", e.label(), e.start, e.end)?;
    }
    Ok(())
}

pub const SPEEDUP_CSV_HEADER: &str =
    "plan,q_ratio,t_total,t_w,k,makespan,closed_form_makespan,simulated,closed_form,ratio";

/// One speedup-table row: simulated speedup against the quoted closed form.
pub fn speedup_row(plan: Plan, p: &ScheduleParams, result: &ScheduleResult) -> String {
    let simulated = simulated_speedup(p, result);
    let closed = match plan {
        Plan::One => super::speedup_plan1(p.q_ratio as f64),
        Plan::Two => super::speedup_plan2(p.q_ratio as f64, p.t_total as f64, p.k as f64),
    };
    format!(
        "{plan},{},{},{},{},{},{},{simulated},{closed},{}",
        p.q_ratio,
        p.t_total,
        p.t_w,
        p.k,
        result.makespan,
        closed_form_makespan(plan, p),
        simulated / closed
    )
}
