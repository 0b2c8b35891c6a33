use std::io::Write;

use pmsm_core::cost::{
    closed_form_makespan, msm_flops_general, msm_flops_simplified, q_ratio, simulate_schedule, simulated_speedup,
    speedup_plan1, speedup_plan2, speedup_plan2_makespan, speedup_row, write_events_csv, write_flops_csv, FlopParams,
    Plan, ScheduleParams, Q_G_SIMPLE_CUTOFF, SPEEDUP_CSV_HEADER,
};
use pmsm_core::Error;

use crate::args::{CostArgs, ScheduleArgs};
use crate::common::{create, positive};
use crate::error::{CliError, CliResult};

pub fn cost(a: &CostArgs) -> CliResult {
    positive("t", a.t)?;
    positive("k", a.k)?;
    positive("box", a.box_edge)?;
    let params = FlopParams { h_star: a.h_star, m: a.m, p: a.p, ..FlopParams::new(a.n, a.box_edge, a.a, a.h) };
    params.validate()?;
    let mut w = create(&a.out, "flops_model.csv")?;
    write_flops_csv(&params, &mut w)?;
    w.flush().map_err(Error::from)?;

    let per = msm_flops_simplified(a.a, a.h, 1.0);
    println!("simplified_flops_per_particle {per:.1}");
    println!("simplified_flops_total {:.4e}", msm_flops_simplified(a.a, a.h, a.n));
    if !a.simplified {
        let general = msm_flops_general(&params)?;
        println!("general_flops_per_particle {:.1}", general / a.n);
        println!("general_flops_total {general:.4e}");
    }
    let q = q_ratio(per, Q_G_SIMPLE_CUTOFF)?;
    println!("q_ratio {q:.2} (coarse {Q_G_SIMPLE_CUTOFF} flops per particle)");
    println!("speedup_plan1 {:.2}", speedup_plan1(q));
    println!("speedup_plan2 {:.2} (T = {}, K = {})", speedup_plan2(q, a.t, a.k), a.t, a.k);
    println!("speedup_plan2_makespan {:.2}", speedup_plan2_makespan(q, a.t, a.k));
    Ok(())
}

pub fn schedule(a: &ScheduleArgs) -> CliResult {
    let plan: Plan = a.plan.parse().map_err(|e: Error| CliError::Config(e.to_string()))?;
    let q = a.q_ratio;
    let params = match plan {
        Plan::One => {
            let t_w = a.t_w.unwrap_or(q);
            let t_total = a.t.unwrap_or(a.windows.unwrap_or(1) * t_w);
            ScheduleParams { t_total, t_w, k: a.k, q_ratio: q }
        }
        Plan::Two => {
            let t_total = a.t.or(a.windows.map(|w| w * a.t_w.unwrap_or(q))).unwrap_or(2 * q);
            ScheduleParams { t_total, t_w: a.t_w.unwrap_or(t_total), k: a.k, q_ratio: q }
        }
    };
    if plan == Plan::Two && params.t_w != params.t_total {
        return Err(CliError::Config("plan 2 schedules a single window; --t-w must equal --t".into()));
    }
    let result = simulate_schedule(plan, &params)?;
    let mut events = create(&a.out, "schedule_events.csv")?;
    write_events_csv(&result, &mut events)?;
    events.flush().map_err(Error::from)?;
    let mut table = create(&a.out, "speedup_table.csv")?;
    writeln!(table, "{SPEEDUP_CSV_HEADER}").map_err(Error::from)?;
    writeln!(table, "{}", speedup_row(plan, &params, &result)).map_err(Error::from)?;
    table.flush().map_err(Error::from)?;

    println!("plan {plan} q_ratio {q} t_total {} t_w {} k {}", params.t_total, params.t_w, params.k);
    println!("makespan {} closed_form {} (R_G units)", result.makespan, closed_form_makespan(plan, &params));
    println!("units g {} f {} total {} utilization {:.4}", result.g_units, result.f_units, result.units_used, result.utilization);
    let closed = match plan {
        Plan::One => speedup_plan1(q as f64),
        Plan::Two => speedup_plan2(q as f64, params.t_total as f64, params.k as f64),
    };
    println!("speedup simulated {} closed_form {closed}", simulated_speedup(&params, &result));
    if plan == Plan::Two {
        let implied = speedup_plan2_makespan(q as f64, params.t_total as f64, params.k as f64);
        println!("speedup closed_form_from_makespan {implied}");
    }
    Ok(())
}
