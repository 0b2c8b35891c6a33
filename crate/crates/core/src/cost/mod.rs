//! Flop-count model and scheduling of the parallel-in-time computation.

pub mod flops;
pub mod schedule;

pub use flops::{
    msm_flops_general, msm_flops_general_terms, msm_flops_simplified, msm_flops_simplified_terms, q_ratio,
    speedup_plan1, speedup_plan2, speedup_plan2_makespan, write_flops_csv, FlopBreakdown, FlopParams,
    Q_G_SIMPLE_CUTOFF,
};
pub use schedule::{
    closed_form_makespan, simulate_schedule, simulated_speedup, speedup_row, validate_event_log, write_events_csv,
    Plan, ScheduleParams, ScheduleResult, ScheduledTask, TaskKind, SPEEDUP_CSV_HEADER,
};
