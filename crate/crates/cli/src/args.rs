use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pmsm", version, about = "Multilevel summation electrostatics with parareal time integration")]
#[command(args_override_self = true)]
pub struct Cli {
    /// Text file of `key = value` lines; each key is a long flag of the subcommand. Flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads for force loops and parareal fine evaluations.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sequential velocity-Verlet run with one force field.
    Simulate(SimulateArgs),
    /// Compare approximate force fields against direct summation.
    Compare(CompareArgs),
    /// Parareal integration with a fine and a coarse force field.
    Parareal(PararealArgs),
    /// Flop model, Q ratio and closed-form speedups.
    Cost(CostArgs),
    /// Discrete-event simulation of a task distribution plan.
    Schedule(ScheduleArgs),
    /// Write a random particle system as extended XYZ.
    Gen(GenArgs),
}

pub const SUBCOMMANDS: &[&str] = &["simulate", "compare", "parareal", "cost", "schedule", "gen"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldKind {
    Direct,
    SimpleCutoff,
    Wolf,
    Msm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Units {
    /// Å, fs, amu, e, kcal/mol.
    Physical,
    /// Coulomb constant and force-to-acceleration factor of 1.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scheme {
    AllPlusOne,
    Alternating,
    RandomNeutral,
}

#[derive(Debug, Clone, Args)]
pub struct GenSpec {
    #[arg(long, default_value_t = 32)]
    pub n: usize,
    /// Cubic box edge for generated systems.
    #[arg(long = "box", default_value_t = 20.0)]
    pub box_edge: f64,
    #[arg(long, value_enum, default_value_t = Scheme::RandomNeutral)]
    pub scheme: Scheme,
    #[arg(long, default_value_t = 1.5)]
    pub min_sep: f64,
    /// Overrides every particle mass.
    #[arg(long)]
    pub mass: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// Extended-XYZ input; a random system is generated when absent.
    #[arg(long, value_name = "XYZ")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub generate: GenSpec,
    #[arg(long, value_enum, default_value_t = Units::Physical)]
    pub units: Units,
}

#[derive(Debug, Clone, Args)]
pub struct FieldParams {
    /// Cutoff radius for simple cutoff and Wolf.
    #[arg(long, default_value_t = 12.0)]
    pub cutoff: f64,
    /// Wolf damping parameter.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// MSM cutoff a.
    #[arg(long, default_value_t = 8.0)]
    pub a: f64,
    /// MSM finest grid spacing h.
    #[arg(long, default_value_t = 2.0)]
    pub h: f64,
    /// MSM grid levels l.
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Add a short-range (σ/r)^12 wall to every field.
    #[arg(long)]
    pub repulsion: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value_t = FieldKind::Direct)]
    pub force_field: FieldKind,
    #[command(flatten)]
    pub field: FieldParams,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
    /// Write a trajectory frame every this many steps.
    #[arg(long, default_value_t = 1)]
    pub frame_every: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Dump the MSM lattices of the initial state to `msm_levels.csv`.
    #[arg(long)]
    pub dump_levels: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Fields to compare against direct summation.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [FieldKind::SimpleCutoff, FieldKind::Wolf, FieldKind::Msm])]
    pub fields: Vec<FieldKind>,
    #[command(flatten)]
    pub field: FieldParams,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub dump_levels: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PararealArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_enum, default_value_t = FieldKind::Msm)]
    pub fine: FieldKind,
    #[arg(long, value_enum, default_value_t = FieldKind::SimpleCutoff)]
    pub coarse: FieldKind,
    #[command(flatten)]
    pub field: FieldParams,
    #[arg(long, default_value_t = 0.5)]
    pub dt: f64,
    /// Verlet steps per time slice, shared by F and G.
    #[arg(long, default_value_t = 10)]
    pub steps_per_slice: usize,
    /// Total time points to integrate.
    #[arg(long, default_value_t = 16)]
    pub points: usize,
    /// Points per window (T_W).
    #[arg(long, default_value_t = 8)]
    pub window: usize,
    /// Iterations allowed per window (K).
    #[arg(long, default_value_t = 5)]
    pub max_iter: usize,
    /// RMS position change below which a point counts as converged.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Skip F when its input moved less than this RMS distance.
    #[arg(long)]
    pub skip_threshold: Option<f64>,
    /// Run all K iterations even after convergence.
    #[arg(long)]
    pub no_short_circuit: bool,
    /// Also run the sequential fine propagator and report the deviation.
    #[arg(long)]
    pub verify: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, default_value_t = 12.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub h: f64,
    /// Coarse-level spacing h*; defaults to h.
    #[arg(long)]
    pub h_star: Option<f64>,
    /// Particle count.
    #[arg(long = "n", visible_alias = "N", default_value_t = 1e8)]
    pub n: f64,
    /// Box edge length.
    #[arg(long = "box", default_value_t = 1000.0)]
    pub box_edge: f64,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 3)]
    pub p: u32,
    /// Report only the simplified count.
    #[arg(long)]
    pub simplified: bool,
    /// Time points T for the plan-2 speedup.
    #[arg(long, default_value_t = 1000.0)]
    pub t: f64,
    /// Parareal iterations K for the plan-2 speedup.
    #[arg(long, default_value_t = 2.0)]
    pub k: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value = "2")]
    pub plan: String,
    /// Q = R_F / R_G as an integer.
    #[arg(long, default_value_t = 453)]
    pub q_ratio: u64,
    /// Plan 1: number of windows of Q points each.
    #[arg(long)]
    pub windows: Option<u64>,
    /// Total time points T.
    #[arg(long)]
    pub t: Option<u64>,
    /// Points per window; defaults to Q for plan 1 and T for plan 2.
    #[arg(long)]
    pub t_w: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub k: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub generate: GenSpec,
    #[arg(long, short, default_value = "system.xyz")]
    pub output: PathBuf,
}
