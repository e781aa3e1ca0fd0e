use super::routine::{LocalCtx, LocalFn, Routine, RoutineError};
use super::state::{Control, SimulationState};
use super::FleshError;
use crate::ccl::{Bin, GroupKind, ScheduleLocation};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

/// Called by the main loop at every iteration boundary (after ANALYSIS, before the next PRESTEP).
pub trait BoundaryHook {
    /// `finished` is set on the last call, when no further iteration will run.
    fn at_boundary(&mut self, state: &mut SimulationState, finished: bool);
}

pub struct NoHook;

impl BoundaryHook for NoHook {
    fn at_boundary(&mut self, _: &mut SimulationState, _: bool) {}
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExitReport {
    /// Evolution iterations executed by this run.
    pub iterations: u64,
    /// Final iteration counter.
    pub iteration: u64,
    pub time: f64,
    pub wall_seconds: f64,
    pub timers: BTreeMap<String, Duration>,
    /// Stopped by `control = terminating` rather than by reaching `t_final`.
    pub terminated: bool,
    pub diagnostics: Vec<String>,
    pub checkpoint_failures: usize,
}

#[derive(Debug, Clone)]
pub struct RunFailure {
    pub error: FleshError,
    pub report: ExitReport,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (at iteration {})", self.error, self.report.iteration)
    }
}

impl std::error::Error for RunFailure {}

fn failure(key: &str, e: RoutineError) -> FleshError {
    match e {
        RoutineError::Flesh(inner) => match *inner {
            f @ FleshError::RoutineFailure { .. } => f,
            other => FleshError::RoutineFailure {
                routine: key.to_string(),
                message: other.to_string(),
            },
        },
        RoutineError::Message(message) => FleshError::RoutineFailure {
            routine: key.to_string(),
            message,
        },
    }
}

fn run_local(state: &mut SimulationState, f: &LocalFn) -> Result<(), RoutineError> {
    let dt = state.dt();
    let SimulationState {
        grid,
        registry,
        params,
        iteration,
        time,
        ..
    } = state;
    let spec = &grid.spec;
    let (iteration, time) = (*iteration, *time);
    let results: Vec<Result<(), RoutineError>> = grid
        .partitions
        .par_iter_mut()
        .map(|p| {
            let mut ctx = LocalCtx {
                partition: p,
                registry,
                params,
                grid: spec,
                iteration,
                time,
                dt,
            };
            f(&mut ctx)
        })
        .collect();
    results.into_iter().collect()
}

/// Runs every call of a bin or schedule group in tree order, synchronizing each call's
/// sync groups once it has completed on all partitions.
pub fn run_location(state: &mut SimulationState, location: &ScheduleLocation) -> Result<(), FleshError> {
    let tree = state.schedule.clone().ok_or(FleshError::ScheduleNotBuilt)?;
    for call in tree.calls(location) {
        let key = call.key();
        let routine = state
            .routines
            .get(&key)
            .cloned()
            .ok_or_else(|| FleshError::MissingRoutine {
                thorn: call.thorn.clone(),
                routine: call.routine.clone(),
            })?;
        let outer = state.current_thorn.replace(call.thorn.clone());
        let result = match &routine {
            Routine::Local(f) => run_local(state, f.as_ref()),
            Routine::Global(f) => f(state),
        };
        state.current_thorn = outer;
        if let Err(e) = result {
            state.control = Control::Terminating;
            return Err(failure(&key, e));
        }
        if !call.sync.is_empty() {
            let slots: Vec<usize> = call
                .sync
                .iter()
                .filter_map(|g| state.registry.group(g))
                .filter(|g| g.kind == GroupKind::GridFunction)
                .flat_map(|g| g.members.iter().map(|v| v.0))
                .collect();
            state.grid.sync_ghosts(&slots);
        }
    }
    Ok(())
}

/// Runs a bin and adds its wall time to the bin's timer.
pub fn run_bin(state: &mut SimulationState, bin: Bin) -> Result<(), FleshError> {
    let start = Instant::now();
    let result = run_location(state, &ScheduleLocation::Bin(bin));
    *state.timers.entry(bin.name().to_string()).or_default() += start.elapsed();
    result
}

pub fn run_group(state: &mut SimulationState, group: &str) -> Result<(), FleshError> {
    run_location(state, &ScheduleLocation::Group(group.to_string()))
}

fn finished(state: &SimulationState) -> bool {
    let dt = state.dt();
    state.control == Control::Terminating || state.time >= state.t_final() - dt / 2.0
}

/// Drives a run: STARTUP, PARAMCHECK, INITIAL and ANALYSIS at iteration 0 (the last two are
/// skipped when resuming from a checkpoint), then the evolution loop, then TERMINATE.
pub fn main_loop(state: &mut SimulationState, hook: &mut dyn BoundaryHook) -> Result<ExitReport, RunFailure> {
    let start = Instant::now();
    let first_iteration = state.iteration;
    if state.schedule.is_none() {
        if let Err(error) = state.build_schedule() {
            return Err(RunFailure {
                error,
                report: report(state, start, first_iteration),
            });
        }
    }
    let result = evolve(state, hook);
    if result.is_err() {
        state.control = Control::Terminating;
    }
    let terminate = run_bin(state, Bin::Terminate);
    let r = report(state, start, first_iteration);
    match (result, terminate) {
        (Err(error), _) | (Ok(()), Err(error)) => Err(RunFailure { error, report: r }),
        (Ok(()), Ok(())) => Ok(r),
    }
}

fn evolve(state: &mut SimulationState, hook: &mut dyn BoundaryHook) -> Result<(), FleshError> {
    run_bin(state, Bin::Startup)?;
    run_bin(state, Bin::ParamCheck)?;
    if !state.recovered {
        run_bin(state, Bin::Initial)?;
        run_bin(state, Bin::Analysis)?;
    }
    hook.at_boundary(state, finished(state));
    let dt = state.dt();
    while !finished(state) {
        run_bin(state, Bin::PreStep)?;
        run_bin(state, Bin::Evol)?;
        state.iteration += 1;
        state.time = state.iteration as f64 * dt;
        run_bin(state, Bin::PostStep)?;
        run_bin(state, Bin::Analysis)?;
        if let Some(n) = state.step_budget {
            if n <= 1 {
                state.step_budget = None;
                if state.control == Control::Running {
                    state.control = Control::Paused;
                }
            } else {
                state.step_budget = Some(n - 1);
            }
        }
        hook.at_boundary(state, finished(state));
    }
    Ok(())
}

fn report(state: &SimulationState, start: Instant, first_iteration: u64) -> ExitReport {
    ExitReport {
        iterations: state.iteration - first_iteration,
        iteration: state.iteration,
        time: state.time,
        wall_seconds: start.elapsed().as_secs_f64(),
        timers: state.timers.clone(),
        terminated: state.control == Control::Terminating,
        diagnostics: state.diagnostics.clone(),
        checkpoint_failures: state.checkpoint_failures,
    }
}
