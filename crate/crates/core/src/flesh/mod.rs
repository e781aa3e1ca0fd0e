//! The flesh: thorn activation, parameters, reflection, scheduling and the main loop.

mod params;
mod registry;
mod routine;
mod run;
mod schedule;
mod state;

pub use params::{ParamEntry, ParameterStore, Phase};
pub use registry::{glob_match, GroupInfo, VarId, VariableHandle, VariableRegistry};
pub use routine::{GlobalFn, LocalCtx, LocalFn, Routine, RoutineError, ThornImpl, ThornLibrary};
pub use run::{main_loop, run_bin, run_group, run_location, BoundaryHook, ExitReport, NoHook, RunFailure};
pub use schedule::{build_schedule, ScheduleTree, ScheduledCall};
pub use state::{
    activate, active_manifests, bind_parameters, Control, Extensions, ReductionRow, RunOptions, SimulationState,
};
pub(crate) use state::allocate_grid;

use crate::grid::GridError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FleshError {
    #[error("BindError: {name}: {reason}")]
    Bind { name: String, reason: String },
    #[error("UnknownVariable: {0}")]
    UnknownVariable(String),
    #[error("UnknownParameter: {0}")]
    UnknownParameter(String),
    #[error("NotSteerable: {name} is steerable={steerable}")]
    NotSteerable { name: String, steerable: &'static str },
    #[error("OutOfRange: {name} = {value} is outside {range}")]
    OutOfRange { name: String, value: String, range: String },
    #[error("BadValue: {name}: {reason}")]
    BadValue { name: String, reason: String },
    #[error("CycleDetected in {location}: {}", routines.join(" -> "))]
    CycleDetected { location: String, routines: Vec<String> },
    #[error("UnknownRoutineRef: {routine} refers to `{reference}`, which is not scheduled {location}")]
    UnknownRoutineRef {
        routine: String,
        reference: String,
        location: String,
    },
    #[error("RoutineFailure: {routine}: {message}")]
    RoutineFailure { routine: String, message: String },
    #[error("MissingRoutine: thorn {thorn} has no compiled routine {routine}")]
    MissingRoutine { thorn: String, routine: String },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("schedule has not been built")]
    ScheduleNotBuilt,
}

impl FleshError {
    /// Variant name as used in reports and HTTP error bodies.
    pub fn kind(&self) -> &'static str {
        match self {
            FleshError::Bind { .. } => "BindError",
            FleshError::UnknownVariable(_) => "UnknownVariable",
            FleshError::UnknownParameter(_) => "UnknownParameter",
            FleshError::NotSteerable { .. } => "NotSteerable",
            FleshError::OutOfRange { .. } => "OutOfRange",
            FleshError::BadValue { .. } => "BadValue",
            FleshError::CycleDetected { .. } => "CycleDetected",
            FleshError::UnknownRoutineRef { .. } => "UnknownRoutineRef",
            FleshError::RoutineFailure { .. } => "RoutineFailure",
            FleshError::MissingRoutine { .. } => "MissingRoutine",
            FleshError::Grid(_) => "GridError",
            FleshError::ScheduleNotBuilt => "ScheduleNotBuilt",
        }
    }
}
