//! A small modular simulation framework: thorns declare variables, parameters and scheduled
//! routines in manifests; the flesh activates them, orders their routines and drives the run.

pub mod ccl;
pub mod flesh;
pub mod grid;
pub mod io;
pub mod mol;
pub mod steer;
pub mod thorns;

pub use ccl::{
    parse_manifest, parse_run_config, print_manifest, validate_closure, Bin, GroupKind, ParamValue, ParseError,
    RunConfig, ThornManifest, ValidationReport,
};
pub use flesh::{
    activate, main_loop, BoundaryHook, Control, ExitReport, FleshError, NoHook, Phase, RunFailure, RunOptions,
    ScheduleTree, SimulationState, ThornLibrary, VariableHandle,
};
pub use grid::{GridError, GridSpec, ReductionKind};
pub use io::RestoreError;
pub use thorns::{builtin_library, builtin_manifests};
