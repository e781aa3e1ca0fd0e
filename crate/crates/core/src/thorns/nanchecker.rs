//! Scans selected variables for non-finite values.

use crate::flesh::{Control, Routine, RoutineError, SimulationState, ThornLibrary};

pub const THORN: &str = "NaNChecker";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NaNAction {
    Warn,
    Terminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaNReport {
    pub variable: String,
    pub iteration: u64,
    /// Non-finite interior values.
    pub count: usize,
    /// Global linear index of the first one.
    pub first_index: usize,
    pub action: NaNAction,
}

impl std::fmt::Display for NaNReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "NaNChecker: {} has {} non-finite value(s) at iteration {}, first at global index {} (action: {})",
            self.variable,
            self.count,
            self.iteration,
            self.first_index,
            match self.action {
                NaNAction::Warn => "warn",
                NaNAction::Terminate => "terminate",
            }
        )
    }
}

#[derive(Default)]
struct NaNLog(Vec<NaNReport>);

pub fn install(lib: &mut ThornLibrary) {
    lib.add_routine(THORN, "NaNChecker_Check", Routine::global(check));
}

/// Reports every matched variable holding a non-finite interior value at timelevel 0.
/// With `Terminate`, the run is asked to stop once the scan has finished.
pub fn nan_check(state: &mut SimulationState, patterns: &str, action: NaNAction) -> Vec<NaNReport> {
    let mut reports = Vec::new();
    for v in state.registry.matching_any(patterns) {
        let values = state.grid.gather(v.id.0, 0);
        let mut bad = values.iter().enumerate().filter(|(_, x)| !x.is_finite());
        if let Some((first_index, _)) = bad.next() {
            reports.push(NaNReport {
                variable: v.full_name.clone(),
                iteration: state.iteration,
                count: 1 + bad.count(),
                first_index,
                action,
            });
        }
    }
    for r in &reports {
        state.note(r.to_string());
    }
    if action == NaNAction::Terminate && !reports.is_empty() {
        state.control = Control::Terminating;
    }
    state.ext.get_or_default::<NaNLog>().0.extend(reports.iter().cloned());
    reports
}

/// Every report emitted so far in this run.
pub fn nan_reports(state: &SimulationState) -> Vec<NaNReport> {
    state.ext.get::<NaNLog>().map(|l| l.0.clone()).unwrap_or_default()
}

fn check(state: &mut SimulationState) -> Result<(), RoutineError> {
    let every = state.params.int("nanchecker::check_every")?.max(1) as u64;
    if !state.iteration.is_multiple_of(every) {
        return Ok(());
    }
    let patterns = state.params.string("nanchecker::check_vars")?.to_string();
    let action = match state.params.keyword("nanchecker::action")? {
        "terminate" => NaNAction::Terminate,
        _ => NaNAction::Warn,
    };
    nan_check(state, &patterns, action);
    Ok(())
}
