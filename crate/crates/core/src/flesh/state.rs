use super::params::{ParameterStore, Phase};
use super::registry::{VarId, VariableHandle, VariableRegistry};
use super::routine::{Routine, ThornLibrary};
use super::schedule::{build_schedule, ScheduleTree};
use super::FleshError;
use crate::ccl::{GroupKind, ParamValue, RunConfig, ThornManifest};
use crate::grid::{decompose, AxisBoundary, Decomposition, GridSpec, StorageClass};
use std::any::{Any, TypeId};
use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Running,
    Paused,
    Terminating,
}

impl Control {
    pub fn name(self) -> &'static str {
        match self {
            Control::Running => "running",
            Control::Paused => "paused",
            Control::Terminating => "terminating",
        }
    }
}

/// Per-run options that are not thorn parameters.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    /// Overrides `driver::partitions`.
    pub partitions: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            output_dir: PathBuf::from("."),
            partitions: None,
        }
    }
}

/// Thorn-private state, one value per type.
#[derive(Default)]
pub struct Extensions {
    map: HashMap<TypeId, Box<dyn Any + Send + Sync>>,
}

impl Extensions {
    pub fn get<T: Any + Send + Sync>(&self) -> Option<&T> {
        self.map.get(&TypeId::of::<T>())?.downcast_ref()
    }

    pub fn get_mut<T: Any + Send + Sync>(&mut self) -> Option<&mut T> {
        self.map.get_mut(&TypeId::of::<T>())?.downcast_mut()
    }

    pub fn get_or_default<T: Any + Send + Sync + Default>(&mut self) -> &mut T {
        self.map
            .entry(TypeId::of::<T>())
            .or_insert_with(|| Box::<T>::default())
            .downcast_mut()
            .unwrap()
    }

    pub fn insert<T: Any + Send + Sync>(&mut self, value: T) {
        self.map.insert(TypeId::of::<T>(), Box::new(value));
    }

    pub fn take<T: Any + Send + Sync>(&mut self) -> Option<T> {
        self.map
            .remove(&TypeId::of::<T>())
            .and_then(|b| b.downcast().ok())
            .map(|b| *b)
    }
}

impl std::fmt::Debug for Extensions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Extensions({} entries)", self.map.len())
    }
}

/// Most recent row of reductions, shown to steering clients.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionRow {
    pub iteration: u64,
    pub time: f64,
    pub columns: Vec<(String, f64)>,
}

#[derive(Debug)]
pub struct SimulationState {
    pub iteration: u64,
    pub time: f64,
    pub grid: Decomposition,
    pub params: ParameterStore,
    pub registry: VariableRegistry,
    pub schedule: Option<Arc<ScheduleTree>>,
    pub control: Control,
    /// Active manifests in activation order.
    pub active: Vec<ThornManifest>,
    pub output_dir: PathBuf,
    /// Resumed from a checkpoint: INITIAL is skipped.
    pub recovered: bool,
    /// Remaining iterations of a steering `step` command.
    pub step_budget: Option<u64>,
    pub diagnostics: Vec<String>,
    pub last_reduction: Option<ReductionRow>,
    pub checkpoint_failures: usize,
    pub timers: BTreeMap<String, Duration>,
    pub ext: Extensions,
    pub(crate) routines: HashMap<String, Routine>,
    pub(crate) current_thorn: Option<String>,
}

/// Active manifests in ActiveThorns order.
pub fn active_manifests<'a>(
    manifests: &'a [ThornManifest],
    config: &RunConfig,
) -> Result<Vec<&'a ThornManifest>, FleshError> {
    config
        .active_thorns
        .iter()
        .map(|name| {
            manifests
                .iter()
                .find(|m| &m.thorn_name == name)
                .ok_or_else(|| FleshError::Bind {
                    name: name.clone(),
                    reason: "active thorn has no manifest".into(),
                })
        })
        .collect()
}

/// Declares the parameters of the active thorns and applies the configuration in file order.
pub fn bind_parameters(active: &[&ThornManifest], config: &RunConfig) -> Result<ParameterStore, FleshError> {
    let mut params = ParameterStore::default();
    for m in active {
        for p in &m.params {
            params.declare(&m.implementation, p);
        }
    }
    for a in &config.assignments {
        let name = a.full_name();
        params
            .set_text(&name, &a.value, Phase::Initial)
            .map_err(|e| FleshError::Bind {
                name: name.clone(),
                reason: e.to_string(),
            })?;
    }
    Ok(params)
}

fn grid_spec(params: &ParameterStore) -> Result<GridSpec, FleshError> {
    if !params.contains("driver::global_n") {
        return Ok(GridSpec::uniform(1, 1, 0.0, 1.0, AxisBoundary::Periodic)?);
    }
    let boundary = match params.keyword("driver::boundary")? {
        "physical" => AxisBoundary::Physical,
        _ => AxisBoundary::Periodic,
    };
    Ok(GridSpec::uniform(
        params.int("driver::dimensions")? as usize,
        params.int("driver::global_n")? as usize,
        params.real("driver::lower")?,
        params.real("driver::upper")?,
        boundary,
    )?)
}

/// Activates the thorns named in the configuration: binds parameters, builds the variable
/// registry and allocates zeroed storage (ghosts included). Inactive thorns contribute nothing.
pub fn activate(
    library: &ThornLibrary,
    manifests: &[ThornManifest],
    config: &RunConfig,
    options: &RunOptions,
) -> Result<SimulationState, FleshError> {
    let active = active_manifests(manifests, config)?;
    let mut params = bind_parameters(&active, config)?;
    if let Some(p) = options.partitions {
        if params.contains("driver::partitions") {
            params
                .set("driver::partitions", ParamValue::Int(p as i64), Phase::Initial)
                .map_err(|e| FleshError::Bind {
                    name: "driver::partitions".into(),
                    reason: e.to_string(),
                })?;
        }
    }
    let mut routines = HashMap::new();
    for m in &active {
        for s in &m.schedule_items {
            let r = library
                .routine(&m.thorn_name, &s.routine)
                .ok_or_else(|| FleshError::MissingRoutine {
                    thorn: m.thorn_name.clone(),
                    routine: s.routine.clone(),
                })?;
            routines.insert(format!("{}::{}", m.thorn_name, s.routine), r.clone());
        }
    }
    let registry = VariableRegistry::build(active.iter().copied());
    let grid = allocate_grid(&params, &registry, options.partitions)?;
    Ok(SimulationState {
        iteration: 0,
        time: 0.0,
        grid,
        params,
        registry,
        schedule: None,
        control: Control::Running,
        active: active.into_iter().cloned().collect(),
        output_dir: options.output_dir.clone(),
        recovered: false,
        step_budget: None,
        diagnostics: Vec::new(),
        last_reduction: None,
        checkpoint_failures: 0,
        timers: BTreeMap::new(),
        ext: Extensions::default(),
        routines,
        current_thorn: None,
    })
}

pub(crate) fn allocate_grid(
    params: &ParameterStore,
    registry: &VariableRegistry,
    partitions_override: Option<usize>,
) -> Result<Decomposition, FleshError> {
    let spec = grid_spec(params)?;
    let partitions = match params.int("driver::partitions") {
        Ok(p) => p as usize,
        Err(_) => partitions_override.unwrap_or(1),
    };
    let ghost = registry
        .iter()
        .filter(|v| v.kind == GroupKind::GridFunction)
        .map(|v| v.ghost)
        .max()
        .unwrap_or(0);
    let mut grid = decompose(&spec, partitions, ghost)?;
    for v in registry.iter() {
        let class = match v.kind {
            GroupKind::GridFunction => StorageClass::Grid,
            GroupKind::Scalar => StorageClass::Scalar,
        };
        let slot = grid.allocate(class, v.timelevels);
        debug_assert_eq!(slot, v.id.0);
    }
    Ok(grid)
}

impl SimulationState {
    pub fn build_schedule(&mut self) -> Result<Arc<ScheduleTree>, FleshError> {
        let tree = Arc::new(build_schedule(self.active.iter())?);
        self.schedule = Some(tree.clone());
        Ok(tree)
    }

    pub fn lookup_variable(&self, full_name: &str) -> Result<&VariableHandle, FleshError> {
        self.registry
            .lookup(full_name)
            .ok_or_else(|| FleshError::UnknownVariable(full_name.to_string()))
    }

    pub fn list_variables(&self, pattern: &str) -> Vec<&VariableHandle> {
        self.registry.matching(pattern)
    }

    pub fn set_parameter(&mut self, full_name: &str, value: ParamValue, phase: Phase) -> Result<(), FleshError> {
        self.params.set(full_name, value, phase)
    }

    /// Constant time step: `mol::dt` when the integrator is active, otherwise 1.
    pub fn dt(&self) -> f64 {
        self.params.real("mol::dt").unwrap_or(1.0)
    }

    /// `driver::t_final`, or 0 without a driver.
    pub fn t_final(&self) -> f64 {
        self.params.real("driver::t_final").unwrap_or(0.0)
    }

    /// Thorn whose routine is currently executing.
    pub fn current_thorn(&self) -> Option<&str> {
        self.current_thorn.as_deref()
    }

    pub fn thorn_names(&self) -> Vec<String> {
        self.active.iter().map(|m| m.thorn_name.clone()).collect()
    }

    /// Global interior values of a variable at a timelevel.
    pub fn gather(&self, full_name: &str, level: usize) -> Result<Vec<f64>, FleshError> {
        let h = self.lookup_variable(full_name)?;
        if level >= h.timelevels {
            return Err(FleshError::BadValue {
                name: full_name.to_string(),
                reason: format!("has {} timelevels, requested level {level}", h.timelevels),
            });
        }
        Ok(self.grid.gather(h.id.0, level))
    }

    /// Overwrites a variable's interior at a timelevel from global-order values.
    pub fn scatter(&mut self, full_name: &str, level: usize, values: &[f64]) -> Result<(), FleshError> {
        let h = self.lookup_variable(full_name)?;
        let expected = match h.kind {
            GroupKind::GridFunction => self.grid.spec.total_points(),
            GroupKind::Scalar => 1,
        };
        if values.len() != expected || level >= h.timelevels {
            return Err(FleshError::BadValue {
                name: full_name.to_string(),
                reason: format!("expected {expected} values at a level below {}", h.timelevels),
            });
        }
        let slot = h.id.0;
        self.grid.scatter(slot, level, values);
        Ok(())
    }

    /// Ghost-synchronizes every grid-function group.
    pub fn sync_all(&mut self) {
        let slots: Vec<usize> = self
            .registry
            .iter()
            .filter(|v| v.kind == GroupKind::GridFunction)
            .map(|v| v.id.0)
            .collect();
        self.grid.sync_ghosts(&slots);
    }

    pub fn var_slot(&self, id: VarId) -> usize {
        id.0
    }

    pub fn note(&mut self, message: impl Into<String>) {
        let m = message.into();
        log::warn!("{m}");
        self.diagnostics.push(m);
    }
}
