//! Routines provided by thorns and the context they run in.

use super::params::ParameterStore;
use super::registry::{VariableHandle, VariableRegistry};
use super::state::SimulationState;
use super::FleshError;
use crate::grid::{GridSpec, LocalLayout, Partition};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum RoutineError {
    #[error("{0}")]
    Message(String),
    /// A nested schedule run failed; carried through unchanged.
    #[error(transparent)]
    Flesh(Box<FleshError>),
}

impl RoutineError {
    pub fn msg(m: impl Into<String>) -> Self {
        RoutineError::Message(m.into())
    }
}

impl From<FleshError> for RoutineError {
    fn from(e: FleshError) -> Self {
        RoutineError::Flesh(Box::new(e))
    }
}

pub type LocalFn = dyn Fn(&mut LocalCtx<'_>) -> Result<(), RoutineError> + Send + Sync;
pub type GlobalFn = dyn Fn(&mut SimulationState) -> Result<(), RoutineError> + Send + Sync;

/// A scheduled function.
#[derive(Clone)]
pub enum Routine {
    /// Kernel invoked once per partition; may run concurrently across partitions.
    Local(Arc<LocalFn>),
    /// Driver-level routine invoked once with the whole simulation state.
    Global(Arc<GlobalFn>),
}

impl Routine {
    pub fn local(f: impl Fn(&mut LocalCtx<'_>) -> Result<(), RoutineError> + Send + Sync + 'static) -> Self {
        Routine::Local(Arc::new(f))
    }

    pub fn global(f: impl Fn(&mut SimulationState) -> Result<(), RoutineError> + Send + Sync + 'static) -> Self {
        Routine::Global(Arc::new(f))
    }
}

impl std::fmt::Debug for Routine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Routine::Local(_) => f.write_str("Routine::Local"),
            Routine::Global(_) => f.write_str("Routine::Global"),
        }
    }
}

/// A compiled-in thorn: its manifest text and the routines its schedule names.
#[derive(Debug, Clone, Default)]
pub struct ThornImpl {
    pub manifest_source: Option<String>,
    pub routines: HashMap<String, Routine>,
}

/// Every thorn compiled into the executable, active or not.
#[derive(Debug, Clone, Default)]
pub struct ThornLibrary {
    thorns: HashMap<String, ThornImpl>,
}

impl ThornLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_routine(&mut self, thorn: &str, routine: &str, f: Routine) -> &mut Self {
        self.thorns
            .entry(thorn.to_string())
            .or_default()
            .routines
            .insert(routine.to_string(), f);
        self
    }

    pub fn set_manifest(&mut self, thorn: &str, source: impl Into<String>) -> &mut Self {
        self.thorns.entry(thorn.to_string()).or_default().manifest_source = Some(source.into());
        self
    }

    pub fn routine(&self, thorn: &str, routine: &str) -> Option<&Routine> {
        self.thorns.get(thorn)?.routines.get(routine)
    }

    /// Embedded manifest sources, sorted by thorn name.
    pub fn manifest_sources(&self) -> Vec<(&str, &str)> {
        let mut v: Vec<(&str, &str)> = self
            .thorns
            .iter()
            .filter_map(|(k, t)| t.manifest_source.as_deref().map(|s| (k.as_str(), s)))
            .collect();
        v.sort();
        v
    }

    pub fn merge(&mut self, other: ThornLibrary) -> &mut Self {
        for (name, t) in other.thorns {
            let entry = self.thorns.entry(name).or_default();
            if t.manifest_source.is_some() {
                entry.manifest_source = t.manifest_source;
            }
            entry.routines.extend(t.routines);
        }
        self
    }
}

/// What a per-partition routine sees: its partition, read-only parameters and reflection,
/// and the current iteration. It carries no I/O capability.
pub struct LocalCtx<'a> {
    pub(crate) partition: &'a mut Partition,
    pub(crate) registry: &'a VariableRegistry,
    pub(crate) params: &'a ParameterStore,
    pub(crate) grid: &'a GridSpec,
    pub iteration: u64,
    pub time: f64,
    pub dt: f64,
}

impl<'a> LocalCtx<'a> {
    pub fn rank(&self) -> usize {
        self.partition.rank
    }

    pub fn layout(&self) -> LocalLayout {
        self.partition.layout
    }

    pub fn grid(&self) -> &GridSpec {
        self.grid
    }

    pub fn params(&self) -> &ParameterStore {
        self.params
    }

    pub fn partition(&self) -> &Partition {
        self.partition
    }

    pub fn partition_mut(&mut self) -> &mut Partition {
        self.partition
    }

    pub fn handle(&self, name: &str) -> Result<&VariableHandle, RoutineError> {
        self.registry
            .lookup(name)
            .ok_or_else(|| FleshError::UnknownVariable(name.to_string()).into())
    }

    pub fn registry(&self) -> &VariableRegistry {
        self.registry
    }

    /// Timelevel-0 arrays of the named variables: shared views of `reads`, exclusive views of `writes`.
    pub fn fields(
        &mut self,
        reads: &[&str],
        writes: &[&str],
    ) -> Result<(Vec<&[f64]>, Vec<&mut [f64]>), RoutineError> {
        let mut want: Vec<Option<bool>> = vec![None; self.partition.data.len()];
        let mut read_ids = Vec::with_capacity(reads.len());
        let mut write_ids = Vec::with_capacity(writes.len());
        for (names, ids, exclusive) in [(reads, &mut read_ids, false), (writes, &mut write_ids, true)] {
            for name in names {
                let id = self.handle(name)?.id.0;
                if want[id].is_some() {
                    return Err(RoutineError::msg(format!("variable `{name}` requested twice")));
                }
                want[id] = Some(exclusive);
                ids.push(id);
            }
        }
        let mut slots: Vec<Option<&mut [f64]>> = self
            .partition
            .data
            .iter_mut()
            .zip(&want)
            .map(|(s, w)| w.map(|_| s.levels[0].as_mut_slice()))
            .collect();
        let r = read_ids
            .iter()
            .map(|&i| &*slots[i].take().unwrap())
            .collect();
        let w = write_ids.iter().map(|&i| slots[i].take().unwrap()).collect();
        Ok((r, w))
    }
}
