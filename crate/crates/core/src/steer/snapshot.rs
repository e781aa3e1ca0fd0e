use crate::ccl::{GroupKind, ParamValue};
use crate::flesh::SimulationState;
use crate::grid::GridSpec;
use serde::Serialize;
use std::collections::HashMap;

#[derive(Debug, Clone, Serialize)]
pub struct ParamInfo {
    pub name: String,
    #[serde(rename = "type")]
    pub ptype: &'static str,
    pub value: serde_json::Value,
    pub steerable: &'static str,
    pub range: String,
    pub description: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VarInfo {
    pub name: String,
    pub group: String,
    pub kind: &'static str,
    pub shape: Vec<usize>,
    pub timelevels: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionInfo {
    pub iteration: u64,
    pub time: f64,
    pub columns: Vec<(String, f64)>,
}

/// Copy of the observable state taken at an iteration boundary.
#[derive(Debug, Clone, Serialize)]
pub struct StateSnapshot {
    pub iteration: u64,
    pub time: f64,
    pub control: &'static str,
    pub active_thorns: Vec<String>,
    pub params: Vec<ParamInfo>,
    pub variables: Vec<VarInfo>,
    pub last_reduction: Option<ReductionInfo>,
    #[serde(skip)]
    pub schedule: Vec<(String, Vec<String>)>,
    #[serde(skip)]
    pub grid: GridSpec,
    /// Timelevel 0 of every variable, global order.
    #[serde(skip)]
    pub data: HashMap<String, Vec<f64>>,
}

pub fn value_json(v: &ParamValue) -> serde_json::Value {
    match v {
        ParamValue::Real(x) => serde_json::json!(x),
        ParamValue::Int(i) => serde_json::json!(i),
        ParamValue::Keyword(s) | ParamValue::Str(s) => serde_json::json!(s),
        ParamValue::Boolean(b) => serde_json::json!(b),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SliceError {
    #[error("UnknownVariable: {0}")]
    UnknownVariable(String),
    #[error("BadSlice: {0}")]
    BadSlice(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlicePayload {
    pub name: String,
    pub axis: usize,
    pub coords: Vec<f64>,
    pub values: Vec<f64>,
    pub iteration: u64,
    pub time: f64,
}

impl StateSnapshot {
    pub fn capture(state: &SimulationState) -> StateSnapshot {
        let spec = state.grid.spec.clone();
        let params = state
            .params
            .iter()
            .map(|(name, e)| ParamInfo {
                name: name.to_string(),
                ptype: e.decl.ptype.keyword(),
                value: value_json(&e.value),
                steerable: e.decl.steerable.keyword(),
                range: e.decl.range.to_string(),
                description: e.decl.description.clone(),
            })
            .collect();
        let variables = state
            .registry
            .iter()
            .map(|v| VarInfo {
                name: v.full_name.clone(),
                group: v.group.to_string(),
                kind: v.kind.keyword(),
                shape: match v.kind {
                    GroupKind::GridFunction => spec.shape(),
                    GroupKind::Scalar => Vec::new(),
                },
                timelevels: v.timelevels,
            })
            .collect();
        let data = state
            .registry
            .iter()
            .map(|v| (v.full_name.clone(), state.grid.gather(v.id.0, 0)))
            .collect();
        StateSnapshot {
            iteration: state.iteration,
            time: state.time,
            control: state.control.name(),
            active_thorns: state.thorn_names(),
            params,
            variables,
            last_reduction: state.last_reduction.as_ref().map(|r| ReductionInfo {
                iteration: r.iteration,
                time: r.time,
                columns: r.columns.clone(),
            }),
            schedule: state.schedule.as_ref().map(|t| t.keys()).unwrap_or_default(),
            grid: spec,
            data,
        }
    }

    /// A line through the grid along `axis` (default 0); the other active axes are fixed at
    /// `fix` in ascending axis order (default: the middle index).
    pub fn slice(&self, name: &str, axis: Option<usize>, fix: Option<&[usize]>) -> Result<SlicePayload, SliceError> {
        let values = self
            .data
            .get(name)
            .ok_or_else(|| SliceError::UnknownVariable(name.to_string()))?;
        let info = self.variables.iter().find(|v| v.name == name).unwrap();
        let spec = &self.grid;
        let axis = axis.unwrap_or(0);
        if info.shape.is_empty() {
            if axis != 0 || fix.is_some_and(|f| !f.is_empty()) {
                return Err(SliceError::BadSlice(format!("{name} is a scalar")));
            }
            return Ok(self.payload(name, 0, Vec::new(), values.clone()));
        }
        if axis >= spec.dims {
            return Err(SliceError::BadSlice(format!(
                "axis {axis} on a {}-dimensional grid",
                spec.dims
            )));
        }
        let others: Vec<usize> = (0..spec.dims).filter(|&a| a != axis).collect();
        let mut at = [0usize; 3];
        match fix {
            Some(f) => {
                if f.len() != others.len() {
                    return Err(SliceError::BadSlice(format!(
                        "expected {} fixed indices, got {}",
                        others.len(),
                        f.len()
                    )));
                }
                for (&a, &i) in others.iter().zip(f) {
                    if i >= spec.global_n[a] {
                        return Err(SliceError::BadSlice(format!("index {i} outside axis {a}")));
                    }
                    at[a] = i;
                }
            }
            None => {
                for &a in &others {
                    at[a] = spec.global_n[a] / 2;
                }
            }
        }
        let mut coords = Vec::with_capacity(spec.global_n[axis]);
        let mut line = Vec::with_capacity(spec.global_n[axis]);
        for i in 0..spec.global_n[axis] {
            at[axis] = i;
            coords.push(spec.coord(axis, i));
            line.push(values[spec.linear_index(at)]);
        }
        Ok(self.payload(name, axis, coords, line))
    }

    fn payload(&self, name: &str, axis: usize, coords: Vec<f64>, values: Vec<f64>) -> SlicePayload {
        SlicePayload {
            name: name.to_string(),
            axis,
            coords,
            values,
            iteration: self.iteration,
            time: self.time,
        }
    }
}
