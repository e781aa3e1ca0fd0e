//! Versioned little-endian checkpoint container.
//!
//! ```text
//! "THRNCKPT" | version u32 | iteration u64 | time f64
//! param count u32, per param: name (u16 len + utf8) | tag u8 | value
//! var count u32, per record: name | timelevel u8 | rank u8 | shape u32 x rank | f64 x prod(shape)
//! ```

use crate::ccl::{GroupKind, ParamValue, RunConfig, Steerable, ThornManifest};
use crate::flesh::{activate, allocate_grid, FleshError, Phase, RunOptions, SimulationState, ThornLibrary};
use std::fs;
use std::path::{Path, PathBuf};

pub const MAGIC: &[u8; 8] = b"THRNCKPT";
pub const VERSION: u32 = 1;

/// Parameters that describe how a run is executed rather than what it computes.
const EXCLUDED_PARAMS: &[&str] = &["driver::partitions"];

#[derive(Debug, Clone, PartialEq)]
pub struct VarRecord {
    pub name: String,
    pub timelevel: u8,
    pub shape: Vec<u32>,
    pub data: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub iteration: u64,
    pub time: f64,
    pub params: Vec<(String, ParamValue)>,
    pub variables: Vec<VarRecord>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RestoreError {
    #[error("RestoreError(BadMagic)")]
    BadMagic,
    #[error("RestoreError(VersionMismatch): file version {found}, expected {VERSION}")]
    VersionMismatch { found: u32 },
    #[error("RestoreError(Truncated): file ends inside {0}")]
    Truncated(&'static str),
    #[error("RestoreError(Corrupt): {0}")]
    Corrupt(String),
    #[error("RestoreError(MissingVariable): {0} is not declared by an active thorn")]
    MissingVariable(String),
    #[error("RestoreError(ShapeMismatch): {name}: checkpoint has {found}, run has {expected}")]
    ShapeMismatch {
        name: String,
        expected: String,
        found: String,
    },
    #[error("RestoreError(ParameterConflict): configuration changes non-steerable {}", .0.join(", "))]
    ParameterConflict(Vec<String>),
    #[error("RestoreError(Io): {0}")]
    Io(String),
    #[error(transparent)]
    Flesh(#[from] FleshError),
}

impl Checkpoint {
    /// Captures iteration, time, parameters and every timelevel of every variable in global order.
    pub fn capture(state: &SimulationState) -> Checkpoint {
        let params = state
            .params
            .iter()
            .filter(|(name, _)| !EXCLUDED_PARAMS.contains(name))
            .map(|(name, e)| (name.to_string(), e.value.clone()))
            .collect();
        let spec = &state.grid.spec;
        let mut variables = Vec::new();
        for v in state.registry.iter() {
            let shape: Vec<u32> = match v.kind {
                GroupKind::GridFunction => spec.shape().iter().map(|&n| n as u32).collect(),
                GroupKind::Scalar => Vec::new(),
            };
            for level in 0..v.timelevels {
                variables.push(VarRecord {
                    name: v.full_name.clone(),
                    timelevel: level as u8,
                    shape: shape.clone(),
                    data: state.grid.gather(v.id.0, level),
                });
            }
        }
        variables.sort_by(|a: &VarRecord, b| (&a.name, a.timelevel).cmp(&(&b.name, b.timelevel)));
        Checkpoint {
            iteration: state.iteration,
            time: state.time,
            params,
            variables,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Vec::new();
        w.extend_from_slice(MAGIC);
        w.extend_from_slice(&VERSION.to_le_bytes());
        w.extend_from_slice(&self.iteration.to_le_bytes());
        w.extend_from_slice(&self.time.to_le_bytes());
        w.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        for (name, value) in &self.params {
            put_str(&mut w, name);
            w.push(value.param_type().tag());
            match value {
                ParamValue::Real(x) => w.extend_from_slice(&x.to_le_bytes()),
                ParamValue::Int(i) => w.extend_from_slice(&i.to_le_bytes()),
                ParamValue::Keyword(s) | ParamValue::Str(s) => put_str(&mut w, s),
                ParamValue::Boolean(b) => w.push(u8::from(*b)),
            }
        }
        w.extend_from_slice(&(self.variables.len() as u32).to_le_bytes());
        for v in &self.variables {
            put_str(&mut w, &v.name);
            w.push(v.timelevel);
            w.push(v.shape.len() as u8);
            for &n in &v.shape {
                w.extend_from_slice(&n.to_le_bytes());
            }
            for x in &v.data {
                w.extend_from_slice(&x.to_le_bytes());
            }
        }
        w
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Checkpoint, RestoreError> {
        let mut r = Reader { bytes, at: 0 };
        if r.take(8, "magic").ok() != Some(MAGIC.as_slice()) {
            return Err(RestoreError::BadMagic);
        }
        let found = r.u32("version")?;
        if found != VERSION {
            return Err(RestoreError::VersionMismatch { found });
        }
        let iteration = r.u64("iteration")?;
        let time = f64::from_bits(r.u64("time")?);
        let n_params = r.u32("parameter count")?;
        let mut params = Vec::new();
        for _ in 0..n_params {
            let name = r.string("parameter name")?;
            let tag = r.u8("parameter tag")?;
            let value = match tag {
                0 => ParamValue::Real(f64::from_bits(r.u64("real value")?)),
                1 => ParamValue::Int(r.u64("int value")? as i64),
                2 => ParamValue::Keyword(r.string("keyword value")?),
                3 => ParamValue::Boolean(r.u8("boolean value")? != 0),
                4 => ParamValue::Str(r.string("string value")?),
                t => return Err(RestoreError::Corrupt(format!("parameter {name} has type tag {t}"))),
            };
            params.push((name, value));
        }
        let n_vars = r.u32("variable count")?;
        let mut variables = Vec::new();
        for _ in 0..n_vars {
            let name = r.string("variable name")?;
            let timelevel = r.u8("timelevel")?;
            let rank = r.u8("rank")?;
            let shape = (0..rank).map(|_| r.u32("shape")).collect::<Result<Vec<_>, _>>()?;
            let count: usize = shape.iter().map(|&n| n as usize).product();
            let raw = r.take(count.checked_mul(8).ok_or(RestoreError::Truncated("payload"))?, "payload")?;
            let data = raw
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            variables.push(VarRecord {
                name,
                timelevel,
                shape,
                data,
            });
        }
        if r.at != bytes.len() {
            return Err(RestoreError::Corrupt(format!("{} trailing bytes", bytes.len() - r.at)));
        }
        Ok(Checkpoint {
            iteration,
            time,
            params,
            variables,
        })
    }
}

fn put_str(w: &mut Vec<u8>, s: &str) {
    w.extend_from_slice(&(s.len() as u16).to_le_bytes());
    w.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], RestoreError> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or(RestoreError::Truncated(what))?;
        let s = &self.bytes[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u8(&mut self, what: &'static str) -> Result<u8, RestoreError> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, RestoreError> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &'static str) -> Result<u64, RestoreError> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &'static str) -> Result<String, RestoreError> {
        let n = u16::from_le_bytes(self.take(2, what)?.try_into().unwrap()) as usize;
        String::from_utf8(self.take(n, what)?.to_vec()).map_err(|_| RestoreError::Corrupt(format!("{what} is not UTF-8")))
    }
}

pub fn write_checkpoint(state: &SimulationState, path: &Path) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, Checkpoint::capture(state).to_bytes())
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint, RestoreError> {
    let bytes = fs::read(path).map_err(|e| RestoreError::Io(format!("{}: {e}", path.display())))?;
    Checkpoint::from_bytes(&bytes)
}

/// Where `Checkpoint_Write` puts the checkpoint of `iteration`.
pub fn checkpoint_path(state: &SimulationState, iteration: u64) -> PathBuf {
    let dir = state.params.string("checkpoint::dir").unwrap_or("checkpoints");
    state
        .output_dir
        .join(dir)
        .join(format!("checkpoint.it{iteration:010}.ckpt"))
}

pub fn restore_checkpoint(
    path: &Path,
    library: &ThornLibrary,
    manifests: &[ThornManifest],
    config: &RunConfig,
    options: &RunOptions,
) -> Result<SimulationState, RestoreError> {
    restore_from(&read_checkpoint(path)?, library, manifests, config, options)
}

/// Builds a run from the configuration, then takes iteration, time, data and every parameter
/// the configuration may not override from the checkpoint.
pub fn restore_from(
    ckpt: &Checkpoint,
    library: &ThornLibrary,
    manifests: &[ThornManifest],
    config: &RunConfig,
    options: &RunOptions,
) -> Result<SimulationState, RestoreError> {
    let mut state = activate(library, manifests, config, options)?;
    let mut conflicts = Vec::new();
    for (name, saved) in &ckpt.params {
        let Some(entry) = state.params.entry(name) else {
            continue;
        };
        let assigned = config.assignments.iter().any(|a| &a.full_name() == name);
        match entry.decl.steerable {
            Steerable::Never if assigned => {
                if !entry.value.same_bits(saved) {
                    conflicts.push(name.clone());
                }
            }
            Steerable::Recover | Steerable::Always if assigned => {}
            _ => {
                state
                    .params
                    .set(name, saved.clone(), Phase::Initial)
                    .map_err(RestoreError::Flesh)?;
            }
        }
    }
    if !conflicts.is_empty() {
        return Err(RestoreError::ParameterConflict(conflicts));
    }
    state.grid = allocate_grid(&state.params, &state.registry, options.partitions)?;
    let spec = state.grid.spec.clone();
    for rec in &ckpt.variables {
        let h = state
            .registry
            .lookup(&rec.name)
            .ok_or_else(|| RestoreError::MissingVariable(rec.name.clone()))?
            .clone();
        let expected: Vec<u32> = match h.kind {
            GroupKind::GridFunction => spec.shape().iter().map(|&n| n as u32).collect(),
            GroupKind::Scalar => Vec::new(),
        };
        if rec.shape != expected || rec.timelevel as usize >= h.timelevels {
            return Err(RestoreError::ShapeMismatch {
                name: format!("{} level {}", rec.name, rec.timelevel),
                expected: format!("shape {expected:?} with {} timelevel(s)", h.timelevels),
                found: format!("shape {:?} at level {}", rec.shape, rec.timelevel),
            });
        }
        state.grid.scatter(h.id.0, rec.timelevel as usize, &rec.data);
    }
    state.iteration = ckpt.iteration;
    state.time = ckpt.time;
    state.recovered = true;
    state.sync_all();
    Ok(state)
}
