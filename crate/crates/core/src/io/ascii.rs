use crate::ccl::GroupKind;
use crate::flesh::{ReductionRow, SimulationState, VariableHandle};
use crate::grid::{reduce_values, ReductionKind};
use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const REDUCTIONS_FILE: &str = "reductions.asc";

/// Shortest decimal that parses back to the same `f64`; exponent form outside `[1e-5, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, thiserror::Error)]
#[error("IoFailure: {path}: {source}")]
pub struct IoFailure {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Files this run has already written; the first write truncates.
#[derive(Default)]
struct OpenedFiles(HashSet<PathBuf>);

fn open_for_run(state: &mut SimulationState, path: &Path) -> Result<(File, bool), IoFailure> {
    let fail = |source| IoFailure {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    let opened = state.ext.get_or_default::<OpenedFiles>();
    let fresh = !opened.0.contains(path);
    let file = if fresh {
        File::create(path)
    } else {
        OpenOptions::new().append(true).open(path)
    }
    .map_err(fail)?;
    opened.0.insert(path.to_path_buf());
    Ok((file, fresh))
}

/// `<impl>__<var>.asc`
pub fn output_file_name(v: &VariableHandle) -> String {
    format!("{}__{}.asc", v.implementation, v.name)
}

/// Appends one block per grid function matching `patterns` when `iteration` is a multiple
/// of `every`. Returns the files written.
pub fn output_ascii(state: &mut SimulationState, patterns: &str, every: u64) -> Result<Vec<PathBuf>, IoFailure> {
    if every == 0 || !state.iteration.is_multiple_of(every) {
        return Ok(Vec::new());
    }
    let vars: Vec<VariableHandle> = state
        .registry
        .matching_any(patterns)
        .into_iter()
        .filter(|v| v.kind == GroupKind::GridFunction)
        .cloned()
        .collect();
    let mut written = Vec::new();
    for v in vars {
        let path = state.output_dir.join(output_file_name(&v));
        let block = render_block(state, &v);
        let (file, _) = open_for_run(state, &path)?;
        let mut w = BufWriter::new(file);
        w.write_all(block.as_bytes())
            .and_then(|_| w.flush())
            .map_err(|source| IoFailure {
                path: path.clone(),
                source,
            })?;
        written.push(path);
    }
    Ok(written)
}

fn render_block(state: &SimulationState, v: &VariableHandle) -> String {
    let spec = &state.grid.spec;
    let values = state.grid.gather(v.id.0, 0);
    let mut out = format!("# iteration {} time {}\n", state.iteration, format_float(state.time));
    for (idx, value) in values.iter().enumerate() {
        let g = spec.unravel(idx);
        for &i in &g[..spec.dims] {
            out.push_str(&i.to_string());
            out.push(' ');
        }
        for (a, &i) in g[..spec.dims].iter().enumerate() {
            out.push_str(&format_float(spec.coord(a, i)));
            out.push(' ');
        }
        out.push_str(&format_float(*value));
        out.push('\n');
    }
    out.push('\n');
    out
}

/// Columns of the reduction table: variables in pattern order, then kinds.
pub fn reduction_columns(state: &SimulationState, patterns: &str, kinds: &[ReductionKind]) -> Vec<(String, usize, ReductionKind)> {
    let mut seen = HashSet::new();
    let mut cols = Vec::new();
    for p in patterns.split_whitespace() {
        for v in state.registry.matching(p) {
            if seen.insert(v.id) {
                for &k in kinds {
                    cols.push((v.full_name.clone(), v.id.0, k));
                }
            }
        }
    }
    cols
}

pub fn parse_kinds(text: &str) -> Result<Vec<ReductionKind>, String> {
    text.split_whitespace().map(str::parse).collect()
}

/// Appends one row `iteration time col...` to `reductions.asc`, writing a header comment first.
pub fn output_reductions(
    state: &mut SimulationState,
    patterns: &str,
    kinds: &[ReductionKind],
) -> Result<ReductionRow, IoFailure> {
    let cols = reduction_columns(state, patterns, kinds);
    let row = ReductionRow {
        iteration: state.iteration,
        time: state.time,
        columns: cols
            .iter()
            .map(|(name, slot, k)| {
                (format!("{name}:{k}"), reduce_values(&state.grid.gather(*slot, 0), *k))
            })
            .collect(),
    };
    let path = state.output_dir.join(REDUCTIONS_FILE);
    let (file, fresh) = open_for_run(state, &path)?;
    let mut text = String::new();
    if fresh {
        text.push_str("# iteration time");
        for (name, _) in &row.columns {
            text.push(' ');
            text.push_str(name);
        }
        text.push('\n');
    }
    text.push_str(&format!("{} {}", row.iteration, format_float(row.time)));
    for (_, v) in &row.columns {
        text.push(' ');
        text.push_str(&format_float(*v));
    }
    text.push('\n');
    let mut w = BufWriter::new(file);
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|source| IoFailure { path, source })?;
    state.last_reduction = Some(row.clone());
    Ok(row)
}
