//! Thorns compiled into the executable. Each is dormant unless named in ActiveThorns.

pub mod nanchecker;
pub mod odetest;
pub mod wavetoy;

use crate::ccl::{parse_manifest, ParseError, ThornManifest};
use crate::flesh::{Routine, RoutineError, SimulationState, ThornLibrary};
use crate::io::{checkpoint_path, output_ascii, output_reductions, parse_kinds, write_checkpoint};
use crate::mol;

/// Manifest sources by thorn name.
pub const MANIFESTS: [(&str, &str); 7] = [
    ("CartGrid", include_str!("../../thorns/cartgrid.thorn")),
    ("Checkpoint", include_str!("../../thorns/checkpoint.thorn")),
    ("IOASCII", include_str!("../../thorns/ioascii.thorn")),
    ("MoL", include_str!("../../thorns/mol.thorn")),
    ("NaNChecker", include_str!("../../thorns/nanchecker.thorn")),
    ("ODETest", include_str!("../../thorns/odetest.thorn")),
    ("WaveToy", include_str!("../../thorns/wavetoy.thorn")),
];

pub fn builtin_manifests() -> Result<Vec<ThornManifest>, ParseError> {
    MANIFESTS.iter().map(|(_, src)| parse_manifest(src)).collect()
}

/// Every compiled-in thorn with its routines and embedded manifest.
pub fn builtin_library() -> ThornLibrary {
    let mut lib = ThornLibrary::new();
    for (name, src) in MANIFESTS {
        lib.set_manifest(name, src);
    }
    lib.add_routine(
        "MoL",
        "MoL_Step",
        Routine::global(|s| mol::step(s).map_err(Into::into)),
    );
    lib.add_routine("IOASCII", "IOASCII_Output", Routine::global(ascii_output))
        .add_routine("IOASCII", "IOASCII_Reductions", Routine::global(ascii_reductions))
        .add_routine("Checkpoint", "Checkpoint_Write", Routine::global(checkpoint_write));
    wavetoy::install(&mut lib);
    odetest::install(&mut lib);
    nanchecker::install(&mut lib);
    lib
}

fn ascii_output(state: &mut SimulationState) -> Result<(), RoutineError> {
    let patterns = state.params.string("io_ascii::out_vars")?.to_string();
    let every = state.params.int("io_ascii::out_every")? as u64;
    if patterns.trim().is_empty() {
        return Ok(());
    }
    if let Err(e) = output_ascii(state, &patterns, every) {
        state.note(e.to_string());
    }
    Ok(())
}

fn ascii_reductions(state: &mut SimulationState) -> Result<(), RoutineError> {
    let patterns = state.params.string("io_ascii::reduce_vars")?.to_string();
    let kinds = parse_kinds(state.params.string("io_ascii::reduce_kinds")?)
        .map_err(|e| RoutineError::msg(format!("io_ascii::reduce_kinds: {e}")))?;
    if let Err(e) = output_reductions(state, &patterns, &kinds) {
        state.note(e.to_string());
    }
    Ok(())
}

fn checkpoint_write(state: &mut SimulationState) -> Result<(), RoutineError> {
    let every = state.params.int("checkpoint::every")? as u64;
    if every == 0 || state.iteration == 0 || !state.iteration.is_multiple_of(every) {
        return Ok(());
    }
    let path = checkpoint_path(state, state.iteration);
    if let Err(e) = write_checkpoint(state, &path) {
        state.checkpoint_failures += 1;
        state.note(format!("IoFailure: checkpoint {}: {e}", path.display()));
    }
    Ok(())
}
