//! Text output of grid variables and reductions, and checkpoint/restart.

mod ascii;
mod checkpoint;

pub use ascii::{
    format_float, output_ascii, output_file_name, output_reductions, parse_kinds, reduction_columns, IoFailure,
    REDUCTIONS_FILE,
};
pub use checkpoint::{
    checkpoint_path, read_checkpoint, restore_checkpoint, restore_from, write_checkpoint, Checkpoint, RestoreError,
    VarRecord, MAGIC, VERSION,
};
