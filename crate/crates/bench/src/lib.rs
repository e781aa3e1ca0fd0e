//! Benchmark fixtures.

use thornflesh::flesh::{activate, RunOptions, SimulationState};
use thornflesh::{builtin_library, builtin_manifests, parse_run_config};

/// Standing wave on a periodic 1D grid of `n` points, no output thorns.
pub fn wave_config(n: usize, method: &str, t_final: f64) -> String {
    format!(
        "ActiveThorns = \"CartGrid MoL WaveToy\"\n\
         driver::global_n = {n}\n\
         driver::t_final = {t_final:?}\n\
         mol::method = \"{method}\"\n\
         mol::dt = {:?}\n",
        0.5 / n as f64
    )
}

pub fn activated(src: &str, partitions: usize) -> SimulationState {
    let manifests = builtin_manifests().expect("builtin manifests");
    let config = parse_run_config(src).expect("bench config");
    let options = RunOptions {
        output_dir: std::env::temp_dir(),
        partitions: Some(partitions),
    };
    activate(&builtin_library(), &manifests, &config, &options).expect("activation")
}
