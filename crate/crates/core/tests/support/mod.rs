//! Fixtures and independent oracles shared by the integration suites.
#![allow(dead_code)]

pub mod gen;
pub mod golden;
pub mod oracle;
pub mod steer;

use std::path::Path;
use thornflesh::flesh::{activate, main_loop, ExitReport, NoHook, RunFailure, RunOptions, SimulationState};
use thornflesh::ccl::Bin;
use thornflesh::flesh::build_schedule;
use thornflesh::FleshError;
use thornflesh::{builtin_library, builtin_manifests, parse_run_config, RunConfig};

pub fn config(src: &str) -> RunConfig {
    parse_run_config(src).unwrap_or_else(|e| panic!("bad test config: {e}\n{src}"))
}

/// Activates the compiled-in thorns for `src`, writing output under `out`.
pub fn start(src: &str, partitions: Option<usize>, out: &Path) -> SimulationState {
    let manifests = builtin_manifests().unwrap();
    let options = RunOptions {
        output_dir: out.to_path_buf(),
        partitions,
    };
    activate(&builtin_library(), &manifests, &config(src), &options).unwrap()
}

/// 1D periodic standing wave with the given method and resolution.
pub fn wave_par(n: usize, method: &str, dt: f64, t_final: f64) -> String {
    format!(
        "ActiveThorns = \"CartGrid MoL WaveToy\"\n\
         driver::global_n = {n}\n\
         driver::t_final = {t_final:?}\n\
         mol::method = \"{method}\"\n\
         mol::dt = {dt:?}\n"
    )
}

pub fn ode_par(method: &str, dt: f64, lambda: f64, steps: u64) -> String {
    format!(
        "ActiveThorns = \"MoL ODETest CartGrid\"\n\
         driver::global_n = 1\n\
         driver::t_final = {:?}\n\
         mol::method = \"{method}\"\n\
         mol::dt = {dt:?}\n\
         odetest::lambda = {lambda:?}\n",
        steps as f64 * dt
    )
}

/// Distance in units in the last place between two finite doubles of the same sign.
pub fn ulps(a: f64, b: f64) -> u64 {
    let key = |x: f64| {
        let bits = x.to_bits() as i64;
        if bits < 0 {
            i64::MIN - bits
        } else {
            bits
        }
    };
    key(a).abs_diff(key(b))
}

/// Checks `build_schedule` against the brute-force oracle. Returns a description of the
/// first disagreement.
pub fn agrees_with_oracle(set: &gen::ConstraintSet) -> Result<(), String> {
    let keys = set.keys();
    let edges = set.edges();
    let manifests = set.manifests(Bin::Evol);
    match (build_schedule(&manifests), oracle::least_order(&keys, &edges)) {
        (Ok(tree), Some(expected)) => {
            let got: Vec<String> = tree.bin(Bin::Evol).iter().map(|c| c.key()).collect();
            let want: Vec<String> = expected.iter().map(|&i| keys[i].clone()).collect();
            (got == want).then_some(()).ok_or(format!("order {got:?}, oracle {want:?}"))
        }
        (Err(FleshError::CycleDetected { routines, .. }), None) => {
            let idx: Vec<usize> = routines
                .iter()
                .map(|r| keys.iter().position(|k| k == r).ok_or(format!("unknown routine {r}")))
                .collect::<Result<_, _>>()?;
            if idx.is_empty() {
                return Err("empty cycle".into());
            }
            for w in 0..idx.len() {
                let (a, b) = (idx[w], idx[(w + 1) % idx.len()]);
                if !edges.contains(&(a, b)) {
                    return Err(format!("reported cycle {routines:?} has no edge {} -> {}", keys[a], keys[b]));
                }
            }
            Ok(())
        }
        (got, want) => Err(format!("build_schedule gave {got:?}, oracle {want:?}")),
    }
}


/// Activates and runs `src` to completion.
pub fn run(src: &str, partitions: Option<usize>, out: &Path) -> (SimulationState, thornflesh::ExitReport) {
    let mut s = start(src, partitions, out);
    let r = thornflesh::main_loop(&mut s, &mut thornflesh::NoHook).unwrap_or_else(|f| panic!("{f}"));
    (s, r)
}

/// Resumes `src` from a checkpoint file and runs it to completion.
pub fn resume(src: &str, checkpoint: &Path, partitions: Option<usize>, out: &Path) -> (SimulationState, thornflesh::ExitReport) {
    let manifests = builtin_manifests().unwrap();
    let options = RunOptions {
        output_dir: out.to_path_buf(),
        partitions,
    };
    let mut s = thornflesh::io::restore_checkpoint(checkpoint, &builtin_library(), &manifests, &config(src), &options)
        .unwrap_or_else(|e| panic!("{e}"));
    let r = thornflesh::main_loop(&mut s, &mut thornflesh::NoHook).unwrap_or_else(|f| panic!("{f}"));
    (s, r)
}

/// Data rows of a reductions file keyed by iteration.
pub fn reduction_rows(text: &str) -> Vec<(u64, String)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| (l.split(' ').next().unwrap().parse().unwrap(), l.to_string()))
        .collect()
}

/// Iterations of the `# iteration <k> time <t>` block headers in an `.asc` file.
pub fn block_iterations(text: &str) -> Vec<u64> {
    text.lines()
        .filter_map(|l| l.strip_prefix("# iteration "))
        .map(|l| l.split(' ').next().unwrap().parse().unwrap())
        .collect()
}

const INJECT: &str = r#"
thorn Inject
implements inject
inherits driver
param int at "Iteration whose POSTSTEP writes a NaN into wavetoy::phi"
{ 1:* } default 1
param int index "Global index of the injected value"
{ 0:* } default 0
schedule Inject_NaN at POSTSTEP
{ } "Poison one grid point"
"#;

/// Builtin thorns plus Inject, which overwrites one value of `wavetoy::phi` with NaN
/// during the POSTSTEP of iteration `inject::at`.
pub fn nan_injector() -> (thornflesh::flesh::ThornLibrary, Vec<thornflesh::ThornManifest>) {
    let mut lib = builtin_library();
    lib.add_routine(
        "Inject",
        "Inject_NaN",
        thornflesh::flesh::Routine::global(|s| {
            if s.iteration == s.params.int("inject::at")? as u64 {
                let mut phi = s.gather("wavetoy::phi", 0)?;
                phi[s.params.int("inject::index")? as usize] = f64::NAN;
                s.scatter("wavetoy::phi", 0, &phi)?;
            }
            Ok(())
        }),
    );
    let mut manifests = builtin_manifests().unwrap();
    manifests.push(thornflesh::ccl::parse_manifest(INJECT).unwrap());
    (lib, manifests)
}

/// Runs WaveToy with NaNChecker set to terminate and a NaN injected at iteration `k`.
pub fn run_with_nan_at(k: u64, partitions: Option<usize>) -> Result<ExitReport, RunFailure> {
    let (lib, manifests) = nan_injector();
    let par = wave_par(20, "rk4", 0.01, 1.0).replace("WaveToy\"", "WaveToy NaNChecker Inject\"")
        + &format!(
            "nanchecker::check_vars = \"wavetoy::phi\"\nnanchecker::action = \"terminate\"\ninject::at = {k}\ninject::index = 7\n"
        );
    let options = RunOptions {
        output_dir: std::env::temp_dir(),
        partitions,
    };
    let mut s = activate(&lib, &manifests, &config(&par), &options).unwrap();
    main_loop(&mut s, &mut NoHook)
}

/// Every `.asc` file directly under `dir`, by file name.
pub fn asc_files(dir: &Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "asc"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}
