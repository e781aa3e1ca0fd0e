//! `simrun`: load thorn manifests, parse a run configuration, activate, optionally serve
//! steering, run and report.

use clap::Parser;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;
use thornflesh::ccl::{parse_manifest, parse_run_config, validate_closure, ThornManifest};
use thornflesh::flesh::{active_manifests, bind_parameters, build_schedule, main_loop, ExitReport, NoHook};
use thornflesh::io::restore_checkpoint;
use thornflesh::steer::{serve, SteerChannel, SteerHook};
use thornflesh::thorns::{builtin_library, MANIFESTS};
use thornflesh::RunOptions;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub const THORN_PATH_ENV: &str = "SIMRUN_THORN_PATH";

#[derive(Debug, Parser)]
#[command(name = "simrun", version, about = "Run a thornflesh simulation")]
pub struct Args {
    /// Run configuration (.par)
    pub paramfile: PathBuf,
    /// Directory scanned for *.thorn manifests; may be repeated
    #[arg(long = "thorn-path", value_name = "DIR")]
    pub thorn_path: Vec<PathBuf>,
    /// Number of slab partitions (overrides driver::partitions)
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub partitions: Option<u64>,
    /// Serve the steering API on this port
    #[arg(long, value_name = "PORT")]
    pub serve: Option<u16>,
    /// Resume from a checkpoint file
    #[arg(long, value_name = "FILE")]
    pub recover: Option<PathBuf>,
    /// Print the schedule tree and exit
    #[arg(long)]
    pub dry_run: bool,
    /// Output directory
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

/// Manifest directories: flags first, then the environment.
pub fn search_path(flags: &[PathBuf], env: Option<OsString>) -> Vec<PathBuf> {
    let mut dirs = flags.to_vec();
    if let Some(e) = env {
        dirs.extend(std::env::split_paths(&e).filter(|p| !p.as_os_str().is_empty()));
    }
    dirs
}

/// Parses every `*.thorn` file in `dirs`, then the embedded manifests. The first manifest
/// seen for a thorn name wins.
pub fn discover(dirs: &[PathBuf]) -> Result<Vec<ThornManifest>, String> {
    let mut found: BTreeMap<String, ThornManifest> = BTreeMap::new();
    for dir in dirs {
        let entries = fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "thorn"))
            .collect();
        files.sort();
        for f in files {
            let src = fs::read_to_string(&f).map_err(|e| format!("{}: {e}", f.display()))?;
            let m = parse_manifest(&src).map_err(|e| format!("{}:{e}", f.display()))?;
            found.entry(m.thorn_name.clone()).or_insert(m);
        }
    }
    for (name, src) in MANIFESTS {
        if !found.contains_key(name) {
            let m = parse_manifest(src).map_err(|e| format!("<embedded {name}>:{e}"))?;
            found.insert(m.thorn_name.clone(), m);
        }
    }
    Ok(found.into_values().collect())
}

pub fn print_summary(out: &mut dyn Write, status: &str, r: &ExitReport) {
    let _ = writeln!(out, "simrun: {status}");
    let _ = writeln!(
        out,
        "  iterations {} (final iteration {}, time {})",
        r.iterations, r.iteration, r.time
    );
    let _ = writeln!(out, "  wall seconds {:.6}", r.wall_seconds);
    let _ = writeln!(out, "  timers");
    for bin in thornflesh::Bin::ALL {
        let t = r.timers.get(bin.name()).copied().unwrap_or_default();
        let _ = writeln!(out, "    {:<10} {:.6} s", bin.name(), t.as_secs_f64());
    }
    if r.checkpoint_failures > 0 {
        let _ = writeln!(out, "  checkpoint failures {}", r.checkpoint_failures);
    }
    for d in &r.diagnostics {
        let _ = writeln!(out, "  note: {d}");
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    let text = match fs::read_to_string(&args.paramfile) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(
                err,
                "simrun: cannot read parameter file `{}`: {e}\nusage: simrun <paramfile> [--thorn-path DIR]... [--partitions N] [--serve PORT] [--recover FILE] [--dry-run] [--out-dir DIR]",
                args.paramfile.display()
            );
            return EXIT_USAGE;
        }
    };
    let dirs = search_path(&args.thorn_path, std::env::var_os(THORN_PATH_ENV));
    let manifests = match discover(&dirs) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "simrun: {e}");
            return EXIT_INVALID;
        }
    };
    let config = match parse_run_config(&text) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "{}:{e}", args.paramfile.display());
            return EXIT_INVALID;
        }
    };
    let report = validate_closure(&manifests, &config);
    if !report.is_empty() {
        let _ = write!(err, "{report}");
        return EXIT_INVALID;
    }

    if args.dry_run {
        let active = match active_manifests(&manifests, &config) {
            Ok(a) => a,
            Err(e) => {
                let _ = writeln!(err, "simrun: {e}");
                return EXIT_INVALID;
            }
        };
        if let Err(e) = bind_parameters(&active, &config) {
            let _ = writeln!(err, "simrun: {e}");
            return EXIT_INVALID;
        }
        return match build_schedule(active.iter().copied()) {
            Ok(tree) => {
                let _ = write!(out, "{tree}");
                EXIT_OK
            }
            Err(e) => {
                let _ = writeln!(err, "simrun: {e}");
                EXIT_INVALID
            }
        };
    }

    let library = builtin_library();
    let options = RunOptions {
        output_dir: args.out_dir.clone(),
        partitions: args.partitions.map(|p| p as usize),
    };
    let state = match &args.recover {
        Some(path) => restore_checkpoint(path, &library, &manifests, &config, &options).map_err(|e| e.to_string()),
        None => thornflesh::activate(&library, &manifests, &config, &options).map_err(|e| e.to_string()),
    };
    let mut state = match state {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "simrun: {e}");
            return EXIT_INVALID;
        }
    };
    if let Err(e) = state.build_schedule() {
        let _ = writeln!(err, "simrun: {e}");
        return EXIT_INVALID;
    }
    if let Err(e) = fs::create_dir_all(&args.out_dir) {
        let _ = writeln!(err, "simrun: {}: {e}", args.out_dir.display());
        return EXIT_RUNTIME;
    }

    let result = match args.serve {
        Some(port) => {
            let channel = SteerChannel::new(&state);
            let server = match serve(channel.clone(), port) {
                Ok(s) => s,
                Err(e) => {
                    let _ = writeln!(err, "simrun: {e}");
                    return EXIT_RUNTIME;
                }
            };
            let _ = writeln!(err, "simrun: steering on http://127.0.0.1:{}/api/v1", server.port());
            let r = main_loop(&mut state, &mut SteerHook::new(channel));
            server.shutdown();
            r
        }
        None => main_loop(&mut state, &mut NoHook),
    };
    match result {
        Ok(r) => {
            print_summary(out, if r.terminated { "terminated" } else { "completed" }, &r);
            EXIT_OK
        }
        Err(f) => {
            let _ = writeln!(err, "simrun: {}", f.error);
            print_summary(out, "failed", &f.report);
            EXIT_RUNTIME
        }
    }
}

