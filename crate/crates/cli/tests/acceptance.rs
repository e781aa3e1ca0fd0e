//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any criterion fails.

#[path = "../../core/tests/support/mod.rs"]
mod support;

use proptest::test_runner::{Config, TestRunner};
use std::cell::Cell;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};
use support::steer::{http, Steered};
use support::{asc_files, block_iterations, oracle, reduction_rows, resume, run, wave_par};
use tempfile::tempdir;
use thornflesh::ccl::{parse_manifest, print_manifest};
use thornflesh::steer::SteerCommand;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn scheduler_oracle() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let cycles = Cell::new(0);
    let cases = Cell::new(0);
    let result = runner.run(&support::gen::constraint_set(), |set| {
        cases.set(cases.get() + 1);
        if oracle::least_order(&set.keys(), &set.edges()).is_none() {
            cycles.set(cycles.get() + 1);
        }
        support::agrees_with_oracle(&set).map_err(proptest::test_runner::TestCaseError::fail)
    });
    result.map_err(|e| e.to_string())?;
    let (cases, cycles) = (cases.get(), cycles.get());
    ensure!(cases >= 200, "only {cases} cases ran");
    Ok(format!("{cases} cases, {cycles} cyclic"))
}

/// RMS error at t = 1 against the exact solution of the spatially discretised system.
fn wave_error(method: &str, n: usize) -> Result<f64, String> {
    let h = 1.0 / n as f64;
    let par = wave_par(n, method, h / 2.0, 1.0) + if method == "icn" { "mol::icn_iterations = 3\n" } else { "" };
    let out = tempdir().map_err(|e| e.to_string())?;
    let (s, r) = run(&par, None, out.path());
    ensure!(r.iteration == 2 * n as u64, "{method} n={n}: {} iterations", r.iteration);
    let phi = s.gather("wavetoy::phi", 0).map_err(|e| e.to_string())?;
    let exact: Vec<f64> = (0..n)
        .map(|i| oracle::semi_discrete_phi(1.0, 1.0, h, i as f64 * h, s.time))
        .collect();
    Ok(oracle::rms_error(&phi, &exact))
}

fn convergence() -> Outcome {
    let mut detail = Vec::new();
    let mut failures = Vec::new();
    for (method, floor) in [("rk4", 3.8), ("rk2", 1.8), ("icn", 1.8)] {
        let errors = [50, 100, 200].map(|n| wave_error(method, n));
        let errors: Vec<f64> = errors.into_iter().collect::<Result<_, _>>()?;
        let orders = oracle::observed_orders(&errors);
        detail.push(format!("{method} {:.3}/{:.3}", orders[0], orders[1]));
        if orders.iter().any(|&p| !(p >= floor)) {
            failures.push(format!("{method} orders {orders:?} below {floor} (errors {errors:?})"));
        }
    }
    ensure!(failures.is_empty(), "{} [all: {}]", failures.join("; "), detail.join(", "));
    Ok(detail.join(", "))
}

fn simrun(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_simrun"))
        .args(args)
        .env_remove("SIMRUN_THORN_PATH")
        .env("RUST_LOG", "off")
        .output()
        .map_err(|e| e.to_string())
}

fn partition_transparency() -> Outcome {
    let par = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../par/wave_standing.par");
    let dir = tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for p in ["1", "2", "4"] {
        let out = dir.path().join(p);
        let o = simrun(&[par.to_str().unwrap(), "--partitions", p, "--out-dir", out.to_str().unwrap()])?;
        ensure!(o.status.success(), "--partitions {p} exited {:?}", o.status.code());
        outputs.push(asc_files(&out));
    }
    ensure!(!outputs[0].is_empty(), "no .asc files written");
    for (i, p) in [(1, 2), (2, 4)] {
        ensure!(outputs[0] == outputs[i], "--partitions {p} differs from --partitions 1");
    }
    Ok(format!("{} files identical across 1/2/4 partitions", outputs[0].len()))
}

fn ckpt_par(t_final: f64) -> String {
    wave_par(32, "rk4", 0.01, t_final).replace("WaveToy\"", "WaveToy IOASCII Checkpoint\"")
        + "io_ascii::reduce_vars = \"wavetoy::*\"\nio_ascii::reduce_kinds = \"sum min max norm2 norm_inf\"\ncheckpoint::every = 10\n"
}

fn checkpoints(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir.join("checkpoints"))
        .map(|d| d.map(|e| e.unwrap().path()).collect::<Vec<_>>())
        .unwrap_or_default()
        .into_iter()
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn checkpoint_exactness() -> Outcome {
    let full = tempdir().map_err(|e| e.to_string())?;
    run(&ckpt_par(1.0), Some(2), full.path());
    let reference = fs::read_to_string(full.path().join("reductions.asc")).map_err(|e| e.to_string())?;
    let tail: Vec<_> = reduction_rows(&reference).into_iter().filter(|(it, _)| *it > 50).collect();
    ensure!(tail.len() == 50, "reference has {} rows after iteration 50", tail.len());
    let late: Vec<_> = checkpoints(full.path()).into_iter().filter(|(n, _)| n.as_str() > "checkpoint.it0000000050.ckpt").collect();
    ensure!(late.len() == 5, "reference wrote {} checkpoints after 50", late.len());

    for (first, second) in [(2, 2), (2, 3), (1, 4)] {
        let half = tempdir().map_err(|e| e.to_string())?;
        let (_, r) = run(&ckpt_par(0.5), Some(first), half.path());
        ensure!(r.iteration == 50, "first half stopped at {}", r.iteration);
        let file = half.path().join("checkpoints/checkpoint.it0000000050.ckpt");
        let resumed = tempdir().map_err(|e| e.to_string())?;
        let (_, r) = resume(&ckpt_par(1.0), &file, Some(second), resumed.path());
        ensure!(r.iteration == 100 && r.iterations == 50, "resumed run ended at {}", r.iteration);
        let text = fs::read_to_string(resumed.path().join("reductions.asc")).map_err(|e| e.to_string())?;
        ensure!(reduction_rows(&text) == tail, "{first}->{second} partitions: reductions tail differs");
        ensure!(checkpoints(resumed.path()) == late, "{first}->{second} partitions: re-written checkpoints differ");
    }
    Ok("50 rows and 5 checkpoints identical for 2->2, 2->3, 1->4 partitions".into())
}

fn wait_paused(sim: &Steered, iteration: u64) {
    sim.paused_at(iteration);
}

fn io_decoupling() -> Outcome {
    let base = wave_par(24, "rk4", 0.01, 0.3).replace("WaveToy\"", "WaveToy IOASCII\"")
        + "io_ascii::reduce_vars = \"wavetoy::phi wavetoy::pi\"\nio_ascii::reduce_kinds = \"sum norm2\"\n";
    let steered = base.clone() + "io_ascii::out_vars = \"wavetoy::phi\"\nio_ascii::out_every = 10\n";
    let reference = base.clone() + "io_ascii::out_vars = \"wavetoy::phi wavetoy::pi\"\nio_ascii::out_every = 5\n";

    let (plain, live) = (tempdir().map_err(|e| e.to_string())?, tempdir().map_err(|e| e.to_string())?);
    run(&reference, Some(2), plain.path());
    let sim = Steered::builtin(&steered, Some(2), live.path(), true);
    wait_paused(&sim, 0);
    sim.command(SteerCommand::Step(10));
    wait_paused(&sim, 10);
    let port = sim.port();
    for (name, value) in [("out_vars", r#""wavetoy::pi""#), ("out_every", "5")] {
        let (status, body) = http(port, "PATCH", &format!("/api/v1/params/io_ascii::{name}"), Some(&format!("{{\"value\": {value}}}")));
        ensure!(status == 200, "PATCH {name}: {status} {body}");
    }
    sim.command(SteerCommand::Resume);
    sim.join().1.map_err(|e| e.to_string())?;

    let read = |d: &Path, f: &str| fs::read_to_string(d.join(f)).unwrap_or_default();
    let phi = block_iterations(&read(live.path(), "wavetoy__phi.asc"));
    let pi = block_iterations(&read(live.path(), "wavetoy__pi.asc"));
    ensure!(phi == [0, 10] && pi == [15, 20, 25, 30], "phi blocks {phi:?}, pi blocks {pi:?}");
    let blocks = |t: String| -> Vec<String> { t.split("\n\n").map(str::to_string).collect() };
    let ref_pi = blocks(read(plain.path(), "wavetoy__pi.asc"));
    let live_pi = blocks(read(live.path(), "wavetoy__pi.asc"));
    ensure!(ref_pi[3..] == live_pi[..], "steered pi blocks differ from an unsteered run");
    ensure!(
        read(plain.path(), "reductions.asc") == read(live.path(), "reductions.asc"),
        "reductions differ from an unsteered run"
    );
    let wavetoy = include_str!("../../core/src/thorns/wavetoy.rs");
    ensure!(!wavetoy.contains("io_ascii") && !wavetoy.contains("crate::io"), "WaveToy refers to output code");

    let (off, on) = (tempdir().map_err(|e| e.to_string())?, tempdir().map_err(|e| e.to_string())?);
    run(&reference, Some(3), off.path());
    let sim = Steered::builtin(&reference, Some(3), on.path(), false);
    sim.join().1.map_err(|e| e.to_string())?;
    let (a, b) = (asc_files(off.path()), asc_files(on.path()));
    ensure!(a.len() == 3 && a == b, "server-on run differs from server-off run");
    Ok("steered out_vars/out_every took effect; idle server run identical".into())
}

fn steering_session() -> Outcome {
    let out = tempdir().map_err(|e| e.to_string())?;
    let par = wave_par(32, "rk4", 0.001, 1.0e6).replace("WaveToy\"", "WaveToy IOASCII\"");
    let sim = Steered::builtin(&par, Some(2), out.path(), false);
    let port = sim.port();
    std::thread::sleep(Duration::from_millis(50));
    let (status, body) = http(port, "POST", "/api/v1/control", Some(r#"{"action": "pause"}"#));
    ensure!(status == 200 && body["control"] == "paused", "pause: {status} {body}");
    let k = body["applied_at_iteration"].as_u64().unwrap_or(u64::MAX);
    let mut seen = Vec::new();
    for i in 0..3 {
        if i > 0 {
            std::thread::sleep(Duration::from_secs(1));
        }
        let (status, body) = http(port, "GET", "/api/v1/state", None);
        ensure!(status == 200, "GET state: {status}");
        seen.push(body["iteration"].as_u64());
    }
    ensure!(seen == vec![Some(k); 3], "iteration moved while paused: {seen:?} (paused at {k})");
    let (status, body) = http(port, "PATCH", "/api/v1/params/io_ascii::out_every", Some(r#"{"value": 4}"#));
    ensure!(status == 200 && body["applied_at_iteration"] == k, "set out_every: {status} {body}");
    let (status, body) = http(port, "PATCH", "/api/v1/params/wavetoy::amplitude", Some(r#"{"value": 3.0}"#));
    ensure!(status == 409 && body["error"] == "NotSteerable", "never-steerable: {status} {body}");
    let (status, body) = http(port, "PATCH", "/api/v1/params/mol::dt", Some(r#"{"value": -0.1}"#));
    ensure!(status == 422 && body["error"] == "OutOfRange", "out of range: {status} {body}");
    let (status, body) = http(port, "POST", "/api/v1/control", Some(r#"{"action": "step", "n": 5}"#));
    ensure!(status == 200, "step: {status} {body}");
    wait_paused(&sim, k + 5);
    let (status, body) = http(port, "POST", "/api/v1/control", Some(r#"{"action": "terminate"}"#));
    ensure!(status == 200 && body["control"] == "terminating", "terminate: {status} {body}");
    let (state, report) = sim.join();
    let report = report.map_err(|e| e.to_string())?;
    ensure!(report.terminated && report.iteration == k + 5, "run ended at {} (expected {})", report.iteration, k + 5);
    ensure!(state.params.int("io_ascii::out_every") == Ok(4), "out_every not applied");
    Ok(format!("paused at {k}, stepped to {}, 409/422 returned", k + 5))
}

fn nan_tripwire() -> Outcome {
    for (k, partitions) in [(1, None), (6, Some(2)), (13, Some(4))] {
        let r = support::run_with_nan_at(k, partitions).map_err(|e| e.to_string())?;
        ensure!(r.iteration == k && r.terminated, "NaN at {k}: run ended at {} (terminated {})", r.iteration, r.terminated);
        let report = r.diagnostics.iter().find(|d| d.contains("NaNChecker"));
        ensure!(
            report.is_some_and(|d| d.contains("wavetoy::phi") && d.contains("index 7")),
            "no report naming wavetoy::phi and index 7: {:?}",
            r.diagnostics
        );
    }
    Ok("runs stopped at iterations 1, 6, 13".into())
}

fn dsl_round_trip() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&support::gen::manifest(), |m| {
            let printed = print_manifest(&m);
            let parsed = parse_manifest(&printed).map_err(|e| proptest::test_runner::TestCaseError::fail(e.to_string()))?;
            proptest::prop_assert_eq!(&parsed, &m);
            proptest::prop_assert_eq!(print_manifest(&parsed), printed);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    ensure!(support::golden::shipped("WaveToy") == support::golden::wavetoy_expected(), "WaveToy golden differs");
    ensure!(support::golden::shipped("CartGrid") == support::golden::driver_expected(), "CartGrid golden differs");
    Ok("500 cases, WaveToy and CartGrid goldens".into())
}

fn main() {
    let criteria: [(&str, Option<Duration>, fn() -> Outcome); 8] = [
        ("scheduler oracle equivalence", Some(Duration::from_secs(5)), scheduler_oracle),
        ("convergence orders", Some(Duration::from_secs(30)), convergence),
        ("partition transparency", Some(Duration::from_secs(20)), partition_transparency),
        ("checkpoint exactness", None, checkpoint_exactness),
        ("I/O decoupling", None, io_decoupling),
        ("steering semantics", None, steering_session),
        ("NaNChecker tripwire", None, nan_tripwire),
        ("DSL round-trip", None, dsl_round_trip),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, budget) {
            (Ok(_), Some(b)) if elapsed > b => Err(format!("took {:.2}s, budget {}s", elapsed.as_secs_f64(), b.as_secs())),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{:.2}s]", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why} [{:.2}s]", elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
