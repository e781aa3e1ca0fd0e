//! A simulation running on its own thread behind a steering channel, and a small HTTP client.

use serde_json::Value;
use std::path::Path;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};
use thornflesh::flesh::{activate, main_loop, ExitReport, RunFailure, RunOptions, SimulationState, ThornLibrary};
use thornflesh::steer::{serve, StateSnapshot, SteerChannel, SteerCommand, SteerHook, SteerServer};
use thornflesh::ThornManifest;

pub type Outcome = (SimulationState, Result<ExitReport, RunFailure>);

pub struct Steered {
    pub channel: SteerChannel,
    pub server: Option<SteerServer>,
    handle: JoinHandle<Outcome>,
}

impl Steered {
    /// Starts `par` on a background thread. With `paused`, the run halts at iteration 0.
    pub fn launch(
        lib: ThornLibrary,
        manifests: Vec<ThornManifest>,
        par: &str,
        partitions: Option<usize>,
        out: &Path,
        paused: bool,
        with_server: bool,
    ) -> Steered {
        let options = RunOptions {
            output_dir: out.to_path_buf(),
            partitions,
        };
        let mut state = activate(&lib, &manifests, &super::config(par), &options).unwrap();
        let channel = SteerChannel::new(&state);
        let server = with_server.then(|| serve(channel.clone(), 0).unwrap());
        if paused {
            drop(channel.submit(SteerCommand::Pause));
        }
        let hook_channel = channel.clone();
        let handle = std::thread::spawn(move || {
            let r = main_loop(&mut state, &mut SteerHook::new(hook_channel));
            (state, r)
        });
        Steered { channel, server, handle }
    }

    pub fn builtin(par: &str, partitions: Option<usize>, out: &Path, paused: bool) -> Steered {
        let manifests = thornflesh::builtin_manifests().unwrap();
        Steered::launch(thornflesh::builtin_library(), manifests, par, partitions, out, paused, true)
    }

    pub fn port(&self) -> u16 {
        self.server.as_ref().expect("server enabled").port()
    }

    /// Sends a command and waits for the loop to apply it.
    pub fn command(&self, c: SteerCommand) -> thornflesh::steer::CommandOutcome {
        self.channel.submit(c).recv().unwrap()
    }

    /// Polls the published snapshot until `pred` holds.
    pub fn wait_until(&self, what: &str, pred: impl Fn(&StateSnapshot) -> bool) -> std::sync::Arc<StateSnapshot> {
        let deadline = Instant::now() + Duration::from_secs(30);
        loop {
            let snap = self.channel.snapshot();
            if pred(&snap) {
                return snap;
            }
            assert!(Instant::now() < deadline, "timed out waiting for {what}");
            std::thread::sleep(Duration::from_millis(2));
        }
    }

    pub fn paused_at(&self, iteration: u64) -> std::sync::Arc<StateSnapshot> {
        self.wait_until(&format!("pause at {iteration}"), |s| s.iteration == iteration && s.control == "paused")
    }

    pub fn join(mut self) -> Outcome {
        let outcome = self.handle.join().unwrap();
        if let Some(s) = self.server.take() {
            s.shutdown();
        }
        outcome
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(30)))
        .build()
        .new_agent()
}

/// Issues `method path` against the local steering server; returns status and JSON body.
pub fn http(port: u16, method: &str, path: &str, body: Option<&str>) -> (u16, Value) {
    let url = format!("http://127.0.0.1:{port}{path}");
    let a = agent();
    let r = match (method, body) {
        ("GET", _) => a.get(&url).call(),
        ("PATCH", b) => a.patch(&url).header("Content-Type", "application/json").send(b.unwrap_or("")),
        ("POST", b) => a.post(&url).header("Content-Type", "application/json").send(b.unwrap_or("")),
        ("PUT", b) => a.put(&url).send(b.unwrap_or("")),
        ("DELETE", _) => a.delete(&url).call(),
        _ => panic!("unsupported method {method}"),
    };
    let mut resp = r.unwrap_or_else(|e| panic!("{method} {path}: {e}"));
    let status = resp.status().as_u16();
    let text = resp.body_mut().read_to_string().unwrap();
    (status, serde_json::from_str(&text).unwrap_or(Value::String(text)))
}
