//! Computational steering: a command queue drained by the main loop at iteration boundaries,
//! a snapshot published at each boundary, and an HTTP front end.

mod server;
mod snapshot;

pub use server::{serve, ServeError, SteerServer};
pub use snapshot::{ParamInfo, ReductionInfo, SlicePayload, SliceError, StateSnapshot, VarInfo};

use crate::ccl::{ParamValue, RawValue};
use crate::flesh::{BoundaryHook, Control, FleshError, Phase, SimulationState};
use std::collections::VecDeque;
use std::sync::mpsc::{self, Receiver, Sender};
use std::sync::{Arc, Condvar, Mutex, RwLock};
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub enum SteerCommand {
    Pause,
    Resume,
    /// Run exactly `n` iterations, then pause again.
    Step(u64),
    Terminate,
    SetParam { name: String, value: serde_json::Value },
}

/// Result of one command, with the iteration at whose boundary it was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutcome {
    pub iteration: u64,
    pub control: Control,
    pub result: Result<(), SteerFailure>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SteerFailure {
    #[error(transparent)]
    Flesh(#[from] FleshError),
    #[error("the simulation has finished")]
    Finished,
}

struct Pending {
    command: SteerCommand,
    reply: Sender<CommandOutcome>,
}

#[derive(Default)]
struct Queue {
    pending: VecDeque<Pending>,
    closed: bool,
}

struct Inner {
    snapshot: RwLock<Arc<StateSnapshot>>,
    queue: Mutex<Queue>,
    wake: Condvar,
}

/// Shared between the simulation (sole consumer) and any number of request handlers.
#[derive(Clone)]
pub struct SteerChannel {
    inner: Arc<Inner>,
}

impl SteerChannel {
    pub fn new(state: &SimulationState) -> Self {
        SteerChannel {
            inner: Arc::new(Inner {
                snapshot: RwLock::new(Arc::new(StateSnapshot::capture(state))),
                queue: Mutex::new(Queue::default()),
                wake: Condvar::new(),
            }),
        }
    }

    /// Enqueues a command; the outcome arrives once the main loop reaches a boundary.
    pub fn submit(&self, command: SteerCommand) -> Receiver<CommandOutcome> {
        let (reply, rx) = mpsc::channel();
        let mut q = self.inner.queue.lock().unwrap();
        if q.closed {
            let snap = self.snapshot();
            let _ = reply.send(CommandOutcome {
                iteration: snap.iteration,
                control: Control::Terminating,
                result: Err(SteerFailure::Finished),
            });
        } else {
            q.pending.push_back(Pending { command, reply });
            self.inner.wake.notify_all();
        }
        rx
    }

    pub fn snapshot(&self) -> Arc<StateSnapshot> {
        self.inner.snapshot.read().unwrap().clone()
    }

    pub fn publish(&self, state: &SimulationState) {
        let snap = Arc::new(StateSnapshot::capture(state));
        *self.inner.snapshot.write().unwrap() = snap;
    }

    /// Refuses further commands and answers any still queued.
    pub fn close(&self) {
        let mut q = self.inner.queue.lock().unwrap();
        q.closed = true;
        let iteration = self.snapshot().iteration;
        for p in q.pending.drain(..) {
            let _ = p.reply.send(CommandOutcome {
                iteration,
                control: Control::Terminating,
                result: Err(SteerFailure::Finished),
            });
        }
    }

    fn take_pending(&self) -> Vec<Pending> {
        self.inner.queue.lock().unwrap().pending.drain(..).collect()
    }

    fn wait_for_commands(&self, timeout: Duration) {
        let q = self.inner.queue.lock().unwrap();
        if q.pending.is_empty() && !q.closed {
            let _ = self.inner.wake.wait_timeout(q, timeout).unwrap();
        }
    }
}

/// Applies one command to the state.
pub fn apply_command(state: &mut SimulationState, command: &SteerCommand) -> Result<(), FleshError> {
    match command {
        SteerCommand::Pause => {
            if state.control != Control::Terminating {
                state.control = Control::Paused;
                state.step_budget = None;
            }
        }
        SteerCommand::Resume => {
            if state.control != Control::Terminating {
                state.control = Control::Running;
                state.step_budget = None;
            }
        }
        SteerCommand::Step(n) => {
            if *n == 0 {
                return Err(FleshError::BadValue {
                    name: "step".into(),
                    reason: "n must be at least 1".into(),
                });
            }
            if state.control != Control::Terminating {
                state.control = Control::Running;
                state.step_budget = Some(*n);
            }
        }
        SteerCommand::Terminate => state.control = Control::Terminating,
        SteerCommand::SetParam { name, value } => set_from_json(state, name, value)?,
    }
    Ok(())
}

fn set_from_json(state: &mut SimulationState, name: &str, value: &serde_json::Value) -> Result<(), FleshError> {
    if !state.params.contains(name) {
        return Err(FleshError::UnknownParameter(name.to_string()));
    }
    let typed = match value {
        serde_json::Value::String(s) => {
            let raw = RawValue {
                text: s.clone(),
                quoted: true,
            };
            return state.params.set_text(name, &raw, Phase::Steering);
        }
        serde_json::Value::Bool(b) => ParamValue::Boolean(*b),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => ParamValue::Int(i),
            None => ParamValue::Real(n.as_f64().unwrap_or(f64::NAN)),
        },
        other => {
            return Err(FleshError::BadValue {
                name: name.to_string(),
                reason: format!("unsupported value {other}"),
            })
        }
    };
    state.set_parameter(name, typed, Phase::Steering)
}

/// Applies every queued command in arrival order and answers each request.
pub fn drain_commands(state: &mut SimulationState, channel: &SteerChannel) -> Vec<(SteerCommand, CommandOutcome)> {
    let mut applied = Vec::new();
    for p in channel.take_pending() {
        let result = apply_command(state, &p.command).map_err(SteerFailure::from);
        let outcome = CommandOutcome {
            iteration: state.iteration,
            control: state.control,
            result,
        };
        let _ = p.reply.send(outcome.clone());
        applied.push((p.command, outcome));
    }
    applied
}

/// Boundary hook that drains steering commands and publishes snapshots. While paused it keeps
/// serving commands without returning to the main loop.
pub struct SteerHook {
    channel: SteerChannel,
}

impl SteerHook {
    pub fn new(channel: SteerChannel) -> Self {
        SteerHook { channel }
    }
}

impl BoundaryHook for SteerHook {
    fn at_boundary(&mut self, state: &mut SimulationState, finished: bool) {
        loop {
            let applied = drain_commands(state, &self.channel);
            for (c, o) in &applied {
                log::info!("steering at iteration {}: {c:?} -> {:?}", o.iteration, o.result);
            }
            self.channel.publish(state);
            if finished || state.control != Control::Paused {
                break;
            }
            self.channel.wait_for_commands(Duration::from_millis(100));
        }
        if finished || state.control == Control::Terminating {
            self.channel.close();
        }
    }
}
