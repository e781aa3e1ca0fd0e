//! HTTP front end under `/api/v1`. Reads are served from the latest boundary snapshot;
//! writes become queued commands answered once the main loop has applied them.

use super::snapshot::SliceError;
use super::{SteerChannel, SteerCommand, SteerFailure};
use crate::flesh::FleshError;
use serde_json::{json, Value};
use std::sync::Arc;
use std::thread::JoinHandle;
use tiny_http::{Header, Method, Request, Response, Server};

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error("PortInUse: cannot listen on port {port}: {reason}")]
    PortInUse { port: u16, reason: String },
}

pub struct SteerServer {
    server: Arc<Server>,
    channel: SteerChannel,
    accept: Option<JoinHandle<()>>,
    port: u16,
}

impl SteerServer {
    pub fn port(&self) -> u16 {
        self.port
    }

    /// Answers queued commands, stops accepting connections and joins the accept thread.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        self.channel.close();
        self.server.unblock();
        if let Some(h) = self.accept.take() {
            let _ = h.join();
        }
    }
}

impl Drop for SteerServer {
    fn drop(&mut self) {
        self.stop();
    }
}

/// Listens on `127.0.0.1:port` (0 picks a free port).
pub fn serve(channel: SteerChannel, port: u16) -> Result<SteerServer, ServeError> {
    let server = Server::http(("127.0.0.1", port)).map_err(|e| ServeError::PortInUse {
        port,
        reason: e.to_string(),
    })?;
    let port = server.server_addr().to_ip().map_or(port, |a| a.port());
    let server = Arc::new(server);
    let accept = {
        let server = server.clone();
        let channel = channel.clone();
        std::thread::spawn(move || {
            for request in server.incoming_requests() {
                let channel = channel.clone();
                std::thread::spawn(move || handle(request, &channel));
            }
        })
    };
    Ok(SteerServer {
        server,
        channel,
        accept: Some(accept),
        port,
    })
}

struct Reply {
    status: u16,
    body: Value,
}

fn ok(body: Value) -> Reply {
    Reply { status: 200, body }
}

fn error(status: u16, kind: &str, message: impl Into<String>, iteration: u64) -> Reply {
    Reply {
        status,
        body: json!({ "error": kind, "message": message.into(), "iteration": iteration }),
    }
}

fn handle(mut request: Request, channel: &SteerChannel) {
    let mut body = String::new();
    let reply = match request.as_reader().read_to_string(&mut body) {
        Ok(_) => route(request.method(), request.url(), &body, channel),
        Err(e) => error(400, "BadRequest", e.to_string(), channel.snapshot().iteration),
    };
    let text = serde_json::to_string(&reply.body).unwrap_or_else(|_| "{}".into());
    let header = Header::from_bytes("Content-Type", "application/json").unwrap();
    let response = Response::from_string(text)
        .with_status_code(reply.status)
        .with_header(header);
    let _ = request.respond(response);
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let Ok(b) = u8::from_str_radix(&s[i + 1..i + 3], 16) {
                out.push(b);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

fn route(method: &Method, url: &str, body: &str, channel: &SteerChannel) -> Reply {
    let snap = channel.snapshot();
    let it = snap.iteration;
    let (path, query) = url.split_once('?').unwrap_or((url, ""));
    let Some(rest) = path.strip_prefix("/api/v1/") else {
        return error(404, "NotFound", format!("no route {path}"), it);
    };
    let rest = percent_decode(rest);
    let segments: Vec<&str> = rest.splitn(2, '/').collect();
    match (method, segments.as_slice()) {
        (Method::Get, ["state"]) => {
            let mut v = serde_json::to_value(&*snap).unwrap_or(Value::Null);
            v["iteration"] = json!(it);
            ok(v)
        }
        (Method::Get, ["schedule"]) => {
            let locations: Vec<Value> = snap
                .schedule
                .iter()
                .map(|(loc, routines)| json!({ "location": loc, "routines": routines }))
                .collect();
            ok(json!({ "iteration": it, "schedule": locations }))
        }
        (Method::Get, ["params"]) => ok(json!({ "iteration": it, "params": snap.params })),
        (Method::Get, ["vars"]) => ok(json!({ "iteration": it, "variables": snap.variables })),
        (Method::Get, ["vars", name]) => slice(&snap, name, query),
        (Method::Patch, ["params", name]) => {
            let value = match serde_json::from_str::<Value>(body) {
                Ok(Value::Object(mut m)) if m.contains_key("value") => m.remove("value").unwrap(),
                _ => return error(400, "BadRequest", "body must be {\"value\": ...}", it),
            };
            command(
                channel,
                SteerCommand::SetParam {
                    name: name.to_string(),
                    value,
                },
            )
        }
        (Method::Post, ["control"]) => {
            let v: Value = match serde_json::from_str(body) {
                Ok(v) => v,
                Err(e) => return error(400, "BadRequest", e.to_string(), it),
            };
            let cmd = match v["action"].as_str() {
                Some("pause") => SteerCommand::Pause,
                Some("resume") => SteerCommand::Resume,
                Some("terminate") => SteerCommand::Terminate,
                Some("step") => match v.get("n").map(|n| n.as_u64()) {
                    None => SteerCommand::Step(1),
                    Some(Some(n)) if n >= 1 => SteerCommand::Step(n),
                    _ => return error(400, "BadRequest", "n must be an integer >= 1", it),
                },
                _ => return error(400, "BadRequest", "action must be pause, resume, terminate or step", it),
            };
            command(channel, cmd)
        }
        (_, ["state" | "schedule" | "params" | "vars" | "control"])
        | (_, ["params" | "vars", _]) => error(405, "MethodNotAllowed", format!("{method} {path}"), it),
        _ => error(404, "NotFound", format!("no route {path}"), it),
    }
}

fn slice(snap: &super::StateSnapshot, name: &str, query: &str) -> Reply {
    let it = snap.iteration;
    let mut axis = None;
    let mut fix = None;
    for pair in query.split('&').filter(|p| !p.is_empty()) {
        let (k, v) = pair.split_once('=').unwrap_or((pair, ""));
        let v = percent_decode(v);
        match k {
            "axis" => match v.parse::<usize>() {
                Ok(a) => axis = Some(a),
                Err(_) => return error(400, "BadSlice", format!("axis `{v}` is not an index"), it),
            },
            "fix" => {
                let parsed: Result<Vec<usize>, _> =
                    v.split(',').filter(|s| !s.is_empty()).map(str::parse).collect();
                match parsed {
                    Ok(f) => fix = Some(f),
                    Err(_) => return error(400, "BadSlice", format!("fix `{v}` is not an index list"), it),
                }
            }
            _ => {}
        }
    }
    match snap.slice(name, axis, fix.as_deref()) {
        Ok(p) => ok(serde_json::to_value(p).unwrap_or(Value::Null)),
        Err(e @ SliceError::UnknownVariable(_)) => error(404, "UnknownVariable", e.to_string(), it),
        Err(e @ SliceError::BadSlice(_)) => error(400, "BadSlice", e.to_string(), it),
    }
}

fn command(channel: &SteerChannel, cmd: SteerCommand) -> Reply {
    let rx = channel.submit(cmd);
    let Ok(outcome) = rx.recv() else {
        return error(503, "Finished", "the simulation has finished", channel.snapshot().iteration);
    };
    let it = outcome.iteration;
    match outcome.result {
        Ok(()) => ok(json!({
            "applied_at_iteration": it,
            "iteration": it,
            "control": outcome.control.name(),
        })),
        Err(SteerFailure::Finished) => error(503, "Finished", "the simulation has finished", it),
        Err(SteerFailure::Flesh(e)) => {
            let status = match &e {
                FleshError::NotSteerable { .. } => 409,
                FleshError::OutOfRange { .. } | FleshError::BadValue { .. } => 422,
                FleshError::UnknownParameter(_) => 404,
                _ => 400,
            };
            error(status, e.kind(), e.to_string(), it)
        }
    }
}
