//! Client side of the newline-delimited JSON model protocol.
//!
//! One request per line on the adapter's stdin:
//!
//! ```text
//! {"id":1,"instances":[[0.1,0.4],[0.5,0.5]]}
//! ```
//!
//! and one response per line on its stdout, carrying the same id and one
//! finite prediction per instance:
//!
//! ```text
//! {"id":1,"predictions":[0.6,1.5]}
//! ```
//!
//! An adapter may answer `{"id":1,"error":"..."}` for a request it cannot
//! serve. The process is spawned on first use and reused; requests to one
//! adapter are serialized. A request that is not answered within the timeout
//! kills the process, and the next request starts a fresh one.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender};
use std::sync::{Mutex, PoisonError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

fn default_timeout() -> u64 {
    DEFAULT_TIMEOUT_MS
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalModelSpec {
    pub command: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
}

impl ExternalModelSpec {
    pub fn new(command: impl Into<String>, args: Vec<String>) -> Self {
        Self {
            command: command.into(),
            args,
            timeout_ms: DEFAULT_TIMEOUT_MS,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("cannot start adapter `{command}`: {source}")]
    Spawn {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("adapter did not answer within {0} ms")]
    Timeout(u64),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("adapter reported: {0}")]
    Adapter(String),
    #[error("adapter exited with {0}")]
    NonZeroExit(String),
    #[error("adapter i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    instances: &'a [Vec<f64>],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Response {
    id: u64,
    #[serde(default)]
    predictions: Option<Vec<f64>>,
    #[serde(default)]
    error: Option<String>,
}

/// Encodes one request line, without the trailing newline.
pub fn encode_request(id: u64, instances: &[Vec<f64>]) -> String {
    serde_json::to_string(&Request { id, instances }).expect("request serialization cannot fail")
}

/// Decodes one response line and checks it against the request.
pub fn decode_response(line: &str, id: u64, expected: usize) -> Result<Vec<f64>, ExternalError> {
    let resp: Response = serde_json::from_str(line.trim_end())
        .map_err(|e| ExternalError::Protocol(format!("malformed response `{}`: {e}", line.trim_end())))?;
    if resp.id != id {
        return Err(ExternalError::Protocol(format!(
            "response id {} does not match request id {id}",
            resp.id
        )));
    }
    match (resp.predictions, resp.error) {
        (_, Some(msg)) => Err(ExternalError::Adapter(msg)),
        (Some(p), None) => {
            if p.len() != expected {
                return Err(ExternalError::Protocol(format!(
                    "{} predictions for {expected} instances",
                    p.len()
                )));
            }
            if let Some(i) = p.iter().position(|v| !v.is_finite()) {
                return Err(ExternalError::Protocol(format!("prediction {i} is not finite")));
            }
            Ok(p)
        }
        (None, None) => Err(ExternalError::Protocol(
            "response has neither `predictions` nor `error`".into(),
        )),
    }
}

struct Adapter {
    child: Child,
    requests: Option<Sender<String>>,
    responses: Receiver<std::io::Result<String>>,
}

impl Adapter {
    fn spawn(spec: &ExternalModelSpec) -> Result<Self, ExternalError> {
        let mut child = Command::new(&spec.command)
            .args(&spec.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| ExternalError::Spawn {
                command: spec.command.clone(),
                source,
            })?;
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let stdout = child.stdout.take().expect("stdout is piped");

        // Writes and reads happen on their own threads so a stalled adapter
        // can always be abandoned through the response timeout.
        let (req_tx, req_rx) = mpsc::channel::<String>();
        thread::spawn(move || {
            for line in req_rx {
                if stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush()).is_err() {
                    break;
                }
            }
        });
        let (resp_tx, resp_rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let failed = line.is_err();
                if resp_tx.send(line).is_err() || failed {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            requests: Some(req_tx),
            responses: resp_rx,
        })
    }

    fn call(&mut self, id: u64, batch: &[Vec<f64>], timeout: Duration) -> Result<Vec<f64>, ExternalError> {
        let mut line = encode_request(id, batch);
        line.push('\n');
        let sent = self.requests.as_ref().is_some_and(|tx| tx.send(line).is_ok());
        if !sent {
            return Err(self.exit_error());
        }
        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            match self.responses.recv_timeout(remaining) {
                Ok(Ok(resp)) if resp.trim().is_empty() => continue,
                Ok(Ok(resp)) => return decode_response(&resp, id, batch.len()),
                Ok(Err(e)) => return Err(ExternalError::Io(e)),
                Err(RecvTimeoutError::Timeout) => {
                    let _ = self.child.kill();
                    let _ = self.child.wait();
                    return Err(ExternalError::Timeout(timeout.as_millis() as u64));
                }
                Err(RecvTimeoutError::Disconnected) => return Err(self.exit_error()),
            }
        }
    }

    fn exit_error(&mut self) -> ExternalError {
        match self.child.wait() {
            Ok(status) if !status.success() => ExternalError::NonZeroExit(status.to_string()),
            Ok(_) => ExternalError::Protocol("adapter closed its output before answering".into()),
            Err(e) => ExternalError::Io(e),
        }
    }
}

impl Drop for Adapter {
    fn drop(&mut self) {
        // Closing stdin asks the adapter to exit; give it a moment, then kill.
        self.requests.take();
        let deadline = Instant::now() + Duration::from_millis(200);
        while Instant::now() < deadline {
            if let Ok(Some(_)) = self.child.try_wait() {
                return;
            }
            thread::sleep(Duration::from_millis(5));
        }
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

struct State {
    adapter: Option<Adapter>,
    next_id: u64,
}

/// A model served by an adapter process.
pub struct ExternalModel {
    spec: ExternalModelSpec,
    state: Mutex<State>,
}

impl std::fmt::Debug for ExternalModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalModel")
            .field("spec", &self.spec)
            .finish_non_exhaustive()
    }
}

impl ExternalModel {
    pub fn new(spec: ExternalModelSpec) -> Self {
        Self {
            spec,
            state: Mutex::new(State {
                adapter: None,
                next_id: 1,
            }),
        }
    }

    pub fn spec(&self) -> &ExternalModelSpec {
        &self.spec
    }

    /// Sends one request with `batch` (each row holds the model's inputs in
    /// its declared order) and waits for the matching response.
    pub fn predict(&self, batch: &[Vec<f64>]) -> Result<Vec<f64>, ExternalError> {
        if batch.is_empty() {
            return Ok(Vec::new());
        }
        let mut state = self.state.lock().unwrap_or_else(PoisonError::into_inner);
        if state.adapter.is_none() {
            state.adapter = Some(Adapter::spawn(&self.spec)?);
        }
        let id = state.next_id;
        state.next_id += 1;
        let timeout = Duration::from_millis(self.spec.timeout_ms);
        let result = state
            .adapter
            .as_mut()
            .expect("adapter was just started")
            .call(id, batch, timeout);
        if matches!(&result, Err(e) if !matches!(e, ExternalError::Adapter(_))) {
            state.adapter = None;
        }
        result
    }
}

/// Predicts with a one-off adapter process, closing it afterwards.
pub fn external_predict(spec: &ExternalModelSpec, batch: &[Vec<f64>]) -> Result<Vec<f64>, ExternalError> {
    ExternalModel::new(spec.clone()).predict(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_encoding_is_compact() {
        assert_eq!(
            encode_request(7, &[vec![0.1, 0.4], vec![1.0, -2.5]]),
            r#"{"id":7,"instances":[[0.1,0.4],[1.0,-2.5]]}"#
        );
    }

    #[test]
    fn response_checks() {
        assert_eq!(
            decode_response(r#"{"id":3,"predictions":[0.6,320]}"#, 3, 2).unwrap(),
            vec![0.6, 320.0]
        );
        assert!(matches!(
            decode_response(r#"{"id":4,"predictions":[1]}"#, 3, 1),
            Err(ExternalError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(r#"{"id":3,"predictions":[1]}"#, 3, 2),
            Err(ExternalError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(r#"{"id":3,"predictions":[NaN]}"#, 3, 1),
            Err(ExternalError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(r#"{"id":3,"predictions":[null]}"#, 3, 1),
            Err(ExternalError::Protocol(_))
        ));
        assert!(matches!(
            decode_response("not json", 3, 1),
            Err(ExternalError::Protocol(_))
        ));
        assert!(matches!(
            decode_response(r#"{"id":3,"error":"boom"}"#, 3, 1),
            Err(ExternalError::Adapter(m)) if m == "boom"
        ));
    }

    #[test]
    fn missing_command_fails_to_spawn() {
        let spec = ExternalModelSpec::new("/nonexistent/adapter-binary", vec![]);
        assert!(matches!(
            external_predict(&spec, &[vec![1.0]]),
            Err(ExternalError::Spawn { .. })
        ));
    }
}
