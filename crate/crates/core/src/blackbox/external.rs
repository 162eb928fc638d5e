use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use ndarray::ArrayView2;
use serde::Serialize;

use super::protocol::{protocol_error, ErrorResponse, MetaResponse, PredictResponse};
use super::BlackBox;
use crate::error::{Result, ShapError};

/// A model living in a child process that speaks the line protocol in
/// [`super::protocol`]. Concurrent callers are serialized over one pipe.
pub struct ExternalModel {
    transport: Mutex<Transport>,
    feature_count: usize,
    timeout: Duration,
}

impl std::fmt::Debug for ExternalModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExternalModel")
            .field("feature_count", &self.feature_count)
            .field("timeout", &self.timeout)
            .finish_non_exhaustive()
    }
}

struct Transport {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    broken: Option<String>,
}

#[derive(Serialize)]
struct PredictRequest<'a> {
    id: u64,
    op: &'static str,
    instances: Rows<'a>,
}

struct Rows<'a>(ArrayView2<'a, f64>);

impl Serialize for Rows<'_> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.0.nrows()))?;
        for r in self.0.rows() {
            match r.as_slice() {
                Some(sl) => seq.serialize_element(sl)?,
                None => seq.serialize_element(&r.to_vec())?,
            }
        }
        seq.end()
    }
}

impl ExternalModel {
    pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

    /// Spawn `command` with piped stdio and perform the `meta` handshake.
    pub fn spawn(mut command: Command, timeout: Duration) -> Result<Self> {
        command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit());
        let mut child = command
            .spawn()
            .map_err(|e| ShapError::Transport(format!("failed to start model process: {e}")))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        let mut transport = Transport {
            child,
            stdin,
            lines: rx,
            next_id: 0,
            broken: None,
        };
        let reply = transport.exchange(r#"{"id":0,"op":"meta"}"#, 0, timeout)?;
        let meta: MetaResponse =
            serde_json::from_str(&reply).map_err(|e| protocol_error(format!("bad meta response: {e}"), &reply))?;
        if meta.feature_count == 0 {
            return Err(protocol_error("model reports zero features", &reply));
        }
        transport.next_id = 1;
        Ok(Self {
            transport: Mutex::new(transport),
            feature_count: meta.feature_count,
            timeout,
        })
    }

    /// Convenience wrapper: split a shell-like command line into program and args.
    pub fn spawn_command_line(program: &str, args: &[String], timeout: Duration) -> Result<Self> {
        let mut cmd = Command::new(program);
        cmd.args(args);
        Self::spawn(cmd, timeout)
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }
}

impl Transport {
    fn exchange(&mut self, request: &str, id: u64, timeout: Duration) -> Result<String> {
        if let Some(reason) = &self.broken {
            return Err(ShapError::Transport(format!("transport unusable: {reason}")));
        }
        let result = self.exchange_inner(request, id, timeout);
        if let Err(e) = &result {
            // The stream position is unknown after any failure here.
            self.broken = Some(e.to_string());
        }
        let line = result?;
        if line.contains("\"error\"") {
            if let Ok(err) = serde_json::from_str::<ErrorResponse>(&line) {
                return Err(protocol_error(format!("model reported: {}", err.error), &line));
            }
        }
        Ok(line)
    }

    fn exchange_inner(&mut self, request: &str, id: u64, timeout: Duration) -> Result<String> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| ShapError::Transport("model stdin closed".into()))?;
        stdin
            .write_all(request.as_bytes())
            .and_then(|_| stdin.write_all(b"\n"))
            .and_then(|_| stdin.flush())
            .map_err(|e| ShapError::Transport(format!("write to model process failed: {e}")))?;

        let deadline = Instant::now() + timeout;
        let remaining = deadline.saturating_duration_since(Instant::now());
        let line = match self.lines.recv_timeout(remaining) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => return Err(ShapError::Transport(format!("read from model process failed: {e}"))),
            Err(RecvTimeoutError::Timeout) => {
                return Err(ShapError::Transport(format!(
                    "no response within {:.3}s",
                    timeout.as_secs_f64()
                )))
            }
            Err(RecvTimeoutError::Disconnected) => {
                let status = self
                    .child
                    .try_wait()
                    .ok()
                    .flatten()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|| "output closed".into());
                return Err(ShapError::Transport(format!("model process exited ({status})")));
            }
        };

        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| protocol_error(format!("response is not JSON: {e}"), &line))?;
        match value.get("id").and_then(|v| v.as_u64()) {
            Some(got) if got == id => {}
            Some(got) => {
                return Err(protocol_error(
                    format!("response id {got} does not match request id {id}"),
                    &line,
                ))
            }
            None => return Err(protocol_error("response has no id", &line)),
        }
        Ok(line)
    }
}

impl BlackBox for ExternalModel {
    fn feature_count(&self) -> usize {
        self.feature_count
    }

    fn predict_rows(&self, rows: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(ShapError::Domain(
                "non-finite feature values cannot be sent over the wire protocol".into(),
            ));
        }
        let mut t = self.transport.lock().unwrap_or_else(|p| p.into_inner());
        let id = t.next_id;
        t.next_id += 1;
        let request = serde_json::to_string(&PredictRequest {
            id,
            op: "predict",
            instances: Rows(rows),
        })?;
        let line = t.exchange(&request, id, self.timeout)?;
        let resp: PredictResponse =
            serde_json::from_str(&line).map_err(|e| protocol_error(format!("bad predict response: {e}"), &line))?;
        if resp.predictions.len() != rows.nrows() {
            return Err(protocol_error(
                format!("expected {} predictions, got {}", rows.nrows(), resp.predictions.len()),
                &line,
            ));
        }
        Ok(resp.predictions)
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        let t = self.transport.get_mut().unwrap_or_else(|p| p.into_inner());
        drop(t.stdin.take());
        let _ = t.child.kill();
        let _ = t.child.wait();
    }
}
