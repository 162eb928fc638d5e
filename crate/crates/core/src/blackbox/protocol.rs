//! Newline-delimited JSON protocol for out-of-process models.
//!
//! ```text
//! -> {"id":0,"op":"meta"}
//! <- {"id":0,"feature_count":5}
//! -> {"id":1,"op":"predict","instances":[[0.1,0.2,...],...]}
//! <- {"id":1,"predictions":[0.7,...]}
//! ```
//!
//! One JSON document per line, UTF-8. A server that cannot satisfy a request
//! answers `{"id":n,"error":"..."}`.

use std::io::{BufRead, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::BlackBox;
use crate::error::{Result, ShapError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Request {
    Meta { id: u64 },
    Predict { id: u64, instances: Vec<Vec<f64>> },
}

impl Request {
    pub fn id(&self) -> u64 {
        match self {
            Request::Meta { id } | Request::Predict { id, .. } => *id,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaResponse {
    pub id: u64,
    pub feature_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictResponse {
    pub id: u64,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorResponse {
    pub id: Option<u64>,
    pub error: String,
}

const EXCERPT_LEN: usize = 160;

pub(crate) fn excerpt(s: &str) -> String {
    if s.len() <= EXCERPT_LEN {
        return s.to_string();
    }
    let mut end = EXCERPT_LEN;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    format!("{}...", &s[..end])
}

pub(crate) fn protocol_error(message: impl Into<String>, payload: &str) -> ShapError {
    ShapError::Protocol {
        message: message.into(),
        excerpt: excerpt(payload),
    }
}

/// Answer one request line. Returns `None` for blank lines.
pub fn handle_line(model: &dyn BlackBox, line: &str) -> Option<String> {
    let line = line.trim();
    if line.is_empty() {
        return None;
    }
    let reply = match serde_json::from_str::<Request>(line) {
        Ok(Request::Meta { id }) => serde_json::to_string(&MetaResponse {
            id,
            feature_count: model.feature_count(),
        }),
        Ok(Request::Predict { id, instances }) => match predict_instances(model, &instances) {
            Ok(predictions) => serde_json::to_string(&PredictResponse { id, predictions }),
            Err(e) => serde_json::to_string(&ErrorResponse {
                id: Some(id),
                error: e.to_string(),
            }),
        },
        Err(e) => {
            let id = serde_json::from_str::<serde_json::Value>(line)
                .ok()
                .and_then(|v| v.get("id").and_then(|i| i.as_u64()));
            serde_json::to_string(&ErrorResponse {
                id,
                error: format!("bad request: {e}"),
            })
        }
    };
    Some(reply.expect("responses always serialize"))
}

fn predict_instances(model: &dyn BlackBox, instances: &[Vec<f64>]) -> Result<Vec<f64>> {
    let width = model.feature_count();
    if let Some(bad) = instances.iter().find(|r| r.len() != width) {
        return Err(ShapError::Dimension {
            expected: width,
            actual: bad.len(),
        });
    }
    let flat: Vec<f64> = instances.iter().flatten().copied().collect();
    let batch = Array2::from_shape_vec((instances.len(), width), flat).expect("uniform rows");
    model.predict(batch.view())
}

/// Serve `model` until the input closes.
pub fn serve<R: BufRead, W: Write>(model: &dyn BlackBox, input: R, mut output: W) -> Result<()> {
    for line in input.lines() {
        let line = line?;
        if let Some(reply) = handle_line(model, &line) {
            writeln!(output, "{reply}")?;
            output.flush()?;
        }
    }
    Ok(())
}
