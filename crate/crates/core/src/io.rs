//! Instance files: exact, diffable JSON interchange.
//!
//! Numbers travel as strings — either `p/q` rationals or exact decimals —
//! so no floating point ever enters the interchange layer. Serialization is
//! canonical: agents in instance order, values in lowest terms, unit agent
//! lengths omitted. Parsing a serialized instance reproduces it bit for bit.

use serde::{Deserialize, Serialize};

use crate::coord::Coord;
use crate::model::{Instance, ModelError, Span};

/// Errors from reading an instance file.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IoError {
    #[error("instance file is not valid JSON: {0}")]
    Json(String),
    #[error("bad {field}: {source}")]
    Number {
        field: &'static str,
        source: crate::coord::CoordError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// On-disk form of one agent: left endpoint plus an optional length that
/// defaults to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentEntry {
    pub s: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<String>,
}

/// On-disk form of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub covering_length: String,
    pub agents: Vec<AgentEntry>,
}

/// Parses an instance from its file text. Exact: every number string becomes
/// the rational it denotes. Agents are re-sorted into canonical order.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| IoError::Json(e.to_string()))?;
    instance_from_file(&file)
}

/// Converts the parsed file structure into a validated instance.
pub fn instance_from_file(file: &InstanceFile) -> Result<Instance, IoError> {
    let covering_length: Coord =
        file.covering_length
            .parse()
            .map_err(|source| IoError::Number {
                field: "covering_length",
                source,
            })?;
    let mut spans = Vec::with_capacity(file.agents.len());
    for agent in &file.agents {
        let s: Coord = agent
            .s
            .parse()
            .map_err(|source| IoError::Number { field: "s", source })?;
        let length: Coord = match &agent.length {
            Some(text) => text.parse().map_err(|source| IoError::Number {
                field: "length",
                source,
            })?,
            None => Coord::one(),
        };
        spans.push(Span::new(s, length)?);
    }
    Ok(Instance::new(spans, covering_length)?)
}

/// The canonical file structure of an instance: agents in instance order,
/// numbers in lowest terms, unit lengths omitted.
pub fn to_instance_file(inst: &Instance) -> InstanceFile {
    InstanceFile {
        covering_length: inst.covering_length().to_string(),
        agents: inst
            .agents()
            .iter()
            .map(|a| AgentEntry {
                s: a.s().to_string(),
                length: if a.length() == Coord::one() {
                    None
                } else {
                    Some(a.length().to_string())
                },
            })
            .collect(),
    }
}

/// Canonical serialized text of an instance.
pub fn serialize_instance(inst: &Instance) -> String {
    serde_json::to_string_pretty(&to_instance_file(inst)).expect("instance files serialize")
}

/// Stable 64-bit FNV-1a digest of the canonical serialization, rendered as
/// 16 hex digits. Identifies instances in reports.
pub fn instance_digest(inst: &Instance) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in serialize_instance(inst).as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    format!("{hash:016x}")
}
