//! The JSON system file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::AgentId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDesc {
    pub agents: Vec<AgentId>,
    pub horizon: usize,
    /// Declared vocabulary; propositions that occur in states are added.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub propositions: Vec<String>,
    pub runs: Vec<RunDesc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub meta: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDesc {
    pub id: String,
    pub states: Vec<StateDesc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDesc {
    pub env: String,
    pub locals: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub props: Vec<String>,
}

impl SystemDesc {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system description serializes")
    }
}
