//! JSON file formats: network documents, evidence streams (JSON Lines)
//! and explicit straw tables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{BayesNet, NodeModel, Variable};
use crate::rebuttal::RebuttalSpec;
use crate::straw::{explicit_straw, StrawModel};

/// On-disk network: variables, node models and optional rebuttal
/// annotations. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDocument {
    pub variables: Vec<Variable>,
    pub nodes: Vec<NodeModel>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rebuttals: Vec<RebuttalSpec>,
}

impl NetworkDocument {
    /// Explicitly attached rebuttal variables are written as ordinary
    /// variables.
    pub fn from_network(net: &BayesNet) -> Self {
        NetworkDocument {
            variables: net.variables().to_vec(),
            nodes: net.node_models(),
            rebuttals: net.rebuttals().to_vec(),
        }
    }

    pub fn into_network(self) -> Result<BayesNet> {
        let net = BayesNet::build(self.variables, self.nodes)?;
        let rebuttals = self
            .rebuttals
            .iter()
            .map(|r| r.checked(&net))
            .collect::<Result<Vec<_>>>()?;
        net.with_rebuttals(rebuttals)
    }
}

pub fn parse_network(text: &str) -> Result<BayesNet> {
    let doc: NetworkDocument =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("network document: {e}")))?;
    doc.into_network()
}

pub fn network_to_json(net: &BayesNet) -> String {
    serde_json::to_string_pretty(&NetworkDocument::from_network(net))
        .expect("network documents always serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvidenceItem {
    pub variable: String,
    pub outcome: String,
}

/// One `{"variable", "outcome"}` object per line; blank lines are skipped.
pub fn parse_evidence_stream(text: &str) -> Result<Vec<EvidenceItem>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| Error::Format(format!("evidence line {}: {e}", i + 1)))
        })
        .collect()
}

/// Explicit straw document: `{"scope": [...], "table": [...]}` with the
/// table in scope-configuration order, last variable fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrawDocument {
    pub scope: Vec<String>,
    pub table: Vec<f64>,
}

pub fn parse_straw(net: &BayesNet, text: &str) -> Result<StrawModel> {
    let doc: StrawDocument =
        serde_json::from_str(text).map_err(|e| Error::Format(format!("straw document: {e}")))?;
    let scope: Vec<&str> = doc.scope.iter().map(String::as_str).collect();
    explicit_straw(net, &scope, doc.table)
}
