//! Browser demo. The [`demo`] functions are plain Rust returning JSON
//! strings so they can be tested natively; the `#[wasm_bindgen]` exports
//! below only convert errors into JavaScript exceptions.

pub mod demo;

use wasm_bindgen::prelude::*;

/// Conflict tables for an editable two-variable joint (JSON array of rows).
#[wasm_bindgen]
pub fn conflict_table(joint_json: &str) -> Result<String, JsValue> {
    demo::conflict_table(joint_json).map_err(|e| JsValue::from_str(&e))
}

/// Exact surprise tail `pi_K` against `2^-K` for a seeded random network.
#[wasm_bindgen]
pub fn tail_curve(seed: u32, explicit_straw: bool, max_k: u32) -> Result<String, JsValue> {
    demo::tail_curve(u64::from(seed), explicit_straw, max_k).map_err(|e| JsValue::from_str(&e))
}

/// Conflict and rebuttal odds on the rare-disease network, item by item.
#[wasm_bindgen]
pub fn rebuttal_monitor(
    evidence_json: &str,
    prior_true: f64,
    straw_positive: f64,
) -> Result<String, JsValue> {
    demo::rebuttal_monitor(evidence_json, prior_true, straw_positive)
        .map_err(|e| JsValue::from_str(&e))
}
