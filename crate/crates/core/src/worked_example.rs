//! The two-variable example whose conflict is positive with probability .55.
//!
//! The joint is factored as `X -> Y`: `X` carries the row marginals and each
//! `P(Y | X)` row is the joint row divided by its marginal.

use serde::Serialize;

use crate::diagnostics::surprise_tail;
use crate::error::Result;
use crate::inference::EvidenceSession;
use crate::network::{Assignment, BayesNet, NodeModel, Variable};
use crate::report::{sig, sig_matrix};
use crate::straw::{conflict_cj, expected_conflict, independence_straw};

pub const JOINT: [[f64; 3]; 3] = [
    [0.1125, 0.11, 0.11],
    [0.1125, 0.11, 0.11],
    [0.11, 0.1125, 0.1125],
];

pub const X_PRIOR: [f64; 3] = [0.3325, 0.3325, 0.335];

/// Product-of-marginals table as printed, four decimals.
pub const PRINTED_PRODUCT: [[f64; 3]; 3] = [
    [0.1114, 0.1106, 0.1106],
    [0.1114, 0.1106, 0.1106],
    [0.1122, 0.1114, 0.1114],
];

/// Conflict table as printed. The `-0.0413` cells evaluate to `-0.0143`.
pub const PRINTED_CONFLICT: [[f64; 3]; 3] = [
    [-0.0413, 0.0073, 0.0073],
    [-0.0413, 0.0073, 0.0073],
    [0.0289, -0.0413, -0.0413],
];

pub const X_OUTCOMES: [&str; 3] = ["x1", "x2", "x3"];
pub const Y_OUTCOMES: [&str; 3] = ["y1", "y2", "y3"];

pub fn network() -> BayesNet {
    let rows = JOINT
        .iter()
        .zip(X_PRIOR)
        .map(|(row, px)| row.iter().map(|p| p / px).collect())
        .collect();
    BayesNet::build(
        vec![
            Variable::new("X", &X_OUTCOMES),
            Variable::new("Y", &Y_OUTCOMES),
        ],
        vec![
            NodeModel::root("X", X_PRIOR.to_vec()),
            NodeModel::new("Y", &["X"], rows),
        ],
    )
    .expect("example network is valid")
}

#[derive(Debug, Clone, Serialize)]
pub struct WorkedExampleReport {
    pub x_outcomes: Vec<String>,
    pub y_outcomes: Vec<String>,
    #[serde(serialize_with = "sig_matrix")]
    pub joint: Vec<Vec<f64>>,
    #[serde(serialize_with = "sig_matrix")]
    pub product_of_marginals: Vec<Vec<f64>>,
    #[serde(serialize_with = "sig_matrix")]
    pub conflict: Vec<Vec<f64>>,
    #[serde(serialize_with = "sig_matrix")]
    pub printed_conflict: Vec<Vec<f64>>,
    /// Cells where the evaluated conflict disagrees with the printed value.
    pub discrepancies: Vec<Discrepancy>,
    #[serde(serialize_with = "sig")]
    pub positive_conflict_probability: f64,
    #[serde(serialize_with = "sig")]
    pub expected_conflict: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub x: String,
    pub y: String,
    #[serde(serialize_with = "sig")]
    pub printed: f64,
    #[serde(serialize_with = "sig")]
    pub evaluated: f64,
}

/// Rebuilds the joint, product-of-marginals and conflict tables from the
/// network, plus the probability that conflict is positive.
pub fn reproduce() -> Result<WorkedExampleReport> {
    let net = network();
    let straw = independence_straw(&net, &["X", "Y"])?;
    let mut joint = vec![vec![0.0; 3]; 3];
    let mut product = vec![vec![0.0; 3]; 3];
    let mut conflict = vec![vec![0.0; 3]; 3];
    let mut discrepancies = Vec::new();
    for (x, xl) in X_OUTCOMES.iter().enumerate() {
        for (y, yl) in Y_OUTCOMES.iter().enumerate() {
            joint[x][y] =
                net.joint_probability(&Assignment::new().with("X", *xl).with("Y", *yl))?;
            product[x][y] = straw.probability_of_config(&[x, y]);
            let session = EvidenceSession::with_evidence(&net, [("X", *xl), ("Y", *yl)])?;
            conflict[x][y] = conflict_cj(&session)?;
            if (conflict[x][y] - PRINTED_CONFLICT[x][y]).abs() > 5e-4 {
                discrepancies.push(Discrepancy {
                    x: xl.to_string(),
                    y: yl.to_string(),
                    printed: PRINTED_CONFLICT[x][y],
                    evaluated: conflict[x][y],
                });
            }
        }
    }
    let tail = surprise_tail(&net, &straw, &["X", "Y"], 0.0)?;
    Ok(WorkedExampleReport {
        x_outcomes: X_OUTCOMES.iter().map(|s| s.to_string()).collect(),
        y_outcomes: Y_OUTCOMES.iter().map(|s| s.to_string()).collect(),
        joint,
        product_of_marginals: product,
        conflict,
        printed_conflict: PRINTED_CONFLICT.iter().map(|r| r.to_vec()).collect(),
        discrepancies,
        positive_conflict_probability: tail.pi_k,
        expected_conflict: expected_conflict(&net, &["X", "Y"])?,
    })
}
