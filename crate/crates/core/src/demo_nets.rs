//! Small hand-built networks used by the CLI, the browser demo and tests.

use crate::network::{BayesNet, NodeModel, Variable};

/// A rare disease `D` (prior .001) with three symptoms, each present with
/// probability .95 under the disease and .05 otherwise, and a test `T`
/// that is positive with probability .99 under the disease and .01
/// otherwise.
pub fn disease_network() -> BayesNet {
    let symptom =
        |name: &str| NodeModel::new(name, &["D"], vec![vec![0.95, 0.05], vec![0.05, 0.95]]);
    BayesNet::build(
        vec![
            Variable::new("D", &["present", "absent"]),
            Variable::new("S1", &["present", "absent"]),
            Variable::new("S2", &["present", "absent"]),
            Variable::new("S3", &["present", "absent"]),
            Variable::new("T", &["pos", "neg"]),
        ],
        vec![
            NodeModel::root("D", vec![0.001, 0.999]),
            symptom("S1"),
            symptom("S2"),
            symptom("S3"),
            NodeModel::new("T", &["D"], vec![vec![0.99, 0.01], vec![0.01, 0.99]]),
        ],
    )
    .expect("disease network is valid")
}

/// Two near-deterministic readings of a fair hidden cause. Observing them
/// disagree gives a conflict of about 4.66 bits.
pub fn sensor_pair_network() -> BayesNet {
    let sensor =
        |name: &str| NodeModel::new(name, &["H"], vec![vec![0.99, 0.01], vec![0.01, 0.99]]);
    BayesNet::build(
        vec![
            Variable::new("H", &["on", "off"]),
            Variable::new("A", &["on", "off"]),
            Variable::new("B", &["on", "off"]),
        ],
        vec![
            NodeModel::root("H", vec![0.5, 0.5]),
            sensor("A"),
            sensor("B"),
        ],
    )
    .expect("sensor network is valid")
}
