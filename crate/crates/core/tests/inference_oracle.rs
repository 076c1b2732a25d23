mod common;

use bnsentinel::format::network_to_json;
use bnsentinel::worked_example;
use bnsentinel::{
    eliminate, forward_sample, parse_network, Assignment, BayesNet, Error, EvidenceSession,
    NetworkDocument, NodeModel, Variable,
};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

fn close(a: f64, b: f64) -> bool {
    relative_error(a, b) <= TOL || (a - b).abs() <= 1e-15
}

/// A random possible evidence set: outcomes taken from one sampled full
/// configuration, restricted to a random subset of variables.
fn random_evidence(net: &BayesNet, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let full = bnsentinel::inference::sample_outcomes(net, rng);
    (0..net.num_variables())
        .filter(|_| rng.random_bool(0.5))
        .map(|v| (v, full[v]))
        .collect()
}

fn assignment(net: &BayesNet, evidence: &[(usize, usize)]) -> Assignment {
    evidence
        .iter()
        .map(|&(v, o)| (net.name(v).to_string(), net.variable(v).outcomes[o].clone()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eliminate_matches_enumeration(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let joint = full_joint(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let evidence = random_evidence(&net, &mut rng);
        let a = assignment(&net, &evidence);
        for v in 0..net.num_variables() {
            if evidence.iter().any(|&(e, _)| e == v) {
                continue;
            }
            let f = eliminate(&net, &[net.name(v)], &a).unwrap().normalized().unwrap();
            let oracle = posterior(&joint, net.cardinality(v), v, &evidence);
            for (o, &p) in oracle.iter().enumerate() {
                prop_assert!(close(f.probability(o), p), "{} vs {}", f.probability(o), p);
            }
        }
    }

    #[test]
    fn session_chain_rule_in_any_order(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let joint = full_joint(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc4a1);
        let mut evidence = random_evidence(&net, &mut rng);
        let expected = evidence_probability(&joint, &evidence);
        for _ in 0..3 {
            evidence.shuffle(&mut rng);
            let mut session = EvidenceSession::new(&net);
            let mut running = 1.0;
            for &(v, o) in &evidence {
                session.absorb_indexed(v, o).unwrap();
                running *= session.conditionals().last().unwrap();
            }
            prop_assert!(close(session.evidence_probability(), expected));
            prop_assert!(close(running, expected));
            for v in 0..net.num_variables() {
                let post = session.posterior_indexed(v).unwrap();
                let oracle = posterior(&joint, net.cardinality(v), v, &evidence);
                let total: f64 = post.distribution.iter().sum();
                prop_assert!((total - 1.0).abs() <= 1e-12);
                for (p, q) in post.distribution.iter().zip(&oracle) {
                    prop_assert!(close(*p, *q), "{p} vs {q}");
                }
            }
        }
    }

    #[test]
    fn family_posterior_matches_enumeration(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let joint = full_joint(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfa);
        let evidence = random_evidence(&net, &mut rng);
        let mut session = EvidenceSession::new(&net);
        for &(v, o) in &evidence {
            session.absorb_indexed(v, o).unwrap();
        }
        let z = evidence_probability(&joint, &evidence);
        for node in 0..net.num_variables() {
            let f = session.family_posterior_indexed(node).unwrap();
            let mut scope: Vec<usize> = net.parents(node).to_vec();
            scope.push(node);
            prop_assert_eq!(f.scope(), &scope[..]);
            for i in 0..f.len() {
                let config = f.config_of(i);
                let pinned: Vec<(usize, usize)> = scope.iter().copied().zip(config).collect();
                let mut both = evidence.clone();
                let consistent = pinned.iter().all(|&(v, o)| {
                    evidence.iter().all(|&(e, eo)| e != v || eo == o)
                });
                let oracle = if consistent {
                    both.extend(pinned);
                    evidence_probability(&joint, &both) / z
                } else {
                    0.0
                };
                prop_assert!(close(f.probability(i), oracle), "{} vs {}", f.probability(i), oracle);
            }
        }
    }

    #[test]
    fn declaration_order_does_not_matter(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let mut doc = NetworkDocument::from_network(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        doc.nodes.shuffle(&mut rng);
        let shuffled = doc.into_network().unwrap();
        let a = full_joint(&net);
        let b = full_joint(&shuffled);
        for ((ca, pa), (cb, pb)) in a.iter().zip(&b) {
            prop_assert_eq!(ca, cb);
            prop_assert_eq!(pa, pb);
        }
        let topo = shuffled.topological_order();
        for (pos, &v) in topo.iter().enumerate() {
            for p in shuffled.parents(v) {
                prop_assert!(topo[..pos].contains(p));
            }
        }
    }

    #[test]
    fn network_round_trip_is_exact(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let text = network_to_json(&net);
        let back = parse_network(&text).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(network_to_json(&back), text);
    }

    #[test]
    fn joint_sums_to_one(seed in any::<u64>()) {
        let net = seeded_network(seed);
        let total: f64 = full_joint(&net).iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        let z = eliminate(&net, &[], &Assignment::new()).unwrap().log_total().exp();
        prop_assert!((z - 1.0).abs() < 1e-12);
    }
}

#[test]
fn impossible_evidence_leaves_session_unchanged() {
    let net = BayesNet::build(
        vec![
            Variable::new("H", &["on", "off"]),
            Variable::new("A", &["on", "off"]),
        ],
        vec![
            NodeModel::root("H", vec![0.5, 0.5]),
            NodeModel::new("A", &["H"], vec![vec![1.0, 0.0], vec![0.2, 0.8]]),
        ],
    )
    .unwrap();
    let mut session = EvidenceSession::new(&net);
    session.absorb("H", "on").unwrap();
    let before = session.clone();
    let err = session.absorb("A", "off").unwrap_err();
    assert!(matches!(err, Error::ImpossibleEvidence(_)));
    assert_eq!(session.len(), before.len());
    assert_eq!(
        session.evidence_probability(),
        before.evidence_probability()
    );
    assert_eq!(
        session.posterior("A").unwrap(),
        before.posterior("A").unwrap()
    );
    session.absorb("A", "on").unwrap();
    assert_eq!(session.evidence_probability(), 0.5);
}

#[test]
fn forward_samples_follow_the_joint() {
    let net = worked_example::network();
    let n = 100_000;
    let samples = forward_sample(&net, 7, n);
    assert_eq!(samples.len(), n);
    for (x, xl) in worked_example::X_OUTCOMES.iter().enumerate() {
        for (y, yl) in worked_example::Y_OUTCOMES.iter().enumerate() {
            let hits = samples
                .iter()
                .filter(|a| a.get("X") == Some(*xl) && a.get("Y") == Some(*yl))
                .count();
            let freq = hits as f64 / n as f64;
            assert!(
                (freq - worked_example::JOINT[x][y]).abs() < 0.01,
                "{xl},{yl}: {freq}"
            );
        }
    }
    assert_eq!(
        forward_sample(&net, 7, 50),
        forward_sample(&net, 7, 50)[..].to_vec()
    );
}
