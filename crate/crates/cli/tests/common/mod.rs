//! Brute-force oracle: full joint enumeration straight from the CPT rows,
//! with no factor algebra or elimination involved.
#![allow(dead_code)]

use bnsentinel::random::{random_network, RandomNetConfig};
use bnsentinel::BayesNet;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Every full configuration with its probability, first variable slowest.
pub fn full_joint(net: &BayesNet) -> Vec<(Vec<usize>, f64)> {
    let n = net.num_variables();
    let cards: Vec<usize> = (0..n).map(|v| net.cardinality(v)).collect();
    let total: usize = cards.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut config = vec![0usize; n];
    for _ in 0..total {
        let mut p = 1.0;
        for v in 0..n {
            let mut row = 0;
            for &u in net.parents(v) {
                row = row * cards[u] + config[u];
            }
            p *= net.cpt_row(v, row)[config[v]];
        }
        out.push((config.clone(), p));
        for v in (0..n).rev() {
            config[v] += 1;
            if config[v] < cards[v] {
                break;
            }
            config[v] = 0;
        }
    }
    out
}

pub fn matches(config: &[usize], evidence: &[(usize, usize)]) -> bool {
    evidence.iter().all(|&(v, o)| config[v] == o)
}

pub fn evidence_probability(joint: &[(Vec<usize>, f64)], evidence: &[(usize, usize)]) -> f64 {
    joint
        .iter()
        .filter(|(c, _)| matches(c, evidence))
        .map(|(_, p)| p)
        .sum()
}

pub fn posterior(
    joint: &[(Vec<usize>, f64)],
    card: usize,
    var: usize,
    evidence: &[(usize, usize)],
) -> Vec<f64> {
    let mut dist = vec![0.0; card];
    for (c, p) in joint.iter().filter(|(c, _)| matches(c, evidence)) {
        dist[c[var]] += p;
    }
    let z: f64 = dist.iter().sum();
    dist.iter().map(|p| p / z).collect()
}

pub fn marginal(joint: &[(Vec<usize>, f64)], card: usize, var: usize) -> Vec<f64> {
    posterior(joint, card, var, &[])
}

/// Joint distribution over `scope`, last scope variable fastest.
pub fn scope_distribution(
    net: &BayesNet,
    joint: &[(Vec<usize>, f64)],
    scope: &[usize],
) -> Vec<f64> {
    let size: usize = scope.iter().map(|&v| net.cardinality(v)).product();
    let mut dist = vec![0.0; size];
    for (c, p) in joint {
        let mut idx = 0;
        for &v in scope {
            idx = idx * net.cardinality(v) + c[v];
        }
        dist[idx] += p;
    }
    dist
}

/// KL divergence in bits of the scope joint from the product of its
/// marginals.
pub fn kl_from_independence(net: &BayesNet, joint: &[(Vec<usize>, f64)], scope: &[usize]) -> f64 {
    let margs: Vec<Vec<f64>> = scope
        .iter()
        .map(|&v| marginal(joint, net.cardinality(v), v))
        .collect();
    let mut kl = 0.0;
    let dist = scope_distribution(net, joint, scope);
    for (idx, &p) in dist.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let mut rest = idx;
        let mut q = 1.0;
        for (k, &v) in scope.iter().enumerate().rev() {
            let card = net.cardinality(v);
            q *= margs[k][rest % card];
            rest /= card;
        }
        kl += p * (p / q).log2();
    }
    kl
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

pub fn seeded_network(seed: u64) -> BayesNet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_network(&mut rng, &RandomNetConfig::default())
}

/// Every subset of `0..n` as a sorted index list.
pub fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1 << n)).map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}
