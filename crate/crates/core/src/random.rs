//! Seeded random networks for property suites.
//!
//! Variables are declared in order and each picks parents among the earlier
//! ones; CPT rows are drawn from a symmetric Dirichlet with unit
//! concentration.

use rand::Rng;
use rand_distr::Exp1;

use crate::network::{BayesNet, NodeModel, Variable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomNetConfig {
    pub min_variables: usize,
    pub max_variables: usize,
    pub min_outcomes: usize,
    pub max_outcomes: usize,
    pub edge_probability: f64,
    pub max_parents: usize,
}

impl Default for RandomNetConfig {
    fn default() -> Self {
        RandomNetConfig {
            min_variables: 3,
            max_variables: 6,
            min_outcomes: 2,
            max_outcomes: 3,
            edge_probability: 0.5,
            max_parents: 3,
        }
    }
}

/// A probability vector drawn from Dirichlet(1, ..., 1).
pub fn dirichlet_row<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.iter().map(|d| d / total).collect()
}

pub fn random_variables<R: Rng + ?Sized>(rng: &mut R, config: &RandomNetConfig) -> Vec<Variable> {
    let n = rng.random_range(config.min_variables..=config.max_variables);
    (0..n)
        .map(|i| {
            let k = rng.random_range(config.min_outcomes..=config.max_outcomes);
            Variable {
                name: format!("V{i}"),
                outcomes: (0..k).map(|o| format!("s{o}")).collect(),
            }
        })
        .collect()
}

/// A random structure and CPTs over the given variables.
pub fn random_network_over<R: Rng + ?Sized>(
    rng: &mut R,
    variables: &[Variable],
    config: &RandomNetConfig,
) -> BayesNet {
    let mut nodes = Vec::with_capacity(variables.len());
    for (i, var) in variables.iter().enumerate() {
        let mut parents: Vec<usize> = (0..i)
            .filter(|_| rng.random::<f64>() < config.edge_probability)
            .collect();
        while parents.len() > config.max_parents {
            let drop = rng.random_range(0..parents.len());
            parents.remove(drop);
        }
        let rows: usize = parents
            .iter()
            .map(|&p| variables[p].cardinality())
            .product();
        nodes.push(NodeModel {
            variable: var.name.clone(),
            parents: parents.iter().map(|&p| variables[p].name.clone()).collect(),
            cpt: (0..rows)
                .map(|_| dirichlet_row(rng, var.cardinality()))
                .collect(),
        });
    }
    BayesNet::build(variables.to_vec(), nodes).expect("generated network is valid")
}

pub fn random_network<R: Rng + ?Sized>(rng: &mut R, config: &RandomNetConfig) -> BayesNet {
    let variables = random_variables(rng, config);
    random_network_over(rng, &variables, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn respects_config_and_seed() {
        let cfg = RandomNetConfig::default();
        for seed in 0..50 {
            let net = random_network(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
            assert!((3..=6).contains(&net.num_variables()));
            for v in 0..net.num_variables() {
                assert!((2..=3).contains(&net.cardinality(v)));
                assert!(net.parents(v).len() <= 3);
            }
            let again = random_network(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
            assert_eq!(net, again);
        }
    }
}
