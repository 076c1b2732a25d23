//! Exact inference by variable elimination and the incremental evidence
//! session.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::Factor;
use crate::network::{Assignment, BayesNet};
use crate::report::sig_vec;

/// Unnormalized `P^a(query, evidence)` over the query configurations.
///
/// Normalizing the result gives the posterior of the query given the
/// evidence. Hidden variables are summed out in greedy min-fill order.
pub fn eliminate(net: &BayesNet, query: &[&str], evidence: &Assignment) -> Result<Factor> {
    let query: Vec<usize> = query.iter().map(|q| net.var_id(q)).collect::<Result<_>>()?;
    let evidence = net.resolve(evidence)?;
    eliminate_indexed(net, &query, &evidence)
}

pub(crate) fn eliminate_indexed(
    net: &BayesNet,
    query: &[usize],
    evidence: &[(usize, usize)],
) -> Result<Factor> {
    let n = net.num_variables();
    let mut evidence_of = vec![None; n];
    for &(v, o) in evidence {
        evidence_of[v] = Some(o);
    }
    let mut in_query = vec![false; n];
    for &q in query {
        if evidence_of[q].is_some() {
            return Err(Error::QueryEvidenceOverlap(net.name(q).to_string()));
        }
        if in_query[q] {
            return Err(Error::DuplicateVariable(net.name(q).to_string()));
        }
        in_query[q] = true;
    }

    // Nodes that are not ancestors of the query or evidence sum to one.
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = query
        .iter()
        .copied()
        .chain(evidence.iter().map(|e| e.0))
        .collect();
    while let Some(v) = stack.pop() {
        if !relevant[v] {
            relevant[v] = true;
            stack.extend_from_slice(net.parents(v));
        }
    }

    let mut factors: Vec<Factor> = Vec::new();
    for v in (0..n).filter(|&v| relevant[v]) {
        let mut scope = net.parents(v).to_vec();
        scope.push(v);
        let cards = scope.iter().map(|&s| net.cardinality(s)).collect();
        let mut f = Factor::from_probabilities(scope.clone(), cards, net.cpt(v));
        for &s in &scope {
            if let Some(o) = evidence_of[s] {
                f = f.reduce(s, o);
            }
        }
        factors.push(f);
    }

    let hidden: Vec<usize> = (0..n)
        .filter(|&v| relevant[v] && !in_query[v] && evidence_of[v].is_none())
        .collect();
    for var in min_fill_order(net, &factors, &hidden) {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.position(var).is_some());
        factors = rest;
        let merged = touching
            .iter()
            .skip(1)
            .fold(touching[0].clone(), |acc, f| acc.product(f));
        factors.push(merged.sum_out(var));
    }

    let joint = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f));
    Ok(joint.reorder(query))
}

/// Greedy min-fill elimination order, ties broken by variable name.
fn min_fill_order(net: &BayesNet, factors: &[Factor], hidden: &[usize]) -> Vec<usize> {
    let n = net.num_variables();
    let mut adj = vec![BTreeSet::new(); n];
    for f in factors {
        for &a in f.scope() {
            for &b in f.scope() {
                if a != b {
                    adj[a].insert(b);
                }
            }
        }
    }
    let mut remaining: BTreeSet<usize> = hidden.iter().copied().collect();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let best = *remaining
            .iter()
            .min_by(|&&a, &&b| {
                fill_in(&adj, a)
                    .cmp(&fill_in(&adj, b))
                    .then_with(|| net.name(a).cmp(net.name(b)))
            })
            .expect("non-empty");
        let neighbours: Vec<usize> = adj[best].iter().copied().collect();
        for &u in &neighbours {
            adj[u].remove(&best);
            for &w in &neighbours {
                if u != w {
                    adj[u].insert(w);
                }
            }
        }
        adj[best].clear();
        remaining.remove(&best);
        order.push(best);
    }
    order
}

fn fill_in(adj: &[BTreeSet<usize>], v: usize) -> usize {
    let nb: Vec<usize> = adj[v].iter().copied().collect();
    let mut missing = 0;
    for (i, &a) in nb.iter().enumerate() {
        for &b in &nb[i + 1..] {
            if !adj[a].contains(&b) {
                missing += 1;
            }
        }
    }
    missing
}

/// Posterior distribution of a single variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PosteriorTable {
    pub variable: String,
    pub outcomes: Vec<String>,
    #[serde(serialize_with = "sig_vec")]
    pub distribution: Vec<f64>,
}

impl PosteriorTable {
    pub fn probability(&self, outcome: &str) -> Option<f64> {
        self.outcomes
            .iter()
            .position(|o| o == outcome)
            .map(|i| self.distribution[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    pub variable: usize,
    pub outcome: usize,
}

/// Ordered evidence log with the running joint evidence probability.
///
/// Each absorbed item multiplies the running probability by its
/// conditional given the earlier items; those conditionals are kept so
/// conflict traces can be rebuilt without further inference.
#[derive(Debug, Clone)]
pub struct EvidenceSession<'a> {
    net: &'a BayesNet,
    log: Vec<Observation>,
    observed: Vec<Option<usize>>,
    log_evidence: f64,
    conditionals: Vec<f64>,
    posteriors: Vec<OnceLock<PosteriorTable>>,
}

impl<'a> EvidenceSession<'a> {
    pub fn new(net: &'a BayesNet) -> Self {
        EvidenceSession {
            net,
            log: Vec::new(),
            observed: vec![None; net.num_variables()],
            log_evidence: 0.0,
            conditionals: Vec::new(),
            posteriors: (0..net.num_variables()).map(|_| OnceLock::new()).collect(),
        }
    }

    /// Builds a session by absorbing `items` in order.
    pub fn with_evidence<V: AsRef<str>, O: AsRef<str>>(
        net: &'a BayesNet,
        items: impl IntoIterator<Item = (V, O)>,
    ) -> Result<Self> {
        let mut s = Self::new(net);
        for (v, o) in items {
            s.absorb(v.as_ref(), o.as_ref())?;
        }
        Ok(s)
    }

    pub fn net(&self) -> &'a BayesNet {
        self.net
    }

    pub fn observations(&self) -> &[Observation] {
        &self.log
    }

    pub fn len(&self) -> usize {
        self.log.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log.is_empty()
    }

    /// Natural log of `P^a(x_e)`.
    pub fn log_evidence_probability(&self) -> f64 {
        self.log_evidence
    }

    pub fn evidence_probability(&self) -> f64 {
        self.log_evidence.exp()
    }

    /// `P^a(x_ej | x_e1, ..., x_e(j-1))` for each absorbed item.
    pub fn conditionals(&self) -> &[f64] {
        &self.conditionals
    }

    pub fn observed_outcome(&self, var: usize) -> Option<usize> {
        self.observed[var]
    }

    /// Evidence as `(variable, outcome)` pairs sorted by variable index.
    pub fn evidence_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> =
            self.log.iter().map(|o| (o.variable, o.outcome)).collect();
        pairs.sort_unstable();
        pairs
    }

    pub fn evidence(&self) -> Assignment {
        self.log
            .iter()
            .map(|o| {
                (
                    self.net.name(o.variable),
                    self.net.variable(o.variable).outcomes[o.outcome].as_str(),
                )
            })
            .collect()
    }

    /// Absorbs one observation.
    ///
    /// Re-observing a variable with the same outcome is a no-op; with a
    /// different outcome it is an error. An observation with zero
    /// conditional probability is rejected and leaves the session as it was.
    pub fn absorb(&mut self, variable: &str, outcome: &str) -> Result<()> {
        let v = self.net.var_id(variable)?;
        let o = self.net.outcome_id(v, outcome)?;
        self.absorb_indexed(v, o)
    }

    pub fn absorb_indexed(&mut self, var: usize, outcome: usize) -> Result<()> {
        if let Some(existing) = self.observed[var] {
            if existing == outcome {
                return Ok(());
            }
            let labels = &self.net.variable(var).outcomes;
            return Err(Error::ConflictingEvidence {
                variable: self.net.name(var).to_string(),
                existing: labels[existing].clone(),
                requested: labels[outcome].clone(),
            });
        }
        let conditional = self.predictive(var)?[outcome];
        if conditional == 0.0 {
            return Err(Error::ImpossibleEvidence(format!(
                "{}={} has zero probability given the evidence so far",
                self.net.name(var),
                self.net.variable(var).outcomes[outcome]
            )));
        }
        self.log.push(Observation {
            variable: var,
            outcome,
        });
        self.observed[var] = Some(outcome);
        self.log_evidence += conditional.ln();
        self.conditionals.push(conditional);
        for cell in &mut self.posteriors {
            *cell = OnceLock::new();
        }
        Ok(())
    }

    /// Distribution of an unobserved variable given the current evidence.
    fn predictive(&self, var: usize) -> Result<Vec<f64>> {
        if let Some(cached) = self.posteriors[var].get() {
            return Ok(cached.distribution.clone());
        }
        let f = eliminate_indexed(self.net, &[var], &self.evidence_pairs())?;
        Ok(f.normalized()?.probabilities())
    }

    /// `P^a(X | x_e)`; a point mass for observed variables.
    pub fn posterior(&self, variable: &str) -> Result<PosteriorTable> {
        let v = self.net.var_id(variable)?;
        self.posterior_indexed(v)
    }

    pub fn posterior_indexed(&self, var: usize) -> Result<PosteriorTable> {
        if let Some(t) = self.posteriors[var].get() {
            return Ok(t.clone());
        }
        let distribution = match self.observed[var] {
            Some(o) => {
                let mut d = vec![0.0; self.net.cardinality(var)];
                d[o] = 1.0;
                d
            }
            None => self.predictive(var)?,
        };
        let table = PosteriorTable {
            variable: self.net.name(var).to_string(),
            outcomes: self.net.variable(var).outcomes.clone(),
            distribution,
        };
        Ok(self.posteriors[var].get_or_init(|| table).clone())
    }

    /// `P^a(X_i, X_p(i) | x_e)` as a normalized factor with scope
    /// `parents..., node`.
    pub fn family_posterior(&self, node: &str) -> Result<Factor> {
        let v = self.net.var_id(node)?;
        self.family_posterior_indexed(v)
    }

    pub fn family_posterior_indexed(&self, node: usize) -> Result<Factor> {
        let mut family = self.net.parents(node).to_vec();
        family.push(node);
        let free: Vec<usize> = family
            .iter()
            .copied()
            .filter(|&v| self.observed[v].is_none())
            .collect();
        let reduced = eliminate_indexed(self.net, &free, &self.evidence_pairs())?.normalized()?;
        let cards: Vec<usize> = family.iter().map(|&v| self.net.cardinality(v)).collect();
        let total: usize = cards.iter().product();
        let mut out = Factor::new(family.clone(), cards, vec![f64::NEG_INFINITY; total]);
        let mut values = out.log_values().to_vec();
        for (i, slot) in values.iter_mut().enumerate() {
            let config = out.config_of(i);
            let consistent = family
                .iter()
                .zip(&config)
                .all(|(&v, &c)| self.observed[v].is_none_or(|o| o == c));
            if consistent {
                let sub: Vec<usize> = family
                    .iter()
                    .zip(&config)
                    .filter(|(v, _)| self.observed[**v].is_none())
                    .map(|(_, &c)| c)
                    .collect();
                *slot = reduced.log_values()[reduced.index_of(&sub)];
            }
        }
        out = Factor::new(family, out.cards().to_vec(), values);
        Ok(out)
    }
}

/// Draws one full outcome vector ancestrally.
pub fn sample_outcomes<R: Rng + ?Sized>(net: &BayesNet, rng: &mut R) -> Vec<usize> {
    let mut outcomes = vec![0; net.num_variables()];
    for &v in net.topological_order() {
        let row = net.cpt_row(v, net.parent_config_index(v, &outcomes));
        outcomes[v] = sample_categorical(row, rng);
    }
    outcomes
}

pub(crate) fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut cum = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            cum += p;
            last_positive = i;
            if u < cum {
                return i;
            }
        }
    }
    last_positive
}

/// `n` full assignments drawn ancestrally; deterministic for a seed.
pub fn forward_sample(net: &BayesNet, seed: u64, n: usize) -> Vec<Assignment> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let outcomes = sample_outcomes(net, &mut rng);
            outcomes
                .iter()
                .enumerate()
                .map(|(v, &o)| (net.name(v), net.variable(v).outcomes[o].as_str()))
                .collect()
        })
        .collect()
}

/// Log-probability of evidence straight from a factor over no variables.
pub(crate) fn log_probability_of(net: &BayesNet, evidence: &[(usize, usize)]) -> Result<f64> {
    let f = eliminate_indexed(net, &[], evidence)?;
    Ok(f.log_values()[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{NodeModel, Variable};
    use crate::worked_example;

    #[test]
    fn worked_example_eliminate_row_x3() {
        let net = worked_example::network();
        let f = eliminate(&net, &["Y"], &Assignment::new().with("X", "x3")).unwrap();
        let p = f.probabilities();
        for (got, want) in p.iter().zip([0.11, 0.1125, 0.1125]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn query_everything_gives_joint() {
        let net = worked_example::network();
        let f = eliminate(&net, &["X", "Y"], &Assignment::new()).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                let want = net.log_joint(&[x, y]).exp();
                assert!((f.probability(f.index_of(&[x, y])) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn overlapping_query_and_evidence() {
        let net = worked_example::network();
        let err = eliminate(&net, &["X"], &Assignment::new().with("X", "x1")).unwrap_err();
        assert_eq!(err, Error::QueryEvidenceOverlap("X".into()));
    }

    #[test]
    fn empty_query_full_evidence_is_joint() {
        let net = worked_example::network();
        let e = Assignment::new().with("X", "x2").with("Y", "y3");
        let f = eliminate(&net, &[], &e).unwrap();
        assert!((f.probability(0) - net.joint_probability(&e).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn empty_session_has_unit_evidence() {
        let net = worked_example::network();
        let s = EvidenceSession::new(&net);
        assert_eq!(s.log_evidence_probability(), 0.0);
        let prior = s.posterior("Y").unwrap();
        for (got, want) in prior.distribution.iter().zip([0.335, 0.3325, 0.3325]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn worked_example_absorb_chain() {
        let net = worked_example::network();
        let mut s = EvidenceSession::new(&net);
        s.absorb("X", "x3").unwrap();
        let y = s.posterior("Y").unwrap();
        let want = [0.11 / 0.335, 0.1125 / 0.335, 0.1125 / 0.335];
        for (got, w) in y.distribution.iter().zip(want) {
            assert!((got - w).abs() < 1e-12);
        }
        assert!((y.distribution[0] - 0.3284).abs() < 5e-5);
        assert!((y.distribution[1] - 0.3358).abs() < 5e-5);
        s.absorb("Y", "y1").unwrap();
        assert!((s.evidence_probability() - 0.11).abs() < 1e-12);
        assert_eq!(s.posterior("X").unwrap().distribution, vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn reobservation_rules() {
        let net = worked_example::network();
        let mut s = EvidenceSession::new(&net);
        s.absorb("X", "x1").unwrap();
        s.absorb("X", "x1").unwrap();
        assert_eq!(s.len(), 1);
        let err = s.absorb("X", "x2").unwrap_err();
        assert!(matches!(err, Error::ConflictingEvidence { .. }));
    }

    #[test]
    fn impossible_evidence_leaves_session_unchanged() {
        let net = BayesNet::build(
            vec![
                Variable::new("A", &["a", "b"]),
                Variable::new("B", &["a", "b"]),
            ],
            vec![
                NodeModel::root("A", vec![1.0, 0.0]),
                NodeModel::new("B", &["A"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
            ],
        )
        .unwrap();
        let mut s = EvidenceSession::new(&net);
        s.absorb("B", "a").unwrap();
        let before = s.log_evidence_probability();
        let err = s.absorb("A", "b").unwrap_err();
        assert!(matches!(err, Error::ImpossibleEvidence(_)));
        assert_eq!(s.len(), 1);
        assert_eq!(s.log_evidence_probability(), before);
    }

    #[test]
    fn family_posterior_without_evidence_is_joint() {
        let net = worked_example::network();
        let s = EvidenceSession::new(&net);
        let f = s.family_posterior("Y").unwrap();
        assert_eq!(f.scope(), &[0, 1]);
        for (got, want) in f
            .probabilities()
            .iter()
            .zip(worked_example::JOINT.iter().flatten())
        {
            assert!((got - want).abs() < 1e-12);
        }
        let root = s.family_posterior("X").unwrap();
        for (got, want) in root.probabilities().iter().zip(worked_example::X_PRIOR) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn family_posterior_with_observed_member() {
        let net = worked_example::network();
        let s = EvidenceSession::with_evidence(&net, [("Y", "y2")]).unwrap();
        let f = s.family_posterior("Y").unwrap();
        let p = f.probabilities();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p[f.index_of(&[0, 0])], 0.0);
        assert!((p[f.index_of(&[2, 1])] - 0.1125 / 0.3325).abs() < 1e-12);
    }

    #[test]
    fn sessions_are_shareable() {
        fn is_sync<T: Sync + Send>() {}
        is_sync::<BayesNet>();
        is_sync::<EvidenceSession<'static>>();
    }

    #[test]
    fn sampling_edge_cases() {
        let net = worked_example::network();
        assert!(forward_sample(&net, 7, 0).is_empty());
        assert_eq!(forward_sample(&net, 7, 20), forward_sample(&net, 7, 20));

        let det = BayesNet::build(
            vec![
                Variable::new("A", &["a", "b"]),
                Variable::new("B", &["a", "b", "c"]),
            ],
            vec![
                NodeModel::root("A", vec![0.0, 1.0]),
                NodeModel::new("B", &["A"], vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]]),
            ],
        )
        .unwrap();
        let want = Assignment::new().with("A", "b").with("B", "c");
        assert!(forward_sample(&det, 3, 500).iter().all(|a| *a == want));
    }
}
