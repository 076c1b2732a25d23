//! Variables, node models and the validated network that houses the
//! assessed distribution.
//!
//! CPT layout: one row per parent configuration, configurations enumerated
//! in parent declaration order with the last parent varying fastest, and
//! each row listing the child's outcomes in declaration order.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rebuttal::RebuttalSpec;

/// Rows whose sum is further than this from one are rejected.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;
/// Rows within this distance of unit sum are kept verbatim.
const ROW_SUM_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variable {
    pub name: String,
    pub outcomes: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, outcomes: &[&str]) -> Self {
        Variable {
            name: name.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.outcomes.len()
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }
}

/// A node model: the variable, its ordered parents and one conditional
/// distribution per parent configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeModel {
    pub variable: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub cpt: Vec<Vec<f64>>,
}

impl NodeModel {
    pub fn new<S: Into<String>>(variable: S, parents: &[&str], cpt: Vec<Vec<f64>>) -> Self {
        NodeModel {
            variable: variable.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            cpt,
        }
    }

    pub fn root<S: Into<String>>(variable: S, prior: Vec<f64>) -> Self {
        NodeModel::new(variable, &[], vec![prior])
    }
}

/// A partial or full assignment of outcomes to variables, by name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    bindings: BTreeMap<String, String>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with<V: Into<String>, O: Into<String>>(mut self, variable: V, outcome: O) -> Self {
        self.insert(variable, outcome);
        self
    }

    pub fn insert<V: Into<String>, O: Into<String>>(&mut self, variable: V, outcome: O) {
        self.bindings.insert(variable.into(), outcome.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.bindings.get(variable).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<V: Into<String>, O: Into<String>> FromIterator<(V, O)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (V, O)>>(iter: I) -> Self {
        let mut a = Assignment::new();
        for (v, o) in iter {
            a.insert(v, o);
        }
        a
    }
}

/// A validated Bayesian network. Immutable once built.
#[derive(Debug, Clone)]
pub struct BayesNet {
    variables: Vec<Variable>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    /// Row-major CPT per variable: `rows * cardinality` entries.
    cpts: Vec<Vec<f64>>,
    topo: Vec<usize>,
    rebuttals: Vec<RebuttalSpec>,
    /// node index -> rebuttal variable index, for explicitly attached rebuttals
    attached: BTreeMap<usize, usize>,
    priors: OnceLock<Vec<Vec<f64>>>,
}

impl PartialEq for BayesNet {
    fn eq(&self, other: &Self) -> bool {
        self.variables == other.variables
            && self.parents == other.parents
            && self.cpts == other.cpts
            && self.rebuttals == other.rebuttals
            && self.attached == other.attached
    }
}

impl BayesNet {
    /// Validates variables and node models and assembles the network.
    ///
    /// Rows off unit sum by at most [`ROW_SUM_TOLERANCE`] are renormalized;
    /// worse rows are rejected.
    pub fn build(variables: Vec<Variable>, nodes: Vec<NodeModel>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let mut index = HashMap::with_capacity(variables.len());
        for (i, var) in variables.iter().enumerate() {
            if index.insert(var.name.clone(), i).is_some() {
                return Err(Error::DuplicateVariable(var.name.clone()));
            }
            if var.outcomes.len() < 2 {
                return Err(Error::TooFewOutcomes(var.name.clone()));
            }
            let mut seen = BTreeSet::new();
            for o in &var.outcomes {
                if !seen.insert(o) {
                    return Err(Error::DuplicateOutcome {
                        variable: var.name.clone(),
                        outcome: o.clone(),
                    });
                }
            }
        }

        let mut slots: Vec<Option<NodeModel>> = vec![None; variables.len()];
        for node in nodes {
            let i = *index
                .get(&node.variable)
                .ok_or_else(|| Error::UnknownVariable(node.variable.clone()))?;
            if slots[i].is_some() {
                return Err(Error::DuplicateNode(node.variable));
            }
            slots[i] = Some(node);
        }

        let mut parents = Vec::with_capacity(variables.len());
        let mut cpts = Vec::with_capacity(variables.len());
        for (i, slot) in slots.into_iter().enumerate() {
            let node = slot.ok_or_else(|| Error::MissingNode(variables[i].name.clone()))?;
            let mut ps = Vec::with_capacity(node.parents.len());
            for p in &node.parents {
                let pi = *index.get(p).ok_or_else(|| Error::DanglingParent {
                    node: node.variable.clone(),
                    parent: p.clone(),
                })?;
                if ps.contains(&pi) {
                    return Err(Error::DuplicateParent {
                        node: node.variable.clone(),
                        parent: p.clone(),
                    });
                }
                ps.push(pi);
            }
            let rows: usize = ps.iter().map(|&p| variables[p].cardinality()).product();
            let flat = validate_rows(&node.variable, &node.cpt, rows, variables[i].cardinality())?;
            parents.push(ps);
            cpts.push(flat);
        }

        Self::from_parts(variables, index, parents, cpts)
    }

    fn from_parts(
        variables: Vec<Variable>,
        index: HashMap<String, usize>,
        parents: Vec<Vec<usize>>,
        cpts: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let topo = topological_order(&variables, &parents)?;
        Ok(BayesNet {
            variables,
            index,
            parents,
            cpts,
            topo,
            rebuttals: Vec::new(),
            attached: BTreeMap::new(),
            priors: OnceLock::new(),
        })
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: usize) -> &Variable {
        &self.variables[id]
    }

    pub fn name(&self, id: usize) -> &str {
        &self.variables[id].name
    }

    pub fn cardinality(&self, id: usize) -> usize {
        self.variables[id].cardinality()
    }

    pub fn var_id(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn outcome_id(&self, var: usize, label: &str) -> Result<usize> {
        self.variables[var]
            .outcome_index(label)
            .ok_or_else(|| Error::UnknownOutcome {
                variable: self.variables[var].name.clone(),
                outcome: label.to_string(),
            })
    }

    pub fn parents(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    /// Row-major CPT of `id` (parent configurations by rows).
    pub fn cpt(&self, id: usize) -> &[f64] {
        &self.cpts[id]
    }

    pub fn cpt_row(&self, id: usize, parent_config: usize) -> &[f64] {
        let k = self.cardinality(id);
        &self.cpts[id][parent_config * k..(parent_config + 1) * k]
    }

    pub fn num_parent_configs(&self, id: usize) -> usize {
        self.parents[id]
            .iter()
            .map(|&p| self.cardinality(p))
            .product()
    }

    /// Index of the parent configuration read off a full outcome vector.
    pub fn parent_config_index(&self, id: usize, outcomes: &[usize]) -> usize {
        self.parents[id]
            .iter()
            .fold(0, |acc, &p| acc * self.cardinality(p) + outcomes[p])
    }

    /// Decodes a parent configuration index into per-parent outcomes.
    pub fn decode_parent_config(&self, id: usize, mut config: usize) -> Vec<usize> {
        let ps = &self.parents[id];
        let mut out = vec![0; ps.len()];
        for (slot, &p) in out.iter_mut().zip(ps).rev() {
            let k = self.cardinality(p);
            *slot = config % k;
            config /= k;
        }
        out
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Node models in declaration order, with the stored (possibly
    /// renormalized) rows.
    pub fn node_models(&self) -> Vec<NodeModel> {
        (0..self.num_variables())
            .map(|i| NodeModel {
                variable: self.name(i).to_string(),
                parents: self.parents[i]
                    .iter()
                    .map(|&p| self.name(p).to_string())
                    .collect(),
                cpt: self.cpts[i]
                    .chunks(self.cardinality(i))
                    .map(<[f64]>::to_vec)
                    .collect(),
            })
            .collect()
    }

    /// Rebuttal annotations carried alongside the network (not attached).
    pub fn rebuttals(&self) -> &[RebuttalSpec] {
        &self.rebuttals
    }

    pub fn with_rebuttals(mut self, specs: Vec<RebuttalSpec>) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        for spec in &specs {
            spec.validate_for(&self)?;
            if !nodes.insert(spec.node.clone()) || self.attached_rebuttal(&spec.node).is_some() {
                return Err(Error::RebuttalExists(spec.node.clone()));
            }
        }
        self.rebuttals = specs;
        Ok(self)
    }

    /// Variable index of the rebuttal attached to `node`, if any.
    pub fn attached_rebuttal(&self, node: &str) -> Option<usize> {
        let id = self.index.get(node)?;
        self.attached.get(id).copied()
    }

    pub fn attached_rebuttals(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.attached.iter().map(|(&n, &r)| (n, r))
    }

    /// Adds a binary root `rebuttal_name` as the last parent of `node`.
    /// Rows with the rebuttal true use `straw`; rows with it false keep the
    /// assessed conditional.
    pub(crate) fn with_rebuttal_parent(
        &self,
        node: usize,
        rebuttal_name: String,
        prior_true: f64,
        straw: &[f64],
    ) -> Result<Self> {
        if self.index.contains_key(&rebuttal_name) {
            return Err(Error::NameCollision(rebuttal_name));
        }
        let mut variables = self.variables.clone();
        let mut index = self.index.clone();
        let mut parents = self.parents.clone();
        let mut cpts = self.cpts.clone();
        let r = variables.len();
        variables.push(Variable::new(rebuttal_name.clone(), &["t", "f"]));
        index.insert(rebuttal_name, r);
        parents.push(Vec::new());
        cpts.push(vec![prior_true, 1.0 - prior_true]);

        let k = self.cardinality(node);
        let mut table = Vec::with_capacity(cpts[node].len() * 2);
        for row in self.cpts[node].chunks(k) {
            table.extend_from_slice(straw);
            table.extend_from_slice(row);
        }
        cpts[node] = table;
        parents[node].push(r);

        let mut net = Self::from_parts(variables, index, parents, cpts)?;
        net.rebuttals = self
            .rebuttals
            .iter()
            .filter(|s| s.node != self.name(node))
            .cloned()
            .collect();
        net.attached = self.attached.clone();
        net.attached.insert(node, r);
        Ok(net)
    }

    /// Resolves a named assignment into `(variable, outcome)` index pairs,
    /// ordered by variable index.
    pub fn resolve(&self, assignment: &Assignment) -> Result<Vec<(usize, usize)>> {
        let mut out = Vec::with_capacity(assignment.len());
        for (var, label) in assignment.iter() {
            let v = self.var_id(var)?;
            out.push((v, self.outcome_id(v, label)?));
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Natural-log joint probability of a full outcome vector.
    pub fn log_joint(&self, outcomes: &[usize]) -> f64 {
        let mut acc = 0.0;
        for v in 0..self.num_variables() {
            let p = self.cpt_row(v, self.parent_config_index(v, outcomes))[outcomes[v]];
            if p == 0.0 {
                return f64::NEG_INFINITY;
            }
            acc += p.ln();
        }
        acc
    }

    /// Product of CPT entries along the DAG for a full assignment.
    pub fn joint_probability(&self, full: &Assignment) -> Result<f64> {
        let mut outcomes = vec![usize::MAX; self.num_variables()];
        for (v, o) in self.resolve(full)? {
            outcomes[v] = o;
        }
        if let Some(v) = outcomes.iter().position(|&o| o == usize::MAX) {
            return Err(Error::UnboundVariable(self.name(v).to_string()));
        }
        Ok(self.log_joint(&outcomes).exp())
    }

    /// Prior marginals P^a(X_i) of every variable, computed once.
    pub fn prior_marginals(&self) -> &[Vec<f64>] {
        self.priors.get_or_init(|| {
            (0..self.num_variables())
                .map(|v| {
                    crate::inference::eliminate_indexed(self, &[v], &[])
                        .and_then(|f| f.normalized())
                        .map(|f| f.probabilities())
                        .expect("prior marginals of a validated network")
                })
                .collect()
        })
    }

    pub fn prior_marginal(&self, id: usize) -> &[f64] {
        &self.prior_marginals()[id]
    }

    /// Number of full outcome configurations, saturating.
    pub fn num_configurations(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.cardinality() as u128))
    }
}

fn validate_rows(node: &str, cpt: &[Vec<f64>], rows: usize, k: usize) -> Result<Vec<f64>> {
    if cpt.len() != rows {
        return Err(Error::RowCount {
            node: node.to_string(),
            expected: rows,
            found: cpt.len(),
        });
    }
    let mut flat = Vec::with_capacity(rows * k);
    for (r, row) in cpt.iter().enumerate() {
        flat.extend(normalize_row(node, r, row, k)?);
    }
    Ok(flat)
}

/// Checks a probability row and renormalizes it when it is off unit sum by
/// no more than [`ROW_SUM_TOLERANCE`].
pub(crate) fn normalize_row(node: &str, r: usize, row: &[f64], k: usize) -> Result<Vec<f64>> {
    if row.len() != k {
        return Err(Error::RowLength {
            node: node.to_string(),
            row: r,
            expected: k,
            found: row.len(),
        });
    }
    if let Some(&value) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidProbability {
            node: node.to_string(),
            row: r,
            value,
        });
    }
    let sum: f64 = row.iter().sum();
    let off = (sum - 1.0).abs();
    if off > ROW_SUM_TOLERANCE {
        return Err(Error::RowSum {
            node: node.to_string(),
            row: r,
            sum,
        });
    }
    if off > ROW_SUM_NOISE {
        Ok(row.iter().map(|p| p / sum).collect())
    } else {
        Ok(row.to_vec())
    }
}

/// Kahn's algorithm; ties broken by declaration order.
fn topological_order(variables: &[Variable], parents: &[Vec<usize>]) -> Result<Vec<usize>> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let n = variables.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() < n {
        let mut stuck: Vec<String> = (0..n)
            .filter(|&i| indegree[i] > 0)
            .map(|i| variables[i].name.clone())
            .collect();
        stuck.sort();
        return Err(Error::Cycle(stuck));
    }
    Ok(order)
}
