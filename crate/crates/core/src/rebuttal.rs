//! Rebuttals: binary root variables that, when true, cut a node off from its
//! parents and replace its conditional with a straw distribution.
//!
//! Two routes to the rebuttal posterior are provided. [`attach_rebuttal`]
//! augments the network explicitly; [`rebuttal_likelihood_ratio`] gets the
//! likelihood ratio from the node's family posterior in the unaugmented
//! network, which is exact when no other rebuttal is in play.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::EvidenceSession;
use crate::network::{normalize_row, BayesNet};
use crate::report::sig;

/// One bit: monitored configurations must make the straw at least twice as
/// likely as the assessed conditional.
pub const DEFAULT_RATIO_FLOOR: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RebuttalSpec {
    pub node: String,
    /// `P^s(X_i | t_i)` over the node's outcomes.
    pub straw: Vec<f64>,
    /// `P^s(t_i)`.
    pub prior_true: f64,
}

impl RebuttalSpec {
    pub fn new<S: Into<String>>(node: S, straw: Vec<f64>, prior_true: f64) -> Self {
        RebuttalSpec {
            node: node.into(),
            straw,
            prior_true,
        }
    }

    /// Name of the root variable added by [`attach_rebuttal`].
    pub fn variable_name(&self) -> String {
        format!("R_{}", self.node)
    }

    pub fn prior_odds(&self) -> f64 {
        self.prior_true / (1.0 - self.prior_true)
    }

    pub(crate) fn validate_for(&self, net: &BayesNet) -> Result<()> {
        self.checked(net).map(|_| ())
    }

    /// Validates against `net`, renormalizing a straw row off by at most 1e-6.
    pub fn checked(&self, net: &BayesNet) -> Result<RebuttalSpec> {
        let invalid = |reason: String| Error::InvalidRebuttal {
            node: self.node.clone(),
            reason,
        };
        let node = net.var_id(&self.node)?;
        if !(self.prior_true > 0.0 && self.prior_true < 1.0) {
            return Err(invalid(format!(
                "prior_true {} outside (0, 1)",
                self.prior_true
            )));
        }
        let straw = normalize_row(&self.node, 0, &self.straw, net.cardinality(node))
            .map_err(|e| invalid(format!("straw distribution: {e}")))?;
        Ok(RebuttalSpec {
            node: self.node.clone(),
            straw,
            prior_true: self.prior_true,
        })
    }
}

/// Returns a new network with the rebuttal added as an explicit binary root
/// (`t`, `f`) and extra last parent of the node.
pub fn attach_rebuttal(net: &BayesNet, spec: &RebuttalSpec) -> Result<BayesNet> {
    let spec = spec.checked(net)?;
    let node = net.var_id(&spec.node)?;
    if net.attached_rebuttal(&spec.node).is_some() {
        return Err(Error::RebuttalExists(spec.node.clone()));
    }
    net.with_rebuttal_parent(node, spec.variable_name(), spec.prior_true, &spec.straw)
}

/// A `(x_i, x_p(i))` family configuration and its straw-to-assessed ratio.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyConfig {
    #[serde(skip)]
    pub outcome: usize,
    #[serde(skip)]
    pub parent_config: usize,
    #[serde(rename = "outcome")]
    pub outcome_label: String,
    #[serde(rename = "parents")]
    pub parent_labels: Vec<String>,
    #[serde(serialize_with = "sig")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodRatio {
    pub node: String,
    #[serde(serialize_with = "sig")]
    pub value: f64,
    /// Configurations with zero assessed probability, positive straw
    /// probability and positive parent posterior. Each one alone makes the
    /// ratio infinite.
    pub decisive: Vec<FamilyConfig>,
    /// Rebuttals on other nodes; when non-zero the value is approximate.
    pub other_rebuttals: usize,
}

impl LikelihoodRatio {
    pub fn is_exact(&self) -> bool {
        self.other_rebuttals == 0
    }

    pub fn is_decisive(&self) -> bool {
        !self.decisive.is_empty()
    }
}

fn family_configs(net: &BayesNet, node: usize, straw: &[f64]) -> Vec<FamilyConfig> {
    let k = net.cardinality(node);
    let mut out = Vec::with_capacity(net.cpt(node).len());
    for pc in 0..net.num_parent_configs(node) {
        let row = net.cpt_row(node, pc);
        let parent_labels: Vec<String> = net
            .parents(node)
            .iter()
            .zip(net.decode_parent_config(node, pc))
            .map(|(&p, o)| net.variable(p).outcomes[o].clone())
            .collect();
        for (o, (&assessed, &s)) in row.iter().zip(straw).enumerate().take(k) {
            let ratio = if s == 0.0 { 0.0 } else { s / assessed };
            out.push(FamilyConfig {
                outcome: o,
                parent_config: pc,
                outcome_label: net.variable(node).outcomes[o].clone(),
                parent_labels: parent_labels.clone(),
                ratio,
            });
        }
    }
    out
}

fn count_other_rebuttals(net: &BayesNet, node: &str) -> usize {
    let mut nodes: BTreeSet<&str> = net.rebuttals().iter().map(|s| s.node.as_str()).collect();
    for (n, _) in net.attached_rebuttals() {
        nodes.insert(net.name(n));
    }
    nodes.remove(node);
    nodes.len()
}

fn sum_over(
    session: &EvidenceSession<'_>,
    spec: &RebuttalSpec,
    configs: &[FamilyConfig],
) -> Result<LikelihoodRatio> {
    let net = session.net();
    let node = net.var_id(&spec.node)?;
    if net.attached_rebuttal(&spec.node).is_some() {
        return Err(Error::RebuttalExists(spec.node.clone()));
    }
    let family = session.family_posterior_indexed(node)?.probabilities();
    let k = net.cardinality(node);
    let mut value = 0.0;
    let mut decisive = Vec::new();
    for c in configs {
        let base = c.parent_config * k;
        if c.ratio.is_infinite() {
            let parent_posterior: f64 = family[base..base + k].iter().sum();
            if parent_posterior > 0.0 {
                decisive.push(c.clone());
                value = f64::INFINITY;
            }
        } else {
            value += family[base + c.outcome] * c.ratio;
        }
    }
    Ok(LikelihoodRatio {
        node: spec.node.clone(),
        value,
        decisive,
        other_rebuttals: count_other_rebuttals(net, &spec.node),
    })
}

/// `P^s(x_e | t_i) / P^s(x_e | f_i)` from the family posterior:
/// the sum over `(x_i, x_p(i))` of `P^a(x_i, x_p(i) | x_e)` times
/// `P^s(x_i | t_i) / P^a(x_i | x_p(i))`.
pub fn rebuttal_likelihood_ratio(
    session: &EvidenceSession<'_>,
    spec: &RebuttalSpec,
) -> Result<LikelihoodRatio> {
    let spec = spec.checked(session.net())?;
    let node = session.net().var_id(&spec.node)?;
    let configs = family_configs(session.net(), node, &spec.straw);
    sum_over(session, &spec, &configs)
}

/// Posterior odds of the rebuttal: likelihood ratio times prior odds.
pub fn rebuttal_posterior_odds(likelihood_ratio: f64, spec: &RebuttalSpec) -> f64 {
    debug_assert!(likelihood_ratio >= 0.0);
    if likelihood_ratio == 0.0 {
        return 0.0;
    }
    likelihood_ratio * spec.prior_odds()
}

pub fn odds_to_probability(odds: f64) -> f64 {
    if odds.is_infinite() {
        1.0
    } else {
        odds / (1.0 + odds)
    }
}

/// A pre-selected subset of family configurations to monitor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonitoredConfigSet {
    pub node: String,
    pub configs: Vec<FamilyConfig>,
    #[serde(serialize_with = "sig")]
    pub ratio_floor: f64,
}

fn sort_configs(configs: &mut [FamilyConfig]) {
    configs.sort_by(|a, b| {
        b.ratio
            .total_cmp(&a.ratio)
            .then(a.outcome.cmp(&b.outcome))
            .then(a.parent_config.cmp(&b.parent_config))
    });
}

impl MonitoredConfigSet {
    /// Every family configuration, in monitoring order.
    pub fn all(net: &BayesNet, spec: &RebuttalSpec) -> Result<Self> {
        let spec = spec.checked(net)?;
        let node = net.var_id(&spec.node)?;
        let mut configs = family_configs(net, node, &spec.straw);
        sort_configs(&mut configs);
        Ok(MonitoredConfigSet {
            node: spec.node,
            configs,
            ratio_floor: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }
}

/// Family configurations whose straw-to-assessed ratio is at least
/// `ratio_floor`, by descending ratio.
pub fn select_monitored_configs(
    net: &BayesNet,
    spec: &RebuttalSpec,
    ratio_floor: f64,
) -> Result<MonitoredConfigSet> {
    if ratio_floor.is_nan() || ratio_floor <= 1.0 {
        return Err(Error::InvalidRatioFloor(ratio_floor));
    }
    let mut set = MonitoredConfigSet::all(net, spec)?;
    set.configs.retain(|c| c.ratio >= ratio_floor);
    set.ratio_floor = ratio_floor;
    Ok(set)
}

/// The likelihood-ratio sum restricted to `set`; a lower bound on
/// [`rebuttal_likelihood_ratio`].
pub fn monitored_likelihood_ratio(
    session: &EvidenceSession<'_>,
    spec: &RebuttalSpec,
    set: &MonitoredConfigSet,
) -> Result<LikelihoodRatio> {
    if set.node != spec.node {
        return Err(Error::InvalidRebuttal {
            node: spec.node.clone(),
            reason: format!("monitored set belongs to `{}`", set.node),
        });
    }
    let spec = spec.checked(session.net())?;
    sum_over(session, &spec, &set.configs)
}
