//! Straw models and the indicators built on them: surprise, conflict,
//! expected conflict, and the mixture-model context weights.
//!
//! All indicators are base-2 log-ratios (bits). A straw model is only ever
//! used to flag model failure; beliefs always come from the assessed net.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::{ln_prob, Factor};
use crate::inference::{eliminate_indexed, EvidenceSession, PosteriorTable};
use crate::network::{normalize_row, BayesNet};

/// Largest scope (in configurations) that enumeration-based operations accept.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrawKind {
    IndependenceOfPriors,
    ExplicitTable,
}

#[derive(Debug, Clone, PartialEq)]
enum Evaluator {
    /// Original prior marginal of every scope variable.
    Independence(Vec<Vec<f64>>),
    /// Joint table over the scope, last scope variable fastest.
    Table(Vec<f64>),
}

/// An alternative evidence distribution `P^s` over a scope of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct StrawModel {
    scope: Vec<usize>,
    names: Vec<String>,
    cards: Vec<usize>,
    evaluator: Evaluator,
}

fn resolve_scope(net: &BayesNet, scope: &[&str]) -> Result<Vec<usize>> {
    let mut ids = Vec::with_capacity(scope.len());
    for name in scope {
        let id = net.var_id(name)?;
        if ids.contains(&id) {
            return Err(Error::DuplicateVariable(name.to_string()));
        }
        ids.push(id);
    }
    Ok(ids)
}

fn scope_size(net: &BayesNet, scope: &[usize]) -> u128 {
    scope.iter().fold(1u128, |acc, &v| {
        acc.saturating_mul(net.cardinality(v) as u128)
    })
}

/// Joint assessed distribution over `scope`, refusing scopes above `cap`.
pub(crate) fn scope_joint(net: &BayesNet, scope: &[usize], cap: u128) -> Result<Factor> {
    let configs = scope_size(net, scope);
    if configs > cap {
        return Err(Error::ScopeTooLarge { configs, cap });
    }
    eliminate_indexed(net, scope, &[])
}

impl StrawModel {
    fn with(net: &BayesNet, scope: Vec<usize>, evaluator: Evaluator) -> Self {
        StrawModel {
            names: scope.iter().map(|&v| net.name(v).to_string()).collect(),
            cards: scope.iter().map(|&v| net.cardinality(v)).collect(),
            scope,
            evaluator,
        }
    }

    pub fn kind(&self) -> StrawKind {
        match self.evaluator {
            Evaluator::Independence(_) => StrawKind::IndependenceOfPriors,
            Evaluator::Table(_) => StrawKind::ExplicitTable,
        }
    }

    pub fn scope(&self) -> &[usize] {
        &self.scope
    }

    pub fn scope_names(&self) -> &[String] {
        &self.names
    }

    pub fn num_configs(&self) -> u128 {
        self.cards.iter().map(|&k| k as u128).product()
    }

    /// `P^s` of a full scope configuration (scope order).
    pub fn probability_of_config(&self, config: &[usize]) -> f64 {
        match &self.evaluator {
            Evaluator::Independence(m) => m.iter().zip(config).map(|(row, &c)| row[c]).product(),
            Evaluator::Table(t) => {
                let idx = config
                    .iter()
                    .zip(&self.cards)
                    .fold(0, |acc, (&c, &k)| acc * k + c);
                t[idx]
            }
        }
    }

    /// `log2 P^s(x_e)` for evidence over a subset of the scope.
    pub fn log2_probability(&self, evidence: &[(usize, usize)]) -> Result<f64> {
        let mut fixed = vec![None; self.scope.len()];
        for &(v, o) in evidence {
            let pos = self
                .scope
                .iter()
                .position(|&s| s == v)
                .ok_or_else(|| Error::OutsideScope(format!("#{v}")))?;
            fixed[pos] = Some(o);
        }
        match &self.evaluator {
            Evaluator::Independence(m) => Ok(fixed
                .iter()
                .zip(m)
                .filter_map(|(f, row)| f.map(|o| ln_prob(row[o]) / std::f64::consts::LN_2))
                .sum()),
            Evaluator::Table(t) => {
                let mut total = 0.0;
                let mut config = vec![0usize; self.cards.len()];
                for &p in t {
                    if fixed
                        .iter()
                        .zip(&config)
                        .all(|(f, &c)| f.is_none_or(|o| o == c))
                    {
                        total += p;
                    }
                    for d in (0..config.len()).rev() {
                        config[d] += 1;
                        if config[d] < self.cards[d] {
                            break;
                        }
                        config[d] = 0;
                    }
                }
                Ok(ln_prob(total) / std::f64::consts::LN_2)
            }
        }
    }
}

/// The independence model: product of the original prior marginals.
pub fn independence_straw(net: &BayesNet, scope: &[&str]) -> Result<StrawModel> {
    let ids = resolve_scope(net, scope)?;
    Ok(independence_straw_indexed(net, &ids))
}

pub(crate) fn independence_straw_indexed(net: &BayesNet, scope: &[usize]) -> StrawModel {
    let marginals = scope
        .iter()
        .map(|&v| net.prior_marginal(v).to_vec())
        .collect();
    StrawModel::with(net, scope.to_vec(), Evaluator::Independence(marginals))
}

/// A straw given as an explicit joint table over `scope` (last variable
/// fastest). Tables off unit sum by more than 1e-6 are rejected.
pub fn explicit_straw(net: &BayesNet, scope: &[&str], table: Vec<f64>) -> Result<StrawModel> {
    let ids = resolve_scope(net, scope)?;
    if ids.is_empty() {
        return Err(Error::InvalidStraw("empty scope".into()));
    }
    let size = scope_size(net, &ids);
    if size > DEFAULT_ENUMERATION_CAP {
        return Err(Error::ScopeTooLarge {
            configs: size,
            cap: DEFAULT_ENUMERATION_CAP,
        });
    }
    let table = normalize_row("straw", 0, &table, size as usize).map_err(|e| match e {
        Error::RowLength {
            expected, found, ..
        } => Error::InvalidStraw(format!(
            "table has {found} entries, scope has {expected} configurations"
        )),
        Error::RowSum { sum, .. } => Error::InvalidStraw(format!("table sums to {sum}")),
        Error::InvalidProbability { value, .. } => {
            Error::InvalidStraw(format!("entry {value} is not a probability"))
        }
        other => other,
    })?;
    Ok(StrawModel::with(net, ids, Evaluator::Table(table)))
}

/// A straw equal to the assessed distribution restricted to `scope`.
pub fn assessed_straw(net: &BayesNet, scope: &[&str]) -> Result<StrawModel> {
    let ids = resolve_scope(net, scope)?;
    let joint = scope_joint(net, &ids, DEFAULT_ENUMERATION_CAP)?;
    Ok(StrawModel::with(
        net,
        ids,
        Evaluator::Table(joint.probabilities()),
    ))
}

/// `log2(straw / assessed)` with explicit infinities for zeros.
pub fn surprise_bits(straw_probability: f64, assessed_probability: f64) -> f64 {
    (ln_prob(straw_probability) - ln_prob(assessed_probability)) / std::f64::consts::LN_2
}

/// Surprise index `c_S = log2(P^s(x_e) / P^a(x_e))` of the session's
/// evidence. Positive values mean the straw fits the evidence better.
pub fn surprise_cs(straw: &StrawModel, session: &EvidenceSession<'_>) -> Result<f64> {
    let net = session.net();
    for (&v, name) in straw.scope.iter().zip(&straw.names) {
        if v >= net.num_variables() || net.name(v) != name {
            return Err(Error::MismatchedNetworks(format!(
                "straw scope variable `{name}` not found at the same position"
            )));
        }
    }
    let evidence = session.evidence_pairs();
    if let Some(&(v, _)) = evidence.iter().find(|(v, _)| !straw.scope.contains(v)) {
        return Err(Error::OutsideScope(net.name(v).to_string()));
    }
    let log2_straw = straw.log2_probability(&evidence)?;
    Ok(log2_straw - session.log_evidence_probability() / std::f64::consts::LN_2)
}

/// Conflict `c_J`: surprise against the independence straw over the
/// observed variables.
pub fn conflict_cj(session: &EvidenceSession<'_>) -> Result<f64> {
    if session.is_empty() {
        return Err(Error::NoEvidence);
    }
    let observed: Vec<usize> = session.observations().iter().map(|o| o.variable).collect();
    surprise_cs(
        &independence_straw_indexed(session.net(), &observed),
        session,
    )
}

/// `E[c_J]` over the scope, i.e. minus the KL divergence (bits) from the
/// assessed joint to the independence model. Never positive.
pub fn expected_conflict(net: &BayesNet, scope: &[&str]) -> Result<f64> {
    expected_conflict_with_cap(net, scope, DEFAULT_ENUMERATION_CAP)
}

pub fn expected_conflict_with_cap(net: &BayesNet, scope: &[&str], cap: u128) -> Result<f64> {
    let ids = resolve_scope(net, scope)?;
    let joint = scope_joint(net, &ids, cap)?;
    let straw = independence_straw_indexed(net, &ids);
    let mut kl = 0.0;
    for i in 0..joint.len() {
        let p = joint.probability(i);
        if p > 0.0 {
            let q = straw.probability_of_config(&joint.config_of(i));
            kl += p * (p.ln() - q.ln());
        }
    }
    Ok((-kl / std::f64::consts::LN_2).min(0.0))
}

/// Prior probability `epsilon` that the assumed context fails.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureConfig {
    epsilon: f64,
}

impl MixtureConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidEpsilon(epsilon));
        }
        Ok(MixtureConfig { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn prior_odds(&self) -> f64 {
        self.epsilon / (1.0 - self.epsilon)
    }
}

/// Posterior probability `epsilon*` of the alternative context given the
/// evidence probabilities under the assessed and alternative models.
pub fn mixture_posterior_weight(
    config: MixtureConfig,
    pa_evidence: f64,
    po_evidence: f64,
) -> Result<f64> {
    if !(pa_evidence >= 0.0 && po_evidence >= 0.0) {
        return Err(Error::InvalidThreshold(
            "evidence probabilities must be non-negative".into(),
        ));
    }
    let eps = config.epsilon;
    let alt = eps * po_evidence;
    let denom = (1.0 - eps) * pa_evidence + alt;
    if denom == 0.0 {
        return Err(Error::ZeroEvidence);
    }
    Ok(alt / denom)
}

/// Convex combination `(1 - w) P^a(X | x_e) + w P^o(X | x_e)`.
pub fn mixture_posterior(
    weight: f64,
    pa_posterior: &PosteriorTable,
    po_posterior: &PosteriorTable,
) -> Result<PosteriorTable> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(Error::InvalidWeight(weight));
    }
    if pa_posterior.variable != po_posterior.variable
        || pa_posterior.outcomes != po_posterior.outcomes
    {
        return Err(Error::MismatchedOutcomes(format!(
            "`{}` vs `{}`",
            pa_posterior.variable, po_posterior.variable
        )));
    }
    if weight == 0.0 {
        return Ok(pa_posterior.clone());
    }
    if weight == 1.0 {
        return Ok(po_posterior.clone());
    }
    let mixed: Vec<f64> = pa_posterior
        .distribution
        .iter()
        .zip(&po_posterior.distribution)
        .map(|(a, o)| (1.0 - weight) * a + weight * o)
        .collect();
    let total: f64 = mixed.iter().sum();
    Ok(PosteriorTable {
        variable: pa_posterior.variable.clone(),
        outcomes: pa_posterior.outcomes.clone(),
        distribution: mixed.iter().map(|p| p / total).collect(),
    })
}
