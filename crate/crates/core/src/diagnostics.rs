//! Surprise tail checks, conflict traces and rare-hypothesis explanations.

use std::collections::BTreeSet;
use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::factor::ln_prob;
use crate::inference::{eliminate_indexed, log_probability_of, sample_outcomes, EvidenceSession};
use crate::network::BayesNet;
use crate::report::{sig, sig_opt};
use crate::straw::{conflict_cj, scope_joint, MixtureConfig, StrawModel, DEFAULT_ENUMERATION_CAP};

/// Exact prior probability that surprise exceeds `k` bits, against the
/// `2^-k` bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailReport {
    #[serde(rename = "K", serialize_with = "sig")]
    pub k: f64,
    #[serde(serialize_with = "sig")]
    pub pi_k: f64,
    #[serde(serialize_with = "sig")]
    pub bound: f64,
    pub satisfied: bool,
    /// Scope configurations with surprise above `k`.
    pub configurations_above: usize,
}

/// Per-configuration `(P^a, log2 P^s)` over the straw's scope, with the
/// configuration laid out in `scope` order.
fn scope_tables(
    net: &BayesNet,
    straw: &StrawModel,
    scope: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let joint = scope_joint(net, scope, DEFAULT_ENUMERATION_CAP)?;
    let same_vars = {
        let a: BTreeSet<_> = scope.iter().collect();
        let b: BTreeSet<_> = straw.scope().iter().collect();
        a == b
    };
    let mut assessed = Vec::with_capacity(joint.len());
    let mut log2_straw = Vec::with_capacity(joint.len());
    for i in 0..joint.len() {
        let config = joint.config_of(i);
        assessed.push(joint.probability(i));
        let ls = if same_vars {
            let reordered: Vec<usize> = straw
                .scope()
                .iter()
                .map(|v| config[scope.iter().position(|s| s == v).unwrap()])
                .collect();
            ln_prob(straw.probability_of_config(&reordered)) / LN_2
        } else {
            let pairs: Vec<(usize, usize)> = scope.iter().copied().zip(config).collect();
            straw.log2_probability(&pairs)?
        };
        log2_straw.push(ls);
    }
    Ok((assessed, log2_straw))
}

fn resolve(net: &BayesNet, names: &[&str]) -> Result<Vec<usize>> {
    names.iter().map(|n| net.var_id(n)).collect()
}

/// Enumerates the scope and sums `P^a` over configurations whose surprise
/// `c_S` is strictly greater than `k`.
pub fn surprise_tail(
    net: &BayesNet,
    straw: &StrawModel,
    evidence_scope: &[&str],
    k: f64,
) -> Result<TailReport> {
    let scope = resolve(net, evidence_scope)?;
    let (assessed, log2_straw) = scope_tables(net, straw, &scope)?;
    Ok(tail_from_tables(&assessed, &log2_straw, k))
}

/// Tail reports for several thresholds from a single enumeration.
pub fn surprise_tails(
    net: &BayesNet,
    straw: &StrawModel,
    evidence_scope: &[&str],
    ks: &[f64],
) -> Result<Vec<TailReport>> {
    let scope = resolve(net, evidence_scope)?;
    let (assessed, log2_straw) = scope_tables(net, straw, &scope)?;
    Ok(ks
        .iter()
        .map(|&k| tail_from_tables(&assessed, &log2_straw, k))
        .collect())
}

fn tail_from_tables(assessed: &[f64], log2_straw: &[f64], k: f64) -> TailReport {
    let mut pi_k = 0.0;
    let mut above = 0;
    for (&pa, &ls) in assessed.iter().zip(log2_straw) {
        if pa > 0.0 && ls - pa.log2() > k {
            pi_k += pa;
            above += 1;
        }
    }
    let bound = (-k).exp2();
    TailReport {
        k,
        pi_k,
        bound,
        satisfied: pi_k < bound,
        configurations_above: above,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureTailReport {
    #[serde(serialize_with = "sig")]
    pub epsilon: f64,
    #[serde(rename = "K", serialize_with = "sig")]
    pub k: f64,
    pub samples: usize,
    pub below: usize,
    #[serde(serialize_with = "sig")]
    pub frequency: f64,
    /// `(1 - epsilon)(1 - 2^-K)`.
    #[serde(serialize_with = "sig")]
    pub bound: f64,
    #[serde(serialize_with = "sig")]
    pub standard_error: f64,
    /// Three binomial standard errors at the bound.
    #[serde(serialize_with = "sig")]
    pub margin: f64,
    /// Exact probability under the assessed model that `c_S > K`.
    #[serde(serialize_with = "sig")]
    pub assessed_tail: f64,
    pub satisfied: bool,
}

fn same_spaces(a: &BayesNet, b: &BayesNet) -> Result<()> {
    if a.variables() != b.variables() {
        return Err(Error::MismatchedNetworks(
            "variables or outcome lists differ".into(),
        ));
    }
    Ok(())
}

/// Samples evidence from the mixture `(1 - epsilon) P^a + epsilon P^o` and
/// reports how often surprise stays below `k`.
pub fn corollary1_check(
    net_a: &BayesNet,
    net_o: &BayesNet,
    epsilon: f64,
    straw: &StrawModel,
    k: f64,
    n: usize,
    seed: u64,
) -> Result<MixtureTailReport> {
    same_spaces(net_a, net_o)?;
    let mixture = MixtureConfig::new(epsilon)?;
    if n == 0 {
        return Err(Error::InvalidThreshold(
            "sample count must be at least 1".into(),
        ));
    }
    let scope = straw.scope().to_vec();
    let (assessed, log2_straw) = scope_tables(net_a, straw, &scope)?;
    let surprise: Vec<f64> = assessed
        .iter()
        .zip(&log2_straw)
        .map(|(&pa, &ls)| ls - ln_prob(pa) / LN_2)
        .collect();
    let cards: Vec<usize> = scope.iter().map(|&v| net_a.cardinality(v)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = 0;
    for _ in 0..n {
        let alternative = rng.random::<f64>() < mixture.epsilon();
        let outcomes = sample_outcomes(if alternative { net_o } else { net_a }, &mut rng);
        let idx = scope
            .iter()
            .zip(&cards)
            .fold(0, |acc, (&v, &c)| acc * c + outcomes[v]);
        if surprise[idx] < k {
            below += 1;
        }
    }
    let frequency = below as f64 / n as f64;
    let bound = (1.0 - epsilon) * (1.0 - (-k).exp2());
    let standard_error = (bound * (1.0 - bound) / n as f64).sqrt();
    let margin = 3.0 * standard_error;
    Ok(MixtureTailReport {
        epsilon,
        k,
        samples: n,
        below,
        frequency,
        bound,
        standard_error,
        margin,
        assessed_tail: tail_from_tables(&assessed, &log2_straw, k).pi_k,
        satisfied: frequency > bound - margin,
    })
}

/// How much a candidate outcome raises the probability of the evidence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExplanationEntry {
    pub variable: String,
    pub outcome: String,
    /// `log2(P^a(x_e | v) / P^a(x_e))`.
    #[serde(serialize_with = "sig")]
    pub lift_bits: f64,
    #[serde(serialize_with = "sig")]
    pub prior: f64,
    #[serde(serialize_with = "sig")]
    pub posterior: f64,
}

/// Scores every outcome of every candidate by how much it raises the
/// probability of the observed evidence; highest lift first.
///
/// The lift is computed from `P^a(x_e, v)` directly rather than from the
/// posterior/prior ratio, so the two routes can be checked against each
/// other. Outcomes with zero prior probability are skipped.
pub fn explain_conflict(
    session: &EvidenceSession<'_>,
    candidates: &[&str],
) -> Result<Vec<ExplanationEntry>> {
    let net = session.net();
    let ids: BTreeSet<usize> = resolve(net, candidates)?.into_iter().collect();
    let evidence = session.evidence_pairs();
    let log_evidence = session.log_evidence_probability();
    let mut out = Vec::new();
    for &v in &ids {
        if session.observed_outcome(v).is_some() {
            return Err(Error::AlreadyObserved(net.name(v).to_string()));
        }
        let posterior = session.posterior_indexed(v)?;
        for o in 0..net.cardinality(v) {
            let prior = net.prior_marginal(v)[o];
            if prior == 0.0 {
                continue;
            }
            let mut joint = evidence.clone();
            joint.push((v, o));
            joint.sort_unstable();
            let log_joint = log_probability_of(net, &joint)?;
            out.push(ExplanationEntry {
                variable: net.name(v).to_string(),
                outcome: net.variable(v).outcomes[o].clone(),
                lift_bits: (log_joint - prior.ln() - log_evidence) / LN_2,
                prior,
                posterior: posterior.distribution[o],
            });
        }
    }
    out.sort_by(|a, b| {
        b.lift_bits
            .total_cmp(&a.lift_bits)
            .then_with(|| a.variable.cmp(&b.variable))
            .then_with(|| a.outcome.cmp(&b.outcome))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminatorScore {
    pub variable: String,
    /// Jeffreys divergence (bits) between the observable's distribution
    /// under the hypothesis and under its complement.
    #[serde(serialize_with = "sig")]
    pub score_bits: f64,
    /// Most probable outcome of the observable under the hypothesis.
    pub resolving_outcome: String,
    #[serde(serialize_with = "sig_opt")]
    pub conflict_before: Option<f64>,
    /// Conflict if `resolving_outcome` were observed next.
    #[serde(serialize_with = "sig_opt")]
    pub conflict_after: Option<f64>,
}

/// Symmetric KL divergence in bits; infinite when supports differ.
pub fn jeffreys_bits(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .map(|(&a, &b)| {
            if a == b {
                0.0
            } else if a == 0.0 || b == 0.0 {
                f64::INFINITY
            } else {
                (a - b) * (a.log2() - b.log2())
            }
        })
        .sum()
}

/// Ranks observables by how well they separate `hypothesis` from its
/// complement given the current evidence.
pub fn suggest_discriminator(
    session: &EvidenceSession<'_>,
    hypothesis: (&str, &str),
    observables: &[&str],
) -> Result<Vec<DiscriminatorScore>> {
    let net = session.net();
    let h = net.var_id(hypothesis.0)?;
    let hv = net.outcome_id(h, hypothesis.1)?;
    let degenerate = |reason: &str| Error::DegenerateHypothesis {
        variable: hypothesis.0.to_string(),
        outcome: hypothesis.1.to_string(),
        reason: reason.to_string(),
    };
    if session.observed_outcome(h).is_some() {
        return Err(Error::AlreadyObserved(hypothesis.0.to_string()));
    }
    let post_h = session.posterior_indexed(h)?.distribution[hv];
    if post_h == 0.0 {
        return Err(degenerate("zero posterior probability"));
    }
    if post_h == 1.0 {
        return Err(degenerate("its complement has zero posterior probability"));
    }
    let evidence = session.evidence_pairs();
    let conflict_before = if session.is_empty() {
        None
    } else {
        Some(conflict_cj(session)?)
    };

    let ids: BTreeSet<usize> = resolve(net, observables)?.into_iter().collect();
    let mut out = Vec::with_capacity(ids.len());
    for &f in &ids {
        if f == h {
            return Err(degenerate(
                "the hypothesis variable cannot be its own observable",
            ));
        }
        if session.observed_outcome(f).is_some() {
            return Err(Error::AlreadyObserved(net.name(f).to_string()));
        }
        let table = eliminate_indexed(net, &[f, h], &evidence)?;
        let kh = net.cardinality(h);
        let kf = net.cardinality(f);
        let mut given_h = vec![0.0; kf];
        let mut given_not = vec![0.0; kf];
        for (x, (gh, gn)) in given_h.iter_mut().zip(given_not.iter_mut()).enumerate() {
            for y in 0..kh {
                let p = table.probability(x * kh + y);
                if y == hv {
                    *gh += p;
                } else {
                    *gn += p;
                }
            }
        }
        let sh: f64 = given_h.iter().sum();
        let sn: f64 = given_not.iter().sum();
        given_h.iter_mut().for_each(|p| *p /= sh);
        given_not.iter_mut().for_each(|p| *p /= sn);

        let best = given_h
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let mut next = session.clone();
        let conflict_after = match next.absorb_indexed(f, best) {
            Ok(()) => Some(conflict_cj(&next)?),
            Err(Error::ImpossibleEvidence(_)) => None,
            Err(e) => return Err(e),
        };
        out.push(DiscriminatorScore {
            variable: net.name(f).to_string(),
            score_bits: jeffreys_bits(&given_h, &given_not),
            resolving_outcome: net.variable(f).outcomes[best].clone(),
            conflict_before,
            conflict_after,
        });
    }
    out.sort_by(|a, b| {
        b.score_bits
            .total_cmp(&a.score_bits)
            .then_with(|| a.variable.cmp(&b.variable))
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub variable: String,
    pub outcome: String,
    /// Probability of this item given the items before it.
    #[serde(serialize_with = "sig")]
    pub conditional: f64,
    #[serde(serialize_with = "sig")]
    pub prior: f64,
    /// Conflict of the evidence up to and including this item.
    #[serde(serialize_with = "sig")]
    pub conflict_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ConflictTrace {
    pub entries: Vec<TraceEntry>,
}

impl ConflictTrace {
    pub fn final_conflict(&self) -> Option<f64> {
        self.entries.last().map(|e| e.conflict_bits)
    }
}

/// Running conflict after each absorbed item, rebuilt from the session's
/// cached conditionals and the original prior marginals.
pub fn conflict_trace(session: &EvidenceSession<'_>) -> ConflictTrace {
    let net = session.net();
    let mut log2_priors = 0.0;
    let mut log2_joint = 0.0;
    let entries = session
        .observations()
        .iter()
        .zip(session.conditionals())
        .map(|(obs, &conditional)| {
            let prior = net.prior_marginal(obs.variable)[obs.outcome];
            log2_priors += ln_prob(prior) / LN_2;
            log2_joint += conditional.ln() / LN_2;
            TraceEntry {
                variable: net.name(obs.variable).to_string(),
                outcome: net.variable(obs.variable).outcomes[obs.outcome].clone(),
                conditional,
                prior,
                conflict_bits: log2_priors - log2_joint,
            }
        })
        .collect();
    ConflictTrace { entries }
}
