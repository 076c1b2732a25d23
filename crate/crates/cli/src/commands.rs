//! One function per subcommand. Each builds a serializable report and hands
//! it to the renderer for the requested format.

use bnsentinel::diagnostics::{
    conflict_trace, explain_conflict, suggest_discriminator, surprise_tails,
};
use bnsentinel::rebuttal::{odds_to_probability, FamilyConfig};
use bnsentinel::report::{sig, sig_opt};
use bnsentinel::worked_example;
use bnsentinel::{
    conflict_cj, independence_straw, parse_straw, rebuttal_likelihood_ratio,
    rebuttal_posterior_odds, BayesNet, DiscriminatorScore, Error, EvidenceItem, EvidenceSession,
    ExplanationEntry, PosteriorTable, StrawKind, TailReport,
};
use serde::Serialize;

use crate::render;
use crate::{load_evidence, load_network, read_file, CliError, Finished, OutputFormat, RunConfig};

fn network(config: &RunConfig) -> Result<BayesNet, CliError> {
    load_network(
        config
            .network_path
            .as_deref()
            .expect("command takes a network"),
    )
}

fn finish<T: Serialize>(
    config: &RunConfig,
    report: &T,
    text: impl FnOnce(&T) -> String,
    alert: bool,
) -> Result<Finished, CliError> {
    let body = match config.format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("reports always serialize");
            s.push('\n');
            s
        }
        OutputFormat::Text => text(report),
    };
    Ok(Finished { body, alert })
}

fn session_from<'a>(
    net: &'a BayesNet,
    items: &[EvidenceItem],
) -> Result<EvidenceSession<'a>, CliError> {
    let mut session = EvidenceSession::new(net);
    for item in items {
        session.absorb(&item.variable, &item.outcome)?;
    }
    Ok(session)
}

#[derive(Debug, Serialize)]
pub(crate) struct ValidateReport {
    pub valid: bool,
    pub variables: usize,
    pub edges: usize,
    pub rebuttals: usize,
    pub topological_order: Vec<String>,
}

pub(crate) fn validate(config: &RunConfig) -> Result<Finished, CliError> {
    let net = network(config)?;
    let report = ValidateReport {
        valid: true,
        variables: net.num_variables(),
        edges: (0..net.num_variables()).map(|v| net.parents(v).len()).sum(),
        rebuttals: net.rebuttals().len(),
        topological_order: net
            .topological_order()
            .iter()
            .map(|&v| net.name(v).to_string())
            .collect(),
    };
    finish(config, &report, render::validate, false)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub(crate) struct InferReport {
    pub evidence: Vec<EvidenceItem>,
    #[serde(serialize_with = "sig")]
    pub evidence_probability: f64,
    #[serde(serialize_with = "sig")]
    pub log2_evidence_probability: f64,
    /// Absent when there is no evidence.
    #[serde(serialize_with = "sig_opt")]
    pub conflict_bits: Option<f64>,
    pub posteriors: Vec<PosteriorTable>,
}

fn infer_report(session: &EvidenceSession<'_>, query: &[String]) -> Result<InferReport, CliError> {
    let net = session.net();
    let names: Vec<String> = if query.is_empty() {
        net.variables().iter().map(|v| v.name.clone()).collect()
    } else {
        query.to_vec()
    };
    let posteriors = names
        .iter()
        .map(|n| session.posterior(n))
        .collect::<Result<Vec<_>, Error>>()?;
    let evidence = session
        .observations()
        .iter()
        .map(|o| EvidenceItem {
            variable: net.name(o.variable).to_string(),
            outcome: net.variable(o.variable).outcomes[o.outcome].clone(),
        })
        .collect();
    Ok(InferReport {
        evidence,
        evidence_probability: session.evidence_probability(),
        log2_evidence_probability: session.log_evidence_probability() / std::f64::consts::LN_2,
        conflict_bits: if session.is_empty() {
            None
        } else {
            Some(conflict_cj(session)?)
        },
        posteriors,
    })
}

pub(crate) fn infer(config: &RunConfig, query: &[String]) -> Result<Finished, CliError> {
    let net = network(config)?;
    let items = load_evidence(config.evidence_path.as_deref())?;
    let session = session_from(&net, &items)?;
    let report = infer_report(&session, query)?;
    finish(config, &report, render::infer, false)
}

#[derive(Debug, Serialize)]
pub(crate) struct RebuttalStatus {
    pub node: String,
    #[serde(serialize_with = "sig")]
    pub likelihood_ratio: f64,
    #[serde(serialize_with = "sig")]
    pub posterior_odds: f64,
    #[serde(serialize_with = "sig")]
    pub posterior_probability: f64,
    /// False when other rebuttals exist, making the ratio approximate.
    pub exact: bool,
    pub decisive: Vec<FamilyConfig>,
}

#[derive(Debug, Serialize)]
pub(crate) struct MonitorStep {
    pub index: usize,
    pub variable: String,
    pub outcome: String,
    #[serde(serialize_with = "sig")]
    pub conditional: f64,
    #[serde(serialize_with = "sig")]
    pub prior: f64,
    #[serde(serialize_with = "sig")]
    pub conflict_bits: f64,
    pub rebuttals: Vec<RebuttalStatus>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) enum AlertKind {
    Conflict,
    Rebuttal,
}

#[derive(Debug, Serialize)]
pub(crate) struct Alert {
    /// 1-based position of the evidence item that raised the alert.
    pub index: usize,
    pub kind: AlertKind,
    pub subject: String,
    #[serde(serialize_with = "sig")]
    pub value: f64,
    #[serde(serialize_with = "sig")]
    pub threshold: f64,
}

#[derive(Debug, Serialize)]
pub(crate) struct MonitorReport {
    #[serde(serialize_with = "sig")]
    pub conflict_threshold_bits: f64,
    #[serde(serialize_with = "sig")]
    pub rebuttal_odds_threshold: f64,
    pub steps: Vec<MonitorStep>,
    pub alerts: Vec<Alert>,
    #[serde(rename = "final")]
    pub final_state: InferReport,
}

pub(crate) fn monitor(config: &RunConfig) -> Result<Finished, CliError> {
    let net = network(config)?;
    let items = load_evidence(config.evidence_path.as_deref())?;
    let mut session = EvidenceSession::new(&net);
    let mut rebuttals_per_step = Vec::with_capacity(items.len());
    for item in &items {
        session.absorb(&item.variable, &item.outcome)?;
        let statuses = net
            .rebuttals()
            .iter()
            .map(|spec| {
                let lr = rebuttal_likelihood_ratio(&session, spec)?;
                let odds = rebuttal_posterior_odds(lr.value, spec);
                Ok(RebuttalStatus {
                    node: spec.node.clone(),
                    likelihood_ratio: lr.value,
                    posterior_odds: odds,
                    posterior_probability: odds_to_probability(odds),
                    exact: lr.is_exact(),
                    decisive: lr.decisive,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        rebuttals_per_step.push(statuses);
    }

    let trace = conflict_trace(&session);
    let mut alerts = Vec::new();
    let steps: Vec<MonitorStep> = trace
        .entries
        .into_iter()
        .zip(rebuttals_per_step)
        .enumerate()
        .map(|(i, (entry, rebuttals))| {
            let index = i + 1;
            if entry.conflict_bits > config.conflict_bits {
                alerts.push(Alert {
                    index,
                    kind: AlertKind::Conflict,
                    subject: entry.variable.clone(),
                    value: entry.conflict_bits,
                    threshold: config.conflict_bits,
                });
            }
            for r in &rebuttals {
                if r.posterior_odds > config.rebuttal_odds {
                    alerts.push(Alert {
                        index,
                        kind: AlertKind::Rebuttal,
                        subject: r.node.clone(),
                        value: r.posterior_odds,
                        threshold: config.rebuttal_odds,
                    });
                }
            }
            MonitorStep {
                index,
                variable: entry.variable,
                outcome: entry.outcome,
                conditional: entry.conditional,
                prior: entry.prior,
                conflict_bits: entry.conflict_bits,
                rebuttals,
            }
        })
        .collect();

    let report = MonitorReport {
        conflict_threshold_bits: config.conflict_bits,
        rebuttal_odds_threshold: config.rebuttal_odds,
        steps,
        alerts,
        final_state: infer_report(&session, &[])?,
    };
    let alert = !report.alerts.is_empty();
    finish(config, &report, render::monitor, alert)
}

#[derive(Debug, Serialize)]
pub(crate) struct DiagnoseReport {
    pub evidence: Vec<EvidenceItem>,
    #[serde(serialize_with = "sig_opt")]
    pub conflict_bits: Option<f64>,
    pub explanations: Vec<ExplanationEntry>,
    /// Highest-lift explanation, used to rank the observables.
    pub hypothesis: Option<EvidenceItem>,
    pub discriminators: Vec<DiscriminatorScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub(crate) fn diagnose(
    config: &RunConfig,
    candidates: &[String],
    observables: &[String],
) -> Result<Finished, CliError> {
    let net = network(config)?;
    let items = load_evidence(config.evidence_path.as_deref())?;
    let session = session_from(&net, &items)?;
    let candidate_refs: Vec<&str> = candidates.iter().map(String::as_str).collect();
    let explanations = explain_conflict(&session, &candidate_refs)?;
    let hypothesis = explanations.first().map(|e| EvidenceItem {
        variable: e.variable.clone(),
        outcome: e.outcome.clone(),
    });

    let mut note = None;
    let mut discriminators = Vec::new();
    if let Some(h) = &hypothesis {
        let observables: Vec<String> = if observables.is_empty() {
            net.variables()
                .iter()
                .enumerate()
                .filter(|(id, v)| session.observed_outcome(*id).is_none() && v.name != h.variable)
                .map(|(_, v)| v.name.clone())
                .collect()
        } else {
            observables.to_vec()
        };
        let refs: Vec<&str> = observables.iter().map(String::as_str).collect();
        match suggest_discriminator(&session, (&h.variable, &h.outcome), &refs) {
            Ok(d) => discriminators = d,
            Err(e @ Error::DegenerateHypothesis { .. }) => note = Some(e.to_string()),
            Err(e) => return Err(e.into()),
        }
    }

    let report = DiagnoseReport {
        evidence: items,
        conflict_bits: if session.is_empty() {
            None
        } else {
            Some(conflict_cj(&session)?)
        },
        explanations,
        hypothesis,
        discriminators,
        note,
    };
    finish(config, &report, render::diagnose, false)
}

#[derive(Debug, Serialize)]
pub(crate) struct TailBoundReport {
    pub straw: StrawKind,
    pub scope: Vec<String>,
    pub tails: Vec<TailReport>,
    pub all_satisfied: bool,
}

pub(crate) fn verify_tail_bound(
    config: &RunConfig,
    ks: &[f64],
    scope: &[String],
) -> Result<Finished, CliError> {
    if let Some(k) = ks.iter().find(|k| !k.is_finite()) {
        return Err(CliError::Core(Error::InvalidThreshold(format!(
            "K must be finite, got {k}"
        ))));
    }
    let net = network(config)?;
    let scope: Vec<String> = if !scope.is_empty() {
        scope.to_vec()
    } else if let Some(path) = &config.straw_path {
        parse_straw(&net, &read_file(path)?)?.scope_names().to_vec()
    } else {
        net.variables().iter().map(|v| v.name.clone()).collect()
    };
    let refs: Vec<&str> = scope.iter().map(String::as_str).collect();
    let straw = match &config.straw_path {
        Some(path) => parse_straw(&net, &read_file(path)?)?,
        None => independence_straw(&net, &refs)?,
    };
    let tails = surprise_tails(&net, &straw, &refs, ks)?;
    let report = TailBoundReport {
        straw: straw.kind(),
        all_satisfied: tails.iter().all(|t| t.satisfied),
        scope,
        tails,
    };
    finish(config, &report, render::tail_bound, false)
}

pub(crate) fn reproduce_worked_example(config: &RunConfig) -> Result<Finished, CliError> {
    let report = worked_example::reproduce()?;
    finish(config, &report, render::worked_example, false)
}

pub(crate) fn sample(config: &RunConfig, count: usize) -> Result<Finished, CliError> {
    let net = network(config)?;
    let mut body = String::new();
    for a in bnsentinel::forward_sample(&net, config.seed, count) {
        body.push_str(&serde_json::to_string(&a).expect("assignments always serialize"));
        body.push('\n');
    }
    Ok(Finished { body, alert: false })
}
