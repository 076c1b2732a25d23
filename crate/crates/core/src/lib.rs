//! Bayesian-network inference with model-failure diagnostics.
//!
//! The assessed model lives in a [`BayesNet`]; evidence is absorbed one item
//! at a time by an [`EvidenceSession`], which keeps the running joint
//! evidence probability. On top of that sit the indicators: conflict and
//! surprise against straw models ([`straw`]), rebuttal likelihood ratios
//! ([`rebuttal`]), and tail checks and rare-hypothesis explanations
//! ([`diagnostics`]).

pub mod demo_nets;
pub mod diagnostics;
pub mod error;
pub mod factor;
pub mod format;
pub mod inference;
pub mod network;
pub mod random;
pub mod rebuttal;
pub mod report;
pub mod straw;
pub mod worked_example;

pub use diagnostics::{
    conflict_trace, corollary1_check, explain_conflict, suggest_discriminator, surprise_tail,
    surprise_tails, ConflictTrace, DiscriminatorScore, ExplanationEntry, MixtureTailReport,
    TailReport, TraceEntry,
};
pub use error::{Error, Result};
pub use factor::Factor;
pub use format::{
    parse_evidence_stream, parse_network, parse_straw, EvidenceItem, NetworkDocument,
};
pub use inference::{eliminate, forward_sample, EvidenceSession, PosteriorTable};
pub use network::{Assignment, BayesNet, NodeModel, Variable};
pub use rebuttal::{
    attach_rebuttal, monitored_likelihood_ratio, rebuttal_likelihood_ratio,
    rebuttal_posterior_odds, select_monitored_configs, LikelihoodRatio, MonitoredConfigSet,
    RebuttalSpec,
};
pub use straw::{
    assessed_straw, conflict_cj, expected_conflict, explicit_straw, independence_straw,
    mixture_posterior, mixture_posterior_weight, surprise_cs, MixtureConfig, StrawKind, StrawModel,
};
