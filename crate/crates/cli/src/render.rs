//! Plain-text rendering. Probabilities and bit values use four decimals.

use std::fmt::Write;

use bnsentinel::report::text4;
use bnsentinel::worked_example::WorkedExampleReport;
use bnsentinel::PosteriorTable;

use crate::commands::{
    AlertKind, DiagnoseReport, InferReport, MonitorReport, TailBoundReport, ValidateReport,
};

/// Four decimals with trailing zeros dropped, so 0.5500 prints as 0.55.
fn short(x: f64) -> String {
    let s = text4(x);
    if s.contains('.') && x.is_finite() {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), text4)
}

pub(crate) fn validate(r: &ValidateReport) -> String {
    format!(
        "valid: {} variables, {} edges, {} rebuttal annotations\ntopological order: {}\n",
        r.variables,
        r.edges,
        r.rebuttals,
        r.topological_order.join(" ")
    )
}

fn posteriors(out: &mut String, tables: &[PosteriorTable]) {
    let width = tables.iter().map(|t| t.variable.len()).max().unwrap_or(0);
    for t in tables {
        let cells: Vec<String> = t
            .outcomes
            .iter()
            .zip(&t.distribution)
            .map(|(o, p)| format!("{o}={}", text4(*p)))
            .collect();
        let _ = writeln!(out, "  {:width$}  {}", t.variable, cells.join("  "));
    }
}

fn infer_body(out: &mut String, r: &InferReport) {
    if r.evidence.is_empty() {
        let _ = writeln!(out, "no evidence; prior marginals:");
    } else {
        let items: Vec<String> = r
            .evidence
            .iter()
            .map(|e| format!("{}={}", e.variable, e.outcome))
            .collect();
        let _ = writeln!(out, "evidence: {}", items.join(", "));
        let _ = writeln!(
            out,
            "P(evidence) = {:.6e}  (log2 {})",
            r.evidence_probability,
            text4(r.log2_evidence_probability)
        );
        let _ = writeln!(out, "conflict c_J = {} bits", opt(r.conflict_bits));
        let _ = writeln!(out, "posteriors:");
    }
    posteriors(out, &r.posteriors);
}

pub(crate) fn infer(r: &InferReport) -> String {
    let mut out = String::new();
    infer_body(&mut out, r);
    out
}

pub(crate) fn monitor(r: &MonitorReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>4}  {:<24} {:>12} {:>10} {:>10}",
        "#", "item", "conditional", "prior", "c_J bits"
    );
    for s in &r.steps {
        let _ = writeln!(
            out,
            "{:>4}  {:<24} {:>12} {:>10} {:>10}",
            s.index,
            format!("{}={}", s.variable, s.outcome),
            text4(s.conditional),
            text4(s.prior),
            text4(s.conflict_bits)
        );
        for b in &s.rebuttals {
            let approx = if b.exact { "" } else { " (approximate)" };
            let _ = writeln!(
                out,
                "        rebuttal {}: ratio {}  odds {}  P {}{approx}",
                b.node,
                text4(b.likelihood_ratio),
                text4(b.posterior_odds),
                text4(b.posterior_probability)
            );
        }
    }
    if r.alerts.is_empty() {
        let _ = writeln!(out, "no alerts");
    } else {
        for a in &r.alerts {
            let what = match a.kind {
                AlertKind::Conflict => "conflict",
                AlertKind::Rebuttal => "rebuttal odds",
            };
            let _ = writeln!(
                out,
                "ALERT at item {}: {what} {} = {} > {}",
                a.index,
                a.subject,
                text4(a.value),
                text4(a.threshold)
            );
        }
    }
    let _ = writeln!(out, "final state:");
    infer_body(&mut out, &r.final_state);
    out
}

pub(crate) fn diagnose(r: &DiagnoseReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "conflict c_J = {} bits", opt(r.conflict_bits));
    let _ = writeln!(out, "explanations (lift bits, prior, posterior):");
    for e in &r.explanations {
        let _ = writeln!(
            out,
            "  {}={}  {}  {}  {}",
            e.variable,
            e.outcome,
            text4(e.lift_bits),
            text4(e.prior),
            text4(e.posterior)
        );
    }
    if let Some(h) = &r.hypothesis {
        let _ = writeln!(
            out,
            "observables for {}={} (Jeffreys bits):",
            h.variable, h.outcome
        );
        for d in &r.discriminators {
            let _ = writeln!(
                out,
                "  {}  {}  expect {}  c_J {} -> {}",
                d.variable,
                text4(d.score_bits),
                d.resolving_outcome,
                opt(d.conflict_before),
                opt(d.conflict_after)
            );
        }
    }
    if let Some(n) = &r.note {
        let _ = writeln!(out, "note: {n}");
    }
    out
}

pub(crate) fn tail_bound(r: &TailBoundReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scope: {}", r.scope.join(" "));
    let _ = writeln!(out, "{:>8} {:>12} {:>12}  ok", "K", "pi_K", "2^-K");
    for t in &r.tails {
        let _ = writeln!(
            out,
            "{:>8} {:>12} {:>12}  {}",
            short(t.k),
            text4(t.pi_k),
            text4(t.bound),
            if t.satisfied { "yes" } else { "NO" }
        );
    }
    let _ = writeln!(
        out,
        "{}",
        if r.all_satisfied {
            "all tails below bound"
        } else {
            "BOUND VIOLATED"
        }
    );
    out
}

fn table(out: &mut String, title: &str, r: &WorkedExampleReport, cells: &[Vec<f64>]) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "{:>6} {}",
        "",
        r.y_outcomes
            .iter()
            .map(|y| format!("{y:>9}"))
            .collect::<String>()
    );
    for (x, row) in r.x_outcomes.iter().zip(cells) {
        let _ = writeln!(
            out,
            "{x:>6} {}",
            row.iter()
                .map(|v| format!("{:>9}", text4(*v)))
                .collect::<String>()
        );
    }
}

pub(crate) fn worked_example(r: &WorkedExampleReport) -> String {
    let mut out = String::new();
    table(&mut out, "P(X, Y)", r, &r.joint);
    let _ = writeln!(out);
    table(&mut out, "P(X) P(Y)", r, &r.product_of_marginals);
    let _ = writeln!(out);
    table(&mut out, "c_J(x, y) bits", r, &r.conflict);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "P(c_J > 0) = {}",
        short(r.positive_conflict_probability)
    );
    let _ = writeln!(out, "E[c_J] = {} bits", text4(r.expected_conflict));
    for d in &r.discrepancies {
        let _ = writeln!(
            out,
            "note: c_J({}, {}) evaluates to {}, not the printed {}",
            d.x,
            d.y,
            text4(d.evaluated),
            text4(d.printed)
        );
    }
    out
}
