//! Number formatting shared by every JSON report.
//!
//! Finite numbers are rounded to 12 significant digits; non-finite values
//! are written as the strings `"Infinity"`, `"-Infinity"` or `"NaN"`.

use serde::ser::{SerializeSeq, Serializer};

pub const JSON_SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`JSON_SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", JSON_SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn non_finite_label(x: f64) -> &'static str {
    if x.is_nan() {
        "NaN"
    } else if x > 0.0 {
        "Infinity"
    } else {
        "-Infinity"
    }
}

pub fn sig<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig(*x))
    } else {
        s.serialize_str(non_finite_label(*x))
    }
}

pub fn sig_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => sig(v, s),
        None => s.serialize_none(),
    }
}

pub fn sig_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(xs.len()))?;
    for x in xs {
        seq.serialize_element(&Sig(*x))?;
    }
    seq.end()
}

pub fn sig_matrix<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    let mut seq = s.serialize_seq(Some(rows.len()))?;
    for row in rows {
        seq.serialize_element(&SigRow(row))?;
    }
    seq.end()
}

/// An `f64` serialized with report rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig(pub f64);

impl serde::Serialize for Sig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        sig(&self.0, s)
    }
}

struct SigRow<'a>(&'a [f64]);

impl serde::Serialize for SigRow<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        sig_vec(self.0, s)
    }
}

/// Fixed four-decimal rendering used by terminal tables.
pub fn text4(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        non_finite_label(x).to_string()
    }
}
