//! Text tensor files and the structured documents printed by the CLI.
//!
//! A tensor file is plain text:
//!
//! ```text
//! # optional comment lines start with '#'
//! shape: 2 2 2
//! 1 2 3 4
//! 5 6 7 8
//! ```
//!
//! The `shape:` line lists the dimensions; the entries that follow are
//! whitespace separated, in lexicographic order with the last index fastest,
//! and may be broken across lines freely.

use std::fmt::Write as _;

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;
use thiserror::Error;

use crate::bounds::{BoundsReport, ModeAnalysis, TightnessCertificate};
use crate::oracle::OracleEstimate;
use crate::tensor::{DenseTensor, Matrix};

pub const TOOL_NAME: &str = "nucbound";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: entry `{token}` is not a finite number")]
    NonFinite {
        line: usize,
        column: usize,
        token: String,
    },
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Whitespace-separated tokens with 1-based line and column positions.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut consumed = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let tail = &rest[start..];
        let end = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let column = consumed + start + 1;
        let token = &tail[..end];
        consumed += start + end;
        rest = &tail[end..];
        Some((column, token))
    })
}

/// Parses the text tensor format.
pub fn parse_tensor(text: &str) -> Result<DenseTensor, ParseError> {
    let mut shape: Option<Vec<usize>> = None;
    let mut data = Vec::new();
    let mut expected = 0usize;
    let mut last = (1, 1);

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = raw.trim_start();
        last = (line_no, raw.chars().count() + 1);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if shape.is_none() {
            let indent = raw.len() - trimmed.len();
            let Some(dims) = trimmed.strip_prefix("shape:") else {
                return Err(syntax(line_no, indent + 1, "expected `shape:` line"));
            };
            let offset = indent + "shape:".len();
            let mut parsed = Vec::new();
            for (col, tok) in tokens(dims) {
                match tok.parse::<usize>() {
                    Ok(d) if d > 0 => parsed.push(d),
                    _ => {
                        return Err(syntax(
                            line_no,
                            offset + col,
                            format!("`{tok}` is not a positive dimension"),
                        ))
                    }
                }
            }
            if parsed.is_empty() {
                return Err(syntax(
                    line_no,
                    offset + 1,
                    "shape needs at least one dimension",
                ));
            }
            expected = parsed
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| syntax(line_no, offset + 1, "shape is too large"))?;
            shape = Some(parsed);
            continue;
        }
        for (col, tok) in tokens(raw) {
            let value: f64 = tok
                .parse()
                .map_err(|_| syntax(line_no, col, format!("`{tok}` is not a number")))?;
            if !value.is_finite() {
                return Err(ParseError::NonFinite {
                    line: line_no,
                    column: col,
                    token: tok.to_string(),
                });
            }
            if data.len() == expected {
                return Err(syntax(
                    line_no,
                    col,
                    format!("too many entries: expected {expected}"),
                ));
            }
            data.push(value);
        }
    }

    let Some(shape) = shape else {
        return Err(syntax(last.0, 1, "missing `shape:` line"));
    };
    if data.len() != expected {
        return Err(syntax(
            last.0,
            last.1,
            format!("expected {expected} entries, found {}", data.len()),
        ));
    }
    Ok(DenseTensor::new(shape, data).expect("parsed entries are finite and complete"))
}

/// Shortest text that parses back to exactly `x`.
pub fn format_exact(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Fixed scientific notation with 17 significant digits, used for every
/// number in reports.
pub fn format_sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes a tensor in the text format, one line per last-mode fiber.
pub fn write_tensor(a: &DenseTensor, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(out, "# {line}");
        }
    }
    let dims: Vec<String> = a.shape().iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "shape: {}", dims.join(" "));
    let width = *a.shape().last().expect("tensor has a mode");
    for row in a.data().chunks(width) {
        let cells: Vec<String> = row.iter().map(|&x| format_exact(x)).collect();
        let _ = writeln!(out, "{}", cells.join(" "));
    }
    out
}

/// A matrix written as an order-2 tensor file, so the output of `flatten`
/// can be read back with [`parse_tensor`].
pub fn write_matrix(m: &Matrix, comment: Option<&str>) -> String {
    let t = DenseTensor::new(vec![m.rows(), m.cols()], m.data().to_vec())
        .expect("matrix entries are finite");
    write_tensor(&t, comment)
}

/// Reads a matrix back from [`write_matrix`] output.
pub fn parse_matrix(text: &str) -> Result<Matrix, ParseError> {
    let t = parse_tensor(text)?;
    if t.order() != 2 {
        return Err(syntax(
            1,
            1,
            format!("expected a matrix, got order {}", t.order()),
        ));
    }
    let (rows, cols) = (t.shape()[0], t.shape()[1]);
    Ok(Matrix::new(rows, cols, t.into_data()).expect("validated entries"))
}

/// A number serialized as a raw JSON literal in [`format_sci`] form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let raw = RawValue::from_string(format_sci(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

fn sci_vec(v: &[f64]) -> Vec<Sci> {
    v.iter().copied().map(Sci).collect()
}

fn sci_mat(v: &[Vec<f64>]) -> Vec<Vec<Sci>> {
    v.iter().map(|r| sci_vec(r)).collect()
}

#[derive(Debug, Serialize)]
pub struct Tolerances {
    pub certification: Sci,
    pub truncation: Sci,
}

#[derive(Debug, Serialize)]
pub struct ModeDocument {
    pub mode: usize,
    pub flattening_nuclear: Sci,
    pub sigma: Vec<Sci>,
    pub z_nuclear: Vec<Sci>,
    pub z_nuclear_max: Sci,
    pub z_exact: bool,
    pub truncated_mass: Sci,
    pub refined_upper: Sci,
    pub coarse_upper: Sci,
}

#[derive(Debug, Serialize)]
pub struct CertificateTerm {
    pub weight: Sci,
    pub x: Vec<Sci>,
    pub u: Vec<Sci>,
    pub v: Vec<Sci>,
}

#[derive(Debug, Serialize)]
pub struct CertificateDocument {
    pub mode: usize,
    pub value: Sci,
    pub max_z_deviation: Sci,
    pub terms: Vec<CertificateTerm>,
}

/// Structured output of `nucbound bounds`. Field names are stable.
#[derive(Debug, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub shape: Vec<usize>,
    pub tolerances: Tolerances,
    pub per_mode: Vec<ModeDocument>,
    pub lower: Sci,
    pub lower_mode: usize,
    pub upper: Sci,
    pub upper_mode: usize,
    pub hash_norm: Sci,
    pub hs_upper: Sci,
    pub certificate: Option<CertificateDocument>,
}

impl From<&ModeAnalysis> for ModeDocument {
    fn from(m: &ModeAnalysis) -> Self {
        Self {
            mode: m.mode,
            flattening_nuclear: Sci(m.flattening_nuclear),
            sigma: sci_vec(&m.sigma),
            z_nuclear: sci_vec(&m.z_nuclear),
            z_nuclear_max: Sci(m.z_nuclear_max),
            z_exact: m.z_exact,
            truncated_mass: Sci(m.truncated_mass),
            refined_upper: Sci(m.refined_upper),
            coarse_upper: Sci(m.coarse_upper),
        }
    }
}

impl From<&TightnessCertificate> for CertificateDocument {
    fn from(c: &TightnessCertificate) -> Self {
        let terms = (0..c.terms())
            .map(|i| CertificateTerm {
                weight: Sci(c.weights[i]),
                x: sci_vec(&c.x[i]),
                u: sci_vec(&c.u[i]),
                v: sci_vec(&c.v[i]),
            })
            .collect();
        Self {
            mode: c.mode,
            value: Sci(c.value),
            max_z_deviation: Sci(c.max_z_deviation),
            terms,
        }
    }
}

impl From<&BoundsReport> for ReportDocument {
    fn from(r: &BoundsReport) -> Self {
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            shape: r.shape.clone(),
            tolerances: Tolerances {
                certification: Sci(r.certification_tol),
                truncation: Sci(r.truncation_tol),
            },
            per_mode: r.per_mode.iter().map(ModeDocument::from).collect(),
            lower: Sci(r.lower),
            lower_mode: r.lower_mode,
            upper: Sci(r.upper),
            upper_mode: r.upper_mode,
            hash_norm: Sci(r.hash_norm),
            hs_upper: Sci(r.hs_upper),
            certificate: r.certificate.as_ref().map(CertificateDocument::from),
        }
    }
}

/// Structured output of `nucbound certify`.
#[derive(Debug, Serialize)]
pub struct CertifyDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub shape: Vec<usize>,
    pub tol: Sci,
    pub certified: bool,
    pub mode: usize,
    pub max_z_deviation: Sci,
    pub certificate: Option<CertificateDocument>,
}

#[derive(Debug, Serialize)]
pub struct OracleTerm {
    pub lambda: Sci,
    pub factors: Vec<Vec<Sci>>,
}

/// Structured output of `nucbound oracle`.
#[derive(Debug, Serialize)]
pub struct OracleDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub shape: Vec<usize>,
    pub seed: u64,
    pub restarts: usize,
    pub max_terms: usize,
    pub residual_tol: Sci,
    pub dual_lower: Sci,
    pub primal_upper: Sci,
    pub spectral_lower: Sci,
    pub spectral_upper: Sci,
    pub restarts_used: usize,
    pub runs: usize,
    pub converged: bool,
    pub relative_residual: Sci,
    pub terms: Vec<OracleTerm>,
}

impl OracleDocument {
    pub fn new(
        shape: &[usize],
        estimate: &OracleEstimate,
        residual_tol: f64,
        spectral: (f64, f64),
    ) -> Self {
        Self {
            tool: TOOL_NAME,
            version: TOOL_VERSION,
            shape: shape.to_vec(),
            seed: estimate.seed,
            restarts: estimate.restarts_used,
            max_terms: estimate.max_terms,
            residual_tol: Sci(residual_tol),
            dual_lower: Sci(estimate.dual_lower),
            primal_upper: Sci(estimate.primal_upper),
            spectral_lower: Sci(spectral.0),
            spectral_upper: Sci(spectral.1),
            restarts_used: estimate.restarts_used,
            runs: estimate.runs,
            converged: estimate.converged,
            relative_residual: Sci(estimate.relative_residual),
            terms: estimate
                .decomposition
                .iter()
                .map(|t| OracleTerm {
                    lambda: Sci(t.lambda),
                    factors: sci_mat(&t.factors),
                })
                .collect(),
        }
    }
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents always serialize");
    s.push('\n');
    s
}

fn join_sci(v: &[f64]) -> String {
    v.iter()
        .map(|&x| format_sci(x))
        .collect::<Vec<_>>()
        .join(" ")
}

fn shape_str(shape: &[usize]) -> String {
    shape
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("×")
}

/// Human-readable summary of a bounds report. Numbers are printed exactly as
/// in the structured document.
pub fn pretty_report(r: &BoundsReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{TOOL_NAME} {TOOL_VERSION}: {} tensor",
        shape_str(&r.shape)
    );
    let _ = writeln!(
        out,
        "nuclear norm in [{}, {}]",
        format_sci(r.lower),
        format_sci(r.upper)
    );
    let _ = writeln!(out, "  lower attained by mode {}", r.lower_mode);
    let _ = writeln!(out, "  upper attained by mode {}", r.upper_mode);
    let _ = writeln!(
        out,
        "hash norm (mean flattening norm): {}",
        format_sci(r.hash_norm)
    );
    let _ = writeln!(
        out,
        "Hilbert-Schmidt upper bound: {}",
        format_sci(r.hs_upper)
    );
    for m in &r.per_mode {
        let _ = writeln!(out, "mode {}:", m.mode);
        let _ = writeln!(
            out,
            "  flattening nuclear norm: {}",
            format_sci(m.flattening_nuclear)
        );
        let _ = writeln!(out, "  refined upper: {}", format_sci(m.refined_upper));
        let _ = writeln!(out, "  coarse upper: {}", format_sci(m.coarse_upper));
        let _ = writeln!(
            out,
            "  max fiber nuclear norm: {}",
            format_sci(m.z_nuclear_max)
        );
        let _ = writeln!(out, "  truncated mass: {}", format_sci(m.truncated_mass));
        let _ = writeln!(out, "  sigma: {}", join_sci(&m.sigma));
        let _ = writeln!(
            out,
            "  fiber nuclear norms ({}): {}",
            if m.z_exact { "exact" } else { "upper bounds" },
            join_sci(&m.z_nuclear)
        );
    }
    match &r.certificate {
        Some(c) => {
            let _ = write!(out, "{}", pretty_certificate(c));
        }
        None => {
            let _ = writeln!(out, "not certified");
        }
    }
    let _ = writeln!(
        out,
        "tolerances: certification {}, truncation {}",
        format_sci(r.certification_tol),
        format_sci(r.truncation_tol)
    );
    out
}

pub fn pretty_certificate(c: &TightnessCertificate) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "certified via mode {}: nuclear norm = {}",
        c.mode,
        format_sci(c.value)
    );
    let _ = writeln!(
        out,
        "  max fiber deviation: {}",
        format_sci(c.max_z_deviation)
    );
    for i in 0..c.terms() {
        let _ = writeln!(out, "  term {}: weight {}", i + 1, format_sci(c.weights[i]));
        let _ = writeln!(out, "    x: {}", join_sci(&c.x[i]));
        let _ = writeln!(out, "    u: {}", join_sci(&c.u[i]));
        let _ = writeln!(out, "    v: {}", join_sci(&c.v[i]));
    }
    out
}

pub fn pretty_oracle(d: &OracleEstimate, shape: &[usize], spectral: (f64, f64)) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{TOOL_NAME} {TOOL_VERSION}: oracle on {} tensor",
        shape_str(shape)
    );
    let _ = writeln!(out, "dual lower: {}", format_sci(d.dual_lower));
    let _ = writeln!(out, "primal upper: {}", format_sci(d.primal_upper));
    let _ = writeln!(
        out,
        "spectral norm in [{}, {}]",
        format_sci(spectral.0),
        format_sci(spectral.1)
    );
    let _ = writeln!(
        out,
        "seed {}, restarts {}, max terms {}, runs {}",
        d.seed, d.restarts_used, d.max_terms, d.runs
    );
    let _ = writeln!(
        out,
        "relative residual {} ({})",
        format_sci(d.relative_residual),
        if d.converged {
            "converged"
        } else {
            "NOT converged"
        }
    );
    for (i, t) in d.decomposition.iter().enumerate() {
        let _ = writeln!(out, "  term {}: lambda {}", i + 1, format_sci(t.lambda));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_with_comments_and_free_line_breaks() {
        let text = "# a tensor\n\n  shape: 2 2 2\n1 2 3\n# interleaved\n4 5e0 6.0\n  7 8\n";
        let t = parse_tensor(text).unwrap();
        assert_eq!(t.shape(), &[2, 2, 2]);
        assert_eq!(t.data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
    }

    #[test]
    fn truncated_file_reports_counts() {
        let err = parse_tensor("shape: 2 2 2\n1 2 3 4 5\n").unwrap_err();
        match err {
            ParseError::Syntax { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("expected 8 entries, found 5"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_positions() {
        let err = parse_tensor("shape: 2\n1 x2\n").unwrap_err();
        assert_eq!(
            err,
            ParseError::Syntax {
                line: 2,
                column: 3,
                message: "`x2` is not a number".into()
            }
        );
        let err = parse_tensor("shape: 2 0\n").unwrap_err();
        assert!(
            matches!(
                err,
                ParseError::Syntax {
                    line: 1,
                    column: 10,
                    ..
                }
            ),
            "{err:?}"
        );
        assert!(matches!(
            parse_tensor("1 2 3\n").unwrap_err(),
            ParseError::Syntax {
                line: 1,
                column: 1,
                ..
            }
        ));
        assert!(matches!(
            parse_tensor("# only a comment\n").unwrap_err(),
            ParseError::Syntax { .. }
        ));
        assert!(matches!(
            parse_tensor("shape: 1\n1 2\n").unwrap_err(),
            ParseError::Syntax {
                line: 2,
                column: 3,
                ..
            }
        ));
    }

    #[test]
    fn non_finite_entries() {
        for bad in ["nan", "inf", "-inf", "1e400"] {
            let err = parse_tensor(&format!("shape: 2\n1 {bad}\n")).unwrap_err();
            assert!(
                matches!(
                    err,
                    ParseError::NonFinite {
                        line: 2,
                        column: 3,
                        ..
                    }
                ),
                "{bad}: {err:?}"
            );
        }
    }

    #[test]
    fn write_then_parse_is_exact() {
        let data = vec![
            0.1,
            -2.5e-7,
            3.0,
            1e300,
            -0.0,
            123456.789,
            1.0 / 3.0,
            7e-320,
        ];
        let t = DenseTensor::new(vec![2, 4], data).unwrap();
        let back = parse_tensor(&write_tensor(&t, Some("roundtrip"))).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn matrix_text_roundtrip() {
        let m = Matrix::from_rows(&[[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]).unwrap();
        let text = write_matrix(&m, None);
        assert_eq!(text, "shape: 2 4\n1 2 3 4\n5 6 7 8\n");
        assert_eq!(parse_matrix(&text).unwrap(), m);
        assert!(parse_matrix("shape: 2\n1 2\n").is_err());
    }

    #[test]
    fn sci_numbers_have_seventeen_digits() {
        assert_eq!(format_sci(2.0), "2.0000000000000000e0");
        let json = serde_json::to_string(&vec![Sci(0.5), Sci(-1e-20)]).unwrap();
        assert_eq!(json, "[5.0000000000000000e-1,-9.9999999999999995e-21]");
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v[0].as_f64(), Some(0.5));
    }
}
