//! The `VFAM/1` text format for families and maps, run configuration, and
//! report emission.
//!
//! A family file is a header line, optional weight tables, and one record
//! per term:
//!
//! ```text
//! VFAM/1 n=2 N=2 trunc=8 mode=rational
//! w1 1 1
//! w2 1 1
//! 1 1 1^2 1 0
//! ```
//!
//! Records are `i j Q re im` with `Q` a comma-joined `index^exponent` list
//! (`-` for the empty monomial) and coefficients exact rationals (`p/q`)
//! in rational mode, shortest round-trip floats otherwise. Serialization
//! is canonical: records sorted by member, then term order; parsing a
//! serialized file and serializing again is byte-identical.

use serde::{Deserialize, Serialize};

use crate::coeff::{Coeff, Mode, Rat, C64};
use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;
use crate::newton::LedgerRow;
use crate::norms::{NormReport, WeightTable};
use crate::vector_field::{Family, Term, VectorField};

/// A parsed family file: the fields plus any embedded weight tables.
#[derive(Clone, Debug)]
pub struct FamilyFile<C: Coeff> {
    pub family: Family<C>,
    pub weights: Option<WeightTable>,
}

/// Mode-dispatched parse result.
#[derive(Clone, Debug)]
pub enum ParsedFamily {
    Rational(FamilyFile<Rat>),
    Float(FamilyFile<C64>),
}

impl ParsedFamily {
    pub fn mode(&self) -> Mode {
        match self {
            ParsedFamily::Rational(_) => Mode::Rational,
            ParsedFamily::Float(_) => Mode::Float,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            ParsedFamily::Rational(f) => f.family.n(),
            ParsedFamily::Float(f) => f.family.n(),
        }
    }

    pub fn weights(&self) -> Option<&WeightTable> {
        match self {
            ParsedFamily::Rational(f) => f.weights.as_ref(),
            ParsedFamily::Float(f) => f.weights.as_ref(),
        }
    }
}

struct Header {
    n: usize,
    count: usize,
    trunc: u32,
    mode: Mode,
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_header(line: &str, lineno: usize) -> Result<Header> {
    let mut tokens = line.split_whitespace();
    match tokens.next() {
        Some("VFAM/1") => {}
        other => {
            return Err(parse_error(
                lineno,
                format!("expected format tag VFAM/1, found {other:?}"),
            ))
        }
    }
    let (mut n, mut count, mut trunc, mut mode) = (None, None, None, None);
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| parse_error(lineno, format!("bad header token `{tok}`")))?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|e| parse_error(lineno, format!("bad n: {e}")))?),
            "N" => count = Some(value.parse::<usize>().map_err(|e| parse_error(lineno, format!("bad N: {e}")))?),
            "trunc" => trunc = Some(value.parse::<u32>().map_err(|e| parse_error(lineno, format!("bad trunc: {e}")))?),
            "mode" => mode = Some(value.parse::<Mode>().map_err(|e| parse_error(lineno, e))?),
            other => return Err(parse_error(lineno, format!("unknown header key `{other}`"))),
        }
    }
    match (n, count, trunc, mode) {
        (Some(n), Some(count), Some(trunc), Some(mode)) if n >= 1 => {
            Ok(Header { n, count, trunc, mode })
        }
        _ => Err(parse_error(
            lineno,
            "header must declare n>=1, N, trunc and mode",
        )),
    }
}

fn parse_weight_line(line: &str, lineno: usize, n: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = line
        .split_whitespace()
        .skip(1)
        .map(|t| t.parse::<f64>().map_err(|e| parse_error(lineno, format!("bad weight: {e}"))))
        .collect::<Result<_>>()?;
    if values.len() != n {
        return Err(parse_error(
            lineno,
            format!("expected {n} weights, found {}", values.len()),
        ));
    }
    Ok(values)
}

/// Parse the `Q` token: `-` or comma-joined `idx^exp`.
pub fn parse_multi_index(token: &str, lineno: usize) -> Result<MultiIndex> {
    if token == "-" {
        return Ok(MultiIndex::unit());
    }
    let mut pairs = Vec::new();
    for part in token.split(',') {
        let (idx, exp) = part
            .split_once('^')
            .ok_or_else(|| parse_error(lineno, format!("bad monomial factor `{part}`")))?;
        let idx: i32 = idx
            .parse()
            .map_err(|e| parse_error(lineno, format!("bad variable index `{idx}`: {e}")))?;
        let exp: u32 = exp
            .parse()
            .map_err(|e| parse_error(lineno, format!("bad exponent `{exp}`: {e}")))?;
        if idx == 0 {
            return Err(parse_error(lineno, "variable index 0 is not allowed"));
        }
        if exp == 0 {
            return Err(parse_error(lineno, "zero exponents are not stored"));
        }
        pairs.push((idx, exp));
    }
    Ok(MultiIndex::from_pairs(&pairs))
}

fn parse_body<C: Coeff>(
    header: &Header,
    lines: &[(usize, &str)],
    start: usize,
) -> Result<FamilyFile<C>> {
    let mut weights: (Option<Vec<f64>>, Option<Vec<f64>>) = (None, None);
    let mut pos = start;
    while pos < lines.len() {
        let (lineno, line) = lines[pos];
        if line.starts_with("w1 ") || line == "w1" {
            weights.0 = Some(parse_weight_line(line, lineno, header.n)?);
            pos += 1;
        } else if line.starts_with("w2 ") || line == "w2" {
            weights.1 = Some(parse_weight_line(line, lineno, header.n)?);
            pos += 1;
        } else {
            break;
        }
    }
    let weights = match weights {
        (None, None) => None,
        (Some(w1), Some(w2)) => Some(WeightTable::new(w1, w2)?),
        _ => {
            return Err(parse_error(
                lines.get(pos).map(|l| l.0).unwrap_or(0),
                "weight tables need both w1 and w2 lines",
            ))
        }
    };

    let mut members: Vec<VectorField<C>> = (0..header.count)
        .map(|_| VectorField::zero(header.n, header.trunc))
        .collect();
    let mut seen: std::collections::HashSet<(usize, Term)> = std::collections::HashSet::new();
    for &(lineno, line) in &lines[pos..] {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 5 {
            return Err(parse_error(
                lineno,
                format!("expected 5 record fields `i j Q re im`, found {}", tokens.len()),
            ));
        }
        let i: usize = tokens[0]
            .parse()
            .map_err(|e| parse_error(lineno, format!("bad member index: {e}")))?;
        if i < 1 || i > header.count {
            return Err(parse_error(
                lineno,
                format!("member index {i} out of range 1..={}", header.count),
            ));
        }
        let j: i32 = tokens[1]
            .parse()
            .map_err(|e| parse_error(lineno, format!("bad component index: {e}")))?;
        if j == 0 || j.unsigned_abs() as usize > header.n {
            return Err(parse_error(
                lineno,
                format!("component index {j} out of range for n = {}", header.n),
            ));
        }
        let q = parse_multi_index(tokens[2], lineno)?;
        if q.max_abs_index() as usize > header.n {
            return Err(parse_error(
                lineno,
                format!("monomial {q} uses a variable out of range for n = {}", header.n),
            ));
        }
        if q.degree() > header.trunc {
            return Err(parse_error(
                lineno,
                format!("monomial degree {} above header truncation {}", q.degree(), header.trunc),
            ));
        }
        let term = Term { q: q.clone(), j };
        if !seen.insert((i, term)) {
            return Err(parse_error(
                lineno,
                format!("duplicate record for member {i}, component {j}, monomial {q}"),
            ));
        }
        let c = C::parse_parts(tokens[3], tokens[4]).map_err(|e| parse_error(lineno, e))?;
        members[i - 1].add_term_raw(q, j, c);
    }
    Ok(FamilyFile {
        family: Family::new(header.n, header.trunc, members)?,
        weights,
    })
}

/// Parse a family file, dispatching on the declared mode. Blank lines and
/// `#` comments are ignored.
pub fn parse_family(text: &str) -> Result<ParsedFamily> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .collect();
    let Some(&(first_no, first)) = lines.first() else {
        return Err(parse_error(1, "empty file"));
    };
    let header = parse_header(first, first_no)?;
    match header.mode {
        Mode::Rational => Ok(ParsedFamily::Rational(parse_body::<Rat>(&header, &lines, 1)?)),
        Mode::Float => Ok(ParsedFamily::Float(parse_body::<C64>(&header, &lines, 1)?)),
    }
}

fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Canonical serialization: header, optional weights, records in
/// (member, term) order with reduced rationals or shortest floats.
pub fn serialize_family<C: Coeff>(family: &Family<C>, weights: Option<&WeightTable>) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "VFAM/1 n={} N={} trunc={} mode={}\n",
        family.n(),
        family.len(),
        family.trunc(),
        C::MODE.as_str()
    ));
    if let Some(w) = weights {
        out.push_str("w1");
        for v in w.w1_slice() {
            out.push(' ');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
        out.push_str("w2");
        for v in w.w2_slice() {
            out.push(' ');
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    }
    for (idx, member) in family.iter().enumerate() {
        for (t, c) in member.iter() {
            let (re, im) = c.format_parts();
            out.push_str(&format!("{} {} {} {} {}\n", idx + 1, t.j, t.q, re, im));
        }
    }
    out
}

/// Run configuration for the CLI: scheme constants, step count, truncation
/// and reporting knobs. Absent constants are chosen per instance
/// (`r0 = 1/2`, `c0` tight for the input family).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_b")]
    pub b: f64,
    #[serde(default)]
    pub c0: Option<f64>,
    /// Accepted for completeness; when present it must equal `4^{b+2}/3`.
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: u32,
    #[serde(default)]
    pub trunc: Option<u32>,
    /// Must match the family file when present.
    #[serde(default)]
    pub mode: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// When set, the scheme constants must pass the full validation before
    /// a run starts; otherwise they only feed the sequence tables.
    #[serde(default)]
    pub audits: bool,
}

fn default_b() -> f64 {
    20.0
}

fn default_steps() -> u32 {
    3
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            b: default_b(),
            c0: None,
            c1: None,
            r0: None,
            steps: default_steps(),
            trunc: None,
            mode: None,
            seed: 0,
            audits: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(c1) = self.c1 {
            let expected = 4f64.powf(self.b + 2.0) / 3.0;
            if (c1 - expected).abs() > 1e-9 * expected {
                return Err(Error::InvalidConstants(format!(
                    "c1 = {c1} differs from 4^(b+2)/3 = {expected}"
                )));
            }
        }
        if let Some(mode) = &self.mode {
            mode.parse::<Mode>().map_err(Error::InvalidConstants)?;
        }
        Ok(())
    }
}

/// JSON-lines ledger: one object per iteration state.
pub fn ledger_to_jsonl(rows: &[LedgerRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&serde_json::to_string(row).expect("ledger rows serialize"));
        out.push('\n');
    }
    out
}

/// CSV norm table with a fixed header row.
pub fn norm_table_csv(rows: &[NormReport]) -> String {
    let mut out = String::from(NormReport::csv_header());
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}
