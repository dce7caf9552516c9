//! Text formats: system files, H-representation input and result documents.
//!
//! A system file is line oriented; `#` starts a comment:
//!
//! ```text
//! system 2 2          # optional tag, then n and d
//! basis 1 2           # optional, defaults to 1..n
//! nonbasis 3 4        # optional, defaults to n+1..n+d
//! 1 -1 1/2            # n rows: b_i then row i of A  (x_B = b - A x_N)
//! 0.5 1 0
//! objective 1 -1      # optional c (minimize c^T x_N)
//! ```

use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::certificates::{Certificate, CertificateKind};
use crate::detection::{DetectionResult, Method, Stats};
use crate::error::{Error, Result};
use crate::lp::{build_initial_dictionary, LpInstance, Rat, Var};
use crate::oracle::RationalOracle;

pub const SYSTEM_TAG: &str = "system";
pub const RESULT_FORMAT: &str = "redundancy-result/1";

/// Parses `p`, `p/q` or a decimal such as `-1.25`; `−` (U+2212) is accepted
/// as a minus sign.
pub fn parse_rational(s: &str) -> std::result::Result<Rat, String> {
    let t = s.replace('\u{2212}', "-");
    let bad = || format!("not an exact rational: {s:?}");
    if let Some((num, den)) = t.split_once('/') {
        let num = BigInt::from_str(num).map_err(|_| bad())?;
        let den = BigInt::from_str(den).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rat::new(num, den));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() && digits.is_empty()
            || !frac.chars().all(|c| c.is_ascii_digit())
            || !digits.chars().all(|c| c.is_ascii_digit())
        {
            return Err(bad());
        }
        let num = BigInt::from_str(&format!("{digits}{frac}0")).map_err(|_| bad())? / 10;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let v = Rat::new(num, den);
        return Ok(if neg { -v } else { v });
    }
    BigInt::from_str(&t)
        .map(Rat::from_integer)
        .map_err(|_| bad())
}

fn format_rational(v: &Rat) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let words: Vec<&str> = line.split_whitespace().collect();
        (!words.is_empty()).then_some((i + 1, words))
    })
}

fn parse_count(line: usize, w: &str) -> Result<usize> {
    w.parse()
        .map_err(|_| parse_err(line, format!("expected a count, found {w:?}")))
}

fn parse_labels(line: usize, words: &[&str], expected: usize) -> Result<Vec<Var>> {
    if words.len() != expected {
        return Err(parse_err(
            line,
            format!("expected {expected} labels, found {}", words.len()),
        ));
    }
    words
        .iter()
        .map(|w| {
            w.parse::<u32>()
                .map(Var)
                .map_err(|_| parse_err(line, format!("bad variable label {w:?}")))
        })
        .collect()
}

fn parse_row(line: usize, words: &[&str], expected: usize) -> Result<Vec<Rat>> {
    if words.len() != expected {
        return Err(parse_err(
            line,
            format!("expected {expected} entries, found {}", words.len()),
        ));
    }
    words
        .iter()
        .map(|w| parse_rational(w).map_err(|m| parse_err(line, m)))
        .collect()
}

pub fn parse_system(text: &str) -> Result<LpInstance> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let dims: &[&str] = match header.first() {
        Some(&SYSTEM_TAG) => &header[1..],
        _ => &header[..],
    };
    if dims.len() != 2 {
        return Err(parse_err(hline, "header must be `[system] n d`"));
    }
    let n = parse_count(hline, dims[0])?;
    let d = parse_count(hline, dims[1])?;

    let mut basis: Option<Vec<Var>> = None;
    let mut nonbasis: Option<Vec<Var>> = None;
    let mut b = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    let mut c = None;
    let mut last = hline;
    for (ln, words) in lines {
        last = ln;
        match words[0] {
            "basis" if basis.is_none() && b.is_empty() => {
                basis = Some(parse_labels(ln, &words[1..], n)?)
            }
            "nonbasis" if nonbasis.is_none() && b.is_empty() => {
                nonbasis = Some(parse_labels(ln, &words[1..], d)?)
            }
            "objective" if c.is_none() && b.len() == n => c = Some(parse_row(ln, &words[1..], d)?),
            "basis" | "nonbasis" | "objective" => {
                return Err(parse_err(ln, format!("unexpected `{}` line", words[0])))
            }
            _ if b.len() < n && c.is_none() => {
                let row = parse_row(ln, &words, d + 1)?;
                b.push(row[0].clone());
                a.push(row[1..].to_vec());
            }
            _ => return Err(parse_err(ln, "more rows than the header declares")),
        }
    }
    if b.len() != n {
        return Err(parse_err(
            last,
            format!("expected {n} rows, found {}", b.len()),
        ));
    }
    let n32 = n as u32;
    let inst = LpInstance {
        basis: basis.unwrap_or_else(|| crate::lp::vars(1..=n32)),
        nonbasis: nonbasis.unwrap_or_else(|| crate::lp::vars(n32 + 1..=n32 + d as u32)),
        b,
        a,
        c,
    };
    inst.validate()
        .map_err(|e| parse_err(hline, e.to_string()))?;
    Ok(inst)
}

pub fn serialize_system(inst: &LpInstance) -> String {
    let mut out = format!("{SYSTEM_TAG} {} {}\n", inst.n(), inst.d());
    let labels = |v: &[Var]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    let row = |v: &[Rat]| v.iter().map(format_rational).collect::<Vec<_>>().join(" ");
    out += &format!("basis {}\n", labels(&inst.basis));
    out += &format!("nonbasis {}\n", labels(&inst.nonbasis));
    for (bi, ai) in inst.b.iter().zip(&inst.a) {
        let mut entries = vec![bi.clone()];
        entries.extend(ai.iter().cloned());
        out += &row(&entries);
        out.push('\n');
    }
    if let Some(c) = &inst.c {
        out += &format!("objective {}\n", row(c));
    }
    out
}

/// Reads a cdd-style H-representation: rows `[b, -A]` meaning
/// `b - A x ≥ 0` with `x` free.
///
/// Every row becomes a slack variable labelled by its row number. The free
/// `x` are eliminated through `d` linearly independent rows, whose slacks
/// become the nonbasis; the remaining slacks form the basis.
pub fn parse_hrep(text: &str) -> Result<LpInstance> {
    let mut lines = content_lines(text).skip_while(|(_, w)| w[0] != "begin");
    let (bline, _) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing `begin`"))?;
    let (sline, size) = lines
        .next()
        .ok_or_else(|| parse_err(bline, "missing size line"))?;
    if size.len() < 2 {
        return Err(parse_err(sline, "size line must be `m k [numbertype]`"));
    }
    let m = parse_count(sline, size[0])?;
    let k = parse_count(sline, size[1])?;
    if k == 0 {
        return Err(parse_err(sline, "k must be at least 1"));
    }
    if let Some(&t) = size.get(2) {
        if t != "rational" && t != "integer" {
            return Err(parse_err(sline, format!("unsupported number type {t:?}")));
        }
    }
    let mut rows = Vec::with_capacity(m);
    for (ln, words) in lines.by_ref() {
        if words[0] == "end" {
            break;
        }
        if rows.len() == m {
            return Err(parse_err(ln, "more rows than declared"));
        }
        rows.push((ln, parse_row(ln, &words, k)?));
    }
    if rows.len() != m {
        return Err(parse_err(
            sline,
            format!("expected {m} rows, found {}", rows.len()),
        ));
    }
    slack_form(&rows.into_iter().map(|(_, r)| r).collect::<Vec<_>>())
        .map_err(|e| parse_err(sline, e.to_string()))
}

/// Dictionary form of `s = h - G x ≥ 0` (rows `[h, -G]`) with `x` free.
fn slack_form(rows: &[Vec<Rat>]) -> Result<LpInstance> {
    let m = rows.len();
    let d = rows.first().map_or(0, |r| r.len() - 1);
    // Gauss-Jordan on the x-part to find d independent rows
    let mut t: Vec<Vec<Rat>> = rows.iter().map(|r| r[1..].to_vec()).collect();
    let mut pivots: Vec<usize> = Vec::with_capacity(d);
    let mut used = vec![false; m];
    for col in 0..d {
        let p = (0..m)
            .find(|&i| !used[i] && !t[i][col].is_zero())
            .ok_or_else(|| {
                Error::AssumptionViolation("constraint normals do not span the space".into())
            })?;
        used[p] = true;
        pivots.push(p);
        let inv = Rat::one() / &t[p][col];
        let prow: Vec<Rat> = t[p].iter().map(|v| v * &inv).collect();
        for (i, row) in t.iter_mut().enumerate() {
            if i != p && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, q) in row.iter_mut().zip(&prow) {
                    *v -= &f * q;
                }
            }
        }
        t[p] = prow;
    }
    // with R the x-part of the pivot rows: s_P = h_P + R x, so x = R^{-1} (s_P - h_P)
    let gp: Vec<Vec<Rat>> = pivots.iter().map(|&p| rows[p][1..].to_vec()).collect();
    let inv = invert(&gp).ok_or_else(|| Error::AssumptionViolation("singular normals".into()))?;
    let hp: Vec<Rat> = pivots.iter().map(|&p| rows[p][0].clone()).collect();
    let basis_rows: Vec<usize> = (0..m).filter(|i| !pivots.contains(i)).collect();
    let mut b = Vec::with_capacity(basis_rows.len());
    let mut a = Vec::with_capacity(basis_rows.len());
    for &i in &basis_rows {
        let gi = &rows[i][1..];
        let coeff: Vec<Rat> = (0..d)
            .map(|q| (0..d).map(|j| &gi[j] * &inv[j][q]).sum())
            .collect();
        let constant = &rows[i][0] - coeff.iter().zip(&hp).map(|(c, h)| c * h).sum::<Rat>();
        b.push(constant);
        a.push(coeff.iter().map(|c| -c).collect());
    }
    let label = |i: usize| Var(i as u32 + 1);
    let mut nonbasis: Vec<Var> = pivots.iter().map(|&p| label(p)).collect();
    // keep nonbasic columns sorted by label
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by_key(|&q| nonbasis[q]);
    nonbasis.sort();
    let a = a
        .into_iter()
        .map(|row: Vec<Rat>| order.iter().map(|&q| row[q].clone()).collect())
        .collect();
    Ok(LpInstance {
        basis: basis_rows.into_iter().map(label).collect(),
        nonbasis,
        b,
        a,
        c: None,
    })
}

/// Exact inverse of a square matrix, `None` if singular.
fn invert(g: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let d = g.len();
    let mut t: Vec<Vec<Rat>> = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..d).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    for c in 0..d {
        let p = (c..d).find(|&i| !t[i][c].is_zero())?;
        t.swap(c, p);
        let inv = Rat::one() / &t[c][c];
        for v in t[c].iter_mut() {
            *v *= &inv;
        }
        let prow = t[c].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != c && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, q) in row.iter_mut().zip(&prow) {
                    *v -= &f * q;
                }
            }
        }
    }
    Some(t.into_iter().map(|r| r[d..].to_vec()).collect())
}

/// Reads either format, deciding by the presence of a `begin` line.
pub fn parse_any(text: &str) -> Result<LpInstance> {
    if content_lines(text).any(|(_, w)| w[0] == "begin") {
        parse_hrep(text)
    } else {
        parse_system(text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Redundant,
    Nonredundant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableEntry {
    pub index: Var,
    pub classification: Classification,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
}

/// Machine-readable detection output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub format: String,
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub redundant: Vec<Var>,
    pub nonredundant: Vec<Var>,
    #[serde(default)]
    pub forced_nonredundant: Vec<Var>,
    pub variables: Vec<VariableEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
}

impl ResultDocument {
    pub fn new(inst: &LpInstance, res: &DetectionResult, with_stats: bool) -> Self {
        let variables = inst
            .variables()
            .into_iter()
            .map(|v| VariableEntry {
                index: v,
                classification: if res.redundant.binary_search(&v).is_ok() {
                    Classification::Redundant
                } else {
                    Classification::Nonredundant
                },
                certificate: res.certificate(v).cloned(),
            })
            .collect();
        ResultDocument {
            format: RESULT_FORMAT.into(),
            method: res.method,
            n: inst.n(),
            d: inst.d(),
            redundant: res.redundant.clone(),
            nonredundant: res.nonredundant.clone(),
            forced_nonredundant: res.forced_nonredundant.clone(),
            variables,
            stats: with_stats.then(|| res.stats.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub verified: Vec<Var>,
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-checks a result document against the system it claims to describe.
/// Every variable must be classified once and carry a certificate that
/// re-verifies against fresh oracle signs.
pub fn verify_document(doc: &ResultDocument, inst: &LpInstance) -> Result<VerifyReport> {
    let root = RationalOracle::new(build_initial_dictionary(inst)?);
    let mut report = VerifyReport::default();
    if doc.format != RESULT_FORMAT {
        report
            .failures
            .push(format!("unknown format {:?}", doc.format));
    }
    let listed: Vec<Var> = doc.variables.iter().map(|e| e.index).collect();
    if listed != inst.variables() {
        report
            .failures
            .push("document does not list each system variable exactly once".into());
        return Ok(report);
    }
    for e in &doc.variables {
        let in_r = doc.redundant.binary_search(&e.index).is_ok();
        let in_s = doc.nonredundant.binary_search(&e.index).is_ok();
        let expected = match e.classification {
            Classification::Redundant => (true, false),
            Classification::Nonredundant => (false, true),
        };
        if (in_r, in_s) != expected {
            report
                .failures
                .push(format!("{}: classification lists disagree", e.index));
            continue;
        }
        let Some(c) = &e.certificate else {
            report.failures.push(format!("{}: no certificate", e.index));
            continue;
        };
        let kind = match e.classification {
            Classification::Redundant => CertificateKind::Redundant,
            Classification::Nonredundant => CertificateKind::Nonredundant,
        };
        if c.variable != e.index || c.kind != kind {
            report
                .failures
                .push(format!("{}: certificate is for another claim", e.index));
            continue;
        }
        match c.verify(&root) {
            Ok(true) => report.verified.push(e.index),
            Ok(false) => report
                .failures
                .push(format!("{}: certificate does not verify", e.index)),
            Err(err) => report.failures.push(format!("{}: {err}", e.index)),
        }
    }
    Ok(report)
}
