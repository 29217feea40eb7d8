//! Text formats: series files, matrix dumps, INI-style reports, group files
//! and run configurations.
//!
//! Series file layout:
//!
//! ```text
//! # mumford-series v1
//! genus 2
//! truncation 2
//! floor 0
//! xvars x[-2]
//! term [0,1] (1*x[0]^2 - 2*x[0] + 1) / (1*x[0])
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex;
use serde::Deserialize;

use crate::differentials::EichlerMatrix;
use crate::error::{Error, Result};
use crate::numeric::{NumPoint, NumericSchottkyGroup, Real};
use crate::poly::IntegerPolynomial;
use crate::rational::RationalCoefficient;
use crate::series::{SeriesRing, YExp, YSeries};

pub const SERIES_HEADER: &str = "# mumford-series v1";
pub const MATRIX_HEADER: &str = "# mumford-matrix v1";
pub const REPORT_HEADER: &str = "# mumford-report v1";
/// The only report line allowed to differ between identical runs.
pub const TIMESTAMP_PREFIX: &str = "# generated-at ";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn check_header(first: Option<&str>, expected: &str) -> Result<()> {
    let first = first.ok_or_else(|| parse_err(1, "empty file"))?.trim_end();
    if first == expected {
        return Ok(());
    }
    let kind = expected.rsplit_once(' ').map_or(expected, |(k, _)| k);
    match first.strip_prefix(kind) {
        Some(v) if v.starts_with(' ') => {
            Err(Error::Version { expected: expected.to_string(), found: first.to_string() })
        }
        _ => Err(parse_err(1, format!("expected header `{expected}`"))),
    }
}

fn format_exp(e: &YExp) -> String {
    let parts: Vec<String> = e.0.iter().map(|k| k.to_string()).collect();
    format!("[{}]", parts.join(","))
}

fn parse_exp(s: &str, g: usize, line: usize) -> Result<YExp> {
    let inner = s
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| parse_err(line, "exponent must be bracketed"))?;
    let v: Vec<i16> = if inner.trim().is_empty() {
        Vec::new()
    } else {
        inner
            .split(',')
            .map(|t| t.trim().parse::<i16>().map_err(|_| parse_err(line, format!("bad exponent `{t}`"))))
            .collect::<Result<_>>()?
    };
    if v.len() != g {
        return Err(parse_err(line, format!("exponent has {} entries, genus is {g}", v.len())));
    }
    Ok(YExp::from_slice(&v))
}

fn format_term(e: &YExp, c: &RationalCoefficient, names: &[String]) -> String {
    let (num, den) = c.format(names);
    format!("{} ({num}) / ({den})", format_exp(e))
}

/// Splits `[e] (num) / (den)`.
fn split_term(rest: &str, line: usize) -> Result<(&str, &str, &str)> {
    let (exp, rest) = rest.split_once(' ').ok_or_else(|| parse_err(line, "term needs an exponent"))?;
    let (num, den) = rest.split_once(") / (").ok_or_else(|| parse_err(line, "term must read `(num) / (den)`"))?;
    let num = num.trim().strip_prefix('(').ok_or_else(|| parse_err(line, "numerator must be parenthesized"))?;
    let den = den.trim().strip_suffix(')').ok_or_else(|| parse_err(line, "denominator must be parenthesized"))?;
    Ok((exp, num, den))
}

fn parse_coefficient(num: &str, den: &str, names: &[String], line: usize) -> Result<RationalCoefficient> {
    let wrap = |e: Error| match e {
        Error::Parse { msg, .. } => parse_err(line, msg),
        other => parse_err(line, other.to_string()),
    };
    let n = IntegerPolynomial::parse(num, names).map_err(wrap)?;
    let d = IntegerPolynomial::parse(den, names).map_err(wrap)?;
    RationalCoefficient::from_num_den(n, d).map_err(wrap)
}

fn header_block(out: &mut String, ring: &SeriesRing, floor: i32) {
    let _ = writeln!(out, "genus {}", ring.genus());
    let _ = writeln!(out, "truncation {}", ring.truncation());
    let _ = writeln!(out, "floor {floor}");
    let _ = writeln!(out, "xvars {}", ring.xnames().join(" ").trim_end());
}

pub fn write_series(s: &YSeries) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SERIES_HEADER}");
    header_block(&mut out, s.ring(), s.floor());
    let names = s.ring().xnames();
    for (e, c) in s.terms() {
        let _ = writeln!(out, "term {}", format_term(e, c, names));
    }
    out
}

struct Header {
    genus: usize,
    truncation: i32,
    floor: i32,
    xnames: Vec<String>,
}

fn read_header<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Header> {
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = lines.next().ok_or_else(|| parse_err(0, format!("missing `{key}` line")))?;
        let rest = l
            .strip_prefix(key)
            .filter(|r| r.is_empty() || r.starts_with(' '))
            .ok_or_else(|| parse_err(n, format!("expected `{key}`")))?;
        Ok((n, rest.trim().to_string()))
    };
    let (n, g) = field("genus")?;
    let genus = g.parse().map_err(|_| parse_err(n, "bad genus"))?;
    let (n, t) = field("truncation")?;
    let truncation = t.parse().map_err(|_| parse_err(n, "bad truncation"))?;
    let (n, f) = field("floor")?;
    let floor = f.parse().map_err(|_| parse_err(n, "bad floor"))?;
    let (_, x) = field("xvars")?;
    let xnames = x.split_whitespace().map(str::to_string).collect();
    Ok(Header { genus, truncation, floor, xnames })
}

fn header_ring(h: &Header) -> std::sync::Arc<SeriesRing> {
    SeriesRing::with_bound(h.genus, h.truncation, (-h.floor).max(h.truncation), h.xnames.clone())
}

pub fn read_series(src: &str) -> Result<YSeries> {
    let mut lines = src.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    check_header(lines.next().map(|(_, l)| l), SERIES_HEADER)?;
    let h = read_header(&mut lines)?;
    let ring = header_ring(&h);
    let mut terms = Vec::new();
    for (n, l) in lines {
        let rest = l.strip_prefix("term ").ok_or_else(|| parse_err(n, "expected `term`"))?;
        let (exp, num, den) = split_term(rest, n)?;
        terms.push((parse_exp(exp, h.genus, n)?, parse_coefficient(num, den, &h.xnames, n)?));
    }
    YSeries::from_terms(&ring, h.floor, terms)
}

pub fn write_matrix(m: &EichlerMatrix) -> Result<String> {
    let first = m
        .entries
        .first()
        .and_then(|r| r.first())
        .ok_or_else(|| Error::Input("empty matrix".into()))?;
    let ring = first.ring();
    let floor = m.entries.iter().flatten().map(|s| s.floor()).min().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{MATRIX_HEADER}");
    header_block(&mut out, ring, floor);
    let rows: Vec<String> = (0..m.size()).map(|r| m.row_label(r)).collect();
    let cols: Vec<String> = m.cols.iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "rows {}", rows.join(" "));
    let _ = writeln!(out, "cols {}", cols.join(" "));
    for (r, row) in m.entries.iter().enumerate() {
        for (c, s) in row.iter().enumerate() {
            let _ = writeln!(out, "entry {r} {c}");
            for (e, coef) in s.terms() {
                let _ = writeln!(out, "term {}", format_term(e, coef, ring.xnames()));
            }
        }
    }
    Ok(out)
}

/// Matrix entries as a dense grid of series.
pub fn read_matrix(src: &str) -> Result<Vec<Vec<YSeries>>> {
    let mut lines = src.lines().enumerate().map(|(k, l)| (k + 1, l)).filter(|(_, l)| !l.trim().is_empty());
    check_header(lines.next().map(|(_, l)| l), MATRIX_HEADER)?;
    let h = read_header(&mut lines)?;
    let ring = header_ring(&h);
    let (n, rows) = lines.next().ok_or_else(|| parse_err(0, "missing rows"))?;
    let size = rows.strip_prefix("rows ").ok_or_else(|| parse_err(n, "expected `rows`"))?.split_whitespace().count();
    lines.next();
    let mut grid: Vec<Vec<Vec<(YExp, RationalCoefficient)>>> = vec![vec![Vec::new(); size]; size];
    let mut current: Option<(usize, usize)> = None;
    for (n, l) in lines {
        if let Some(rest) = l.strip_prefix("entry ") {
            let idx: Vec<usize> = rest.split_whitespace().filter_map(|t| t.parse().ok()).collect();
            match idx[..] {
                [r, c] if r < size && c < size => current = Some((r, c)),
                _ => return Err(parse_err(n, "bad entry index")),
            }
        } else if let Some(rest) = l.strip_prefix("term ") {
            let (r, c) = current.ok_or_else(|| parse_err(n, "term before entry"))?;
            let (exp, num, den) = split_term(rest, n)?;
            grid[r][c].push((parse_exp(exp, h.genus, n)?, parse_coefficient(num, den, &h.xnames, n)?));
        } else {
            return Err(parse_err(n, "expected `entry` or `term`"));
        }
    }
    grid.into_iter()
        .map(|row| row.into_iter().map(|t| YSeries::from_terms(&ring, h.floor, t)).collect())
        .collect()
}

/// An INI-style report: ordered sections of ordered `key = value` lines.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    /// Comment lines after the format header, without the leading `# `.
    pub notes: Vec<String>,
    pub timestamp: Option<String>,
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn section(&mut self, name: &str) -> &mut Vec<(String, String)> {
        if let Some(k) = self.sections.iter().position(|(n, _)| n == name) {
            return &mut self.sections[k].1;
        }
        self.sections.push((name.to_string(), Vec::new()));
        &mut self.sections.last_mut().unwrap().1
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        let s = self.section(section);
        let value = value.to_string().replace('\n', " ");
        match s.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => s.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(n, _)| n == section)
            .and_then(|(_, kv)| kv.iter().find(|(k, _)| k == key))
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{REPORT_HEADER}");
        if let Some(t) = &self.timestamp {
            let _ = writeln!(out, "{TIMESTAMP_PREFIX}{t}");
        }
        for n in &self.notes {
            let _ = writeln!(out, "# {n}");
        }
        for (name, kv) in &self.sections {
            let _ = writeln!(out, "\n[{name}]");
            for (k, v) in kv {
                let _ = writeln!(out, "{k} = {v}");
            }
        }
        out
    }

    pub fn parse(src: &str) -> Result<Self> {
        let mut lines = src.lines().enumerate().map(|(k, l)| (k + 1, l));
        check_header(lines.next().map(|(_, l)| l), REPORT_HEADER)?;
        let mut report = Report::new();
        let mut current: Option<String> = None;
        for (n, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            if let Some(t) = l.strip_prefix(TIMESTAMP_PREFIX) {
                report.timestamp = Some(t.to_string());
            } else if let Some(c) = l.strip_prefix("# ") {
                report.notes.push(c.to_string());
            } else if let Some(name) = l.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                report.section(name);
                current = Some(name.to_string());
            } else if let Some((k, v)) = l.split_once(" = ") {
                let sec = current.clone().ok_or_else(|| parse_err(n, "key outside a section"))?;
                report.section(&sec).push((k.to_string(), v.to_string()));
            } else {
                return Err(parse_err(n, "expected `[section]` or `key = value`"));
            }
        }
        Ok(report)
    }
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// A point in a group file: `"inf"` or `[re, im]`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointSpec {
    Named(String),
    Complex([f64; 2]),
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub attracting: PointSpec,
    pub repelling: PointSpec,
    pub multiplier: [f64; 2],
}

/// TOML description of a numeric Schottky group.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub genus: usize,
    pub generators: Vec<GeneratorSpec>,
}

impl GroupFile {
    pub fn parse(src: &str) -> Result<Self> {
        let f: GroupFile = toml::from_str(src).map_err(|e| Error::Config(format!("group file: {e}")))?;
        if f.generators.len() != f.genus {
            return Err(Error::Config(format!("group file lists {} generators for genus {}", f.generators.len(), f.genus)));
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }

    pub fn to_group<T: Real>(&self) -> Result<NumericSchottkyGroup<T>> {
        let c = |v: [f64; 2]| -> Result<Complex<T>> {
            match (T::from(v[0]), T::from(v[1])) {
                (Some(a), Some(b)) => Ok(Complex::new(a, b)),
                _ => Err(Error::Config("unrepresentable number in group file".into())),
            }
        };
        let point = |p: &PointSpec| -> Result<NumPoint<T>> {
            match p {
                PointSpec::Named(s) if s == "inf" => Ok(NumPoint::Infinity),
                PointSpec::Named(s) => Err(Error::Config(format!("unknown point `{s}`, use \"inf\" or [re, im]"))),
                PointSpec::Complex(v) => Ok(NumPoint::Finite(c(*v)?)),
            }
        };
        let att = self.generators.iter().map(|g| point(&g.attracting)).collect::<Result<_>>()?;
        let rep = self.generators.iter().map(|g| point(&g.repelling)).collect::<Result<_>>()?;
        let q = self.generators.iter().map(|g| c(g.multiplier)).collect::<Result<_>>()?;
        NumericSchottkyGroup::new(att, rep, q).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Optional run settings read from a TOML file; command-line flags override them.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub genus: Option<usize>,
    pub trunc: Option<i32>,
    pub wordlen: Option<usize>,
    pub identify_inverses: Option<bool>,
    pub normalized: Option<bool>,
    pub general_x: Option<bool>,
    pub group_file: Option<String>,
    pub primes: Option<Vec<u64>>,
    pub out: Option<String>,
    pub stdout: Option<bool>,
    pub threads: Option<usize>,
    pub precision: Option<u32>,
    pub nodes: Option<usize>,
}

impl ConfigFile {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }
}

/// Series keyed by file stem, as listed in a report's `[series-files]` section.
pub fn read_series_dir(dir: &Path, report: &Report) -> Result<BTreeMap<String, YSeries>> {
    let mut out = BTreeMap::new();
    if let Some((_, kv)) = report.sections.iter().find(|(n, _)| n == "series-files") {
        for (k, file) in kv {
            let src = std::fs::read_to_string(dir.join(file))?;
            out.insert(k.clone(), read_series(&src)?);
        }
    }
    Ok(out)
}
