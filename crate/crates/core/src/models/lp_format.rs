//! LP text format: `Minimize`, `Subject To`, `Bounds`, `Binary`, `End`.
//!
//! Metadata travels in leading `\ key: value` comment lines. Every variable
//! is listed in `Bounds` in column order so that [`read_lp`] restores the
//! exact column layout. Lines never exceed 255 characters.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{Formulation, LinearModel, Sense, VarKind};
use crate::scalar::Field;

const WIDTH: usize = 250;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LP line {line}: {message}")]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> LpParseError {
    LpParseError {
        line,
        message: message.into(),
    }
}

fn number<S: Field>(v: &S) -> String {
    let f = v.to_f64_lossy();
    if f.fract() == 0.0 && f.abs() < 1e15 {
        format!("{}", f as i64)
    } else {
        format!("{f}")
    }
}

struct Wrapped {
    out: String,
    line: String,
}

impl Wrapped {
    fn new() -> Self {
        Wrapped {
            out: String::new(),
            line: String::new(),
        }
    }

    fn push(&mut self, piece: &str) {
        if !self.line.is_empty() && self.line.len() + piece.len() > WIDTH {
            self.out.push_str(&self.line);
            self.out.push('\n');
            self.line = "   ".to_string();
        }
        self.line.push_str(piece);
    }

    fn finish(mut self) -> String {
        if !self.line.is_empty() {
            self.out.push_str(&self.line);
            self.out.push('\n');
        }
        self.out
    }
}

fn push_terms<S: Field>(w: &mut Wrapped, m: &LinearModel<S>, terms: &[(usize, S)]) {
    let mut first = true;
    for (v, c) in terms.iter().filter(|(_, c)| !c.is_zero()) {
        let name = &m.variables()[*v].name;
        let sign = if *c < S::zero() { "-" } else { "+" };
        let mag = c.abs();
        let body = if mag.is_one() {
            name.clone()
        } else {
            format!("{} {name}", number(&mag))
        };
        let piece = match (first, sign) {
            (true, "+") => format!(" {body}"),
            _ => format!(" {sign} {body}"),
        };
        w.push(&piece);
        first = false;
    }
    if first {
        if let Some(v) = m.variables().first() {
            w.push(&format!(" 0 {}", v.name));
        }
    }
}

/// Writes `m` in LP text format.
pub fn export_lp<S: Field>(m: &LinearModel<S>) -> String {
    let mut out = String::new();
    if let Some(f) = m.meta.formulation {
        writeln!(out, "\\ formulation: {f}").unwrap();
    }
    if !m.meta.instance.is_empty() {
        writeln!(out, "\\ instance: {}", m.meta.instance).unwrap();
    }
    if let Some(big_m) = m.meta.big_m {
        writeln!(out, "\\ big_m: {big_m}").unwrap();
        writeln!(out, "\\ big_m_fallback: {}", m.meta.big_m_fallback).unwrap();
    }
    if m.meta.formulation == Some(Formulation::Aac) {
        writeln!(out, "\\ valid_inequalities: {}", m.meta.valid_inequalities).unwrap();
    }

    out.push_str("Minimize\n");
    let mut w = Wrapped::new();
    w.push(" obj:");
    push_terms(&mut w, m, m.objective());
    out.push_str(&w.finish());

    out.push_str("Subject To\n");
    for row in m.constraints() {
        let mut w = Wrapped::new();
        w.push(&format!(" {}:", row.name));
        push_terms(&mut w, m, &row.terms);
        w.push(&format!(" {} {}", row.sense.symbol(), number(&row.rhs)));
        out.push_str(&w.finish());
    }

    out.push_str("Bounds\n");
    for v in m.variables() {
        match &v.upper {
            Some(u) => writeln!(out, " {} <= {} <= {}", number(&v.lower), v.name, number(u)).unwrap(),
            None => writeln!(out, " {} >= {}", v.name, number(&v.lower)).unwrap(),
        }
    }

    let binaries: Vec<&str> = m
        .variables()
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binary\n");
        let mut w = Wrapped::new();
        for b in binaries {
            w.push(&format!(" {b}"));
        }
        out.push_str(&w.finish());
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Binary,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    match line.to_ascii_lowercase().as_str() {
        "minimize" | "minimise" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
        "bounds" => Some(Section::Bounds),
        "binary" | "binaries" | "bin" => Some(Section::Binary),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn parse_number(tok: &str, line: usize) -> Result<f64, LpParseError> {
    match tok.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| err(line, format!("expected a number, got `{tok}`"))),
    }
}

fn parse_sense(tok: &str) -> Option<Sense> {
    match tok {
        "<=" | "=<" | "<" => Some(Sense::Le),
        ">=" | "=>" | ">" => Some(Sense::Ge),
        "=" => Some(Sense::Eq),
        _ => None,
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Linear expression tokens into `(name, coef)` pairs.
fn parse_terms(tokens: &[(String, usize)]) -> Result<Vec<(String, f64)>, LpParseError> {
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for (tok, line) in tokens {
        match tok.as_str() {
            "+" => {}
            "-" => sign = -sign,
            t if is_number(t) => {
                if coef.is_some() {
                    return Err(err(*line, "two coefficients in a row"));
                }
                coef = Some(t.parse().unwrap());
            }
            name => {
                terms.push((name.to_string(), sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
        }
    }
    if coef.is_some() {
        return Err(err(tokens.last().map_or(0, |t| t.1), "dangling coefficient"));
    }
    Ok(terms)
}

struct RawRow {
    name: String,
    terms: Vec<(String, f64)>,
    sense: Sense,
    rhs: f64,
}

/// Reads a model written by [`export_lp`] (or any file in the same subset of
/// the format) back into a floating-point model.
pub fn read_lp(text: &str) -> Result<LinearModel<f64>, LpParseError> {
    let mut model = LinearModel::<f64>::new();
    let mut section = Section::Preamble;
    let mut obj_tokens: Vec<(String, usize)> = Vec::new();
    let mut row_tokens: Vec<(String, usize)> = Vec::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut bounds: Vec<(String, f64, Option<f64>)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        if raw.len() > 255 {
            return Err(err(ln, "line longer than 255 characters"));
        }
        if let Some(comment) = raw.trim_start().strip_prefix('\\') {
            if let Some((key, value)) = comment.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "formulation" => {
                        model.meta.formulation = Some(value.parse().map_err(|e: String| err(ln, e))?)
                    }
                    "instance" => model.meta.instance = value.to_string(),
                    "big_m" => {
                        model.meta.big_m = Some(value.parse().map_err(|_| err(ln, "bad big_m"))?)
                    }
                    "big_m_fallback" => model.meta.big_m_fallback = value == "true",
                    "valid_inequalities" => model.meta.valid_inequalities = value == "true",
                    _ => {}
                }
            }
            continue;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            if section == Section::End {
                return Err(err(ln, "content after End"));
            }
            section = s;
            continue;
        }
        let tokens = line.split_whitespace().map(|t| (t.to_string(), ln));
        match section {
            Section::Preamble => return Err(err(ln, "expected `Minimize`")),
            Section::End => return Err(err(ln, "content after End")),
            Section::Objective => obj_tokens.extend(tokens),
            Section::Rows => {
                for tok in tokens {
                    row_tokens.push(tok);
                    let n = row_tokens.len();
                    if n >= 2 && parse_sense(&row_tokens[n - 2].0).is_some() && is_number(&row_tokens[n - 1].0) {
                        rows.push(finish_row(std::mem::take(&mut row_tokens), rows.len())?);
                    }
                }
            }
            Section::Bounds => bounds.push(parse_bound(line, ln)?),
            Section::Binary => binaries.extend(line.split_whitespace().map(str::to_string)),
        }
    }
    if section != Section::End {
        return Err(err(text.lines().count(), "missing `End`"));
    }
    if let Some((_, ln)) = row_tokens.first() {
        return Err(err(*ln, "unterminated constraint"));
    }
    if let Some((first, _)) = obj_tokens.first() {
        if first.ends_with(':') {
            obj_tokens.remove(0);
        }
    }
    let objective = parse_terms(&obj_tokens)?;

    let mut columns: HashMap<String, usize> = HashMap::new();
    let is_binary: std::collections::HashSet<&String> = binaries.iter().collect();
    let mut declare = |m: &mut LinearModel<f64>, name: &str| -> usize {
        if let Some(&c) = columns.get(name) {
            return c;
        }
        let kind = if is_binary.contains(&name.to_string()) {
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        let c = m.add_var(name, kind, 0.0, None).expect("unseen name");
        columns.insert(name.to_string(), c);
        c
    };
    for (name, _, _) in &bounds {
        declare(&mut model, name);
    }
    for name in &binaries {
        declare(&mut model, name);
    }
    let mut obj = Vec::new();
    for (name, c) in objective {
        let col = declare(&mut model, &name);
        if c != 0.0 {
            obj.push((col, c));
        }
    }
    model.set_objective(obj);
    for row in rows {
        let mut terms = Vec::new();
        for (name, c) in row.terms {
            let col = declare(&mut model, &name);
            if c != 0.0 {
                terms.push((col, c));
            }
        }
        model
            .add_constraint(row.name.clone(), terms, row.sense, row.rhs)
            .map_err(|e| err(0, e.to_string()))?;
    }
    for (name, lo, hi) in bounds {
        let col = columns[&name];
        let v = model.variable_mut(col);
        if v.kind == VarKind::Continuous {
            v.lower = lo;
            v.upper = hi;
        }
    }
    Ok(model)
}

fn finish_row(tokens: Vec<(String, usize)>, index: usize) -> Result<RawRow, LpParseError> {
    let n = tokens.len();
    let line = tokens[n - 1].1;
    let sense = parse_sense(&tokens[n - 2].0).unwrap();
    let rhs = parse_number(&tokens[n - 1].0, line)?;
    let mut body = &tokens[..n - 2];
    let name = match body.first() {
        Some((t, _)) if t.ends_with(':') && t.len() > 1 => {
            let name = t[..t.len() - 1].to_string();
            body = &body[1..];
            name
        }
        _ => format!("r_{index}"),
    };
    Ok(RawRow {
        name,
        terms: parse_terms(body)?,
        sense,
        rhs,
    })
}

fn parse_bound(line: &str, ln: usize) -> Result<(String, f64, Option<f64>), LpParseError> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let upper = |v: f64| if v == f64::INFINITY { None } else { Some(v) };
    match toks.as_slice() {
        [name, "free"] => Ok((name.to_string(), f64::NEG_INFINITY, None)),
        [lo, "<=", name, "<=", hi] => Ok((name.to_string(), parse_number(lo, ln)?, upper(parse_number(hi, ln)?))),
        [name, ">=", lo] => Ok((name.to_string(), parse_number(lo, ln)?, None)),
        [name, "<=", hi] => Ok((name.to_string(), 0.0, upper(parse_number(hi, ln)?))),
        [name, "=", v] => {
            let v = parse_number(v, ln)?;
            Ok((name.to_string(), v, Some(v)))
        }
        _ => Err(err(ln, format!("unrecognised bound `{line}`"))),
    }
}
