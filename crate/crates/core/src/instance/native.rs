//! Line-oriented native format.
//!
//! ```text
//! arbx 1
//! name fig1          # optional
//! n 4 root 0
//! a 0 1 1
//! p 3 1
//! ```

use std::fmt::Write as _;

use super::{normalize, Instance, RawInstance};
use crate::error::InstanceError;

fn field<T: std::str::FromStr>(tok: Option<&str>, ln: usize, what: &str) -> Result<T, InstanceError> {
    let tok = tok.ok_or_else(|| InstanceError::parse(ln, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| InstanceError::parse(ln, format!("bad {what} `{tok}`")))
}

pub fn parse_native(text: &str) -> Result<Instance, InstanceError> {
    let mut raw = RawInstance::default();
    let mut seen_header = false;
    let mut seen_size = false;
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let tag = toks.next().unwrap_or_default();
        if !seen_header {
            if tag != "arbx" {
                return Err(InstanceError::parse(ln, "expected header `arbx 1`"));
            }
            let version: u32 = field(toks.next(), ln, "format version")?;
            if version != 1 {
                return Err(InstanceError::parse(ln, format!("unsupported version {version}")));
            }
            seen_header = true;
            continue;
        }
        match tag {
            "name" => raw.name = line["name".len()..].trim().to_string(),
            "n" => {
                if seen_size {
                    return Err(InstanceError::parse(ln, "duplicate size line"));
                }
                raw.n = field(toks.next(), ln, "vertex count")?;
                if toks.next() != Some("root") {
                    return Err(InstanceError::parse(ln, "expected `n <count> root <id>`"));
                }
                raw.root = field(toks.next(), ln, "root")?;
                seen_size = true;
            }
            "a" | "p" if !seen_size => {
                return Err(InstanceError::parse(ln, "size line must come first"));
            }
            "a" => {
                let i = field(toks.next(), ln, "arc tail")?;
                let j = field(toks.next(), ln, "arc head")?;
                let c = field(toks.next(), ln, "arc cost")?;
                raw.arcs.push((i, j, c));
            }
            "p" => {
                let s = field(toks.next(), ln, "precedence source")?;
                let t = field(toks.next(), ln, "precedence target")?;
                raw.precedences.push((s, t));
            }
            other => return Err(InstanceError::parse(ln, format!("unknown record `{other}`"))),
        }
        if tag != "name" && toks.next().is_some() {
            return Err(InstanceError::parse(ln, "trailing tokens"));
        }
    }
    if !seen_header {
        return Err(InstanceError::parse(1, "empty input"));
    }
    if !seen_size {
        return Err(InstanceError::parse(text.lines().count(), "missing size line"));
    }
    normalize(raw)
}

pub fn write_native(inst: &Instance) -> String {
    let mut out = String::from("arbx 1\n");
    if !inst.name().is_empty() {
        let _ = writeln!(out, "name {}", inst.name());
    }
    let _ = writeln!(out, "n {} root {}", inst.n(), inst.root());
    for a in inst.arcs() {
        let _ = writeln!(out, "a {} {} {}", a.from, a.to, a.cost);
    }
    for &(s, t) in inst.precedences() {
        let _ = writeln!(out, "p {s} {t}");
    }
    out
}
