//! Reader and writer for the SOP full-matrix benchmark format.
//!
//! Entry `(i, j)` of the matrix is the cost of arc `i -> j`, except that `-1`
//! declares that `j` must precede `i`, i.e. `(j, i)` belongs to `R` and arc
//! `i -> j` does not exist. Vertex 0 is the root; column 0 carries no arcs.
//!
//! Sparse graphs are written with an extra header line
//! `ABSENT_ARC_WEIGHT: 2147483647`; entries equal to that value then denote
//! missing arcs. Standard files never contain the header, so every
//! non-negative entry is an arc.

use std::fmt::Write as _;

use super::{normalize, Instance, RawInstance};
use crate::error::InstanceError;

/// Marker cost for missing arcs in files written by [`write_sop`].
pub const ABSENT_ARC_WEIGHT: i64 = 2_147_483_647;

/// Parses an SOP matrix file.
pub fn parse_sop(text: &str) -> Result<Instance, InstanceError> {
    let mut name = String::new();
    let mut dimension: Option<(usize, usize)> = None;
    let mut absent: Option<i64> = None;
    let mut section_line = None;
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));

    for (ln, line) in lines.by_ref() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EDGE_WEIGHT_SECTION" || line.starts_with("EDGE_WEIGHT_SECTION") {
            let rest = line["EDGE_WEIGHT_SECTION".len()..].trim_start_matches([':', ' ', '\t']);
            if !rest.is_empty() {
                return Err(InstanceError::parse(ln, "unexpected data after EDGE_WEIGHT_SECTION"));
            }
            section_line = Some(ln);
            break;
        }
        if line == "EOF" {
            break;
        }
        let Some((key, value)) = line.split_once(':') else {
            return Err(InstanceError::parse(ln, format!("malformed header line `{line}`")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "NAME" => name = value.to_string(),
            "DIMENSION" => {
                let n: usize = value
                    .parse()
                    .map_err(|_| InstanceError::parse(ln, format!("bad DIMENSION `{value}`")))?;
                if n < 1 {
                    return Err(InstanceError::parse(ln, "DIMENSION must be positive"));
                }
                dimension = Some((n, ln));
            }
            "EDGE_WEIGHT_TYPE" if value != "EXPLICIT" => {
                return Err(InstanceError::parse(
                    ln,
                    format!("unsupported EDGE_WEIGHT_TYPE `{value}`"),
                ));
            }
            "EDGE_WEIGHT_FORMAT" if value != "FULL_MATRIX" => {
                return Err(InstanceError::parse(
                    ln,
                    format!("unsupported EDGE_WEIGHT_FORMAT `{value}`"),
                ));
            }
            "ABSENT_ARC_WEIGHT" => {
                absent = Some(value.parse().map_err(|_| {
                    InstanceError::parse(ln, format!("bad ABSENT_ARC_WEIGHT `{value}`"))
                })?);
            }
            _ if key.is_empty() || key.contains(char::is_whitespace) => {
                return Err(InstanceError::parse(ln, format!("malformed header key `{key}`")));
            }
            _ => {}
        }
    }

    let section_line =
        section_line.ok_or_else(|| InstanceError::parse(text.lines().count().max(1), "missing EDGE_WEIGHT_SECTION"))?;
    let (n, _) = dimension
        .ok_or_else(|| InstanceError::parse(section_line, "DIMENSION must precede EDGE_WEIGHT_SECTION"))?;

    // (line, tokens) for each non-empty matrix line
    let mut rows: Vec<(usize, Vec<i64>)> = Vec::new();
    for (ln, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        let mut vals = Vec::new();
        for tok in line.split_whitespace() {
            let v: i64 = tok
                .parse()
                .map_err(|_| InstanceError::parse(ln, format!("non-integer matrix entry `{tok}`")))?;
            vals.push(v);
        }
        rows.push((ln, vals));
    }

    let mut flat: Vec<(usize, i64)> = rows
        .iter()
        .flat_map(|(ln, vals)| vals.iter().map(move |&v| (*ln, v)))
        .collect();
    // many SOP files repeat the dimension as the first matrix token
    if flat.len() == n * n + 1 && flat[0].1 == n as i64 {
        flat.remove(0);
        if rows.first().map(|r| r.1.len()) == Some(1) {
            rows.remove(0);
        }
    }
    if flat.len() != n * n {
        let consistent = rows.len() > 1 && rows.iter().all(|r| r.1.len() == rows[0].1.len());
        if consistent && rows[0].1.len() != n {
            return Err(InstanceError::parse(
                rows[0].0,
                format!(
                    "non-square matrix: rows have {} entries but DIMENSION is {n}",
                    rows[0].1.len()
                ),
            ));
        }
        let ln = flat.last().map(|e| e.0).unwrap_or(section_line);
        return Err(InstanceError::parse(
            ln,
            format!("dimension mismatch: expected {} entries, found {}", n * n, flat.len()),
        ));
    }

    let root = 0;
    let mut arcs = Vec::new();
    let mut precedences = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (ln, v) = flat[i * n + j];
            if i == j {
                if v == -1 {
                    return Err(InstanceError::parse(ln, format!("-1 on diagonal at vertex {i}")));
                }
                continue;
            }
            if v == -1 {
                precedences.push((j, i));
            } else if v < 0 {
                return Err(InstanceError::parse(
                    ln,
                    format!("negative entry {v} at ({i}, {j})"),
                ));
            } else if j != root && Some(v) != absent {
                arcs.push((i, j, v));
            }
        }
    }
    normalize(RawInstance {
        name,
        n,
        root,
        arcs,
        precedences,
    })
}

/// Writes an instance as an SOP matrix. The root must be vertex 0.
pub fn write_sop(inst: &Instance) -> Result<String, InstanceError> {
    if inst.root() != 0 {
        return Err(InstanceError::Domain(
            "SOP format requires the root to be vertex 0".into(),
        ));
    }
    let n = inst.n();
    let needs_absent = (0..n).any(|i| {
        (1..n).any(|j| i != j && !inst.has_arc(i, j) && !inst.has_precedence(j, i))
    });
    let mut out = String::new();
    let name = if inst.name().is_empty() { "unnamed" } else { inst.name() };
    let _ = writeln!(out, "NAME: {name}");
    let _ = writeln!(out, "TYPE: SOP");
    let _ = writeln!(out, "DIMENSION: {n}");
    let _ = writeln!(out, "EDGE_WEIGHT_TYPE: EXPLICIT");
    let _ = writeln!(out, "EDGE_WEIGHT_FORMAT: FULL_MATRIX");
    if needs_absent {
        let _ = writeln!(out, "ABSENT_ARC_WEIGHT: {ABSENT_ARC_WEIGHT}");
    }
    let _ = writeln!(out, "EDGE_WEIGHT_SECTION");
    let _ = writeln!(out, "{n}");
    for i in 0..n {
        let row: Vec<String> = (0..n)
            .map(|j| {
                let v = if i == j {
                    0
                } else if inst.has_precedence(j, i) {
                    -1
                } else if j == 0 {
                    0
                } else {
                    inst.cost(i, j).unwrap_or(ABSENT_ARC_WEIGHT)
                };
                v.to_string()
            })
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    let _ = writeln!(out, "EOF");
    Ok(out)
}
