//! Rectilinear Steiner arborescence to PCMCA-WT.
//!
//! Vertices are the Hanan grid of the point set: input points first, in
//! input order, then Steiner vertices in lexicographic `(x, y)` order. Grid
//! arcs go right and up between adjacent grid points. The point farthest from
//! the origin, `P_FAR`, gets a free arc to every Steiner vertex and must be
//! entered no earlier than any other point.

use std::collections::{BTreeSet, HashMap};

use super::ReductionError;
use crate::instance::{normalize_report, Instance, RawInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaPointSet {
    points: Vec<(i64, i64)>,
}

impl RsaPointSet {
    pub fn new(points: Vec<(i64, i64)>) -> Result<Self, ReductionError> {
        if points.first() != Some(&(0, 0)) {
            return Err(ReductionError::Invalid("the first point must be (0, 0)".into()));
        }
        if let Some(p) = points.iter().find(|p| p.0 < 0 || p.1 < 0) {
            return Err(ReductionError::Invalid(format!("point {p:?} has a negative coordinate")));
        }
        let distinct: BTreeSet<_> = points.iter().collect();
        if distinct.len() != points.len() {
            return Err(ReductionError::Invalid("points must be distinct".into()));
        }
        Ok(RsaPointSet { points })
    }

    pub fn points(&self) -> &[(i64, i64)] {
        &self.points
    }

    /// Index of `P_FAR`: largest `x + y`, lowest index on ties.
    pub fn far(&self) -> usize {
        let mut best = 0;
        for (k, p) in self.points.iter().enumerate() {
            let q = self.points[best];
            if p.0 + p.1 > q.0 + q.1 {
                best = k;
            }
        }
        best
    }
}

/// Reads `x y` lines. Blank lines and lines starting with `#` are skipped.
pub fn parse_points(text: &str) -> Result<RsaPointSet, ReductionError> {
    let mut points = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let parsed = match toks.as_slice() {
            [x, y] => x.parse::<i64>().ok().zip(y.parse::<i64>().ok()),
            _ => None,
        };
        let p = parsed.ok_or_else(|| ReductionError::Parse {
            line: k + 1,
            message: format!("expected two integers, got `{line}`"),
        })?;
        points.push(p);
    }
    RsaPointSet::new(points)
}

/// Grid coordinates of every vertex of [`from_rsa`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsaLayout {
    pub coords: Vec<(i64, i64)>,
    pub terminals: usize,
    pub far: usize,
    /// Arcs between adjacent grid points, `(from, to, length)`.
    pub grid_arcs: Vec<(usize, usize, i64)>,
}

impl RsaLayout {
    pub fn new(pts: &RsaPointSet) -> Self {
        let xs: BTreeSet<i64> = pts.points.iter().map(|p| p.0).collect();
        let ys: BTreeSet<i64> = pts.points.iter().map(|p| p.1).collect();
        let mut coords = pts.points.clone();
        let mut index: HashMap<(i64, i64), usize> = coords.iter().enumerate().map(|(k, &p)| (p, k)).collect();
        for &x in &xs {
            for &y in &ys {
                index.entry((x, y)).or_insert_with(|| {
                    coords.push((x, y));
                    coords.len() - 1
                });
            }
        }
        let xs: Vec<i64> = xs.into_iter().collect();
        let ys: Vec<i64> = ys.into_iter().collect();
        let mut grid_arcs = Vec::new();
        for (v, &(x, y)) in coords.iter().enumerate() {
            let xi = xs.binary_search(&x).unwrap();
            let yi = ys.binary_search(&y).unwrap();
            if let Some(&nx) = xs.get(xi + 1) {
                grid_arcs.push((v, index[&(nx, y)], nx - x));
            }
            if let Some(&ny) = ys.get(yi + 1) {
                grid_arcs.push((v, index[&(x, ny)], ny - y));
            }
        }
        RsaLayout {
            coords,
            terminals: pts.points.len(),
            far: pts.far(),
            grid_arcs,
        }
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn steiner(&self) -> std::ops::Range<usize> {
        self.terminals..self.coords.len()
    }

    pub fn is_steiner(&self, v: usize) -> bool {
        v >= self.terminals
    }
}

pub fn from_rsa(pts: &RsaPointSet) -> Instance {
    let lay = RsaLayout::new(pts);
    let mut arcs: Vec<(usize, usize, i64)> = lay
        .grid_arcs
        .iter()
        .copied()
        .filter(|&(i, j, _)| !(i == lay.far && lay.is_steiner(j)))
        .collect();
    arcs.extend(lay.steiner().map(|s| (lay.far, s, 0)));
    let precedences = (0..lay.terminals).filter(|&p| p != lay.far).map(|p| (p, lay.far)).collect();
    let raw = RawInstance {
        name: format!("rsa-{}", pts.points.len()),
        n: lay.n(),
        root: 0,
        arcs,
        precedences,
    };
    let (inst, removed) = normalize_report(raw).expect("construction is well formed");
    debug_assert!(removed.is_empty());
    inst
}

/// Optimal arborescence length by trying every subset of Steiner vertices.
/// Each subset is completed with the cheapest grid in-arc of every vertex,
/// which is optimal because the grid is acyclic with the origin as its only
/// source.
pub fn rsa_brute_force(pts: &RsaPointSet, max_steiner: usize) -> Result<i64, ReductionError> {
    let lay = RsaLayout::new(pts);
    let steiner = lay.n() - lay.terminals;
    if steiner > max_steiner {
        return Err(ReductionError::TooLarge {
            steiner,
            cap: max_steiner,
        });
    }
    let mut in_arcs: Vec<Vec<(usize, i64)>> = vec![Vec::new(); lay.n()];
    for &(i, j, c) in &lay.grid_arcs {
        in_arcs[j].push((i, c));
    }
    let mut best = i64::MAX;
    for mask in 0u64..1 << steiner {
        let used = |v: usize| !lay.is_steiner(v) || mask >> (v - lay.terminals) & 1 == 1;
        let mut parent = vec![None; lay.n()];
        let mut total = 0;
        let mut ok = true;
        for v in (1..lay.n()).filter(|&v| used(v)) {
            match in_arcs[v].iter().filter(|&&(i, _)| used(i)).min_by_key(|&&(_, c)| c) {
                Some(&(i, c)) => {
                    parent[v] = Some(i);
                    total += c;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            continue;
        }
        for v in 0..lay.terminals {
            let mut len = 0;
            let mut u = v;
            while let Some(p) = parent[u] {
                len += (lay.coords[u].0 - lay.coords[p].0) + (lay.coords[u].1 - lay.coords[p].1);
                u = p;
            }
            assert_eq!(u, 0);
            assert_eq!(len, lay.coords[v].0 + lay.coords[v].1, "paths from the origin are monotone");
        }
        best = best.min(total);
    }
    Ok(best)
}
