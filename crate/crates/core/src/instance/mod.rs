//! Problem instances: a cost digraph, a root and a precedence relation.

mod native;
mod random;
mod sop;

pub use native::{parse_native, write_native};
pub use random::{random_instance, RandomSpec};
pub use sop::{parse_sop, write_sop, ABSENT_ARC_WEIGHT};

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{DomainError, InstanceError};

/// A weighted arc `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub cost: i64,
}

/// Unvalidated instance data as read from a file or produced by a generator.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawInstance {
    pub name: String,
    pub n: usize,
    pub root: usize,
    pub arcs: Vec<(usize, usize, i64)>,
    pub precedences: Vec<(usize, usize)>,
}

/// A normalized PCMCA instance. Immutable once built.
///
/// Arcs are kept sorted by `(from, to)` so that arc ids are stable and
/// deterministic; precedences are sorted and deduplicated. `(s, t)` in `R`
/// means `t` may not lie on the root path of `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    name: String,
    n: usize,
    root: usize,
    arcs: Vec<Arc>,
    precedences: Vec<(usize, usize)>,
    arc_ids: Vec<Option<usize>>,
    prec: Vec<bool>,
    in_arcs: Vec<Vec<usize>>,
    out_arcs: Vec<Vec<usize>>,
}

/// What [`normalize_report`] dropped from the raw data.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Removals {
    pub into_root: Vec<(usize, usize)>,
    pub reversed_precedence: Vec<(usize, usize)>,
}

impl Removals {
    pub fn is_empty(&self) -> bool {
        self.into_root.is_empty() && self.reversed_precedence.is_empty()
    }
}

/// Validates raw data and applies the normalization rules: arcs entering the
/// root and arcs `(t, s)` for `(s, t)` in `R` are dropped; a precedence on the
/// root is an infeasibility error.
pub fn normalize(raw: RawInstance) -> Result<Instance, InstanceError> {
    normalize_report(raw).map(|(inst, _)| inst)
}

/// Like [`normalize`], also returning the dropped arcs.
pub fn normalize_report(raw: RawInstance) -> Result<(Instance, Removals), InstanceError> {
    let RawInstance {
        name,
        n,
        root,
        arcs,
        precedences,
    } = raw;
    if n == 0 {
        return Err(InstanceError::Domain("instance has no vertices".into()));
    }
    let check = |v: usize| {
        if v >= n {
            Err(InstanceError::VertexOutOfRange { vertex: v, n })
        } else {
            Ok(())
        }
    };
    check(root)?;

    let mut prec_set = BTreeSet::new();
    for &(s, t) in &precedences {
        check(s)?;
        check(t)?;
        if s == t {
            return Err(InstanceError::SelfLoop(s));
        }
        if t == root {
            return Err(InstanceError::PrecedenceOnRoot { s, root });
        }
        prec_set.insert((s, t));
    }

    let mut removals = Removals::default();
    let mut seen = BTreeSet::new();
    let mut kept = Vec::with_capacity(arcs.len());
    for &(i, j, cost) in &arcs {
        check(i)?;
        check(j)?;
        if i == j {
            return Err(InstanceError::SelfLoop(i));
        }
        if cost < 0 {
            return Err(InstanceError::NegativeCost { i, j, cost });
        }
        if !seen.insert((i, j)) {
            return Err(InstanceError::DuplicateArc(i, j));
        }
        if j == root {
            removals.into_root.push((i, j));
        } else if prec_set.contains(&(j, i)) {
            removals.reversed_precedence.push((i, j));
        } else {
            kept.push(Arc {
                from: i,
                to: j,
                cost,
            });
        }
    }
    kept.sort();
    Ok((
        Instance::assemble(name, n, root, kept, prec_set.into_iter().collect()),
        removals,
    ))
}

impl Instance {
    fn assemble(
        name: String,
        n: usize,
        root: usize,
        arcs: Vec<Arc>,
        precedences: Vec<(usize, usize)>,
    ) -> Self {
        let mut arc_ids = vec![None; n * n];
        let mut in_arcs = vec![Vec::new(); n];
        let mut out_arcs = vec![Vec::new(); n];
        for (id, a) in arcs.iter().enumerate() {
            arc_ids[a.from * n + a.to] = Some(id);
            in_arcs[a.to].push(id);
            out_arcs[a.from].push(id);
        }
        let mut prec = vec![false; n * n];
        for &(s, t) in &precedences {
            prec[s * n + t] = true;
        }
        Instance {
            name,
            n,
            root,
            arcs,
            precedences,
            arc_ids,
            prec,
            in_arcs,
            out_arcs,
        }
    }

    /// Convenience constructor that normalizes the given data.
    pub fn new(
        n: usize,
        root: usize,
        arcs: &[(usize, usize, i64)],
        precedences: &[(usize, usize)],
    ) -> Result<Self, InstanceError> {
        normalize(RawInstance {
            name: String::new(),
            n,
            root,
            arcs: arcs.to_vec(),
            precedences: precedences.to_vec(),
        })
    }

    /// Reads a file, choosing the native reader when the text starts with the
    /// `arbx` header and the SOP reader otherwise.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| {
            InstanceError::Domain(format!("cannot read {}: {e}", path.display()))
        })?;
        let mut inst = Self::parse_any(&text)?;
        if inst.name.is_empty() {
            if let Some(stem) = path.file_stem() {
                inst.name = stem.to_string_lossy().into_owned();
            }
        }
        Ok(inst)
    }

    /// Parses either supported text format.
    pub fn parse_any(text: &str) -> Result<Self, InstanceError> {
        let first = text
            .lines()
            .map(str::trim)
            .find(|l| !l.is_empty() && !l.starts_with('#'));
        match first {
            Some(l) if l.split_whitespace().next() == Some("arbx") => parse_native(text),
            _ => parse_sop(text),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn precedences(&self) -> &[(usize, usize)] {
        &self.precedences
    }

    pub fn arc_id(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        self.arc_ids[i * self.n + j]
    }

    pub fn has_arc(&self, i: usize, j: usize) -> bool {
        self.arc_id(i, j).is_some()
    }

    pub fn cost(&self, i: usize, j: usize) -> Option<i64> {
        self.arc_id(i, j).map(|id| self.arcs[id].cost)
    }

    pub fn has_precedence(&self, s: usize, t: usize) -> bool {
        s < self.n && t < self.n && self.prec[s * self.n + t]
    }

    /// Arc ids entering `j`, ascending by source.
    pub fn in_arcs(&self, j: usize) -> &[usize] {
        &self.in_arcs[j]
    }

    /// Arc ids leaving `i`, ascending by target.
    pub fn out_arcs(&self, i: usize) -> &[usize] {
        &self.out_arcs[i]
    }

    /// Vertices other than the root, ascending.
    pub fn non_root(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| v != self.root)
    }

    /// Sum of all arc costs.
    pub fn total_cost(&self) -> i64 {
        self.arcs.iter().map(|a| a.cost).sum()
    }

    /// `2|R| / (n(n-1))`.
    pub fn precedence_density(&self) -> Result<f64, DomainError> {
        precedence_density(self)
    }

    /// Same graph with a different precedence relation, normalized again.
    pub fn with_precedences(&self, precedences: &[(usize, usize)]) -> Result<Self, InstanceError> {
        let mut raw = self.to_raw();
        raw.precedences = precedences.to_vec();
        normalize(raw)
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            name: self.name.clone(),
            n: self.n,
            root: self.root,
            arcs: self.arcs.iter().map(|a| (a.from, a.to, a.cost)).collect(),
            precedences: self.precedences.clone(),
        }
    }
}

/// Density of the precedence graph, `2|R| / (n(n-1))`.
pub fn precedence_density(inst: &Instance) -> Result<f64, DomainError> {
    let n = inst.n();
    if n < 2 {
        return Err(DomainError(format!("density needs n >= 2, got {n}")));
    }
    Ok(2.0 * inst.precedences().len() as f64 / (n as f64 * (n as f64 - 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> Instance {
        Instance::new(
            4,
            0,
            &[
                (0, 1, 1),
                (0, 2, 3),
                (0, 3, 2),
                (1, 2, 1),
                (2, 1, 3),
                (2, 3, 1),
                (3, 1, 3),
                (3, 2, 3),
            ],
            &[(3, 1)],
        )
        .unwrap()
    }

    #[test]
    fn arcs_into_root_are_dropped() {
        let (inst, rem) = normalize_report(RawInstance {
            n: 3,
            root: 0,
            arcs: vec![(0, 1, 1), (1, 0, 4), (1, 2, 2)],
            ..Default::default()
        })
        .unwrap();
        assert_eq!(inst.arcs().len(), 2);
        assert!(!inst.has_arc(1, 0));
        assert_eq!(rem.into_root, vec![(1, 0)]);
    }

    #[test]
    fn precedence_removes_reverse_arc() {
        let inst = Instance::new(4, 0, &[(0, 1, 1), (0, 3, 1), (1, 3, 5), (3, 1, 2)], &[(3, 1)])
            .unwrap();
        assert!(!inst.has_arc(1, 3));
        assert!(inst.has_arc(3, 1));
    }

    #[test]
    fn precedence_on_root_is_rejected() {
        let err = Instance::new(3, 0, &[(0, 1, 1), (0, 2, 1)], &[(2, 0)]).unwrap_err();
        assert_eq!(err, InstanceError::PrecedenceOnRoot { s: 2, root: 0 });
    }

    #[test]
    fn malformed_raw_data_is_rejected() {
        assert!(matches!(
            Instance::new(2, 0, &[(0, 0, 1)], &[]),
            Err(InstanceError::SelfLoop(0))
        ));
        assert!(matches!(
            Instance::new(2, 0, &[(0, 1, 1), (0, 1, 2)], &[]),
            Err(InstanceError::DuplicateArc(0, 1))
        ));
        assert!(matches!(
            Instance::new(2, 0, &[(0, 1, -1)], &[]),
            Err(InstanceError::NegativeCost { .. })
        ));
        assert!(matches!(
            Instance::new(2, 0, &[(0, 2, 1)], &[]),
            Err(InstanceError::VertexOutOfRange { vertex: 2, n: 2 })
        ));
    }

    #[test]
    fn lookups_agree_with_arc_list() {
        let inst = fig1();
        assert_eq!(inst.arcs().len(), 8);
        for (id, a) in inst.arcs().iter().enumerate() {
            assert_eq!(inst.arc_id(a.from, a.to), Some(id));
            assert!(inst.in_arcs(a.to).contains(&id));
            assert!(inst.out_arcs(a.from).contains(&id));
        }
        assert_eq!(inst.cost(2, 3), Some(1));
        assert!(inst.has_precedence(3, 1));
        assert!(!inst.has_precedence(1, 3));
    }

    #[test]
    fn density_values() {
        let raw = |n: usize, r: usize| {
            let mut precedences = Vec::new();
            'outer: for s in 1..n {
                for t in 1..n {
                    if precedences.len() == r {
                        break 'outer;
                    }
                    if s < t {
                        precedences.push((s, t));
                    }
                }
            }
            normalize(RawInstance {
                n,
                root: 0,
                precedences,
                ..Default::default()
            })
            .unwrap()
        };
        let d = precedence_density(&raw(9, 22)).unwrap();
        assert_eq!(format!("{d:.3}"), "0.611");
        let d = precedence_density(&raw(18, 48)).unwrap();
        assert_eq!(format!("{d:.3}"), "0.314");
        assert_eq!(precedence_density(&raw(5, 0)).unwrap(), 0.0);
        assert!(precedence_density(&raw(1, 0)).is_err());
    }
}
