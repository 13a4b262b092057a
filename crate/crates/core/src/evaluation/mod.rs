//! Candidate solutions: structural validation, precedence checks and
//! objective values for the three problem variants.

mod schedule;

pub use schedule::{earliest_entry_times, entry_times, WtInfeasible};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;
use crate::graph::{edmonds_mca, DiGraph, Unreachable};
use crate::instance::Instance;

/// A spanning arborescence given by its parent map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Arborescence {
    /// `parent[root]` is `None`; every other entry is `Some`.
    pub parent: Vec<Option<usize>>,
    /// Sum of arc costs.
    pub cost: i64,
}

/// Structural defect of a parent map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    WrongLength { expected: usize, got: usize },
    RootHasParent { parent: usize },
    MissingParent { vertex: usize },
    ParentOutOfRange { vertex: usize, parent: usize },
    MissingArc { from: usize, to: usize },
    /// A parent cycle, listed from its smallest vertex in parent order.
    Cycle { vertices: Vec<usize> },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::WrongLength { expected, got } => {
                write!(f, "parent map has {got} entries, expected {expected}")
            }
            Violation::RootHasParent { parent } => write!(f, "root has parent {parent}"),
            Violation::MissingParent { vertex } => write!(f, "vertex {vertex} has no parent"),
            Violation::ParentOutOfRange { vertex, parent } => {
                write!(f, "vertex {vertex} has out-of-range parent {parent}")
            }
            Violation::MissingArc { from, to } => write!(f, "arc ({from}, {to}) is not in the instance"),
            Violation::Cycle { vertices } => write!(f, "cycle through {vertices:?}"),
        }
    }
}

/// Checks that `parent` encodes a spanning arborescence of `inst`.
///
/// Each bad pointer (absent, out of range or along a missing arc) yields one
/// violation and is not followed further; each distinct cycle among the
/// remaining pointers yields one more. Unreachability of the vertices below
/// a defect is implied and not reported separately.
pub fn validate_arborescence(inst: &Instance, parent: &[Option<usize>]) -> Result<(), Vec<Violation>> {
    let n = inst.n();
    if parent.len() != n {
        return Err(vec![Violation::WrongLength {
            expected: n,
            got: parent.len(),
        }]);
    }
    let root = inst.root();
    let mut out = Vec::new();
    // follow[v] is the pointer used for cycle detection
    let mut follow: Vec<Option<usize>> = vec![None; n];
    for v in 0..n {
        match (v == root, parent[v]) {
            (true, None) => {}
            (true, Some(p)) => out.push(Violation::RootHasParent { parent: p }),
            (false, None) => out.push(Violation::MissingParent { vertex: v }),
            (false, Some(p)) if p >= n => out.push(Violation::ParentOutOfRange { vertex: v, parent: p }),
            (false, Some(p)) if !inst.has_arc(p, v) => out.push(Violation::MissingArc { from: p, to: v }),
            (false, Some(p)) => follow[v] = Some(p),
        }
    }
    let mut state = vec![0u8; n];
    for start in 0..n {
        let mut v = start;
        let mut walk = Vec::new();
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            match follow[v] {
                Some(p) => v = p,
                None => break,
            }
        }
        if state[v] == 1 && follow[v].is_some() {
            let mut cycle = vec![v];
            let mut u = follow[v].unwrap();
            while u != v {
                cycle.push(u);
                u = follow[u].unwrap();
            }
            let k = cycle.iter().enumerate().min_by_key(|(_, &x)| x).unwrap().0;
            cycle.rotate_left(k);
            out.push(Violation::Cycle { vertices: cycle });
        }
        for w in walk {
            state[w] = 2;
        }
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

impl Arborescence {
    /// Validates `parent` and computes its cost.
    pub fn from_parents(inst: &Instance, parent: Vec<Option<usize>>) -> Result<Self, Vec<Violation>> {
        validate_arborescence(inst, &parent)?;
        let cost = inst
            .non_root()
            .map(|v| inst.cost(parent[v].unwrap(), v).unwrap())
            .sum();
        Ok(Arborescence { parent, cost })
    }

    /// Builds from a list of arc ids, one per non-root vertex.
    pub fn from_arc_ids(inst: &Instance, ids: &[usize]) -> Result<Self, Vec<Violation>> {
        let mut parent = vec![None; inst.n()];
        for &id in ids {
            let a = inst.arc(id);
            parent[a.to] = Some(a.from);
        }
        Self::from_parents(inst, parent)
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    /// Children lists, ascending.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = p {
                ch[*p].push(v);
            }
        }
        ch
    }

    /// Arc ids of the tree in the instance, ascending.
    pub fn arc_ids(&self, inst: &Instance) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .parent
            .iter()
            .enumerate()
            .filter_map(|(v, p)| p.and_then(|p| inst.arc_id(p, v)))
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Vertices on the path from the root to `v`, root first.
    pub fn path_from_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut u = v;
        while let Some(p) = self.parent[u] {
            path.push(p);
            u = p;
            if path.len() > self.parent.len() {
                break;
            }
        }
        path.reverse();
        path
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let ch = self.children();
        let mut order = vec![root];
        let mut k = 0;
        while k < order.len() {
            order.extend_from_slice(&ch[order[k]]);
            k += 1;
        }
        order
    }

    /// Entry/exit stamps of a depth-first traversal, for ancestor queries.
    pub(crate) fn dfs_stamps(&self, root: usize) -> (Vec<usize>, Vec<usize>) {
        let ch = self.children();
        let n = self.parent.len();
        let (mut tin, mut tout) = (vec![0; n], vec![0; n]);
        let mut clock = 0;
        let mut stack = vec![(root, 0usize)];
        tin[root] = clock;
        clock += 1;
        while let Some(top) = stack.last_mut() {
            let v = top.0;
            if top.1 < ch[v].len() {
                let c = ch[v][top.1];
                top.1 += 1;
                tin[c] = clock;
                clock += 1;
                stack.push((c, 0));
            } else {
                tout[v] = clock;
                clock += 1;
                stack.pop();
            }
        }
        (tin, tout)
    }
}

/// Every `(s, t)` in `R` such that `t` lies on the root path of `s`.
/// The tree must validate.
pub fn check_precedences(inst: &Instance, arbo: &Arborescence) -> Vec<(usize, usize)> {
    if inst.precedences().is_empty() {
        return Vec::new();
    }
    let (tin, tout) = arbo.dfs_stamps(inst.root());
    inst.precedences()
        .iter()
        .copied()
        .filter(|&(s, t)| tin[t] < tin[s] && tout[s] < tout[t])
        .collect()
}

/// PCMCA objective: the sum of tree arc costs.
pub fn objective_pcmca(inst: &Instance, arbo: &Arborescence) -> i64 {
    let cost: i64 = inst
        .non_root()
        .map(|v| inst.cost(arbo.parent[v].expect("validated tree"), v).expect("validated tree"))
        .sum();
    assert_eq!(cost, arbo.cost, "stored tree cost is stale");
    cost
}

/// A PCMCA-WT solution: a tree with entry times `d` and waits `w`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TimedSolution {
    pub arborescence: Arborescence,
    /// Entry time of each vertex; 0 at the root.
    pub entry: Vec<i64>,
    /// Waiting time before entering each vertex; 0 at the root.
    pub wait: Vec<i64>,
    /// Arc costs plus waiting times.
    pub objective: i64,
}

impl TimedSolution {
    /// Checks the timing invariants against `inst`.
    pub fn check(&self, inst: &Instance) -> Result<(), String> {
        let arbo = &self.arborescence;
        validate_arborescence(inst, &arbo.parent).map_err(|v| format!("{v:?}"))?;
        let root = inst.root();
        if self.entry[root] != 0 || self.wait[root] != 0 {
            return Err("root must have d = 0 and w = 0".into());
        }
        for j in inst.non_root() {
            let p = arbo.parent[j].unwrap();
            let c = inst.cost(p, j).unwrap();
            if self.wait[j] < 0 {
                return Err(format!("negative wait at {j}"));
            }
            if self.entry[j] != self.entry[p] + c + self.wait[j] {
                return Err(format!("d[{j}] != d[{p}] + c + w[{j}]"));
            }
        }
        for &(s, t) in inst.precedences() {
            if self.entry[t] < self.entry[s] {
                return Err(format!("d[{t}] < d[{s}] for precedence ({s}, {t})"));
            }
        }
        if !check_precedences(inst, arbo).is_empty() {
            return Err("tree violates a precedence structurally".into());
        }
        let telescoped: i64 = inst
            .non_root()
            .map(|j| self.entry[j] - self.entry[arbo.parent[j].unwrap()])
            .sum();
        if telescoped != self.objective || objective_sum(inst, self) != self.objective {
            return Err("objective does not match its definition".into());
        }
        Ok(())
    }
}

fn objective_sum(inst: &Instance, ts: &TimedSolution) -> i64 {
    let waits: i64 = inst.non_root().map(|j| ts.wait[j]).sum();
    ts.arborescence.cost + waits
}

/// PCMCA-WT objective: arc costs plus total waiting time.
pub fn objective_pcmcawt(inst: &Instance, ts: &TimedSolution) -> i64 {
    let value = objective_sum(inst, ts);
    assert_eq!(value, ts.objective, "stored objective is stale");
    value
}

/// `100 (reference - bound) / reference`, the gap measure of the benchmark
/// tables. Negative when the bound exceeds the reference.
pub fn relative_gap(reference: f64, bound: f64) -> Result<f64, DomainError> {
    if !(reference > 0.0) {
        return Err(DomainError(format!("gap reference must be positive, got {reference}")));
    }
    Ok(100.0 * (reference - bound) / reference)
}

/// Unconstrained minimum-cost arborescence of an instance.
pub fn minimum_arborescence(inst: &Instance) -> Result<Arborescence, Unreachable> {
    let g = DiGraph::<i64>::from_instance(inst);
    let t = edmonds_mca(&g, inst.root())?;
    let parent = t.parents(&g);
    Ok(Arborescence {
        parent,
        cost: t.cost,
    })
}
