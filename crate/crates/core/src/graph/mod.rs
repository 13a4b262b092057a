//! Weighted digraphs and the two workhorse algorithms built on them:
//! minimum-cost arborescences ([`edmonds_mca`]) and max-flow/min-cut
//! ([`min_cut`]).

mod edmonds;
mod maxflow;

pub use edmonds::{edmonds_mca, MinArborescence, Unreachable};
pub use maxflow::{max_flow, min_cut, CutSet, FlowResult};

use std::collections::VecDeque;

use thiserror::Error;

use crate::instance::Instance;
use crate::scalar::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} is not part of the graph")]
    MissingVertex(usize),
    #[error("arc ({0}, {1}) has a negative weight")]
    NegativeWeight(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphArc<S> {
    pub from: usize,
    pub to: usize,
    pub weight: S,
}

/// Digraph over vertex ids `0..n` with non-negative weights.
///
/// A vertex can be marked absent; it then has no incident arcs and is
/// ignored by spanning and cut computations. This keeps ids aligned with the
/// owning instance when a subgraph such as `D_j` is built.
#[derive(Debug, Clone, PartialEq)]
pub struct DiGraph<S> {
    present: Vec<bool>,
    arcs: Vec<GraphArc<S>>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
}

impl<S: Weight> DiGraph<S> {
    pub fn new(n: usize) -> Self {
        Self::with_vertices(vec![true; n])
    }

    /// Graph whose vertex `v` exists iff `present[v]`.
    pub fn with_vertices(present: Vec<bool>) -> Self {
        let n = present.len();
        DiGraph {
            present,
            arcs: Vec::new(),
            out: vec![Vec::new(); n],
            inc: vec![Vec::new(); n],
        }
    }

    /// Arc-cost graph of an instance.
    pub fn from_instance(inst: &Instance) -> Self {
        let mut g = Self::new(inst.n());
        for a in inst.arcs() {
            g.add_arc(a.from, a.to, S::from_cost(a.cost))
                .expect("instance arcs are valid");
        }
        g
    }

    /// Adds an arc and returns its id. Ids are dense and never change.
    pub fn add_arc(&mut self, from: usize, to: usize, weight: S) -> Result<usize, GraphError> {
        if from == to {
            return Err(GraphError::SelfLoop(from));
        }
        for v in [from, to] {
            if !self.contains(v) {
                return Err(GraphError::MissingVertex(v));
            }
        }
        if weight < S::zero() {
            return Err(GraphError::NegativeWeight(from, to));
        }
        let id = self.arcs.len();
        self.arcs.push(GraphArc { from, to, weight });
        self.out[from].push(id);
        self.inc[to].push(id);
        Ok(id)
    }

    /// Size of the id space, including absent vertices.
    pub fn n(&self) -> usize {
        self.present.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.present.get(v).copied().unwrap_or(false)
    }

    pub fn vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).filter(move |&v| self.present[v])
    }

    pub fn arcs(&self) -> &[GraphArc<S>] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &GraphArc<S> {
        &self.arcs[id]
    }

    pub fn out_arcs(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    pub fn in_arcs(&self, v: usize) -> &[usize] {
        &self.inc[v]
    }

    /// Vertices reachable from `s` along arcs whose weight exceeds the
    /// scalar tolerance (every arc when `all_arcs` is set).
    pub fn reachable_from(&self, s: usize, all_arcs: bool) -> Vec<bool> {
        let mut seen = vec![false; self.n()];
        if !self.contains(s) {
            return seen;
        }
        seen[s] = true;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &id in &self.out[u] {
                let a = &self.arcs[id];
                if !seen[a.to] && (all_arcs || a.weight > S::tolerance()) {
                    seen[a.to] = true;
                    queue.push_back(a.to);
                }
            }
        }
        seen
    }
}

/// `V_j = { i : (j, i) not in R }`, ascending.
pub fn allowed_predecessors(inst: &Instance, j: usize) -> Vec<usize> {
    (0..inst.n()).filter(|&i| !inst.has_precedence(j, i)).collect()
}

/// Membership mask of [`allowed_predecessors`].
pub fn allowed_mask(inst: &Instance, j: usize) -> Vec<bool> {
    (0..inst.n()).map(|i| !inst.has_precedence(j, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_arcs() {
        let mut g = DiGraph::<f64>::with_vertices(vec![true, true, false]);
        assert_eq!(g.add_arc(0, 0, 1.0), Err(GraphError::SelfLoop(0)));
        assert_eq!(g.add_arc(0, 2, 1.0), Err(GraphError::MissingVertex(2)));
        assert_eq!(g.add_arc(0, 1, -1.0), Err(GraphError::NegativeWeight(0, 1)));
        assert_eq!(g.add_arc(0, 1, 0.5), Ok(0));
        assert_eq!(g.vertices().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn allowed_predecessors_fig1() {
        let inst = Instance::new(4, 0, &[(0, 1, 1), (0, 2, 3), (0, 3, 2)], &[(3, 1)]).unwrap();
        assert_eq!(allowed_predecessors(&inst, 3), vec![0, 2, 3]);
        assert_eq!(allowed_predecessors(&inst, 1), vec![0, 1, 2, 3]);
    }

    #[test]
    fn reachability_skips_zero_weights() {
        let mut g = DiGraph::<f64>::new(3);
        g.add_arc(0, 1, 0.0).unwrap();
        g.add_arc(1, 2, 1.0).unwrap();
        assert_eq!(g.reachable_from(0, false), vec![true, false, false]);
        assert_eq!(g.reachable_from(0, true), vec![true, true, true]);
    }
}
