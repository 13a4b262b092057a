//! Entry and waiting times for a fixed tree.
//!
//! For a fixed tree the timing problem is the linear program
//!
//! ```text
//! min  sum_{j != r} (d_j - d_p(j))
//! s.t. d_r = 0,  d_j - d_p(j) >= c_p(j)j,  d_t - d_s >= 0 for (s, t) in R
//! ```
//!
//! The earliest schedule (componentwise-minimal `d`) is feasible but not
//! always optimal: when several precedence targets sit below a common
//! ancestor, one wait at the ancestor can be cheaper than a wait at each
//! target. [`entry_times`] therefore solves the LP exactly through its dual,
//! an uncapacitated min-cost flow on the constraint digraph, and recovers the
//! smallest optimal `d` from the optimal flow.

use std::collections::VecDeque;

use thiserror::Error;

use super::{Arborescence, TimedSolution};
use crate::instance::Instance;

/// The timing constraints of a tree admit no solution: some cycle of tree
/// arcs and precedences has positive length.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no entry times exist: constraint cycle of positive length through {cycle:?}")]
pub struct WtInfeasible {
    pub cycle: Vec<usize>,
}

/// Constraint `d[to] - d[from] >= len`.
#[derive(Debug, Clone, Copy)]
struct Constraint {
    from: usize,
    to: usize,
    len: i64,
}

fn constraints(inst: &Instance, arbo: &Arborescence) -> Vec<Constraint> {
    let mut cs: Vec<Constraint> = inst
        .non_root()
        .map(|j| {
            let p = arbo.parent[j].expect("validated tree");
            Constraint {
                from: p,
                to: j,
                len: inst.cost(p, j).expect("validated tree"),
            }
        })
        .collect();
    cs.extend(inst.precedences().iter().map(|&(s, t)| Constraint { from: s, to: t, len: 0 }));
    cs
}

/// Longest distances from `src`; `Err` carries a positive cycle.
fn longest_paths(n: usize, src: usize, cs: &[Constraint]) -> Result<Vec<i64>, Vec<usize>> {
    const UNSET: i64 = i64::MIN;
    let mut dist = vec![UNSET; n];
    let mut pred = vec![usize::MAX; n];
    dist[src] = 0;
    let mut last = None;
    for _ in 0..n {
        last = None;
        for (k, c) in cs.iter().enumerate() {
            if dist[c.from] != UNSET && dist[c.from] + c.len > dist[c.to] {
                dist[c.to] = dist[c.from] + c.len;
                pred[c.to] = k;
                last = Some(c.to);
            }
        }
        if last.is_none() {
            return Ok(dist);
        }
    }
    // a relaxation in round n implies a positive cycle; walk back onto it
    let mut v = last.unwrap();
    for _ in 0..n {
        v = cs[pred[v]].from;
    }
    let mut cycle = vec![v];
    let mut u = cs[pred[v]].from;
    while u != v {
        cycle.push(u);
        u = cs[pred[u]].from;
    }
    cycle.reverse();
    Err(cycle)
}

/// Componentwise-minimal entry times: longest tree-and-precedence paths
/// from the root. Feasible whenever any schedule exists, but its total wait
/// can exceed the optimum of [`entry_times`].
pub fn earliest_entry_times(inst: &Instance, arbo: &Arborescence) -> Result<Vec<i64>, WtInfeasible> {
    let cs = constraints(inst, arbo);
    longest_paths(inst.n(), inst.root(), &cs).map_err(|cycle| WtInfeasible { cycle })
}

/// Optimal entry and waiting times for a fixed tree.
///
/// Among all optimal schedules the componentwise-smallest is returned, so the
/// result is unique. The tree must validate; precedence violations in the
/// structural sense are not checked here.
pub fn entry_times(inst: &Instance, arbo: &Arborescence) -> Result<TimedSolution, WtInfeasible> {
    let n = inst.n();
    let root = inst.root();
    let cs = constraints(inst, arbo);
    longest_paths(n, root, &cs).map_err(|cycle| WtInfeasible { cycle })?;

    // Dual: net inflow b_v = 1 - children(v) at each non-root v, maximize
    // sum len * f. Solved as min-cost flow with cost -len.
    let children = arbo.children();
    let source = n;
    let sink = n + 1;
    let mut mcf = MinCostFlow::new(n + 2);
    let mut total_supply = 0i64;
    for v in 0..n {
        let b = if v == root {
            -(children[v].len() as i64)
        } else {
            1 - children[v].len() as i64
        };
        if b < 0 {
            mcf.add_edge(source, v, -b, 0);
            total_supply += -b;
        } else if b > 0 {
            mcf.add_edge(v, sink, b, 0);
        }
    }
    let cap = total_supply + 1;
    let arc_edges: Vec<usize> = cs.iter().map(|c| mcf.add_edge(c.from, c.to, cap, -c.len)).collect();
    let moved = mcf.run(source, sink);
    assert_eq!(moved, total_supply, "tree flow is always feasible");

    // Tight constraints on the support of the optimal flow become equalities.
    let mut tight = cs.clone();
    for (c, &e) in cs.iter().zip(&arc_edges) {
        if mcf.flow(e) > 0 {
            tight.push(Constraint {
                from: c.to,
                to: c.from,
                len: -c.len,
            });
        }
    }
    let entry = longest_paths(n, root, &tight).expect("optimal flow leaves no positive cycle");

    let mut wait = vec![0; n];
    for j in inst.non_root() {
        let p = arbo.parent[j].unwrap();
        wait[j] = entry[j] - entry[p] - inst.cost(p, j).unwrap();
        debug_assert!(wait[j] >= 0);
    }
    let objective = arbo.cost + wait.iter().sum::<i64>();
    Ok(TimedSolution {
        arborescence: arbo.clone(),
        entry,
        wait,
        objective,
    })
}

struct McfEdge {
    to: usize,
    cap: i64,
    cost: i64,
}

/// Successive shortest paths with queue-based Bellman-Ford. Costs may be
/// negative as long as the residual graph has no negative cycle.
struct MinCostFlow {
    edges: Vec<McfEdge>,
    adj: Vec<Vec<usize>>,
}

impl MinCostFlow {
    fn new(n: usize) -> Self {
        MinCostFlow {
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.edges.len();
        self.adj[from].push(id);
        self.edges.push(McfEdge { to, cap, cost });
        self.adj[to].push(id + 1);
        self.edges.push(McfEdge {
            to: from,
            cap: 0,
            cost: -cost,
        });
        id
    }

    fn flow(&self, id: usize) -> i64 {
        self.edges[id + 1].cap
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut dist = vec![i64::MAX; n];
            let mut via = vec![usize::MAX; n];
            let mut queued = vec![false; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            queued[s] = true;
            while let Some(u) = q.pop_front() {
                queued[u] = false;
                for &e in &self.adj[u] {
                    let ed = &self.edges[e];
                    if ed.cap > 0 && dist[u] + ed.cost < dist[ed.to] {
                        dist[ed.to] = dist[u] + ed.cost;
                        via[ed.to] = e;
                        if !queued[ed.to] {
                            queued[ed.to] = true;
                            q.push_back(ed.to);
                        }
                    }
                }
            }
            if dist[t] == i64::MAX {
                return total;
            }
            let mut push = i64::MAX;
            let mut v = t;
            while v != s {
                let e = via[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = via[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            total += push;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig3() -> Instance {
        Instance::new(
            4,
            0,
            &[
                (0, 1, 1),
                (0, 2, 3),
                (0, 3, 1),
                (1, 2, 1),
                (1, 3, 4),
                (2, 1, 2),
                (2, 3, 3),
                (3, 1, 2),
            ],
            &[(2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn fig3_right_tree() {
        let inst = fig3();
        let t = Arborescence::from_parents(&inst, vec![None, Some(0), Some(1), Some(0)]).unwrap();
        let ts = entry_times(&inst, &t).unwrap();
        assert_eq!(ts.entry, vec![0, 1, 2, 2]);
        assert_eq!(ts.wait, vec![0, 0, 0, 1]);
        assert_eq!(ts.objective, 4);
        ts.check(&inst).unwrap();
    }

    #[test]
    fn shared_wait_beats_earliest_schedule() {
        // r=0, i=1, a=2, b=3, x=4, y=5; x must be entered before a, y before b
        let inst = Instance::new(
            6,
            0,
            &[(0, 1, 0), (1, 2, 0), (1, 3, 0), (0, 4, 1), (0, 5, 1)],
            &[(4, 2), (5, 3)],
        )
        .unwrap();
        let t = Arborescence::from_parents(&inst, vec![None, Some(0), Some(1), Some(1), Some(0), Some(0)])
            .unwrap();
        let early = earliest_entry_times(&inst, &t).unwrap();
        assert_eq!(early, vec![0, 0, 1, 1, 1, 1]);
        let ts = entry_times(&inst, &t).unwrap();
        assert_eq!(ts.entry, vec![0, 1, 1, 1, 1, 1]);
        assert_eq!(ts.wait, vec![0, 1, 0, 0, 0, 0]);
        assert_eq!(ts.objective, 3);
        ts.check(&inst).unwrap();
    }

    fn branches(c_bc: i64) -> (Instance, Arborescence) {
        // r=0, a=1, b=2, c=3 on branches r-a and r-b-c; R = {(a, b), (c, a)}
        let inst = Instance::new(4, 0, &[(0, 1, 1), (0, 2, 1), (2, 3, c_bc)], &[(1, 2), (3, 1)]).unwrap();
        let t = Arborescence::from_parents(&inst, vec![None, Some(0), Some(0), Some(2)]).unwrap();
        (inst, t)
    }

    #[test]
    fn positive_cycle_is_infeasible() {
        let (inst, t) = branches(5);
        let err = entry_times(&inst, &t).unwrap_err();
        assert_eq!(err.cycle.len(), 3);
        assert!(earliest_entry_times(&inst, &t).is_err());
    }

    #[test]
    fn zero_length_cycle_is_accepted() {
        let (inst, t) = branches(0);
        let ts = entry_times(&inst, &t).unwrap();
        assert_eq!(ts.entry, vec![0, 1, 1, 1]);
        assert_eq!(ts.objective, 2);
    }

    #[test]
    fn no_precedences_means_no_waits() {
        let inst = Instance::new(3, 0, &[(0, 1, 4), (1, 2, 5)], &[]).unwrap();
        let t = Arborescence::from_parents(&inst, vec![None, Some(0), Some(1)]).unwrap();
        let ts = entry_times(&inst, &t).unwrap();
        assert_eq!(ts.entry, vec![0, 4, 9]);
        assert_eq!(ts.objective, 9);
        assert_eq!(entry_times(&inst, &ts.arborescence).unwrap(), ts);
    }
}
