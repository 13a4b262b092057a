//! Dinic's blocking-flow algorithm and the canonical minimum cut.

use std::collections::VecDeque;

use super::DiGraph;
use crate::scalar::Weight;

/// Maximum flow together with the residual reachability it induces.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowResult<S> {
    pub value: S,
    /// Flow on each graph arc, indexed by arc id.
    pub arc_flow: Vec<S>,
    /// Vertices reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

/// A minimum `(s, t)`-cut.
#[derive(Debug, Clone, PartialEq)]
pub struct CutSet<S> {
    /// Source-side vertices, ascending. Always contains `s`, never `t`.
    pub source_side: Vec<usize>,
    /// Present vertices outside the source side, ascending.
    pub sink_side: Vec<usize>,
    /// Ids of arcs from the source side to the sink side.
    pub crossing: Vec<usize>,
    /// Sum of crossing arc weights.
    pub value: S,
    /// Max-flow value, equal to `value` up to the scalar tolerance.
    pub flow_value: S,
}

struct Edge<S> {
    to: usize,
    cap: S,
}

struct Dinic<S> {
    edges: Vec<Edge<S>>,
    adj: Vec<Vec<usize>>,
    level: Vec<i32>,
    iter: Vec<usize>,
}

impl<S: Weight> Dinic<S> {
    fn usable(cap: &S) -> bool {
        *cap > S::tolerance()
    }

    fn bfs(&mut self, s: usize, t: usize) -> bool {
        self.level.iter_mut().for_each(|l| *l = -1);
        self.level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &self.adj[u] {
                let v = self.edges[e].to;
                if self.level[v] < 0 && Self::usable(&self.edges[e].cap) {
                    self.level[v] = self.level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        self.level[t] >= 0
    }

    fn dfs(&mut self, u: usize, t: usize, limit: S) -> S {
        if u == t {
            return limit;
        }
        while self.iter[u] < self.adj[u].len() {
            let e = self.adj[u][self.iter[u]];
            let v = self.edges[e].to;
            if self.level[v] == self.level[u] + 1 && Self::usable(&self.edges[e].cap) {
                let cap = self.edges[e].cap.clone();
                let push = if cap < limit { cap } else { limit.clone() };
                let got = self.dfs(v, t, push);
                if Self::usable(&got) {
                    self.edges[e].cap = self.edges[e].cap.clone() - got.clone();
                    self.edges[e ^ 1].cap = self.edges[e ^ 1].cap.clone() + got.clone();
                    return got;
                }
            }
            self.iter[u] += 1;
        }
        S::zero()
    }
}

/// Maximum `(s, t)`-flow. Arcs whose weight is at most the scalar tolerance
/// carry no flow.
pub fn max_flow<S: Weight>(g: &DiGraph<S>, s: usize, t: usize) -> FlowResult<S> {
    assert_ne!(s, t, "source and sink must differ");
    let n = g.n();
    let mut d = Dinic {
        edges: Vec::with_capacity(2 * g.arcs().len()),
        adj: vec![Vec::new(); n],
        level: vec![-1; n],
        iter: vec![0; n],
    };
    for a in g.arcs() {
        d.adj[a.from].push(d.edges.len());
        d.edges.push(Edge {
            to: a.to,
            cap: a.weight.clone(),
        });
        d.adj[a.to].push(d.edges.len());
        d.edges.push(Edge {
            to: a.from,
            cap: S::zero(),
        });
    }
    let mut value = S::zero();
    if g.contains(s) && g.contains(t) {
        let total: S = g.out_arcs(s).iter().fold(S::zero(), |acc, &id| acc + g.arc(id).weight.clone())
            + S::one();
        while d.bfs(s, t) {
            d.iter.iter_mut().for_each(|i| *i = 0);
            loop {
                let f = d.dfs(s, t, total.clone());
                if f.is_zero() {
                    break;
                }
                value = value + f;
            }
        }
    }
    let arc_flow = (0..g.arcs().len())
        .map(|id| d.edges[2 * id + 1].cap.clone())
        .collect();
    // residual reachability from s
    let mut source_side = vec![false; n];
    if g.contains(s) {
        source_side[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &e in &d.adj[u] {
                let v = d.edges[e].to;
                if !source_side[v] && Dinic::<S>::usable(&d.edges[e].cap) {
                    source_side[v] = true;
                    q.push_back(v);
                }
            }
        }
    }
    FlowResult {
        value,
        arc_flow,
        source_side,
    }
}

/// Minimum `(s, t)`-cut whose source side is the residual-reachable set of
/// a maximum flow. Panics if the cut and flow values disagree beyond the
/// accumulated tolerance.
pub fn min_cut<S: Weight>(g: &DiGraph<S>, s: usize, t: usize) -> CutSet<S> {
    let flow = max_flow(g, s, t);
    let source_side: Vec<usize> = g.vertices().filter(|&v| flow.source_side[v]).collect();
    let sink_side: Vec<usize> = g.vertices().filter(|&v| !flow.source_side[v]).collect();
    let mut crossing = Vec::new();
    let mut value = S::zero();
    for (id, a) in g.arcs().iter().enumerate() {
        if flow.source_side[a.from] && !flow.source_side[a.to] {
            crossing.push(id);
            value = value + a.weight.clone();
        }
    }
    let slack = S::tolerance() * S::from_usize(g.arcs().len() + 1).expect("arc count fits scalar");
    assert!(
        (value.clone() - flow.value.clone()).abs() <= slack,
        "max-flow {} differs from min-cut {}",
        flow.value,
        value
    );
    CutSet {
        source_side,
        sink_side,
        crossing,
        value,
        flow_value: flow.value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::Rational;

    #[test]
    fn fig4_right_graph_has_unit_cut() {
        // r=0, t=1, "1"=2, "2"=3, "3"=4, s=5
        let mut g = DiGraph::<f64>::with_vertices(vec![true, false, true, true, true, true]);
        g.add_arc(0, 3, 0.5).unwrap();
        g.add_arc(0, 4, 1.0).unwrap();
        g.add_arc(3, 2, 0.5).unwrap();
        g.add_arc(2, 5, 0.5).unwrap();
        g.add_arc(4, 5, 0.5).unwrap();
        let cut = min_cut(&g, 0, 5);
        assert!((cut.value - 1.0).abs() < 1e-12);
        assert!((cut.flow_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fig6_right_graph_exact() {
        // r=0, t=1, "1"=2, "2"=3, s=4
        let mut g = DiGraph::<Rational>::with_vertices(vec![true, false, true, true, true]);
        let half = rational(1, 2);
        let r2 = g.add_arc(0, 3, half.clone()).unwrap();
        g.add_arc(3, 2, half.clone()).unwrap();
        g.add_arc(3, 4, half.clone()).unwrap();
        g.add_arc(2, 4, half.clone()).unwrap();
        let cut = min_cut(&g, 0, 4);
        assert_eq!(cut.value, half);
        assert_eq!(cut.crossing, vec![r2]);
        assert_eq!(cut.source_side, vec![0]);
        assert_eq!(cut.sink_side, vec![2, 3, 4]);
    }

    #[test]
    fn disconnected_terminals() {
        let mut g = DiGraph::<f64>::new(4);
        g.add_arc(0, 1, 1.0).unwrap();
        g.add_arc(2, 3, 1.0).unwrap();
        let cut = min_cut(&g, 0, 3);
        assert_eq!(cut.value, 0.0);
        assert!(cut.crossing.is_empty());
    }

    #[test]
    fn flows_respect_capacities_and_balance() {
        let mut g = DiGraph::<i64>::new(4);
        for (i, j, c) in [(0, 1, 3), (0, 2, 2), (1, 2, 1), (1, 3, 2), (2, 3, 3)] {
            g.add_arc(i, j, c).unwrap();
        }
        let f = max_flow(&g, 0, 3);
        assert_eq!(f.value, 5);
        for (id, a) in g.arcs().iter().enumerate() {
            assert!(f.arc_flow[id] >= 0 && f.arc_flow[id] <= a.weight);
        }
        assert_eq!(min_cut(&g, 0, 3).value, 5);
    }
}
