//! Best-bound branch-and-bound over arborescences.
//!
//! A node fixes some arcs in (forced) and some out (forbidden). Its bound is
//! the minimum arborescence of the restricted graph, optionally raised by a
//! linear relaxation with a shared pool of connectivity cuts.
//!
//! A tree that breaks `(s, t)` contains every arc `a_1 .. a_k` of the tree
//! path from `t` to `s`, which no feasible tree does. Child `m` forbids `a_m`
//! and forces `a_1 .. a_{m-1}`, so the children partition the feasible trees
//! of the node. For the timed problem a feasible tree with waits is
//! evaluated and the node is split the same way over that tree's free arcs,
//! which leaves out exactly that tree.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

use log::debug;

use super::heuristic::initial_tree;
use super::{SolveStats, SolveStatus, SolverLimits};
use crate::evaluation::{check_precedences, entry_times, Arborescence, TimedSolution};
use crate::graph::{edmonds_mca, DiGraph};
use crate::instance::Instance;
use crate::models::{build, compute_big_m, cut_to_constraint, BuildOptions, Formulation, LinearModel, LpOptions, LpStatus, WarmLp};
use crate::separation::{separate_all, FractionalSolution};

/// Largest dense tableau, in entries, the LP bound is allowed to build.
const MAX_TABLEAU: usize = 4_000_000;
const MAX_CUT_ROUNDS: usize = 50;
/// Rounds without a rise in the rounded bound before cutting stops.
const STALL_ROUNDS: usize = 2;
const EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Fix {
    Free,
    Forced,
    Forbidden,
}

struct Node {
    bound: i64,
    seq: usize,
    fix: Vec<Fix>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.bound, self.seq).cmp(&(other.bound, other.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Problem {
    Plain,
    Timed,
}

enum Incumbent {
    Tree(Arborescence),
    Timed(TimedSolution),
}

enum LpOutcome {
    Infeasible,
    Bound(i64, Vec<f64>),
    Unavailable,
}

struct LpState {
    base: LinearModel<f64>,
    seen: HashSet<Vec<usize>>,
    warm: WarmLp<f64>,
    cuts: usize,
    solves: usize,
}

struct Search<'a> {
    inst: &'a Instance,
    problem: Problem,
    limits: &'a SolverLimits,
    big_m: i64,
    lp: Option<LpState>,
    heap: BinaryHeap<Reverse<Node>>,
    seq: usize,
    nodes: usize,
    best: Option<(i64, Incumbent)>,
    trace: Vec<(i64, Option<i64>)>,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, problem: Problem, limits: &'a SolverLimits) -> Self {
        let nn = compute_big_m(inst);
        let mut s = Search {
            inst,
            problem,
            limits,
            big_m: nn.value,
            lp: None,
            heap: BinaryHeap::new(),
            seq: 0,
            nodes: 0,
            best: None,
            trace: Vec::new(),
        };
        if let Some(path) = nn.path {
            let mut parent = vec![None; inst.n()];
            for w in path.windows(2) {
                parent[w[1]] = Some(w[0]);
            }
            let chain = Arborescence::from_parents(inst, parent).expect("walk follows arcs");
            s.offer_tree(chain);
        }
        if let Some((_, t)) = initial_tree(inst, problem == Problem::Timed) {
            s.offer_tree(t);
        }
        if inst.n() <= limits.lp_bound_max_n {
            let f = match problem {
                Problem::Plain => Formulation::SetBased,
                Problem::Timed => Formulation::Da,
            };
            let base: LinearModel<f64> = build(
                inst,
                f,
                &BuildOptions {
                    big_m: Some(s.big_m),
                    ..BuildOptions::default()
                },
            );
            if base.num_constraints() * (base.num_vars() + base.num_constraints()) <= MAX_TABLEAU {
                s.lp = Some(LpState {
                    base,
                    seen: HashSet::new(),
                    warm: WarmLp::new(LpOptions::default()),
                    cuts: 0,
                    solves: 0,
                });
            }
        }
        s
    }

    fn upper(&self) -> Option<i64> {
        self.best.as_ref().map(|b| b.0)
    }

    fn improves(&self, value: i64) -> bool {
        self.upper().is_none_or(|u| value < u)
    }

    /// Records a precedence-feasible tree as a candidate.
    fn offer_tree(&mut self, t: Arborescence) -> Option<TimedSolution> {
        match self.problem {
            Problem::Plain => {
                if self.improves(t.cost) {
                    self.best = Some((t.cost, Incumbent::Tree(t)));
                }
                None
            }
            Problem::Timed => {
                let ts = entry_times(self.inst, &t).ok()?;
                if self.improves(ts.objective) {
                    self.best = Some((ts.objective, Incumbent::Timed(ts.clone())));
                }
                Some(ts)
            }
        }
    }

    fn push(&mut self, fix: Vec<Fix>, bound: i64) {
        self.seq += 1;
        self.heap.push(Reverse(Node {
            bound,
            seq: self.seq,
            fix,
        }));
    }

    fn restricted_mca(&self, fix: &[Fix]) -> Option<Arborescence> {
        let inst = self.inst;
        let mut forced_into = vec![false; inst.n()];
        for (id, f) in fix.iter().enumerate() {
            if *f == Fix::Forced {
                forced_into[inst.arc(id).to] = true;
            }
        }
        let mut g = DiGraph::<i64>::new(inst.n());
        for (id, a) in inst.arcs().iter().enumerate() {
            let keep = match fix[id] {
                Fix::Forced => true,
                Fix::Forbidden => false,
                Fix::Free => !forced_into[a.to],
            };
            if keep {
                g.add_arc(a.from, a.to, a.cost).expect("instance arc");
            }
        }
        let t = edmonds_mca(&g, inst.root()).ok()?;
        Some(Arborescence {
            parent: t.parents(&g),
            cost: t.cost,
        })
    }

    fn lp_bound(&mut self, fix: &[Fix]) -> LpOutcome {
        let inst = self.inst;
        let upper = self.upper();
        let Some(lp) = self.lp.as_mut() else {
            return LpOutcome::Unavailable;
        };
        let mut last = i64::MIN;
        let mut stalled = 0;
        for round in 0.. {
            let mut m = lp.base.clone();
            for (id, f) in fix.iter().enumerate() {
                let b = match f {
                    Fix::Free => continue,
                    Fix::Forced => 1.0,
                    Fix::Forbidden => 0.0,
                };
                let v = m.variable_mut(m.arc_column(id));
                v.lower = b;
                v.upper = Some(b);
            }
            let sol = lp.warm.solve(&m);
            lp.solves += 1;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return LpOutcome::Infeasible,
                _ => return LpOutcome::Unavailable,
            }
            let x: Vec<f64> = m
                .arc_columns()
                .iter()
                .map(|&c| sol.values[c].clamp(0.0, 1.0))
                .collect();
            let bound = (sol.objective - EPS).ceil() as i64;
            stalled = if bound > last { 0 } else { stalled + 1 };
            last = bound;
            let prunes = upper.is_some_and(|u| bound >= u);
            if prunes || stalled >= STALL_ROUNDS || round + 1 >= MAX_CUT_ROUNDS {
                return LpOutcome::Bound(bound, x);
            }
            let point = FractionalSolution::from_values(inst, x.clone()).expect("clamped");
            let fresh: Vec<_> = separate_all(inst, &point)
                .into_iter()
                .filter(|c| lp.seen.insert(c.crossing.clone()))
                .collect();
            if fresh.is_empty() {
                return LpOutcome::Bound(bound, x);
            }
            for c in &fresh {
                let row = cut_to_constraint(&lp.base, c);
                lp.base
                    .add_constraint(row.name, row.terms, row.sense, row.rhs)
                    .expect("unique cut name");
                lp.cuts += 1;
            }
        }
        unreachable!()
    }

    fn integral_tree(&self, x: &[f64]) -> Option<Arborescence> {
        if x.iter().any(|v| (v - v.round()).abs() > EPS) {
            return None;
        }
        let ids: Vec<usize> = (0..x.len()).filter(|&id| x[id] > 0.5).collect();
        let t = Arborescence::from_arc_ids(self.inst, &ids).ok()?;
        check_precedences(self.inst, &t).is_empty().then_some(t)
    }

    /// Children that forbid each non-forced arc of `arcs` in turn, forcing
    /// the ones before it.
    fn split(&mut self, fix: &[Fix], arcs: &[usize], bound: i64) {
        let mut prefix = fix.to_vec();
        for &a in arcs {
            if fix[a] == Fix::Forced {
                continue;
            }
            let mut child = prefix.clone();
            child[a] = Fix::Forbidden;
            self.push(child, bound);
            prefix[a] = Fix::Forced;
        }
    }

    fn path_arcs(&self, tree: &Arborescence, s: usize, t: usize) -> Vec<usize> {
        let path = tree.path_from_root(s);
        let pos = path.iter().position(|&v| v == t).expect("t is an ancestor of s");
        path[pos..]
            .windows(2)
            .map(|w| self.inst.arc_id(w[0], w[1]).expect("tree arc"))
            .collect()
    }

    fn tree_arcs(&self, tree: &Arborescence) -> Vec<usize> {
        tree.bfs_order(self.inst.root())
            .into_iter()
            .skip(1)
            .map(|v| self.inst.arc_id(tree.parent[v].unwrap(), v).expect("tree arc"))
            .collect()
    }

    fn lower(&self, pending: Option<i64>) -> i64 {
        let open = self.heap.peek().map(|r| r.0.bound);
        let mut lb = match (open, pending) {
            (Some(a), Some(b)) => a.min(b),
            (a, b) => a.or(b).unwrap_or(i64::MAX),
        };
        if let Some(u) = self.upper() {
            lb = lb.min(u);
        }
        lb
    }

    fn process(&mut self, node: Node) {
        let Some(tree) = self.restricted_mca(&node.fix) else {
            return;
        };
        let mut bound = node.bound.max(tree.cost);
        if !self.improves(bound) {
            return;
        }
        let violated = check_precedences(self.inst, &tree);
        if violated.is_empty() {
            let timed = self.offer_tree(tree.clone());
            match self.problem {
                Problem::Plain => return,
                Problem::Timed => {
                    if timed.is_some_and(|ts| ts.objective == tree.cost) {
                        return;
                    }
                }
            }
        }
        match self.lp_bound(&node.fix) {
            LpOutcome::Unavailable => {}
            LpOutcome::Infeasible => match self.problem {
                Problem::Plain => return,
                Problem::Timed => bound = bound.max(self.big_m + 1),
            },
            LpOutcome::Bound(b, x) => {
                let b = match self.problem {
                    Problem::Plain => b,
                    Problem::Timed => b.min(self.big_m + 1),
                };
                bound = bound.max(b);
                if let Some(t) = self.integral_tree(&x) {
                    let ts = self.offer_tree(t);
                    let closed = match self.problem {
                        Problem::Plain => true,
                        Problem::Timed => ts.is_some_and(|ts| ts.objective <= b),
                    };
                    if closed {
                        return;
                    }
                }
            }
        }
        if !self.improves(bound) {
            return;
        }
        let arcs = match violated.first() {
            Some(&(s, t)) => self.path_arcs(&tree, s, t),
            None => self.tree_arcs(&tree),
        };
        self.split(&node.fix, &arcs, bound);
    }

    fn run(mut self) -> (Option<Incumbent>, SolveStats) {
        let start = Instant::now();
        self.push(vec![Fix::Free; self.inst.arcs().len()], 0);
        let mut stopped: Option<i64> = None;
        while let Some(Reverse(node)) = self.heap.pop() {
            if !self.improves(node.bound) {
                continue;
            }
            if self.nodes >= self.limits.node_limit || start.elapsed() >= self.limits.time_limit {
                stopped = Some(node.bound);
                break;
            }
            self.nodes += 1;
            self.process(node);
            if self.limits.record_trace {
                self.trace.push((self.lower(None), self.upper()));
            }
        }
        let upper = self.upper();
        let (status, bound) = match (stopped, upper) {
            (None, Some(u)) => (SolveStatus::Optimal, u),
            (None, None) => (SolveStatus::Infeasible, i64::MAX),
            (Some(b), Some(u)) => {
                let lower = self.lower(Some(b));
                (SolveStatus::Feasible { lower, upper: u }, lower)
            }
            (Some(b), None) => {
                let lower = self.lower(Some(b));
                (SolveStatus::Limit { lower }, lower)
            }
        };
        let (cuts, lp_solves) = self.lp.as_ref().map_or((0, 0), |lp| (lp.cuts, lp.solves));
        if let Some(lp) = &self.lp {
            let (solves, cold) = lp.warm.counts();
            debug!("{solves} LP solves, {cold} from scratch");
        }
        debug!(
            "{}: {} after {} nodes, {} cuts, {} LPs",
            self.inst.name(),
            status,
            self.nodes,
            cuts,
            lp_solves
        );
        let stats = SolveStats {
            nodes: self.nodes,
            cuts,
            lp_solves,
            time: start.elapsed(),
            status,
            incumbent: upper,
            bound,
            trace: self.trace,
        };
        (self.best.map(|b| b.1), stats)
    }
}

/// Minimum-cost arborescence that respects every precedence, or `None` when
/// none exists or the limits stop the search first.
pub fn solve_pcmca(inst: &Instance, limits: &SolverLimits) -> (Option<Arborescence>, SolveStats) {
    let (best, stats) = Search::new(inst, Problem::Plain, limits).run();
    let tree = best.map(|b| match b {
        Incumbent::Tree(t) => t,
        Incumbent::Timed(ts) => ts.arborescence,
    });
    (tree, stats)
}

/// Minimum arc cost plus waiting time over precedence-feasible trees.
pub fn solve_pcmcawt(inst: &Instance, limits: &SolverLimits) -> (Option<TimedSolution>, SolveStats) {
    let (best, stats) = Search::new(inst, Problem::Timed, limits).run();
    let ts = best.map(|b| match b {
        Incumbent::Timed(ts) => ts,
        Incumbent::Tree(_) => unreachable!("timed search stores timed solutions"),
    });
    (ts, stats)
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
    fn fig3_both_problems() {
        for limits in [SolverLimits::default(), SolverLimits::default().without_lp()] {
            let (t, s) = solve_pcmca(&fig3(), &limits);
            assert_eq!(t.unwrap().cost, 3);
            assert_eq!(s.status, SolveStatus::Optimal);
            let (ts, s) = solve_pcmcawt(&fig3(), &limits);
            let ts = ts.unwrap();
            assert_eq!(ts.objective, 4);
            ts.check(&fig3()).unwrap();
            assert_eq!((s.incumbent, s.bound), (Some(4), 4));
        }
    }

    #[test]
    fn infeasible_instance() {
        let inst = Instance::new(3, 0, &[(0, 2, 1), (2, 1, 1)], &[(1, 2)]).unwrap();
        let (t, s) = solve_pcmca(&inst, &SolverLimits::default());
        assert!(t.is_none());
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn node_limit_reports_bounds() {
        let limits = SolverLimits {
            node_limit: 1,
            ..SolverLimits::default()
        }
        .without_lp();
        let (_, s) = solve_pcmcawt(&fig3(), &limits);
        match s.status {
            SolveStatus::Feasible { lower, upper } => assert!(lower <= 4 && 4 <= upper),
            SolveStatus::Optimal => assert_eq!(s.incumbent, Some(4)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
