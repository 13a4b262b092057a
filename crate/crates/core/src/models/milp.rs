//! Best-first branch-and-bound over the binary columns of a model, with
//! lazy connectivity cuts when an instance is supplied.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use super::cutting::arc_values;
use super::{cut_to_constraint, solve_lp_with, LinearModel, LpOptions, LpStatus, VarKind};
use crate::instance::Instance;
use crate::scalar::Field;
use crate::separation::{separate_all, FractionalSolution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MilpOptions {
    pub lp: LpOptions,
    pub node_limit: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            lp: LpOptions::default(),
            node_limit: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    NodeLimit,
    /// An LP relaxation ended unbounded or hit its iteration limit.
    LpFailure(LpStatus),
}

#[derive(Debug, Clone)]
pub struct MilpResult<S> {
    pub status: MilpStatus,
    pub objective: Option<S>,
    pub values: Option<Vec<S>>,
    pub nodes: usize,
    pub cuts: usize,
}

struct Node<S> {
    bound: f64,
    seq: usize,
    fixed: Vec<(usize, bool)>,
    _s: std::marker::PhantomData<S>,
}

impl<S> PartialEq for Node<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S> Eq for Node<S> {}
impl<S> PartialOrd for Node<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S> Ord for Node<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

/// Solves `model` with its binary columns enforced. When `lazy` is given,
/// the model's arc columns are checked against the connectivity family of
/// that instance and violated rows are added to a global pool.
pub fn solve_milp<S: Field>(model: &LinearModel<S>, lazy: Option<&Instance>, opts: &MilpOptions) -> MilpResult<S> {
    let tol = S::cut_tolerance();
    let mut base = model.clone();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut cuts = 0;
    let mut nodes = 0;
    let mut incumbent: Option<(S, Vec<S>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Reverse(Node::<S> {
        bound: f64::NEG_INFINITY,
        seq,
        fixed: Vec::new(),
        _s: Default::default(),
    }));
    let arc_cols: HashSet<usize> = model.arc_columns().iter().copied().collect();

    let beaten = |inc: &Option<(S, Vec<S>)>, v: &S| inc.as_ref().is_some_and(|(best, _)| *v >= best.clone() - tol.clone());

    while let Some(Reverse(node)) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best.to_f64_lossy() - tol.to_f64_lossy() {
                continue;
            }
        }
        if nodes >= opts.node_limit {
            return MilpResult {
                status: MilpStatus::NodeLimit,
                objective: incumbent.as_ref().map(|i| i.0.clone()),
                values: incumbent.map(|i| i.1),
                nodes,
                cuts,
            };
        }
        nodes += 1;
        let sol = loop {
            let mut m = base.clone();
            for &(v, one) in &node.fixed {
                let var = m.variable_mut(v);
                let b = if one { S::one() } else { S::zero() };
                var.lower = b.clone();
                var.upper = Some(b);
            }
            let sol = solve_lp_with(&m, &opts.lp);
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => break None,
                other => {
                    return MilpResult {
                        status: MilpStatus::LpFailure(other),
                        objective: None,
                        values: None,
                        nodes,
                        cuts,
                    }
                }
            }
            if beaten(&incumbent, &sol.objective) {
                break None;
            }
            if let Some(inst) = lazy {
                let x = arc_values(&base, &sol.values);
                let point = FractionalSolution::from_values(inst, x).expect("clamped arc values");
                let fresh: Vec<_> = separate_all(inst, &point)
                    .into_iter()
                    .filter(|c| seen.insert(c.crossing.clone()))
                    .collect();
                if !fresh.is_empty() {
                    for c in &fresh {
                        let row = cut_to_constraint(&base, c);
                        base.add_constraint(row.name, row.terms, row.sense, row.rhs)
                            .expect("unique cut name");
                        cuts += 1;
                    }
                    continue;
                }
            }
            break Some(sol);
        };
        let Some(sol) = sol else { continue };

        let half = S::one() / (S::one() + S::one());
        let branch = model
            .variables()
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Binary)
            .map(|(c, _)| {
                let v = sol.values[c].clone();
                let frac = if v > half.clone() { S::one() - v } else { v };
                (c, frac)
            })
            .filter(|(_, f)| *f > tol)
            .max_by(|a, b| {
                let ka = (arc_cols.contains(&a.0), a.1.clone());
                let kb = (arc_cols.contains(&b.0), b.1.clone());
                ka.0.cmp(&kb.0)
                    .then(ka.1.partial_cmp(&kb.1).unwrap_or(Ordering::Equal))
                    .then(b.0.cmp(&a.0))
            });
        match branch {
            None => {
                if !beaten(&incumbent, &sol.objective) {
                    incumbent = Some((sol.objective.clone(), sol.values.clone()));
                }
            }
            Some((c, _)) => {
                for one in [false, true] {
                    let mut fixed = node.fixed.clone();
                    fixed.push((c, one));
                    seq += 1;
                    heap.push(Reverse(Node {
                        bound: sol.objective.to_f64_lossy(),
                        seq,
                        fixed,
                        _s: Default::default(),
                    }));
                }
            }
        }
    }
    let status = if incumbent.is_some() {
        MilpStatus::Optimal
    } else {
        MilpStatus::Infeasible
    };
    MilpResult {
        status,
        objective: incumbent.as_ref().map(|i| i.0.clone()),
        values: incumbent.map(|i| i.1),
        nodes,
        cuts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_da, build_set_based};

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
    fn fig3_optima() {
        let inst = fig3();
        let set = solve_milp(&build_set_based::<f64>(&inst), Some(&inst), &MilpOptions::default());
        assert_eq!(set.status, MilpStatus::Optimal);
        assert!((set.objective.unwrap() - 3.0).abs() < 1e-6);
        let da = solve_milp(&build_da::<f64>(&inst), Some(&inst), &MilpOptions::default());
        assert_eq!(da.status, MilpStatus::Optimal);
        assert!((da.objective.unwrap() - 4.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_when_no_tree_exists() {
        // 1 is reachable only through 2, which R keeps off the path to 1
        let inst = Instance::new(3, 0, &[(0, 2, 1), (2, 1, 1)], &[(1, 2)]).unwrap();
        let r = solve_milp(&build_set_based::<f64>(&inst), Some(&inst), &MilpOptions::default());
        assert_eq!(r.status, MilpStatus::Infeasible);
    }
}
