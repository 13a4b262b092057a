//! Primal heuristics: greedy insertion along a linear extension of the
//! precedences, then single-arc re-parenting.
//!
//! A vertex is inserted only after every vertex that must precede it, so an
//! inserted vertex is never an ancestor of one of its predecessors and every
//! tree built this way is precedence-feasible.

use crate::evaluation::{check_precedences, entry_times, Arborescence};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy)]
enum Score {
    ArcCost,
    Increment,
    EntryTime,
}

fn greedy(inst: &Instance, score: Score) -> Option<Arborescence> {
    let n = inst.n();
    let mut pending = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    let mut preds = vec![Vec::new(); n];
    for &(s, t) in inst.precedences() {
        pending[t] += 1;
        succ[s].push(t);
        preds[t].push(s);
    }
    let mut inside = vec![false; n];
    let mut time = vec![0i64; n];
    let mut parent = vec![None; n];
    let mut cost = 0;
    let root = inst.root();
    inside[root] = true;
    for &t in &succ[root] {
        pending[t] -= 1;
    }
    for _ in 1..n {
        let mut best: Option<(i64, usize, usize, i64)> = None;
        for v in inst.non_root() {
            if inside[v] || pending[v] > 0 {
                continue;
            }
            let release = preds[v].iter().map(|&s| time[s]).max().unwrap_or(0);
            for &id in inst.in_arcs(v) {
                let a = inst.arc(id);
                if !inside[a.from] {
                    continue;
                }
                let d = (time[a.from] + a.cost).max(release);
                let key = match score {
                    Score::ArcCost => a.cost,
                    Score::Increment => d - time[a.from],
                    Score::EntryTime => d,
                };
                if best.is_none_or(|b| key < b.0) {
                    best = Some((key, v, a.from, d));
                }
            }
        }
        let (_, v, p, d) = best?;
        inside[v] = true;
        parent[v] = Some(p);
        time[v] = d;
        cost += inst.cost(p, v).expect("arc");
        for &t in &succ[v] {
            pending[t] -= 1;
        }
    }
    Some(Arborescence { parent, cost })
}

fn value(inst: &Instance, t: &Arborescence, timed: bool) -> Option<i64> {
    if timed {
        entry_times(inst, t).ok().map(|ts| ts.objective)
    } else {
        Some(t.cost)
    }
}

fn is_ancestor(t: &Arborescence, a: usize, mut v: usize) -> bool {
    loop {
        if v == a {
            return true;
        }
        match t.parent[v] {
            Some(p) => v = p,
            None => return false,
        }
    }
}

/// Re-parents one vertex at a time while the objective drops.
fn improve(inst: &Instance, mut t: Arborescence, timed: bool) -> Option<(i64, Arborescence)> {
    let mut cur = value(inst, &t, timed)?;
    let mut improved = true;
    while improved {
        improved = false;
        for v in inst.non_root() {
            let old = t.parent[v].expect("spanning");
            for &id in inst.in_arcs(v) {
                let a = inst.arc(id);
                let cost = t.cost - inst.cost(old, v).expect("tree arc") + a.cost;
                if a.from == t.parent[v].unwrap() || cost >= cur || is_ancestor(&t, v, a.from) {
                    continue;
                }
                let mut cand = t.clone();
                cand.parent[v] = Some(a.from);
                cand.cost = cost;
                if !check_precedences(inst, &cand).is_empty() {
                    continue;
                }
                if let Some(val) = value(inst, &cand, timed) {
                    if val < cur {
                        cur = val;
                        t = cand;
                        improved = true;
                        break;
                    }
                }
            }
        }
    }
    Some((cur, t))
}

/// Best tree found by the greedy variants after local search, with its
/// objective.
pub(crate) fn initial_tree(inst: &Instance, timed: bool) -> Option<(i64, Arborescence)> {
    [Score::ArcCost, Score::Increment, Score::EntryTime]
        .into_iter()
        .filter_map(|s| greedy(inst, s))
        .filter_map(|t| improve(inst, t, timed))
        .min_by_key(|(v, _)| *v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{random_instance, RandomSpec};
    use crate::solver::{brute_force_pcmca, brute_force_pcmcawt, SolverLimits};

    #[test]
    fn trees_are_feasible_and_never_beat_the_optimum() {
        let limits = SolverLimits::default();
        for seed in 0..150 {
            let spec = RandomSpec {
                n: 3 + (seed % 5) as usize,
                arc_probability: 0.6,
                max_cost: 9,
                max_precedences: 6,
                complete_root: seed % 2 == 0,
            };
            let inst = random_instance(&spec, seed);
            for timed in [false, true] {
                let Some((v, t)) = initial_tree(&inst, timed) else { continue };
                assert!(check_precedences(&inst, &t).is_empty());
                assert_eq!(value(&inst, &t, timed), Some(v));
                let opt = if timed {
                    brute_force_pcmcawt(&inst, &limits).unwrap().map(|s| s.objective)
                } else {
                    brute_force_pcmca(&inst, &limits).unwrap().map(|s| s.cost)
                };
                assert!(opt.is_some_and(|o| o <= v), "seed {seed}");
            }
        }
    }
}
