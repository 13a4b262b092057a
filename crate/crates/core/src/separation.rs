//! Min-cut separation of the connectivity-with-precedence inequalities
//!
//! ```text
//! sum_{(i,k) in A : i in V_j \ S, k in S} x_ik >= 1,   S ⊆ V \ {r}, j in S
//! ```
//!
//! For each target `j` a minimum `(r, j)`-cut is computed in `D_j`, the
//! subgraph induced by `V_j` and weighted by `x`. A cut lighter than one
//! yields a violated inequality whose set `S` is the sink side of the cut.
//! A unit cut proves no inequality for `j` is violated, even if `x` contains
//! a fractional path that breaks a precedence.

use thiserror::Error;

use crate::evaluation::Arborescence;
use crate::graph::{allowed_mask, min_cut, DiGraph};
use crate::instance::Instance;
use crate::scalar::Weight;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FractionalError {
    #[error("arc ({0}, {1}) is not in the instance")]
    UnknownArc(usize, usize),
    #[error("value {value} on arc ({i}, {j}) is outside [0, 1]")]
    OutOfBounds { i: usize, j: usize, value: String },
    #[error("expected {expected} arc values, got {got}")]
    WrongLength { expected: usize, got: usize },
}

/// Arc values `x`, indexed by instance arc id. Arcs not listed are 0.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution<S> {
    values: Vec<S>,
}

fn check_bounds<S: Weight>(inst: &Instance, id: usize, v: &S) -> Result<(), FractionalError> {
    let hi = S::one() + S::cut_tolerance();
    let lo = -S::cut_tolerance();
    if *v < lo || *v > hi {
        let a = inst.arc(id);
        return Err(FractionalError::OutOfBounds {
            i: a.from,
            j: a.to,
            value: v.to_string(),
        });
    }
    Ok(())
}

impl<S: Weight> FractionalSolution<S> {
    /// From `(i, j, value)` triples.
    pub fn from_arc_values(inst: &Instance, entries: &[(usize, usize, S)]) -> Result<Self, FractionalError> {
        let mut values = vec![S::zero(); inst.arcs().len()];
        for (i, j, v) in entries {
            let id = inst.arc_id(*i, *j).ok_or(FractionalError::UnknownArc(*i, *j))?;
            check_bounds(inst, id, v)?;
            values[id] = v.clone();
        }
        Ok(FractionalSolution { values })
    }

    /// From one value per arc id.
    pub fn from_values(inst: &Instance, values: Vec<S>) -> Result<Self, FractionalError> {
        if values.len() != inst.arcs().len() {
            return Err(FractionalError::WrongLength {
                expected: inst.arcs().len(),
                got: values.len(),
            });
        }
        for (id, v) in values.iter().enumerate() {
            check_bounds(inst, id, v)?;
        }
        Ok(FractionalSolution { values })
    }

    /// Incidence vector of a tree.
    pub fn from_tree(inst: &Instance, arbo: &Arborescence) -> Self {
        let mut values = vec![S::zero(); inst.arcs().len()];
        for id in arbo.arc_ids(inst) {
            values[id] = S::one();
        }
        FractionalSolution { values }
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn get(&self, arc_id: usize) -> &S {
        &self.values[arc_id]
    }
}

/// A violated inequality for target `target` and vertex set `set`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutInequality<S> {
    pub target: usize,
    /// `S`, ascending; contains the target, never the root.
    pub set: Vec<usize>,
    /// Instance arc ids `(i, k)` with `i` in `V_j \ S` and `k` in `S`, ascending.
    pub crossing: Vec<usize>,
    /// Left-hand side at the separated point.
    pub lhs: S,
    /// `1 - lhs`.
    pub violation: S,
}

impl<S: Weight> CutInequality<S> {
    /// Crossing arcs as `(i, k)` pairs.
    pub fn crossing_pairs(&self, inst: &Instance) -> Vec<(usize, usize)> {
        self.crossing
            .iter()
            .map(|&id| (inst.arc(id).from, inst.arc(id).to))
            .collect()
    }

    /// Left-hand side re-evaluated at an arbitrary point.
    pub fn evaluate(&self, x: &FractionalSolution<S>) -> S {
        self.crossing
            .iter()
            .fold(S::zero(), |acc, &id| acc + x.get(id).clone())
    }
}

/// `D_j`: vertices `V_j`, arcs of the instance between them weighted by `x`.
pub fn build_dj<S: Weight>(inst: &Instance, j: usize, x: &FractionalSolution<S>) -> DiGraph<S> {
    let mask = allowed_mask(inst, j);
    let mut g = DiGraph::with_vertices(mask.clone());
    for (id, a) in inst.arcs().iter().enumerate() {
        if mask[a.from] && mask[a.to] {
            g.add_arc(a.from, a.to, x.get(id).clone().max_zero())
                .expect("instance arc inside V_j");
        }
    }
    g
}

trait MaxZero {
    fn max_zero(self) -> Self;
}

impl<S: Weight> MaxZero for S {
    fn max_zero(self) -> Self {
        if self < S::zero() {
            S::zero()
        } else {
            self
        }
    }
}

/// Cut for target `j`, if its value is below `1 - ε`.
pub fn separate_target<S: Weight>(
    inst: &Instance,
    j: usize,
    x: &FractionalSolution<S>,
) -> Option<CutInequality<S>> {
    assert_ne!(j, inst.root(), "the root is never a target");
    let g = build_dj(inst, j, x);
    let cut = min_cut(&g, inst.root(), j);
    if !(cut.value < S::one() - S::cut_tolerance()) {
        return None;
    }
    let mut in_set = vec![false; inst.n()];
    for &v in &cut.sink_side {
        in_set[v] = true;
    }
    // g was built from instance arcs in id order, keeping those inside V_j
    let mut crossing: Vec<usize> = inst
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, a)| g.contains(a.from) && !in_set[a.from] && in_set[a.to])
        .map(|(id, _)| id)
        .collect();
    crossing.sort_unstable();
    let lhs = crossing
        .iter()
        .fold(S::zero(), |acc, &id| acc + x.get(id).clone().max_zero());
    debug_assert!((lhs.clone() - cut.value.clone()).abs() <= S::cut_tolerance());
    Some(CutInequality {
        target: j,
        set: cut.sink_side,
        crossing,
        violation: S::one() - lhs.clone(),
        lhs,
    })
}

/// First violated inequality over targets in ascending order, or `None`.
pub fn find_violated_inequality<S: Weight>(
    inst: &Instance,
    x: &FractionalSolution<S>,
) -> Option<CutInequality<S>> {
    inst.non_root().find_map(|j| separate_target(inst, j, x))
}

/// One most-violated inequality per target with a light cut, most violated
/// first; ties keep ascending target order.
pub fn separate_all<S: Weight>(inst: &Instance, x: &FractionalSolution<S>) -> Vec<CutInequality<S>> {
    let mut cuts: Vec<CutInequality<S>> = inst
        .non_root()
        .filter_map(|j| separate_target(inst, j, x))
        .collect();
    cuts.sort_by(|a, b| {
        b.violation
            .partial_cmp(&a.violation)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    cuts
}
