use std::collections::HashSet;

use super::{build, cut_to_constraint, BuildOptions, Formulation, LinearModel, LpOptions, LpStatus, WarmLp};
use crate::instance::Instance;
use crate::scalar::Field;
use crate::separation::{find_violated_inequality, separate_all, CutInequality, FractionalSolution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LrOptions {
    pub build: BuildOptions,
    pub lp: LpOptions,
    /// Add one cut per violated target each round instead of a single cut.
    pub all_cuts_per_round: bool,
    pub max_rounds: usize,
}

impl Default for LrOptions {
    fn default() -> Self {
        LrOptions {
            build: BuildOptions::default(),
            lp: LpOptions::default(),
            all_cuts_per_round: true,
            max_rounds: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LrResult<S> {
    pub status: LpStatus,
    /// Relaxation value; meaningful when `status` is optimal.
    pub value: S,
    pub cuts: usize,
    pub rounds: usize,
    /// Arc values of the final LP point.
    pub x: Vec<S>,
    /// The model with every cut added.
    pub model: LinearModel<S>,
    /// The round limit stopped the loop before separation came back empty.
    pub truncated: bool,
}

/// Arc values read from an LP point, clamped into `[0, 1]`.
pub(crate) fn arc_values<S: Field>(model: &LinearModel<S>, values: &[S]) -> Vec<S> {
    model
        .arc_columns()
        .iter()
        .map(|&c| {
            let v = values[c].clone();
            if v < S::zero() {
                S::zero()
            } else if v > S::one() {
                S::one()
            } else {
                v
            }
        })
        .collect()
}

pub fn solve_lr_with_cuts<S: Field>(inst: &Instance, f: Formulation) -> LrResult<S> {
    solve_lr_with_cuts_opts(inst, f, &LrOptions::default())
}

/// Linear relaxation of formulation `f` tightened by separated cuts until
/// none is violated.
pub fn solve_lr_with_cuts_opts<S: Field>(inst: &Instance, f: Formulation, opts: &LrOptions) -> LrResult<S> {
    let mut model: LinearModel<S> = build(inst, f, &opts.build);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut cuts = 0;
    let mut rounds = 0;
    let mut lp = WarmLp::new(opts.lp.clone());
    loop {
        rounds += 1;
        let sol = lp.solve(&model);
        let x = arc_values(&model, &sol.values);
        if sol.status != LpStatus::Optimal || !f.has_lazy_cuts() {
            return LrResult {
                status: sol.status,
                value: sol.objective,
                cuts,
                rounds,
                x,
                model,
                truncated: false,
            };
        }
        let point = FractionalSolution::from_values(inst, x.clone()).expect("clamped arc values");
        let found: Vec<CutInequality<S>> = if opts.all_cuts_per_round {
            separate_all(inst, &point)
        } else {
            find_violated_inequality(inst, &point).into_iter().collect()
        };
        let fresh: Vec<CutInequality<S>> = found
            .into_iter()
            .filter(|c| seen.insert(c.crossing.clone()))
            .collect();
        if fresh.is_empty() || rounds >= opts.max_rounds {
            return LrResult {
                status: sol.status,
                value: sol.objective,
                cuts,
                rounds,
                x,
                model,
                truncated: !fresh.is_empty(),
            };
        }
        for cut in &fresh {
            let row = cut_to_constraint(&model, cut);
            model
                .add_constraint(row.name, row.terms, row.sense, row.rhs)
                .expect("unique cut name");
            cuts += 1;
        }
    }
}
