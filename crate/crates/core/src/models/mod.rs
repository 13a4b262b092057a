//! Linear models for the set-based, multi-commodity-flow, distance
//! accumulation and adjusted-arc-cost formulations, plus the machinery to
//! export, solve and tighten them.

mod big_m;
mod builders;
mod cutting;
mod lp_format;
mod milp;
mod simplex;

pub use big_m::{compute_big_m, BigM};
pub use builders::{
    build, build_aac, build_da, build_mcf, build_set_based, cut_to_constraint, model_size, BuildOptions,
};
pub use cutting::{solve_lr_with_cuts, solve_lr_with_cuts_opts, LrOptions, LrResult};
pub use lp_format::{export_lp, read_lp, LpParseError};
pub use milp::{solve_milp, MilpOptions, MilpResult, MilpStatus};
pub use simplex::{solve_lp, solve_lp_with, LpOptions, WarmLp};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Field;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formulation {
    SetBased,
    Mcf,
    Da,
    Aac,
}

impl Formulation {
    pub fn tag(self) -> &'static str {
        match self {
            Formulation::SetBased => "set-based",
            Formulation::Mcf => "mcf",
            Formulation::Da => "da",
            Formulation::Aac => "aac",
        }
    }

    /// Whether the connectivity family is left out and must be separated.
    pub fn has_lazy_cuts(self) -> bool {
        !matches!(self, Formulation::Mcf)
    }

    /// Whether the model carries entry times (the waiting-times problem).
    pub fn is_timed(self) -> bool {
        !matches!(self, Formulation::SetBased)
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "set" | "set-based" | "setbased" => Ok(Formulation::SetBased),
            "mcf" => Ok(Formulation::Mcf),
            "da" => Ok(Formulation::Da),
            "aac" => Ok(Formulation::Aac),
            other => Err(format!("unknown formulation `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub kind: VarKind,
    pub lower: S,
    /// `None` means unbounded above.
    pub upper: Option<S>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub terms: Vec<(usize, S)>,
    pub sense: Sense,
    pub rhs: S,
}

/// Descriptive data carried with a model and written into exported files.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelMeta {
    pub formulation: Option<Formulation>,
    pub instance: String,
    pub big_m: Option<i64>,
    /// The nearest-neighbour heuristic failed and `big_m` is the fallback sum.
    pub big_m_fallback: bool,
    pub valid_inequalities: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("constraint `{0}` references an undeclared variable")]
    UnknownVariable(String),
    #[error("variable `{0}` has an empty domain")]
    EmptyDomain(String),
}

/// Minimization model: variables with bounds, linear rows, linear objective.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<S> {
    vars: Vec<Variable<S>>,
    rows: Vec<Constraint<S>>,
    objective: Vec<(usize, S)>,
    var_names: BTreeMap<String, usize>,
    row_names: BTreeMap<String, usize>,
    /// Column of `x_ij` for each instance arc id, when built from an instance.
    arc_columns: Vec<usize>,
    pub meta: ModelMeta,
}

impl<S: Field> Default for LinearModel<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Field> LinearModel<S> {
    pub fn new() -> Self {
        LinearModel {
            vars: Vec::new(),
            rows: Vec::new(),
            objective: Vec::new(),
            var_names: BTreeMap::new(),
            row_names: BTreeMap::new(),
            arc_columns: Vec::new(),
            meta: ModelMeta::default(),
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: S,
        upper: Option<S>,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (S::zero(), Some(S::one())),
            VarKind::Continuous => (lower, upper),
        };
        if let Some(u) = &upper {
            if *u < lower {
                return Err(ModelError::EmptyDomain(name));
            }
        }
        let id = self.vars.len();
        self.var_names.insert(name.clone(), id);
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        Ok(id)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, S)>,
        sense: Sense,
        rhs: S,
    ) -> Result<usize, ModelError> {
        let name = name.into();
        if self.row_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        if terms.iter().any(|(v, _)| *v >= self.vars.len()) {
            return Err(ModelError::UnknownVariable(name));
        }
        let id = self.rows.len();
        self.row_names.insert(name.clone(), id);
        self.rows.push(Constraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(id)
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, S)>) {
        self.objective = terms;
    }

    pub fn variables(&self) -> &[Variable<S>] {
        &self.vars
    }

    pub fn variable_mut(&mut self, id: usize) -> &mut Variable<S> {
        &mut self.vars[id]
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.rows
    }

    pub fn objective(&self) -> &[(usize, S)] {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_names.get(name).copied()
    }

    pub fn constraint_index(&self, name: &str) -> Option<usize> {
        self.row_names.get(name).copied()
    }

    /// Column of `x` for instance arc `arc_id`.
    pub fn arc_column(&self, arc_id: usize) -> usize {
        self.arc_columns[arc_id]
    }

    pub fn arc_columns(&self) -> &[usize] {
        &self.arc_columns
    }

    pub(crate) fn set_arc_columns(&mut self, cols: Vec<usize>) {
        self.arc_columns = cols;
    }

    /// Objective value at `values`.
    pub fn evaluate(&self, values: &[S]) -> S {
        self.objective
            .iter()
            .fold(S::zero(), |acc, (v, c)| acc + c.clone() * values[*v].clone())
    }

    /// Largest violation of any row or bound at `values`.
    pub fn max_violation(&self, values: &[S]) -> S {
        let mut worst = S::zero();
        let mut note = |v: S| {
            if v > worst {
                worst = v;
            }
        };
        for (var, x) in self.vars.iter().zip(values) {
            note(var.lower.clone() - x.clone());
            if let Some(u) = &var.upper {
                note(x.clone() - u.clone());
            }
        }
        for row in &self.rows {
            let lhs = row
                .terms
                .iter()
                .fold(S::zero(), |acc, (v, c)| acc + c.clone() * values[*v].clone());
            let diff = lhs - row.rhs.clone();
            match row.sense {
                Sense::Le => note(diff),
                Sense::Ge => note(-diff),
                Sense::Eq => note(diff.abs()),
            }
        }
        worst
    }

    /// Copy with every coefficient converted to another scalar type.
    pub fn convert<T: Field>(&self, f: impl Fn(&S) -> T) -> LinearModel<T> {
        LinearModel {
            vars: self
                .vars
                .iter()
                .map(|v| Variable {
                    name: v.name.clone(),
                    kind: v.kind,
                    lower: f(&v.lower),
                    upper: v.upper.as_ref().map(&f),
                })
                .collect(),
            rows: self
                .rows
                .iter()
                .map(|r| Constraint {
                    name: r.name.clone(),
                    terms: r.terms.iter().map(|(v, c)| (*v, f(c))).collect(),
                    sense: r.sense,
                    rhs: f(&r.rhs),
                })
                .collect(),
            objective: self.objective.iter().map(|(v, c)| (*v, f(c))).collect(),
            var_names: self.var_names.clone(),
            row_names: self.row_names.clone(),
            arc_columns: self.arc_columns.clone(),
            meta: self.meta.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: LpStatus,
    /// Values of the structural variables; meaningful when optimal and a
    /// best-effort point otherwise.
    pub values: Vec<S>,
    pub objective: S,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_must_be_unique() {
        let mut m = LinearModel::<f64>::new();
        m.add_var("a", VarKind::Continuous, 0.0, None).unwrap();
        assert_eq!(
            m.add_var("a", VarKind::Binary, 0.0, None),
            Err(ModelError::DuplicateVariable("a".into()))
        );
        m.add_constraint("r", vec![(0, 1.0)], Sense::Ge, 1.0).unwrap();
        assert!(m.add_constraint("r", vec![(0, 1.0)], Sense::Ge, 1.0).is_err());
        assert!(m.add_constraint("q", vec![(3, 1.0)], Sense::Ge, 1.0).is_err());
        assert!(m.add_var("b", VarKind::Continuous, 2.0, Some(1.0)).is_err());
    }

    #[test]
    fn binaries_are_unit_bounded() {
        let mut m = LinearModel::<f64>::new();
        let b = m.add_var("b", VarKind::Binary, 5.0, None).unwrap();
        assert_eq!(m.variables()[b].lower, 0.0);
        assert_eq!(m.variables()[b].upper, Some(1.0));
    }

    #[test]
    fn violation_measure() {
        let mut m = LinearModel::<f64>::new();
        let a = m.add_var("a", VarKind::Continuous, 0.0, Some(2.0)).unwrap();
        m.add_constraint("r", vec![(a, 1.0)], Sense::Ge, 1.0).unwrap();
        assert_eq!(m.max_violation(&[1.5]), 0.0);
        assert_eq!(m.max_violation(&[0.25]), 0.75);
        assert_eq!(m.max_violation(&[3.0]), 1.0);
    }

    #[test]
    fn formulation_tags_parse() {
        for f in [Formulation::SetBased, Formulation::Mcf, Formulation::Da, Formulation::Aac] {
            assert_eq!(f.tag().parse::<Formulation>().unwrap(), f);
        }
        assert_eq!("set".parse::<Formulation>().unwrap(), Formulation::SetBased);
        assert!("foo".parse::<Formulation>().is_err());
    }
}
