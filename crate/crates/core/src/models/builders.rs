use super::{compute_big_m, Constraint, Formulation, LinearModel, ModelMeta, Sense, VarKind};
use crate::instance::Instance;
use crate::scalar::Field;
use crate::separation::CutInequality;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildOptions {
    /// Overrides the nearest-neighbour value of M.
    pub big_m: Option<i64>,
    /// Adds the per-vertex valid inequalities to the adjusted-arc-cost model.
    pub valid_inequalities: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            big_m: None,
            valid_inequalities: true,
        }
    }
}

pub fn build<S: Field>(inst: &Instance, f: Formulation, opts: &BuildOptions) -> LinearModel<S> {
    match f {
        Formulation::SetBased => build_set_based(inst),
        Formulation::Mcf => mcf(inst, opts),
        Formulation::Da => da(inst, opts),
        Formulation::Aac => aac(inst, opts),
    }
}

pub fn build_set_based<S: Field>(inst: &Instance) -> LinearModel<S> {
    let mut m = LinearModel::new();
    m.meta = meta(inst, Formulation::SetBased);
    add_arc_vars(&mut m, inst);
    add_indegree_rows(&mut m, inst);
    let obj = inst
        .arcs()
        .iter()
        .enumerate()
        .map(|(id, a)| (m.arc_column(id), S::from_cost(a.cost)))
        .collect();
    m.set_objective(obj);
    m
}

pub fn build_mcf<S: Field>(inst: &Instance) -> LinearModel<S> {
    mcf(inst, &BuildOptions::default())
}

pub fn build_da<S: Field>(inst: &Instance) -> LinearModel<S> {
    da(inst, &BuildOptions::default())
}

pub fn build_aac<S: Field>(inst: &Instance, with_valid_ineqs: bool) -> LinearModel<S> {
    aac(
        inst,
        &BuildOptions {
            valid_inequalities: with_valid_ineqs,
            ..BuildOptions::default()
        },
    )
}

/// Row `sum x_ik >= 1` over the crossing arcs of `cut`.
pub fn cut_to_constraint<S: Field, T>(model: &LinearModel<S>, cut: &CutInequality<T>) -> Constraint<S> {
    let mut name = format!("cut_{}", model.num_constraints());
    while model.constraint_index(&name).is_some() {
        name.push('_');
    }
    Constraint {
        name,
        terms: cut
            .crossing
            .iter()
            .map(|&id| (model.arc_column(id), S::one()))
            .collect(),
        sense: Sense::Ge,
        rhs: S::one(),
    }
}

fn meta(inst: &Instance, f: Formulation) -> ModelMeta {
    ModelMeta {
        formulation: Some(f),
        instance: inst.name().to_string(),
        ..ModelMeta::default()
    }
}

fn big_m_meta(inst: &Instance, f: Formulation, opts: &BuildOptions) -> (ModelMeta, i64) {
    let mut meta = meta(inst, f);
    let value = match opts.big_m {
        Some(v) => v,
        None => {
            let bm = compute_big_m(inst);
            meta.big_m_fallback = bm.fallback;
            bm.value
        }
    };
    meta.big_m = Some(value);
    (meta, value)
}

fn add_arc_vars<S: Field>(m: &mut LinearModel<S>, inst: &Instance) {
    let cols = inst
        .arcs()
        .iter()
        .map(|a| {
            m.add_var(format!("x_{}_{}", a.from, a.to), VarKind::Binary, S::zero(), None)
                .expect("fresh name")
        })
        .collect();
    m.set_arc_columns(cols);
}

fn add_indegree_rows<S: Field>(m: &mut LinearModel<S>, inst: &Instance) {
    for j in inst.non_root() {
        let terms = inst.in_arcs(j).iter().map(|&id| (m.arc_column(id), S::one())).collect();
        m.add_constraint(format!("indeg_{j}"), terms, Sense::Eq, S::one())
            .expect("fresh name");
    }
}

fn add_d_vars<S: Field>(m: &mut LinearModel<S>, inst: &Instance) -> Vec<usize> {
    let d: Vec<usize> = (0..inst.n())
        .map(|v| {
            m.add_var(format!("d_{v}"), VarKind::Continuous, S::zero(), None)
                .expect("fresh name")
        })
        .collect();
    m.add_constraint("d_root", vec![(d[inst.root()], S::one())], Sense::Eq, S::zero())
        .expect("fresh name");
    d
}

/// `d_j - d_i - (M + c_ij) x_ij >= -M` for every arc.
fn add_time_rows<S: Field>(m: &mut LinearModel<S>, inst: &Instance, d: &[usize], big_m: i64) {
    for (id, a) in inst.arcs().iter().enumerate() {
        let terms = vec![
            (d[a.to], S::one()),
            (d[a.from], -S::one()),
            (m.arc_column(id), -S::from_cost(big_m + a.cost)),
        ];
        m.add_constraint(format!("time_{}_{}", a.from, a.to), terms, Sense::Ge, -S::from_cost(big_m))
            .expect("fresh name");
    }
}

/// `w_j - d_j + d_i - (M - c_ij) x_ij >= -M` for every arc.
fn add_wait_rows<S: Field>(m: &mut LinearModel<S>, inst: &Instance, d: &[usize], w: &[Option<usize>], big_m: i64) {
    for (id, a) in inst.arcs().iter().enumerate() {
        let terms = vec![
            (w[a.to].expect("arc into a non-root vertex"), S::one()),
            (d[a.to], -S::one()),
            (d[a.from], S::one()),
            (m.arc_column(id), -S::from_cost(big_m - a.cost)),
        ];
        m.add_constraint(format!("wait_{}_{}", a.from, a.to), terms, Sense::Ge, -S::from_cost(big_m))
            .expect("fresh name");
    }
}

/// `d_t - d_s >= 0` for every precedence.
fn add_precedence_rows<S: Field>(m: &mut LinearModel<S>, inst: &Instance, d: &[usize]) {
    for &(s, t) in inst.precedences() {
        m.add_constraint(
            format!("prec_{s}_{t}"),
            vec![(d[t], S::one()), (d[s], -S::one())],
            Sense::Ge,
            S::zero(),
        )
        .expect("fresh name");
    }
}

fn add_w_vars<S: Field>(m: &mut LinearModel<S>, inst: &Instance) -> Vec<Option<usize>> {
    (0..inst.n())
        .map(|v| {
            (v != inst.root()).then(|| {
                m.add_var(format!("w_{v}"), VarKind::Continuous, S::zero(), None)
                    .expect("fresh name")
            })
        })
        .collect()
}

fn cost_plus_wait_objective<S: Field>(m: &mut LinearModel<S>, inst: &Instance, w: &[Option<usize>]) {
    let mut obj: Vec<(usize, S)> = inst
        .arcs()
        .iter()
        .enumerate()
        .map(|(id, a)| (m.arc_column(id), S::from_cost(a.cost)))
        .collect();
    obj.extend(w.iter().flatten().map(|&c| (c, S::one())));
    m.set_objective(obj);
}

fn mcf<S: Field>(inst: &Instance, opts: &BuildOptions) -> LinearModel<S> {
    let (meta, big_m) = big_m_meta(inst, Formulation::Mcf, opts);
    let mut m = LinearModel::new();
    m.meta = meta;
    add_arc_vars(&mut m, inst);
    let d = add_d_vars(&mut m, inst);
    let w = add_w_vars(&mut m, inst);
    add_indegree_rows(&mut m, inst);

    for k in inst.non_root() {
        let inside: Vec<bool> = (0..inst.n()).map(|v| !inst.has_precedence(k, v)).collect();
        let mut y = vec![None; inst.arcs().len()];
        for (id, a) in inst.arcs().iter().enumerate() {
            if inside[a.from] && inside[a.to] {
                let col = m
                    .add_var(format!("y_{k}_{}_{}", a.from, a.to), VarKind::Binary, S::zero(), None)
                    .expect("fresh name");
                y[id] = Some(col);
            }
        }
        for i in (0..inst.n()).filter(|&i| inside[i]) {
            let mut terms: Vec<(usize, S)> = Vec::new();
            terms.extend(inst.out_arcs(i).iter().filter_map(|&id| y[id]).map(|c| (c, S::one())));
            terms.extend(inst.in_arcs(i).iter().filter_map(|&id| y[id]).map(|c| (c, -S::one())));
            let rhs = if i == inst.root() {
                S::one()
            } else if i == k {
                -S::one()
            } else {
                S::zero()
            };
            m.add_constraint(format!("flow_{k}_{i}"), terms, Sense::Eq, rhs)
                .expect("fresh name");
        }
        for (id, a) in inst.arcs().iter().enumerate() {
            if let Some(col) = y[id] {
                m.add_constraint(
                    format!("link_{k}_{}_{}", a.from, a.to),
                    vec![(col, S::one()), (m.arc_column(id), -S::one())],
                    Sense::Le,
                    S::zero(),
                )
                .expect("fresh name");
            }
        }
    }
    add_time_rows(&mut m, inst, &d, big_m);
    add_wait_rows(&mut m, inst, &d, &w, big_m);
    add_precedence_rows(&mut m, inst, &d);
    cost_plus_wait_objective(&mut m, inst, &w);
    m
}

fn da<S: Field>(inst: &Instance, opts: &BuildOptions) -> LinearModel<S> {
    let (meta, big_m) = big_m_meta(inst, Formulation::Da, opts);
    let mut m = LinearModel::new();
    m.meta = meta;
    add_arc_vars(&mut m, inst);
    let d = add_d_vars(&mut m, inst);
    let w = add_w_vars(&mut m, inst);
    add_indegree_rows(&mut m, inst);
    add_time_rows(&mut m, inst, &d, big_m);
    add_wait_rows(&mut m, inst, &d, &w, big_m);
    add_precedence_rows(&mut m, inst, &d);
    cost_plus_wait_objective(&mut m, inst, &w);
    m
}

fn aac<S: Field>(inst: &Instance, opts: &BuildOptions) -> LinearModel<S> {
    let (mut meta, big_m) = big_m_meta(inst, Formulation::Aac, opts);
    meta.valid_inequalities = opts.valid_inequalities;
    let mut m = LinearModel::new();
    m.meta = meta;
    add_arc_vars(&mut m, inst);
    let d = add_d_vars(&mut m, inst);
    let z: Vec<usize> = inst
        .arcs()
        .iter()
        .map(|a| {
            m.add_var(format!("z_{}_{}", a.from, a.to), VarKind::Continuous, S::zero(), None)
                .expect("fresh name")
        })
        .collect();
    add_indegree_rows(&mut m, inst);
    add_time_rows(&mut m, inst, &d, big_m);
    add_precedence_rows(&mut m, inst, &d);
    for (id, a) in inst.arcs().iter().enumerate() {
        m.add_constraint(
            format!("zd_{}_{}", a.from, a.to),
            vec![(z[id], S::one()), (d[a.from], -S::one())],
            Sense::Le,
            S::zero(),
        )
        .expect("fresh name");
        m.add_constraint(
            format!("zx_{}_{}", a.from, a.to),
            vec![(z[id], S::one()), (m.arc_column(id), -S::from_cost(big_m))],
            Sense::Le,
            S::zero(),
        )
        .expect("fresh name");
    }
    if opts.valid_inequalities {
        for j in inst.non_root() {
            let mut terms: Vec<(usize, S)> = Vec::new();
            for &id in inst.in_arcs(j) {
                terms.push((z[id], S::one()));
                terms.push((m.arc_column(id), S::from_cost(inst.arc(id).cost)));
            }
            terms.push((d[j], -S::one()));
            m.add_constraint(format!("valid_{j}"), terms, Sense::Le, S::zero())
                .expect("fresh name");
        }
    }
    let mut obj: Vec<(usize, S)> = inst.non_root().map(|j| (d[j], S::one())).collect();
    obj.extend(z.iter().map(|&c| (c, -S::one())));
    m.set_objective(obj);
    m
}

/// Closed-form model sizes, `(variables, constraints)` before any cuts.
pub fn model_size(inst: &Instance, f: Formulation, valid_inequalities: bool) -> (usize, usize) {
    let n = inst.n();
    let a = inst.arcs().len();
    let r = inst.precedences().len();
    match f {
        Formulation::SetBased => (a, n - 1),
        Formulation::Da => (a + n + (n - 1), (n - 1) + 1 + 2 * a + r),
        Formulation::Aac => {
            let vi = if valid_inequalities { n - 1 } else { 0 };
            (a + n + a, (n - 1) + 1 + a + r + 2 * a + vi)
        }
        Formulation::Mcf => {
            let mut y = 0;
            let mut flow = 0;
            for k in inst.non_root() {
                let inside = |v: usize| !inst.has_precedence(k, v);
                flow += (0..n).filter(|&v| inside(v)).count();
                y += inst.arcs().iter().filter(|e| inside(e.from) && inside(e.to)).count();
            }
            (a + y + n + (n - 1), (n - 1) + flow + 1 + 2 * a + r + y)
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
    fn set_based_counts() {
        let inst = fig3();
        let m = build_set_based::<f64>(&inst);
        assert_eq!(m.num_vars(), 8);
        assert_eq!(m.num_constraints(), 3);
        assert!(m.constraints().iter().all(|c| c.sense == Sense::Eq));
        let tiny = Instance::new(2, 0, &[(0, 1, 3)], &[]).unwrap();
        let m = build_set_based::<f64>(&tiny);
        assert_eq!((m.num_vars(), m.num_constraints()), (1, 1));
    }

    #[test]
    fn sizes_match_closed_form() {
        let inst = fig3();
        for f in [Formulation::SetBased, Formulation::Mcf, Formulation::Da, Formulation::Aac] {
            for vi in [false, true] {
                let m: LinearModel<f64> = build(
                    &inst,
                    f,
                    &BuildOptions {
                        valid_inequalities: vi,
                        ..BuildOptions::default()
                    },
                );
                assert_eq!((m.num_vars(), m.num_constraints()), model_size(&inst, f, vi), "{f}");
            }
        }
    }

    #[test]
    fn da_time_row_for_root_arc() {
        let m = build_da::<f64>(&fig3());
        assert_eq!(m.meta.big_m, Some(5));
        let row = &m.constraints()[m.constraint_index("time_0_1").unwrap()];
        let d1 = m.var_index("d_1").unwrap();
        let d0 = m.var_index("d_0").unwrap();
        let x = m.var_index("x_0_1").unwrap();
        assert_eq!(row.terms, vec![(d1, 1.0), (d0, -1.0), (x, -6.0)]);
        assert_eq!((row.sense, row.rhs), (Sense::Ge, -5.0));
        let prec: Vec<_> = m.constraints().iter().filter(|c| c.name.starts_with("prec_")).collect();
        assert_eq!(prec.len(), 1);
    }

    #[test]
    fn mcf_flow_rows_follow_allowed_sets() {
        let m = build_mcf::<f64>(&fig3());
        // commodity 2 may not route through 3
        assert!(m.constraint_index("flow_2_3").is_none());
        assert!(m.var_index("y_2_2_3").is_none());
        for k in 1..4 {
            assert!(m.constraint_index(&format!("flow_{k}_0")).is_some());
            assert!(m.constraint_index(&format!("flow_{k}_{k}")).is_some());
        }
        let flows = m.constraints().iter().filter(|c| c.name.starts_with("flow_")).count();
        assert_eq!(flows, 4 + 3 + 4);
    }

    #[test]
    fn aac_objective_signs() {
        let m = build_aac::<f64>(&fig3(), true);
        for (col, c) in m.objective() {
            let name = &m.variables()[*col].name;
            if name.starts_with("d_") {
                assert_eq!(*c, 1.0);
                assert_ne!(name, "d_0");
            } else {
                assert!(name.starts_with("z_"));
                assert_eq!(*c, -1.0);
            }
        }
        assert_eq!(m.objective().len(), 3 + 8);
    }
}
