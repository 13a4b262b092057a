//! Dense two-phase primal simplex with bounded variables.
//!
//! Each row `a x {<=,=,>=} b` becomes `a x + s = b` with the slack bounded to
//! `[0, inf)`, `(-inf, 0]` or `[0, 0]`. Rows whose slack cannot absorb the
//! starting residual get an artificial variable; its tableau column is a
//! signed copy of the slack column, so it is never stored. Pricing is
//! Dantzig's rule with a switch to Bland's rule after a run of degenerate
//! pivots.

use super::{LinearModel, LpSolution, LpStatus, Sense};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpOptions {
    pub max_iterations: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            max_iterations: 200_000,
            bland_after: 50,
        }
    }
}

pub fn solve_lp<S: Field>(m: &LinearModel<S>) -> LpSolution<S> {
    solve_lp_with(m, &LpOptions::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basic {
    Col(usize),
    Art,
}

#[derive(Clone)]
struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    beta: Vec<S>,
    basis: Vec<Basic>,
    row_of: Vec<Option<usize>>,
    lower: Vec<Option<S>>,
    upper: Vec<Option<S>>,
    value: Vec<S>,
    cost: Vec<S>,
    dj: Vec<S>,
    ncols: usize,
    phase_one: bool,
    iterations: usize,
    degenerate_run: usize,
    tol: S,
    piv_tol: S,
    /// Original bounds while the perturbed ones are in force.
    saved: Option<(Vec<Option<S>>, Vec<Option<S>>)>,
    may_perturb: bool,
    /// Structural column `j` holds `x_j / col_scale[j]`.
    col_scale: Vec<S>,
}

enum Step {
    Optimal,
    Unbounded,
    Moved,
}

impl<S: Field> Tableau<S> {
    fn new(m: &LinearModel<S>) -> Self {
        let n = m.num_vars();
        let nrows = m.num_constraints();
        let ncols = n + nrows;
        let (col_scale, row_scale) = equilibrate(m);
        let mut lower = Vec::with_capacity(ncols);
        let mut upper = Vec::with_capacity(ncols);
        for (v, c) in m.variables().iter().zip(&col_scale) {
            lower.push(Some(v.lower.clone() / c.clone()));
            upper.push(v.upper.clone().map(|u| u / c.clone()));
        }
        for r in m.constraints() {
            let (lo, hi) = match r.sense {
                Sense::Le => (Some(S::zero()), None),
                Sense::Ge => (None, Some(S::zero())),
                Sense::Eq => (Some(S::zero()), Some(S::zero())),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let value: Vec<S> = (0..ncols)
            .map(|j| {
                lower[j]
                    .clone()
                    .or_else(|| upper[j].clone())
                    .unwrap_or_else(S::zero)
            })
            .collect();

        let mut rows = Vec::with_capacity(nrows);
        let mut rhs = Vec::with_capacity(nrows);
        let mut beta = Vec::with_capacity(nrows);
        let mut basis = Vec::with_capacity(nrows);
        let mut row_of = vec![None; ncols];
        for (i, r) in m.constraints().iter().enumerate() {
            let mut row = vec![S::zero(); ncols];
            let rs = &row_scale[i];
            for (v, c) in &r.terms {
                row[*v] = row[*v].clone() + rs.clone() * c.clone() * col_scale[*v].clone();
            }
            row[n + i] = S::one();
            let mut residual = rs.clone() * r.rhs.clone();
            for (v, c) in row.iter().enumerate().take(n) {
                if !c.is_zero() {
                    residual = residual - c.clone() * value[v].clone();
                }
            }
            let fits = lower[n + i].as_ref().is_none_or(|l| residual >= *l)
                && upper[n + i].as_ref().is_none_or(|u| residual <= *u);
            let mut b = rs.clone() * r.rhs.clone();
            if fits {
                basis.push(Basic::Col(n + i));
                row_of[n + i] = Some(i);
                beta.push(residual);
            } else {
                if residual < S::zero() {
                    for c in row.iter_mut() {
                        *c = -c.clone();
                    }
                    b = -b;
                    residual = -residual;
                }
                basis.push(Basic::Art);
                beta.push(residual);
            }
            rows.push(row);
            rhs.push(b);
        }
        let mut cost = vec![S::zero(); ncols];
        for (v, c) in m.objective() {
            cost[*v] = cost[*v].clone() + c.clone() * col_scale[*v].clone();
        }
        let scale = rows
            .iter()
            .flat_map(|r| r.iter().map(|a| a.abs()))
            .chain(rhs.iter().map(|b| b.abs()))
            .chain(cost.iter().map(|c| c.abs()))
            .fold(S::one(), |a, b| if b > a { b } else { a });
        Tableau {
            rows,
            rhs,
            beta,
            basis,
            row_of,
            lower,
            upper,
            value,
            cost,
            dj: vec![S::zero(); ncols],
            ncols,
            phase_one: true,
            iterations: 0,
            degenerate_run: 0,
            tol: S::tolerance() * scale,
            piv_tol: S::pivot_tolerance(),
            saved: None,
            may_perturb: !S::tolerance().is_zero(),
            col_scale,
        }
    }

    fn basic_cost(&self, i: usize) -> S {
        match (self.basis[i], self.phase_one) {
            (Basic::Art, true) => S::one(),
            (Basic::Art, false) => S::zero(),
            (Basic::Col(j), false) => self.cost[j].clone(),
            (Basic::Col(_), true) => S::zero(),
        }
    }

    fn price(&mut self) {
        let mut dj: Vec<S> = if self.phase_one {
            vec![S::zero(); self.ncols]
        } else {
            self.cost.clone()
        };
        for i in 0..self.rows.len() {
            let cb = self.basic_cost(i);
            if cb.is_zero() {
                continue;
            }
            for (d, a) in dj.iter_mut().zip(&self.rows[i]) {
                if !a.is_zero() {
                    *d = d.clone() - cb.clone() * a.clone();
                }
            }
        }
        for i in 0..self.rows.len() {
            if let Basic::Col(j) = self.basis[i] {
                dj[j] = S::zero();
            }
        }
        self.dj = dj;
    }

    fn basic_bounds(&self, i: usize) -> (Option<S>, Option<S>) {
        match self.basis[i] {
            Basic::Col(j) => (self.lower[j].clone(), self.upper[j].clone()),
            Basic::Art if self.phase_one => (Some(S::zero()), None),
            Basic::Art => (Some(S::zero()), Some(S::zero())),
        }
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn choose_entering(&self, bland: bool) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, S)> = None;
        for j in 0..self.ncols {
            if self.row_of[j].is_some() {
                continue;
            }
            let (lo, hi) = (&self.lower[j], &self.upper[j]);
            if let (Some(l), Some(u)) = (lo, hi) {
                if l == u {
                    continue;
                }
            }
            let at_lower = lo.as_ref().is_some_and(|l| self.value[j] == *l);
            let at_upper = hi.as_ref().is_some_and(|u| self.value[j] == *u);
            let d = &self.dj[j];
            let cand = if !at_upper && *d < -self.tol.clone() {
                Some(true)
            } else if !at_lower && *d > self.tol {
                Some(false)
            } else {
                None
            };
            if let Some(inc) = cand {
                if bland {
                    return Some((j, inc));
                }
                let mag = d.abs();
                if best.as_ref().is_none_or(|b| mag > b.2) {
                    best = Some((j, inc, mag));
                }
            }
        }
        best.map(|(j, inc, _)| (j, inc))
    }

    fn step(&mut self, bland: bool) -> Step {
        let Some((j, inc)) = self.choose_entering(bland) else {
            return Step::Optimal;
        };
        let dir = if inc { S::one() } else { -S::one() };

        let flip: Option<S> = match (&self.lower[j], &self.upper[j]) {
            (Some(l), Some(u)) => Some(u.clone() - l.clone()),
            _ => None,
        };
        let (limit, leave) = if bland {
            self.exact_ratio(j, &dir, flip)
        } else {
            self.harris_ratio(j, &dir, flip)
        };
        let Some(t) = limit else {
            return Step::Unbounded;
        };
        if t <= self.tol {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
        for i in 0..self.rows.len() {
            let a = &self.rows[i][j];
            if !a.is_zero() {
                self.beta[i] = self.beta[i].clone() - dir.clone() * t.clone() * a.clone();
            }
        }
        let entering_value = self.value[j].clone() + dir * t;
        match leave {
            None => {
                // bound flip
                self.value[j] = if inc {
                    self.upper[j].clone().unwrap()
                } else {
                    self.lower[j].clone().unwrap()
                };
            }
            Some((r, alpha)) => {
                if let Basic::Col(k) = self.basis[r] {
                    let (lo, hi) = (self.lower[k].clone(), self.upper[k].clone());
                    self.value[k] = if alpha > S::zero() {
                        lo.unwrap()
                    } else {
                        hi.unwrap()
                    };
                    self.row_of[k] = None;
                }
                self.pivot(r, j);
                self.beta[r] = entering_value;
            }
        }
        self.iterations += 1;
        Step::Moved
    }

    /// Textbook ratio test; ties go to the lowest basis key.
    fn exact_ratio(&self, j: usize, dir: &S, flip: Option<S>) -> (Option<S>, Option<(usize, S)>) {
        let mut limit = flip;
        let mut leave: Option<(usize, S)> = None;
        for i in 0..self.rows.len() {
            let a = self.rows[i][j].clone();
            if a.abs() <= self.piv_tol {
                continue;
            }
            let alpha = dir.clone() * a;
            let (lo, hi) = self.basic_bounds(i);
            let t = if alpha > S::zero() {
                lo.map(|l| (self.beta[i].clone() - l) / alpha.clone())
            } else {
                hi.map(|u| (u - self.beta[i].clone()) / -alpha.clone())
            };
            let Some(t) = t else { continue };
            let t = if t < S::zero() { S::zero() } else { t };
            let better = match &limit {
                None => true,
                Some(cur) => {
                    if t < cur.clone() - self.tol.clone() {
                        true
                    } else if t <= cur.clone() + self.tol.clone() {
                        // tie: only replace another row, never the bound flip
                        leave.as_ref().is_some_and(|(r, _)| self.basis_key(i) < self.basis_key(*r))
                    } else {
                        false
                    }
                }
            };
            if better {
                limit = Some(t);
                leave = Some((i, alpha));
            }
        }
        (limit, leave)
    }

    /// Two-pass ratio test: bounds may be overshot by the tolerance, and
    /// among the rows that then block first the largest pivot wins.
    fn harris_ratio(&self, j: usize, dir: &S, flip: Option<S>) -> (Option<S>, Option<(usize, S)>) {
        let piv = self.piv_tol.clone() * S::from_cost(100);
        let mut cands: Vec<(usize, S, S)> = Vec::new();
        let mut theta = flip.clone();
        for i in 0..self.rows.len() {
            let a = self.rows[i][j].clone();
            if a.abs() <= piv {
                continue;
            }
            let alpha = dir.clone() * a;
            let (lo, hi) = self.basic_bounds(i);
            let room = if alpha > S::zero() {
                lo.map(|l| self.beta[i].clone() - l)
            } else {
                hi.map(|u| u - self.beta[i].clone())
            };
            let Some(room) = room else { continue };
            let relaxed = (room.clone() + self.tol.clone()) / alpha.abs();
            if theta.as_ref().is_none_or(|t| relaxed < *t) {
                theta = Some(relaxed);
            }
            let t = room / alpha.abs();
            cands.push((i, alpha, if t < S::zero() { S::zero() } else { t }));
        }
        let Some(theta) = theta else {
            return (None, None);
        };
        let theta = if theta < S::zero() { S::zero() } else { theta };
        if let Some(f) = flip {
            if f <= theta {
                return (Some(f), None);
            }
        }
        let best = cands
            .into_iter()
            .filter(|c| c.2 <= theta)
            .fold(None::<(usize, S, S)>, |best, c| match best {
                Some(b) if b.1.abs() >= c.1.abs() => Some(b),
                _ => Some(c),
            })
            .expect("the row setting theta qualifies");
        (Some(best.2), Some((best.0, best.1)))
    }

    fn basis_key(&self, i: usize) -> usize {
        match self.basis[i] {
            Basic::Art => i,
            Basic::Col(j) => self.rows.len() + j,
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        for c in self.rows[r].iter_mut() {
            if !c.is_zero() {
                *c = c.clone() / p.clone();
            }
        }
        self.rhs[r] = self.rhs[r].clone() / p;
        let nz: Vec<usize> = (0..self.ncols).filter(|&c| !self.rows[r][c].is_zero()).collect();
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][j].clone();
            if f.is_zero() {
                continue;
            }
            let row = &mut self.rows[i];
            for &c in &nz {
                row[c] = row[c].clone() - f.clone() * pivot_row[c].clone();
            }
            row[j] = S::zero();
            self.rhs[i] = self.rhs[i].clone() - f * pivot_rhs.clone();
        }
        let f = self.dj[j].clone();
        if !f.is_zero() {
            for &c in &nz {
                self.dj[c] = self.dj[c].clone() - f.clone() * pivot_row[c].clone();
            }
            self.dj[j] = S::zero();
        }
        self.rows[r] = pivot_row;
        self.basis[r] = Basic::Col(j);
        self.row_of[j] = Some(r);
    }

    /// Recomputes basic values from the transformed right-hand side.
    fn refresh_beta(&mut self) {
        for i in 0..self.rows.len() {
            let mut v = self.rhs[i].clone();
            for j in 0..self.ncols {
                if self.row_of[j].is_none() && !self.value[j].is_zero() && !self.rows[i][j].is_zero() {
                    v = v - self.rows[i][j].clone() * self.value[j].clone();
                }
            }
            self.beta[i] = v;
        }
    }

    fn run(&mut self, opts: &LpOptions) -> Option<LpStatus> {
        self.price();
        loop {
            if self.iterations >= opts.max_iterations {
                return Some(LpStatus::IterationLimit);
            }
            let bland = self.degenerate_run >= opts.bland_after;
            if bland && self.may_perturb && !self.phase_one && self.saved.is_none() {
                self.perturb();
                continue;
            }
            match self.step(bland) {
                Step::Optimal => return None,
                Step::Unbounded => return Some(LpStatus::Unbounded),
                Step::Moved => {}
            }
        }
    }

    /// Widens every non-fixed bound by a small, index-dependent amount so
    /// that degenerate vertices become strict.
    fn perturb(&mut self) {
        self.saved = Some((self.lower.clone(), self.upper.clone()));
        self.degenerate_run = 0;
        for j in 0..self.ncols {
            if self.is_fixed(j) {
                continue;
            }
            let eps = self.tol.clone() * S::from_cost(100 + (j as i64 * 7919) % 97);
            let (was_lower, was_upper) = (self.at_lower(j), self.at_upper(j));
            if let Some(l) = self.lower[j].as_mut() {
                *l = l.clone() - eps.clone();
            }
            if let Some(u) = self.upper[j].as_mut() {
                *u = u.clone() + eps;
            }
            if self.row_of[j].is_none() {
                if was_lower {
                    self.shift_nonbasic(j, self.lower[j].clone().unwrap());
                } else if was_upper {
                    self.shift_nonbasic(j, self.upper[j].clone().unwrap());
                }
            }
        }
    }

    /// Restores the original bounds, moving nonbasic columns back onto them.
    fn unperturb(&mut self) {
        let Some((lower, upper)) = self.saved.take() else {
            return;
        };
        for j in 0..self.ncols {
            let target = if self.row_of[j].is_some() {
                None
            } else if self.lower[j].as_ref().is_some_and(|l| self.value[j] == *l) {
                lower[j].clone()
            } else if self.upper[j].as_ref().is_some_and(|u| self.value[j] == *u) {
                upper[j].clone()
            } else {
                None
            };
            self.lower[j] = lower[j].clone();
            self.upper[j] = upper[j].clone();
            if let Some(v) = target {
                self.shift_nonbasic(j, v);
            }
        }
        self.refresh_beta();
    }

    /// Phase two. A perturbed optimum is repaired with dual pivots after the
    /// bounds are restored; `None` means the repair failed.
    fn primal(&mut self, opts: &LpOptions) -> Option<Option<LpStatus>> {
        let first = self.run(opts);
        if self.saved.is_none() {
            return Some(first);
        }
        self.unperturb();
        if first.is_some() {
            return Some(first);
        }
        loop {
            if self.iterations >= opts.max_iterations {
                return Some(Some(LpStatus::IterationLimit));
            }
            match self.dual_step() {
                DualStep::Feasible => break,
                DualStep::Infeasible | DualStep::Unsure => return None,
                DualStep::Moved => {}
            }
        }
        self.refresh_beta();
        let allowed = std::mem::replace(&mut self.may_perturb, false);
        let second = self.run(opts);
        self.may_perturb = allowed;
        Some(second)
    }

    fn infeasibility(&self) -> S {
        (0..self.rows.len())
            .filter(|&i| self.basis[i] == Basic::Art)
            .fold(S::zero(), |acc, i| acc + self.beta[i].clone())
    }

    /// Pivots remaining zero-valued artificials out of the basis where possible.
    fn drive_out_artificials(&mut self) {
        for r in 0..self.rows.len() {
            if self.basis[r] != Basic::Art {
                continue;
            }
            let pick = (0..self.ncols)
                .filter(|&j| self.row_of[j].is_none())
                .max_by(|&a, &b| {
                    self.rows[r][a]
                        .abs()
                        .partial_cmp(&self.rows[r][b].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                        .then(b.cmp(&a))
                });
            if let Some(j) = pick {
                if self.rows[r][j].abs() > self.piv_tol {
                    let v = self.value[j].clone();
                    self.pivot(r, j);
                    self.beta[r] = v;
                }
            }
        }
    }

    /// Structural values in the model's own units.
    fn values(&self, n: usize) -> Vec<S> {
        (0..n)
            .map(|j| {
                let v = match self.row_of[j] {
                    Some(i) => self.beta[i].clone(),
                    None => self.value[j].clone(),
                };
                v * self.col_scale[j].clone()
            })
            .collect()
    }
}

const SCALING_PASSES: usize = 4;

fn power_of_two<S: Field>(x: f64) -> S {
    let k = x.log2().round().clamp(-60.0, 60.0) as i32;
    S::from_f64(2f64.powi(k)).expect("power of two is representable")
}

/// Row factor `1 / sqrt(max * min)` over nonzero magnitudes, rounded to a
/// power of two; exact scalars are never scaled.
fn row_factor<'a, S: Field>(coefs: impl Iterator<Item = &'a S>) -> S {
    if S::tolerance().is_zero() {
        return S::one();
    }
    let (mut hi, mut lo) = (0f64, f64::INFINITY);
    for c in coefs {
        let a = c.to_f64_lossy().abs();
        if a > 0.0 {
            hi = hi.max(a);
            lo = lo.min(a);
        }
    }
    if hi == 0.0 {
        return S::one();
    }
    power_of_two(1.0 / (hi * lo).sqrt())
}

/// Geometric-mean column and row factors, rounded to powers of two so that
/// scaling is exact in binary floating point.
fn equilibrate<S: Field>(m: &LinearModel<S>) -> (Vec<S>, Vec<S>) {
    let (n, nrows) = (m.num_vars(), m.num_constraints());
    if S::tolerance().is_zero() {
        return (vec![S::one(); n], vec![S::one(); nrows]);
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, r) in m.constraints().iter().enumerate() {
        for (v, c) in &r.terms {
            let a = c.to_f64_lossy().abs();
            if a > 0.0 {
                cols[*v].push((i, a));
            }
        }
    }
    let mut col = vec![1f64; n];
    let mut row = vec![1f64; nrows];
    let spread = |it: &mut dyn Iterator<Item = f64>| {
        let (mut hi, mut lo) = (0f64, f64::INFINITY);
        for a in it {
            hi = hi.max(a);
            lo = lo.min(a);
        }
        if hi > 0.0 {
            1.0 / (hi * lo).sqrt()
        } else {
            1.0
        }
    };
    for _ in 0..SCALING_PASSES {
        for (i, r) in m.constraints().iter().enumerate() {
            row[i] = spread(&mut r.terms.iter().filter_map(|(v, c)| {
                let a = c.to_f64_lossy().abs();
                (a > 0.0).then(|| a * col[*v])
            }));
        }
        for j in 0..n {
            col[j] = spread(&mut cols[j].iter().map(|&(i, a)| a * row[i]));
        }
    }
    (
        col.into_iter().map(power_of_two).collect(),
        row.into_iter().map(power_of_two).collect(),
    )
}

/// Runs both phases on a fresh tableau.
fn solve_cold<S: Field>(m: &LinearModel<S>, opts: &LpOptions) -> (Tableau<S>, LpStatus) {
    let mut tab = Tableau::new(m);
    if tab.basis.contains(&Basic::Art) {
        if let Some(status) = tab.run(opts) {
            return (tab, status);
        }
        tab.refresh_beta();
        if tab.infeasibility() > tab.tol {
            return (tab, LpStatus::Infeasible);
        }
        tab.drive_out_artificials();
    }
    tab.phase_one = false;
    tab.degenerate_run = 0;
    let snapshot = tab.may_perturb.then(|| tab.clone());
    match tab.primal(opts) {
        Some(Some(status)) => (tab, status),
        Some(None) => {
            tab.refresh_beta();
            (tab, LpStatus::Optimal)
        }
        None => {
            let mut tab = snapshot.expect("only perturbed runs fail");
            tab.may_perturb = false;
            match tab.run(opts) {
                Some(status) => (tab, status),
                None => {
                    tab.refresh_beta();
                    (tab, LpStatus::Optimal)
                }
            }
        }
    }
}

fn finish<S: Field>(m: &LinearModel<S>, tab: &Tableau<S>, status: LpStatus) -> LpSolution<S> {
    let values = tab.values(m.num_vars());
    LpSolution {
        status,
        objective: m.evaluate(&values),
        values,
        iterations: tab.iterations,
    }
}

pub fn solve_lp_with<S: Field>(m: &LinearModel<S>, opts: &LpOptions) -> LpSolution<S> {
    let (tab, status) = solve_cold(m, opts);
    finish(m, &tab, status)
}

enum DualStep {
    Feasible,
    Infeasible,
    Unsure,
    Moved,
}

impl<S: Field> Tableau<S> {
    fn at_lower(&self, j: usize) -> bool {
        self.lower[j].as_ref().is_some_and(|l| self.value[j] == *l)
    }

    fn at_upper(&self, j: usize) -> bool {
        self.upper[j].as_ref().is_some_and(|u| self.value[j] == *u)
    }

    fn is_fixed(&self, j: usize) -> bool {
        matches!((&self.lower[j], &self.upper[j]), (Some(l), Some(u)) if l == u)
    }

    /// Whether every nonbasic reduced cost has the sign its bound allows.
    fn dual_feasible(&self) -> bool {
        (0..self.ncols).all(|j| {
            if self.row_of[j].is_some() || self.is_fixed(j) {
                return true;
            }
            let d = &self.dj[j];
            let ok_up = self.at_upper(j) || *d >= -self.tol.clone();
            let ok_down = self.at_lower(j) || *d <= self.tol;
            ok_up && ok_down
        })
    }

    /// Moves nonbasic `j` to `v`, keeping the basic values consistent.
    fn shift_nonbasic(&mut self, j: usize, v: S) {
        let delta = v.clone() - self.value[j].clone();
        if !delta.is_zero() {
            for i in 0..self.rows.len() {
                let a = &self.rows[i][j];
                if !a.is_zero() {
                    self.beta[i] = self.beta[i].clone() - a.clone() * delta.clone();
                }
            }
        }
        self.value[j] = v;
    }

    fn set_bounds(&mut self, j: usize, lo: Option<S>, hi: Option<S>) {
        if self.lower[j] == lo && self.upper[j] == hi {
            return;
        }
        self.lower[j] = lo.clone();
        self.upper[j] = hi.clone();
        if self.row_of[j].is_some() {
            return;
        }
        let v = match (lo, hi) {
            (Some(l), Some(u)) => {
                if l == u || self.dj[j] >= S::zero() {
                    l
                } else {
                    u
                }
            }
            (Some(l), None) => l,
            (None, Some(u)) => u,
            (None, None) => S::zero(),
        };
        self.shift_nonbasic(j, v);
    }

    /// Appends a row with a basic slack, expressed in the current basis.
    fn append_row(&mut self, terms: &[(usize, S)], sense: Sense, rhs: S) {
        let slack = self.ncols;
        self.ncols += 1;
        for row in &mut self.rows {
            row.push(S::zero());
        }
        let (lo, hi) = match sense {
            Sense::Le => (Some(S::zero()), None),
            Sense::Ge => (None, Some(S::zero())),
            Sense::Eq => (Some(S::zero()), Some(S::zero())),
        };
        self.lower.push(lo);
        self.upper.push(hi);
        self.value.push(S::zero());
        self.cost.push(S::zero());
        self.dj.push(S::zero());
        self.row_of.push(None);
        let mut row = vec![S::zero(); self.ncols];
        let scaled: Vec<(usize, S)> = terms
            .iter()
            .map(|(v, c)| (*v, c.clone() * self.col_scale[*v].clone()))
            .collect();
        let rs = row_factor(scaled.iter().map(|t| &t.1));
        for (v, c) in &scaled {
            row[*v] = row[*v].clone() + rs.clone() * c.clone();
        }
        row[slack] = S::one();
        let mut b = rs * rhs;
        for i in 0..self.rows.len() {
            if let Basic::Col(k) = self.basis[i] {
                let f = row[k].clone();
                if f.is_zero() {
                    continue;
                }
                for (c, a) in row.iter_mut().zip(&self.rows[i]) {
                    if !a.is_zero() {
                        *c = c.clone() - f.clone() * a.clone();
                    }
                }
                row[k] = S::zero();
                b = b - f * self.rhs[i].clone();
            }
        }
        let mut v = b.clone();
        for (j, a) in row.iter().enumerate() {
            if self.row_of[j].is_none() && j != slack && !a.is_zero() && !self.value[j].is_zero() {
                v = v - a.clone() * self.value[j].clone();
            }
        }
        self.row_of[slack] = Some(self.rows.len());
        self.rows.push(row);
        self.rhs.push(b);
        self.beta.push(v);
        self.basis.push(Basic::Col(slack));
    }

    fn dual_step(&mut self) -> DualStep {
        let mut leave: Option<(usize, S, S)> = None;
        for i in 0..self.rows.len() {
            let (lo, hi) = self.basic_bounds(i);
            let b = &self.beta[i];
            let (viol, target) = match (lo, hi) {
                (Some(l), _) if *b < l.clone() - self.tol.clone() => (l.clone() - b.clone(), l),
                (_, Some(u)) if *b > u.clone() + self.tol.clone() => (b.clone() - u.clone(), u),
                _ => continue,
            };
            if leave.as_ref().is_none_or(|l| viol > l.1) {
                leave = Some((i, viol, target));
            }
        }
        let Some((r, _, target)) = leave else {
            return DualStep::Feasible;
        };
        // x_B(r) = beta_r - alpha_rj dx_j must reach the target
        let need = self.beta[r].clone() - target.clone();
        let mut cands: Vec<(usize, S, S)> = Vec::new();
        let mut theta: Option<S> = None;
        for j in 0..self.ncols {
            if self.row_of[j].is_some() || self.is_fixed(j) {
                continue;
            }
            let a = self.rows[r][j].clone();
            if a.abs() <= self.piv_tol.clone() * S::from_cost(100) {
                continue;
            }
            let up = need.clone() / a.clone() > S::zero();
            if (up && self.at_upper(j)) || (!up && self.at_lower(j)) {
                continue;
            }
            let d = self.dj[j].clone();
            let d = if up { d } else { -d };
            let d = if d < S::zero() { S::zero() } else { d };
            let relaxed = (d.clone() + self.tol.clone()) / a.abs();
            if theta.as_ref().is_none_or(|t| relaxed < *t) {
                theta = Some(relaxed);
            }
            cands.push((j, d / a.abs(), a));
        }
        let enter = theta.and_then(|theta| {
            cands
                .into_iter()
                .filter(|c| c.1 <= theta)
                .fold(None::<(usize, S, S)>, |best, c| match best {
                    Some(b) if b.2.abs() >= c.2.abs() => Some(b),
                    _ => Some(c),
                })
        });
        let Some((j, _, a)) = enter else {
            return if self.row_certifies_infeasibility(r, &need) {
                DualStep::Infeasible
            } else {
                DualStep::Unsure
            };
        };
        let dx = need / a;
        for i in 0..self.rows.len() {
            let c = &self.rows[i][j];
            if !c.is_zero() {
                self.beta[i] = self.beta[i].clone() - c.clone() * dx.clone();
            }
        }
        let entering_value = self.value[j].clone() + dx;
        if let Basic::Col(k) = self.basis[r] {
            self.value[k] = target;
            self.row_of[k] = None;
        }
        self.pivot(r, j);
        self.beta[r] = entering_value;
        self.iterations += 1;
        DualStep::Moved
    }

    /// True when no movement of the nonbasic columns within their bounds,
    /// counting the coefficients the ratio test ignores, closes the gap
    /// `need` of basic row `r`.
    fn row_certifies_infeasibility(&self, r: usize, need: &S) -> bool {
        let mut reach = S::zero();
        for j in 0..self.ncols {
            if self.row_of[j].is_some() || self.is_fixed(j) {
                continue;
            }
            let a = self.rows[r][j].clone();
            if a.is_zero() {
                continue;
            }
            let up = need.clone() / a.clone() > S::zero();
            let room = if up {
                self.upper[j].clone().map(|u| u - self.value[j].clone())
            } else {
                self.lower[j].clone().map(|l| self.value[j].clone() - l)
            };
            match room {
                Some(room) => reach = reach + a.abs() * room,
                None => return false,
            }
        }
        let margin = self.tol.clone() * S::from_cost(1000) * (S::one() + need.abs());
        reach + margin < need.abs()
    }

    /// Dual simplex from a dual-feasible basis, then a primal clean-up.
    fn reoptimize(&mut self, opts: &LpOptions) -> Option<LpStatus> {
        self.iterations = 0;
        self.degenerate_run = 0;
        // a cold solve takes about as many pivots as there are rows
        let cap = opts.max_iterations.min(self.rows.len().max(100));
        loop {
            if self.iterations >= cap {
                return None;
            }
            match self.dual_step() {
                DualStep::Feasible => break,
                DualStep::Infeasible => return Some(LpStatus::Infeasible),
                DualStep::Unsure => return None,
                DualStep::Moved => {}
            }
        }
        self.refresh_beta();
        match self.primal(opts)? {
            Some(LpStatus::IterationLimit) => None,
            Some(status) => Some(status),
            None => {
                self.refresh_beta();
                Some(LpStatus::Optimal)
            }
        }
    }
}

/// Largest row or bound violation accepted from a warm answer.
fn residual_limit<S: Field>(m: &LinearModel<S>) -> S {
    let big = m
        .constraints()
        .iter()
        .flat_map(|r| r.terms.iter().map(|t| t.1.abs()).chain(std::iter::once(r.rhs.abs())))
        .fold(S::one(), |a, b| if b > a { b } else { a });
    S::tolerance() * S::from_cost(1000) * big
}

/// Re-solves a sequence of related models, reusing the last basis.
///
/// Each model passed to [`WarmLp::solve`] must have the same variables as
/// the first and extend its constraint list; only bounds and appended rows
/// may differ. The tableau is rebuilt after a fixed number of warm solves
/// and whenever a warm answer fails a residual check.
pub struct WarmLp<S> {
    tab: Option<Tableau<S>>,
    opts: LpOptions,
    warm_solves: usize,
    rebuild_every: usize,
    solves: usize,
    cold_solves: usize,
}

impl<S: Field> WarmLp<S> {
    pub fn new(opts: LpOptions) -> Self {
        WarmLp {
            tab: None,
            opts,
            warm_solves: 0,
            rebuild_every: 30,
            solves: 0,
            cold_solves: 0,
        }
    }

    /// Solves so far, and how many of them started from scratch.
    pub fn counts(&self) -> (usize, usize) {
        (self.solves, self.cold_solves)
    }

    fn cold(&mut self, m: &LinearModel<S>) -> LpSolution<S> {
        let (tab, status) = solve_cold(m, &self.opts);
        let sol = finish(m, &tab, status);
        self.cold_solves += 1;
        self.warm_solves = 0;
        self.tab = (status == LpStatus::Optimal).then_some(tab);
        sol
    }

    pub fn solve(&mut self, m: &LinearModel<S>) -> LpSolution<S> {
        self.solves += 1;
        let reusable = self.warm_solves < self.rebuild_every
            && self.tab.as_ref().is_some_and(|t| !t.phase_one && t.rows.len() <= m.num_constraints());
        if !reusable {
            return self.cold(m);
        }
        let mut tab = self.tab.take().expect("checked above");
        let n = m.num_vars();
        for (j, v) in m.variables().iter().enumerate() {
            let c = tab.col_scale[j].clone();
            tab.set_bounds(j, Some(v.lower.clone() / c.clone()), v.upper.clone().map(|u| u / c));
        }
        for r in &m.constraints()[tab.rows.len()..] {
            tab.append_row(&r.terms, r.sense, r.rhs.clone());
        }
        if !tab.dual_feasible() {
            return self.cold(m);
        }
        let Some(status) = tab.reoptimize(&self.opts) else {
            return self.cold(m);
        };
        if status == LpStatus::Unbounded {
            return self.cold(m);
        }
        let sol = finish(m, &tab, status);
        if status == LpStatus::Optimal && m.max_violation(&sol.values) > residual_limit(m) {
            return self.cold(m);
        }
        debug_assert_eq!(tab.ncols, n + tab.rows.len());
        self.warm_solves += 1;
        self.tab = Some(tab);
        sol
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::VarKind;
    use crate::scalar::rational;
    use crate::Rational;

    fn var(m: &mut LinearModel<f64>, name: &str, lo: f64, hi: Option<f64>) -> usize {
        m.add_var(name, VarKind::Continuous, lo, hi).unwrap()
    }

    #[test]
    fn small_maximization_as_minimization() {
        // max 3a + 5b, a <= 4, 2b <= 12, 3a + 2b <= 18 -> 36 at (2, 6)
        let mut m = LinearModel::<f64>::new();
        let a = var(&mut m, "a", 0.0, None);
        let b = var(&mut m, "b", 0.0, None);
        m.add_constraint("c1", vec![(a, 1.0)], Sense::Le, 4.0).unwrap();
        m.add_constraint("c2", vec![(b, 2.0)], Sense::Le, 12.0).unwrap();
        m.add_constraint("c3", vec![(a, 3.0), (b, 2.0)], Sense::Le, 18.0).unwrap();
        m.set_objective(vec![(a, -3.0), (b, -5.0)]);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.values[a] - 2.0).abs() < 1e-9 && (s.values[b] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_rows_are_infeasible() {
        let mut m = LinearModel::<f64>::new();
        let d = var(&mut m, "d_1", 0.0, None);
        m.add_constraint("lo", vec![(d, 1.0)], Sense::Ge, 1.0).unwrap();
        m.add_constraint("hi", vec![(d, 1.0)], Sense::Le, 0.0).unwrap();
        m.set_objective(vec![(d, 1.0)]);
        assert_eq!(solve_lp(&m).status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let mut m = LinearModel::<f64>::new();
        let a = var(&mut m, "a", 0.0, None);
        let b = var(&mut m, "b", 0.0, None);
        m.add_constraint("c", vec![(a, 1.0), (b, -1.0)], Sense::Le, 1.0).unwrap();
        m.set_objective(vec![(a, -1.0)]);
        assert_eq!(solve_lp(&m).status, LpStatus::Unbounded);
    }

    #[test]
    fn equalities_and_bound_flips() {
        // min -a - b - c, a + b + c = 2, each in [0, 1]
        let mut m = LinearModel::<f64>::new();
        let v: Vec<usize> = ["a", "b", "c"].iter().map(|n| var(&mut m, n, 0.0, Some(1.0))).collect();
        m.add_constraint("sum", v.iter().map(|&c| (c, 1.0)).collect(), Sense::Eq, 2.0)
            .unwrap();
        m.set_objective(vec![(v[0], -1.0), (v[1], -2.0), (v[2], -3.0)]);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 5.0).abs() < 1e-9);
        assert!(m.max_violation(&s.values) < 1e-9);
    }

    #[test]
    fn exact_rational_solution() {
        // min a + b, 2a + b >= 1, a + 3b >= 1 -> a = 2/5, b = 1/5
        let mut m = LinearModel::<Rational>::new();
        let z = rational(0, 1);
        let a = m.add_var("a", VarKind::Continuous, z.clone(), None).unwrap();
        let b = m.add_var("b", VarKind::Continuous, z, None).unwrap();
        m.add_constraint("r1", vec![(a, rational(2, 1)), (b, rational(1, 1))], Sense::Ge, rational(1, 1))
            .unwrap();
        m.add_constraint("r2", vec![(a, rational(1, 1)), (b, rational(3, 1))], Sense::Ge, rational(1, 1))
            .unwrap();
        m.set_objective(vec![(a, rational(1, 1)), (b, rational(1, 1))]);
        let s = solve_lp(&m);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.values, vec![rational(2, 5), rational(1, 5)]);
        assert_eq!(s.objective, rational(3, 5));
    }

    #[test]
    fn iteration_limit_is_reported() {
        let mut m = LinearModel::<f64>::new();
        let a = var(&mut m, "a", 0.0, None);
        let b = var(&mut m, "b", 0.0, None);
        m.add_constraint("r", vec![(a, 1.0), (b, 1.0)], Sense::Ge, 3.0).unwrap();
        m.set_objective(vec![(a, 1.0), (b, 2.0)]);
        let s = solve_lp_with(
            &m,
            &LpOptions {
                max_iterations: 0,
                ..LpOptions::default()
            },
        );
        assert_eq!(s.status, LpStatus::IterationLimit);
        assert_eq!(s.values.len(), 2);
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example, which cycles under the textbook rule without safeguards
        let mut m = LinearModel::<f64>::new();
        let x: Vec<usize> = (0..4).map(|k| var(&mut m, &format!("x{k}"), 0.0, None)).collect();
        m.add_constraint("r1", vec![(x[0], 0.25), (x[1], -60.0), (x[2], -0.04), (x[3], 9.0)], Sense::Le, 0.0)
            .unwrap();
        m.add_constraint("r2", vec![(x[0], 0.5), (x[1], -90.0), (x[2], -0.02), (x[3], 3.0)], Sense::Le, 0.0)
            .unwrap();
        m.add_constraint("r3", vec![(x[2], 1.0)], Sense::Le, 1.0).unwrap();
        m.set_objective(vec![(x[0], -0.75), (x[1], 150.0), (x[2], -0.02), (x[3], 6.0)]);
        let s = solve_lp_with(
            &m,
            &LpOptions {
                bland_after: 2,
                ..LpOptions::default()
            },
        );
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 0.05).abs() < 1e-9);
    }
}
