//! 3-SAT to PCMCA.
//!
//! Vertices: root `r`, `s`, `s'`, `t` and one vertex per literal occurrence,
//! three per clause layer. Unit-cost arcs run `r -> s`, `r -> s'`, `s` to
//! the first layer, each layer completely to the next, the last layer to
//! `t`, and `s'` to every literal. `R` holds `(t, s')` and every pair of
//! opposite literals with the later layer first. A feasible tree must reach
//! `t` through one literal per layer without meeting a literal and its
//! negation, which is a satisfying assignment.

use super::ReductionError;
use crate::evaluation::{check_precedences, validate_arborescence, Arborescence};
use crate::instance::{normalize, Instance, RawInstance};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    vars: usize,
    clauses: Vec<[i32; 3]>,
}

impl CnfFormula {
    pub fn new(vars: usize, clauses: Vec<[i32; 3]>) -> Result<Self, ReductionError> {
        for c in &clauses {
            for &l in c {
                if l == 0 || l.unsigned_abs() as usize > vars {
                    return Err(ReductionError::Invalid(format!(
                        "literal {l} is out of range for {vars} variables"
                    )));
                }
            }
        }
        Ok(CnfFormula { vars, clauses })
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn clauses(&self) -> &[[i32; 3]] {
        &self.clauses
    }

    /// `assignment[v - 1]` is the value of variable `v`.
    pub fn is_satisfied_by(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|&l| assignment[l.unsigned_abs() as usize - 1] == (l > 0)))
    }

    /// Satisfiability by trying every assignment.
    pub fn brute_force_satisfiable(&self) -> bool {
        (0u64..1 << self.vars).any(|mask| {
            let a: Vec<bool> = (0..self.vars).map(|v| mask >> v & 1 == 1).collect();
            self.is_satisfied_by(&a)
        })
    }
}

/// Reads DIMACS CNF. Every clause must have exactly three literals.
pub fn parse_dimacs(text: &str) -> Result<CnfFormula, ReductionError> {
    let err = |line: usize, message: String| ReductionError::Parse { line, message };
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut current: Vec<i32> = Vec::new();
    let mut last_line = 0;
    for (k, raw) in text.lines().enumerate() {
        let ln = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks.as_slice() {
                ["p", "cnf", v, c] => {
                    let v = v.parse().map_err(|_| err(ln, format!("bad variable count `{v}`")))?;
                    let c = c.parse().map_err(|_| err(ln, format!("bad clause count `{c}`")))?;
                    header = Some((v, c));
                }
                _ => return Err(err(ln, "expected `p cnf <vars> <clauses>`".into())),
            }
            continue;
        }
        let Some((vars, _)) = header else {
            return Err(err(ln, "clause before the `p cnf` header".into()));
        };
        for tok in line.split_whitespace() {
            let l: i32 = tok.parse().map_err(|_| err(ln, format!("bad literal `{tok}`")))?;
            if l == 0 {
                let clause: [i32; 3] = current
                    .as_slice()
                    .try_into()
                    .map_err(|_| err(ln, format!("clause has {} literals, expected 3", current.len())))?;
                clauses.push(clause);
                current.clear();
            } else {
                if l.unsigned_abs() as usize > vars {
                    return Err(err(ln, format!("literal {l} exceeds {vars} variables")));
                }
                current.push(l);
            }
        }
        last_line = ln;
    }
    let Some((vars, count)) = header else {
        return Err(err(1, "missing `p cnf` header".into()));
    };
    if !current.is_empty() {
        return Err(err(last_line, "last clause is not terminated by 0".into()));
    }
    if clauses.len() != count {
        return Err(err(last_line, format!("header announces {count} clauses, found {}", clauses.len())));
    }
    CnfFormula::new(vars, clauses)
}

/// Vertex ids of a reduced instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SatLayout {
    pub layers: usize,
}

impl SatLayout {
    pub const ROOT: usize = 0;
    pub const S: usize = 1;
    pub const S_PRIME: usize = 2;
    pub const T: usize = 3;

    pub fn literal(&self, layer: usize, pos: usize) -> usize {
        4 + 3 * layer + pos
    }

    pub fn n(&self) -> usize {
        4 + 3 * self.layers
    }

    /// `(layer, position)` of a literal vertex.
    pub fn locate(&self, v: usize) -> Option<(usize, usize)> {
        (v >= 4 && v < self.n()).then(|| ((v - 4) / 3, (v - 4) % 3))
    }
}

fn opposite(a: i32, b: i32) -> bool {
    a == -b
}

fn construct(f: &CnfFormula, symmetric: bool) -> RawInstance {
    let lay = SatLayout {
        layers: f.clauses.len(),
    };
    let m = lay.layers;
    let mut arcs = vec![(SatLayout::ROOT, SatLayout::S, 1), (SatLayout::ROOT, SatLayout::S_PRIME, 1)];
    if m == 0 {
        arcs.push((SatLayout::S, SatLayout::T, 1));
    }
    for k in 0..3.min(3 * m) {
        arcs.push((SatLayout::S, lay.literal(0, k), 1));
    }
    for i in 0..m.saturating_sub(1) {
        for a in 0..3 {
            for b in 0..3 {
                arcs.push((lay.literal(i, a), lay.literal(i + 1, b), 1));
            }
        }
    }
    if m > 0 {
        for k in 0..3 {
            arcs.push((lay.literal(m - 1, k), SatLayout::T, 1));
        }
    }
    for i in 0..m {
        for k in 0..3 {
            arcs.push((SatLayout::S_PRIME, lay.literal(i, k), 1));
        }
    }
    let mut precedences = vec![(SatLayout::T, SatLayout::S_PRIME)];
    for h in 0..m {
        for i in 0..m {
            if !(h > i || (symmetric && h != i)) {
                continue;
            }
            for k in 0..3 {
                for j in 0..3 {
                    if opposite(f.clauses[h][k], f.clauses[i][j]) {
                        precedences.push((lay.literal(h, k), lay.literal(i, j)));
                    }
                }
            }
        }
    }
    RawInstance {
        name: format!("3sat-v{}-c{}", f.vars, m),
        n: lay.n(),
        root: SatLayout::ROOT,
        arcs,
        precedences,
    }
}

/// The construction exactly as described, before normalization. The
/// complete layer-to-layer arcs include arcs from a literal to an opposite
/// literal in the next layer, which normalization removes.
pub fn from_3sat_raw(f: &CnfFormula) -> RawInstance {
    construct(f, false)
}

pub fn from_3sat(f: &CnfFormula) -> Instance {
    normalize(construct(f, false)).expect("construction is well formed")
}

/// Variant whose `R` also holds the opposite pairs with the earlier layer
/// first.
pub fn from_3sat_symmetric(f: &CnfFormula) -> Instance {
    normalize(construct(f, true)).expect("construction is well formed")
}

/// Reads the assignment off the root-to-`t` path of a feasible tree of
/// [`from_3sat`]`(f)`. Variables not on the path are false. Returns `None`
/// when the tree is not feasible for the reduced instance.
pub fn satisfiability_from_solution(f: &CnfFormula, arbo: &Arborescence) -> Option<Vec<bool>> {
    let inst = from_3sat(f);
    validate_arborescence(&inst, &arbo.parent).ok()?;
    if !check_precedences(&inst, arbo).is_empty() {
        return None;
    }
    let lay = SatLayout {
        layers: f.clauses.len(),
    };
    let path = arbo.path_from_root(SatLayout::T);
    let literals: Vec<(usize, usize)> = path.iter().filter_map(|&v| lay.locate(v)).collect();
    assert_eq!(literals.len(), lay.layers, "the path to t visits one literal per layer");
    assert!(literals.iter().enumerate().all(|(i, &(layer, _))| layer == i));
    let mut assignment = vec![false; f.vars];
    for &(layer, pos) in &literals {
        let l = f.clauses[layer][pos];
        if l > 0 {
            assignment[l as usize - 1] = true;
        }
    }
    assert!(f.is_satisfied_by(&assignment), "a feasible tree encodes a satisfying assignment");
    Some(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{brute_force_pcmca, SolverLimits};

    #[test]
    fn single_clause_sizes() {
        let f = CnfFormula::new(1, vec![[1, 1, 1]]).unwrap();
        let inst = from_3sat(&f);
        assert_eq!(inst.n(), 7);
        let t = brute_force_pcmca(&inst, &SolverLimits::default()).unwrap().unwrap();
        assert_eq!(satisfiability_from_solution(&f, &t), Some(vec![true]));
    }

    #[test]
    fn raw_layer_arcs_are_complete() {
        let f = CnfFormula::new(3, vec![[1, 2, 3], [-1, 2, 3], [1, -2, -3]]).unwrap();
        let raw = from_3sat_raw(&f);
        assert_eq!(raw.n, 3 * 3 + 4);
        let lay = SatLayout { layers: 3 };
        let layer_arcs = raw
            .arcs
            .iter()
            .filter(|&&(i, j, _)| matches!((lay.locate(i), lay.locate(j)), (Some(a), Some(b)) if b.0 == a.0 + 1))
            .count();
        assert_eq!(layer_arcs, 9 * 2);
        assert!(raw.arcs.iter().all(|a| a.2 == 1));
    }

    #[test]
    fn dimacs_round() {
        let f = parse_dimacs("c tiny\np cnf 2 2\n1 -2 2 0\n-1 -1\n-2 0\n").unwrap();
        assert_eq!(f.clauses(), &[[1, -2, 2], [-1, -1, -2]]);
        assert!(matches!(parse_dimacs("p cnf 2 1\n1 2 0\n"), Err(ReductionError::Parse { line: 2, .. })));
        assert!(parse_dimacs("p cnf 1 1\n1 1 2 0\n").is_err());
        assert!(parse_dimacs("1 1 1 0\n").is_err());
        assert!(parse_dimacs("p cnf 1 2\n1 1 1 0\n").is_err());
    }

    #[test]
    fn contradiction_is_infeasible() {
        let f = CnfFormula::new(1, vec![[1, 1, 1], [-1, -1, -1]]).unwrap();
        assert!(!f.brute_force_satisfiable());
        assert_eq!(brute_force_pcmca(&from_3sat(&f), &SolverLimits { brute_force_cap: 10, ..Default::default() }).unwrap(), None);
    }
}
