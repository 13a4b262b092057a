use crate::instance::Instance;

/// Upper bound used in the big-M rows of the timed formulations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigM {
    pub value: i64,
    /// The nearest-neighbour walk got stuck; `value` is the fallback sum.
    pub fallback: bool,
    /// Visiting order of the nearest-neighbour walk, when it succeeded.
    pub path: Option<Vec<usize>>,
}

/// Nearest-neighbour sequential-ordering heuristic.
///
/// Starting at the root, repeatedly moves along the cheapest arc to an
/// unvisited vertex whose required predecessors (every `s` with `(s, v)` in
/// `R`) are already visited; ties go to the lowest id. The path is a
/// feasible waiting-times solution with no waits, so its cost bounds the
/// optimum. If the walk gets stuck, falls back to `(n - 1) L` where `L` sums
/// the most expensive incoming arc of every vertex. Earliest entry times of
/// any tree are at most `L`, so every tree has a schedule of cost at most
/// `(n - 1) L`.
pub fn compute_big_m(inst: &Instance) -> BigM {
    let n = inst.n();
    let mut visited = vec![false; n];
    let mut pending = vec![0usize; n];
    for &(_, t) in inst.precedences() {
        pending[t] += 1;
    }
    let mut cur = inst.root();
    visited[cur] = true;
    let mut path = vec![cur];
    let mut total = 0i64;
    let mut stuck = false;
    while path.len() < n {
        let next = inst
            .out_arcs(cur)
            .iter()
            .map(|&id| inst.arc(id))
            .filter(|a| !visited[a.to] && pending[a.to] == 0)
            .min_by_key(|a| (a.cost, a.to));
        let Some(a) = next else {
            stuck = true;
            break;
        };
        total += a.cost;
        cur = a.to;
        visited[cur] = true;
        path.push(cur);
        for &(s, t) in inst.precedences() {
            if s == cur {
                pending[t] -= 1;
            }
        }
    }
    if stuck {
        let longest: i64 = inst
            .non_root()
            .map(|v| inst.in_arcs(v).iter().map(|&id| inst.arc(id).cost).max().unwrap_or(0))
            .sum();
        let value = longest * (n as i64 - 1);
        return BigM {
            value,
            fallback: true,
            path: None,
        };
    }
    BigM {
        value: total,
        fallback: false,
        path: Some(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_walk() {
        let inst = Instance::new(
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
        .unwrap();
        let m = compute_big_m(&inst);
        assert_eq!(m.value, 5);
        assert_eq!(m.path, Some(vec![0, 1, 2, 3]));
        assert!(!m.fallback);
    }

    #[test]
    fn single_arc() {
        let inst = Instance::new(2, 0, &[(0, 1, 7)], &[]).unwrap();
        assert_eq!(compute_big_m(&inst).value, 7);
    }

    #[test]
    fn dead_end_falls_back() {
        // after 0 -> 1 there is no way on to 2
        let inst = Instance::new(3, 0, &[(0, 1, 1), (0, 2, 5), (2, 1, 4)], &[]).unwrap();
        let m = compute_big_m(&inst);
        assert!(m.fallback);
        assert_eq!(m.value, 2 * (4 + 5));
    }
}
