//! Chu-Liu/Edmonds by recursive cycle contraction.

use thiserror::Error;

use super::DiGraph;
use crate::scalar::Weight;

/// A minimum spanning arborescence over the present vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MinArborescence<S> {
    /// Arc id entering each vertex; `None` for the root and absent vertices.
    pub parent_arc: Vec<Option<usize>>,
    pub cost: S,
}

impl<S> MinArborescence<S> {
    /// Parent vertex of each vertex.
    pub fn parents(&self, g: &DiGraph<S>) -> Vec<Option<usize>>
    where
        S: Weight,
    {
        self.parent_arc
            .iter()
            .map(|a| a.map(|id| g.arc(id).from))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("vertices {vertices:?} are unreachable from root {root}")]
pub struct Unreachable {
    pub root: usize,
    pub vertices: Vec<usize>,
}

struct WorkArc<S> {
    from: usize,
    to: usize,
    weight: S,
    orig: usize,
}

/// Minimum-cost spanning arborescence rooted at `root`.
///
/// Among equally cheap entering arcs the one with the smaller source id wins
/// at every contraction level, so results are reproducible.
pub fn edmonds_mca<S: Weight>(g: &DiGraph<S>, root: usize) -> Result<MinArborescence<S>, Unreachable> {
    let reach = g.reachable_from(root, true);
    let missing: Vec<usize> = g.vertices().filter(|&v| !reach[v]).collect();
    if !missing.is_empty() || !g.contains(root) {
        return Err(Unreachable {
            root,
            vertices: missing,
        });
    }

    // Compact the present vertices so absent ones do not take part.
    let n = g.n();
    let mut index = vec![usize::MAX; n];
    let mut verts = Vec::new();
    for v in g.vertices() {
        index[v] = verts.len();
        verts.push(v);
    }
    let work: Vec<WorkArc<S>> = g
        .arcs()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.to != root)
        .map(|(id, a)| WorkArc {
            from: index[a.from],
            to: index[a.to],
            weight: a.weight.clone(),
            orig: id,
        })
        .collect();
    let chosen = contract(verts.len(), index[root], &work);

    let mut parent_arc = vec![None; n];
    let mut cost = S::zero();
    for w in chosen {
        let id = work[w].orig;
        parent_arc[g.arc(id).to] = Some(id);
        cost = cost + g.arc(id).weight.clone();
    }
    Ok(MinArborescence { parent_arc, cost })
}

/// Returns indices into `arcs` forming a min arborescence. Every vertex must
/// be reachable from `root`.
fn contract<S: Weight>(n: usize, root: usize, arcs: &[WorkArc<S>]) -> Vec<usize> {
    let mut best: Vec<Option<usize>> = vec![None; n];
    for (k, a) in arcs.iter().enumerate() {
        if a.to == root || a.from == a.to {
            continue;
        }
        let better = match best[a.to] {
            None => true,
            Some(b) => {
                let cur = &arcs[b];
                a.weight < cur.weight || (a.weight == cur.weight && a.from < cur.from)
            }
        };
        if better {
            best[a.to] = Some(k);
        }
    }

    // Cycle detection on the chosen parent pointers.
    let mut comp = vec![usize::MAX; n];
    let mut on_cycle = vec![false; n];
    let mut state = vec![0u8; n]; // 0 new, 1 on current walk, 2 done
    let mut cycles = 0usize;
    state[root] = 2;
    for start in 0..n {
        let mut v = start;
        let mut walk = Vec::new();
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = arcs[best[v].expect("reachable vertex has an in-arc")].from;
        }
        if state[v] == 1 {
            let mut u = v;
            loop {
                on_cycle[u] = true;
                comp[u] = cycles;
                u = arcs[best[u].unwrap()].from;
                if u == v {
                    break;
                }
            }
            cycles += 1;
        }
        for w in walk {
            state[w] = 2;
        }
    }
    if cycles == 0 {
        return (0..n).filter(|&v| v != root).map(|v| best[v].unwrap()).collect();
    }

    let mut next = cycles;
    for c in comp.iter_mut() {
        if *c == usize::MAX {
            *c = next;
            next += 1;
        }
    }
    let mut reduced = Vec::new();
    let mut back = Vec::new();
    for (k, a) in arcs.iter().enumerate() {
        let (cu, cv) = (comp[a.from], comp[a.to]);
        if cu == cv {
            continue;
        }
        let weight = if on_cycle[a.to] {
            a.weight.clone() - arcs[best[a.to].unwrap()].weight.clone()
        } else {
            a.weight.clone()
        };
        reduced.push(WorkArc {
            from: cu,
            to: cv,
            weight,
            orig: a.orig,
        });
        back.push(k);
    }
    let sub = contract(next, comp[root], &reduced);

    let mut entering: Vec<Option<usize>> = vec![None; n];
    for r in sub {
        let k = back[r];
        entering[arcs[k].to] = Some(k);
    }
    let mut cycle_entered = vec![false; cycles];
    for v in 0..n {
        if on_cycle[v] && entering[v].is_some() {
            cycle_entered[comp[v]] = true;
        }
    }
    debug_assert!(cycle_entered.iter().all(|&e| e));
    (0..n)
        .filter(|&v| v != root)
        .map(|v| entering[v].unwrap_or_else(|| best[v].unwrap()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rational;
    use crate::Rational;

    fn fig1() -> DiGraph<i64> {
        let mut g = DiGraph::new(4);
        for (i, j, c) in [
            (0, 1, 1),
            (0, 2, 3),
            (0, 3, 2),
            (1, 2, 1),
            (2, 1, 3),
            (2, 3, 1),
            (3, 1, 3),
            (3, 2, 3),
        ] {
            g.add_arc(i, j, c).unwrap();
        }
        g
    }

    #[test]
    fn fig1_mca() {
        let g = fig1();
        let t = edmonds_mca(&g, 0).unwrap();
        assert_eq!(t.cost, 3);
        assert_eq!(t.parents(&g), vec![None, Some(0), Some(1), Some(2)]);
    }

    #[test]
    fn star_graph() {
        let mut g = DiGraph::<i64>::new(4);
        for j in 1..4 {
            g.add_arc(0, j, j as i64 * 2).unwrap();
        }
        let t = edmonds_mca(&g, 0).unwrap();
        assert_eq!(t.cost, 12);
    }

    #[test]
    fn contraction_is_needed() {
        // cheap 2-cycle between 1 and 2, expensive entries from the root
        let mut g = DiGraph::<i64>::new(3);
        g.add_arc(0, 1, 10).unwrap();
        g.add_arc(0, 2, 12).unwrap();
        g.add_arc(1, 2, 1).unwrap();
        g.add_arc(2, 1, 1).unwrap();
        let t = edmonds_mca(&g, 0).unwrap();
        assert_eq!(t.cost, 11);
        assert_eq!(t.parents(&g), vec![None, Some(0), Some(1)]);
    }

    #[test]
    fn unreachable_vertices_are_reported() {
        let mut g = DiGraph::<i64>::new(4);
        g.add_arc(0, 1, 1).unwrap();
        g.add_arc(2, 3, 1).unwrap();
        let err = edmonds_mca(&g, 0).unwrap_err();
        assert_eq!(err.vertices, vec![2, 3]);
    }

    #[test]
    fn ties_prefer_smaller_source() {
        let mut g = DiGraph::<i64>::new(3);
        g.add_arc(0, 1, 1).unwrap();
        g.add_arc(1, 2, 2).unwrap();
        g.add_arc(0, 2, 2).unwrap();
        let t = edmonds_mca(&g, 0).unwrap();
        assert_eq!(t.parents(&g)[2], Some(0));
    }

    #[test]
    fn absent_vertices_are_skipped() {
        let mut g = DiGraph::<i64>::with_vertices(vec![true, false, true]);
        g.add_arc(0, 2, 4).unwrap();
        let t = edmonds_mca(&g, 0).unwrap();
        assert_eq!(t.parent_arc, vec![None, None, Some(0)]);
    }

    #[test]
    fn exact_rational_weights() {
        let mut g = DiGraph::<Rational>::new(3);
        g.add_arc(0, 1, rational(1, 3)).unwrap();
        g.add_arc(0, 2, rational(5, 3)).unwrap();
        g.add_arc(1, 2, rational(1, 2)).unwrap();
        assert_eq!(edmonds_mca(&g, 0).unwrap().cost, rational(5, 6));
    }
}
