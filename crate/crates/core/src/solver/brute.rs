use super::SolverLimits;
use crate::error::SolveError;
use crate::evaluation::{check_precedences, entry_times, validate_arborescence, Arborescence, TimedSolution};
use crate::instance::Instance;

fn check_size(inst: &Instance, limits: &SolverLimits) -> Result<(), SolveError> {
    if inst.n() > limits.brute_force_cap {
        return Err(SolveError::TooLarge {
            n: inst.n(),
            cap: limits.brute_force_cap,
        });
    }
    Ok(())
}

/// Calls `visit` on every precedence-feasible tree cheaper than the best
/// value `visit` has returned so far, in odometer order over in-arc choices.
fn enumerate(inst: &Instance, mut visit: impl FnMut(Arborescence) -> Option<i64>) {
    let verts: Vec<usize> = inst.non_root().collect();
    if verts.iter().any(|&v| inst.in_arcs(v).is_empty()) {
        return;
    }
    let mut choice = vec![0usize; verts.len()];
    let mut parent = vec![None; inst.n()];
    let mut best: Option<i64> = None;
    loop {
        let mut cost = 0;
        for (k, &v) in verts.iter().enumerate() {
            let a = inst.arc(inst.in_arcs(v)[choice[k]]);
            parent[v] = Some(a.from);
            cost += a.cost;
        }
        if best.is_none_or(|b| cost < b) && validate_arborescence(inst, &parent).is_ok() {
            let arbo = Arborescence {
                parent: parent.clone(),
                cost,
            };
            if check_precedences(inst, &arbo).is_empty() {
                if let Some(v) = visit(arbo) {
                    if best.is_none_or(|b| v < b) {
                        best = Some(v);
                    }
                }
            }
        }
        // advance the odometer
        let mut k = 0;
        loop {
            if k == verts.len() {
                return;
            }
            choice[k] += 1;
            if choice[k] < inst.in_arcs(verts[k]).len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Cheapest precedence-feasible tree by exhaustive enumeration, or `None`
/// when there is none. Ties keep the first tree in enumeration order.
pub fn brute_force_pcmca(inst: &Instance, limits: &SolverLimits) -> Result<Option<Arborescence>, SolveError> {
    check_size(inst, limits)?;
    let mut best: Option<Arborescence> = None;
    enumerate(inst, |t| {
        let c = t.cost;
        if best.as_ref().is_none_or(|b| c < b.cost) {
            best = Some(t);
        }
        Some(c)
    });
    Ok(best)
}

/// Cheapest timed solution over all precedence-feasible trees, skipping
/// trees whose timing constraints are infeasible.
pub fn brute_force_pcmcawt(inst: &Instance, limits: &SolverLimits) -> Result<Option<TimedSolution>, SolveError> {
    check_size(inst, limits)?;
    let mut best: Option<TimedSolution> = None;
    enumerate(inst, |t| {
        let ts = entry_times(inst, &t).ok()?;
        let v = ts.objective;
        if best.as_ref().is_none_or(|b| v < b.objective) {
            best = Some(ts);
        }
        Some(v)
    });
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1(prec: &[(usize, usize)]) -> Instance {
        Instance::new(
            4,
            0,
            &[
                (0, 1, 1),
                (0, 2, 3),
                (0, 3, 2),
                (1, 2, 1),
                (2, 1, 3),
                (2, 3, 1),
                (3, 1, 3),
                (3, 2, 3),
            ],
            prec,
        )
        .unwrap()
    }

    #[test]
    fn fig1_optima() {
        let lim = SolverLimits::default();
        assert_eq!(brute_force_pcmca(&fig1(&[(3, 1)]), &lim).unwrap().unwrap().cost, 4);
        assert_eq!(brute_force_pcmca(&fig1(&[]), &lim).unwrap().unwrap().cost, 3);
    }

    #[test]
    fn forced_wrong_order_is_infeasible() {
        let inst = Instance::new(3, 0, &[(0, 2, 1), (2, 1, 1)], &[(1, 2)]).unwrap();
        assert_eq!(brute_force_pcmca(&inst, &SolverLimits::default()).unwrap(), None);
        assert_eq!(brute_force_pcmcawt(&inst, &SolverLimits::default()).unwrap(), None);
    }

    #[test]
    fn refuses_large_instances() {
        let inst = Instance::new(9, 0, &[], &[]).unwrap();
        assert_eq!(
            brute_force_pcmca(&inst, &SolverLimits::default()),
            Err(SolveError::TooLarge { n: 9, cap: 8 })
        );
    }
}
