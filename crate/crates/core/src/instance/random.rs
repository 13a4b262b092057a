use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{normalize, Instance, RawInstance};

/// Parameters of the random instance generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    pub n: usize,
    /// Probability that an ordered pair `(i, j)`, `j` not the root, is an arc.
    pub arc_probability: f64,
    pub max_cost: i64,
    /// Upper bound on `|R|`; the actual count is uniform in `0..=max_precedences`.
    pub max_precedences: usize,
    /// Add every root arc regardless of `arc_probability`.
    pub complete_root: bool,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            n: 6,
            arc_probability: 0.6,
            max_cost: 9,
            max_precedences: 4,
            complete_root: false,
        }
    }
}

/// Draws a random normalized instance with root 0. Deterministic in `seed`.
pub fn random_instance(spec: &RandomSpec, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n.max(1);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in 1..n {
            if i == j {
                continue;
            }
            if (i == 0 && spec.complete_root) || rng.gen_bool(spec.arc_probability.clamp(0.0, 1.0)) {
                arcs.push((i, j, rng.gen_range(0..=spec.max_cost.max(0))));
            }
        }
    }
    let mut precedences = Vec::new();
    if n >= 3 {
        let target = rng.gen_range(0..=spec.max_precedences);
        let mut attempts = 0;
        while precedences.len() < target && attempts < 50 * (target + 1) {
            attempts += 1;
            let s = rng.gen_range(1..n);
            let t = rng.gen_range(1..n);
            if s != t && !precedences.contains(&(s, t)) {
                precedences.push((s, t));
            }
        }
    }
    normalize(RawInstance {
        name: format!("rand-n{n}-s{seed}"),
        n,
        root: 0,
        arcs,
        precedences,
    })
    .expect("generator produces valid data")
}
