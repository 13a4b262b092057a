//! Acceptance suite. Prints one `[PASS]` or `[FAIL]` line per criterion to
//! stderr, so the report survives output capture.
//!
//! Benchmark criteria read SOP files from `$ARBX_DATA_DIR` or `tests/data/`.
//! A criterion that fails only because files are missing is reported as
//! `[FAIL]` but fails the test only when `ARBX_STRICT_ACCEPTANCE=1`.

use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use arbx_core::bench::{relax, run_benchmark_instances, to_csv_string, BenchConfig, Problem};
use arbx_core::evaluation::{
    check_precedences, entry_times, minimum_arborescence, objective_pcmcawt, relative_gap, Arborescence,
};
use arbx_core::graph::{max_flow, min_cut, DiGraph};
use arbx_core::instance::{random_instance, RandomSpec};
use arbx_core::models::{build, solve_lr_with_cuts, solve_milp, BuildOptions, Formulation, LpStatus, LrOptions, MilpOptions};
use arbx_core::reductions::{from_3sat, from_3sat_symmetric, from_rsa, rsa_brute_force, CnfFormula, RsaPointSet};
use arbx_core::separation::{build_dj, find_violated_inequality, separate_all};
use arbx_core::solver::{brute_force_pcmca, brute_force_pcmcawt, solve_pcmca, solve_pcmcawt, SolveStatus, SolverLimits};
use arbx_core::{Fractional, Instance, Model};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    Missing(Vec<String>),
}

fn report(line: &str) {
    let _ = writeln!(std::io::stderr(), "{line}");
}

fn data_dir() -> PathBuf {
    std::env::var_os("ARBX_DATA_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data"))
}

/// Finds `<name>.sop` in the data directory, ignoring case.
fn load(name: &str) -> Option<Instance> {
    let want = format!("{}.sop", name.to_lowercase());
    let entries = std::fs::read_dir(data_dir()).ok()?;
    for e in entries.flatten() {
        if e.file_name().to_string_lossy().to_lowercase() == want {
            return Instance::from_path(e.path()).ok();
        }
    }
    None
}

fn median_time(mut f: impl FnMut()) -> Duration {
    let mut times: Vec<Duration> = (0..5)
        .map(|_| {
            let t = Instant::now();
            f();
            t.elapsed()
        })
        .collect();
    times.sort();
    times[2]
}

fn c1_worked_examples() -> Outcome {
    let limits = SolverLimits::default();
    let fig1 = Instance::new(
        4,
        0,
        &[(0, 1, 1), (0, 2, 3), (0, 3, 2), (1, 2, 1), (2, 1, 3), (2, 3, 1), (3, 1, 3), (3, 2, 3)],
        &[(3, 1)],
    )
    .unwrap();
    let waiting = Instance::new(
        4,
        0,
        &[(0, 1, 1), (0, 2, 3), (0, 3, 1), (1, 2, 1), (1, 3, 4), (2, 1, 2), (2, 3, 3), (3, 1, 2)],
        &[(2, 3)],
    )
    .unwrap();
    let mca = minimum_arborescence(&fig1.with_precedences(&[]).unwrap()).unwrap().cost;
    assert_eq!(mca, 3);
    assert_eq!(solve_pcmca(&fig1, &limits).0.unwrap().cost, 4);
    assert_eq!(solve_pcmca(&waiting, &limits).0.unwrap().cost, 3);
    let ts = solve_pcmcawt(&waiting, &limits).0.unwrap();
    assert_eq!(ts.objective, 4);
    assert_eq!(ts.entry, vec![0, 1, 2, 2]);
    assert_eq!(ts.wait[3], 1);
    let slowest = [
        median_time(|| drop(solve_pcmca(&fig1, &limits))),
        median_time(|| drop(solve_pcmca(&waiting, &limits))),
        median_time(|| drop(solve_pcmcawt(&waiting, &limits))),
    ]
    .into_iter()
    .max()
    .unwrap();
    if slowest < Duration::from_millis(1) {
        Outcome::Pass(format!("slowest solve {slowest:?}"))
    } else {
        Outcome::Fail(format!("slowest solve {slowest:?} exceeds 1 ms"))
    }
}

fn c2_benchmark_optima() -> Outcome {
    let cases = [
        ("ESC07", Problem::Pcmca, 1531),
        ("ESC11", Problem::Pcmca, 1752),
        ("ESC12", Problem::Pcmca, 1138),
        ("br17.10", Problem::Pcmca, 25),
        ("br17.12", Problem::Pcmca, 25),
        ("ESC07", Problem::PcmcaWt, 1906),
        ("ESC11", Problem::PcmcaWt, 2174),
        ("ESC12", Problem::PcmcaWt, 1138),
        ("jpeg.3740.15", Problem::PcmcaWt, 33),
    ];
    let limits = SolverLimits {
        time_limit: Duration::from_secs(600),
        ..SolverLimits::default()
    };
    let mut missing = Vec::new();
    let mut notes = Vec::new();
    for (name, problem, expected) in cases {
        let Some(inst) = load(name) else {
            if !missing.contains(&name.to_string()) {
                missing.push(name.to_string());
            }
            continue;
        };
        let t = Instant::now();
        let got = match problem {
            Problem::PcmcaWt => solve_pcmcawt(&inst, &limits).0.map(|s| s.objective),
            _ => solve_pcmca(&inst, &limits).0.map(|s| s.cost),
        };
        let secs = t.elapsed().as_secs_f64();
        if got != Some(expected) {
            return Outcome::Fail(format!("{name} {problem}: got {got:?}, expected {expected}"));
        }
        if secs >= 60.0 {
            return Outcome::Fail(format!("{name} {problem}: {secs:.1} s"));
        }
        notes.push(format!("{name} {problem} {expected} in {secs:.2} s"));
    }
    if missing.is_empty() {
        Outcome::Pass(notes.join("; "))
    } else {
        Outcome::Missing(missing)
    }
}

fn c3_relaxations() -> Outcome {
    let cases = [
        ("ESC07", Formulation::Da, 1890.75, 1906.0, 0.800),
        ("ESC12", Formulation::Da, 1138.00, 1138.0, 0.000),
        ("ESC07", Formulation::Aac, 1782.07, 1906.0, 6.502),
    ];
    let mut missing = Vec::new();
    let mut notes = Vec::new();
    for (name, f, lr, z, gap) in cases {
        let Some(inst) = load(name) else {
            if !missing.contains(&name.to_string()) {
                missing.push(name.to_string());
            }
            continue;
        };
        let r = relax(&inst, Problem::PcmcaWt, f, &LrOptions::default());
        if r.status != LpStatus::Optimal || r.truncated || (r.value - lr).abs() > 1e-2 {
            return Outcome::Fail(format!("{name} {f}: LR {:.4} ({:?}), expected {lr}", r.value, r.status));
        }
        let g = relative_gap(z, r.value).unwrap();
        if (g - gap).abs() > 0.01 {
            return Outcome::Fail(format!("{name} {f}: gap {g:.3}, expected {gap}"));
        }
        notes.push(format!("{name} {f} {:.2} gap {g:.3}", r.value));
    }
    if missing.is_empty() {
        Outcome::Pass(notes.join("; "))
    } else {
        Outcome::Missing(missing)
    }
}

fn c4_separation() -> Outcome {
    let (r, t, one, two, three, s) = (0, 1, 2, 3, 4, 5);
    let entries = [
        (r, t, 1.0),
        (r, two, 0.5),
        (r, three, 1.0),
        (t, one, 0.5),
        (t, two, 0.5),
        (two, one, 0.5),
        (one, s, 0.5),
        (three, s, 0.5),
    ];
    let arcs: Vec<(usize, usize, i64)> = entries.iter().map(|&(i, j, _)| (i, j, 1)).collect();
    let inst = Instance::new(6, r, &arcs, &[(s, t)]).unwrap();
    let x = Fractional::from_arc_values(&inst, &entries).unwrap();
    assert!(find_violated_inequality(&inst, &x).is_none());
    assert!(separate_all(&inst, &x).is_empty());
    let cut = min_cut(&build_dj(&inst, s, &x), r, s).value;
    assert!((cut - 1.0).abs() <= 1e-6, "min cut {cut}");

    let (r, t, one, two, s) = (0, 1, 2, 3, 4);
    let entries = [
        (r, t, 1.0),
        (r, two, 0.5),
        (t, one, 0.5),
        (t, two, 0.5),
        (two, one, 0.5),
        (two, s, 0.5),
        (one, s, 0.5),
    ];
    let arcs: Vec<(usize, usize, i64)> = entries.iter().map(|&(i, j, _)| (i, j, 1)).collect();
    let inst = Instance::new(5, r, &arcs, &[(s, t)]).unwrap();
    let x = Fractional::from_arc_values(&inst, &entries).unwrap();
    let cut = find_violated_inequality(&inst, &x).expect("a violated inequality");
    assert_eq!(cut.target, s);
    assert_eq!(cut.crossing_pairs(&inst), vec![(r, two)]);
    assert!((cut.lhs - 0.5).abs() <= 1e-9, "{}", cut.lhs);
    Outcome::Pass(format!("first fixture clean, second cut {{(r,2)}} = {}", cut.lhs))
}

fn c5_oracles() -> Outcome {
    let limits = SolverLimits::default();
    for seed in 0..200u64 {
        let inst = random_instance(
            &RandomSpec {
                n: 2 + (seed % 6) as usize,
                arc_probability: 0.6,
                max_cost: 9,
                max_precedences: 6,
                complete_root: seed % 2 == 0,
            },
            10_000 + seed,
        );
        let (a, sa) = solve_pcmca(&inst, &limits);
        let b = brute_force_pcmca(&inst, &limits).unwrap();
        assert_eq!(a.map(|t| t.cost), b.map(|t| t.cost), "pcmca seed {seed}");
        assert!(matches!(sa.status, SolveStatus::Optimal | SolveStatus::Infeasible));
        let (a, sa) = solve_pcmcawt(&inst, &limits);
        let b = brute_force_pcmcawt(&inst, &limits).unwrap();
        assert_eq!(a.map(|t| t.objective), b.map(|t| t.objective), "pcmca-wt seed {seed}");
        assert!(matches!(sa.status, SolveStatus::Optimal | SolveStatus::Infeasible));
    }
    Outcome::Pass("200/200 instances agree for both problems".into())
}

fn c6_reductions() -> Outcome {
    let limits = SolverLimits::default().without_lp();
    let lits = [-3, -2, -1, 1, 2, 3];
    let mut clauses = Vec::new();
    for a in 0..6 {
        for b in a..6 {
            for c in b..6 {
                clauses.push([lits[a], lits[b], lits[c]]);
            }
        }
    }
    let k = clauses.len();
    let mut formulas = 0;
    let mut check = |cl: Vec<[i32; 3]>| {
        let f = CnfFormula::new(3, cl).unwrap();
        let sat = f.brute_force_satisfiable();
        assert_eq!(solve_pcmca(&from_3sat(&f), &limits).0.is_some(), sat, "{f:?}");
        assert_eq!(solve_pcmca(&from_3sat_symmetric(&f), &limits).0.is_some(), sat, "{f:?}");
        formulas += 1;
    };
    for a in 0..k {
        check(vec![clauses[a]]);
        for b in a..k {
            check(vec![clauses[a], clauses[b]]);
            for c in b..k {
                check(vec![clauses[a], clauses[b], clauses[c]]);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..30 {
        let size = rng.gen_range(2..=4);
        let mut pts = vec![(0, 0)];
        while pts.len() < size {
            let p = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let set = RsaPointSet::new(pts).unwrap();
        let expected = rsa_brute_force(&set, 20).unwrap();
        let got = solve_pcmcawt(&from_rsa(&set), &SolverLimits::default()).0.unwrap().objective;
        assert_eq!(got, expected, "{set:?}");
    }
    Outcome::Pass(format!("{formulas} formulas, 30 point sets"))
}

fn c7_properties() -> Outcome {
    let limits = SolverLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..300 {
        let n = rng.gen_range(2..9);
        let mut g = DiGraph::<f64>::new(n);
        for _ in 0..rng.gen_range(0..30) {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if i != j {
                g.add_arc(i, j, f64::from(rng.gen_range(0..9)) / 4.0).unwrap();
            }
        }
        let (f, c) = (max_flow(&g, 0, n - 1), min_cut(&g, 0, n - 1));
        assert!((f.value - c.value).abs() < 1e-9);
    }

    let spec = |n, prec| RandomSpec {
        n,
        arc_probability: 0.6,
        max_cost: 9,
        max_precedences: prec,
        complete_root: true,
    };
    let mut timed = 0;
    for seed in 0..200u64 {
        let inst = random_instance(&spec(2 + (seed % 7) as usize, 6), seed);
        let Ok(t) = minimum_arborescence(&inst) else { continue };
        if let Ok(ts) = entry_times(&inst, &t) {
            let telescoped: i64 = inst.non_root().map(|j| ts.entry[j] - ts.entry[t.parent[j].unwrap()]).sum();
            assert_eq!(telescoped, ts.objective);
            assert_eq!(objective_pcmcawt(&inst, &ts), t.cost + ts.wait.iter().sum::<i64>());
            timed += 1;
        }
        if let Some(ts) = solve_pcmcawt(&inst, &limits).0 {
            let telescoped: i64 = inst
                .non_root()
                .map(|j| ts.entry[j] - ts.entry[ts.arborescence.parent[j].unwrap()])
                .sum();
            assert_eq!(telescoped, ts.objective);
            timed += 1;
        }
    }

    for seed in 0..50u64 {
        let inst = random_instance(&spec(3 + (seed % 6) as usize, 0), 500 + seed);
        let t = minimum_arborescence(&inst).unwrap();
        let lr = solve_lr_with_cuts::<f64>(&inst, Formulation::SetBased);
        assert!((lr.value - t.cost as f64).abs() < 1e-6, "seed {seed}: {} vs {}", lr.value, t.cost);
    }

    for seed in 0..20u64 {
        let inst = random_instance(&spec(3 + (seed % 4) as usize, 4), 900 + seed);
        let expected = brute_force_pcmcawt(&inst, &limits).unwrap().map(|t| t.objective as f64);
        let m: Model = build(&inst, Formulation::Aac, &BuildOptions::default());
        assert!(m.meta.valid_inequalities);
        let got = solve_milp(&m, Some(&inst), &MilpOptions::default()).objective;
        match (got, expected) {
            (Some(a), Some(b)) => assert!((a - b).abs() < 1e-6, "seed {seed}: {a} vs {b}"),
            (a, b) => assert_eq!(a, b, "seed {seed}"),
        }
    }
    Outcome::Pass(format!("300 flow checks, {timed} timed solutions, 50 LR, 20 AAC"))
}

fn c8_determinism() -> Outcome {
    let limits = SolverLimits::default();
    let insts: Vec<Instance> = (0..30u64)
        .map(|seed| {
            random_instance(
                &RandomSpec {
                    n: 5 + (seed % 5) as usize,
                    arc_probability: 0.7,
                    max_cost: 9,
                    max_precedences: 8,
                    complete_root: true,
                },
                seed,
            )
        })
        .collect();
    let tree = |t: Option<Arborescence>| t.map(|t| (t.parent, t.cost));
    for inst in &insts {
        let (a, sa) = solve_pcmca(inst, &limits);
        let (b, sb) = solve_pcmca(inst, &limits);
        assert_eq!(tree(a), tree(b));
        assert_eq!((sa.nodes, sa.cuts, sa.bound, sa.incumbent), (sb.nodes, sb.cuts, sb.bound, sb.incumbent));
        let (a, sa) = solve_pcmcawt(inst, &limits);
        let (b, sb) = solve_pcmcawt(inst, &limits);
        assert_eq!(a.map(|t| (t.entry, t.objective)), b.map(|t| (t.entry, t.objective)));
        assert_eq!((sa.nodes, sa.cuts, sa.bound, sa.incumbent), (sb.nodes, sb.cuts, sb.bound, sb.incumbent));
        if let Some(t) = solve_pcmca(inst, &limits).0 {
            assert!(check_precedences(inst, &t).is_empty());
        }
    }
    let named: Vec<(String, Instance)> = insts.iter().take(8).map(|i| (i.name().to_string(), i.clone())).collect();
    let mut cfg = BenchConfig::new(Problem::PcmcaWt);
    cfg.relax = vec![Formulation::Da, Formulation::Aac];
    let csv = || {
        let mut rows = run_benchmark_instances(&named, &cfg);
        for r in &mut rows {
            r.time_seconds = 0.0;
        }
        to_csv_string(&rows)
    };
    let first = csv();
    assert_eq!(first, csv());
    Outcome::Pass(format!("30 instances solved twice, {} CSV bytes identical", first.len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("C1 worked examples", c1_worked_examples),
        ("C2 benchmark optima", c2_benchmark_optima),
        ("C3 relaxation values and gaps", c3_relaxations),
        ("C4 separation fixtures", c4_separation),
        ("C5 oracle equivalence", c5_oracles),
        ("C6 reduction soundness", c6_reductions),
        ("C7 property suites", c7_properties),
        ("C8 determinism", c8_determinism),
    ];
    let strict = std::env::var("ARBX_STRICT_ACCEPTANCE").is_ok_and(|v| v == "1");
    let mut failures = Vec::new();
    for (name, run) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Outcome::Fail(format!("panicked: {msg}"))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(note) => report(&format!("[PASS] {name} ({secs:.2} s): {note}")),
            Outcome::Fail(note) => {
                report(&format!("[FAIL] {name} ({secs:.2} s): {note}"));
                failures.push(name);
            }
            Outcome::Missing(files) => {
                report(&format!(
                    "[FAIL] {name}: benchmark files not found in {}: {}",
                    data_dir().display(),
                    files.join(", ")
                ));
                if strict {
                    failures.push(name);
                }
            }
        }
    }
    assert!(failures.is_empty(), "failed: {failures:?}");
}
