use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use arbx_core::bench::{self, BenchConfig, Problem};
use arbx_core::evaluation::{check_precedences, entry_times, minimum_arborescence, validate_arborescence, Arborescence};
use arbx_core::instance::{random_instance, write_native, RandomSpec};
use arbx_core::models::{build, export_lp, BuildOptions, Formulation, LrOptions};
use arbx_core::reductions::{from_3sat, from_3sat_symmetric, from_rsa, parse_dimacs, parse_points};
use arbx_core::solver::{brute_force_pcmca, brute_force_pcmcawt, solve_pcmca, solve_pcmcawt, SolveStatus, SolverLimits};
use arbx_core::Instance;
use clap::{Args, Parser, Subcommand};

const EXIT_OK: u8 = 0;
const EXIT_INFEASIBLE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_LIMIT: u8 = 3;

#[derive(Parser)]
#[command(name = "arbx", version, about = "Exact solver for precedence-constrained minimum-cost arborescences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance to optimality
    Solve(SolveArgs),
    /// Linear relaxation of a formulation, tightened with cuts
    Relax(RelaxArgs),
    /// Write a formulation in LP format
    Export(ExportArgs),
    /// Generate an instance
    Generate(GenerateArgs),
    /// Check an instance and optionally a solution for it
    Validate(ValidateArgs),
    /// Solve a list of instances and report a CSV table
    Bench(BenchArgs),
    /// Compare the solver with exhaustive enumeration
    Oracle(OracleArgs),
}

#[derive(Args, Clone)]
struct Limits {
    /// Wall-clock limit in seconds
    #[arg(long, value_name = "SECONDS")]
    time_limit: Option<f64>,
    #[arg(long, value_name = "N")]
    node_limit: Option<usize>,
}

impl Limits {
    fn to_limits(&self) -> Result<SolverLimits> {
        let mut l = SolverLimits::default();
        if let Some(t) = self.time_limit {
            if !(t.is_finite() && t > 0.0) {
                bail!("--time-limit must be positive");
            }
            l.time_limit = Duration::from_secs_f64(t);
        }
        if let Some(n) = self.node_limit {
            l.node_limit = n;
        }
        l.validate()?;
        Ok(l)
    }
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, default_value = "pcmca")]
    problem: Problem,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RelaxArgs {
    instance: PathBuf,
    #[arg(long, default_value = "pcmca")]
    problem: Problem,
    /// Formulation; defaults to set-based for pcmca and da for pcmca-wt
    #[arg(long)]
    model: Option<Formulation>,
    #[arg(long)]
    no_valid_ineqs: bool,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, default_value = "da")]
    model: Formulation,
    #[arg(long)]
    no_valid_ineqs: bool,
    /// Output file; standard output when absent
    #[arg(long, value_name = "PATH")]
    lp_out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(subcommand)]
    kind: GenerateKind,
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Instance whose feasibility decides a 3-CNF formula
    #[command(name = "3sat")]
    Sat {
        #[arg(long, value_name = "PATH")]
        cnf: PathBuf,
        /// Forbid opposite literals in both layer orders
        #[arg(long)]
        symmetric: bool,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Waiting-times instance from a Steiner arborescence point set
    Rsa {
        #[arg(long, value_name = "PATH")]
        points: PathBuf,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
    /// Random instance
    Random {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 0.6)]
        arc_probability: f64,
        #[arg(long, default_value_t = 9)]
        max_cost: i64,
        #[arg(long, default_value_t = 4)]
        max_precedences: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long, value_name = "PATH")]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    /// Parent of every vertex, comma separated, `-` for the root
    #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
    parents: Option<String>,
    #[arg(long, default_value = "pcmca")]
    problem: Problem,
}

#[derive(Args)]
struct BenchArgs {
    instances: Vec<PathBuf>,
    #[arg(long, default_value = "pcmca")]
    problem: Problem,
    /// Add relaxation rows for this formulation; repeatable
    #[arg(long)]
    model: Vec<Formulation>,
    /// Skip the exact solve
    #[arg(long)]
    no_exact: bool,
    #[arg(long)]
    no_valid_ineqs: bool,
    #[command(flatten)]
    limits: Limits,
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    #[arg(long, default_value = "pcmca")]
    problem: Problem,
    /// Largest vertex count to enumerate
    #[arg(long, default_value_t = 10)]
    cap: usize,
}

fn load(path: &Path) -> Result<Instance> {
    Instance::from_path(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_rows(path: Option<&Path>, rows: &[bench::ReportRow]) -> Result<()> {
    if let Some(p) = path {
        fs::write(p, bench::to_csv_string(rows)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn status_code(s: &SolveStatus) -> u8 {
    match s {
        SolveStatus::Optimal => EXIT_OK,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::Feasible { .. } | SolveStatus::Limit { .. } => EXIT_LIMIT,
    }
}

fn format_parents(t: &Arborescence) -> String {
    t.parent
        .iter()
        .map(|p| p.map_or("-".to_string(), |p| p.to_string()))
        .collect::<Vec<_>>()
        .join(",")
}

fn join(v: &[i64]) -> String {
    v.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

fn summary(status: &SolveStatus, value: Option<i64>) -> String {
    match (status, value) {
        (SolveStatus::Optimal, Some(v)) => format!("optimal {v}"),
        (s, _) => s.to_string(),
    }
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let inst = load(&a.instance)?;
    let limits = a.limits.to_limits()?;
    let code = match a.problem {
        Problem::Mca => match minimum_arborescence(&inst) {
            Ok(t) => {
                println!("optimal {}", t.cost);
                println!("parents {}", format_parents(&t));
                EXIT_OK
            }
            Err(_) => {
                println!("infeasible");
                EXIT_INFEASIBLE
            }
        },
        Problem::Pcmca => {
            let (t, stats) = solve_pcmca(&inst, &limits);
            println!("{}", summary(&stats.status, stats.incumbent));
            if let Some(t) = &t {
                println!("parents {}", format_parents(t));
            }
            println!("nodes {} cuts {} time {:.3}", stats.nodes, stats.cuts, stats.time.as_secs_f64());
            status_code(&stats.status)
        }
        Problem::PcmcaWt => {
            let (ts, stats) = solve_pcmcawt(&inst, &limits);
            println!("{}", summary(&stats.status, stats.incumbent));
            if let Some(ts) = &ts {
                println!("parents {}", format_parents(&ts.arborescence));
                println!("entry {}", join(&ts.entry));
                println!("wait {}", join(&ts.wait));
            }
            println!("nodes {} cuts {} time {:.3}", stats.nodes, stats.cuts, stats.time.as_secs_f64());
            status_code(&stats.status)
        }
    };
    if a.csv.is_some() {
        let cfg = BenchConfig {
            limits,
            ..BenchConfig::new(a.problem)
        };
        let rows = bench::bench_instance(inst.name(), &inst, &cfg);
        write_rows(a.csv.as_deref(), &rows)?;
    }
    Ok(code)
}

fn cmd_relax(a: &RelaxArgs) -> Result<u8> {
    let inst = load(&a.instance)?;
    let f = a.model.unwrap_or(a.problem.default_formulation());
    let mut cfg = BenchConfig::new(a.problem);
    cfg.relax = vec![f];
    cfg.limits = a.limits.to_limits()?;
    cfg.lr = LrOptions {
        build: BuildOptions {
            valid_inequalities: !a.no_valid_ineqs,
            ..BuildOptions::default()
        },
        ..LrOptions::default()
    };
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return Ok(EXIT_USAGE);
    }
    let rows = bench::bench_instance(inst.name(), &inst, &cfg);
    write_rows(a.csv.as_deref(), &rows)?;
    let lr = &rows[1];
    let code = match lr.status.as_str() {
        "optimal" => EXIT_OK,
        "infeasible" => EXIT_INFEASIBLE,
        _ => EXIT_LIMIT,
    };
    match (lr.lb, lr.gap_percent) {
        (Some(v), Some(g)) => println!("LR {v:.2} gap {g:.3}"),
        (Some(v), None) => println!("LR {v:.2} gap -"),
        _ => println!("LR {}", lr.status),
    }
    println!("cuts {} z* {}", lr.cuts, lr.z_star.map_or("-".into(), |z| z.to_string()));
    Ok(code)
}

fn cmd_export(a: &ExportArgs) -> Result<u8> {
    let inst = load(&a.instance)?;
    let opts = BuildOptions {
        valid_inequalities: !a.no_valid_ineqs,
        ..BuildOptions::default()
    };
    let model = build::<f64>(&inst, a.model, &opts);
    write_out(a.lp_out.as_deref(), &export_lp(&model))?;
    if let Some(p) = &a.lp_out {
        println!(
            "wrote {} ({} variables, {} constraints)",
            p.display(),
            model.num_vars(),
            model.num_constraints()
        );
    }
    Ok(EXIT_OK)
}

fn cmd_generate(a: &GenerateArgs) -> Result<u8> {
    let (inst, out) = match &a.kind {
        GenerateKind::Sat { cnf, symmetric, output } => {
            let text = fs::read_to_string(cnf).with_context(|| format!("reading {}", cnf.display()))?;
            let f = parse_dimacs(&text).with_context(|| format!("parsing {}", cnf.display()))?;
            let inst = if *symmetric { from_3sat_symmetric(&f) } else { from_3sat(&f) };
            (inst, output)
        }
        GenerateKind::Rsa { points, output } => {
            let text = fs::read_to_string(points).with_context(|| format!("reading {}", points.display()))?;
            let pts = parse_points(&text).with_context(|| format!("parsing {}", points.display()))?;
            (from_rsa(&pts), output)
        }
        GenerateKind::Random {
            n,
            arc_probability,
            max_cost,
            max_precedences,
            seed,
            output,
        } => {
            if *n < 1 || !(0.0..=1.0).contains(arc_probability) || *max_cost < 0 {
                bail!("need n >= 1, arc probability in [0, 1] and a non-negative cost bound");
            }
            let spec = RandomSpec {
                n: *n,
                arc_probability: *arc_probability,
                max_cost: *max_cost,
                max_precedences: *max_precedences,
                complete_root: false,
            };
            (random_instance(&spec, *seed), output)
        }
    };
    write_out(out.as_deref(), &write_native(&inst))?;
    if let Some(p) = out {
        println!("wrote {} ({} vertices, {} arcs)", p.display(), inst.n(), inst.arcs().len());
    }
    Ok(EXIT_OK)
}

fn parse_parents(list: &str, n: usize) -> Result<Vec<Option<usize>>> {
    let parent: Vec<Option<usize>> = list
        .split(',')
        .map(|t| match t.trim() {
            "-" | "" => Ok(None),
            v => v.parse().map(Some).with_context(|| format!("bad parent `{v}`")),
        })
        .collect::<Result<_>>()?;
    if parent.len() != n {
        bail!("expected {n} parents, got {}", parent.len());
    }
    Ok(parent)
}

fn cmd_validate(a: &ValidateArgs) -> Result<u8> {
    let inst = load(&a.instance)?;
    let density = arbx_core::instance::precedence_density(&inst).unwrap_or(0.0);
    println!(
        "instance {} n {} arcs {} precedences {} density {density:.3}",
        inst.name(),
        inst.n(),
        inst.arcs().len(),
        inst.precedences().len()
    );
    let Some(list) = &a.parents else {
        return Ok(EXIT_OK);
    };
    let parent = parse_parents(list, inst.n())?;
    if let Err(v) = validate_arborescence(&inst, &parent) {
        println!("not an arborescence: {v:?}");
        return Ok(EXIT_INFEASIBLE);
    }
    let t = Arborescence::from_parents(&inst, parent).expect("validated");
    if a.problem != Problem::Mca {
        let violated = check_precedences(&inst, &t);
        if !violated.is_empty() {
            println!("violated precedences {violated:?}");
            return Ok(EXIT_INFEASIBLE);
        }
    }
    match a.problem {
        Problem::PcmcaWt => match entry_times(&inst, &t) {
            Ok(ts) => {
                println!("feasible {}", ts.objective);
                println!("entry {}", join(&ts.entry));
                println!("wait {}", join(&ts.wait));
            }
            Err(e) => {
                println!("no feasible entry times: {e}");
                return Ok(EXIT_INFEASIBLE);
            }
        },
        _ => println!("feasible {}", t.cost),
    }
    Ok(EXIT_OK)
}

fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let mut cfg = BenchConfig::new(a.problem);
    cfg.exact = !a.no_exact;
    cfg.relax = a.model.clone();
    cfg.limits = a.limits.to_limits()?;
    cfg.lr.build.valid_inequalities = !a.no_valid_ineqs;
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return Ok(EXIT_USAGE);
    }
    let rows = bench::run_benchmark(&a.instances, &cfg);
    write_rows(a.csv.as_deref(), &rows)?;
    let text = bench::to_csv_string(&rows);
    if a.csv.is_none() {
        print!("{text}");
    } else {
        for r in &rows {
            let val = r.z_star.or(r.lb).map_or("-".into(), |v| format!("{v}"));
            println!("{:<16} {:<10} {:<12} {val}", r.name, r.formulation, r.status);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8> {
    let inst = load(&a.instance)?;
    let limits = SolverLimits {
        brute_force_cap: a.cap,
        ..SolverLimits::default()
    };
    let (expected, got) = match a.problem {
        Problem::Mca => {
            let plain = inst.with_precedences(&[])?;
            let b = brute_force_pcmca(&plain, &limits)?.map(|t| t.cost);
            (b, minimum_arborescence(&inst).ok().map(|t| t.cost))
        }
        Problem::Pcmca => (
            brute_force_pcmca(&inst, &limits)?.map(|t| t.cost),
            solve_pcmca(&inst, &limits).0.map(|t| t.cost),
        ),
        Problem::PcmcaWt => (
            brute_force_pcmcawt(&inst, &limits)?.map(|t| t.objective),
            solve_pcmcawt(&inst, &limits).0.map(|t| t.objective),
        ),
    };
    let show = |v: Option<i64>| v.map_or("infeasible".to_string(), |v| v.to_string());
    if expected == got {
        println!("agree {}", show(got));
        Ok(if got.is_some() { EXIT_OK } else { EXIT_INFEASIBLE })
    } else {
        println!("disagree: enumeration {} solver {}", show(expected), show(got));
        Ok(EXIT_LIMIT)
    }
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Relax(a) => cmd_relax(a),
        Command::Export(a) => cmd_export(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ARBX_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
