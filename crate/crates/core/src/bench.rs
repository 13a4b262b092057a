//! Benchmark harness producing table-style CSV reports.

use std::fmt;
use std::io;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::evaluation::{minimum_arborescence, relative_gap};
use crate::instance::{precedence_density, Instance};
use crate::models::{solve_lr_with_cuts_opts, Formulation, LpStatus, LrOptions};
use crate::solver::{solve_pcmca, solve_pcmcawt, SolveStats, SolveStatus, SolverLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Problem {
    #[serde(rename = "mca")]
    Mca,
    #[serde(rename = "pcmca")]
    Pcmca,
    #[serde(rename = "pcmca-wt")]
    PcmcaWt,
}

impl Problem {
    pub fn tag(self) -> &'static str {
        match self {
            Problem::Mca => "mca",
            Problem::Pcmca => "pcmca",
            Problem::PcmcaWt => "pcmca-wt",
        }
    }

    /// Formulation used for relaxations when none is requested.
    pub fn default_formulation(self) -> Formulation {
        match self {
            Problem::Mca | Problem::Pcmca => Formulation::SetBased,
            Problem::PcmcaWt => Formulation::Da,
        }
    }

    pub fn accepts(self, f: Formulation) -> bool {
        match self {
            Problem::Mca | Problem::Pcmca => !f.is_timed(),
            Problem::PcmcaWt => f.is_timed(),
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Problem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mca" => Ok(Problem::Mca),
            "pcmca" => Ok(Problem::Pcmca),
            "pcmca-wt" | "pcmcawt" | "wt" => Ok(Problem::PcmcaWt),
            other => Err(format!("unknown problem `{other}`")),
        }
    }
}

/// Result of an exact solve of any of the three problems.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactOutcome {
    pub status: SolveStatus,
    pub value: Option<i64>,
    pub bound: Option<i64>,
    pub nodes: usize,
    pub cuts: usize,
}

pub fn solve_exact(inst: &Instance, problem: Problem, limits: &SolverLimits) -> ExactOutcome {
    let from_stats = |s: SolveStats| ExactOutcome {
        status: s.status,
        value: s.incumbent,
        bound: (s.status != SolveStatus::Infeasible).then_some(s.bound),
        nodes: s.nodes,
        cuts: s.cuts,
    };
    match problem {
        Problem::Mca => match minimum_arborescence(inst) {
            Ok(t) => ExactOutcome {
                status: SolveStatus::Optimal,
                value: Some(t.cost),
                bound: Some(t.cost),
                nodes: 0,
                cuts: 0,
            },
            Err(_) => ExactOutcome {
                status: SolveStatus::Infeasible,
                value: None,
                bound: None,
                nodes: 0,
                cuts: 0,
            },
        },
        Problem::Pcmca => from_stats(solve_pcmca(inst, limits).1),
        Problem::PcmcaWt => from_stats(solve_pcmcawt(inst, limits).1),
    }
}

/// Outcome of a cutting-plane relaxation, with the gap to a reference optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxOutcome {
    pub status: LpStatus,
    pub truncated: bool,
    pub value: f64,
    pub cuts: usize,
}

/// Linear relaxation of `f` with cuts. For [`Problem::Mca`] the precedences
/// are dropped first.
pub fn relax(inst: &Instance, problem: Problem, f: Formulation, opts: &LrOptions) -> RelaxOutcome {
    let plain;
    let inst = if problem == Problem::Mca {
        plain = inst.with_precedences(&[]).expect("dropping precedences keeps the instance valid");
        &plain
    } else {
        inst
    };
    let lr = solve_lr_with_cuts_opts::<f64>(inst, f, opts);
    RelaxOutcome {
        status: lr.status,
        truncated: lr.truncated,
        value: lr.value,
        cuts: lr.cuts,
    }
}

fn lp_status_tag(s: LpStatus, truncated: bool) -> &'static str {
    match s {
        LpStatus::Optimal if truncated => "truncated",
        LpStatus::Optimal => "optimal",
        LpStatus::Infeasible => "infeasible",
        LpStatus::Unbounded => "unbounded",
        LpStatus::IterationLimit => "limit",
    }
}

fn ser_num<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_str(""),
    }
}

fn de_opt<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
    let s = String::deserialize(d)?;
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(serde::de::Error::custom)
}

/// One line of a report. Integral values print without a fractional part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "Name")]
    pub name: String,
    #[serde(rename = "Size", serialize_with = "ser_num")]
    pub size: f64,
    #[serde(rename = "DensityOfP", serialize_with = "ser_num")]
    pub density: f64,
    #[serde(rename = "zStar", serialize_with = "ser_opt", deserialize_with = "de_opt")]
    pub z_star: Option<f64>,
    #[serde(rename = "LB", serialize_with = "ser_opt", deserialize_with = "de_opt")]
    pub lb: Option<f64>,
    #[serde(rename = "UB", serialize_with = "ser_opt", deserialize_with = "de_opt")]
    pub ub: Option<f64>,
    #[serde(rename = "Cuts", serialize_with = "ser_num")]
    pub cuts: f64,
    #[serde(rename = "Nodes", serialize_with = "ser_num")]
    pub nodes: f64,
    #[serde(rename = "TimeSeconds", serialize_with = "ser_num")]
    pub time_seconds: f64,
    #[serde(rename = "GapPercent", serialize_with = "ser_opt", deserialize_with = "de_opt")]
    pub gap_percent: Option<f64>,
    #[serde(rename = "Status")]
    pub status: String,
    #[serde(rename = "Formulation")]
    pub formulation: String,
    #[serde(rename = "Problem")]
    pub problem: Problem,
    #[serde(rename = "SolvedTotal")]
    pub solved_total: String,
}

pub const AVERAGE_NAME: &str = "Average";

/// Formulation column of exact solver rows.
pub const EXACT_TAG: &str = "bnb";

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub problem: Problem,
    /// Emit an exact row per instance.
    pub exact: bool,
    /// Emit one relaxation row per formulation.
    pub relax: Vec<Formulation>,
    pub limits: SolverLimits,
    pub lr: LrOptions,
}

impl BenchConfig {
    pub fn new(problem: Problem) -> Self {
        BenchConfig {
            problem,
            exact: true,
            relax: Vec::new(),
            limits: SolverLimits::default(),
            lr: LrOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        self.limits.validate().map_err(|e| e.to_string())?;
        match self.relax.iter().find(|&&f| !self.problem.accepts(f)) {
            Some(f) => Err(format!("formulation {f} does not model problem {}", self.problem)),
            None => Ok(()),
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn base_row(name: &str, inst: &Instance, problem: Problem) -> ReportRow {
    ReportRow {
        name: name.to_string(),
        size: inst.n() as f64,
        density: round3(precedence_density(inst).unwrap_or(0.0)),
        z_star: None,
        lb: None,
        ub: None,
        cuts: 0.0,
        nodes: 0.0,
        time_seconds: 0.0,
        gap_percent: None,
        status: String::new(),
        formulation: String::new(),
        problem,
        solved_total: String::new(),
    }
}

/// Rows for one instance: the exact row first, then relaxations in the
/// configured order.
pub fn bench_instance(name: &str, inst: &Instance, cfg: &BenchConfig) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    let mut z_star = None;
    if cfg.exact {
        let start = Instant::now();
        let out = solve_exact(inst, cfg.problem, &cfg.limits);
        let mut row = base_row(name, inst, cfg.problem);
        row.time_seconds = start.elapsed().as_secs_f64();
        row.formulation = EXACT_TAG.into();
        row.status = out.status.tag().into();
        row.cuts = out.cuts as f64;
        row.nodes = out.nodes as f64;
        row.lb = out.bound.map(|b| b as f64);
        row.ub = out.value.map(|v| v as f64);
        if out.status == SolveStatus::Optimal {
            z_star = out.value;
            row.z_star = out.value.map(|v| v as f64);
        }
        if let (Some(lb), Some(ub)) = (row.lb, row.ub) {
            row.gap_percent = relative_gap(ub, lb).ok().or((ub == lb).then_some(0.0));
        }
        rows.push(row);
    }
    for &f in &cfg.relax {
        let start = Instant::now();
        let out = relax(inst, cfg.problem, f, &cfg.lr);
        let mut row = base_row(name, inst, cfg.problem);
        row.time_seconds = start.elapsed().as_secs_f64();
        row.formulation = f.tag().into();
        row.status = lp_status_tag(out.status, out.truncated).into();
        row.cuts = out.cuts as f64;
        row.z_star = z_star.map(|v| v as f64);
        if out.status == LpStatus::Optimal {
            row.lb = Some(out.value);
            row.gap_percent = z_star.and_then(|z| gap_or_zero(z as f64, out.value));
        }
        rows.push(row);
    }
    rows
}

fn gap_or_zero(reference: f64, bound: f64) -> Option<f64> {
    relative_gap(reference, bound).ok().or((reference == bound).then_some(0.0))
}

/// Benchmarks loaded instances in order and appends one average row per
/// formulation.
pub fn run_benchmark_instances(instances: &[(String, Instance)], cfg: &BenchConfig) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (name, inst) in instances {
        log::info!("benchmarking {name}");
        rows.extend(bench_instance(name, inst, cfg));
    }
    let averages = averages(&rows);
    rows.extend(averages);
    rows
}

/// Reads and benchmarks every file of the manifest. A file that cannot be
/// read gets a single row whose status holds the error.
pub fn run_benchmark(manifest: &[PathBuf], cfg: &BenchConfig) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for path in manifest {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        match Instance::from_path(path) {
            Ok(inst) => {
                let name = if inst.name().is_empty() { stem } else { inst.name().to_string() };
                log::info!("benchmarking {name}");
                rows.extend(bench_instance(&name, &inst, cfg));
            }
            Err(e) => {
                log::error!("{}: {e}", path.display());
                let mut row = base_row(&stem, &Instance::new(1, 0, &[], &[]).unwrap(), cfg.problem);
                row.size = 0.0;
                row.status = format!("error: {e}");
                row.formulation = match (cfg.exact, cfg.relax.first()) {
                    (true, _) => EXACT_TAG.into(),
                    (false, Some(f)) => f.tag().into(),
                    (false, None) => String::new(),
                };
                rows.push(row);
            }
        }
    }
    let averages = averages(&rows);
    rows.extend(averages);
    rows
}

/// Arithmetic means over rows with status `optimal`, one row per
/// formulation in order of first appearance.
pub fn averages(rows: &[ReportRow]) -> Vec<ReportRow> {
    let mut order: Vec<(&str, Problem)> = Vec::new();
    for r in rows.iter().filter(|r| r.name != AVERAGE_NAME && !r.formulation.is_empty()) {
        if !order.contains(&(r.formulation.as_str(), r.problem)) {
            order.push((r.formulation.as_str(), r.problem));
        }
    }
    let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
    order
        .into_iter()
        .map(|(f, p)| {
            let group: Vec<&ReportRow> = rows.iter().filter(|r| r.formulation == f && r.problem == p).collect();
            let solved: Vec<&ReportRow> = group.iter().copied().filter(|r| r.status == "optimal").collect();
            let col = |get: &dyn Fn(&ReportRow) -> Option<f64>| {
                mean(&solved.iter().filter_map(|r| get(r)).collect::<Vec<_>>())
            };
            ReportRow {
                name: AVERAGE_NAME.into(),
                size: col(&|r| Some(r.size)).unwrap_or(0.0),
                density: round3(col(&|r| Some(r.density)).unwrap_or(0.0)),
                z_star: col(&|r| r.z_star),
                lb: col(&|r| r.lb),
                ub: col(&|r| r.ub),
                cuts: col(&|r| Some(r.cuts)).unwrap_or(0.0),
                nodes: col(&|r| Some(r.nodes)).unwrap_or(0.0),
                time_seconds: col(&|r| Some(r.time_seconds)).unwrap_or(0.0),
                gap_percent: col(&|r| r.gap_percent),
                status: String::new(),
                formulation: f.to_string(),
                problem: p,
                solved_total: format!("{}/{}", solved.len(), group.len()),
            }
        })
        .collect()
}

pub fn write_csv<W: io::Write>(rows: &[ReportRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(rows: &[ReportRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<ReportRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub const HEADER: [&str; 14] = [
    "Name",
    "Size",
    "DensityOfP",
    "zStar",
    "LB",
    "UB",
    "Cuts",
    "Nodes",
    "TimeSeconds",
    "GapPercent",
    "Status",
    "Formulation",
    "Problem",
    "SolvedTotal",
];

#[cfg(test)]
mod tests {
    use super::*;

    fn waiting_example() -> Instance {
        Instance::new(
            4,
            0,
            &[(0, 1, 1), (0, 2, 3), (0, 3, 1), (1, 2, 1), (1, 3, 4), (2, 1, 2), (2, 3, 3), (3, 1, 2)],
            &[(2, 3)],
        )
        .unwrap()
    }

    #[test]
    fn exact_and_relaxed_rows() {
        let mut cfg = BenchConfig::new(Problem::Pcmca);
        cfg.relax = vec![Formulation::SetBased];
        let rows = run_benchmark_instances(&[("a".into(), waiting_example())], &cfg);
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].z_star, Some(3.0));
        assert_eq!(rows[0].gap_percent, Some(0.0));
        assert_eq!(rows[1].formulation, "set-based");
        assert_eq!(rows[1].z_star, Some(3.0));
        assert_eq!(rows[2].name, AVERAGE_NAME);
        assert_eq!(rows[2].solved_total, "1/1");
        assert_eq!((rows[2].formulation.as_str(), rows[3].formulation.as_str()), (EXACT_TAG, "set-based"));
        let text = to_csv_string(&rows);
        assert!(text.starts_with(&HEADER.join(",")));
        assert_eq!(read_csv(text.as_bytes()).unwrap(), rows);
    }

    #[test]
    fn timed_rows() {
        let mut cfg = BenchConfig::new(Problem::PcmcaWt);
        cfg.relax = vec![Formulation::Da];
        let rows = run_benchmark_instances(&[("a".into(), waiting_example())], &cfg);
        assert_eq!(rows[0].z_star, Some(4.0));
        let lb = rows[1].lb.unwrap();
        assert!(lb <= 4.0 + 1e-9);
        assert!((rows[1].gap_percent.unwrap() - 100.0 * (4.0 - lb) / 4.0).abs() < 1e-9);
        let rows = run_benchmark_instances(&[("a".into(), waiting_example())], &BenchConfig::new(Problem::Mca));
        assert_eq!(rows[0].z_star, Some(3.0));
    }

    #[test]
    fn empty_manifest() {
        let rows = run_benchmark(&[], &BenchConfig::new(Problem::Pcmca));
        assert!(rows.is_empty());
        assert_eq!(to_csv_string(&rows).trim_end(), HEADER.join(","));
        assert!(read_csv(to_csv_string(&rows).as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn unreadable_file_is_reported() {
        let rows = run_benchmark(&[PathBuf::from("/nonexistent/x.sop")], &BenchConfig::new(Problem::Pcmca));
        assert_eq!(rows.len(), 2);
        assert!(rows[0].status.starts_with("error"));
        assert_eq!(rows[1].solved_total, "0/1");
    }

    #[test]
    fn mismatched_formulation_is_rejected() {
        let mut cfg = BenchConfig::new(Problem::PcmcaWt);
        cfg.relax = vec![Formulation::SetBased];
        assert!(cfg.validate().is_err());
        cfg.relax = vec![Formulation::Da, Formulation::Aac, Formulation::Mcf];
        assert!(cfg.validate().is_ok());
    }
}
