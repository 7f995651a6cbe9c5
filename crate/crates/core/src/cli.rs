//! Command-line front end: `solve`, `compare`, `bench` and `oracle`.

use crate::bnc::{branch_and_cut, BncOutcome, CortesBackend, CutFamilies, CutPolicy, Limits, SolveReport, SolveStatus};
use crate::instance::{
    build_instance_checked, parse_ap, random_instance_checked, ApPreset, CostKind, FlowMode, Instance, RangeCheck,
    ScalingConfig,
};
use crate::models::{build, Formulation, ModelError};
use crate::oracle::{exact_1p, exact_rs, exact_sahlp, HubSolution, OracleError};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "HUBLAB_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("{0}")]
    Budget(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Internal(_) => 1,
        }
    }
}

fn model_error(e: ModelError) -> CliError {
    match e {
        ModelError::RequiresSingleOriginAllocation(_)
        | ModelError::RequiresDisaggregatedCosts
        | ModelError::RequiresIdenticalSets => CliError::Usage(format!("{e:?}: {e}")),
        other => CliError::Internal(other.to_string()),
    }
}

fn oracle_error(e: OracleError) -> CliError {
    match e {
        OracleError::BudgetExceeded(_) => CliError::Budget(e.to_string()),
        OracleError::InfeasibleAllocation(_) => CliError::Internal(e.to_string()),
        _ => CliError::Usage(format!("{e:?}: {e}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "hublab", version, about = "Exact solver for asymmetric hub location problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance by branch-and-cut.
    Solve(SolveArgs),
    /// Solve the single allocation and the (1,p) problem on the same instance and compare the networks.
    Compare(CompareArgs),
    /// Run a list of hub budgets against a list of methods.
    Bench(BenchArgs),
    /// Certify an optimum by enumeration.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowArg {
    Raw,
    NormalizeTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostKindArg {
    General,
    Disaggregated,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// AP text file or JSON instance.
    #[arg(long, required_unless_present = "random", conflicts_with = "random")]
    pub instance: Option<PathBuf>,
    /// Synthetic instance `SEED,o,d,h`, or `o,d,h` with the seed taken from --seed.
    #[arg(long)]
    pub random: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "disaggregated")]
    pub cost_kind: CostKindArg,
    /// Scaling and discount preset for AP files.
    #[arg(long, default_value = "ap-classic")]
    pub preset: String,
    #[arg(long, value_enum)]
    pub flow_mode: Option<FlowArg>,
    #[arg(long)]
    pub distance_factor: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Accept any `1 <= p <= h` instead of `2 <= p <= h - 1`.
    #[arg(long)]
    pub relaxed: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "both", value_parser = parse_cuts)]
    pub cuts: CutFamilies,
    #[arg(long, value_enum, default_value = "internal")]
    pub cortes_backend: BackendArg,
    #[arg(long, default_value_t = 7200.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_gap: f64,
    /// Separation threads; the HUBLAB_THREADS environment variable takes precedence.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Internal,
    Lp,
}

fn parse_cuts(s: &str) -> Result<CutFamilies, String> {
    CutFamilies::parse(s).ok_or_else(|| format!("unknown cut families '{s}' (none, zy2, cortes, both)"))
}

fn parse_formulation(s: &str) -> Result<Formulation, String> {
    Formulation::parse(s).ok_or_else(|| format!("unknown formulation '{s}' (f4, f3, 1p-f, 1p-fd, sahlp)"))
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_parser = parse_formulation)]
    pub formulation: Formulation,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write the model in LP format to this path.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub p: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Comma-separated hub budgets.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ps: Vec<usize>,
    /// Comma-separated `formulation:cuts` pairs, e.g. `1p-fd:none,1p-fd:both`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub methods: Vec<String>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Rs,
    #[value(name = "1p")]
    OneP,
    Sahlp,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum)]
    pub mode: OracleMode,
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long)]
    pub r: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// A loaded instance and the label that identifies it in reports.
pub struct Loaded {
    pub instance: Instance,
    pub label: String,
    /// `p`, `r` and `s` were read from a JSON file rather than defaulted.
    pub explicit_params: bool,
}

fn split_random(spec: &str, seed: u64) -> Result<(u64, usize, usize, usize), CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || CliError::Usage(format!("--random expects SEED,o,d,h or o,d,h, got '{spec}'"));
    let nums = |xs: &[&str]| -> Result<Vec<usize>, CliError> { xs.iter().map(|t| t.parse().map_err(|_| bad())).collect() };
    match parts.len() {
        4 => {
            let s = parts[0].parse().map_err(|_| bad())?;
            let v = nums(&parts[1..])?;
            Ok((s, v[0], v[1], v[2]))
        }
        3 => {
            let v = nums(&parts)?;
            Ok((seed, v[0], v[1], v[2]))
        }
        _ => Err(bad()),
    }
}

pub fn load_instance(args: &InstanceArgs, p: usize, r: usize, s: usize) -> Result<Loaded, CliError> {
    let check = if args.relaxed { RangeCheck::Relaxed } else { RangeCheck::Strict };
    let usage = |e: crate::instance::InstanceError| CliError::Usage(e.to_string());
    if let Some(spec) = &args.random {
        let (seed, o, d, h) = split_random(spec, args.seed)?;
        let kind = match args.cost_kind {
            CostKindArg::General => CostKind::General,
            CostKindArg::Disaggregated => CostKind::Disaggregated,
        };
        let instance = random_instance_checked(seed, o, d, h, p, r, s, kind, check).map_err(usage)?;
        return Ok(Loaded {
            instance,
            label: format!("random:{seed},{o},{d},{h}"),
            explicit_params: false,
        });
    }
    let path = args.instance.as_ref().ok_or_else(|| CliError::Usage("--instance or --random is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let label = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    if text.trim_start().starts_with('{') {
        let instance = Instance::from_json(&text, check).map_err(usage)?;
        return Ok(Loaded {
            instance,
            label,
            explicit_params: true,
        });
    }
    let preset = ApPreset::by_name(&args.preset).ok_or_else(|| CliError::Usage(format!("unknown preset '{}'", args.preset)))?;
    let scaling = ScalingConfig {
        flow_mode: match args.flow_mode {
            Some(FlowArg::Raw) => FlowMode::Raw,
            Some(FlowArg::NormalizeTotal) => FlowMode::NormalizeTotal,
            None => preset.scaling.flow_mode,
        },
        distance_factor: args.distance_factor.unwrap_or(preset.scaling.distance_factor),
    };
    let raw = parse_ap(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let instance = build_instance_checked(
        &raw,
        args.alpha.unwrap_or(preset.alpha),
        args.beta.unwrap_or(preset.beta),
        args.gamma.unwrap_or(preset.gamma),
        p,
        r,
        s,
        scaling,
        check,
    )
    .map_err(usage)?;
    Ok(Loaded {
        instance,
        label,
        explicit_params: false,
    })
}

/// Resolves `p`, `r`, `s` for a formulation: single-origin models force `r = 1` and `s = p`,
/// the single allocation model forces `r = s = 1`.
fn resolve_params(formulation: Option<Formulation>, p: usize, r: Option<usize>, s: Option<usize>) -> Result<(usize, usize, usize), CliError> {
    match formulation {
        Some(Formulation::SahlpF3) => Ok((p, 1, 1)),
        Some(f) if f.is_single_origin() => {
            if let Some(r) = r.filter(|&r| r != 1) {
                let e = ModelError::RequiresSingleOriginAllocation(r);
                return Err(CliError::Usage(format!("{e:?}: {e}")));
            }
            Ok((p, 1, p))
        }
        _ => Ok((p, r.unwrap_or(1), s.unwrap_or(p))),
    }
}

fn load_for(args: &InstanceArgs, formulation: Option<Formulation>, p: Option<usize>, r: Option<usize>, s: Option<usize>) -> Result<Loaded, CliError> {
    let (p0, r0, s0) = resolve_params(formulation, p.unwrap_or(2), r, s)?;
    let mut loaded = load_instance(args, p0, r0, s0)?;
    if loaded.explicit_params {
        let inst = &loaded.instance;
        let (p1, r1, s1) = resolve_params(formulation, p.unwrap_or(inst.p()), r.or(Some(inst.r())), s.or(Some(inst.s())))?;
        if (p1, r1, s1) != (inst.p(), inst.r(), inst.s()) {
            let check = if args.relaxed { RangeCheck::Relaxed } else { RangeCheck::Strict };
            loaded.instance = inst.with_params(p1, r1, s1, check).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    Ok(loaded)
}

fn effective_threads(flag: usize, env: Option<&str>) -> Result<usize, CliError> {
    match env {
        Some(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&t| t >= 1)
            .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        None if flag >= 1 => Ok(flag),
        None => Err(CliError::Usage("--threads must be at least 1".into())),
    }
}

fn policy_and_limits(args: &SolverArgs, families: CutFamilies, env_threads: Option<&str>) -> Result<(CutPolicy, Limits), CliError> {
    let policy = CutPolicy {
        families,
        backend: match args.cortes_backend {
            BackendArg::Internal => CortesBackend::Internal,
            BackendArg::Lp => CortesBackend::Lp,
        },
        threads: effective_threads(args.threads, env_threads)?,
        ..CutPolicy::default()
    };
    if !(args.time_limit > 0.0) || !(args.rel_gap >= 0.0) {
        return Err(CliError::Usage("--time-limit must be positive and --rel-gap nonnegative".into()));
    }
    let limits = Limits {
        time_seconds: Some(args.time_limit),
        nodes: args.node_limit,
        rel_gap: args.rel_gap,
    };
    Ok((policy, limits))
}

fn backend_name(b: CortesBackend) -> &'static str {
    match b {
        CortesBackend::Internal => "internal",
        CortesBackend::Lp => "lp",
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "Optimal",
        SolveStatus::Infeasible => "Infeasible",
        SolveStatus::TimeLimit => "TimeLimit",
        SolveStatus::NodeLimit => "NodeLimit",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

/// One solve as written to report files. Wall time is left out so reruns compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub instance: String,
    pub formulation: String,
    pub p: usize,
    pub r: usize,
    pub s: usize,
    pub cuts: String,
    pub backend: String,
    pub status: String,
    pub lp_bound: Option<f64>,
    pub ilb: Option<f64>,
    pub flb: Option<f64>,
    pub fub: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: usize,
    pub cuts_zy2: usize,
    pub cuts_cortes: usize,
    /// Open hubs separated by `;`.
    pub hubs: String,
    pub error: String,
}

impl SolveRecord {
    fn new(label: &str, f: Formulation, inst: &Instance, policy: &CutPolicy) -> Self {
        Self {
            instance: label.to_string(),
            formulation: f.name().to_string(),
            p: inst.p(),
            r: inst.r(),
            s: inst.s(),
            cuts: policy.families.name().to_string(),
            backend: backend_name(policy.backend).to_string(),
            status: String::new(),
            lp_bound: None,
            ilb: None,
            flb: None,
            fub: None,
            gap: None,
            nodes: 0,
            cuts_zy2: 0,
            cuts_cortes: 0,
            hubs: String::new(),
            error: String::new(),
        }
    }

    fn fill(&mut self, report: &SolveReport, solution: Option<&HubSolution>) {
        self.status = status_name(report.status).to_string();
        self.lp_bound = finite(report.lp_bound);
        self.ilb = finite(report.ilb);
        self.flb = finite(report.flb);
        self.fub = report.fub;
        self.gap = report.gap;
        self.nodes = report.nodes;
        self.cuts_zy2 = report.cuts_zy2;
        self.cuts_cortes = report.cuts_cortes;
        self.hubs = solution.map_or_else(String::new, |s| join_hubs(&s.hubs));
    }

    fn failed(&mut self, e: &CliError) {
        self.status = "Error".into();
        self.error = e.to_string();
    }
}

fn join_hubs(hubs: &[usize]) -> String {
    hubs.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(";")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveFile {
    pub schema: u32,
    pub record: SolveRecord,
    pub solution: Option<HubSolution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n: usize,
    pub p: usize,
    pub hubs_diff: usize,
    pub single_alloc_changes: usize,
    pub multi_alloc_count: usize,
    pub objective_sahlp: f64,
    pub objective_1p: f64,
    /// Both solves proved optimality.
    pub comparable: bool,
    pub status_sahlp: String,
    pub status_1p: String,
    /// Formulation used for the (1,p) side.
    pub formulation_1p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareFile {
    pub schema: u32,
    pub instance: String,
    pub comparison: ComparisonReport,
    pub sahlp: SolutionPair,
    pub one_p: SolutionPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionPair {
    pub record: SolveRecord,
    pub solution: HubSolution,
}

/// Structural differences between a single allocation network and a (1,p) network.
pub fn compare_networks(n: usize, sahlp: &HubSolution, one_p: &HubSolution) -> (usize, usize, usize) {
    let hubs_diff = sahlp.hubs.iter().filter(|k| !one_p.hubs.contains(k)).count()
        + one_p.hubs.iter().filter(|k| !sahlp.hubs.contains(k)).count();
    let single_alloc_changes = (0..n)
        .filter(|&i| sahlp.origin_sets[i].first() != one_p.origin_sets[i].first())
        .count();
    let multi_alloc_count = (0..one_p.dest_sets.len()).filter(|&j| one_p.inbound_hubs(j) >= 2).count();
    (hubs_diff, single_alloc_changes, multi_alloc_count)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Internal(e.to_string()))
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Internal(e.to_string()))
}

pub const TABLE_HEADER: [&str; 8] = ["ILB", "FLB", "FUB", "Time", "Gap", "#Nodes", "#cortes", "#zy2"];

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

/// Fixed-width table, one row per `(p, method, record, wall seconds)`.
pub fn render_table(rows: &[(String, SolveRecord, f64)]) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:>3} {:<14}", "p", "Method");
    for (i, h) in TABLE_HEADER.iter().enumerate() {
        let w = if i < 3 { 12 } else { 9 };
        let _ = write!(out, " {h:>w$}");
    }
    out.push('\n');
    for (method, rec, secs) in rows {
        let _ = write!(out, "{:>3} {:<14}", rec.p, method);
        let cells = [
            cell(rec.ilb),
            cell(rec.flb),
            cell(rec.fub),
            format!("{secs:.2}"),
            cell(rec.gap),
            rec.nodes.to_string(),
            rec.cuts_cortes.to_string(),
            rec.cuts_zy2.to_string(),
        ];
        for (i, c) in cells.iter().enumerate() {
            let w = if i < 3 { 12 } else { 9 };
            let _ = write!(out, " {c:>w$}");
        }
        if !rec.error.is_empty() {
            let _ = write!(out, "  {}", rec.error);
        }
        out.push('\n');
    }
    out
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Internal(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn solve_one(inst: &Instance, f: Formulation, policy: &CutPolicy, limits: &Limits) -> Result<BncOutcome, CliError> {
    let model = build(inst, f).map_err(model_error)?;
    branch_and_cut(&model, inst, policy, limits).map_err(|e| CliError::Internal(e.to_string()))
}

/// Output of a finished command: text for stdout plus the files written.
#[derive(Debug, Default)]
pub struct CmdOutput {
    pub stdout: String,
    pub files: Vec<PathBuf>,
}

pub fn cmd_solve(args: &SolveArgs, env_threads: Option<&str>) -> Result<CmdOutput, CliError> {
    let loaded = load_for(&args.instance, Some(args.formulation), args.p, args.r, args.s)?;
    let inst = &loaded.instance;
    let (policy, limits) = policy_and_limits(&args.solver, args.solver.cuts, env_threads)?;
    let model = build(inst, args.formulation).map_err(model_error)?;
    let mut out = CmdOutput::default();
    if let Some(path) = &args.dump_lp {
        std::fs::write(path, model.to_lp_text()).map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))?;
        out.files.push(path.clone());
    }
    let outcome = branch_and_cut(&model, inst, &policy, &limits).map_err(|e| CliError::Internal(e.to_string()))?;
    let mut rec = SolveRecord::new(&loaded.label, args.formulation, inst, &policy);
    rec.fill(&outcome.report, outcome.solution.as_ref());
    let file = SolveFile {
        schema: SCHEMA,
        record: rec.clone(),
        solution: outcome.solution,
    };
    write_file(&args.solver.out, "report.json", &to_json(&file))?;
    write_file(&args.solver.out, "report.csv", &to_csv(&[rec.clone()])?)?;
    out.files.push(args.solver.out.join("report.json"));
    out.files.push(args.solver.out.join("report.csv"));
    let method = format!("{}+{}", args.formulation.name(), policy.families.name());
    out.stdout = render_table(&[(method, rec, outcome.report.wall_seconds)]);
    for w in &outcome.warnings {
        let _ = writeln!(out.stdout, "warning: {w}");
    }
    Ok(out)
}

pub fn cmd_compare(args: &CompareArgs, env_threads: Option<&str>) -> Result<CmdOutput, CliError> {
    let loaded = load_for(&args.instance, Some(Formulation::SahlpF3), args.p, None, None)?;
    let sa_inst = &loaded.instance;
    if !sa_inst.has_identical_sets() {
        let e = ModelError::RequiresIdenticalSets;
        return Err(CliError::Usage(format!("{e:?}: {e}")));
    }
    let p = sa_inst.p();
    let check = if args.instance.relaxed { RangeCheck::Relaxed } else { RangeCheck::Strict };
    let op_inst = sa_inst.with_params(p, 1, p, check).map_err(|e| CliError::Usage(e.to_string()))?;
    // general costs go through F3 with r = 1, s = p
    let op_form = if op_inst.is_disaggregated() { Formulation::F1PD } else { Formulation::F3 };
    let (policy, limits) = policy_and_limits(&args.solver, args.solver.cuts, env_threads)?;
    let sa = solve_one(sa_inst, Formulation::SahlpF3, &policy, &limits)?;
    let op = solve_one(&op_inst, op_form, &policy, &limits)?;
    let (Some(sa_sol), Some(op_sol)) = (sa.solution.clone(), op.solution.clone()) else {
        return Err(CliError::Internal("a solve ended without an incumbent; nothing to compare".into()));
    };
    let n = sa_inst.o();
    let (hubs_diff, single_alloc_changes, multi_alloc_count) = compare_networks(n, &sa_sol, &op_sol);
    let comparison = ComparisonReport {
        n,
        p,
        hubs_diff,
        single_alloc_changes,
        multi_alloc_count,
        objective_sahlp: sa_sol.objective,
        objective_1p: op_sol.objective,
        comparable: sa.report.status == SolveStatus::Optimal && op.report.status == SolveStatus::Optimal,
        status_sahlp: status_name(sa.report.status).into(),
        status_1p: status_name(op.report.status).into(),
        formulation_1p: op_form.name().into(),
    };
    let mut sa_rec = SolveRecord::new(&loaded.label, Formulation::SahlpF3, sa_inst, &policy);
    sa_rec.fill(&sa.report, Some(&sa_sol));
    let mut op_rec = SolveRecord::new(&loaded.label, op_form, &op_inst, &policy);
    op_rec.fill(&op.report, Some(&op_sol));
    let file = CompareFile {
        schema: SCHEMA,
        instance: loaded.label.clone(),
        comparison: comparison.clone(),
        sahlp: SolutionPair {
            record: sa_rec.clone(),
            solution: sa_sol,
        },
        one_p: SolutionPair {
            record: op_rec.clone(),
            solution: op_sol,
        },
    };
    write_file(&args.solver.out, "compare.json", &to_json(&file))?;
    write_file(&args.solver.out, "compare.csv", &to_csv(&[comparison.clone()])?)?;
    let mut out = CmdOutput {
        files: vec![args.solver.out.join("compare.json"), args.solver.out.join("compare.csv")],
        ..CmdOutput::default()
    };
    out.stdout = render_table(&[
        ("sahlp".to_string(), sa_rec, sa.report.wall_seconds),
        (op_form.name().to_string(), op_rec, op.report.wall_seconds),
    ]);
    let _ = writeln!(
        out.stdout,
        "n={} p={} hubs_diff={} single_alloc_changes={} multi_alloc_count={} objective_sahlp={} objective_1p={}{}",
        comparison.n,
        comparison.p,
        comparison.hubs_diff,
        comparison.single_alloc_changes,
        comparison.multi_alloc_count,
        comparison.objective_sahlp,
        comparison.objective_1p,
        if comparison.comparable { "" } else { " (not comparable: a solve hit a limit)" }
    );
    Ok(out)
}

fn parse_method(s: &str) -> Result<(Formulation, CutFamilies), CliError> {
    let (f, c) = s.split_once(':').unwrap_or((s, "none"));
    let f = parse_formulation(f.trim()).map_err(CliError::Usage)?;
    let c = parse_cuts(c.trim()).map_err(CliError::Usage)?;
    Ok((f, c))
}

pub fn cmd_bench(args: &BenchArgs, env_threads: Option<&str>) -> Result<CmdOutput, CliError> {
    let methods: Vec<(Formulation, CutFamilies)> = args.methods.iter().map(|m| parse_method(m)).collect::<Result<_, _>>()?;
    let first = args.ps.first().copied().ok_or_else(|| CliError::Usage("--ps is empty".into()))?;
    let base = load_for(&args.instance, None, Some(first), args.r, args.s)?;
    let check = if args.instance.relaxed { RangeCheck::Relaxed } else { RangeCheck::Strict };
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &p in &args.ps {
        for &(f, fam) in &methods {
            let (policy, limits) = policy_and_limits(&args.solver, fam, env_threads)?;
            let mut rec = SolveRecord::new(&base.label, f, &base.instance, &policy);
            rec.p = p;
            let mut secs = 0.0;
            let run = resolve_params(Some(f), p, args.r, args.s).and_then(|(p, r, s)| {
                rec.r = r;
                rec.s = s;
                let inst = base.instance.with_params(p, r, s, check).map_err(|e| CliError::Usage(e.to_string()))?;
                solve_one(&inst, f, &policy, &limits)
            });
            match run {
                Ok(o) => {
                    secs = o.report.wall_seconds;
                    rec.fill(&o.report, o.solution.as_ref());
                }
                Err(e) => rec.failed(&e),
            }
            table.push((format!("{}+{}", f.name(), fam.name()), rec.clone(), secs));
            rows.push(rec);
        }
    }
    write_file(&args.solver.out, "bench.csv", &to_csv(&rows)?)?;
    Ok(CmdOutput {
        stdout: render_table(&table),
        files: vec![args.solver.out.join("bench.csv")],
    })
}

pub fn cmd_oracle(args: &OracleArgs) -> Result<CmdOutput, CliError> {
    let formulation = match args.mode {
        OracleMode::Rs => None,
        OracleMode::OneP => Some(Formulation::F1PD),
        OracleMode::Sahlp => Some(Formulation::SahlpF3),
    };
    let loaded = load_for(&args.instance, formulation, args.p, args.r, args.s)?;
    let inst = &loaded.instance;
    let sol = match args.mode {
        OracleMode::Rs => exact_rs(inst),
        OracleMode::OneP => exact_1p(inst),
        OracleMode::Sahlp => exact_sahlp(inst),
    }
    .map_err(oracle_error)?;
    write_file(&args.out, "oracle.json", &to_json(&sol))?;
    Ok(CmdOutput {
        stdout: format!("objective {}\nhubs {}\n", sol.objective, join_hubs(&sol.hubs)),
        files: vec![args.out.join("oracle.json")],
    })
}

/// Parses `args` (program name first) and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, env_threads: Option<&str>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, env_threads),
        Command::Compare(a) => cmd_compare(a, env_threads),
        Command::Bench(a) => cmd_bench(a, env_threads),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            0
        }
        Err(e) => {
            eprintln!("hublab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spec_forms() {
        assert_eq!(split_random("1,5,5,5", 9).unwrap(), (1, 5, 5, 5));
        assert_eq!(split_random("4,3,6", 9).unwrap(), (9, 4, 3, 6));
        assert!(split_random("1,2", 0).is_err());
        assert!(split_random("a,2,3,4", 0).is_err());
    }

    #[test]
    fn threads_env_wins() {
        assert_eq!(effective_threads(1, Some("4")).unwrap(), 4);
        assert_eq!(effective_threads(3, None).unwrap(), 3);
        assert!(effective_threads(1, Some("zero")).is_err());
        assert!(effective_threads(0, None).is_err());
    }

    #[test]
    fn single_origin_params() {
        assert_eq!(resolve_params(Some(Formulation::F1PD), 3, None, Some(1)).unwrap(), (3, 1, 3));
        assert_eq!(resolve_params(Some(Formulation::SahlpF3), 3, Some(2), None).unwrap(), (3, 1, 1));
        assert_eq!(resolve_params(Some(Formulation::F4), 3, Some(2), None).unwrap(), (3, 2, 3));
        assert_eq!(resolve_params(Some(Formulation::F1P), 3, Some(2), None).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn identical_networks_compare_to_zero() {
        let sol = HubSolution {
            hubs: vec![0, 2],
            origin_sets: vec![vec![0], vec![2], vec![2]],
            dest_sets: vec![vec![0], vec![2], vec![2]],
            routing: vec![vec![(0, 0), (0, 2), (0, 2)], vec![(2, 0), (2, 2), (2, 2)], vec![(2, 0), (2, 2), (2, 2)]],
            objective: 1.0,
        };
        assert_eq!(compare_networks(3, &sol, &sol), (0, 0, 0));
    }
}
