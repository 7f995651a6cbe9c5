//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fail.
//!
//! AP data is read from `$HUBLAB_AP_DIR`, falling back to `data/ap/` at the workspace root.

use clap::Parser;
use hublab::bnc::{branch_and_cut, root_cut_loop, CutFamilies, CutPolicy, Limits, SolveStatus};
use hublab::cli::{cmd_compare, cmd_solve, compare_networks, CliError, CmdOutput, Command, CompareFile, SolveFile};
use hublab::instance::{random_instance, CostKind, CostModel, Instance, RangeCheck};
use hublab::lp::solve_lp;
use hublab::models::{build, build_1p_f, build_1p_f_with, compute_bigm_max, encode_solution, BigMMode, Formulation};
use hublab::oracle::{exact_1p, exact_rs, exact_sahlp};
use hublab::transport::{primal_lp, solve_transport, TransportInstance};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

const AC1_REL_TOL: f64 = 1e-3;
const AC1_AGREE_TOL: f64 = 1e-6;
const AC1_TABLE: [(usize, f64); 5] = [(2, 174.78), (3, 157.01), (4, 142.27), (5, 131.58), (6, 123.53)];
const AC2_TOL: f64 = 1e-6;
const AC2_INSTANCES: u64 = 100;
const AC3_TOL: f64 = 1e-6;
const AC3_INSTANCES: u64 = 50;
const AC4_TOL: f64 = 1e-6;
const AC5_TOL: f64 = 1e-8;
const AC5_INSTANCES: u64 = 1000;
const AC5_SECONDS: f64 = 30.0;
const AC6_TOL: f64 = 1e-6;
const AC6_SEEDS: u64 = 20;
const AC7_SLACK: f64 = 1e-9;
const AC8_EXPECTED: (usize, usize, usize) = (1, 5, 7);
const AC8_RANDOM_RUNS: u64 = 10;
const AC9_RUNS: u64 = 8;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn exact() -> Limits {
    Limits {
        time_seconds: None,
        nodes: None,
        rel_gap: 0.0,
    }
}

fn ap_dir() -> PathBuf {
    std::env::var_os("HUBLAB_AP_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/ap"))
}

/// First existing file among the usual names of the `n`-node AP instance.
fn ap_file(n: usize) -> Option<PathBuf> {
    let dir = ap_dir();
    [format!("ap{n}"), format!("ap{n}.txt"), format!("AP{n}"), format!("AP{n}.txt"), format!("{n}.txt")]
        .into_iter()
        .map(|name| dir.join(name))
        .find(|p| p.is_file())
}

fn dispatch(args: &[String]) -> Result<CmdOutput, CliError> {
    let cli = hublab::cli::Cli::try_parse_from(std::iter::once("hublab".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    match &cli.command {
        Command::Solve(a) => cmd_solve(a, None),
        Command::Compare(a) => cmd_compare(a, None),
        _ => Err(CliError::Usage("unsupported command".into())),
    }
}

fn strings(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

/// The AC-2 instance family: o = d in 3..=5, h in 4..=6, p in {2, 3}, r = 1, s = p.
fn ac2_shape(t: u64) -> (u64, usize, usize, usize) {
    let n = 3 + (t % 3) as usize;
    let h = 4 + (t / 3 % 3) as usize;
    let p = 2 + (t / 9 % 2) as usize;
    (1000 + t, n, h, p)
}

fn ac2_instance(t: u64) -> Instance {
    let (seed, n, h, p) = ac2_shape(t);
    random_instance(seed, n, n, h, p, 1, p, CostKind::Disaggregated).unwrap()
}

#[derive(Default)]
struct Audit {
    checked: usize,
    violated: usize,
}

fn ac1() -> Verdict {
    let Some(path) = ap_file(40) else {
        return verdict(false, format!("AP n=40 instance not found in {}", ap_dir().display()));
    };
    let mut matched = 0;
    let mut all_optimal = true;
    let mut agree = true;
    let mut notes = Vec::new();
    for (p, want) in AC1_TABLE {
        let dir = tempfile::tempdir().unwrap();
        let mut fubs = Vec::new();
        for f in ["1p-fd", "1p-f"] {
            let args = strings(&[
                "solve",
                "--instance",
                path.to_str().unwrap(),
                "--preset",
                "ap-classic",
                "--p",
                &p.to_string(),
                "--formulation",
                f,
                "--cuts",
                "both",
                "--rel-gap",
                "0",
                "--out",
                dir.path().to_str().unwrap(),
            ]);
            if let Err(e) = dispatch(&args) {
                return verdict(false, format!("p={p} {f}: {e}"));
            }
            let file: SolveFile = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
            all_optimal &= file.record.status == "Optimal";
            fubs.push(file.record.fub.unwrap_or(f64::NAN));
        }
        if ((fubs[0] - want) / want).abs() <= AC1_REL_TOL {
            matched += 1;
        }
        agree &= (fubs[0] - fubs[1]).abs() <= AC1_AGREE_TOL * fubs[0].abs().max(1.0);
        notes.push(format!("p={p}: {:.2} (table {want})", fubs[0]));
    }
    if matched == AC1_TABLE.len() {
        return verdict(true, format!("{} reproduces all five optima: {}", path.display(), notes.join(", ")));
    }
    verdict(
        false,
        format!(
            "{matched}/5 optima within {AC1_REL_TOL}; downgraded check optimal={all_optimal} agree={agree}; {}",
            notes.join(", ")
        ),
    )
}

fn ac2_ac4_ac7() -> (Verdict, Audit, Verdict) {
    let mut agree = 0;
    let mut failures = Vec::new();
    let mut audit = Audit::default();
    let mut ordered = 0;
    let mut order_failures = Vec::new();
    for t in 0..AC2_INSTANCES {
        let inst = ac2_instance(t);
        let opt = exact_1p(&inst).unwrap();
        let mut ok = true;
        for f in [Formulation::F4, Formulation::F3, Formulation::F1P, Formulation::F1PD] {
            let model = build(&inst, f).unwrap();
            let out = branch_and_cut(&model, &inst, &CutPolicy::with_families(CutFamilies::BOTH), &exact()).unwrap();
            let fub = out.report.fub.unwrap_or(f64::NAN);
            if out.report.status != SolveStatus::Optimal || !((fub - opt.objective).abs() <= AC2_TOL) {
                ok = false;
                failures.push(format!("t={t} {}: {fub} vs {}", f.name(), opt.objective));
            }
            let point = encode_solution(&model, &inst, &opt);
            audit.checked += out.cuts.len();
            audit.violated += out.cuts.iter().filter(|c| c.violation(&point) > AC4_TOL).count();
        }
        agree += ok as usize;

        let mut in_order = true;
        for f in [Formulation::F1P, Formulation::F1PD] {
            let model = build(&inst, f).unwrap();
            let plain = solve_lp(&model.lp, None).unwrap().objective;
            let zy2 = root_cut_loop(&model, &inst, &CutPolicy::with_families(CutFamilies::ZY2)).unwrap().ilb;
            let both = root_cut_loop(&model, &inst, &CutPolicy::with_families(CutFamilies::BOTH)).unwrap().ilb;
            if !(zy2 >= plain - AC7_SLACK && both >= zy2 - AC7_SLACK) {
                in_order = false;
                order_failures.push(format!("t={t} {}: {plain} {zy2} {both}", f.name()));
            }
        }
        ordered += in_order as usize;
    }
    let n = AC2_INSTANCES as usize;
    let ac2 = verdict(
        agree == n,
        format!("{agree}/{n} instances agree with exact_1p on f4, f3, 1p-f, 1p-fd {}", failures.join("; ")),
    );
    let ac7 = verdict(
        ordered == n,
        format!("{ordered}/{n} instances have plain <= zy2 <= both on 1p-f and 1p-fd {}", order_failures.join("; ")),
    );
    (ac2, audit, ac7)
}

fn ac3(audit: &mut Audit) -> Verdict {
    let mut agree = 0;
    let mut failures = Vec::new();
    for t in 0..AC3_INSTANCES {
        let r = 1 + (t % 2) as usize;
        let s = 1 + (t / 2 % 3) as usize;
        let p = if s == 3 { 3 } else { 2 + (t / 6 % 2) as usize };
        let n = 2 + (t / 12 % 2) as usize;
        let h = 4 + (t / 24 % 2) as usize;
        let kind = if t % 5 < 3 { CostKind::General } else { CostKind::Disaggregated };
        let inst = random_instance(2000 + t, n, n, h, p, r, s, kind).unwrap();
        let opt = exact_rs(&inst).unwrap();
        let mut ok = true;
        for f in [Formulation::F4, Formulation::F3] {
            let model = build(&inst, f).unwrap();
            let out = branch_and_cut(&model, &inst, &CutPolicy::with_families(CutFamilies::BOTH), &exact()).unwrap();
            let fub = out.report.fub.unwrap_or(f64::NAN);
            if out.report.status != SolveStatus::Optimal || !((fub - opt.objective).abs() <= AC3_TOL) {
                ok = false;
                failures.push(format!("t={t} (r={r}, s={s}) {}: {fub} vs {}", f.name(), opt.objective));
            }
            let point = encode_solution(&model, &inst, &opt);
            audit.checked += out.cuts.len();
            audit.violated += out.cuts.iter().filter(|c| c.violation(&point) > AC4_TOL).count();
        }
        agree += ok as usize;
    }
    let n = AC3_INSTANCES as usize;
    verdict(agree == n, format!("{agree}/{n} instances agree with exact_rs on f4 and f3 {}", failures.join("; ")))
}

fn masses(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) }).collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.gen_range(0..len)] = 1.0;
    }
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

fn ac5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut bad = 0;
    for _ in 0..AC5_INSTANCES {
        let rows = rng.gen_range(1..=12);
        let cols = rng.gen_range(1..=12);
        let tp = TransportInstance {
            supplies: masses(&mut rng, rows),
            demands: masses(&mut rng, cols),
            costs: (0..rows).map(|_| (0..cols).map(|_| rng.gen_range(0.0..100.0)).collect()).collect(),
        };
        let ssp = solve_transport(&tp).unwrap();
        let lp = solve_lp(&primal_lp(&tp), None).unwrap();
        let diff = (ssp.objective - lp.objective).abs();
        worst = worst.max(diff);
        let feasible = (0..rows).all(|k| (0..cols).all(|m| ssp.e[k] + ssp.f[m] <= tp.costs[k][m] + AC5_TOL));
        if diff > AC5_TOL || !feasible {
            bad += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        bad == 0 && secs < AC5_SECONDS,
        format!(
            "{}/{AC5_INSTANCES} match the primal LP, max difference {worst:.2e}, {secs:.2} s",
            AC5_INSTANCES - bad
        ),
    )
}

/// Every `(i, j, k)` cost vector is a rotation of `[0, 0, 10, 11]`, so with `h = 4, p = 2` the big-M is 10
/// and each addend `sum_m (C_m - M) + M` is -9.
fn ac6_crafted() -> Instance {
    let (o, d, h) = (3, 3, 4);
    let base = [0.0, 0.0, 10.0, 11.0];
    let mut tensor = Vec::with_capacity(o * d * h * h);
    for i in 0..o {
        for j in 0..d {
            for k in 0..h {
                for m in 0..h {
                    tensor.push(base[(m + i + j + k) % h]);
                }
            }
        }
    }
    Instance::new(o, d, h, 2, 1, 2, CostModel::General { tensor }, RangeCheck::Strict).unwrap()
}

fn ac6() -> Verdict {
    let crafted = ac6_crafted();
    let bound = solve_lp(&build_1p_f(&crafted).unwrap().lp, None).unwrap().objective;
    let crafted_ok = bound.abs() <= AC6_TOL;
    let mut zero = 0;
    let mut worst = 0.0f64;
    for seed in 0..AC6_SEEDS {
        let inst = random_instance(6000 + seed, 4, 4, 5, 2, 1, 2, CostKind::General).unwrap();
        let positive = (0..4).all(|i| (0..4).all(|j| (0..5).all(|k| (0..5).all(|m| inst.c(i, j, k, m) > 0.0))));
        let model = build_1p_f_with(&inst, &compute_bigm_max(&inst, BigMMode::Full).unwrap()).unwrap();
        let b = solve_lp(&model.lp, None).unwrap().objective;
        worst = worst.max(b.abs());
        if positive && b.abs() <= AC6_TOL {
            zero += 1;
        }
    }
    verdict(
        crafted_ok && zero == AC6_SEEDS,
        format!("crafted bound {bound:.2e}; max-M bound zero on {zero}/{AC6_SEEDS} positive-cost seeds (max {worst:.2e})"),
    )
}

fn compare_file(args: &[String], dir: &std::path::Path) -> Result<CompareFile, CliError> {
    dispatch(args)?;
    Ok(serde_json::from_str(&std::fs::read_to_string(dir.join("compare.json")).unwrap()).unwrap())
}

fn ac8() -> Verdict {
    let mut invariant = 0;
    for t in 0..AC8_RANDOM_RUNS {
        let dir = tempfile::tempdir().unwrap();
        let spec = format!("{},6,6,6", 8000 + t);
        let p = 2 + (t % 2) as usize;
        let args = strings(&["compare", "--random", &spec, "--p", &p.to_string(), "--out", dir.path().to_str().unwrap()]);
        let file = compare_file(&args, dir.path()).unwrap();
        let c = &file.comparison;
        let sa = exact_sahlp(&random_instance(8000 + t, 6, 6, 6, p, 1, 1, CostKind::Disaggregated).unwrap()).unwrap();
        let one = exact_1p(&random_instance(8000 + t, 6, 6, 6, p, 1, p, CostKind::Disaggregated).unwrap()).unwrap();
        let metrics = compare_networks(6, &sa, &one);
        if c.objective_1p <= c.objective_sahlp + 1e-9 && (c.hubs_diff, c.single_alloc_changes, c.multi_alloc_count) == metrics {
            invariant += 1;
        }
    }
    let random_note = format!("objective_1p <= objective_sahlp on {invariant}/{AC8_RANDOM_RUNS} random comparisons");
    let Some(path) = ap_file(20) else {
        return verdict(false, format!("AP n=20 instance not found in {}; {random_note}", ap_dir().display()));
    };
    let dir = tempfile::tempdir().unwrap();
    let args = strings(&[
        "compare",
        "--instance",
        path.to_str().unwrap(),
        "--preset",
        "ap-classic",
        "--p",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    match compare_file(&args, dir.path()) {
        Ok(file) => {
            let c = &file.comparison;
            let got = (c.hubs_diff, c.single_alloc_changes, c.multi_alloc_count);
            verdict(
                got == AC8_EXPECTED && c.objective_1p <= c.objective_sahlp + 1e-9 && invariant as u64 == AC8_RANDOM_RUNS,
                format!("AP n=20 p=6 gives {got:?}, expected {AC8_EXPECTED:?}; {random_note}"),
            )
        }
        Err(e) => verdict(false, format!("AP n=20 compare failed: {e}; {random_note}")),
    }
}

fn ac9() -> Verdict {
    let mut identical = 0;
    let formulations = ["f4", "f3", "1p-f", "1p-fd"];
    for t in 0..AC9_RUNS {
        let (seed, n, h, p) = ac2_shape(t * 7);
        let spec = format!("{seed},{n},{n},{h}");
        let f = formulations[t as usize % 4];
        let run = || {
            let dir = tempfile::tempdir().unwrap();
            let args = strings(&[
                "solve",
                "--random",
                &spec,
                "--p",
                &p.to_string(),
                "--formulation",
                f,
                "--rel-gap",
                "0",
                "--threads",
                "1",
                "--out",
                dir.path().to_str().unwrap(),
            ]);
            dispatch(&args).unwrap();
            std::fs::read(dir.path().join("report.json")).unwrap()
        };
        if run() == run() {
            identical += 1;
        }
    }
    verdict(identical == AC9_RUNS, format!("{identical}/{AC9_RUNS} repeated solves wrote identical report.json"))
}

fn main() {
    let mut results: Vec<(&str, Verdict, Option<f64>)> = Vec::new();
    let timed = |f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let v = f();
        (v, Some(start.elapsed().as_secs_f64()))
    };

    let (v, t) = timed(&mut ac1);
    results.push(("AC-1", v, t));

    let start = Instant::now();
    let (v2, mut audit, v7) = ac2_ac4_ac7();
    let t2 = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let v3 = ac3(&mut audit);
    let t3 = start.elapsed().as_secs_f64();
    let v4 = verdict(audit.violated == 0, format!("{} of {} generated cuts violated by oracle optima", audit.violated, audit.checked));
    let v2 = if t2 < 300.0 { v2 } else { verdict(false, format!("{} but took {t2:.1} s", v2.detail)) };
    results.push(("AC-2", v2, Some(t2)));
    results.push(("AC-3", v3, Some(t3)));
    results.push(("AC-4", v4, None));

    let (v, t) = timed(&mut ac5);
    results.push(("AC-5", v, t));
    let (v, t) = timed(&mut ac6);
    results.push(("AC-6", v, t));
    results.push(("AC-7", v7, None));
    let (v, t) = timed(&mut ac8);
    results.push(("AC-8", v, t));
    let (v, t) = timed(&mut ac9);
    results.push(("AC-9", v, t));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (name, v, secs) in &results {
        failed += !v.pass as usize;
        let time = secs.map_or_else(|| "during AC-2/AC-3".to_string(), |t| format!("{t:.1} s"));
        println!("{name} {} {} [{time}]", if v.pass { "PASS" } else { "FAIL" }, v.detail.trim_end());
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
