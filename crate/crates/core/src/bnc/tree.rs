use super::{
    audit_cuts, gap_percent, separate_cortes, separate_zy2, BncError, BncOutcome, Cut, CutFamily, CutPolicy, Limits,
    SolveReport, SolveStatus,
};
use crate::instance::Instance;
use crate::lp::{Basis, LpOptions, LpResult, LpStatus, Sense, Simplex};
use crate::models::{decode_incumbent, encode_solution, MipModel};
use crate::oracle::HubSolution;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::time::Instant;

const INTEGRALITY_TOL: f64 = 1e-6;

/// Result of the root cut loop: the model with its cuts appended and the bounds along the way.
#[derive(Debug, Clone)]
pub struct RootLoop {
    pub model: MipModel,
    pub cuts: Vec<Cut>,
    pub lp_bound: f64,
    pub ilb: f64,
    pub round_bounds: Vec<f64>,
    pub basis: Basis,
}

fn solve_or_cold(sim: &mut Simplex) -> Result<LpResult, BncError> {
    match sim.solve() {
        Ok(r) => Ok(r),
        Err(_) => {
            sim.reset_basis();
            Ok(sim.solve()?)
        }
    }
}

struct RootState {
    cuts: Vec<Cut>,
    seen: HashSet<u64>,
    bounds: Vec<f64>,
    last: LpResult,
}

fn add_cuts(sim: &mut Simplex, model: &mut MipModel, state: &mut RootState, batch: Vec<Cut>) -> Result<usize, BncError> {
    let mut added = 0;
    for cut in batch {
        if !state.seen.insert(cut.fingerprint()) {
            continue;
        }
        sim.add_row(&cut.coeffs, Sense::Ge, cut.rhs)?;
        let name = match cut.family {
            CutFamily::Zy2 => format!("zy2_{}", state.cuts.len()),
            CutFamily::Cortes => format!("cortes_{}", state.cuts.len()),
        };
        model.lp.add_constraint(cut.coeffs.clone(), Sense::Ge, cut.rhs);
        model.row_names.push(name);
        state.cuts.push(cut);
        added += 1;
    }
    Ok(added)
}

fn run_root(sim: &mut Simplex, model: &mut MipModel, inst: &Instance, policy: &CutPolicy) -> Result<RootState, BncError> {
    let first = solve_or_cold(sim)?;
    let mut state = RootState {
        cuts: Vec::new(),
        seen: HashSet::new(),
        bounds: vec![first.objective],
        last: first,
    };
    let mut zy2_on = policy.families.zy2;
    for _ in 0..policy.max_root_iterations {
        if state.last.status != LpStatus::Optimal {
            break;
        }
        let x = state.last.x.clone();
        let mut batch = Vec::new();
        if zy2_on {
            batch = separate_zy2(&x, model, inst, policy.violation_tol);
            if batch.len() < policy.zy2_min_violations {
                zy2_on = false;
            }
        }
        if batch.is_empty() && !zy2_on && policy.families.cortes {
            batch = separate_cortes(&x, model, inst, policy)?;
        }
        if add_cuts(sim, model, &mut state, batch)? == 0 {
            break;
        }
        state.last = solve_or_cold(sim)?;
        state.bounds.push(state.last.objective);
    }
    Ok(state)
}

/// Solves the root relaxation and applies the sequential cut policy.
pub fn root_cut_loop(model: &MipModel, inst: &Instance, policy: &CutPolicy) -> Result<RootLoop, BncError> {
    let mut model = model.clone();
    let mut sim = Simplex::new(&model.lp, LpOptions::default())?;
    let state = run_root(&mut sim, &mut model, inst, policy)?;
    if state.last.status != LpStatus::Optimal {
        return Err(BncError::Root(format!("{:?}", state.last.status)));
    }
    Ok(RootLoop {
        lp_bound: state.bounds[0],
        ilb: state.last.objective,
        round_bounds: state.bounds,
        cuts: state.cuts,
        basis: state.last.basis,
        model,
    })
}

struct Node {
    bound: f64,
    seq: usize,
    fixings: Vec<(usize, f64)>,
    basis: Basis,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

fn branching_column(model: &MipModel, x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, &int) in model.integer.iter().enumerate() {
        if !int {
            continue;
        }
        let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if frac > INTEGRALITY_TOL && best.map_or(true, |(_, b)| frac > b) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

/// Best-bound search with depth-first plunging on the fix-to-1 child.
pub fn branch_and_cut(model: &MipModel, inst: &Instance, policy: &CutPolicy, limits: &Limits) -> Result<BncOutcome, BncError> {
    let start = Instant::now();
    let mut model = model.clone();
    let mut sim = Simplex::new(&model.lp, LpOptions::default())?;
    let mut root = run_root(&mut sim, &mut model, inst, policy)?;
    let mut warnings = Vec::new();
    let lp_bound = root.bounds[0];
    let ilb = root.last.objective;
    let root_bounds = root.bounds.clone();
    let original: Vec<(f64, f64)> = (0..model.lp.n_vars()).map(|j| sim.bounds(j)).collect();
    let int_cols: Vec<usize> = (0..model.lp.n_vars()).filter(|&j| model.integer[j]).collect();

    let mut fub: Option<f64> = None;
    let mut incumbent: Option<(HubSolution, Vec<f64>)> = None;
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut seq = 0usize;
    let mut nodes = 0usize;
    let mut status = SolveStatus::Optimal;
    let mut current = Some(Node {
        bound: ilb,
        seq,
        fixings: Vec::new(),
        basis: root.last.basis.clone(),
    });
    let mut root_result = Some(root.last.clone());
    let prune_tol = |fub: f64| (1e-9 * fub.abs().max(1.0)).max(limits.rel_gap * fub.abs());

    loop {
        let node = match current.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if let Some(u) = fub {
            if node.bound >= u - prune_tol(u) {
                continue;
            }
        }
        if limits.nodes.is_some_and(|cap| nodes >= cap) {
            heap.push(node);
            status = SolveStatus::NodeLimit;
            break;
        }
        if limits.time_seconds.is_some_and(|t| start.elapsed().as_secs_f64() >= t) {
            heap.push(node);
            status = SolveStatus::TimeLimit;
            break;
        }
        nodes += 1;
        let res = match root_result.take() {
            Some(r) => r,
            None => {
                for &j in &int_cols {
                    sim.set_bounds(j, original[j].0, original[j].1)?;
                }
                for &(j, v) in &node.fixings {
                    sim.set_bounds(j, v, v)?;
                }
                sim.load_basis(&node.basis);
                let mut r = solve_or_cold(&mut sim)?;
                if policy.allow_tree_cuts && r.status == LpStatus::Optimal {
                    let batch = separate_zy2(&r.x, &model, inst, policy.violation_tol);
                    if add_cuts(&mut sim, &mut model, &mut root, batch)? > 0 {
                        r = solve_or_cold(&mut sim)?;
                    }
                }
                r
            }
        };
        match res.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => return Err(BncError::Root("unbounded node relaxation".into())),
            LpStatus::IterationLimit => return Err(BncError::Root("iteration limit in node relaxation".into())),
        }
        if let Some(u) = fub {
            if res.objective >= u - prune_tol(u) {
                continue;
            }
        }
        match branching_column(&model, &res.x) {
            None => match decode_incumbent(&model, inst, &res.x) {
                Ok(sol) => {
                    if fub.map_or(true, |u| sol.objective < u) {
                        fub = Some(sol.objective);
                        incumbent = Some((sol, res.x.clone()));
                    }
                }
                Err(e) => warnings.push(format!("integral node rejected: {e}")),
            },
            Some(j) => {
                let mut up = node.fixings.clone();
                up.push((j, 1.0));
                let mut down = node.fixings;
                down.push((j, 0.0));
                seq += 1;
                heap.push(Node {
                    bound: res.objective,
                    seq,
                    fixings: down,
                    basis: res.basis.clone(),
                });
                seq += 1;
                current = Some(Node {
                    bound: res.objective,
                    seq,
                    fixings: up,
                    basis: res.basis,
                });
            }
        }
        if let Some(u) = fub {
            let open = heap
                .iter()
                .map(|n| n.bound)
                .chain(current.iter().map(|n| n.bound))
                .fold(f64::INFINITY, f64::min);
            if open.is_finite() && limits.rel_gap > 0.0 && gap_percent(u, open.max(ilb)) / 100.0 <= limits.rel_gap {
                break;
            }
        }
    }

    let open_min = heap
        .iter()
        .map(|n| n.bound)
        .chain(current.iter().map(|n| n.bound))
        .fold(f64::INFINITY, f64::min);
    let flb = match (status, fub) {
        (SolveStatus::Optimal, Some(u)) if open_min.is_infinite() => u,
        (SolveStatus::Optimal, Some(u)) => open_min.max(ilb).min(u),
        (SolveStatus::Optimal, None) => {
            status = SolveStatus::Infeasible;
            f64::INFINITY
        }
        (_, Some(u)) => open_min.max(ilb).min(u),
        (_, None) => open_min.max(ilb),
    };
    let (mut cuts_zy2, mut cuts_cortes) = (0, 0);
    for c in &root.cuts {
        match c.family {
            CutFamily::Zy2 => cuts_zy2 += 1,
            CutFamily::Cortes => cuts_cortes += 1,
        }
    }
    let mut audit = None;
    let solution = incumbent.map(|(sol, _)| {
        if status == SolveStatus::Optimal {
            let point = encode_solution(&model, inst, &sol);
            let a = audit_cuts(&root.cuts, &point, 1e-6);
            if a.violated > 0 {
                warnings.push(format!("{} of {} cuts violated by the optimal network", a.violated, a.checked));
            }
            audit = Some(a);
        }
        sol
    });
    let report = SolveReport {
        status,
        lp_bound,
        ilb,
        flb,
        fub,
        gap: fub.map(|u| gap_percent(u, flb)),
        nodes,
        cuts_zy2,
        cuts_cortes,
        wall_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(BncOutcome {
        report,
        solution,
        cuts: root.cuts,
        root_bounds,
        audit,
        warnings,
    })
}
