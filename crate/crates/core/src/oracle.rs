//! Exhaustive solvers and the solution evaluator used to certify everything else.
//!
//! Every enumerator breaks ties towards the lexicographically smallest
//! candidate and refuses instances above its budget instead of truncating.

use crate::instance::Instance;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("single origin allocation (r = 1) required, instance has r = {0}")]
    RequiresSingleOriginAllocation(usize),
    #[error("origins, destinations and hubs must be the same site set")]
    RequiresIdenticalSets,
}

/// A hub network: open hubs, allocation sets and the realized route of every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HubSolution {
    pub hubs: Vec<usize>,
    pub origin_sets: Vec<Vec<usize>>,
    pub dest_sets: Vec<Vec<usize>>,
    /// `routing[i][j] = (k, m)`: origin hub and destination hub used by the pair.
    pub routing: Vec<Vec<(usize, usize)>>,
    pub objective: f64,
}

impl HubSolution {
    /// Number of distinct destination hubs feeding destination `j`.
    pub fn inbound_hubs(&self, j: usize) -> usize {
        let mut ms: Vec<usize> = self.routing.iter().map(|row| row[j].1).collect();
        ms.sort_unstable();
        ms.dedup();
        ms.len()
    }
}

/// Enumeration limits for [`exact_rs`], [`exact_1p`] and [`exact_sahlp`].
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_pairs: usize,
    pub max_hubs_rs: usize,
    pub max_hubs_1p: usize,
    pub max_p_1p: usize,
    pub max_sites_sahlp: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_pairs: 36,
            max_hubs_rs: 6,
            max_hubs_1p: 22,
            max_p_1p: 3,
            max_sites_sahlp: 9,
        }
    }
}

fn check_set(name: &str, set: &[usize], hubs: &[usize], limit: usize) -> Result<(), OracleError> {
    if set.is_empty() {
        return Err(OracleError::InfeasibleAllocation(format!("{name} is empty")));
    }
    if set.len() > limit {
        return Err(OracleError::InfeasibleAllocation(format!(
            "{name} has {} members, limit {limit}",
            set.len()
        )));
    }
    for (pos, k) in set.iter().enumerate() {
        if hubs.binary_search(k).is_err() {
            return Err(OracleError::InfeasibleAllocation(format!("{name} uses {k}, which is not a hub")));
        }
        if set[..pos].contains(k) {
            return Err(OracleError::InfeasibleAllocation(format!("{name} repeats {k}")));
        }
    }
    Ok(())
}

/// Prices a network under the instance's own `r` and `s` limits.
pub fn evaluate(
    inst: &Instance,
    hubs: &[usize],
    origin_sets: &[Vec<usize>],
    dest_sets: &[Vec<usize>],
) -> Result<HubSolution, OracleError> {
    evaluate_with_limits(inst, hubs, origin_sets, dest_sets, inst.r(), inst.s())
}

/// [`evaluate`] with explicit allocation limits; the `(1, p)` problem uses `s = p`.
pub fn evaluate_with_limits(
    inst: &Instance,
    hubs: &[usize],
    origin_sets: &[Vec<usize>],
    dest_sets: &[Vec<usize>],
    r_limit: usize,
    s_limit: usize,
) -> Result<HubSolution, OracleError> {
    let mut sorted_hubs = hubs.to_vec();
    sorted_hubs.sort_unstable();
    if sorted_hubs.is_empty() || sorted_hubs.len() > inst.p() {
        return Err(OracleError::InfeasibleAllocation(format!(
            "{} hubs open, allowed 1..={}",
            sorted_hubs.len(),
            inst.p()
        )));
    }
    if sorted_hubs.windows(2).any(|w| w[0] == w[1]) || sorted_hubs.iter().any(|&k| k >= inst.h()) {
        return Err(OracleError::InfeasibleAllocation("hub set is not a subset of H".into()));
    }
    if origin_sets.len() != inst.o() || dest_sets.len() != inst.d() {
        return Err(OracleError::InfeasibleAllocation("one allocation set per origin and destination".into()));
    }
    for (i, set) in origin_sets.iter().enumerate() {
        check_set(&format!("origin set {i}"), set, &sorted_hubs, r_limit)?;
    }
    for (j, set) in dest_sets.iter().enumerate() {
        check_set(&format!("destination set {j}"), set, &sorted_hubs, s_limit)?;
    }
    let sort = |sets: &[Vec<usize>]| -> Vec<Vec<usize>> {
        sets.iter()
            .map(|s| {
                let mut s = s.clone();
                s.sort_unstable();
                s
            })
            .collect()
    };
    let origin_sets = sort(origin_sets);
    let dest_sets = sort(dest_sets);
    let mut objective = 0.0;
    let mut routing = Vec::with_capacity(inst.o());
    for (i, ks) in origin_sets.iter().enumerate() {
        let mut row = Vec::with_capacity(inst.d());
        for (j, ms) in dest_sets.iter().enumerate() {
            let mut best = (f64::INFINITY, 0, 0);
            for &k in ks {
                for &m in ms {
                    let v = inst.c(i, j, k, m);
                    if v < best.0 {
                        best = (v, k, m);
                    }
                }
            }
            objective += best.0;
            row.push((best.1, best.2));
        }
        routing.push(row);
    }
    Ok(HubSolution {
        hubs: sorted_hubs,
        origin_sets,
        dest_sets,
        routing,
        objective,
    })
}

/// All subsets of `items` with size in `sizes`, in lexicographic order of their sorted member lists.
pub(crate) fn subsets_lex(items: &[usize], min_size: usize, max_size: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize], start: usize, cur: &mut Vec<usize>, min: usize, max: usize, out: &mut Vec<Vec<usize>>) {
        if cur.len() >= min {
            out.push(cur.clone());
        }
        if cur.len() == max {
            return;
        }
        for t in start..items.len() {
            cur.push(items[t]);
            rec(items, t + 1, cur, min, max, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, 0, &mut Vec::new(), min_size.max(1), max_size, &mut out);
    out
}

/// Odometer step with position 0 most significant, so vectors come out in lexicographic order.
fn advance(digits: &mut [usize], base: usize) -> bool {
    for pos in (0..digits.len()).rev() {
        digits[pos] += 1;
        if digits[pos] < base {
            return true;
        }
        digits[pos] = 0;
    }
    false
}

fn hub_sets(inst: &Instance) -> Vec<Vec<usize>> {
    let all: Vec<usize> = (0..inst.h()).collect();
    subsets_lex(&all, 1, inst.p())
}

fn exact_size_subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    subsets_lex(items, size, size)
}

/// Optimal `(r, s)` network by enumeration.
///
/// For each hub set `P` the origin subsets (size exactly `min(r, |P|)`) are
/// enumerated jointly; given them, each destination's best subset of size
/// `min(s, |P|)` is independent of the others.
pub fn exact_rs(inst: &Instance) -> Result<HubSolution, OracleError> {
    exact_rs_with(inst, &Budget::default())
}

pub fn exact_rs_with(inst: &Instance, budget: &Budget) -> Result<HubSolution, OracleError> {
    if inst.o() * inst.d() > budget.max_pairs || inst.h() > budget.max_hubs_rs {
        return Err(OracleError::BudgetExceeded(format!(
            "o*d = {}, h = {} (limits {}, {})",
            inst.o() * inst.d(),
            inst.h(),
            budget.max_pairs,
            budget.max_hubs_rs
        )));
    }
    let (o, d) = (inst.o(), inst.d());
    let mut best: Option<(f64, Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>)> = None;
    for hubs in hub_sets(inst) {
        let origin_choices = exact_size_subsets(&hubs, inst.r().min(hubs.len()));
        let dest_choices = exact_size_subsets(&hubs, inst.s().min(hubs.len()));
        let mut pick = vec![0usize; o];
        loop {
            let mut total = 0.0;
            let mut dest_sets = Vec::with_capacity(d);
            for j in 0..d {
                let mut best_j = (f64::INFINITY, 0usize);
                for (t, ms) in dest_choices.iter().enumerate() {
                    let mut v = 0.0;
                    for i in 0..o {
                        let mut low = f64::INFINITY;
                        for &k in &origin_choices[pick[i]] {
                            for &m in ms {
                                low = low.min(inst.c(i, j, k, m));
                            }
                        }
                        v += low;
                    }
                    if v < best_j.0 {
                        best_j = (v, t);
                    }
                }
                total += best_j.0;
                dest_sets.push(dest_choices[best_j.1].clone());
            }
            if best.as_ref().map_or(true, |b| total < b.0) {
                let origin_sets = pick.iter().map(|&t| origin_choices[t].clone()).collect();
                best = Some((total, hubs.clone(), origin_sets, dest_sets));
            }
            if !advance(&mut pick, origin_choices.len()) {
                break;
            }
        }
    }
    let (_, hubs, origin_sets, dest_sets) = best.expect("at least one hub set");
    evaluate(inst, &hubs, &origin_sets, &dest_sets)
}

/// Optimal `(1, p)` network: for a fixed hub set each origin picks its hub independently.
pub fn exact_1p(inst: &Instance) -> Result<HubSolution, OracleError> {
    exact_1p_with(inst, &Budget::default())
}

pub fn exact_1p_with(inst: &Instance, budget: &Budget) -> Result<HubSolution, OracleError> {
    if inst.r() != 1 {
        return Err(OracleError::RequiresSingleOriginAllocation(inst.r()));
    }
    if inst.h() > budget.max_hubs_1p && inst.p() > budget.max_p_1p {
        return Err(OracleError::BudgetExceeded(format!(
            "h = {}, p = {} (need h <= {} or p <= {})",
            inst.h(),
            inst.p(),
            budget.max_hubs_1p,
            budget.max_p_1p
        )));
    }
    let (o, d) = (inst.o(), inst.d());
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for hubs in hub_sets(inst) {
        let mut total = 0.0;
        let mut assign = Vec::with_capacity(o);
        for i in 0..o {
            let mut best_i = (f64::INFINITY, hubs[0]);
            for &k in &hubs {
                let mut v = 0.0;
                for j in 0..d {
                    v += hubs.iter().map(|&m| inst.c(i, j, k, m)).fold(f64::INFINITY, f64::min);
                }
                if v < best_i.0 {
                    best_i = (v, k);
                }
            }
            total += best_i.0;
            assign.push(best_i.1);
        }
        if best.as_ref().map_or(true, |b| total < b.0) {
            best = Some((total, hubs, assign));
        }
    }
    let (_, hubs, assign) = best.expect("at least one hub set");
    let origin_sets: Vec<Vec<usize>> = assign.iter().map(|&k| vec![k]).collect();
    let dest_sets = vec![hubs.clone(); d];
    evaluate_with_limits(inst, &hubs, &origin_sets, &dest_sets, 1, inst.p())
}

/// Optimal single allocation network (`P^o(i) = P^d(i)`, one hub per site).
pub fn exact_sahlp(inst: &Instance) -> Result<HubSolution, OracleError> {
    exact_sahlp_with(inst, &Budget::default())
}

pub fn exact_sahlp_with(inst: &Instance, budget: &Budget) -> Result<HubSolution, OracleError> {
    if !inst.has_identical_sets() {
        return Err(OracleError::RequiresIdenticalSets);
    }
    let n = inst.o();
    if n > budget.max_sites_sahlp {
        return Err(OracleError::BudgetExceeded(format!("n = {n} (limit {})", budget.max_sites_sahlp)));
    }
    let mut best: Option<(f64, Vec<usize>, Vec<usize>)> = None;
    for hubs in hub_sets(inst) {
        let q = hubs.len();
        let mut pick = vec![0usize; n];
        loop {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    total += inst.c(i, j, hubs[pick[i]], hubs[pick[j]]);
                }
            }
            if best.as_ref().map_or(true, |b| total < b.0) {
                best = Some((total, hubs.clone(), pick.iter().map(|&t| hubs[t]).collect()));
            }
            if !advance(&mut pick, q) {
                break;
            }
        }
    }
    let (_, hubs, assign) = best.expect("at least one hub set");
    let sets: Vec<Vec<usize>> = assign.iter().map(|&k| vec![k]).collect();
    evaluate_with_limits(inst, &hubs, &sets, &sets, 1, 1)
}
