//! Mixed-integer formulations of the hub location problems, with named columns.

use crate::instance::Instance;
use crate::lp::{write_lp, LinearProgram, Sense};
use crate::oracle::{evaluate_with_limits, HubSolution, OracleError};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("formulation needs single origin allocation (r = 1), instance has r = {0}")]
    RequiresSingleOriginAllocation(usize),
    #[error("formulation needs disaggregated costs")]
    RequiresDisaggregatedCosts,
    #[error("formulation needs identical origin, destination and hub sets")]
    RequiresIdenticalSets,
    #[error("column {name} is fractional ({value})")]
    FractionalSolution { name: String, value: f64 },
    #[error("model objective {model} differs from evaluated objective {evaluated}")]
    ObjectiveMismatch { model: f64, evaluated: f64 },
    #[error("decoded network is not feasible: {0}")]
    Infeasible(#[from] OracleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "f4")]
    F4,
    #[serde(rename = "f3")]
    F3,
    #[serde(rename = "1p-f")]
    F1P,
    #[serde(rename = "1p-fd")]
    F1PD,
    #[serde(rename = "sahlp")]
    SahlpF3,
}

impl Formulation {
    pub fn name(self) -> &'static str {
        match self {
            Formulation::F4 => "f4",
            Formulation::F3 => "f3",
            Formulation::F1P => "1p-f",
            Formulation::F1PD => "1p-fd",
            Formulation::SahlpF3 => "sahlp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::F4, Self::F3, Self::F1P, Self::F1PD, Self::SahlpF3]
            .into_iter()
            .find(|f| f.name() == s)
    }

    /// Single-origin models whose origin allocation lives in `x` and routing in `z`.
    pub fn is_single_origin(self) -> bool {
        matches!(self, Formulation::F1P | Formulation::F1PD)
    }
}

/// Structured identity of a model column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKey {
    Y(usize),
    Xo(usize, usize),
    Xd(usize, usize),
    X(usize, usize),
    Zo(usize, usize, usize),
    Zd(usize, usize, usize),
    Z(usize, usize, usize),
    Route(usize, usize, usize, usize),
    Mu(usize, usize),
    Pi(usize),
    Delta(usize),
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VarKey::Y(k) => write!(f, "y_{k}"),
            VarKey::Xo(i, k) => write!(f, "xo_{i}_{k}"),
            VarKey::Xd(j, m) => write!(f, "xd_{j}_{m}"),
            VarKey::X(i, k) => write!(f, "x_{i}_{k}"),
            VarKey::Zo(i, j, k) => write!(f, "zo_{i}_{j}_{k}"),
            VarKey::Zd(i, j, m) => write!(f, "zd_{i}_{j}_{m}"),
            VarKey::Z(i, j, m) => write!(f, "z_{i}_{j}_{m}"),
            VarKey::Route(i, j, k, m) => write!(f, "X_{i}_{j}_{k}_{m}"),
            VarKey::Mu(i, j) => write!(f, "mu_{i}_{j}"),
            VarKey::Pi(i) => write!(f, "pi_{i}"),
            VarKey::Delta(i) => write!(f, "delta_{i}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarMap {
    keys: Vec<VarKey>,
    index: HashMap<VarKey, usize>,
}

impl VarMap {
    pub fn get(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    /// Column of `key`; panics when the model has no such column.
    pub fn col(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    pub fn key(&self, col: usize) -> VarKey {
        self.keys[col]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.keys.iter().map(|k| k.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipModel {
    pub formulation: Formulation,
    pub lp: LinearProgram,
    pub integer: Vec<bool>,
    pub vars: VarMap,
    pub row_names: Vec<String>,
    /// Allocation limits the decoded network is checked against.
    pub r_limit: usize,
    pub s_limit: usize,
}

impl MipModel {
    /// CPLEX LP text with structured column names.
    pub fn to_lp_text(&self) -> String {
        write_lp(&self.lp, Some(&self.vars.names()), Some(&self.row_names), Some(&self.integer))
    }
}

struct Builder {
    lp: LinearProgram,
    integer: Vec<bool>,
    vars: VarMap,
    row_names: Vec<String>,
}

impl Builder {
    fn new() -> Self {
        Self {
            lp: LinearProgram::new(),
            integer: Vec::new(),
            vars: VarMap::default(),
            row_names: Vec::new(),
        }
    }

    fn var(&mut self, key: VarKey, cost: f64, lower: f64, upper: f64, integer: bool) -> usize {
        let col = self.lp.add_var(cost, lower, upper);
        self.integer.push(integer);
        self.vars.keys.push(key);
        let prev = self.vars.index.insert(key, col);
        debug_assert!(prev.is_none(), "duplicate column {key}");
        col
    }

    fn binary(&mut self, key: VarKey, cost: f64) -> usize {
        self.var(key, cost, 0.0, 1.0, true)
    }

    fn row(&mut self, name: String, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.lp.add_constraint(coeffs, sense, rhs);
        self.row_names.push(name);
    }

    fn finish(self, formulation: Formulation, r_limit: usize, s_limit: usize) -> MipModel {
        MipModel {
            formulation,
            lp: self.lp,
            integer: self.integer,
            vars: self.vars,
            row_names: self.row_names,
            r_limit,
            s_limit,
        }
    }

    /// `1 <= sum <= limit`, as one equality when the limit is 1.
    fn between_one_and(&mut self, name: String, coeffs: Vec<(usize, f64)>, limit: usize) {
        if limit == 1 {
            self.row(name, coeffs, Sense::Eq, 1.0);
        } else {
            self.row(format!("{name}_min"), coeffs.clone(), Sense::Ge, 1.0);
            self.row(format!("{name}_max"), coeffs, Sense::Le, limit as f64);
        }
    }

    fn hub_rows(&mut self, inst: &Instance) -> Vec<usize> {
        let ys: Vec<usize> = (0..inst.h()).map(|k| self.binary(VarKey::Y(k), 0.0)).collect();
        self.row("hubs".into(), ys.iter().map(|&c| (c, 1.0)).collect(), Sense::Le, inst.p() as f64);
        ys
    }

    /// Columns y, x^o, x^d and their linking and cardinality rows, shared by the allocation models.
    fn allocation_block(&mut self, inst: &Instance, r: usize, s: usize) -> (Vec<usize>, Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let (o, d, h) = (inst.o(), inst.d(), inst.h());
        let ys = self.hub_rows(inst);
        let xo: Vec<Vec<usize>> = (0..o).map(|i| (0..h).map(|k| self.binary(VarKey::Xo(i, k), 0.0)).collect()).collect();
        let xd: Vec<Vec<usize>> = (0..d).map(|j| (0..h).map(|m| self.binary(VarKey::Xd(j, m), 0.0)).collect()).collect();
        for i in 0..o {
            for k in 0..h {
                self.row(format!("xo_y_{i}_{k}"), vec![(xo[i][k], 1.0), (ys[k], -1.0)], Sense::Le, 0.0);
            }
        }
        for j in 0..d {
            for m in 0..h {
                self.row(format!("xd_y_{j}_{m}"), vec![(xd[j][m], 1.0), (ys[m], -1.0)], Sense::Le, 0.0);
            }
        }
        for (i, row) in xo.iter().enumerate() {
            self.between_one_and(format!("alloc_o_{i}"), row.iter().map(|&c| (c, 1.0)).collect(), r);
        }
        for (j, row) in xd.iter().enumerate() {
            self.between_one_and(format!("alloc_d_{j}"), row.iter().map(|&c| (c, 1.0)).collect(), s);
        }
        (ys, xo, xd)
    }
}

/// Path-based model with one routing column per (i, j, k, m).
pub fn build_f4(inst: &Instance, integral_routes: bool) -> MipModel {
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    let mut b = Builder::new();
    let (_, xo, xd) = b.allocation_block(inst, inst.r(), inst.s());
    let mut route = vec![0usize; o * d * h * h];
    for i in 0..o {
        for j in 0..d {
            for k in 0..h {
                for m in 0..h {
                    let col = b.var(VarKey::Route(i, j, k, m), inst.c(i, j, k, m), 0.0, 1.0, integral_routes);
                    route[((i * d + j) * h + k) * h + m] = col;
                }
            }
        }
    }
    let at = |i: usize, j: usize, k: usize, m: usize| route[((i * d + j) * h + k) * h + m];
    for i in 0..o {
        for j in 0..d {
            let all = (0..h).flat_map(|k| (0..h).map(move |m| (k, m))).map(|(k, m)| (at(i, j, k, m), 1.0)).collect();
            b.row(format!("route_{i}_{j}"), all, Sense::Eq, 1.0);
            for m in 0..h {
                let mut row: Vec<(usize, f64)> = (0..h).map(|k| (at(i, j, k, m), 1.0)).collect();
                row.push((xd[j][m], -1.0));
                b.row(format!("route_d_{i}_{j}_{m}"), row, Sense::Le, 0.0);
            }
            for k in 0..h {
                let mut row: Vec<(usize, f64)> = (0..h).map(|m| (at(i, j, k, m), 1.0)).collect();
                row.push((xo[i][k], -1.0));
                b.row(format!("route_o_{i}_{j}_{k}"), row, Sense::Le, 0.0);
            }
        }
    }
    b.finish(Formulation::F4, inst.r(), inst.s())
}

fn costs_nonnegative(inst: &Instance) -> bool {
    if inst.is_disaggregated() {
        return true;
    }
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    (0..o).all(|i| (0..d).all(|j| (0..h).all(|k| (0..h).all(|m| inst.c(i, j, k, m) >= 0.0))))
}

fn f3_into(b: &mut Builder, inst: &Instance, r: usize, s: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    let (_, xo, xd) = b.allocation_block(inst, r, s);
    let mu_lower = if costs_nonnegative(inst) { 0.0 } else { f64::NEG_INFINITY };
    for i in 0..o {
        for j in 0..d {
            let zo: Vec<usize> = (0..h).map(|k| b.binary(VarKey::Zo(i, j, k), 0.0)).collect();
            let zd: Vec<usize> = (0..h).map(|m| b.binary(VarKey::Zd(i, j, m), 0.0)).collect();
            let mu = b.var(VarKey::Mu(i, j), 1.0, mu_lower, f64::INFINITY, false);
            b.row(format!("pick_o_{i}_{j}"), zo.iter().map(|&c| (c, 1.0)).collect(), Sense::Eq, 1.0);
            b.row(format!("pick_d_{i}_{j}"), zd.iter().map(|&c| (c, 1.0)).collect(), Sense::Eq, 1.0);
            for k in 0..h {
                b.row(format!("zo_xo_{i}_{j}_{k}"), vec![(zo[k], 1.0), (xo[i][k], -1.0)], Sense::Le, 0.0);
            }
            for m in 0..h {
                b.row(format!("zd_xd_{i}_{j}_{m}"), vec![(zd[m], 1.0), (xd[j][m], -1.0)], Sense::Le, 0.0);
            }
            for k in 0..h {
                let mut row = vec![(mu, 1.0)];
                for m in 0..h {
                    row.push((zd[m], -inst.c(i, j, k, m)));
                }
                for l in (0..h).filter(|&l| l != k) {
                    row.push((zo[l], tela_coefficient(inst, i, j, k, l)));
                }
                b.row(format!("tela_{i}_{j}_{k}"), row, Sense::Ge, 0.0);
            }
        }
    }
    (xo, xd)
}

/// `max_m (C[i][j][k][m] - C[i][j][l][m])`.
pub fn tela_coefficient(inst: &Instance, i: usize, j: usize, k: usize, l: usize) -> f64 {
    (0..inst.h())
        .map(|m| inst.c(i, j, k, m) - inst.c(i, j, l, m))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Model with separate origin and destination hub choices per pair and one cost variable per pair.
pub fn build_f3(inst: &Instance) -> MipModel {
    let mut b = Builder::new();
    f3_into(&mut b, inst, inst.r(), inst.s());
    b.finish(Formulation::F3, inst.r(), inst.s())
}

/// Single allocation: the F3 model with `r = s = 1` and each site's origin hub equal to its destination hub.
pub fn build_sahlp(inst: &Instance) -> Result<MipModel, ModelError> {
    if !inst.has_identical_sets() {
        return Err(ModelError::RequiresIdenticalSets);
    }
    let mut b = Builder::new();
    let (xo, xd) = f3_into(&mut b, inst, 1, 1);
    for i in 0..inst.o() {
        for k in 0..inst.h() {
            b.row(format!("same_{i}_{k}"), vec![(xo[i][k], 1.0), (xd[i][k], -1.0)], Sense::Eq, 0.0);
        }
    }
    Ok(b.finish(Formulation::SahlpF3, 1, 1))
}

/// Which per-pair cost vector the big-M values are taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BigMMode {
    /// `C[i][j][k][.]`.
    Full,
    /// `w[i][j] * (alpha * c[k][.] + beta * c[.][j])`.
    TransferDistribution,
}

/// Per `(i, j, k)` constants used in the single-origin models.
#[derive(Debug, Clone, PartialEq)]
pub struct BigM {
    o: usize,
    d: usize,
    h: usize,
    values: Vec<f64>,
}

impl BigM {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.d + j) * self.h + k]
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.o, self.d, self.h)
    }
}

fn pair_costs(inst: &Instance, mode: BigMMode, i: usize, j: usize, k: usize) -> Result<Vec<f64>, ModelError> {
    (0..inst.h())
        .map(|m| match mode {
            BigMMode::Full => Ok(inst.c(i, j, k, m)),
            BigMMode::TransferDistribution => inst
                .transfer_distribution(i, j, k, m)
                .ok_or(ModelError::RequiresDisaggregatedCosts),
        })
        .collect()
}

fn bigm_by(inst: &Instance, mode: BigMMode, pick: impl Fn(&mut Vec<f64>) -> f64) -> Result<BigM, ModelError> {
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    let mut values = Vec::with_capacity(o * d * h);
    for i in 0..o {
        for j in 0..d {
            for k in 0..h {
                let mut v = pair_costs(inst, mode, i, j, k)?;
                values.push(pick(&mut v));
            }
        }
    }
    Ok(BigM { o, d, h, values })
}

/// `M[i][j][k]`: the `(h - p + 1)`-th smallest entry of the pair's cost vector over `m`.
pub fn compute_bigm(inst: &Instance, mode: BigMMode) -> Result<BigM, ModelError> {
    let rank = inst.h() - inst.p();
    bigm_by(inst, mode, |v| {
        v.sort_by(f64::total_cmp);
        v[rank]
    })
}

/// The weaker choice `M[i][j][k] = max_m` of the pair's cost vector.
pub fn compute_bigm_max(inst: &Instance, mode: BigMMode) -> Result<BigM, ModelError> {
    bigm_by(inst, mode, |v| v.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

fn single_origin_block(b: &mut Builder, inst: &Instance, x_cost: impl Fn(usize, usize) -> f64) -> (Vec<Vec<usize>>, Vec<Vec<Vec<usize>>>) {
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    let ys = b.hub_rows(inst);
    let x: Vec<Vec<usize>> = (0..o).map(|i| (0..h).map(|k| b.binary(VarKey::X(i, k), x_cost(i, k))).collect()).collect();
    let z: Vec<Vec<Vec<usize>>> = (0..o)
        .map(|i| (0..d).map(|j| (0..h).map(|m| b.binary(VarKey::Z(i, j, m), 0.0)).collect()).collect())
        .collect();
    for i in 0..o {
        for k in 0..h {
            b.row(format!("x_y_{i}_{k}"), vec![(x[i][k], 1.0), (ys[k], -1.0)], Sense::Le, 0.0);
        }
    }
    for (i, row) in x.iter().enumerate() {
        b.row(format!("alloc_{i}"), row.iter().map(|&c| (c, 1.0)).collect(), Sense::Eq, 1.0);
    }
    let od = (o * d) as f64;
    for m in 0..h {
        let mut row: Vec<(usize, f64)> = (0..o).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| (z[i][j][m], 1.0)).collect();
        row.push((ys[m], -od));
        b.row(format!("zy_{m}"), row, Sense::Le, 0.0);
    }
    for i in 0..o {
        for j in 0..d {
            b.row(format!("pick_{i}_{j}"), z[i][j].iter().map(|&c| (c, 1.0)).collect(), Sense::Eq, 1.0);
        }
    }
    (x, z)
}

fn idea_rows(
    b: &mut Builder,
    inst: &Instance,
    lhs: &[usize],
    x: &[Vec<usize>],
    z: &[Vec<Vec<usize>>],
    bigm: &BigM,
    cost: impl Fn(usize, usize, usize, usize) -> f64,
    tag: &str,
) {
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    for i in 0..o {
        for k in 0..h {
            let msum: f64 = (0..d).map(|j| bigm.get(i, j, k)).sum();
            let mut row = vec![(lhs[i], 1.0)];
            for j in 0..d {
                for m in 0..h {
                    row.push((z[i][j][m], -cost(i, j, k, m)));
                }
            }
            row.push((x[i][k], -msum));
            b.row(format!("{tag}_{i}_{k}"), row, Sense::Ge, -msum);
        }
    }
}

/// Single-origin model with one cost variable per origin, using the default big-M values.
pub fn build_1p_f(inst: &Instance) -> Result<MipModel, ModelError> {
    let bigm = compute_bigm(inst, BigMMode::Full)?;
    build_1p_f_with(inst, &bigm)
}

pub fn build_1p_f_with(inst: &Instance, bigm: &BigM) -> Result<MipModel, ModelError> {
    if inst.r() != 1 {
        return Err(ModelError::RequiresSingleOriginAllocation(inst.r()));
    }
    let mut b = Builder::new();
    let (x, z) = single_origin_block(&mut b, inst, |_, _| 0.0);
    let pi: Vec<usize> = (0..inst.o()).map(|i| b.var(VarKey::Pi(i), 1.0, 0.0, f64::INFINITY, false)).collect();
    idea_rows(&mut b, inst, &pi, &x, &z, bigm, |i, j, k, m| inst.c(i, j, k, m), "idea");
    Ok(b.finish(Formulation::F1P, 1, inst.p()))
}

/// Single-origin model with collection costs on `x` and transfer plus distribution costs behind `delta`.
pub fn build_1p_fd(inst: &Instance) -> Result<MipModel, ModelError> {
    if !inst.is_disaggregated() {
        return Err(ModelError::RequiresDisaggregatedCosts);
    }
    if inst.r() != 1 {
        return Err(ModelError::RequiresSingleOriginAllocation(inst.r()));
    }
    let bigm = compute_bigm(inst, BigMMode::TransferDistribution)?;
    let mut b = Builder::new();
    let (x, z) = single_origin_block(&mut b, inst, |i, k| {
        inst.collection_unit(i, k).unwrap() * inst.outflow(i).unwrap()
    });
    let delta: Vec<usize> = (0..inst.o()).map(|i| b.var(VarKey::Delta(i), 1.0, 0.0, f64::INFINITY, false)).collect();
    idea_rows(
        &mut b,
        inst,
        &delta,
        &x,
        &z,
        &bigm,
        |i, j, k, m| inst.transfer_distribution(i, j, k, m).unwrap(),
        "idead",
    );
    Ok(b.finish(Formulation::F1PD, 1, inst.p()))
}

pub fn build(inst: &Instance, formulation: Formulation) -> Result<MipModel, ModelError> {
    match formulation {
        Formulation::F4 => Ok(build_f4(inst, false)),
        Formulation::F3 => Ok(build_f3(inst)),
        Formulation::F1P => build_1p_f(inst),
        Formulation::F1PD => build_1p_fd(inst),
        Formulation::SahlpF3 => build_sahlp(inst),
    }
}

fn objective_tol(v: f64) -> f64 {
    1e-6 * v.abs().max(1.0)
}

fn decode(model: &MipModel, inst: &Instance, x: &[f64]) -> Result<HubSolution, ModelError> {
    for (j, &int) in model.integer.iter().enumerate() {
        if int && (x[j] - x[j].round()).abs() > 1e-6 {
            return Err(ModelError::FractionalSolution {
                name: model.vars.key(j).to_string(),
                value: x[j],
            });
        }
    }
    let (o, d, h) = (inst.o(), inst.d(), inst.h());
    let v = |key: VarKey| x[model.vars.col(key)];
    let hubs: Vec<usize> = (0..h).filter(|&k| v(VarKey::Y(k)) > 0.5).collect();
    let (origin_sets, dest_sets): (Vec<Vec<usize>>, Vec<Vec<usize>>) = if model.formulation.is_single_origin() {
        let argmax = |vals: Vec<f64>| -> usize {
            let mut best = 0;
            for (t, &val) in vals.iter().enumerate() {
                if val > vals[best] {
                    best = t;
                }
            }
            best
        };
        let origin_sets = (0..o).map(|i| vec![argmax((0..h).map(|k| v(VarKey::X(i, k))).collect())]).collect();
        let mut dest_sets = vec![Vec::new(); d];
        for i in 0..o {
            for (j, set) in dest_sets.iter_mut().enumerate() {
                let m = argmax((0..h).map(|m| v(VarKey::Z(i, j, m))).collect());
                if !set.contains(&m) {
                    set.push(m);
                }
            }
        }
        for set in &mut dest_sets {
            set.sort_unstable();
        }
        (origin_sets, dest_sets)
    } else {
        let origin_sets = (0..o).map(|i| (0..h).filter(|&k| v(VarKey::Xo(i, k)) > 0.5).collect()).collect();
        let dest_sets = (0..d).map(|j| (0..h).filter(|&m| v(VarKey::Xd(j, m)) > 0.5).collect()).collect();
        (origin_sets, dest_sets)
    };
    Ok(evaluate_with_limits(inst, &hubs, &origin_sets, &dest_sets, model.r_limit, model.s_limit)?)
}

/// Decodes an integral point and requires the evaluated objective to match the model objective.
pub fn extract_solution(model: &MipModel, inst: &Instance, x: &[f64]) -> Result<HubSolution, ModelError> {
    let sol = decode(model, inst, x)?;
    let model_obj = model.lp.objective_value(x);
    if (sol.objective - model_obj).abs() > objective_tol(model_obj) {
        return Err(ModelError::ObjectiveMismatch {
            model: model_obj,
            evaluated: sol.objective,
        });
    }
    Ok(sol)
}

/// Like [`extract_solution`] but accepts a network that prices below the model objective,
/// which happens when a routing column is held on a non-cheapest pair by branching.
pub fn decode_incumbent(model: &MipModel, inst: &Instance, x: &[f64]) -> Result<HubSolution, ModelError> {
    let sol = decode(model, inst, x)?;
    let model_obj = model.lp.objective_value(x);
    if sol.objective > model_obj + objective_tol(model_obj) {
        return Err(ModelError::ObjectiveMismatch {
            model: model_obj,
            evaluated: sol.objective,
        });
    }
    Ok(sol)
}

/// The model point that represents `sol`, with every cost variable at the cost of its routes.
pub fn encode_solution(model: &MipModel, inst: &Instance, sol: &HubSolution) -> Vec<f64> {
    let mut x = vec![0.0; model.lp.n_vars()];
    let mut set = |key: VarKey, val: f64| {
        if let Some(c) = model.vars.get(key) {
            x[c] = val;
        }
    };
    for &k in &sol.hubs {
        set(VarKey::Y(k), 1.0);
    }
    for (i, ks) in sol.origin_sets.iter().enumerate() {
        for &k in ks {
            set(VarKey::Xo(i, k), 1.0);
            set(VarKey::X(i, k), 1.0);
        }
    }
    for (j, ms) in sol.dest_sets.iter().enumerate() {
        for &m in ms {
            set(VarKey::Xd(j, m), 1.0);
        }
    }
    for i in 0..inst.o() {
        let mut own = 0.0;
        for j in 0..inst.d() {
            let (k, m) = sol.routing[i][j];
            set(VarKey::Route(i, j, k, m), 1.0);
            set(VarKey::Zo(i, j, k), 1.0);
            set(VarKey::Zd(i, j, m), 1.0);
            set(VarKey::Z(i, j, m), 1.0);
            set(VarKey::Mu(i, j), inst.c(i, j, k, m));
            own += match model.formulation {
                Formulation::F1PD => inst.transfer_distribution(i, j, k, m).unwrap_or(0.0),
                _ => inst.c(i, j, k, m),
            };
        }
        set(VarKey::Pi(i), own);
        set(VarKey::Delta(i), own);
    }
    x
}
