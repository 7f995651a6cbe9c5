use super::factor::{column, ColumnRef, Factor};
use super::{Basis, LinearProgram, LpError, LpOptions, LpResult, LpStatus, Sense, VarStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A reusable simplex context: rows can be appended and bounds changed between solves,
/// and the last basis is kept as the starting point of the next solve.
///
/// Column `j < n` is structural; column `n + i` is the logical of row `i`,
/// defined by `a_i x - r_i = 0` with the row sense expressed as bounds on `r_i`.
pub struct Simplex {
    n: usize,
    m: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    status: Vec<VarStatus>,
    heads: Vec<usize>,
    x: Vec<f64>,
    factor: Option<Factor>,
    opts: LpOptions,
}

fn logical_bounds(sense: Sense, rhs: f64) -> (f64, f64) {
    match sense {
        Sense::Le => (f64::NEG_INFINITY, rhs),
        Sense::Ge => (rhs, f64::INFINITY),
        Sense::Eq => (rhs, rhs),
    }
}

fn resting_status(l: f64, u: f64, prefer_upper: bool) -> VarStatus {
    match (l.is_finite(), u.is_finite()) {
        (true, true) => {
            if prefer_upper && l < u {
                VarStatus::AtUpper
            } else {
                VarStatus::AtLower
            }
        }
        (true, false) => VarStatus::AtLower,
        (false, true) => VarStatus::AtUpper,
        (false, false) => VarStatus::Free,
    }
}

const PERTURBATION: f64 = 1e-6;
const PERTURBATION_SEED: u64 = 0x5eed;

enum Step {
    Flip,
    Pivot { pos: usize, to_upper: bool },
    Unbounded,
}

impl Simplex {
    pub fn new(lp: &LinearProgram, opts: LpOptions) -> Result<Self, LpError> {
        lp.validate()?;
        let n = lp.n_vars();
        let mut s = Simplex {
            n,
            m: 0,
            cost: lp.objective.clone(),
            lower: lp.lower.clone(),
            upper: lp.upper.clone(),
            cols: vec![Vec::new(); n],
            status: Vec::with_capacity(n),
            heads: Vec::new(),
            x: Vec::with_capacity(n),
            factor: None,
            opts,
        };
        for j in 0..n {
            let st = resting_status(s.lower[j], s.upper[j], false);
            s.status.push(st);
            s.x.push(0.0);
        }
        for j in 0..n {
            s.x[j] = s.resting_value(j);
        }
        for row in &lp.constraints {
            s.push_row(&row.coeffs, row.sense, row.rhs);
        }
        Ok(s)
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    pub fn n_rows(&self) -> usize {
        self.m
    }

    fn push_row(&mut self, coeffs: &[(usize, f64)], sense: Sense, rhs: f64) {
        let i = self.m;
        for &(j, a) in coeffs {
            if a != 0.0 {
                self.cols[j].push((i, a));
            }
        }
        let (l, u) = logical_bounds(sense, rhs);
        self.lower.push(l);
        self.upper.push(u);
        self.status.push(VarStatus::Basic);
        self.x.push(0.0);
        self.heads.push(self.n + i);
        self.m += 1;
        self.factor = None;
    }

    /// Appends a row; its logical enters the basis so the current basis stays valid.
    pub fn add_row(&mut self, coeffs: &[(usize, f64)], sense: Sense, rhs: f64) -> Result<usize, LpError> {
        let mut seen = std::collections::HashSet::new();
        for &(j, a) in coeffs {
            if j >= self.n || !seen.insert(j) || !a.is_finite() {
                return Err(LpError::InvalidModel(format!("bad coefficient ({j}, {a}) in appended row")));
            }
        }
        if !rhs.is_finite() {
            return Err(LpError::InvalidModel(format!("appended row has right-hand side {rhs}")));
        }
        self.push_row(coeffs, sense, rhs);
        Ok(self.m - 1)
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if j >= self.n || lower.is_nan() || upper.is_nan() || lower > upper {
            return Err(LpError::InvalidModel(format!("bounds [{lower}, {upper}] on column {j}")));
        }
        self.lower[j] = lower;
        self.upper[j] = upper;
        if self.status[j] != VarStatus::Basic {
            let prefer_upper = self.status[j] == VarStatus::AtUpper;
            self.status[j] = resting_status(lower, upper, prefer_upper);
            self.x[j] = self.resting_value(j);
        }
        Ok(())
    }

    pub fn basis(&self) -> Basis {
        Basis {
            status: self.status.clone(),
        }
    }

    /// Installs a stored basis. Rows added after it was taken get basic logicals.
    /// Returns false (leaving the current basis in place) when the basis does not fit.
    pub fn load_basis(&mut self, basis: &Basis) -> bool {
        let total = self.n + self.m;
        if basis.status.len() > total || basis.status.len() < self.n {
            return false;
        }
        let mut status = basis.status.clone();
        status.resize(total, VarStatus::Basic);
        let heads: Vec<usize> = (0..total).filter(|&j| status[j] == VarStatus::Basic).collect();
        if heads.len() != self.m {
            return false;
        }
        for j in 0..total {
            if status[j] != VarStatus::Basic {
                let (l, u) = (self.lower[j], self.upper[j]);
                let fits = match status[j] {
                    VarStatus::AtLower => l.is_finite(),
                    VarStatus::AtUpper => u.is_finite(),
                    _ => !l.is_finite() && !u.is_finite(),
                };
                if !fits {
                    status[j] = resting_status(l, u, status[j] == VarStatus::AtUpper);
                }
            }
        }
        self.status = status;
        self.heads = heads;
        for j in 0..total {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.resting_value(j);
            }
        }
        self.factor = None;
        true
    }

    /// Returns to the all-logical basis with every column at its resting bound.
    pub fn reset_basis(&mut self) {
        for j in 0..self.n {
            self.status[j] = resting_status(self.lower[j], self.upper[j], false);
            self.x[j] = self.resting_value(j);
        }
        for i in 0..self.m {
            self.status[self.n + i] = VarStatus::Basic;
        }
        self.heads = (self.n..self.n + self.m).collect();
        self.factor = None;
    }

    fn resting_value(&self, j: usize) -> f64 {
        match self.status[j] {
            VarStatus::AtLower => self.lower[j],
            VarStatus::AtUpper => self.upper[j],
            VarStatus::Free => 0.0,
            VarStatus::Basic => self.x[j],
        }
    }

    fn var_cost(&self, j: usize) -> f64 {
        if j < self.n {
            self.cost[j]
        } else {
            0.0
        }
    }

    fn dense_column(&self, j: usize) -> Vec<f64> {
        let mut a = vec![0.0; self.m];
        match column(&self.cols, j) {
            ColumnRef::Structural(c) => {
                for &(i, v) in c {
                    a[i] = v;
                }
            }
            ColumnRef::Logical(i) => a[i] = -1.0,
        }
        a
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        for _ in 0..=self.m.min(20) {
            match Factor::new(&self.cols, &self.heads, self.m, self.opts.pivot_tol) {
                Ok(f) => {
                    self.factor = Some(f);
                    self.recompute_basics();
                    return Ok(());
                }
                Err(sing) => {
                    // swap each dependent column for the logical of a row left without a pivot
                    for (&pos, &row) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.heads[pos];
                        let st = resting_status(self.lower[old], self.upper[old], false);
                        self.status[old] = st;
                        self.x[old] = self.resting_value(old);
                        self.heads[pos] = self.n + row;
                        self.status[self.n + row] = VarStatus::Basic;
                    }
                }
            }
        }
        Err(LpError::NumericalBreakdown("basis stays singular after repair".into()))
    }

    fn recompute_basics(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.status[j] == VarStatus::Basic {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            match column(&self.cols, j) {
                ColumnRef::Structural(c) => {
                    for &(i, a) in c {
                        rhs[i] -= a * v;
                    }
                }
                ColumnRef::Logical(i) => rhs[i] += v,
            }
        }
        let f = self.factor.as_ref().expect("factor present");
        let xb = f.ftran(&self.cols, &rhs);
        for (pos, &j) in self.heads.iter().enumerate() {
            self.x[j] = xb[pos];
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lower[j] {
            self.lower[j] - v
        } else if v > self.upper[j] {
            v - self.upper[j]
        } else {
            0.0
        }
    }

    fn reduced_cost(&self, j: usize, y: &[f64], phase_one: bool) -> f64 {
        let c = if phase_one { 0.0 } else { self.var_cost(j) };
        match column(&self.cols, j) {
            ColumnRef::Structural(col) => c - col.iter().map(|&(i, a)| a * y[i]).sum::<f64>(),
            ColumnRef::Logical(i) => c + y[i],
        }
    }

    fn eligible(&self, j: usize, d: f64) -> bool {
        let tol = self.opts.optimality_tol;
        match self.status[j] {
            VarStatus::Basic => false,
            VarStatus::AtLower => d < -tol && self.lower[j] < self.upper[j],
            VarStatus::AtUpper => d > tol && self.lower[j] < self.upper[j],
            VarStatus::Free => d.abs() > tol,
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> (Step, f64) {
        let ftol = self.opts.feasibility_tol;
        let range = self.upper[q] - self.lower[q];
        // (position, exact ratio, relaxed ratio, |alpha|, moves to upper)
        let mut cands: Vec<(usize, f64, f64, f64, bool)> = Vec::new();
        for (pos, &a) in alpha.iter().enumerate() {
            if a.abs() <= self.opts.ratio_pivot_tol {
                continue;
            }
            let j = self.heads[pos];
            let rate = -dir * a;
            let (v, l, u) = (self.x[j], self.lower[j], self.upper[j]);
            // an infeasible basic moving further out has no breakpoint; one moving back
            // stops at the bound it re-enters through
            let (bound, relaxed, to_upper) = if rate < 0.0 {
                if v > u + ftol {
                    (u, u, true)
                } else if v < l - ftol || !l.is_finite() {
                    continue;
                } else {
                    (l, l - ftol, false)
                }
            } else if v < l - ftol {
                (l, l, false)
            } else if v > u + ftol || !u.is_finite() {
                continue;
            } else {
                (u, u + ftol, true)
            };
            let exact = ((bound - v) / rate).max(0.0);
            let loose = ((relaxed - v) / rate).max(0.0);
            cands.push((pos, exact, loose, a.abs(), to_upper));
        }
        if bland {
            let mut best: Option<(usize, f64, bool)> = None;
            for &(pos, exact, _, _, up) in &cands {
                let better = match best {
                    None => true,
                    Some((bp, bt, _)) => {
                        exact < bt - 1e-12 || (exact <= bt + 1e-12 && self.heads[pos] < self.heads[bp])
                    }
                };
                if better {
                    best = Some((pos, exact, up));
                }
            }
            return match best {
                Some((_, t, _)) if range <= t => (Step::Flip, range),
                Some((pos, t, up)) => (Step::Pivot { pos, to_upper: up }, t),
                None if range.is_finite() => (Step::Flip, range),
                None => (Step::Unbounded, f64::INFINITY),
            };
        }
        let theta_max = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        if range.is_finite() && range <= theta_max {
            return (Step::Flip, range);
        }
        let mut best: Option<(usize, f64, f64, bool)> = None;
        for &(pos, exact, _, mag, up) in &cands {
            if exact <= theta_max && best.map_or(true, |b| mag > b.2) {
                best = Some((pos, exact, mag, up));
            }
        }
        match best {
            Some((pos, t, _, up)) => (Step::Pivot { pos, to_upper: up }, t),
            None => (Step::Unbounded, f64::INFINITY),
        }
    }

    /// Runs the two-phase simplex from the current basis.
    pub fn solve(&mut self) -> Result<LpResult, LpError> {
        let mut saved = None;
        let out = self.run(&mut saved);
        if let Some((lower, upper)) = saved {
            self.restore_bounds(lower, upper);
        }
        out
    }

    /// Widens every finite bound by a small deterministic random amount so that a stalled
    /// degenerate vertex splits into nearby nondegenerate ones.
    fn perturb_bounds(&mut self) -> (Vec<f64>, Vec<f64>) {
        let saved = (self.lower.clone(), self.upper.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
        for j in 0..self.n + self.m {
            let (l, u) = (self.lower[j], self.upper[j]);
            if l.is_finite() {
                self.lower[j] = l - PERTURBATION * (1.0 + l.abs()) * rng.gen_range(1.0..2.0);
            }
            if u.is_finite() {
                self.upper[j] = u + PERTURBATION * (1.0 + u.abs()) * rng.gen_range(1.0..2.0);
            }
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.resting_value(j);
            }
        }
        self.factor = None;
        saved
    }

    fn restore_bounds(&mut self, lower: Vec<f64>, upper: Vec<f64>) {
        self.lower = lower;
        self.upper = upper;
        for j in 0..self.n + self.m {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.resting_value(j);
            }
        }
        self.factor = None;
    }

    fn run(&mut self, saved: &mut Option<(Vec<f64>, Vec<f64>)>) -> Result<LpResult, LpError> {
        let total = self.n + self.m;
        let mut perturbed_once = false;
        for j in 0..total {
            if self.status[j] != VarStatus::Basic {
                self.x[j] = self.resting_value(j);
            }
        }
        self.factor = None;
        let mut iterations = 0usize;
        let mut degenerate_run = 0usize;
        let mut best = (true, f64::INFINITY);
        let mut weights = vec![1.0; total];
        let mut fresh;
        loop {
            let stale = match &self.factor {
                None => true,
                Some(f) => f.eta_count() >= self.opts.refactor_every,
            };
            if stale {
                self.refactor()?;
            }
            fresh = self.factor.as_ref().map_or(false, |f| f.eta_count() == 0);
            let ftol = self.opts.feasibility_tol;
            let phase_one = self.heads.iter().any(|&j| self.infeasibility(j) > ftol);
            let cb: Vec<f64> = self
                .heads
                .iter()
                .map(|&j| {
                    if phase_one {
                        if self.x[j] < self.lower[j] - ftol {
                            -1.0
                        } else if self.x[j] > self.upper[j] + ftol {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        self.var_cost(j)
                    }
                })
                .collect();
            let factor = self.factor.as_ref().unwrap();
            let y = factor.btran(&self.cols, &cb);
            if !perturbed_once && degenerate_run >= self.opts.perturb_after {
                perturbed_once = true;
                *saved = Some(self.perturb_bounds());
                weights.fill(1.0);
                degenerate_run = 0;
                best = (true, f64::INFINITY);
                continue;
            }
            let bland = degenerate_run >= self.opts.bland_after;
            let mut entering: Option<(usize, f64, f64)> = None;
            for j in 0..total {
                if self.status[j] == VarStatus::Basic {
                    continue;
                }
                let d = self.reduced_cost(j, &y, phase_one);
                if !self.eligible(j, d) {
                    continue;
                }
                if bland {
                    entering = Some((j, d, 0.0));
                    break;
                }
                let score = d * d / weights[j];
                if entering.map_or(true, |(_, _, bs)| score > bs) {
                    entering = Some((j, d, score));
                }
            }
            let Some((q, d, _)) = entering else {
                if !fresh {
                    self.factor = None;
                    continue;
                }
                if let Some((lower, upper)) = saved.take() {
                    self.restore_bounds(lower, upper);
                    continue;
                }
                let status = if phase_one { LpStatus::Infeasible } else { LpStatus::Optimal };
                return Ok(self.result(status, &y, iterations));
            };
            if iterations >= self.opts.max_iterations {
                return Ok(self.result(LpStatus::IterationLimit, &y, iterations));
            }
            iterations += 1;
            let dir = if d < 0.0 { 1.0 } else { -1.0 };
            let alpha = factor.ftran(&self.cols, &self.dense_column(q));
            let (step, theta) = self.ratio_test(q, dir, &alpha, bland);
            match step {
                Step::Unbounded => {
                    if !fresh {
                        self.factor = None;
                        continue;
                    }
                    if let Some((lower, upper)) = saved.take() {
                        self.restore_bounds(lower, upper);
                        continue;
                    }
                    if phase_one {
                        return Err(LpError::NumericalBreakdown("phase one ray without a breakpoint".into()));
                    }
                    return Ok(self.result(LpStatus::Unbounded, &y, iterations));
                }
                Step::Flip => {
                    for (pos, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            let j = self.heads[pos];
                            self.x[j] -= dir * theta * a;
                        }
                    }
                    self.status[q] = if dir > 0.0 { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[q] = self.resting_value(q);
                }
                Step::Pivot { pos: r, to_upper } => {
                    for (pos, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            let j = self.heads[pos];
                            self.x[j] -= dir * theta * a;
                        }
                    }
                    self.x[q] += dir * theta;
                    let leaving = self.heads[r];
                    self.update_devex(&mut weights, q, r, &alpha);
                    let (l, u) = (self.lower[leaving], self.upper[leaving]);
                    self.status[leaving] = if to_upper && l < u { VarStatus::AtUpper } else { VarStatus::AtLower };
                    self.x[leaving] = self.resting_value(leaving);
                    self.status[q] = VarStatus::Basic;
                    self.heads[r] = q;
                    self.factor.as_mut().unwrap().push_eta(r, &alpha);
                }
            }
            // progress is judged on the objective, not the step length
            let progress = self.phase_objective(phase_one);
            if phase_one != best.0 || progress < best.1 - 1e-9 * (1.0 + best.1.abs()) {
                best = (phase_one, progress);
                degenerate_run = 0;
            } else {
                degenerate_run += 1;
            }
        }
    }

    /// Devex reference weights after `q` enters at basis position `r`.
    fn update_devex(&self, weights: &mut [f64], q: usize, r: usize, alpha: &[f64]) {
        let mut e = vec![0.0; self.m];
        e[r] = 1.0;
        let rho = self.factor.as_ref().expect("factor present").btran(&self.cols, &e);
        let aq = alpha[r];
        let wq = weights[q];
        for j in 0..self.n + self.m {
            if j == q || self.status[j] == VarStatus::Basic {
                continue;
            }
            let arj = match column(&self.cols, j) {
                ColumnRef::Structural(c) => c.iter().map(|&(i, a)| a * rho[i]).sum::<f64>(),
                ColumnRef::Logical(i) => -rho[i],
            };
            if arj != 0.0 {
                let w = (arj / aq) * (arj / aq) * wq;
                if w > weights[j] {
                    weights[j] = w;
                }
            }
        }
        let leaving = self.heads[r];
        weights[leaving] = (wq / (aq * aq)).max(1.0);
        if weights.iter().any(|&w| w > 1e8) {
            weights.fill(1.0);
        }
    }

    /// Total infeasibility in phase one, the cost otherwise.
    fn phase_objective(&self, phase_one: bool) -> f64 {
        if phase_one {
            self.heads.iter().map(|&j| self.infeasibility(j)).sum()
        } else {
            (0..self.n).map(|j| self.cost[j] * self.x[j]).sum()
        }
    }

    fn result(&self, status: LpStatus, y: &[f64], iterations: usize) -> LpResult {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = self.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
        let optimal = status == LpStatus::Optimal;
        let duals = if optimal { y.to_vec() } else { vec![0.0; self.m] };
        let reduced_costs = (0..self.n)
            .map(|j| {
                if !optimal || self.status[j] == VarStatus::Basic {
                    0.0
                } else {
                    self.reduced_cost(j, y, false)
                }
            })
            .collect();
        LpResult {
            status,
            x,
            objective,
            duals,
            reduced_costs,
            basis: self.basis(),
            iterations,
        }
    }
}
