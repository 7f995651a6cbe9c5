//! Basis factorization: a sparse LU of the structural part of the basis plus a product-form eta file.
//!
//! With row logicals written as `-e_i`, every basic logical covers one row
//! outright, so only the rows left uncovered and the basic structural
//! columns need a real factorization (the "bump").

pub(crate) struct Eta {
    pos: usize,
    pivot: f64,
    others: Vec<(usize, f64)>,
}

pub(crate) struct Factor {
    m: usize,
    /// Row covered by the logical at each basis position, if any.
    logical_row: Vec<Option<usize>>,
    /// Basis position of the logical covering each row, or `usize::MAX`.
    row_logical_pos: Vec<usize>,
    bump_rows: Vec<usize>,
    bump_pos: Vec<usize>,
    bump_vars: Vec<usize>,
    lu: SparseLu,
    etas: Vec<Eta>,
}

/// One elimination step of the bump: pivot `(row, col)`, the multipliers applied to the
/// rows below it, and the rest of the pivot row.
struct LuStep {
    row: usize,
    col: usize,
    pivot: f64,
    lower: Vec<(usize, f64)>,
    upper: Vec<(usize, f64)>,
}

/// Sparse LU of a square matrix with Markowitz pivot choice under a threshold test.
struct SparseLu {
    n: usize,
    steps: Vec<LuStep>,
}

/// Relative size a pivot must have within its column.
const THRESHOLD: f64 = 0.1;
/// Minimum-count columns inspected per pivot choice.
const SEARCH_COLUMNS: usize = 4;

impl SparseLu {
    /// `entries[q]` holds column `q` as `(row, value)`. On failure returns the dependent
    /// columns and the rows left without a pivot.
    fn new(n: usize, entries: &[Vec<(usize, f64)>], pivot_tol: f64) -> Result<SparseLu, (Vec<usize>, Vec<usize>)> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut col_scale = vec![0.0f64; n];
        for (q, col) in entries.iter().enumerate() {
            for &(r, v) in col {
                if v != 0.0 {
                    rows[r].push((q, v));
                    col_rows[q].push(r);
                    col_scale[q] = col_scale[q].max(v.abs());
                }
            }
        }
        let mut col_count: Vec<usize> = col_rows.iter().map(Vec::len).collect();
        let mut row_active = vec![true; n];
        let mut col_active = vec![true; n];
        let mut dependent = Vec::new();
        let mut steps = Vec::with_capacity(n);
        let mut mark = vec![usize::MAX; n];
        let value_in = |rows: &[Vec<(usize, f64)>], r: usize, c: usize| rows[r].iter().find(|e| e.0 == c).map_or(0.0, |e| e.1);

        let mut remaining = n;
        while remaining > 0 {
            let mut order: Vec<usize> = (0..n).filter(|&c| col_active[c]).collect();
            if order.is_empty() {
                break;
            }
            let min_count = order.iter().map(|&c| col_count[c]).min().unwrap();
            order.retain(|&c| col_count[c] <= min_count + 1);
            order.sort_by_key(|&c| (col_count[c], c));
            order.truncate(SEARCH_COLUMNS);
            // (cost, -|v|, col, row, value)
            let mut best: Option<(usize, f64, usize, usize, f64)> = None;
            let mut dropped = false;
            for &c in &order {
                let cands: Vec<(usize, f64)> = col_rows[c]
                    .iter()
                    .filter(|&&r| row_active[r])
                    .map(|&r| (r, value_in(&rows, r, c)))
                    .collect();
                let colmax = cands.iter().fold(0.0f64, |a, e| a.max(e.1.abs()));
                if colmax <= pivot_tol * col_scale[c].max(1.0) {
                    // no usable pivot: the column depends on those already eliminated
                    dependent.push(c);
                    col_active[c] = false;
                    for &(r, _) in &cands {
                        rows[r].retain(|e| e.0 != c);
                    }
                    remaining -= 1;
                    dropped = true;
                    break;
                }
                let cc = cands.iter().filter(|e| e.1 != 0.0).count();
                for &(r, v) in &cands {
                    if v.abs() < THRESHOLD * colmax {
                        continue;
                    }
                    let cost = (rows[r].len() - 1) * (cc - 1);
                    let better = match best {
                        None => true,
                        Some((bc, bv, ..)) => cost < bc || (cost == bc && -v.abs() < bv),
                    };
                    if better {
                        best = Some((cost, -v.abs(), c, r, v));
                    }
                }
            }
            if dropped {
                continue;
            }
            let Some((_, _, pc, pr, piv)) = best else { break };
            row_active[pr] = false;
            col_active[pc] = false;
            remaining -= 1;
            let prow = std::mem::take(&mut rows[pr]);
            let upper: Vec<(usize, f64)> = prow.iter().copied().filter(|e| e.0 != pc).collect();
            for &(c, _) in &upper {
                col_count[c] -= 1;
            }
            let mut lower = Vec::new();
            let targets: Vec<usize> = col_rows[pc].iter().copied().filter(|&r| row_active[r]).collect();
            for r in targets {
                let a = value_in(&rows, r, pc);
                if a == 0.0 {
                    rows[r].retain(|e| e.0 != pc);
                    continue;
                }
                let mult = a / piv;
                lower.push((r, mult));
                let row = &mut rows[r];
                for (idx, e) in row.iter().enumerate() {
                    mark[e.0] = idx;
                }
                for &(c, v) in &upper {
                    if mark[c] != usize::MAX {
                        row[mark[c]].1 -= mult * v;
                    } else {
                        row.push((c, -mult * v));
                        col_rows[c].push(r);
                        col_count[c] += 1;
                    }
                }
                for e in row.iter() {
                    mark[e.0] = usize::MAX;
                }
                row.retain(|e| e.0 != pc);
            }
            steps.push(LuStep {
                row: pr,
                col: pc,
                pivot: piv,
                lower,
                upper,
            });
        }
        if !dependent.is_empty() || steps.len() < n {
            let pivoted: std::collections::HashSet<usize> = steps.iter().map(|s| s.col).collect();
            for c in 0..n {
                if !pivoted.contains(&c) && !dependent.contains(&c) {
                    dependent.push(c);
                }
            }
            dependent.sort_unstable();
            let free_rows = (0..n).filter(|&r| row_active[r]).collect();
            return Err((dependent, free_rows));
        }
        Ok(SparseLu { n, steps })
    }

    /// Solves `A x = b` with `b` indexed by row; the result is indexed by column.
    fn solve(&self, b: &mut [f64]) -> Vec<f64> {
        for st in &self.steps {
            let v = b[st.row];
            if v != 0.0 {
                for &(r, mult) in &st.lower {
                    b[r] -= mult * v;
                }
            }
        }
        let mut x = vec![0.0; self.n];
        for st in self.steps.iter().rev() {
            let mut acc = b[st.row];
            for &(c, v) in &st.upper {
                acc -= v * x[c];
            }
            x[st.col] = acc / st.pivot;
        }
        x
    }

    /// Solves `A^T y = c` with `c` indexed by column; the result is indexed by row.
    fn solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        let mut y = vec![0.0; self.n];
        for st in &self.steps {
            let w = c[st.col] / st.pivot;
            y[st.row] = w;
            if w != 0.0 {
                for &(col, v) in &st.upper {
                    c[col] -= v * w;
                }
            }
        }
        for st in self.steps.iter().rev() {
            let mut acc = y[st.row];
            for &(r, mult) in &st.lower {
                acc -= mult * y[r];
            }
            y[st.row] = acc;
        }
        y
    }
}

/// Columns of the bump found linearly dependent, paired with bump rows left without a pivot.
pub(crate) struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

/// Column `var` of `[A | -I]`.
pub(crate) fn column<'a>(cols: &'a [Vec<(usize, f64)>], var: usize) -> ColumnRef<'a> {
    if var < cols.len() {
        ColumnRef::Structural(&cols[var])
    } else {
        ColumnRef::Logical(var - cols.len())
    }
}

pub(crate) enum ColumnRef<'a> {
    Structural(&'a [(usize, f64)]),
    Logical(usize),
}

impl Factor {
    pub fn new(cols: &[Vec<(usize, f64)>], heads: &[usize], m: usize, pivot_tol: f64) -> Result<Factor, Singular> {
        let n = cols.len();
        let mut logical_row = vec![None; m];
        let mut row_logical_pos = vec![usize::MAX; m];
        let mut bump_pos = Vec::new();
        let mut bump_vars = Vec::new();
        for (pos, &var) in heads.iter().enumerate() {
            if var >= n {
                logical_row[pos] = Some(var - n);
                row_logical_pos[var - n] = pos;
            } else {
                bump_pos.push(pos);
                bump_vars.push(var);
            }
        }
        let bump_rows: Vec<usize> = (0..m).filter(|&i| row_logical_pos[i] == usize::MAX).collect();
        let s = bump_vars.len();
        debug_assert_eq!(s, bump_rows.len());
        let mut row_index = vec![usize::MAX; m];
        for (p, &i) in bump_rows.iter().enumerate() {
            row_index[i] = p;
        }
        let entries: Vec<Vec<(usize, f64)>> = bump_vars
            .iter()
            .map(|&var| {
                cols[var]
                    .iter()
                    .filter(|&&(i, _)| row_index[i] != usize::MAX)
                    .map(|&(i, v)| (row_index[i], v))
                    .collect()
            })
            .collect();
        let lu = SparseLu::new(s, &entries, pivot_tol).map_err(|(dep, free)| Singular {
            positions: dep.iter().map(|&q| bump_pos[q]).collect(),
            rows: free.iter().map(|&p| bump_rows[p]).collect(),
        })?;
        Ok(Factor {
            m,
            logical_row,
            row_logical_pos,
            bump_rows,
            bump_pos,
            bump_vars,
            lu,
            etas: Vec::new(),
        })
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    /// Records the basis change at `pos` given the entering column in basis coordinates.
    pub fn push_eta(&mut self, pos: usize, alpha: &[f64]) {
        let others = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &v)| i != pos && v != 0.0)
            .map(|(i, &v)| (i, v))
            .collect();
        self.etas.push(Eta {
            pos,
            pivot: alpha[pos],
            others,
        });
    }

    fn bump_solve(&self, b: &mut [f64]) -> Vec<f64> {
        self.lu.solve(b)
    }

    fn bump_solve_transpose(&self, c: &[f64]) -> Vec<f64> {
        self.lu.solve_transpose(c)
    }

    /// Solves `B x = rhs` for a dense row-space right-hand side; result is indexed by basis position.
    pub fn ftran(&self, cols: &[Vec<(usize, f64)>], rhs: &[f64]) -> Vec<f64> {
        let mut b: Vec<f64> = self.bump_rows.iter().map(|&i| rhs[i]).collect();
        let xs = self.bump_solve(&mut b);
        let mut out = vec![0.0; self.m];
        let mut acc = vec![0.0; self.m];
        for (q, &v) in xs.iter().enumerate() {
            out[self.bump_pos[q]] = v;
            if v != 0.0 {
                for &(i, a) in &cols[self.bump_vars[q]] {
                    acc[i] += a * v;
                }
            }
        }
        for (pos, row) in self.logical_row.iter().enumerate() {
            if let Some(i) = *row {
                out[pos] = acc[i] - rhs[i];
            }
        }
        for eta in &self.etas {
            let xr = out[eta.pos] / eta.pivot;
            out[eta.pos] = xr;
            if xr != 0.0 {
                for &(i, a) in &eta.others {
                    out[i] -= a * xr;
                }
            }
        }
        out
    }

    /// Solves `B^T y = c` for `c` indexed by basis position; result is indexed by row.
    pub fn btran(&self, cols: &[Vec<(usize, f64)>], c: &[f64]) -> Vec<f64> {
        let mut c = c.to_vec();
        for eta in self.etas.iter().rev() {
            let mut acc = c[eta.pos];
            for &(i, a) in &eta.others {
                acc -= c[i] * a;
            }
            c[eta.pos] = acc / eta.pivot;
        }
        let mut y = vec![0.0; self.m];
        for (i, &pos) in self.row_logical_pos.iter().enumerate() {
            if pos != usize::MAX {
                y[i] = -c[pos];
            }
        }
        let rhs: Vec<f64> = self
            .bump_vars
            .iter()
            .enumerate()
            .map(|(q, &var)| {
                let mut v = c[self.bump_pos[q]];
                for &(i, a) in &cols[var] {
                    if self.row_logical_pos[i] != usize::MAX {
                        v -= a * y[i];
                    }
                }
                v
            })
            .collect();
        let ys = self.bump_solve_transpose(&rhs);
        for (p, &i) in self.bump_rows.iter().enumerate() {
            y[i] = ys[p];
        }
        y
    }
}
