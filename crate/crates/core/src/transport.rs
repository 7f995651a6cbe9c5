//! Balanced transportation problems solved by successive shortest paths, returning optimal prices.

use crate::lp::{solve_lp, LinearProgram, LpStatus, Sense};
use thiserror::Error;

const MASS_EPS: f64 = 1e-12;
const BALANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("supply total {supply} differs from demand total {demand}")]
    Unbalanced { supply: f64, demand: f64 },
    #[error("no positive supply or demand left")]
    EmptyProblem,
    #[error("negative mass {value} at {side} {index}")]
    NegativeMass { side: &'static str, index: usize, value: f64 },
    #[error("cost matrix shape does not match supplies and demands")]
    Shape,
    #[error("lp backend failed: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportInstance {
    pub supplies: Vec<f64>,
    pub demands: Vec<f64>,
    pub costs: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportDuals {
    /// Row prices.
    pub e: Vec<f64>,
    /// Column prices.
    pub f: Vec<f64>,
    pub objective: f64,
    pub flow: Vec<Vec<f64>>,
}

/// A problem with its zero-mass rows and columns dropped, plus maps back to original indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduced {
    pub tp: TransportInstance,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

fn clamp(v: &[f64], side: &'static str) -> Result<Vec<f64>, TransportError> {
    v.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() || value < -BALANCE_TOL {
                Err(TransportError::NegativeMass { side, index, value })
            } else {
                Ok(value.max(0.0))
            }
        })
        .collect()
}

fn checked(tp: &TransportInstance) -> Result<TransportInstance, TransportError> {
    if tp.costs.len() != tp.supplies.len()
        || tp.costs.iter().any(|r| r.len() != tp.demands.len() || r.iter().any(|c| !c.is_finite()))
    {
        return Err(TransportError::Shape);
    }
    let supplies = clamp(&tp.supplies, "supply")?;
    let demands = clamp(&tp.demands, "demand")?;
    let (s, d): (f64, f64) = (supplies.iter().sum(), demands.iter().sum());
    if (s - d).abs() > BALANCE_TOL {
        return Err(TransportError::Unbalanced { supply: s, demand: d });
    }
    Ok(TransportInstance {
        supplies,
        demands,
        costs: tp.costs.clone(),
    })
}

pub fn reduce_degenerate(tp: &TransportInstance) -> Result<Reduced, TransportError> {
    let rows: Vec<usize> = (0..tp.supplies.len()).filter(|&k| tp.supplies[k] > MASS_EPS).collect();
    let cols: Vec<usize> = (0..tp.demands.len()).filter(|&m| tp.demands[m] > MASS_EPS).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(TransportError::EmptyProblem);
    }
    let reduced = TransportInstance {
        supplies: rows.iter().map(|&k| tp.supplies[k]).collect(),
        demands: cols.iter().map(|&m| tp.demands[m]).collect(),
        costs: rows.iter().map(|&k| cols.iter().map(|&m| tp.costs[k][m]).collect()).collect(),
    };
    Ok(Reduced { tp: reduced, rows, cols })
}

/// Min-cost flow on the complete bipartite graph; returns flow and node potentials.
fn successive_shortest_paths(tp: &TransportInstance) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let (nr, nc) = (tp.supplies.len(), tp.demands.len());
    let c = &tp.costs;
    let mut flow = vec![vec![0.0; nc]; nr];
    let mut supply = tp.supplies.clone();
    let mut demand = tp.demands.clone();
    // node potentials: rows then columns, keeping every residual reduced cost non-negative
    let mut pr = vec![0.0; nr];
    let mut pc: Vec<f64> = (0..nc).map(|m| (0..nr).map(|k| c[k][m]).fold(f64::INFINITY, f64::min)).collect();
    loop {
        if !supply.iter().any(|&s| s > MASS_EPS) || !demand.iter().any(|&d| d > MASS_EPS) {
            break;
        }
        // dense Dijkstra from every row with supply left; node u < nr is a row, else column u - nr
        let nn = nr + nc;
        let mut dist = vec![f64::INFINITY; nn];
        let mut pred = vec![usize::MAX; nn];
        let mut done = vec![false; nn];
        for k in 0..nr {
            if supply[k] > MASS_EPS {
                dist[k] = 0.0;
            }
        }
        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            for v in 0..nn {
                if !done[v] && dist[v] < f64::INFINITY && (u == usize::MAX || dist[v] < dist[u]) {
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u >= nr && demand[u - nr] > MASS_EPS {
                target = u;
                break;
            }
            if u < nr {
                for m in 0..nc {
                    let v = nr + m;
                    if done[v] {
                        continue;
                    }
                    let rc = (c[u][m] + pr[u] - pc[m]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        pred[v] = u;
                    }
                }
            } else {
                let m = u - nr;
                for k in 0..nr {
                    if done[k] || flow[k][m] <= MASS_EPS {
                        continue;
                    }
                    let rc = (-c[k][m] + pc[m] - pr[k]).max(0.0);
                    if dist[u] + rc < dist[k] {
                        dist[k] = dist[u] + rc;
                        pred[k] = u;
                    }
                }
            }
        }
        if target == usize::MAX {
            break;
        }
        let reach = dist[target];
        for k in 0..nr {
            pr[k] += dist[k].min(reach);
        }
        for m in 0..nc {
            pc[m] += dist[nr + m].min(reach);
        }
        // bottleneck along the path
        let mut amount = demand[target - nr];
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u >= nr {
                amount = amount.min(flow[v][u - nr]);
            }
            v = u;
        }
        amount = amount.min(supply[v]);
        let source = v;
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u < nr {
                flow[u][v - nr] += amount;
            } else {
                flow[v][u - nr] -= amount;
                if flow[v][u - nr] < MASS_EPS {
                    flow[v][u - nr] = 0.0;
                }
            }
            v = u;
        }
        supply[source] -= amount;
        demand[target - nr] -= amount;
    }
    let e = pr.iter().map(|p| -p).collect();
    (flow, e, pc)
}

/// Extends prices from the active rows and columns to the full problem, then fixes the translation.
fn finish(tp: &TransportInstance, mut e: Vec<Option<f64>>, mut f: Vec<Option<f64>>) -> (Vec<f64>, Vec<f64>) {
    let (nr, nc) = (tp.supplies.len(), tp.demands.len());
    for m in 0..nc {
        if f[m].is_none() {
            let v = (0..nr)
                .filter_map(|k| e[k].map(|ek| tp.costs[k][m] - ek))
                .fold(f64::INFINITY, f64::min);
            f[m] = Some(v);
        }
    }
    for k in 0..nr {
        if e[k].is_none() {
            let v = (0..nc).map(|m| tp.costs[k][m] - f[m].unwrap()).fold(f64::INFINITY, f64::min);
            e[k] = Some(v);
        }
    }
    let mut e: Vec<f64> = e.into_iter().map(Option::unwrap).collect();
    let mut f: Vec<f64> = f.into_iter().map(Option::unwrap).collect();
    if let Some(k0) = (0..nr).find(|&k| tp.supplies[k] > MASS_EPS) {
        let t = e[k0];
        e.iter_mut().for_each(|v| *v -= t);
        f.iter_mut().for_each(|v| *v += t);
    }
    (e, f)
}

fn objective_of(tp: &TransportInstance, e: &[f64], f: &[f64]) -> f64 {
    let a: f64 = e.iter().zip(&tp.supplies).map(|(x, s)| x * s).sum();
    let b: f64 = f.iter().zip(&tp.demands).map(|(x, d)| x * d).sum();
    a + b
}

/// Optimal flow and prices. Prices are normalized so the first row with supply has price 0.
pub fn solve_transport(tp: &TransportInstance) -> Result<TransportDuals, TransportError> {
    let tp = checked(tp)?;
    let red = reduce_degenerate(&tp)?;
    let (rflow, re, rf) = successive_shortest_paths(&red.tp);
    let (nr, nc) = (tp.supplies.len(), tp.demands.len());
    let mut e = vec![None; nr];
    let mut f = vec![None; nc];
    let mut flow = vec![vec![0.0; nc]; nr];
    for (a, &k) in red.rows.iter().enumerate() {
        e[k] = Some(re[a]);
        for (b, &m) in red.cols.iter().enumerate() {
            flow[k][m] = rflow[a][b];
        }
    }
    for (b, &m) in red.cols.iter().enumerate() {
        f[m] = Some(rf[b]);
    }
    let (e, f) = finish(&tp, e, f);
    let objective = objective_of(&tp, &e, &f);
    Ok(TransportDuals { e, f, objective, flow })
}

/// Prices for a problem with no mass: zero row prices and the cheapest entry of each column.
pub fn empty_duals(costs: &[Vec<f64>], n_cols: usize) -> (Vec<f64>, Vec<f64>) {
    let e = vec![0.0; costs.len()];
    let f = (0..n_cols)
        .map(|m| costs.iter().map(|r| r[m]).fold(f64::INFINITY, f64::min))
        .map(|v| if v.is_finite() { v } else { 0.0 })
        .collect();
    (e, f)
}

/// The primal transportation LP: one column per cell, row index `k`, column index `m`.
pub fn primal_lp(tp: &TransportInstance) -> LinearProgram {
    let (nr, nc) = (tp.supplies.len(), tp.demands.len());
    let mut lp = LinearProgram::new();
    for k in 0..nr {
        for m in 0..nc {
            lp.add_var(tp.costs[k][m], 0.0, f64::INFINITY);
        }
    }
    for k in 0..nr {
        lp.add_constraint((0..nc).map(|m| (k * nc + m, 1.0)).collect(), Sense::Eq, tp.supplies[k]);
    }
    for m in 0..nc {
        lp.add_constraint((0..nr).map(|k| (k * nc + m, 1.0)).collect(), Sense::Eq, tp.demands[m]);
    }
    lp
}

/// Solves the price problem `max e.s + f.d, e_k + f_m <= c_km` directly with the simplex.
pub fn solve_transport_lp(tp: &TransportInstance) -> Result<TransportDuals, TransportError> {
    let tp = checked(tp)?;
    reduce_degenerate(&tp)?;
    let (nr, nc) = (tp.supplies.len(), tp.demands.len());
    let mut lp = LinearProgram::new();
    for k in 0..nr {
        lp.add_var(-tp.supplies[k], f64::NEG_INFINITY, f64::INFINITY);
    }
    for m in 0..nc {
        lp.add_var(-tp.demands[m], f64::NEG_INFINITY, f64::INFINITY);
    }
    for k in 0..nr {
        for m in 0..nc {
            lp.add_constraint(vec![(k, 1.0), (nr + m, 1.0)], Sense::Le, tp.costs[k][m]);
        }
    }
    let res = solve_lp(&lp, None).map_err(|e| TransportError::Backend(e.to_string()))?;
    if res.status != LpStatus::Optimal {
        return Err(TransportError::Backend(format!("price LP ended {:?}", res.status)));
    }
    // row duals of a `<=` row are non-positive; the flow is their negation
    let flow = (0..nr)
        .map(|k| (0..nc).map(|m| (-res.duals[k * nc + m]).max(0.0)).collect())
        .collect();
    let e: Vec<Option<f64>> = res.x[..nr].iter().map(|&v| Some(v)).collect();
    let f: Vec<Option<f64>> = res.x[nr..].iter().map(|&v| Some(v)).collect();
    let (e, f) = finish(&tp, e, f);
    let objective = objective_of(&tp, &e, &f);
    Ok(TransportDuals { e, f, objective, flow })
}
