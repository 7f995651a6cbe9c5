use super::{BncError, CortesBackend, Cut, CutFamily, CutPolicy};
use crate::instance::Instance;
use crate::models::{Formulation, MipModel, VarKey};
use crate::transport::{empty_duals, solve_transport, solve_transport_lp, TransportError, TransportInstance};
use rayon::prelude::*;

/// Every `y_m - z_ijm >= 0` violated by more than `tol`, ordered by `(i, j, m)`.
pub fn separate_zy2(x: &[f64], model: &MipModel, inst: &Instance, tol: f64) -> Vec<Cut> {
    if !model.formulation.is_single_origin() {
        return Vec::new();
    }
    let mut cuts = Vec::new();
    for i in 0..inst.o() {
        for j in 0..inst.d() {
            for m in 0..inst.h() {
                let z = model.vars.col(VarKey::Z(i, j, m));
                let y = model.vars.col(VarKey::Y(m));
                if x[z] - x[y] > tol {
                    cuts.push(Cut {
                        coeffs: vec![(y, 1.0), (z, -1.0)],
                        rhs: 0.0,
                        family: CutFamily::Zy2,
                        origin: None,
                    });
                }
            }
        }
    }
    cuts
}

/// The `h x h` cost matrix `[k][m]` priced by the CORTES cut of pair `(i, j)`.
pub fn cortes_costs(model: &MipModel, inst: &Instance, i: usize, j: usize) -> Vec<Vec<f64>> {
    let h = inst.h();
    (0..h)
        .map(|k| {
            (0..h)
                .map(|m| match model.formulation {
                    Formulation::F1PD => inst.transfer_distribution(i, j, k, m).expect("disaggregated costs"),
                    _ => inst.c(i, j, k, m),
                })
                .collect()
        })
        .collect()
}

fn origin_cut(x: &[f64], model: &MipModel, inst: &Instance, i: usize, policy: &CutPolicy) -> Result<Option<Cut>, TransportError> {
    let (d, h) = (inst.d(), inst.h());
    let cost_col = match model.formulation {
        Formulation::F1PD => model.vars.col(VarKey::Delta(i)),
        _ => model.vars.col(VarKey::Pi(i)),
    };
    let xcols: Vec<usize> = (0..h).map(|k| model.vars.col(VarKey::X(i, k))).collect();
    let supplies: Vec<f64> = xcols.iter().map(|&c| x[c].max(0.0)).collect();
    let total: f64 = supplies.iter().sum();
    let mut x_coef = vec![0.0; h];
    let mut coeffs = Vec::new();
    let mut bound = 0.0;
    for j in 0..d {
        let zcols: Vec<usize> = (0..h).map(|m| model.vars.col(VarKey::Z(i, j, m))).collect();
        let raw: Vec<f64> = zcols.iter().map(|&c| x[c].max(0.0)).collect();
        let zsum: f64 = raw.iter().sum();
        // rescale demands onto the supply total
        let demands: Vec<f64> = if zsum > 0.0 { raw.iter().map(|v| v * total / zsum).collect() } else { raw };
        let costs = cortes_costs(model, inst, i, j);
        let tp = TransportInstance { supplies: supplies.clone(), demands, costs };
        let solved = match policy.backend {
            CortesBackend::Internal => solve_transport(&tp),
            CortesBackend::Lp => solve_transport_lp(&tp),
        };
        let (e, f) = match solved {
            Ok(r) => (r.e, r.f),
            Err(TransportError::EmptyProblem) => empty_duals(&tp.costs, h),
            Err(err) => return Err(err),
        };
        for k in 0..h {
            x_coef[k] += e[k];
        }
        for m in 0..h {
            bound += f[m] * x[zcols[m]];
            if f[m] != 0.0 {
                coeffs.push((zcols[m], -f[m]));
            }
        }
    }
    for k in 0..h {
        bound += x_coef[k] * x[xcols[k]];
    }
    if bound - x[cost_col] <= policy.violation_tol {
        return Ok(None);
    }
    let mut row = vec![(cost_col, 1.0)];
    for k in 0..h {
        if x_coef[k] != 0.0 {
            row.push((xcols[k], -x_coef[k]));
        }
    }
    row.extend(coeffs);
    row.sort_by_key(|&(c, _)| c);
    Ok(Some(Cut {
        coeffs: row,
        rhs: 0.0,
        family: CutFamily::Cortes,
        origin: Some(i),
    }))
}

/// One aggregated cut per origin whose cost variable sits more than the tolerance below
/// the transportation bound at `x`. Cuts come back in origin order whatever the thread count.
pub fn separate_cortes(x: &[f64], model: &MipModel, inst: &Instance, policy: &CutPolicy) -> Result<Vec<Cut>, BncError> {
    if !model.formulation.is_single_origin() {
        return Ok(Vec::new());
    }
    let per_origin: Vec<Result<Option<Cut>, TransportError>> = if policy.threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(policy.threads)
            .build()
            .map_err(|e| BncError::Root(e.to_string()))?;
        pool.install(|| (0..inst.o()).into_par_iter().map(|i| origin_cut(x, model, inst, i, policy)).collect())
    } else {
        (0..inst.o()).map(|i| origin_cut(x, model, inst, i, policy)).collect()
    };
    let mut cuts = Vec::new();
    for r in per_origin {
        if let Some(c) = r? {
            cuts.push(c);
        }
    }
    Ok(cuts)
}
