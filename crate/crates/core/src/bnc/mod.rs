//! Branch-and-cut over [`MipModel`](crate::models::MipModel) with the two root cut families.

mod separate;
mod tree;

pub use separate::{cortes_costs, separate_cortes, separate_zy2};
pub use tree::{branch_and_cut, root_cut_loop, RootLoop};

use crate::lp::LpError;
use crate::models::ModelError;
use crate::oracle::HubSolution;
use crate::transport::TransportError;
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BncError {
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("root relaxation is {0}")]
    Root(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CutFamily {
    /// `y_m - z_ijm >= 0`.
    Zy2,
    /// Per-origin lifting of the transportation lower bound on the origin's routing cost.
    Cortes,
}

/// A `>=` row over model columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    pub family: CutFamily,
    pub origin: Option<usize>,
}

impl Cut {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// `rhs - activity`, positive when `x` violates the cut.
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.rhs - self.activity(x)
    }

    pub(crate) fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for &(j, a) in &self.coeffs {
            j.hash(&mut h);
            a.to_bits().hash(&mut h);
        }
        self.rhs.to_bits().hash(&mut h);
        h.finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CortesBackend {
    /// Successive shortest paths on each transportation problem.
    Internal,
    /// The simplex on the price problem.
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutFamilies {
    pub zy2: bool,
    pub cortes: bool,
}

impl CutFamilies {
    pub const NONE: Self = Self { zy2: false, cortes: false };
    pub const ZY2: Self = Self { zy2: true, cortes: false };
    pub const CORTES: Self = Self { zy2: false, cortes: true };
    pub const BOTH: Self = Self { zy2: true, cortes: true };

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Self::NONE),
            "zy2" => Some(Self::ZY2),
            "cortes" => Some(Self::CORTES),
            "both" => Some(Self::BOTH),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match (self.zy2, self.cortes) {
            (false, false) => "none",
            (true, false) => "zy2",
            (false, true) => "cortes",
            (true, true) => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutPolicy {
    pub max_root_iterations: usize,
    pub violation_tol: f64,
    pub zy2_min_violations: usize,
    /// Separate ZY2 at every tree node as well as at the root.
    pub allow_tree_cuts: bool,
    pub families: CutFamilies,
    pub backend: CortesBackend,
    /// Worker threads for CORTES separation; 1 keeps everything on the calling thread.
    pub threads: usize,
}

impl Default for CutPolicy {
    fn default() -> Self {
        Self {
            max_root_iterations: 5,
            violation_tol: 0.01,
            zy2_min_violations: 100,
            allow_tree_cuts: false,
            families: CutFamilies::BOTH,
            backend: CortesBackend::Internal,
            threads: 1,
        }
    }
}

impl CutPolicy {
    pub fn with_families(families: CutFamilies) -> Self {
        Self {
            families,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub time_seconds: Option<f64>,
    pub nodes: Option<usize>,
    /// Stop once `(FUB - FLB) / |FUB|` is at most this.
    pub rel_gap: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            time_seconds: Some(7200.0),
            nodes: None,
            rel_gap: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Root relaxation before any cut.
    pub lp_bound: f64,
    /// Root bound after the cut loop.
    pub ilb: f64,
    pub flb: f64,
    pub fub: Option<f64>,
    /// Percent, `100 (FUB - FLB) / max(|FUB|, 1e-12)`.
    pub gap: Option<f64>,
    pub nodes: usize,
    pub cuts_zy2: usize,
    pub cuts_cortes: usize,
    #[serde(skip)]
    pub wall_seconds: f64,
}

pub fn gap_percent(fub: f64, flb: f64) -> f64 {
    100.0 * (fub - flb) / fub.abs().max(1e-12)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutAudit {
    pub checked: usize,
    pub violated: usize,
}

#[derive(Debug, Clone)]
pub struct BncOutcome {
    pub report: SolveReport,
    pub solution: Option<HubSolution>,
    pub cuts: Vec<Cut>,
    /// Root bound after each cut round, starting with the plain relaxation.
    pub root_bounds: Vec<f64>,
    pub audit: Option<CutAudit>,
    pub warnings: Vec<String>,
}

/// Checks every cut against the model point of `sol`.
pub fn audit_cuts(cuts: &[Cut], point: &[f64], tol: f64) -> CutAudit {
    CutAudit {
        checked: cuts.len(),
        violated: cuts.iter().filter(|c| c.violation(point) > tol).count(),
    }
}
