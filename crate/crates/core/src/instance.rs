//! Problem data: AP-format ingestion, cost models and seeded synthetic instances.
//!
//! An [`Instance`] couples three index sets (origins `O`, destinations `D`,
//! candidate hubs `H`) with the hub budget `p`, the allocation limits `r`
//! (per origin) and `s` (per destination), and a [`CostModel`] that prices the
//! route `i -> k -> m -> j` for every quadruple.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("expected {expected} tokens, found {found} (token {position} missing)")]
    TokenCount {
        expected: usize,
        found: usize,
        position: usize,
    },
    #[error("token {position} is a negative flow ({value})")]
    NegativeFlow { position: usize, value: f64 },
    #[error("token {position} ('{token}') is not numeric")]
    NonNumericToken { position: usize, token: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("index out of range: ({i}, {j}, {k}, {m})")]
    IndexRange {
        i: usize,
        j: usize,
        k: usize,
        m: usize,
    },
    #[error("malformed cost data: {0}")]
    Shape(String),
    #[error("invalid instance json: {0}")]
    Json(String),
}

/// Sites read from an AP-style file: coordinates plus an origin-destination flow matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSites {
    pub n: usize,
    pub coords: Vec<(f64, f64)>,
    /// `flows[i][j]` is the amount sent from site `i` to site `j`.
    pub flows: Vec<Vec<f64>>,
    /// Numeric tokens found after the flow matrix, kept verbatim.
    pub trailing_params: Vec<f64>,
}

fn parse_token(tokens: &[&str], position: usize) -> Result<f64, ParseError> {
    let token = tokens.get(position).ok_or(ParseError::TokenCount {
        expected: position + 1,
        found: tokens.len(),
        position,
    })?;
    match token.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(ParseError::NonNumericToken {
            position,
            token: token.to_string(),
        }),
    }
}

/// Parses the whitespace-separated AP layout: `n`, then `n` coordinate pairs,
/// then the `n x n` flow matrix in row-major order. Any numeric tokens after
/// the matrix land in `trailing_params`.
pub fn parse_ap(text: &str) -> Result<RawSites, ParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let first = tokens.first().ok_or(ParseError::TokenCount {
        expected: 1,
        found: 0,
        position: 0,
    })?;
    let n: usize = first.parse().map_err(|_| ParseError::NonNumericToken {
        position: 0,
        token: first.to_string(),
    })?;
    let expected = 1 + 2 * n + n * n;
    if tokens.len() < expected {
        return Err(ParseError::TokenCount {
            expected,
            found: tokens.len(),
            position: tokens.len(),
        });
    }
    let mut pos = 1;
    let mut coords = Vec::with_capacity(n);
    for _ in 0..n {
        let x = parse_token(&tokens, pos)?;
        let y = parse_token(&tokens, pos + 1)?;
        coords.push((x, y));
        pos += 2;
    }
    let mut flows = vec![vec![0.0; n]; n];
    for row in flows.iter_mut() {
        for cell in row.iter_mut() {
            let v = parse_token(&tokens, pos)?;
            if v < 0.0 {
                return Err(ParseError::NegativeFlow { position: pos, value: v });
            }
            *cell = v;
            pos += 1;
        }
    }
    let trailing_params = (pos..tokens.len())
        .map(|p| parse_token(&tokens, p))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RawSites {
        n,
        coords,
        flows,
        trailing_params,
    })
}

/// Writes `sites` back in the layout accepted by [`parse_ap`].
pub fn serialize_ap(sites: &RawSites) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}", sites.n);
    for (x, y) in &sites.coords {
        let _ = writeln!(out, "{x} {y}");
    }
    for row in &sites.flows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    if !sites.trailing_params.is_empty() {
        let line: Vec<String> = sites.trailing_params.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowMode {
    Raw,
    /// Divide every flow by the matrix total so flows sum to one.
    NormalizeTotal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingConfig {
    pub flow_mode: FlowMode,
    pub distance_factor: f64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self {
            flow_mode: FlowMode::Raw,
            distance_factor: 1.0,
        }
    }
}

/// Discount factors and scaling used for AP data unless overridden.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApPreset {
    pub scaling: ScalingConfig,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ApPreset {
    /// Normalized flows, raw Euclidean distances, collection 3, transfer 0.75, distribution 2.
    pub const CLASSIC: ApPreset = ApPreset {
        scaling: ScalingConfig {
            flow_mode: FlowMode::NormalizeTotal,
            distance_factor: 1.0,
        },
        gamma: 3.0,
        alpha: 0.75,
        beta: 2.0,
    };

    pub fn by_name(name: &str) -> Option<ApPreset> {
        match name {
            "ap-classic" => Some(Self::CLASSIC),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostModel {
    /// Full tensor, flattened as `((i * d + j) * h + k) * h + m`.
    General { tensor: Vec<f64> },
    /// `C[i][j][k][m] = w[i][j] * (gamma * c[i][k] + alpha * c[k][m] + beta * c[m][j])`
    /// with every index translated into the shared site set through the maps.
    Disaggregated {
        w: Vec<Vec<f64>>,
        c: Vec<Vec<f64>>,
        origin_site: Vec<usize>,
        dest_site: Vec<usize>,
        hub_site: Vec<usize>,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
}

/// How strictly `p` is checked against `h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeCheck {
    /// `2 <= p <= h - 1`.
    #[default]
    Strict,
    /// `1 <= p <= h`, for degenerate test instances.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Instance {
    o: usize,
    d: usize,
    h: usize,
    p: usize,
    r: usize,
    s: usize,
    cost: CostModel,
}

#[derive(Deserialize)]
struct InstanceRecord {
    o: usize,
    d: usize,
    h: usize,
    p: usize,
    r: usize,
    s: usize,
    cost: CostModel,
}

fn check_nonneg(name: &str, v: f64) -> Result<(), InstanceError> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(InstanceError::Shape(format!("{name} must be finite and nonnegative, got {v}")));
    }
    Ok(())
}

impl Instance {
    pub fn new(
        o: usize,
        d: usize,
        h: usize,
        p: usize,
        r: usize,
        s: usize,
        cost: CostModel,
        check: RangeCheck,
    ) -> Result<Self, InstanceError> {
        if o == 0 || d == 0 || h == 0 {
            return Err(InstanceError::ParameterRange("o, d and h must be positive".into()));
        }
        let p_ok = match check {
            RangeCheck::Strict => p >= 2 && p < h,
            RangeCheck::Relaxed => p >= 1 && p <= h,
        };
        if !p_ok {
            return Err(InstanceError::ParameterRange(format!("p = {p} with h = {h}")));
        }
        if r < 1 || r > p {
            return Err(InstanceError::ParameterRange(format!("r = {r} must lie in [1, p = {p}]")));
        }
        if s < 1 || s > p {
            return Err(InstanceError::ParameterRange(format!("s = {s} must lie in [1, p = {p}]")));
        }
        match &cost {
            CostModel::General { tensor } => {
                if tensor.len() != o * d * h * h {
                    return Err(InstanceError::Shape(format!(
                        "tensor has {} entries, expected {}",
                        tensor.len(),
                        o * d * h * h
                    )));
                }
                for &v in tensor {
                    check_nonneg("tensor entry", v)?;
                }
            }
            CostModel::Disaggregated {
                w,
                c,
                origin_site,
                dest_site,
                hub_site,
                alpha,
                beta,
                gamma,
            } => {
                for (name, v) in [("alpha", *alpha), ("beta", *beta), ("gamma", *gamma)] {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(InstanceError::ParameterRange(format!("{name} = {v}")));
                    }
                }
                if alpha > beta || alpha > gamma {
                    return Err(InstanceError::ParameterRange(format!(
                        "need 0 <= alpha <= beta, gamma (alpha = {alpha}, beta = {beta}, gamma = {gamma})"
                    )));
                }
                if w.len() != o || w.iter().any(|row| row.len() != d) {
                    return Err(InstanceError::Shape(format!("w must be {o} x {d}")));
                }
                let n = c.len();
                if c.iter().any(|row| row.len() != n) {
                    return Err(InstanceError::Shape("c must be square".into()));
                }
                if origin_site.len() != o || dest_site.len() != d || hub_site.len() != h {
                    return Err(InstanceError::Shape("site maps must match o, d, h".into()));
                }
                if origin_site.iter().chain(dest_site).chain(hub_site).any(|&s| s >= n) {
                    return Err(InstanceError::Shape("site map points outside c".into()));
                }
                for row in w {
                    for &v in row {
                        check_nonneg("flow", v)?;
                    }
                }
                for (a, row) in c.iter().enumerate() {
                    for &v in row {
                        check_nonneg("distance", v)?;
                    }
                    if row[a] != 0.0 {
                        return Err(InstanceError::Shape(format!("c[{a}][{a}] must be zero")));
                    }
                }
            }
        }
        Ok(Self { o, d, h, p, r, s, cost })
    }

    pub fn o(&self) -> usize {
        self.o
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn h(&self) -> usize {
        self.h
    }
    pub fn p(&self) -> usize {
        self.p
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn s(&self) -> usize {
        self.s
    }
    pub fn cost_model(&self) -> &CostModel {
        &self.cost
    }

    pub fn is_disaggregated(&self) -> bool {
        matches!(self.cost, CostModel::Disaggregated { .. })
    }

    /// True when `O`, `D` and `H` are the same site set in the same order.
    pub fn has_identical_sets(&self) -> bool {
        if self.o != self.d || self.d != self.h {
            return false;
        }
        match &self.cost {
            CostModel::General { .. } => true,
            CostModel::Disaggregated {
                origin_site,
                dest_site,
                hub_site,
                ..
            } => origin_site == dest_site && dest_site == hub_site,
        }
    }

    /// Same data with different `p`, `r`, `s`.
    pub fn with_params(&self, p: usize, r: usize, s: usize, check: RangeCheck) -> Result<Self, InstanceError> {
        Self::new(self.o, self.d, self.h, p, r, s, self.cost.clone(), check)
    }

    /// Checked access to `C[i][j][k][m]`.
    pub fn cost(&self, i: usize, j: usize, k: usize, m: usize) -> Result<f64, InstanceError> {
        if i >= self.o || j >= self.d || k >= self.h || m >= self.h {
            return Err(InstanceError::IndexRange { i, j, k, m });
        }
        Ok(self.c(i, j, k, m))
    }

    /// Unchecked `C[i][j][k][m]` for hot loops.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize, m: usize) -> f64 {
        match &self.cost {
            CostModel::General { tensor } => tensor[((i * self.d + j) * self.h + k) * self.h + m],
            CostModel::Disaggregated {
                w,
                c,
                origin_site,
                dest_site,
                hub_site,
                alpha,
                beta,
                gamma,
            } => {
                let (si, sj) = (origin_site[i], dest_site[j]);
                let (sk, sm) = (hub_site[k], hub_site[m]);
                w[i][j] * (gamma * c[si][sk] + alpha * c[sk][sm] + beta * c[sm][sj])
            }
        }
    }

    /// Transfer plus distribution part `w[i][j] * (alpha * c[k][m] + beta * c[m][j])`.
    /// `None` for general tensors.
    #[inline]
    pub fn transfer_distribution(&self, i: usize, j: usize, k: usize, m: usize) -> Option<f64> {
        match &self.cost {
            CostModel::General { .. } => None,
            CostModel::Disaggregated {
                w,
                c,
                dest_site,
                hub_site,
                alpha,
                beta,
                ..
            } => {
                let (sk, sm) = (hub_site[k], hub_site[m]);
                Some(w[i][j] * (alpha * c[sk][sm] + beta * c[sm][dest_site[j]]))
            }
        }
    }

    /// Collection cost per unit flow, `gamma * c[i][k]`. `None` for general tensors.
    pub fn collection_unit(&self, i: usize, k: usize) -> Option<f64> {
        match &self.cost {
            CostModel::General { .. } => None,
            CostModel::Disaggregated {
                c,
                origin_site,
                hub_site,
                gamma,
                ..
            } => Some(gamma * c[origin_site[i]][hub_site[k]]),
        }
    }

    /// Total flow leaving origin `i`. `None` for general tensors.
    pub fn outflow(&self, i: usize) -> Option<f64> {
        match &self.cost {
            CostModel::General { .. } => None,
            CostModel::Disaggregated { w, .. } => Some(w[i].iter().sum()),
        }
    }

    /// Materializes the full tensor, evaluating each entry with the same expression as [`Instance::c`].
    pub fn to_general(&self) -> Instance {
        let mut tensor = Vec::with_capacity(self.o * self.d * self.h * self.h);
        for i in 0..self.o {
            for j in 0..self.d {
                for k in 0..self.h {
                    for m in 0..self.h {
                        tensor.push(self.c(i, j, k, m));
                    }
                }
            }
        }
        Instance {
            cost: CostModel::General { tensor },
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn from_json(text: &str, check: RangeCheck) -> Result<Self, InstanceError> {
        let rec: InstanceRecord = serde_json::from_str(text).map_err(|e| InstanceError::Json(e.to_string()))?;
        Self::new(rec.o, rec.d, rec.h, rec.p, rec.r, rec.s, rec.cost, check)
    }
}

/// Turns AP sites into a disaggregated instance with `O = D = H`.
pub fn build_instance(
    raw: &RawSites,
    alpha: f64,
    beta: f64,
    gamma: f64,
    p: usize,
    r: usize,
    s: usize,
    scaling: ScalingConfig,
) -> Result<Instance, InstanceError> {
    build_instance_checked(raw, alpha, beta, gamma, p, r, s, scaling, RangeCheck::Strict)
}

pub fn build_instance_checked(
    raw: &RawSites,
    alpha: f64,
    beta: f64,
    gamma: f64,
    p: usize,
    r: usize,
    s: usize,
    scaling: ScalingConfig,
    check: RangeCheck,
) -> Result<Instance, InstanceError> {
    let n = raw.n;
    if raw.coords.len() != n || raw.flows.len() != n || raw.flows.iter().any(|r| r.len() != n) {
        return Err(InstanceError::Shape("site data does not match n".into()));
    }
    if !(scaling.distance_factor.is_finite() && scaling.distance_factor >= 0.0) {
        return Err(InstanceError::ParameterRange(format!(
            "distance factor {}",
            scaling.distance_factor
        )));
    }
    let c = euclidean_matrix(&raw.coords, scaling.distance_factor);
    let w = match scaling.flow_mode {
        FlowMode::Raw => raw.flows.clone(),
        FlowMode::NormalizeTotal => {
            let total: f64 = raw.flows.iter().flatten().sum();
            if total <= 0.0 {
                return Err(InstanceError::ParameterRange("flow total is zero".into()));
            }
            raw.flows.iter().map(|row| row.iter().map(|v| v / total).collect()).collect()
        }
    };
    let ident: Vec<usize> = (0..n).collect();
    Instance::new(
        n,
        n,
        n,
        p,
        r,
        s,
        CostModel::Disaggregated {
            w,
            c,
            origin_site: ident.clone(),
            dest_site: ident.clone(),
            hub_site: ident,
            alpha,
            beta,
            gamma,
        },
        check,
    )
}

fn euclidean_matrix(coords: &[(f64, f64)], factor: f64) -> Vec<Vec<f64>> {
    coords
        .iter()
        .map(|&(ax, ay)| {
            coords
                .iter()
                .map(|&(bx, by)| (ax - bx).hypot(ay - by) * factor)
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostKind {
    General,
    Disaggregated,
}

/// Seeded synthetic instance.
///
/// The disaggregated kind places `max(o, d, h)` sites uniformly on `[0, 100]^2`,
/// maps origin, destination and hub `t` to site `t`, draws flows from `[0, 1]`
/// and uses the AP discount triple `(gamma, alpha, beta) = (3, 0.75, 2)`.
/// The general kind draws every tensor entry from `[0, 100]`.
pub fn random_instance(
    seed: u64,
    o: usize,
    d: usize,
    h: usize,
    p: usize,
    r: usize,
    s: usize,
    kind: CostKind,
) -> Result<Instance, InstanceError> {
    random_instance_checked(seed, o, d, h, p, r, s, kind, RangeCheck::Strict)
}

pub fn random_instance_checked(
    seed: u64,
    o: usize,
    d: usize,
    h: usize,
    p: usize,
    r: usize,
    s: usize,
    kind: CostKind,
    check: RangeCheck,
) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cost = match kind {
        CostKind::General => CostModel::General {
            tensor: (0..o * d * h * h).map(|_| rng.gen_range(0.0..=100.0)).collect(),
        },
        CostKind::Disaggregated => {
            let n = o.max(d).max(h);
            let coords: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.gen_range(0.0..=100.0), rng.gen_range(0.0..=100.0)))
                .collect();
            let w = (0..o).map(|_| (0..d).map(|_| rng.gen_range(0.0..=1.0)).collect()).collect();
            let preset = ApPreset::CLASSIC;
            CostModel::Disaggregated {
                w,
                c: euclidean_matrix(&coords, 1.0),
                origin_site: (0..o).collect(),
                dest_site: (0..d).collect(),
                hub_site: (0..h).collect(),
                alpha: preset.alpha,
                beta: preset.beta,
                gamma: preset.gamma,
            }
        }
    };
    Instance::new(o, d, h, p, r, s, cost, check)
}
