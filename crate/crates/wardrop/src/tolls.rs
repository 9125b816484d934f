//! Demand-independent optimal toll (DIOT) constructions.
//!
//! A DIOT is a single toll vector that makes the system optimum the tolled
//! equilibrium for *every* demand vector. On BPR-typed networks the whole
//! family is governed by the per-path sums of `tau_e + beta/(beta+1) t_e`:
//! equal sums across the optimally-used paths of each commodity are necessary,
//! and sums on used paths never exceeding those on unused paths is sufficient.
//!
//! Constructions provided here:
//! - the trivial toll `-beta/(beta+1) t_e`, always a DIOT but non-positive;
//! - a non-negative toll on acyclic multigraphs, obtained by shifting the
//!   trivial toll along a topological order;
//! - a budget-feasible toll whenever some vertex order puts every commodity's
//!   origin before its destination (collected tolls are then never negative);
//! - a feasibility/optimization LP over the path-sum constraint system.

use crate::analysis::UsedPathSet;
use crate::cost::{BprParams, TollVector};
use crate::network::{
    CommodityId, DemandVector, EdgeId, Network, NetworkError, PathSet, VertexId,
};
use crate::simplex::{self, DenseLp, LpOutcome, Relation};
use crate::solver::{solve_optimum, SolveError, SolverConfig};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TollError {
    #[error("edge `{0}` is not BPR-typed for the network degree")]
    NotBpr(String),
    #[error("graph contains a directed cycle")]
    CyclicGraph,
    #[error("no vertex order puts every commodity's origin before its destination")]
    NoValidOrder,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

fn bpr_params(network: &Network) -> Result<Vec<BprParams>, TollError> {
    network
        .edges()
        .iter()
        .map(|e| {
            e.cost
                .bpr_params(network.beta())
                .ok_or_else(|| TollError::NotBpr(e.name.clone()))
        })
        .collect()
}

fn kappa(beta: f64) -> f64 {
    beta / (beta + 1.0)
}

/// The toll `-beta/(beta+1) * t_e` per edge. Cancels each edge's share of
/// the path-sum terms exactly, so it is a DIOT on any BPR-typed network.
pub fn trivial_diot(network: &Network) -> Result<TollVector, TollError> {
    let params = bpr_params(network)?;
    let k = kappa(network.beta());
    Ok(TollVector(params.iter().map(|p| -k * p.t).collect()))
}

/// Certificate of the non-negative construction on an acyclic multigraph.
#[derive(Debug, Clone)]
pub struct DagDiot {
    pub tolls: TollVector,
    /// Topological vertex order used for the shift.
    pub order: Vec<VertexId>,
    /// Per edge: head position minus tail position in `order` (>= 1).
    pub delta: Vec<i64>,
    /// Smallest trivial-toll-to-delta ratio over all edges.
    pub xi: f64,
    /// The applied uniform shift, `max(-xi, 0)`.
    pub chi: f64,
}

/// Shifts the trivial toll by `delta_e * chi` along a topological order.
/// The per-commodity path sums of `delta_e` coincide, so path-sum equalities
/// survive the shift, and the choice of `chi` makes every toll non-negative.
pub fn nonnegative_diot_dag(network: &Network) -> Result<DagDiot, TollError> {
    let trivial = trivial_diot(network)?;
    let order = network
        .topological_sort()
        .map_err(|_| TollError::CyclicGraph)?;
    let mut pos = vec![0i64; network.vertex_count()];
    for (i, v) in order.iter().enumerate() {
        pos[v.0] = i as i64;
    }
    let delta: Vec<i64> = network
        .edges()
        .iter()
        .map(|e| pos[e.head.0] - pos[e.tail.0])
        .collect();
    let xi = trivial
        .0
        .iter()
        .zip(delta.iter())
        .map(|(&tau, &d)| tau / d as f64)
        .fold(f64::INFINITY, f64::min);
    let chi = (-xi).max(0.0);
    let tolls = TollVector(
        trivial
            .0
            .iter()
            .zip(delta.iter())
            .map(|(&tau, &d)| tau + d as f64 * chi)
            .collect(),
    );
    Ok(DagDiot {
        tolls,
        order,
        delta,
        xi,
        chi,
    })
}

/// Certificate of the budget-feasible construction.
#[derive(Debug, Clone)]
pub struct BudgetDiot {
    pub tolls: TollVector,
    /// Vertex order with every commodity's origin before its destination.
    pub order: Vec<VertexId>,
    /// Per edge: head position minus tail position (may be negative).
    pub delta: Vec<i64>,
    /// The applied shift: the smallest value making every per-path toll sum
    /// non-negative.
    pub gamma: f64,
    /// Per commodity: destination position minus origin position (> 0);
    /// every path's `delta` sum telescopes to this.
    pub delta_per_commodity: Vec<i64>,
}

/// Shifts the trivial toll by `delta_e * gamma` along a vertex order that
/// puts each origin before its destination. Every path's toll sum becomes
/// `gamma * Delta_i - kappa * (path t-sum) >= 0`, so collected tolls are
/// non-negative for any feasible flow.
pub fn budget_diot(network: &Network, paths: &PathSet) -> Result<BudgetDiot, TollError> {
    let trivial = trivial_diot(network)?;
    let order = od_order(network).ok_or(TollError::NoValidOrder)?;
    let mut pos = vec![0i64; network.vertex_count()];
    for (i, v) in order.iter().enumerate() {
        pos[v.0] = i as i64;
    }
    let delta: Vec<i64> = network
        .edges()
        .iter()
        .map(|e| pos[e.head.0] - pos[e.tail.0])
        .collect();
    let delta_per_commodity: Vec<i64> = network
        .commodities()
        .iter()
        .map(|c| pos[c.destination.0] - pos[c.origin.0])
        .collect();
    // smallest gamma with gamma * Delta_i >= kappa * t-sum on every path
    let mut gamma: f64 = 0.0;
    for (i, path) in paths.paths().iter().enumerate() {
        let _ = i;
        let shortfall: f64 = -path.edges.iter().map(|&e| trivial.0[e.0]).sum::<f64>();
        let span = delta_per_commodity[path.commodity.0] as f64;
        gamma = gamma.max(shortfall / span);
    }
    let tolls = TollVector(
        trivial
            .0
            .iter()
            .zip(delta.iter())
            .map(|(&tau, &d)| tau + d as f64 * gamma)
            .collect(),
    );
    Ok(BudgetDiot {
        tolls,
        order,
        delta,
        gamma,
        delta_per_commodity,
    })
}

/// A vertex order with every commodity's origin before its destination:
/// topologically sort the auxiliary graph holding one origin->destination
/// arc per commodity, ties to the smallest vertex id. `None` when the OD
/// order constraints are cyclic.
fn od_order(network: &Network) -> Option<Vec<VertexId>> {
    let n = network.vertex_count();
    let mut indegree = vec![0usize; n];
    let mut arcs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for c in network.commodities() {
        arcs[c.origin.0].push(c.destination.0);
        indegree[c.destination.0] += 1;
    }
    let mut heap: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = indegree
        .iter()
        .enumerate()
        .filter(|(_, &d)| d == 0)
        .map(|(v, _)| std::cmp::Reverse(v))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(std::cmp::Reverse(v)) = heap.pop() {
        order.push(VertexId(v));
        for &h in &arcs[v] {
            indegree[h] -= 1;
            if indegree[h] == 0 {
                heap.push(std::cmp::Reverse(h));
            }
        }
    }
    (order.len() == n).then_some(order)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRelation {
    Equal,
    LessEq,
}

/// One path-pair constraint over per-edge toll variables. Shared edges of
/// the two paths cancel, so only their symmetric difference appears.
#[derive(Debug, Clone)]
pub struct ConstraintRow {
    pub coeffs: Vec<(EdgeId, f64)>,
    pub relation: ConstraintRelation,
    pub rhs: f64,
    pub commodity: CommodityId,
    /// Global path indices of the pair: `lhs` is the (optimally) used path.
    pub lhs_path: usize,
    pub rhs_path: usize,
}

#[derive(Debug, Clone)]
pub struct DiotConstraintSystem {
    pub n_edges: usize,
    pub rows: Vec<ConstraintRow>,
}

/// Builds the DIOT constraint system for the given used-path sets:
/// equal path sums for every pair of used paths within a commodity, and
/// used-path sums bounded by every unused path's sum.
pub fn build_constraint_system(
    network: &Network,
    paths: &PathSet,
    used: &UsedPathSet,
) -> Result<DiotConstraintSystem, TollError> {
    let params = bpr_params(network)?;
    let k = kappa(network.beta());
    let mut rows = Vec::new();
    let row = |p: usize, q: usize, relation: ConstraintRelation| {
        let mut coeffs: BTreeMap<usize, f64> = BTreeMap::new();
        let mut rhs = 0.0;
        for &e in &paths.path(p).edges {
            *coeffs.entry(e.0).or_insert(0.0) += 1.0;
            rhs -= k * params[e.0].t;
        }
        for &e in &paths.path(q).edges {
            *coeffs.entry(e.0).or_insert(0.0) -= 1.0;
            rhs += k * params[e.0].t;
        }
        coeffs.retain(|_, c| *c != 0.0);
        ConstraintRow {
            coeffs: coeffs.into_iter().map(|(e, c)| (EdgeId(e), c)).collect(),
            relation,
            rhs,
            commodity: paths.path(p).commodity,
            lhs_path: p,
            rhs_path: q,
        }
    };
    for c in 0..network.commodity_count() {
        let used_paths: Vec<usize> = used.used_paths(CommodityId(c));
        for (i, &p) in used_paths.iter().enumerate() {
            for &q in &used_paths[i + 1..] {
                rows.push(row(p, q, ConstraintRelation::Equal));
            }
        }
        for &p in &used_paths {
            for q in paths.commodity_range(CommodityId(c)) {
                if !used_paths.contains(&q) {
                    rows.push(row(p, q, ConstraintRelation::LessEq));
                }
            }
        }
    }
    Ok(DiotConstraintSystem {
        n_edges: network.edge_count(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpTollObjective {
    Feasibility,
    MinimizeTotalToll,
}

#[derive(Debug, Clone)]
pub struct LpTollOptions {
    pub require_nonnegative: bool,
    pub objective: LpTollObjective,
    /// Edges pinned to a constant; the LP only solves for the rest.
    pub fixed: BTreeMap<EdgeId, f64>,
}

impl Default for LpTollOptions {
    fn default() -> Self {
        LpTollOptions {
            require_nonnegative: false,
            objective: LpTollObjective::Feasibility,
            fixed: BTreeMap::new(),
        }
    }
}

/// An aggregated constraint, implied by the system, that no admissible toll
/// vector can satisfy: `sum(coeff * tau) (=|<=) rhs` with non-negative
/// coefficients and negative right-hand side under `tau >= 0`.
#[derive(Debug, Clone)]
pub struct InfeasibilityCertificate {
    pub coeffs: Vec<(EdgeId, f64)>,
    pub rhs: f64,
    /// Whether only equality rows were combined, making the aggregate an
    /// exact equality.
    pub equality: bool,
}

impl InfeasibilityCertificate {
    pub fn display(&self, network: &Network) -> String {
        let mut lhs = String::new();
        for (i, (e, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                lhs.push_str(" + ");
            }
            if (c - 1.0).abs() > 1e-9 {
                lhs.push_str(&format!("{c:.6}*"));
            }
            lhs.push_str(&format!("tau({})", network.edge(*e).name));
        }
        let rel = if self.equality { "=" } else { "<=" };
        format!("{lhs} {rel} {} required, impossible with tolls >= 0", trim_float(self.rhs))
    }
}

fn trim_float(x: f64) -> String {
    let s = format!("{x:.9}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".to_owned()
    } else {
        s.to_owned()
    }
}

#[derive(Debug, Clone)]
pub enum LpTollResult {
    Feasible(TollVector),
    Infeasible(InfeasibilityCertificate),
    Unbounded,
}

/// Solves the constraint system as a linear program with a dense two-phase
/// simplex (Bland's rule). Unconstrained tolls are split into positive and
/// negative parts; `Unbounded` can only occur under an optimization
/// objective.
pub fn solve_diot_lp(system: &DiotConstraintSystem, options: &LpTollOptions) -> LpTollResult {
    let free: Vec<usize> = (0..system.n_edges)
        .filter(|e| !options.fixed.contains_key(&EdgeId(*e)))
        .collect();
    let col_of = |e: usize| free.iter().position(|&f| f == e);
    let cols_per_var = if options.require_nonnegative { 1 } else { 2 };
    let n_vars = free.len() * cols_per_var;

    let mut rows = Vec::with_capacity(system.rows.len());
    for r in &system.rows {
        let mut coeffs = vec![0.0; n_vars];
        let mut rhs = r.rhs;
        for &(e, c) in &r.coeffs {
            match col_of(e.0) {
                Some(j) => {
                    coeffs[j * cols_per_var] += c;
                    if cols_per_var == 2 {
                        coeffs[j * cols_per_var + 1] -= c;
                    }
                }
                None => rhs -= c * options.fixed[&e],
            }
        }
        let rel = match r.relation {
            ConstraintRelation::Equal => Relation::Eq,
            ConstraintRelation::LessEq => Relation::Le,
        };
        rows.push((coeffs, rel, rhs));
    }

    let mut objective = vec![0.0; n_vars];
    if options.objective == LpTollObjective::MinimizeTotalToll {
        for j in 0..free.len() {
            objective[j * cols_per_var] = 1.0;
            if cols_per_var == 2 {
                objective[j * cols_per_var + 1] = -1.0;
            }
        }
    }

    let lp = DenseLp {
        n_vars,
        rows,
        objective,
    };
    match simplex::solve(&lp) {
        LpOutcome::Optimal { solution } => {
            let mut tolls = vec![0.0; system.n_edges];
            for (e, v) in &options.fixed {
                tolls[e.0] = *v;
            }
            for (j, &e) in free.iter().enumerate() {
                tolls[e] = if cols_per_var == 2 {
                    solution[2 * j] - solution[2 * j + 1]
                } else {
                    solution[j]
                };
            }
            LpTollResult::Feasible(TollVector(tolls))
        }
        LpOutcome::Unbounded => LpTollResult::Unbounded,
        LpOutcome::Infeasible { farkas } => {
            // aggregate the rows with the Farkas multipliers; the result
            // bounds a non-negative combination of tolls by a negative number
            let mut agg = vec![0.0; system.n_edges];
            let mut rhs = 0.0;
            let mut equality = true;
            for (y, r) in farkas.iter().zip(system.rows.iter()) {
                if y.abs() <= 1e-9 {
                    continue;
                }
                if r.relation == ConstraintRelation::LessEq {
                    equality = false;
                }
                let mut row_rhs = r.rhs;
                for &(e, c) in &r.coeffs {
                    if options.fixed.contains_key(&e) {
                        row_rhs -= c * options.fixed[&e];
                    } else {
                        agg[e.0] += y * c;
                    }
                }
                rhs += y * row_rhs;
            }
            // flip so coefficients are non-negative and the bound negative
            let scale = agg.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let scale = if scale > 0.0 { -1.0 / scale } else { -1.0 };
            let coeffs: Vec<(EdgeId, f64)> = agg
                .iter()
                .enumerate()
                .filter(|(_, &v)| v.abs() > 1e-7)
                .map(|(e, &v)| (EdgeId(e), v * scale))
                .collect();
            LpTollResult::Infeasible(InfeasibilityCertificate {
                coeffs,
                rhs: rhs * scale,
                equality,
            })
        }
    }
}

/// Demand-specific marginal-cost pricing: `tau_e = x*_e c'_e(x*_e)` at the
/// system optimum of the given demand.
pub fn marginal_cost_tolls(
    network: &Network,
    paths: &PathSet,
    demand: &DemandVector,
    config: &SolverConfig,
) -> Result<TollVector, TollError> {
    let opt = solve_optimum(network, paths, demand, config)?;
    let beta = network.beta();
    let tolls = network
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            edge.cost
                .load_derivative_product(opt.loads[e].max(0.0), beta)
                .map_err(|_| {
                    TollError::Solve(SolveError::Network(NetworkError::UnknownEdge(
                        edge.name.clone(),
                    )))
                })
        })
        .collect::<Result<Vec<f64>, TollError>>()?;
    Ok(TollVector(tolls))
}

/// Per-path sums of `tau_e + beta/(beta+1) t_e`, the quantity the DIOT
/// conditions constrain.
pub fn path_toll_sums(
    network: &Network,
    paths: &PathSet,
    tolls: &TollVector,
) -> Result<Vec<f64>, TollError> {
    let params = bpr_params(network)?;
    let k = kappa(network.beta());
    Ok(paths
        .paths()
        .iter()
        .map(|p| {
            p.edges
                .iter()
                .map(|&e| tolls[e.0] + k * params[e.0].t)
                .sum()
        })
        .collect())
}
