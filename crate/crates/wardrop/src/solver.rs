//! Path-based Frank-Wolfe solver for Wardrop equilibria (latency-integral
//! potential) and system optima (total cost, solved as an equilibrium under
//! marginal costs).
//!
//! The iteration is deterministic: paths keep their enumeration order,
//! cheapest-path ties break toward the lowest path index, and the line search
//! bisects the directional derivative to a fixed interval width. Each step
//! picks the steeper of the classic Frank-Wolfe direction and a pairwise
//! direction that shifts flow from each commodity's costliest used path onto
//! its cheapest path; the pairwise steps drain spurious path flow exactly to
//! zero, which plain Frank-Wolfe never does.

use crate::cost::TollVector;
use crate::network::{
    loads_from_flow, CommodityId, DemandVector, LoadProfile, Network, NetworkError, PathFlow,
    PathSet,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("tolls cover {got} edges, network has {want}")]
    TollShape { got: usize, want: usize },
    #[error("optimum social cost is zero, price of anarchy undefined")]
    ZeroOptimum,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Convergence threshold on the Frank-Wolfe relative gap.
    pub relative_gap_tol: f64,
    pub max_iterations: usize,
    /// Width at which the line-search bisection stops.
    pub line_search_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            relative_gap_tol: 1e-8,
            max_iterations: 100_000,
            line_search_tol: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn with_gap_tol(tol: f64) -> Self {
        SolverConfig {
            relative_gap_tol: tol,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub path_flow: PathFlow,
    pub loads: LoadProfile,
    /// Minimized objective: the (tolled) latency-integral potential for
    /// equilibria, the total travel time for optima.
    pub objective: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Flows smaller than this fraction of the commodity demand do not count as
/// "used" in the equilibrium condition check.
const USED_FLOW_EPS: f64 = 1e-6;

struct Workspace<'a> {
    network: &'a Network,
    paths: &'a PathSet,
    tolls: Option<&'a TollVector>,
    demand: &'a DemandVector,
    loads: Vec<f64>,
    edge_cost: Vec<f64>,
    path_cost: Vec<f64>,
}

impl<'a> Workspace<'a> {
    fn toll(&self, e: usize) -> f64 {
        self.tolls.map_or(0.0, |t| t[e])
    }

    fn recompute_costs(&mut self, flow: &[f64]) {
        let beta = self.network.beta();
        self.loads.iter_mut().for_each(|x| *x = 0.0);
        for (p, &f) in self.paths.paths().iter().zip(flow.iter()) {
            if f != 0.0 {
                for &e in &p.edges {
                    self.loads[e.0] += f;
                }
            }
        }
        for (e, edge) in self.network.edges().iter().enumerate() {
            self.edge_cost[e] = edge
                .cost
                .value(self.loads[e].max(0.0), beta)
                .expect("load is non-negative")
                + self.toll(e);
        }
        for (i, p) in self.paths.paths().iter().enumerate() {
            self.path_cost[i] = p.edges.iter().map(|e| self.edge_cost[e.0]).sum();
        }
    }

    /// Index of the cheapest path of a commodity; ties go to the lowest index.
    fn best_path(&self, c: CommodityId) -> usize {
        let range = self.paths.commodity_range(c);
        let mut best = range.start;
        for i in range {
            if self.path_cost[i] < self.path_cost[best] {
                best = i;
            }
        }
        best
    }

    /// Costliest path of a commodity among those carrying positive flow.
    fn worst_used_path(&self, c: CommodityId, flow: &[f64]) -> Option<usize> {
        let mut worst: Option<usize> = None;
        for i in self.paths.commodity_range(c) {
            if flow[i] > 0.0 && worst.map_or(true, |w| self.path_cost[i] > self.path_cost[w]) {
                worst = Some(i);
            }
        }
        worst
    }

    /// Tolled cost of the current flow minus the all-or-nothing lower bound.
    fn gap(&self, flow: &[f64]) -> (f64, f64) {
        let total: f64 = flow
            .iter()
            .zip(self.path_cost.iter())
            .map(|(f, c)| f * c)
            .sum();
        let mut bound = 0.0;
        for c in 0..self.network.commodity_count() {
            bound += self.demand[c] * self.path_cost[self.best_path(CommodityId(c))];
        }
        (total - bound, total)
    }

    /// Every used path's tolled cost stays within tolerance of the
    /// commodity's cheapest path.
    fn wardrop_holds(&self, flow: &[f64]) -> bool {
        for c in 0..self.network.commodity_count() {
            let range = self.paths.commodity_range(CommodityId(c));
            let min = range
                .clone()
                .map(|i| self.path_cost[i])
                .fold(f64::INFINITY, f64::min);
            let tol = 1e-6 * (1.0 + min.abs());
            let threshold = USED_FLOW_EPS * self.demand[c];
            for i in range {
                if flow[i] > threshold && self.path_cost[i] > min + tol {
                    return false;
                }
            }
        }
        true
    }

    /// Derivative of the potential along `flow + theta * direction`, where
    /// `deltas` lists the nonzero per-edge load changes of the direction.
    fn directional_derivative(&self, deltas: &[(usize, f64)], theta: f64) -> f64 {
        let beta = self.network.beta();
        deltas
            .iter()
            .map(|&(e, d)| {
                let x = (self.loads[e] + theta * d).max(0.0);
                let c = self.network.edges()[e]
                    .cost
                    .value(x, beta)
                    .expect("load is non-negative")
                    + self.toll(e);
                c * d
            })
            .sum()
    }

    /// Exact line search: bisection on the directional derivative over [0, 1].
    fn line_search(&self, deltas: &[(usize, f64)], tol: f64) -> f64 {
        if self.directional_derivative(deltas, 1.0) <= 0.0 {
            return 1.0;
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if self.directional_derivative(deltas, mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// The minimized potential: latency integrals plus linear toll terms.
    fn potential(&self) -> f64 {
        let beta = self.network.beta();
        self.network
            .edges()
            .iter()
            .enumerate()
            .map(|(e, edge)| {
                let x = self.loads[e].max(0.0);
                edge.cost.integral(x, beta).expect("load is non-negative") + self.toll(e) * x
            })
            .sum()
    }
}

enum Direction {
    /// All-or-nothing reassignment toward each commodity's cheapest path.
    FrankWolfe { targets: Vec<usize> },
    /// Shift each commodity's costliest used flow onto its cheapest path.
    Pairwise { shifts: Vec<(usize, usize, f64)> },
}

/// Computes a Wardrop equilibrium of the (optionally tolled) game by
/// minimizing the latency-integral potential over the path-flow polytope.
///
/// Convergence means the relative gap fell below `config.relative_gap_tol`
/// *and* the equilibrium condition holds path-wise; otherwise the best
/// iterate is returned with `converged = false`.
pub fn solve_equilibrium(
    network: &Network,
    paths: &PathSet,
    tolls: Option<&TollVector>,
    demand: &DemandVector,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    solve_equilibrium_impl(network, paths, tolls, demand, config, None)
}

fn solve_equilibrium_impl(
    network: &Network,
    paths: &PathSet,
    tolls: Option<&TollVector>,
    demand: &DemandVector,
    config: &SolverConfig,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<SolveResult, SolveError> {
    demand
        .validate(network)
        .map_err(SolveError::InvalidDemand)?;
    if let Some(t) = tolls {
        if t.len() != network.edge_count() {
            return Err(SolveError::TollShape {
                got: t.len(),
                want: network.edge_count(),
            });
        }
    }
    let mut ws = Workspace {
        network,
        paths,
        tolls,
        demand,
        loads: vec![0.0; network.edge_count()],
        edge_cost: vec![0.0; network.edge_count()],
        path_cost: vec![0.0; paths.len()],
    };

    // start from the all-or-nothing assignment at free flow
    let mut flow = vec![0.0; paths.len()];
    ws.recompute_costs(&flow);
    for c in 0..network.commodity_count() {
        flow[ws.best_path(CommodityId(c))] = demand[c];
    }

    let mut iterations = 0;
    let mut relative_gap = f64::INFINITY;
    let mut converged = false;
    while iterations < config.max_iterations {
        ws.recompute_costs(&flow);
        if let Some(t) = trace.as_deref_mut() {
            t.push(ws.potential());
        }
        let (gap, total) = ws.gap(&flow);
        relative_gap = if total > 0.0 { gap / total } else { gap };
        let gap_ok = relative_gap <= config.relative_gap_tol;
        let wardrop_ok = ws.wardrop_holds(&flow);
        if gap_ok && wardrop_ok {
            converged = true;
            break;
        }
        iterations += 1;

        // candidate directions with their initial slopes
        let targets: Vec<usize> = (0..network.commodity_count())
            .map(|c| ws.best_path(CommodityId(c)))
            .collect();
        let fw_slope = -gap;
        let mut shifts = Vec::new();
        let mut pw_slope = 0.0;
        for c in 0..network.commodity_count() {
            let best = targets[c];
            if let Some(worst) = ws.worst_used_path(CommodityId(c), &flow) {
                if worst != best && ws.path_cost[worst] > ws.path_cost[best] {
                    pw_slope += flow[worst] * (ws.path_cost[best] - ws.path_cost[worst]);
                    shifts.push((best, worst, flow[worst]));
                }
            }
        }
        // prefer the pairwise direction on slope ties: it reaches the far
        // end of its segment, so costly path flow drains to exactly zero
        // instead of decaying geometrically
        let direction = if !shifts.is_empty() && (gap_ok || pw_slope <= fw_slope) {
            Direction::Pairwise { shifts }
        } else {
            Direction::FrankWolfe { targets }
        };

        // per-edge load change of a unit step
        let mut delta = vec![0.0; network.edge_count()];
        match &direction {
            Direction::FrankWolfe { targets } => {
                for (i, p) in paths.paths().iter().enumerate() {
                    if flow[i] != 0.0 {
                        for &e in &p.edges {
                            delta[e.0] -= flow[i];
                        }
                    }
                }
                for (c, &t) in targets.iter().enumerate() {
                    if demand[c] != 0.0 {
                        for &e in &paths.path(t).edges {
                            delta[e.0] += demand[c];
                        }
                    }
                }
            }
            Direction::Pairwise { shifts } => {
                for &(best, worst, amount) in shifts {
                    for &e in &paths.path(best).edges {
                        delta[e.0] += amount;
                    }
                    for &e in &paths.path(worst).edges {
                        delta[e.0] -= amount;
                    }
                }
            }
        }
        let deltas: Vec<(usize, f64)> = delta
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d != 0.0)
            .map(|(e, &d)| (e, d))
            .collect();

        let theta = ws.line_search(&deltas, config.line_search_tol);
        if theta == 0.0 {
            // flat direction; nothing left to move
            break;
        }
        match &direction {
            Direction::FrankWolfe { targets } => {
                for f in flow.iter_mut() {
                    *f *= 1.0 - theta;
                }
                for (c, &t) in targets.iter().enumerate() {
                    flow[t] += theta * demand[c];
                }
            }
            Direction::Pairwise { shifts } => {
                for &(best, worst, amount) in shifts {
                    let moved = theta * amount;
                    flow[best] += moved;
                    flow[worst] -= moved;
                    if flow[worst] < 0.0 {
                        flow[worst] = 0.0;
                    }
                }
            }
        }
    }

    ws.recompute_costs(&flow);
    if !converged {
        let (gap, total) = ws.gap(&flow);
        relative_gap = if total > 0.0 { gap / total } else { gap };
        converged = relative_gap <= config.relative_gap_tol && ws.wardrop_holds(&flow);
    }
    let objective = ws.potential();
    if let Some(t) = trace.as_deref_mut() {
        t.push(objective);
    }
    Ok(SolveResult {
        loads: LoadProfile(ws.loads.clone()),
        path_flow: PathFlow(flow),
        objective,
        relative_gap,
        iterations,
        converged,
    })
}

/// Computes a system-optimal flow by solving the equilibrium of the
/// marginal-cost game. The reported objective is the total travel time of
/// the returned flow under the original costs.
pub fn solve_optimum(
    network: &Network,
    paths: &PathSet,
    demand: &DemandVector,
    config: &SolverConfig,
) -> Result<SolveResult, SolveError> {
    let marginal = network.to_marginal_network();
    let mut result = solve_equilibrium(&marginal, paths, None, demand, config)?;
    result.objective = social_cost(network, paths, &result.path_flow);
    Ok(result)
}

/// Total travel time `sum_e x_e c_e(x_e)`; tolls are transfers and excluded.
pub fn social_cost(network: &Network, paths: &PathSet, flow: &PathFlow) -> f64 {
    let loads = loads_from_flow(network, paths, flow);
    social_cost_of_loads(network, &loads)
}

pub fn social_cost_of_loads(network: &Network, loads: &LoadProfile) -> f64 {
    let beta = network.beta();
    network
        .edges()
        .iter()
        .enumerate()
        .map(|(e, edge)| {
            let x = loads[e].max(0.0);
            x * edge.cost.value(x, beta).expect("load is non-negative")
        })
        .sum()
}

/// Untolled equilibrium social cost over optimum social cost.
pub fn price_of_anarchy(
    network: &Network,
    paths: &PathSet,
    demand: &DemandVector,
    config: &SolverConfig,
) -> Result<f64, SolveError> {
    let eq = solve_equilibrium(network, paths, None, demand, config)?;
    let opt = solve_optimum(network, paths, demand, config)?;
    if opt.objective <= 0.0 {
        return Err(SolveError::ZeroOptimum);
    }
    Ok(social_cost(network, paths, &eq.path_flow) / opt.objective)
}

/// Latency (plus tolls, when given) summed over one path's edges at the
/// given loads.
pub fn path_cost(
    network: &Network,
    loads: &LoadProfile,
    path: &crate::network::Path,
    tolls: Option<&TollVector>,
) -> Result<f64, SolveError> {
    let beta = network.beta();
    let mut sum = 0.0;
    for &e in &path.edges {
        if e.0 >= network.edge_count() {
            return Err(SolveError::Network(NetworkError::UnknownEdge(format!(
                "edge index {}",
                e.0
            ))));
        }
        let edge = network.edge(e);
        sum += edge
            .cost
            .value(loads[e.0].max(0.0), beta)
            .map_err(|_| SolveError::InvalidDemand("negative load".into()))?;
        if let Some(t) = tolls {
            sum += t[e.0];
        }
    }
    Ok(sum)
}

/// Largest amount by which a used path's tolled cost exceeds its commodity's
/// cheapest alternative; zero for an exact equilibrium.
pub fn wardrop_excess(
    network: &Network,
    paths: &PathSet,
    tolls: Option<&TollVector>,
    demand: &DemandVector,
    flow: &PathFlow,
) -> f64 {
    let loads = loads_from_flow(network, paths, flow);
    let costs: Vec<f64> = paths
        .paths()
        .iter()
        .map(|p| path_cost(network, &loads, p, tolls).expect("paths index the network"))
        .collect();
    let mut excess: f64 = 0.0;
    for c in 0..network.commodity_count() {
        let range = paths.commodity_range(CommodityId(c));
        let min = range
            .clone()
            .map(|i| costs[i])
            .fold(f64::INFINITY, f64::min);
        for i in range {
            if flow[i] > USED_FLOW_EPS * demand[c] {
                excess = excess.max(costs[i] - min);
            }
        }
    }
    excess
}

#[cfg(test)]
pub(crate) fn solve_equilibrium_traced(
    network: &Network,
    paths: &PathSet,
    tolls: Option<&TollVector>,
    demand: &DemandVector,
    config: &SolverConfig,
) -> (SolveResult, Vec<f64>) {
    let mut trace = Vec::new();
    let full = solve_equilibrium_impl(network, paths, tolls, demand, config, Some(&mut trace))
        .expect("traced solve");
    (full, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::network::DEFAULT_PATH_CAP;
    use approx::assert_abs_diff_eq;

    fn setup(net: &Network) -> PathSet {
        PathSet::enumerate(net, DEFAULT_PATH_CAP).unwrap()
    }

    #[test]
    fn pigou_equilibrium() {
        let net = fixtures::pigou();
        let paths = setup(&net);
        let cfg = SolverConfig::default();

        let r = solve_equilibrium(&net, &paths, None, &DemandVector(vec![1.0]), &cfg).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.loads[0], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.loads[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(social_cost(&net, &paths, &r.path_flow), 1.0, epsilon = 1e-9);

        let tolls = TollVector(vec![0.0, 0.25]);
        let r =
            solve_equilibrium(&net, &paths, Some(&tolls), &DemandVector(vec![1.0]), &cfg).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.loads[0], 0.25, epsilon = 1e-9);
        assert_abs_diff_eq!(r.loads[1], 0.75, epsilon = 1e-9);

        let r = solve_equilibrium(&net, &paths, None, &DemandVector(vec![0.3]), &cfg).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.loads[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.loads[1], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn pigou_optimum() {
        let net = fixtures::pigou();
        let paths = setup(&net);
        let cfg = SolverConfig::default();

        let r = solve_optimum(&net, &paths, &DemandVector(vec![1.0]), &cfg).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.loads[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.loads[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(r.objective, 0.75, epsilon = 1e-9);

        let r = solve_optimum(&net, &paths, &DemandVector(vec![0.3]), &cfg).unwrap();
        assert_abs_diff_eq!(r.loads[1], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn cyclic_optimum_low_demand_single_path() {
        let net = fixtures::cyclic();
        let paths = setup(&net);
        let r = solve_optimum(
            &net,
            &paths,
            &DemandVector(vec![0.1]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        // all flow on (e5, e3, e2), the third enumerated path
        assert_abs_diff_eq!(r.path_flow[2], 0.1, epsilon = 1e-9);
        for e in [0, 3, 5] {
            assert_abs_diff_eq!(r.loads[e], 0.0, epsilon = 1e-9);
        }
        for e in [1, 2, 4] {
            assert_abs_diff_eq!(r.loads[e], 0.1, epsilon = 1e-9);
        }
    }

    #[test]
    fn braess_equilibrium_and_optimum() {
        let net = fixtures::braess();
        let paths = setup(&net);
        let cfg = SolverConfig::default();
        let demand = DemandVector(vec![1.0]);

        let eq = solve_equilibrium(&net, &paths, None, &demand, &cfg).unwrap();
        assert!(eq.converged);
        // everything on the zig-zag path (index 1), path cost 2
        assert_abs_diff_eq!(eq.path_flow[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(social_cost(&net, &paths, &eq.path_flow), 2.0, epsilon = 1e-9);

        let opt = solve_optimum(&net, &paths, &demand, &cfg).unwrap();
        assert!(opt.converged);
        // objective accuracy is bounded by the gap tolerance times the
        // marginal total cost, about 2e-8 here
        assert_abs_diff_eq!(opt.objective, 1.5, epsilon = 1e-7);
        assert_abs_diff_eq!(opt.loads[4], 0.0, epsilon = 1e-6);
    }

    #[test]
    fn social_cost_examples() {
        let net = fixtures::pigou();
        let paths = setup(&net);
        assert_abs_diff_eq!(
            social_cost(&net, &paths, &PathFlow(vec![0.5, 0.5])),
            0.75,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            social_cost(&net, &paths, &PathFlow(vec![0.25, 0.75])),
            13.0 / 16.0,
            epsilon = 1e-15
        );
        assert_eq!(social_cost(&net, &paths, &PathFlow(vec![0.0, 0.0])), 0.0);
    }

    #[test]
    fn path_cost_examples() {
        let net = fixtures::braess();
        let paths = setup(&net);
        // zig-zag at x1 = x4 = 1/2
        let loads = LoadProfile(vec![0.5, 0.0, 0.0, 0.5, 0.5]);
        assert_eq!(path_cost(&net, &loads, paths.path(1), None).unwrap(), 1.0);
        // upper at x1 = 1/4
        let loads = LoadProfile(vec![0.25, 0.25, 0.0, 0.0, 0.0]);
        assert_eq!(path_cost(&net, &loads, paths.path(0), None).unwrap(), 1.25);

        let pigou = fixtures::pigou();
        let ppaths = setup(&pigou);
        let loads = LoadProfile(vec![0.25, 0.75]);
        let tolls = TollVector(vec![0.0, 0.25]);
        assert_eq!(
            path_cost(&pigou, &loads, ppaths.path(1), Some(&tolls)).unwrap(),
            1.0
        );
    }

    #[test]
    fn poa_pigou_and_zero_demand() {
        let net = fixtures::pigou();
        let paths = setup(&net);
        let cfg = SolverConfig::default();
        let poa = price_of_anarchy(&net, &paths, &DemandVector(vec![1.0]), &cfg).unwrap();
        assert_abs_diff_eq!(poa, 4.0 / 3.0, epsilon = 1e-8);
        assert_eq!(
            price_of_anarchy(&net, &paths, &DemandVector(vec![0.0]), &cfg),
            Err(SolveError::ZeroOptimum)
        );
    }

    #[test]
    fn poa_braess() {
        let net = fixtures::braess();
        let paths = setup(&net);
        let poa = price_of_anarchy(
            &net,
            &paths,
            &DemandVector(vec![1.0]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_abs_diff_eq!(poa, 4.0 / 3.0, epsilon = 1e-7);
    }

    #[test]
    fn negative_tolls_are_legal() {
        // trivial shift on Pigou: tolls (-1/2, 0) keep optimum = equilibrium
        let net = fixtures::pigou();
        let paths = setup(&net);
        let tolls = TollVector(vec![-0.5, 0.0]);
        for mu in [0.2, 0.5, 1.0, 2.0] {
            let r = solve_equilibrium(
                &net,
                &paths,
                Some(&tolls),
                &DemandVector(vec![mu]),
                &SolverConfig::default(),
            )
            .unwrap();
            assert!(r.converged, "mu={mu}");
            let opt = solve_optimum(&net, &paths, &DemandVector(vec![mu]), &SolverConfig::default())
                .unwrap();
            assert_abs_diff_eq!(
                social_cost(&net, &paths, &r.path_flow),
                opt.objective,
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn wardrop_condition_at_convergence() {
        let nets = [fixtures::pigou(), fixtures::braess(), fixtures::double_pigou()];
        for net in &nets {
            let paths = setup(net);
            let demand = DemandVector(vec![0.8; net.commodity_count()]);
            let r =
                solve_equilibrium(net, &paths, None, &demand, &SolverConfig::default()).unwrap();
            assert!(r.converged);
            let excess = wardrop_excess(net, &paths, None, &demand, &r.path_flow);
            assert!(excess <= 1e-6 * 3.0, "excess {excess}");
        }
    }

    #[test]
    fn optimum_satisfies_marginal_wardrop() {
        let net = fixtures::braess();
        let paths = setup(&net);
        let demand = DemandVector(vec![0.75]);
        let r = solve_optimum(&net, &paths, &demand, &SolverConfig::default()).unwrap();
        assert!(r.converged);
        let marginal = net.to_marginal_network();
        let excess = wardrop_excess(&marginal, &paths, None, &demand, &r.path_flow);
        assert!(excess <= 3e-6, "excess {excess}");
    }

    #[test]
    fn potential_is_monotone_across_iterations() {
        let net = fixtures::cyclic();
        let paths = setup(&net);
        let (r, trace) = solve_equilibrium_traced(
            &net,
            &paths,
            None,
            &DemandVector(vec![0.7]),
            &SolverConfig::default(),
        );
        assert!(r.converged);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "potential rose: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn deterministic_iterates() {
        let net = fixtures::cyclic();
        let paths = setup(&net);
        let demand = DemandVector(vec![0.9]);
        let cfg = SolverConfig::default();
        let a = solve_equilibrium(&net, &paths, None, &demand, &cfg).unwrap();
        let b = solve_equilibrium(&net, &paths, None, &demand, &cfg).unwrap();
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.path_flow.0, b.path_flow.0);
        assert_eq!(a.objective.to_bits(), b.objective.to_bits());
    }

    #[test]
    fn zero_demand_converges_trivially() {
        let net = fixtures::braess();
        let paths = setup(&net);
        let r = solve_equilibrium(
            &net,
            &paths,
            None,
            &DemandVector(vec![0.0]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.converged);
        assert_eq!(r.objective, 0.0);
    }
}
