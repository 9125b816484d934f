//! Nonatomic routing games: Wardrop equilibria, system optima, and
//! demand-independent optimal tolls.
//!
//! The library models a directed multigraph with per-edge congestion costs
//! and origin-destination commodities, solves equilibria and optima with a
//! path-based Frank-Wolfe iteration, and constructs toll vectors that induce
//! the optimum *for every demand level at once* on BPR-typed networks. Grid
//! sweeps verify demand independence, non-negativity, and budget feasibility
//! numerically.
//!
//! The runnable examples tour every major capability:
//!
//! ```bash
//! cargo run --example pigou             # equilibria, optima, price of anarchy
//! cargo run --example braess            # the paradox and a one-edge fix
//! cargo run --example nonnegative_tolls # the acyclic-shift construction
//! cargo run --example budget_tolls      # budget-feasible tolls on a cyclic net
//! cargo run --example toll_lp           # the toll constraint system as an LP
//! cargo run --example demand_sweep      # CSV sweep of tolled vs optimal cost
//! cargo run --example no_diot_search    # two-link search for a uniform toll
//! ```
//!
//! The `wardrop` binary exposes the same operations over network files; see
//! the README for the file formats and subcommands.

pub mod analysis;
pub mod cost;
pub mod fixtures;
pub mod io;
pub mod network;
mod simplex;
pub mod solver;
pub mod tolls;

pub use cost::{CostFn, TollVector};
pub use network::{
    enumerate_paths, loads_from_flow, validate_flow, Commodity, CommodityId, DemandVector, Edge,
    EdgeId, LoadProfile, Network, NetworkError, Path, PathFlow, PathSet, VertexId,
    DEFAULT_PATH_CAP,
};
pub use solver::{
    path_cost, price_of_anarchy, social_cost, solve_equilibrium, solve_optimum, SolveError,
    SolveResult, SolverConfig,
};
