use wardrop::network::{DemandVector, PathSet, DEFAULT_PATH_CAP};
use wardrop::solver::{solve_optimum, SolverConfig};
use wardrop::fixtures;

fn main() {
    let net = fixtures::braess();
    let paths = PathSet::enumerate(&net, DEFAULT_PATH_CAP).unwrap();
    let mut cfg = SolverConfig::default();
    for max in [1, 2, 3, 5, 10, 20, 40, 80, 200, 1000, 100_000] {
        cfg.max_iterations = max;
        let r = solve_optimum(&net, &paths, &DemandVector(vec![1.0]), &cfg).unwrap();
        println!(
            "max={max:6} iters={:6} gap={:+.3e} conv={} flow={:?} obj={:.9}",
            r.iterations, r.relative_gap, r.converged, r.path_flow.0, r.objective
        );
    }
}
