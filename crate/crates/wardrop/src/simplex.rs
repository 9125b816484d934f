//! Dense two-phase simplex with Bland's rule.
//!
//! Problems here are tiny (tens of variables, at most a few hundred rows), so
//! a dense tableau is adequate. Bland's rule guarantees termination under
//! degeneracy. Infeasibility comes with a Farkas certificate: row multipliers
//! whose aggregated constraint no non-negative point can satisfy.

pub(crate) const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Relation {
    Eq,
    Le,
}

/// min c.z  subject to  A z (=|<=) b,  z >= 0.
#[derive(Debug, Clone)]
pub(crate) struct DenseLp {
    pub n_vars: usize,
    pub rows: Vec<(Vec<f64>, Relation, f64)>,
    pub objective: Vec<f64>,
}

#[derive(Debug, Clone)]
pub(crate) enum LpOutcome {
    Optimal { solution: Vec<f64> },
    /// Row multipliers `y` (for the original row order) with `y.A <= 0`
    /// componentwise on structural columns and `y.b > 0`.
    Infeasible { farkas: Vec<f64> },
    Unbounded,
}

struct Tableau {
    /// rows x cols, last column is the right-hand side
    t: Vec<Vec<f64>>,
    m: usize,
    cols: usize,
    basis: Vec<usize>,
    /// permanently disabled columns (artificials in phase two)
    blocked: usize,
}

impl Tableau {
    /// One simplex run on the current objective row (stored at index m).
    /// Returns false when the problem is unbounded in this phase.
    fn run(&mut self) -> bool {
        loop {
            // Bland: entering = lowest-index column with negative reduced cost
            let mut entering = None;
            for j in 0..self.cols - self.blocked {
                if self.t[self.m][j] < -PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(j) = entering else { return true };
            // leaving = min ratio, ties to the smallest basis variable
            let mut leaving: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.t[i][j];
                if a > PIVOT_TOL {
                    let ratio = self.t[i][self.cols] / a;
                    let better = match leaving {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - PIVOT_TOL
                                || (ratio < best_ratio + PIVOT_TOL
                                    && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leaving = Some(i);
                        best_ratio = ratio;
                    }
                }
            }
            let Some(i) = leaving else { return false };
            self.pivot(i, j);
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.t[row][col];
        for v in self.t[row].iter_mut() {
            *v /= p;
        }
        for r in 0..=self.m {
            if r != row {
                let factor = self.t[r][col];
                if factor != 0.0 {
                    for j in 0..=self.cols {
                        self.t[r][j] -= factor * self.t[row][j];
                    }
                }
            }
        }
        self.basis[row] = col;
    }
}

pub(crate) fn solve(lp: &DenseLp) -> LpOutcome {
    let m = lp.rows.len();
    let n = lp.n_vars;
    let n_slack = lp.rows.iter().filter(|r| r.1 == Relation::Le).count();
    let cols = n + n_slack + m; // structural + slacks + one artificial per row
    let rhs = cols;

    // row i sign flip applied to make b >= 0; remembered for the certificate
    let mut flip = vec![1.0; m];
    let mut t = vec![vec![0.0; cols + 1]; m + 1];
    let mut slack_idx = 0;
    for (i, (coeffs, rel, b)) in lp.rows.iter().enumerate() {
        let s = if *b < 0.0 { -1.0 } else { 1.0 };
        flip[i] = s;
        for (j, &c) in coeffs.iter().enumerate() {
            t[i][j] = s * c;
        }
        if *rel == Relation::Le {
            t[i][n + slack_idx] = s;
            slack_idx += 1;
        }
        t[i][n + n_slack + i] = 1.0;
        t[i][rhs] = s * b;
    }

    // phase one: minimize the sum of artificials
    let basis: Vec<usize> = (0..m).map(|i| n + n_slack + i).collect();
    for j in 0..cols + 1 {
        let mut sum = 0.0;
        for row in t.iter().take(m) {
            sum += row[j];
        }
        t[m][j] = -sum;
    }
    for i in 0..m {
        t[m][n + n_slack + i] = 0.0;
    }
    let mut tab = Tableau {
        t,
        m,
        cols,
        basis,
        blocked: 0,
    };
    if !tab.run() {
        // the artificial sum is bounded below by zero
        unreachable!("phase one cannot be unbounded");
    }
    let phase1 = -tab.t[m][rhs];
    if phase1 > 1e-7 {
        // infeasible; read the multipliers off the artificial columns
        let mut farkas = vec![0.0; m];
        for i in 0..m {
            let mut y = 0.0;
            for (r, &b) in tab.basis.iter().enumerate() {
                if b >= n + n_slack {
                    y += tab.t[r][n + n_slack + i];
                }
            }
            farkas[i] = y * flip[i];
        }
        return LpOutcome::Infeasible { farkas };
    }

    // drive basic artificials (all at value zero now) out of the basis
    for i in 0..m {
        if tab.basis[i] >= n + n_slack {
            let col = (0..n + n_slack).find(|&j| tab.t[i][j].abs() > PIVOT_TOL);
            if let Some(j) = col {
                tab.pivot(i, j);
            }
            // a row with no eligible pivot is redundant; its artificial
            // stays basic at zero, which is harmless since artificials
            // are blocked from entering below
        }
    }

    // phase two on the real objective
    tab.blocked = m;
    for j in 0..=cols {
        tab.t[m][j] = 0.0;
    }
    for (j, &c) in lp.objective.iter().enumerate() {
        tab.t[m][j] = c;
    }
    // express the objective in terms of non-basic variables
    for i in 0..m {
        let b = tab.basis[i];
        let factor = tab.t[m][b];
        if factor != 0.0 {
            for j in 0..=cols {
                let v = tab.t[i][j];
                tab.t[m][j] -= factor * v;
            }
        }
    }
    if !tab.run() {
        return LpOutcome::Unbounded;
    }

    let mut solution = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            solution[b] = tab.t[i][rhs];
        }
    }
    LpOutcome::Optimal { solution }
}

#[cfg(test)]
fn objective_of(lp: &DenseLp, solution: &[f64]) -> f64 {
    lp.objective
        .iter()
        .zip(solution.iter())
        .map(|(c, z)| c * z)
        .sum()
}
