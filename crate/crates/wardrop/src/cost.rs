//! Edge cost functions: BPR-type shifted monomials and general monomial sums,
//! with closed-form marginal costs and latency integrals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("cost function evaluated at negative load {0}")]
    NegativeLoad(f64),
}

/// One `coef * x^exp` term of a monomial-sum cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub coef: f64,
    pub exp: f64,
}

/// Extracted BPR parameters of a cost function: `t + a * x^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BprParams {
    /// Free-flow time.
    pub t: f64,
    /// Congestion coefficient.
    pub a: f64,
}

/// A separable, nondecreasing edge cost function.
///
/// `Bpr` edges share the network-wide degree `beta`; `MonomialSum` edges are
/// only used for counterexample studies on networks that are not BPR-typed.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFn {
    Bpr { t: f64, a: f64 },
    MonomialSum { terms: Vec<MonomialTerm> },
}

/// `x^e` with a multiplication fast path for small integer exponents.
fn pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e.fract() == 0.0 && (0.0..=32.0).contains(&e) {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

impl CostFn {
    pub fn bpr(t: f64, a: f64) -> Self {
        CostFn::Bpr { t, a }
    }

    pub fn monomial_sum(terms: Vec<(f64, f64)>) -> Self {
        CostFn::MonomialSum {
            terms: terms
                .into_iter()
                .map(|(coef, exp)| MonomialTerm { coef, exp })
                .collect(),
        }
    }

    /// Latency `c(x)` at load `x`; BPR form evaluates `t + a * x^beta`.
    pub fn value(&self, x: f64, beta: f64) -> Result<f64, CostError> {
        if x < 0.0 {
            return Err(CostError::NegativeLoad(x));
        }
        Ok(match self {
            CostFn::Bpr { t, a } => t + a * pow(x, beta),
            CostFn::MonomialSum { terms } => {
                terms.iter().map(|m| m.coef * pow(x, m.exp)).sum()
            }
        })
    }

    /// Marginal cost `c(x) + x * c'(x)`, in closed form.
    ///
    /// For BPR this is `t + (beta + 1) * a * x^beta`; monomial terms map to
    /// `coef * (exp + 1) * x^exp`. The closed form avoids evaluating `c'`
    /// near zero, where fractional exponents blow up.
    pub fn marginal(&self, x: f64, beta: f64) -> Result<f64, CostError> {
        if x < 0.0 {
            return Err(CostError::NegativeLoad(x));
        }
        Ok(match self {
            CostFn::Bpr { t, a } => t + (beta + 1.0) * a * pow(x, beta),
            CostFn::MonomialSum { terms } => terms
                .iter()
                .map(|m| m.coef * (m.exp + 1.0) * pow(x, m.exp))
                .sum(),
        })
    }

    /// The latency integral `B(x) = integral of c over [0, x]`, in closed form.
    pub fn integral(&self, x: f64, beta: f64) -> Result<f64, CostError> {
        if x < 0.0 {
            return Err(CostError::NegativeLoad(x));
        }
        Ok(match self {
            CostFn::Bpr { t, a } => t * x + a * pow(x, beta + 1.0) / (beta + 1.0),
            CostFn::MonomialSum { terms } => terms
                .iter()
                .map(|m| m.coef * pow(x, m.exp + 1.0) / (m.exp + 1.0))
                .sum(),
        })
    }

    /// `x * c'(x)`, computed as `marginal - value` so it stays finite at
    /// `x = 0` even for exponents below one.
    pub fn load_derivative_product(&self, x: f64, beta: f64) -> Result<f64, CostError> {
        Ok(self.marginal(x, beta)? - self.value(x, beta)?)
    }

    /// The cost function under which this edge's marginal cost is the plain
    /// latency: BPR `t + a x^beta` maps to `t + (beta+1) a x^beta`.
    pub fn to_marginal_fn(&self, beta: f64) -> CostFn {
        match self {
            CostFn::Bpr { t, a } => CostFn::Bpr {
                t: *t,
                a: (beta + 1.0) * a,
            },
            CostFn::MonomialSum { terms } => CostFn::MonomialSum {
                terms: terms
                    .iter()
                    .map(|m| MonomialTerm {
                        coef: m.coef * (m.exp + 1.0),
                        exp: m.exp,
                    })
                    .collect(),
            },
        }
    }

    /// Whether this cost is representable as `t + a * x^beta` for the given
    /// degree, returning the extracted parameters if so. A monomial sum
    /// qualifies when every positive-exponent term has exponent `beta`.
    pub fn bpr_params(&self, beta: f64) -> Option<BprParams> {
        match self {
            CostFn::Bpr { t, a } => Some(BprParams { t: *t, a: *a }),
            CostFn::MonomialSum { terms } => {
                let mut t = 0.0;
                let mut a = 0.0;
                for m in terms {
                    if m.exp == 0.0 {
                        t += m.coef;
                    } else if m.coef == 0.0 {
                        continue;
                    } else if (m.exp - beta).abs() <= 1e-12 {
                        a += m.coef;
                    } else {
                        return None;
                    }
                }
                Some(BprParams { t, a })
            }
        }
    }

    /// Basic shape checks: non-negative coefficients and exponents, and at
    /// least one monomial term.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            CostFn::Bpr { t, a } => {
                if *t < 0.0 || *a < 0.0 {
                    return Err(format!("BPR cost needs t >= 0 and a >= 0, got t={t}, a={a}"));
                }
            }
            CostFn::MonomialSum { terms } => {
                if terms.is_empty() {
                    return Err("monomial-sum cost needs at least one term".into());
                }
                for m in terms {
                    if m.coef < 0.0 || m.exp < 0.0 {
                        return Err(format!(
                            "monomial term needs coef >= 0 and exp >= 0, got {} * x^{}",
                            m.coef, m.exp
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-edge tolls, indexed like the network's edge list. Entries may be
/// negative.
#[derive(Debug, Clone, PartialEq)]
pub struct TollVector(pub Vec<f64>);

impl TollVector {
    pub fn zeros(n_edges: usize) -> Self {
        TollVector(vec![0.0; n_edges])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for TollVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn value_examples() {
        assert_eq!(CostFn::bpr(1.0, 0.0).value(7.0, 1.0).unwrap(), 1.0);
        assert_eq!(CostFn::bpr(0.0, 1.0).value(0.3, 1.0).unwrap(), 0.3);
        let m = CostFn::monomial_sum(vec![(1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(m.value(2.0, 1.0).unwrap(), 6.0);
    }

    #[test]
    fn negative_load_rejected() {
        let c = CostFn::bpr(1.0, 1.0);
        assert!(matches!(c.value(-0.1, 1.0), Err(CostError::NegativeLoad(_))));
        assert!(matches!(c.marginal(-0.1, 1.0), Err(CostError::NegativeLoad(_))));
        assert!(matches!(c.integral(-0.1, 1.0), Err(CostError::NegativeLoad(_))));
    }

    #[test]
    fn marginal_examples() {
        // c(x) = 4x has marginal 8x; a constant cost is its own marginal
        for x in [0.0, 0.5, 1.0, 3.25] {
            assert_eq!(CostFn::bpr(0.0, 4.0).marginal(x, 1.0).unwrap(), 8.0 * x);
            assert_eq!(CostFn::bpr(2.0, 0.0).marginal(x, 1.0).unwrap(), 2.0);
        }
        let m = CostFn::monomial_sum(vec![(1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(m.marginal(1.0, 1.0).unwrap(), 5.0);
    }

    #[test]
    fn integral_examples() {
        assert_eq!(CostFn::bpr(0.0, 1.0).integral(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(CostFn::bpr(1.0, 0.0).integral(2.0, 1.0).unwrap(), 2.0);
        assert_eq!(CostFn::bpr(1.0, 2.0).integral(1.0, 3.0).unwrap(), 1.5);
    }

    #[test]
    fn bpr_params_extraction() {
        let beta = 2.0;
        assert_eq!(
            CostFn::bpr(1.0, 2.0).bpr_params(1.0),
            Some(BprParams { t: 1.0, a: 2.0 })
        );
        let non_bpr = CostFn::monomial_sum(vec![(1.0, 1.0), (1.0, 2.0)]);
        assert_eq!(non_bpr.bpr_params(1.0), None);
        assert_eq!(non_bpr.bpr_params(2.0), None);
        let shifted = CostFn::monomial_sum(vec![(3.0, 0.0), (2.0, beta)]);
        assert_eq!(shifted.bpr_params(beta), Some(BprParams { t: 3.0, a: 2.0 }));
    }

    #[test]
    fn marginal_dominates_value() {
        let costs = [
            CostFn::bpr(0.5, 2.0),
            CostFn::bpr(0.0, 0.0),
            CostFn::monomial_sum(vec![(0.3, 1.0), (0.7, 4.0), (1.0, 0.0)]),
        ];
        for c in &costs {
            for k in 0..50 {
                let x = k as f64 * 0.1;
                for beta in [0.0, 1.0, 2.0, 4.0] {
                    assert!(c.marginal(x, beta).unwrap() >= c.value(x, beta).unwrap());
                }
            }
        }
    }

    #[test]
    fn integral_derivative_matches_value() {
        // central finite differences at pseudo-random points, relative error <= 1e-6
        let costs = [
            CostFn::bpr(1.0, 2.0),
            CostFn::bpr(0.0, 1.0),
            CostFn::monomial_sum(vec![(1.0, 1.0), (0.5, 3.0)]),
        ];
        let beta = 2.0;
        let h = 1e-5;
        let mut x: f64 = 0.137;
        for _ in 0..20 {
            x = (x * 97.31).fract() * 4.0 + 0.1;
            for c in &costs {
                let fd = (c.integral(x + h, beta).unwrap() - c.integral(x - h, beta).unwrap())
                    / (2.0 * h);
                let v = c.value(x, beta).unwrap();
                assert_relative_eq!(fd, v, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn total_cost_is_convex() {
        // second differences of x * c(x) on a grid stay non-negative
        let c = CostFn::monomial_sum(vec![(0.4, 1.0), (1.3, 2.5), (0.2, 0.0)]);
        let h = 0.05;
        let total = |x: f64| x * c.value(x, 1.0).unwrap();
        for k in 1..100 {
            let x = k as f64 * h;
            let second = total(x + h) - 2.0 * total(x) + total(x - h);
            assert!(second >= -1e-12, "second difference {second} at x={x}");
        }
    }

    #[test]
    fn load_derivative_product_finite_at_zero() {
        // exponent below one: x * c'(x) -> 0 even though c' blows up
        let c = CostFn::monomial_sum(vec![(1.0, 0.5)]);
        assert_eq!(c.load_derivative_product(0.0, 1.0).unwrap(), 0.0);
        let x: f64 = 0.81;
        let expected = 0.5 * x.powf(0.5); // x * (0.5 x^-0.5)
        assert_relative_eq!(
            c.load_derivative_product(x, 1.0).unwrap(),
            expected,
            max_relative = 1e-12
        );
    }
}
