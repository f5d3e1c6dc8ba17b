//! Fractional integrals and derivatives.
//!
//! Weyl (right-sided) integrals act on survival functions. Riemann–Liouville
//! and Caputo derivatives act exactly on [`PowerSum`] test functions, with a
//! finite-difference fallback for arbitrary functions. Sequential derivatives
//! `D^{jα}` are always `j` applications of `D^α`.

mod operators;
mod power_sum;

use serde::{Deserialize, Serialize};

pub use operators::{
    rl_derivative_numeric, rl_integral, tail_term, weyl_integral, weyl_integral_detail, weyl_integral_nested,
    weyl_integral_of, weyl_integral_via_partial,
};
pub use power_sum::{PowerSum, Term, EXPONENT_TOL};

use crate::error::{Error, Result};

/// A fractional order `α ∈ (0, 1]` together with an iteration count `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracOrder {
    alpha: f64,
    n: u32,
}

impl FracOrder {
    pub fn new(alpha: f64, n: u32) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
        }
        Ok(FracOrder { alpha, n })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `n·α`.
    pub fn total(&self) -> f64 {
        self.n as f64 * self.alpha
    }

    /// `(n+1)·α`.
    pub fn next_total(&self) -> f64 {
        (self.n + 1) as f64 * self.alpha
    }
}

/// `D^{jα} g` as `j` successive Riemann–Liouville derivatives of order `α`.
pub fn power_rl_derivative(g: &PowerSum, j: u32, alpha: f64) -> PowerSum {
    (0..j).fold(g.clone(), |acc, _| acc.rl_derivative_once(alpha))
}

/// `*D^{iα} g` as `i` successive Caputo derivatives of order `α`.
pub fn power_caputo_derivative(g: &PowerSum, i: u32, alpha: f64) -> Result<PowerSum> {
    (0..i).try_fold(g.clone(), |acc, _| acc.caputo_derivative_once(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ps(terms: &[(f64, f64)]) -> PowerSum {
        PowerSum::new(terms.iter().map(|&(coef, exp)| Term { coef, exp })).unwrap()
    }

    #[test]
    fn frac_order() {
        let o = FracOrder::new(0.5, 3).unwrap();
        assert_eq!(o.total(), 1.5);
        assert_eq!(o.next_total(), 2.0);
        assert!(FracOrder::new(0.0, 1).is_err());
        assert!(FracOrder::new(1.5, 1).is_err());
    }

    #[test]
    fn sequential_derivatives() {
        let g = ps(&[(1.0, 0.5), (3.0, 1.0)]);
        assert_eq!(power_rl_derivative(&g, 0, 0.5), g);
        assert_eq!(power_caputo_derivative(&g, 0, 0.5).unwrap(), g);
        // x^{0.5} → Γ(1.5) → Γ(1.5)/Γ(0.5)·x^{−0.5} → 0
        let d2 = power_rl_derivative(&ps(&[(1.0, 0.5)]), 2, 0.5);
        assert!((d2.coefficient_of(-0.5) - 0.5).abs() < 1e-14);
        assert!(power_rl_derivative(&ps(&[(1.0, 0.5)]), 3, 0.5).is_zero());
        // Caputo hits the constant and stops
        assert!(power_caputo_derivative(&ps(&[(1.0, 0.5)]), 2, 0.5).unwrap().is_zero());
        // Caputo of x^{0.3} at α=0.5 leaves the family
        assert!(power_caputo_derivative(&ps(&[(1.0, 0.3)]), 2, 0.5).is_err());
    }

    #[test]
    fn numeric_derivative_matches_power_rule() {
        let cfg = crate::numerics::QuadratureConfig::default();
        let g = ps(&[(1.0, -0.3), (2.0, 0.0), (0.5, 0.5), (1.0, 2.0)]);
        for alpha in [0.3, 0.5, 0.8] {
            let exact = power_rl_derivative(&g, 1, alpha);
            for x in [0.5, 1.0, 2.0] {
                let num = rl_derivative_numeric(|t| g.eval_positive(t), alpha, x, &cfg).unwrap();
                let want = exact.evaluate(x).unwrap();
                assert!((num - want).abs() < 1e-4, "alpha {alpha} x {x}: {num} vs {want}");
            }
        }
    }

    proptest! {
        #[test]
        fn caputo_equals_rl_without_constant(alpha in 0.05f64..1.0, a in -3.0f64..3.0, b in 0.01f64..4.0) {
            // for g(0) = 0 and exponents > 0 one step of both derivatives coincides
            let g = ps(&[(a, b)]);
            let rl = g.rl_derivative_once(alpha);
            let cap = g.caputo_derivative_once(alpha).unwrap();
            prop_assert_eq!(rl.terms().len(), cap.terms().len());
            for (x, y) in rl.terms().iter().zip(cap.terms()) {
                prop_assert!((x.coef - y.coef).abs() <= 1e-12 * x.coef.abs().max(1.0));
            }
        }

        #[test]
        fn integral_then_derivative_is_identity(alpha in 0.05f64..1.0, a in -3.0f64..3.0, b in -0.95f64..4.0) {
            let g = ps(&[(a, b)]);
            let back = g.rl_integral_once(alpha).rl_derivative_once(alpha);
            prop_assert!((back.coefficient_of(b) - a).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
