use std::cell::RefCell;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};
use crate::numerics::{
    integrate_semi_infinite_hinted, integrate_singular_power_hinted, reciprocal_gamma, Hints, QuadratureConfig,
};

/// Exponents closer than this are treated as equal, and exponents this close
/// to an integer are snapped onto it.
pub const EXPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub coef: f64,
    pub exp: f64,
}

/// A finite sum `Σ a_k x^{β_k}` on `x ≥ 0`.
///
/// Terms are kept sorted by exponent, merged, and free of zero coefficients.
/// [`PowerSum::new`] accepts only exponents above −1; derivatives may leave
/// that range.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct PowerSum {
    terms: Vec<Term>,
}

impl<'de> Deserialize<'de> for PowerSum {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<Term>::deserialize(de)?;
        PowerSum::new(terms).map_err(serde::de::Error::custom)
    }
}

fn snap(exp: f64) -> f64 {
    let r = exp.round();
    if (exp - r).abs() < EXPONENT_TOL {
        r
    } else {
        exp
    }
}

impl PowerSum {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let terms: Vec<Term> = terms.into_iter().collect();
        for t in &terms {
            if !t.coef.is_finite() {
                return Err(Error::invalid("coef", format!("must be finite, got {}", t.coef)));
            }
            if !(t.exp > -1.0) || !t.exp.is_finite() {
                return Err(Error::invalid("exp", format!("must be finite and > -1, got {}", t.exp)));
            }
        }
        Ok(Self::normalized(terms))
    }

    /// `coef·x^exp`.
    pub fn monomial(coef: f64, exp: f64) -> Result<Self> {
        Self::new([Term { coef, exp }])
    }

    pub fn zero() -> Self {
        PowerSum::default()
    }

    fn normalized(mut terms: Vec<Term>) -> Self {
        for t in &mut terms {
            t.exp = snap(t.exp);
        }
        terms.sort_by(|a, b| a.exp.total_cmp(&b.exp));
        let mut out: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match out.last_mut() {
                Some(last) if (t.exp - last.exp).abs() < EXPONENT_TOL => last.coef += t.coef,
                _ => out.push(t),
            }
        }
        out.retain(|t| t.coef != 0.0);
        PowerSum { terms: out }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn min_exponent(&self) -> Option<f64> {
        self.terms.first().map(|t| t.exp)
    }

    /// Coefficient of `x^exp`, matched to within [`EXPONENT_TOL`].
    pub fn coefficient_of(&self, exp: f64) -> f64 {
        self.terms
            .iter()
            .find(|t| (t.exp - exp).abs() < EXPONENT_TOL)
            .map_or(0.0, |t| t.coef)
    }

    pub fn scale(&self, factor: f64) -> PowerSum {
        Self::normalized(
            self.terms
                .iter()
                .map(|t| Term {
                    coef: t.coef * factor,
                    exp: t.exp,
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &PowerSum) -> PowerSum {
        Self::normalized(self.terms.iter().chain(&other.terms).copied().collect())
    }

    /// `g(x)`. At `x = 0` this is the constant term, and negative exponents
    /// are a domain error.
    pub fn evaluate(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("power sum evaluated at {x} < 0")));
        }
        if x == 0.0 {
            if let Some(t) = self.terms.iter().find(|t| t.exp < 0.0) {
                return Err(Error::Domain(format!("x^{} is singular at 0", t.exp)));
            }
            return Ok(self.coefficient_of(0.0));
        }
        Ok(self.eval_positive(x))
    }

    /// `g(x)` for `x > 0`, no checks.
    pub(crate) fn eval_positive(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| if t.exp == 0.0 { t.coef } else { t.coef * x.powf(t.exp) })
            .sum()
    }

    fn map_terms(&self, f: impl Fn(Term) -> Term) -> PowerSum {
        Self::normalized(self.terms.iter().map(|&t| f(t)).collect())
    }

    /// One Riemann–Liouville derivative of order `alpha` (lower limit 0):
    /// `x^β ↦ Γ(1+β)/Γ(1+β−α)·x^{β−α}`.
    ///
    /// Poles of `Γ(1+β−α)` give exact zeros, so integer exponents ≤ −1
    /// never survive and `Γ(1+β)` is always finite.
    pub fn rl_derivative_once(&self, alpha: f64) -> PowerSum {
        self.map_terms(|t| {
            let shifted = snap(1.0 + t.exp - alpha);
            Term {
                coef: t.coef * reciprocal_gamma(shifted) / reciprocal_gamma(1.0 + t.exp),
                exp: t.exp - alpha,
            }
        })
    }

    /// One Riemann–Liouville integral of order `alpha`:
    /// `x^β ↦ Γ(1+β)/Γ(1+β+α)·x^{β+α}`.
    pub fn rl_integral_once(&self, alpha: f64) -> PowerSum {
        self.map_terms(|t| Term {
            coef: t.coef * reciprocal_gamma(1.0 + t.exp + alpha) / reciprocal_gamma(1.0 + t.exp),
            exp: t.exp + alpha,
        })
    }

    /// One Caputo derivative of order `alpha ∈ (0, 1]`. Constants vanish.
    pub fn caputo_derivative_once(&self, alpha: f64) -> Result<PowerSum> {
        if let Some(t) = self.terms.iter().find(|t| t.exp < 0.0) {
            return Err(Error::Domain(format!(
                "Caputo derivative needs exponents >= 0, found {}",
                t.exp
            )));
        }
        Ok(self.map_terms(|t| {
            if t.exp == 0.0 {
                Term { coef: 0.0, exp: 0.0 }
            } else {
                Term {
                    coef: t.coef * reciprocal_gamma(snap(1.0 + t.exp - alpha)) / reciprocal_gamma(1.0 + t.exp),
                    exp: t.exp - alpha,
                }
            }
        }))
    }

    /// `Σ a_k ∫_0^∞ x^{β_k} f(x) dx`, one quadrature per term so that
    /// negative exponents get the singular substitution.
    ///
    /// `f` may fail; the first failure is returned.
    pub fn integrate_against<F>(&self, f: F, hints: &Hints, cfg: &QuadratureConfig) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let parts = self.integrate_terms(f, hints, cfg)?;
        Ok(self.terms.iter().zip(parts).map(|(t, v)| t.coef * v).sum())
    }

    /// `∫_0^∞ x^{β_k} f(x) dx` for each term, in term order.
    pub fn integrate_terms<F>(&self, f: F, hints: &Hints, cfg: &QuadratureConfig) -> Result<Vec<f64>>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let guarded = |x: f64| match f(x) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let mut out = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            if !(t.exp > -1.0) {
                return Err(Error::Divergence(format!("x^{} is not integrable at 0", t.exp)));
            }
            let r = if t.exp == 0.0 {
                integrate_semi_infinite_hinted(guarded, 0.0, hints, cfg)
            } else {
                integrate_singular_power_hinted(guarded, 0.0, t.exp + 1.0, hints, cfg)
            };
            if let Some(e) = failure.borrow_mut().take() {
                return Err(e);
            }
            out.push(r.into_value(&format!("integral of x^{} against a density", t.exp))?);
        }
        Ok(out)
    }

    /// `E[g(X)]`, termwise from the moments of `X`.
    pub fn expectation(&self, x: &DistributionModel, cfg: &QuadratureConfig) -> Result<f64> {
        self.terms.iter().map(|t| Ok(t.coef * x.moment(t.exp, cfg)?)).sum()
    }

    /// `E[g(X)]` with every moment taken by quadrature.
    pub fn expectation_quadrature(&self, x: &DistributionModel, cfg: &QuadratureConfig) -> Result<f64> {
        self.terms
            .iter()
            .map(|t| Ok(t.coef * x.moment_quadrature(t.exp, cfg)?.into_value("moment")?))
            .sum()
    }
}

impl fmt::Display for PowerSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}*x^{}", t.coef, t.exp)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(terms: &[(f64, f64)]) -> PowerSum {
        PowerSum::new(terms.iter().map(|&(coef, exp)| Term { coef, exp })).unwrap()
    }

    const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
    const GAMMA_RATIO_18_14: f64 = 1.04972585673709668094729441784;

    #[test]
    fn normalizes() {
        let g = ps(&[(1.0, 2.0), (3.0, 0.0), (2.0, 2.0), (-3.0, 0.0)]);
        assert_eq!(g.terms(), &[Term { coef: 3.0, exp: 2.0 }]);
        assert!(PowerSum::new([Term { coef: 1.0, exp: -1.0 }]).is_err());
        assert!(PowerSum::new([Term {
            coef: f64::NAN,
            exp: 1.0
        }])
        .is_err());
    }

    #[test]
    fn evaluates() {
        assert_eq!(ps(&[(1.0, 2.0), (3.0, 0.0)]).evaluate(2.0).unwrap(), 7.0);
        assert_eq!(ps(&[(2.0, 0.5)]).evaluate(4.0).unwrap(), 4.0);
        assert_eq!(ps(&[(1.0, 2.0), (3.0, 0.0)]).evaluate(0.0).unwrap(), 3.0);
        assert!(ps(&[(1.0, -0.5)]).evaluate(0.0).is_err());
    }

    #[test]
    fn rl_coefficient_rule() {
        let d = ps(&[(1.0, 1.0)]).rl_derivative_once(0.5);
        assert_eq!(d.terms().len(), 1);
        assert!((d.coefficient_of(0.5) - TWO_OVER_SQRT_PI).abs() < 1e-14);
        // x^{α−1} is annihilated exactly
        assert!(ps(&[(1.0, -0.5)]).rl_derivative_once(0.5).is_zero());
        assert!(ps(&[(4.0, -0.25)]).rl_derivative_once(0.75).is_zero());
        // constants are not annihilated by RL
        let c = ps(&[(1.0, 0.0)]).rl_derivative_once(0.5);
        assert!((c.coefficient_of(-0.5) - std::f64::consts::FRAC_2_SQRT_PI / 2.0).abs() < 1e-14);
        // integer order acts like the classical derivative
        let d2 = ps(&[(1.0, 2.0), (5.0, 0.0)]).rl_derivative_once(1.0);
        assert_eq!(d2.terms(), &[Term { coef: 2.0, exp: 1.0 }]);
    }

    #[test]
    fn caputo_rule() {
        let g = ps(&[(1.0, 0.8)]);
        let d = g.caputo_derivative_once(0.4).unwrap();
        assert!((d.coefficient_of(0.4) - GAMMA_RATIO_18_14).abs() < 1e-13);
        assert!(ps(&[(7.0, 0.0)]).caputo_derivative_once(0.5).unwrap().is_zero());
        assert!(matches!(
            ps(&[(1.0, -0.5)]).caputo_derivative_once(0.5),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn derivative_inverts_integral() {
        let g = ps(&[(1.0, -0.7), (2.0, 0.0), (-1.5, 0.5), (0.25, 3.2)]);
        for alpha in [0.1, 0.5, 0.75, 1.0] {
            let back = g.rl_integral_once(alpha).rl_derivative_once(alpha);
            assert_eq!(back.terms().len(), g.terms().len());
            for (a, b) in back.terms().iter().zip(g.terms()) {
                assert!((a.exp - b.exp).abs() < 1e-12);
                assert!((a.coef - b.coef).abs() < 1e-12 * b.coef.abs());
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = ps(&[(1.0, 0.5), (3.0, 1.0)]);
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"[{"coef":1.0,"exp":0.5},{"coef":3.0,"exp":1.0}]"#);
        assert_eq!(serde_json::from_str::<PowerSum>(&text).unwrap(), g);
        assert!(serde_json::from_str::<PowerSum>(r#"[{"coef":1,"exp":-2}]"#).is_err());
    }
}
