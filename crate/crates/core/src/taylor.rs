//! Probabilistic Taylor expansions about 0 with fractional derivatives.
//!
//! Riemann–Liouville form:
//! `E[g(X)] = Σ_{j≤n} c_j/Γ((j+1)α)·E[X^{(j+1)α−1}] + R_n`, and Caputo form:
//! `E[g(X)] = Σ_{i≤n} (*D^{iα}g)(0)/Γ(iα+1)·E[X^{iα}] + R_n`. In both,
//! `R_n = E[X^{(n+1)α}]/Γ((n+1)α+1)·E[D^{(n+1)α}g(X^{(n+1)})]` with the
//! matching sequential derivative, integrated against the equilibrium
//! density of order `n+1`.

use serde::Serialize;

use crate::distributions::{DistributionModel, DistributionSpec};
use crate::equilibrium::EquilibriumView;
use crate::error::{Error, Result};
use crate::fracops::{power_caputo_derivative, power_rl_derivative, FracOrder, PowerSum, EXPONENT_TOL};
use crate::numerics::{gamma, reciprocal_gamma, QuadratureConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaylorForm {
    RiemannLiouville,
    Caputo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorMeta {
    pub alpha: f64,
    pub n: u32,
    pub g: PowerSum,
    pub distribution: DistributionSpec,
    pub form: TaylorForm,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaylorReport {
    /// `E[g(X)]`.
    pub lhs: f64,
    /// Series terms `j = 0..=n`.
    pub terms: Vec<f64>,
    pub remainder: f64,
    /// `lhs − Σ terms − remainder`.
    pub residual: f64,
    /// `E[X^{(n+1)α}]/Γ((n+1)α+1)·E[|D^{(n+1)α}g(X^{(n+1)})|]`, bounded termwise.
    pub remainder_abs_bound: f64,
    pub meta: TaylorMeta,
}

/// `c_j = Γ(α)·[x^{1−α}D^{jα}g(x)](0⁺)`, the coefficient of `x^{α−1}` in
/// `D^{jα}g` scaled by `Γ(α)`.
pub fn rl_taylor_coefficient(g: &PowerSum, j: u32, alpha: f64) -> Result<f64> {
    let d = power_rl_derivative(g, j, alpha);
    if let Some(t) = d.terms().iter().find(|t| t.exp < alpha - 1.0 - EXPONENT_TOL) {
        return Err(Error::Precondition(format!(
            "D^({j}*{alpha}) g has exponent {} below alpha - 1, so c_{j} diverges",
            t.exp
        )));
    }
    Ok(gamma(alpha)? * d.coefficient_of(alpha - 1.0))
}

/// `E[X^{(n+1)α}]/Γ((n+1)α+1)·E[h(X^{(n+1)})]` and the same with `|h|`
/// bounded termwise.
fn remainder(h: &PowerSum, x: &DistributionModel, order: FracOrder, cfg: &QuadratureConfig) -> Result<(f64, f64)> {
    if h.is_zero() {
        return Ok((0.0, 0.0));
    }
    let next = FracOrder::new(order.alpha(), order.n() + 1)?;
    let view = EquilibriumView::new(x, next, cfg)?;
    let parts = h
        .integrate_terms(|t| view.density(t), x.hints(), cfg)
        .map_err(|e| match e {
            Error::NonConvergence(m) | Error::Divergence(m) => {
                Error::Precondition(format!("remainder derivative is not integrable: {m}"))
            }
            other => other,
        })?;
    let scale = view.norm() * reciprocal_gamma(next.total() + 1.0);
    let signed: f64 = h.terms().iter().zip(&parts).map(|(t, v)| t.coef * v).sum();
    let abs: f64 = h.terms().iter().zip(&parts).map(|(t, v)| t.coef.abs() * v).sum();
    Ok((scale * signed, scale * abs))
}

fn validate(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")))
    }
}

/// Riemann–Liouville expansion of `E[g(X)]` to order `n`.
pub fn rl_taylor_expectation(
    g: &PowerSum,
    x: &DistributionModel,
    alpha: f64,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<TaylorReport> {
    validate(alpha)?;
    let order = FracOrder::new(alpha, n)?;
    let mut terms = Vec::with_capacity(n as usize + 1);
    for j in 0..=n {
        let c = rl_taylor_coefficient(g, j, alpha)?;
        let s = (j + 1) as f64 * alpha;
        terms.push(if c == 0.0 {
            0.0
        } else {
            c * reciprocal_gamma(s) * x.moment(s - 1.0, cfg)?
        });
    }
    let h = power_rl_derivative(g, n + 1, alpha);
    let (rem, rem_abs) = remainder(&h, x, order, cfg)?;
    finish(g, x, order, TaylorForm::RiemannLiouville, terms, rem, rem_abs, cfg)
}

/// Caputo expansion of `E[g(X)]` to order `n`. Every exponent of `g` must
/// be nonnegative, and so must those of `*D^{iα}g` for `i ≤ n`.
pub fn caputo_taylor_expectation(
    g: &PowerSum,
    x: &DistributionModel,
    alpha: f64,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<TaylorReport> {
    validate(alpha)?;
    let order = FracOrder::new(alpha, n)?;
    let mut terms = Vec::with_capacity(n as usize + 1);
    let mut d = g.clone();
    for i in 0..=n {
        if i > 0 {
            d = d.caputo_derivative_once(alpha)?;
        }
        let at_zero = d
            .evaluate(0.0)
            .map_err(|_| Error::Precondition(format!("*D^({i}*{alpha}) g is singular at 0")))?;
        let s = i as f64 * alpha;
        terms.push(if at_zero == 0.0 {
            0.0
        } else {
            at_zero / gamma(s + 1.0)? * x.moment(s, cfg)?
        });
    }
    let h = power_caputo_derivative(&d, 1, alpha)?;
    let (rem, rem_abs) = remainder(&h, x, order, cfg)?;
    finish(g, x, order, TaylorForm::Caputo, terms, rem, rem_abs, cfg)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    g: &PowerSum,
    x: &DistributionModel,
    order: FracOrder,
    form: TaylorForm,
    terms: Vec<f64>,
    remainder: f64,
    remainder_abs_bound: f64,
    cfg: &QuadratureConfig,
) -> Result<TaylorReport> {
    let lhs = g.expectation(x, cfg)?;
    let residual = lhs - terms.iter().sum::<f64>() - remainder;
    Ok(TaylorReport {
        lhs,
        terms,
        remainder,
        residual,
        remainder_abs_bound,
        meta: TaylorMeta {
            alpha: order.alpha(),
            n: order.n(),
            g: g.clone(),
            distribution: x.spec().clone(),
            form,
        },
    })
}

/// Both sides of
/// `E[X^β] = E[X^{(n+1)α}]/Γ((n+1)α+1)·Γ(1+β)/Γ(1−(n+1)α+β)·E[(X^{(n+1)})^{β−(n+1)α}]`.
pub fn fractional_moment_identity(
    beta: f64,
    x: &DistributionModel,
    alpha: f64,
    n: u32,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    validate(alpha)?;
    if beta < alpha {
        return Err(Error::Precondition(format!("beta = {beta} must be >= alpha = {alpha}")));
    }
    if n as f64 > (beta - alpha) / alpha + EXPONENT_TOL {
        return Err(Error::Precondition(format!(
            "n = {n} exceeds (beta - alpha)/alpha = {}",
            (beta - alpha) / alpha
        )));
    }
    let next = FracOrder::new(alpha, n + 1)?;
    let m = next.total();
    let view = EquilibriumView::new(x, next, cfg)?;
    let e = beta - m;
    let eq = if e > EXPONENT_TOL {
        view.moment(e)?
    } else {
        view.moment_quadrature(e.max(0.0))?
    };
    let rhs = view.norm() * reciprocal_gamma(m + 1.0) * gamma(1.0 + beta)? * reciprocal_gamma(1.0 - m + beta) * eq;
    Ok((x.moment(beta, cfg)?, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::Term;

    const SQRT_PI: f64 = 1.77245385090551602729816748334;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn model(spec: DistributionSpec) -> DistributionModel {
        DistributionModel::build(&spec).unwrap()
    }

    fn ps(terms: &[(f64, f64)]) -> PowerSum {
        PowerSum::new(terms.iter().map(|&(coef, exp)| Term { coef, exp })).unwrap()
    }

    #[test]
    fn coefficients() {
        let c = rl_taylor_coefficient(&ps(&[(1.0, -0.5)]), 0, 0.5).unwrap();
        assert!((c - SQRT_PI).abs() < 1e-14);
        for j in 0..=2 {
            assert_eq!(rl_taylor_coefficient(&ps(&[(1.0, 2.3)]), j, 0.5).unwrap(), 0.0);
        }
        assert_eq!(rl_taylor_coefficient(&ps(&[(1.0, 1.0)]), 0, 1.0).unwrap(), 0.0);
        // x at α = 0.75: D^{2α} gives x^{−0.5} < α − 1
        assert!(rl_taylor_coefficient(&ps(&[(1.0, 1.0)]), 1, 0.75).is_ok());
        assert!(matches!(
            rl_taylor_coefficient(&ps(&[(1.0, 1.0)]), 2, 0.75),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rl_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        let r = rl_taylor_expectation(&ps(&[(1.0, 1.0)]), &x, 0.5, 0, &cfg()).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14);
        assert_eq!(r.terms, vec![0.0]);
        assert!((r.remainder - 1.0).abs() < 1e-7);
        assert!(r.residual.abs() < 1e-7);

        let r = rl_taylor_expectation(&ps(&[(2.0, -0.5)]), &x, 0.5, 0, &cfg()).unwrap();
        assert_eq!(r.remainder, 0.0);
        assert!((r.terms[0] - r.lhs).abs() < 1e-13);
        assert!((r.lhs - 2.0 * SQRT_PI).abs() < 1e-13);

        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let r = rl_taylor_expectation(&ps(&[(1.0, 2.0)]), &u, 1.0, 1, &cfg()).unwrap();
        assert!((r.lhs - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.residual.abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn caputo_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        let r = caputo_taylor_expectation(&ps(&[(1.0, 0.8)]), &x, 0.4, 1, &cfg()).unwrap();
        assert_eq!(r.terms, vec![0.0, 0.0]);
        assert!((r.remainder - x.moment(0.8, &cfg()).unwrap()).abs() < 1e-7);
        assert!(r.residual.abs() < 1e-7);

        let r = caputo_taylor_expectation(&ps(&[(5.0, 0.0)]), &x, 0.5, 0, &cfg()).unwrap();
        assert_eq!(r.terms, vec![5.0]);
        assert_eq!(r.remainder, 0.0);

        let r = caputo_taylor_expectation(&ps(&[(1.0, 2.0), (1.0, 1.0)]), &x, 1.0, 1, &cfg()).unwrap();
        assert!(r.residual.abs() < 1e-7, "{r:?}");
        assert!((r.lhs - 3.0).abs() < 1e-14);

        assert!(caputo_taylor_expectation(&ps(&[(1.0, -0.5)]), &x, 0.5, 0, &cfg()).is_err());
    }

    #[test]
    fn moment_identity() {
        let x = model(DistributionSpec::exponential(1.0));
        let (l, r) = fractional_moment_identity(1.0, &x, 0.5, 0, &cfg()).unwrap();
        assert!((l - 1.0).abs() < 1e-14 && (r - 1.0).abs() < 1e-8);
        let (l, r) = fractional_moment_identity(2.0, &x, 1.0, 1, &cfg()).unwrap();
        assert!((l - 2.0).abs() < 1e-14 && (r - 2.0).abs() < 1e-7);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let (l, r) = fractional_moment_identity(1.5, &u, 0.5, 1, &cfg()).unwrap();
        assert!((l - 0.4).abs() < 1e-14 && (r - 0.4).abs() < 1e-6);
        assert!(fractional_moment_identity(1.0, &x, 0.5, 2, &cfg()).is_err());
        assert!(fractional_moment_identity(0.3, &x, 0.5, 0, &cfg()).is_err());
    }

    #[test]
    fn meta_serializes() {
        let x = model(DistributionSpec::exponential(1.0));
        let r = rl_taylor_expectation(&ps(&[(1.0, 1.0)]), &x, 0.5, 0, &cfg()).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["meta"]["alpha"], 0.5);
        assert_eq!(v["meta"]["distribution"]["kind"], "exponential");
        assert_eq!(v["meta"]["g"][0]["exp"], 1.0);
    }
}
