//! Claim amounts under a deductible, `X_d = (X − d)₊`, and the mean value
//! theorem comparing two deductibles.
//!
//! A larger deductible gives smaller payments, so for `r < s` the ordered
//! pair is `(X, Y) = (X_s, X_r)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionModel, DistributionSpec};
use crate::error::{Error, Result};
use crate::fracops::{power_rl_derivative, PowerSum, EXPONENT_TOL};
use crate::numerics::{gamma, QuadratureConfig};
use crate::order_mvt::{OrderCheckResult, ZAlphaModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeductibleSpec {
    pub severity: DistributionSpec,
    pub d: f64,
}

/// The law of `(X − d)₊`: an atom of mass `F(d)` at 0 and survival
/// `F̄(d + t)` for `t ≥ 0`.
pub fn deductible_model(spec: &DeductibleSpec) -> Result<DistributionModel> {
    DistributionModel::build(&DistributionSpec::deductible(spec.d, spec.severity.clone()))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeductibleMvtReport {
    /// `E[g(X_r)] − E[g(X_s)]`.
    pub lhs: f64,
    /// `(λ_α(X_r) − λ_α(X_s))·E[D^α g(Z_α)]`.
    pub rhs: f64,
    pub residual: f64,
    pub lambda_r: f64,
    pub lambda_s: f64,
    pub order: Option<OrderCheckResult>,
    #[serde(skip)]
    pub z: ZAlphaModel,
}

fn check_admissible(g: &PowerSum, alpha: f64) -> Result<()> {
    match g.terms().iter().find(|t| t.exp <= alpha - 1.0 + EXPONENT_TOL) {
        Some(t) => Err(Error::Precondition(format!(
            "exponent {} must exceed alpha - 1 = {}",
            t.exp,
            alpha - 1.0
        ))),
        None => Ok(()),
    }
}

fn check_pair(lo: f64, hi: f64, names: (&str, &str)) -> Result<()> {
    if lo > 0.0 && hi > lo && hi.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            names.1,
            format!("need 0 < {} < {}, got {lo} and {hi}", names.0, names.1),
        ))
    }
}

/// Both sides of
/// `E[g(X_r)] − E[g(X_s)] = (λ_α(X_r) − λ_α(X_s))·E[D^α g(Z_α)]`, with `Z_α`
/// built from the verified pair `(X_s, X_r)`.
pub fn deductible_mvt(
    g: &PowerSum,
    severity: &DistributionSpec,
    r: f64,
    s: f64,
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<DeductibleMvtReport> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1], got {alpha}")));
    }
    check_pair(r, s, ("r", "s"))?;
    check_admissible(g, alpha)?;
    let xr = deductible_model(&DeductibleSpec {
        severity: severity.clone(),
        d: r,
    })?;
    let xs = deductible_model(&DeductibleSpec {
        severity: severity.clone(),
        d: s,
    })?;
    let z = ZAlphaModel::verified(&xs, &xr, alpha, cfg)?;
    let scale = gamma(alpha + 1.0)?;
    let (lambda_r, lambda_s) = (z.moment_y() / scale, z.moment_x() / scale);
    let lhs = g.expectation(&xr, cfg)? - g.expectation(&xs, cfg)?;
    let rhs = (lambda_r - lambda_s) * z.expectation(&power_rl_derivative(g, 1, alpha))?;
    Ok(DeductibleMvtReport {
        lhs,
        rhs,
        residual: lhs - rhs,
        lambda_r,
        lambda_s,
        order: z.order_check(),
        z,
    })
}

/// Density of `Z_α` for a two-phase hyperexponential severity, in closed form.
#[allow(clippy::too_many_arguments)]
pub fn hyperexp2_deductible_z_density(p: f64, lambda1: f64, lambda2: f64, r: f64, s: f64, alpha: f64, z: f64) -> f64 {
    let w1 = p * ((-lambda1 * r).exp() - (-lambda1 * s).exp());
    let w2 = (1.0 - p) * ((-lambda2 * r).exp() - (-lambda2 * s).exp());
    let num =
        w1 * lambda1.powf(1.0 - alpha) * (-lambda1 * z).exp() + w2 * lambda2.powf(1.0 - alpha) * (-lambda2 * z).exp();
    let den = w1 * lambda1.powf(-alpha) + w2 * lambda2.powf(-alpha);
    num / den
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    /// One ratio per test function, in input order.
    pub ratios: Vec<f64>,
    /// `(e^{−λr} − e^{−λs})/(e^{−λu} − e^{−λv})`.
    pub reference_ratio: f64,
    pub max_spread: f64,
}

/// `(E[g(X_r)] − E[g(X_s)])/(E[g(X_u)] − E[g(X_v)])` for exponential
/// severity and each `g`, with expectations taken by quadrature, against
/// the `g`-free reference ratio.
#[allow(clippy::too_many_arguments)]
pub fn exponential_ratio_check(
    lambda: f64,
    r: f64,
    s: f64,
    u: f64,
    v: f64,
    gs: &[PowerSum],
    alpha: f64,
    cfg: &QuadratureConfig,
) -> Result<RatioReport> {
    check_pair(r, s, ("r", "s"))?;
    check_pair(u, v, ("u", "v"))?;
    let severity = DistributionSpec::exponential(lambda);
    let claim = |d: f64| {
        deductible_model(&DeductibleSpec {
            severity: severity.clone(),
            d,
        })
    };
    let (xr, xs, xu, xv) = (claim(r)?, claim(s)?, claim(u)?, claim(v)?);
    let reference_den = (-lambda * u).exp() - (-lambda * v).exp();
    if reference_den == 0.0 {
        return Err(Error::Domain("reference denominator vanishes".into()));
    }
    let reference_ratio = ((-lambda * r).exp() - (-lambda * s).exp()) / reference_den;

    let mut ratios = Vec::with_capacity(gs.len());
    for g in gs {
        check_admissible(g, alpha)?;
        let num = g.expectation_quadrature(&xr, cfg)? - g.expectation_quadrature(&xs, cfg)?;
        let den = g.expectation_quadrature(&xu, cfg)? - g.expectation_quadrature(&xv, cfg)?;
        if den == 0.0 {
            return Err(Error::Domain(format!("E[g(X_u)] = E[g(X_v)] for g = {g}")));
        }
        ratios.push(num / den);
    }
    let max_spread = ratios.iter().map(|q| (q - reference_ratio).abs()).fold(0.0, f64::max);
    Ok(RatioReport {
        ratios,
        reference_ratio,
        max_spread,
    })
}
