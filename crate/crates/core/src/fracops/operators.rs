use std::cell::RefCell;

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};
use crate::numerics::{
    gamma, integrate, integrate_singular_power_hinted, reciprocal_gamma, Hints, IntegralResult, QuadratureConfig,
};

fn check_order(order: f64) -> Result<()> {
    if order > 0.0 && order.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "order",
            format!("must be positive and finite, got {order}"),
        ))
    }
}

/// `(1/Γ(order))·∫_t^∞ (x−t)^{order−1} f(x) dx`, the right-sided (Weyl)
/// fractional integral of an arbitrary function.
pub fn weyl_integral_of<F: Fn(f64) -> f64>(
    f: F,
    order: f64,
    t: f64,
    hints: &Hints,
    cfg: &QuadratureConfig,
) -> IntegralResult {
    let r = integrate_singular_power_hinted(f, t, order, hints, cfg);
    let scale = reciprocal_gamma(order);
    IntegralResult {
        value: r.value * scale,
        error_estimate: r.error_estimate * scale,
        ..r
    }
}

/// Weyl integral of the survival function of `x`, by direct quadrature.
pub fn weyl_integral(x: &DistributionModel, order: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    weyl_integral_detail(x, order, t, cfg)?.into_value("Weyl integral")
}

/// As [`weyl_integral`], keeping the truncation point and error estimate.
pub fn weyl_integral_detail(
    x: &DistributionModel,
    order: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult> {
    check_order(order)?;
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("Weyl integral at t = {t} < 0")));
    }
    Ok(weyl_integral_of(|s| x.survival(s), order, t, x.hints(), cfg))
}

/// Weyl integral of the survival function through
/// `I_−^{order}F̄(t) = E[(X−t)₊^{order}]/Γ(order+1)`.
pub fn weyl_integral_via_partial(x: &DistributionModel, order: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_order(order)?;
    Ok(x.partial_moment(t, order, cfg)? / gamma(order + 1.0)?)
}

/// `I_−^{a}(I_−^{b}F̄)(t)` with the inner integral evaluated by quadrature at
/// every outer node.
pub fn weyl_integral_nested(x: &DistributionModel, a: f64, b: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_order(a)?;
    check_order(b)?;
    let inner_cfg = cfg.scaled(0.01);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let inner = |s: f64| {
        let r = weyl_integral_of(|u| x.survival(u), b, s, x.hints(), &inner_cfg);
        match r.into_value("inner Weyl integral") {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let r = weyl_integral_of(inner, a, t, x.hints(), cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    r.into_value("outer Weyl integral")
}

/// `(1/Γ(order))·∫_0^x (x−t)^{order−1} g(t) dt`.
///
/// Split at `x/2`. The left half uses `t = (x/2)·w⁴` so an integrable
/// algebraic singularity of `g` at 0 is smoothed; the right half
/// substitutes `u = (x−t)^{order}` when `order < 1`.
pub fn rl_integral<G: Fn(f64) -> f64>(g: G, order: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_order(order)?;
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("RL integral needs x > 0, got {x}")));
    }
    const K: f64 = 4.0;
    let c = 0.5 * x;
    let left = integrate(
        |w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            let s = c * w.powf(K);
            (x - s).powf(order - 1.0) * g(s) * c * K * w.powf(K - 1.0)
        },
        0.0,
        1.0,
        cfg,
    )
    .into_value("RL integral, left half")?;

    let right = if order >= 1.0 {
        integrate(|s: f64| (x - s).powf(order - 1.0) * g(s), c, x, cfg)
    } else {
        let inv = 1.0 / order;
        integrate(|u: f64| g(x - u.powf(inv)) * inv, 0.0, c.powf(order), cfg)
    }
    .into_value("RL integral, right half")?;

    Ok((left + right) * reciprocal_gamma(order))
}

/// `D^α g(x) = d/dx I^{1−α} g(x)` for `α ∈ (0, 1)`, by a central difference
/// with step `h = 1e-5·max(1, |x|)`.
///
/// Accuracy is `O(h²)` plus the inner quadrature error divided by `h`, so the
/// inner integrals run at tightened tolerances. Low accuracy; the exact
/// power-sum rule is preferred wherever it applies.
pub fn rl_derivative_numeric<G: Fn(f64) -> f64>(g: G, alpha: f64, x: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    let h = 1e-5 * x.abs().max(1.0);
    if !(x >= 10.0 * h) {
        return Err(Error::Domain(format!("x = {x} is too close to 0 for a step of {h}")));
    }
    let tight = QuadratureConfig {
        abs_tol: cfg.abs_tol.min(1e-14),
        rel_tol: cfg.rel_tol.min(1e-12),
        ..*cfg
    };
    let up = rl_integral(&g, 1.0 - alpha, x + h, &tight)?;
    let down = rl_integral(&g, 1.0 - alpha, x - h, &tight)?;
    Ok((up - down) / (2.0 * h))
}

/// `(T−t)^{order}·F̄(T)`, the quantity that must vanish as `T → ∞` for the
/// Weyl integral of order `order` to exist. Evaluated at a truncation point
/// it measures how much tail the quadrature dropped.
pub fn tail_term(x: &DistributionModel, order: f64, t: f64, truncation: f64) -> f64 {
    if truncation <= t {
        return 0.0;
    }
    (truncation - t).powf(order) * x.survival(truncation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    const E_M1: f64 = 0.367879441171442321595523770161;
    const TWO_OVER_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
    const GAMMA_1_5: f64 = 0.886226925452758013649083741671;
    const INV_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI / 2.0;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn model(spec: DistributionSpec) -> DistributionModel {
        DistributionModel::build(&spec).unwrap()
    }

    #[test]
    fn weyl_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        assert!((weyl_integral(&x, 0.5, 0.0, &cfg()).unwrap() - 1.0).abs() < 1e-9);
        assert!((weyl_integral(&x, 2.0, 1.0, &cfg()).unwrap() - E_M1).abs() < 1e-9);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        assert!((weyl_integral(&u, 1.0, 0.0, &cfg()).unwrap() - 0.5).abs() < 1e-12);
        assert!(weyl_integral(&u, 0.0, 0.0, &cfg()).is_err());
    }

    #[test]
    fn weyl_paths_agree() {
        for spec in [
            DistributionSpec::exponential(1.0),
            DistributionSpec::uniform(0.0, 1.0),
            DistributionSpec::weibull(2.0, 1.0),
            DistributionSpec::hyperexp2(0.4, 1.0, 3.0),
            DistributionSpec::zero_inflated(0.3, DistributionSpec::exponential(1.0)),
            DistributionSpec::deductible(1.0, DistributionSpec::exponential(1.0)),
        ] {
            let x = model(spec.clone());
            for order in [0.3, 0.5, 1.0, 1.7] {
                for t in [0.0, 0.4, 1.3] {
                    let direct = weyl_integral(&x, order, t, &cfg()).unwrap();
                    let via = weyl_integral_via_partial(&x, order, t, &cfg()).unwrap();
                    assert!((direct - via).abs() <= 1e-8 * via.abs().max(1e-6), "{spec} {order} {t}");
                }
            }
        }
    }

    #[test]
    fn rl_integral_examples() {
        assert!((rl_integral(|_| 1.0, 1.0, 2.0, &cfg()).unwrap() - 2.0).abs() < 1e-12);
        assert!((rl_integral(|_| 1.0, 0.5, 1.0, &cfg()).unwrap() - TWO_OVER_SQRT_PI).abs() < 1e-10);
        assert!((rl_integral(|t| t, 1.0, 1.0, &cfg()).unwrap() - 0.5).abs() < 1e-12);
        // singular integrand at 0: I^{0.5} t^{-0.5} (1) = Γ(0.5)/Γ(1) = √π
        let v = rl_integral(|t: f64| t.powf(-0.5), 0.5, 1.0, &cfg()).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn rl_derivative_examples() {
        let d = rl_derivative_numeric(|t: f64| t.sqrt(), 0.5, 1.0, &cfg()).unwrap();
        assert!((d - GAMMA_1_5).abs() < 1e-6, "{d}");
        let z = rl_derivative_numeric(|t: f64| t.powf(-0.5), 0.5, 1.0, &cfg()).unwrap();
        assert!(z.abs() < 1e-6, "{z}");
        let c = rl_derivative_numeric(|_| 1.0, 0.5, 1.0, &cfg()).unwrap();
        assert!((c - INV_SQRT_PI).abs() < 1e-6, "{c}");
        assert!(rl_derivative_numeric(|_| 1.0, 0.5, 1e-5, &cfg()).is_err());
    }

    #[test]
    fn semigroup_small() {
        let x = model(DistributionSpec::exponential(1.0));
        let nested = weyl_integral_nested(&x, 0.3, 0.7, 0.5, &cfg()).unwrap();
        let direct = weyl_integral(&x, 1.0, 0.5, &cfg()).unwrap();
        assert!(((nested - direct) / direct).abs() < 1e-6);
    }
}
