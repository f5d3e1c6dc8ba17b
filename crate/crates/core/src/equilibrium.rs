//! n-th order fractional equilibrium distributions.
//!
//! For `X ≥ 0` with `0 < E[X^{nα}] < ∞` the equilibrium variable `X^{(n)}`
//! has survival `E[(X−t)₊^{nα}]/E[X^{nα}]`. Exponential laws are the fixed
//! points of this map.

use std::cell::RefCell;

use serde::Serialize;

use crate::distributions::DistributionModel;
use crate::error::{Error, Result};
use crate::fracops::{weyl_integral, weyl_integral_of, FracOrder};
use crate::numerics::{beta, gamma, integrate_singular_power_hinted, Hints, QuadratureConfig};

/// `X^{(n)}` for a fixed base law and order.
#[derive(Debug, Clone)]
pub struct EquilibriumView<'a> {
    base: &'a DistributionModel,
    order: FracOrder,
    norm: f64,
    cfg: QuadratureConfig,
}

impl<'a> EquilibriumView<'a> {
    /// Requires `n ≥ 1` and a finite positive `E[X^{nα}]`.
    pub fn new(base: &'a DistributionModel, order: FracOrder, cfg: &QuadratureConfig) -> Result<Self> {
        if order.n() == 0 {
            return Err(Error::invalid("n", "equilibrium order needs n >= 1"));
        }
        let norm = base.moment(order.total(), cfg)?;
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Divergence(format!("E[X^{}] = {norm}", order.total())));
        }
        Ok(EquilibriumView {
            base,
            order,
            norm,
            cfg: *cfg,
        })
    }

    pub fn base(&self) -> &DistributionModel {
        self.base
    }

    pub fn order(&self) -> FracOrder {
        self.order
    }

    /// `E[X^{nα}]`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `P(X^{(n)} > t)`.
    pub fn survival(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(1.0);
        }
        Ok(self.base.partial_moment(t, self.order.total(), &self.cfg)? / self.norm)
    }

    /// Survival through `Γ(nα+1)/E[X^{nα}]·I_−^{nα}F̄(t)`, with the Weyl
    /// integral done by quadrature.
    pub fn survival_via_weyl(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(1.0);
        }
        let s = self.order.total();
        Ok(gamma(s + 1.0)? / self.norm * weyl_integral(self.base, s, t, &self.cfg)?)
    }

    /// `nα·E[(X−t)₊^{nα−1}]/E[X^{nα}]`.
    pub fn density(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        let s = self.order.total();
        Ok(s * self.base.partial_moment(t, s - 1.0, &self.cfg)? / self.norm)
    }

    /// `E[(X^{(n)})^r] = nα·B(nα, r+1)·E[X^{nα+r}]/E[X^{nα}]`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("equilibrium moment order {r} must be > 0")));
        }
        let s = self.order.total();
        Ok(s * beta(s, r + 1.0)? * self.base.moment(s + r, &self.cfg)? / self.norm)
    }

    /// `∫_0^∞ t^r f_n(t) dt` by quadrature of the equilibrium density, for
    /// `r > −1`.
    pub fn moment_quadrature(&self, r: f64) -> Result<f64> {
        if !(r > -1.0) {
            return Err(Error::Domain(format!("equilibrium moment order {r} must be > -1")));
        }
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let f = |t: f64| match self.density(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let r = integrate_singular_power_hinted(f, 0.0, r + 1.0, self.base.hints(), &self.cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        r.into_value("equilibrium moment")
    }
}

/// Equilibrium survival evaluated through the recursion
/// `F̄_k = Γ(kα+1)/Γ((k−1)α+1)·E[X^{(k−1)α}]/E[X^{kα}]·I_−^α F̄_{k−1}`,
/// with one nested quadrature per level. Depth is capped at 3.
pub fn eq_survival_recursive(x: &DistributionModel, order: FracOrder, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let n = order.n();
    if n == 0 {
        return Err(Error::invalid("n", "equilibrium order needs n >= 1"));
    }
    if n > 3 {
        return Err(Error::invalid(
            "n",
            format!("recursive evaluation is limited to n <= 3, got {n}"),
        ));
    }
    if t < 0.0 {
        return Ok(1.0);
    }
    let alpha = order.alpha();
    let mut constants = Vec::with_capacity(n as usize);
    for k in 1..=n {
        let (hi, lo) = (k as f64 * alpha, (k - 1) as f64 * alpha);
        constants.push(gamma(hi + 1.0)? / gamma(lo + 1.0)? * x.moment(lo, cfg)? / x.moment(hi, cfg)?);
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let v = recursive_level(x, alpha, &constants, n as usize, t, cfg, &failure);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(v)
}

fn recursive_level(
    x: &DistributionModel,
    alpha: f64,
    constants: &[f64],
    k: usize,
    t: f64,
    cfg: &QuadratureConfig,
    failure: &RefCell<Option<Error>>,
) -> f64 {
    if k == 0 {
        return x.survival(t);
    }
    if failure.borrow().is_some() {
        return f64::NAN;
    }
    // inner levels run tighter so their error does not swamp the outer one
    let inner_cfg = cfg.scaled(0.05);
    let inner = |s: f64| recursive_level(x, alpha, constants, k - 1, s, &inner_cfg, failure);
    let r = weyl_integral_of(inner, alpha, t, x.hints(), cfg);
    match r.into_value(&format!("recursive equilibrium level {k}")) {
        Ok(v) => constants[k - 1] * v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    }
}

/// `P(X^{(1)} ≤ t) = α/E[X^α]·∫_0^∞ y^{α−1}P(y < X ≤ y+t) dy`.
pub fn first_order_cdf_interpretation(
    x: &DistributionModel,
    alpha: f64,
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let hints = x.hints().merge(&x.hints().shifted(t));
    let hints = Hints::new(hints.breaks, x.support_upper());
    let r = integrate_singular_power_hinted(|y| x.survival(y) - x.survival(y + t), 0.0, alpha, &hints, cfg);
    Ok(alpha / x.moment(alpha, cfg)? * r.into_value("first-order equilibrium cdf")?)
}

/// Largest deviation found for one `(α, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderDeviation {
    pub alpha: f64,
    pub n: u32,
    pub max_deviation: f64,
    pub worst_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacterizationReport {
    pub is_fixed_point: bool,
    pub max_deviation: f64,
    /// `(α, n, t)` where the overall maximum occurs.
    pub witness: (f64, u32, f64),
    pub per_order: Vec<OrderDeviation>,
}

/// Sup-distance between `f_n^α` and the density of `X` over an
/// `(α, n, t)` grid. `X` must be absolutely continuous.
pub fn characterization_check(
    x: &DistributionModel,
    alphas: &[f64],
    ns: &[u32],
    grid: &[f64],
    tol: f64,
    cfg: &QuadratureConfig,
) -> Result<CharacterizationReport> {
    if !x.is_absolutely_continuous() {
        return Err(Error::MissingDensity(x.spec().to_string()));
    }
    if alphas.is_empty() || ns.is_empty() || grid.is_empty() {
        return Err(Error::invalid("grid", "alphas, ns and grid must be non-empty"));
    }
    let mut per_order = Vec::with_capacity(alphas.len() * ns.len());
    for &alpha in alphas {
        for &n in ns {
            let view = EquilibriumView::new(x, FracOrder::new(alpha, n)?, cfg)?;
            let mut worst = OrderDeviation {
                alpha,
                n,
                max_deviation: 0.0,
                worst_t: grid[0],
            };
            for &t in grid {
                let dev = (view.density(t)? - x.density_ac(t)).abs();
                if dev > worst.max_deviation {
                    worst.max_deviation = dev;
                    worst.worst_t = t;
                }
            }
            per_order.push(worst);
        }
    }
    let top = per_order.iter().copied().fold(
        per_order[0],
        |a, b| if b.max_deviation > a.max_deviation { b } else { a },
    );
    Ok(CharacterizationReport {
        is_fixed_point: top.max_deviation <= tol,
        max_deviation: top.max_deviation,
        witness: (top.alpha, top.n, top.worst_t),
        per_order,
    })
}

/// 20 log-spaced points from `q/1000` to `q`, `q` the 0.99 quantile of `X`.
pub fn characterization_grid(x: &DistributionModel) -> Result<Vec<f64>> {
    let q = x.quantile(0.99)?;
    if !(q > 0.0) {
        return Err(Error::Domain("0.99 quantile is zero".into()));
    }
    Ok(log_grid(q * 1e-3, q, 20))
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..count)
                .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DistributionSpec;

    const E_M1: f64 = 0.367879441171442321595523770161;
    const E_M2: f64 = 0.135335283236612691893999494972;
    const E_M07: f64 = 0.496585303791409536757617611786;
    const ONE_MINUS_E_M1: f64 = 0.632120558828557678404476229839;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn model(spec: DistributionSpec) -> DistributionModel {
        DistributionModel::build(&spec).unwrap()
    }

    fn order(alpha: f64, n: u32) -> FracOrder {
        FracOrder::new(alpha, n).unwrap()
    }

    #[test]
    fn survival_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        let v = EquilibriumView::new(&x, order(0.5, 2), &cfg()).unwrap();
        assert!((v.survival(1.0).unwrap() - E_M1).abs() < 1e-14);
        assert_eq!(v.survival(0.0).unwrap(), 1.0);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let vu = EquilibriumView::new(&u, order(1.0, 1), &cfg()).unwrap();
        assert!((vu.survival(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((vu.survival_via_weyl(0.5).unwrap() - 0.25).abs() < 1e-9);
    }

    #[test]
    fn density_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        let v = EquilibriumView::new(&x, order(0.5, 1), &cfg()).unwrap();
        assert!((v.density(2.0).unwrap() - E_M2).abs() < 1e-14);
        let v1 = EquilibriumView::new(&x, order(1.0, 1), &cfg()).unwrap();
        assert!((v1.density(0.0).unwrap() - 1.0).abs() < 1e-15);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let vu = EquilibriumView::new(&u, order(1.0, 1), &cfg()).unwrap();
        assert!((vu.density(0.25).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn atom_at_threshold_is_ignored() {
        // the deductible atom sits at 0 = t and adds nothing for nα < 1
        let z = model(DistributionSpec::deductible(1.0, DistributionSpec::exponential(1.0)));
        let v = EquilibriumView::new(&z, order(0.5, 1), &cfg()).unwrap();
        let x = model(DistributionSpec::exponential(1.0));
        let vx = EquilibriumView::new(&x, order(0.5, 1), &cfg()).unwrap();
        assert!((v.density(0.0).unwrap() - vx.density(0.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn recursive_examples() {
        let x = model(DistributionSpec::exponential(1.0));
        let r = eq_survival_recursive(&x, order(0.5, 2), 1.0, &cfg()).unwrap();
        assert!(((r - E_M1) / E_M1).abs() < 1e-6, "{r}");
        let r1 = eq_survival_recursive(&x, order(1.0, 1), 0.7, &cfg()).unwrap();
        assert!((r1 - E_M07).abs() < 1e-9);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let r0 = eq_survival_recursive(&u, order(1.0, 2), 0.0, &cfg()).unwrap();
        assert!((r0 - 1.0).abs() < 1e-8);
        assert!(eq_survival_recursive(&x, order(0.5, 4), 0.0, &cfg()).is_err());
    }

    #[test]
    fn moments() {
        let x = model(DistributionSpec::exponential(1.0));
        for (alpha, n) in [(0.3, 1), (0.5, 2), (1.0, 3)] {
            let v = EquilibriumView::new(&x, order(alpha, n), &cfg()).unwrap();
            assert!((v.moment(1.0).unwrap() - 1.0).abs() < 1e-13);
        }
        let v = EquilibriumView::new(&x, order(0.5, 3), &cfg()).unwrap();
        assert!((v.moment(2.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((v.moment_quadrature(2.0).unwrap() - 2.0).abs() < 1e-7);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let vu = EquilibriumView::new(&u, order(1.0, 1), &cfg()).unwrap();
        assert!((vu.moment(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn first_order_cdf() {
        let x = model(DistributionSpec::exponential(1.0));
        let c = first_order_cdf_interpretation(&x, 1.0, 1.0, &cfg()).unwrap();
        assert!((c - ONE_MINUS_E_M1).abs() < 1e-9);
        assert_eq!(first_order_cdf_interpretation(&x, 0.5, 0.0, &cfg()).unwrap(), 0.0);
        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let cu = first_order_cdf_interpretation(&u, 1.0, 0.5, &cfg()).unwrap();
        assert!((cu - 0.75).abs() < 1e-9);
        for alpha in [0.3, 0.7] {
            let v = EquilibriumView::new(&u, order(alpha, 1), &cfg()).unwrap();
            let want = 1.0 - v.survival(0.4).unwrap();
            let got = first_order_cdf_interpretation(&u, alpha, 0.4, &cfg()).unwrap();
            assert!((got - want).abs() < 1e-7);
        }
    }

    #[test]
    fn characterization() {
        let e = model(DistributionSpec::exponential(2.0));
        let grid = characterization_grid(&e).unwrap();
        assert_eq!(grid.len(), 20);
        let rep = characterization_check(&e, &[0.3, 0.7, 1.0], &[1, 2], &grid, 1e-6, &cfg()).unwrap();
        assert!(rep.is_fixed_point, "{rep:?}");
        assert_eq!(rep.per_order.len(), 6);

        let w = model(DistributionSpec::weibull(2.0, 1.0));
        let rep = characterization_check(
            &w,
            &[0.3, 0.7, 1.0],
            &[1, 2],
            &characterization_grid(&w).unwrap(),
            1e-6,
            &cfg(),
        )
        .unwrap();
        assert!(!rep.is_fixed_point && rep.max_deviation > 0.05);

        let u = model(DistributionSpec::uniform(0.0, 1.0));
        let rep = characterization_check(&u, &[1.0], &[1], &characterization_grid(&u).unwrap(), 1e-6, &cfg()).unwrap();
        assert!(!rep.is_fixed_point);

        let z = model(DistributionSpec::zero_inflated(0.3, DistributionSpec::exponential(1.0)));
        assert!(matches!(
            characterization_check(&z, &[1.0], &[1], &[1.0], 1e-6, &cfg()),
            Err(Error::MissingDensity(_))
        ));
    }
}
