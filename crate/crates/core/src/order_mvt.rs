//! Survival bounded order, the variable `Z_α` built from an ordered pair,
//! and the fractional probabilistic mean value theorem.
//!
//! Throughout, a pair `(X, Y)` is ordered as `X ≥ Y` in the survival bounded
//! order of order `α`, i.e. `F̄_X^{(α)} ≤ F̄_Y^{(α)}`, which forces
//! `E[X^α] < E[Y^α]`.

use serde::Serialize;

use crate::distributions::DistributionModel;
use crate::equilibrium::log_grid;
use crate::error::{Error, Result};
use crate::fracops::{power_rl_derivative, PowerSum, EXPONENT_TOL};
use crate::numerics::{beta, gamma, integrate_semi_infinite_hinted, reciprocal_gamma, Hints, QuadratureConfig};

/// Gaps at or below this count as "order holds".
pub const ORDER_SLACK: f64 = 1e-10;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            "alpha",
            format!("must be positive and finite, got {alpha}"),
        ))
    }
}

/// `F̄^{(α)}(t) = E[(X−t)₊^{α−1}]/Γ(α)` for `t` below the support end, 0 above.
pub fn alpha_survival_transform(x: &DistributionModel, alpha: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_alpha(alpha)?;
    if t >= x.support_upper() {
        return Ok(0.0);
    }
    Ok(x.partial_moment(t.max(0.0), alpha - 1.0, cfg)? * reciprocal_gamma(alpha))
}

/// `λ_α(X) = E[X^α]/Γ(α+1)`.
pub fn normalized_moment(x: &DistributionModel, alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(x.moment(alpha, cfg)? / gamma(alpha + 1.0)?)
}

/// `V_α(X) = E[X^{α+1}] − α·(E[X^α])²`.
pub fn fractional_variance(x: &DistributionModel, alpha: f64, cfg: &QuadratureConfig) -> Result<f64> {
    check_alpha(alpha)?;
    let m = x.moment(alpha, cfg)?;
    Ok(x.moment(alpha + 1.0, cfg)? - alpha * m * m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderCheckResult {
    pub holds: bool,
    pub worst_t: f64,
    /// `max_t F̄_X^{(α)}(t) − F̄_Y^{(α)}(t)`; positive means violated.
    pub worst_gap: f64,
}

/// Relative slack under which `E[Z_α]` is treated as equal to a threshold.
pub const MEAN_TIE_TOL: f64 = 1e-9;

/// Grid for order checks: 0, 64 log-spaced points up to the larger 0.999
/// quantile (or support end), and the finite support ends.
pub fn default_order_grid(x: &DistributionModel, y: &DistributionModel) -> Result<Vec<f64>> {
    let reach = |m: &DistributionModel| -> Result<f64> {
        if m.support_upper().is_finite() {
            Ok(m.support_upper())
        } else {
            m.quantile(0.999)
        }
    };
    let hi = reach(x)?.max(reach(y)?);
    let mut grid = vec![0.0];
    if hi > 0.0 {
        grid.extend(log_grid(hi * 1e-6, hi, 64));
    }
    grid.extend(
        [x.support_upper(), y.support_upper()]
            .into_iter()
            .filter(|b| b.is_finite()),
    );
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Tests `F̄_X^{(α)} ≤ F̄_Y^{(α)}` on `grid`.
pub fn check_survival_bounded_order(
    x: &DistributionModel,
    y: &DistributionModel,
    alpha: f64,
    grid: &[f64],
    cfg: &QuadratureConfig,
) -> Result<OrderCheckResult> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "order check needs at least one point"));
    }
    let mut worst = OrderCheckResult {
        holds: true,
        worst_t: grid[0],
        worst_gap: f64::NEG_INFINITY,
    };
    for &t in grid {
        let gap = alpha_survival_transform(x, alpha, t, cfg)? - alpha_survival_transform(y, alpha, t, cfg)?;
        if gap > worst.worst_gap {
            worst.worst_gap = gap;
            worst.worst_t = t;
        }
    }
    worst.holds = worst.worst_gap <= ORDER_SLACK;
    Ok(worst)
}

/// The variable `Z_α` with density
/// `α·(E[(Y−t)₊^{α−1}] − E[(X−t)₊^{α−1}])/(E[Y^α] − E[X^α])`.
#[derive(Debug, Clone)]
pub struct ZAlphaModel {
    x: DistributionModel,
    y: DistributionModel,
    alpha: f64,
    ex: f64,
    ey: f64,
    order: Option<OrderCheckResult>,
    hints: Hints,
    cfg: QuadratureConfig,
}

impl ZAlphaModel {
    /// Builds `Z_α` after confirming the order on the default grid.
    pub fn verified(x: &DistributionModel, y: &DistributionModel, alpha: f64, cfg: &QuadratureConfig) -> Result<Self> {
        let grid = default_order_grid(x, y)?;
        Self::verified_on(x, y, alpha, &grid, cfg)
    }

    pub fn verified_on(
        x: &DistributionModel,
        y: &DistributionModel,
        alpha: f64,
        grid: &[f64],
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        let check = check_survival_bounded_order(x, y, alpha, grid, cfg)?;
        if !check.holds {
            return Err(Error::OrderViolation {
                worst_t: check.worst_t,
                worst_gap: check.worst_gap,
            });
        }
        let mut z = Self::new_unchecked(x, y, alpha, cfg)?;
        z.order = Some(check);
        Ok(z)
    }

    /// Builds `Z_α` without checking the order; the density may then go
    /// negative. Still requires `E[X^α] < E[Y^α]`.
    pub fn new_unchecked(
        x: &DistributionModel,
        y: &DistributionModel,
        alpha: f64,
        cfg: &QuadratureConfig,
    ) -> Result<Self> {
        check_alpha(alpha)?;
        let ex = x.moment(alpha, cfg)?;
        let ey = y.moment(alpha, cfg)?;
        if !(ey > ex) {
            return Err(Error::invalid("y", format!("need E[Y^a] > E[X^a], got {ey} <= {ex}")));
        }
        Ok(ZAlphaModel {
            x: x.clone(),
            y: y.clone(),
            alpha,
            ex,
            ey,
            order: None,
            hints: x.hints().merge(y.hints()),
            cfg: *cfg,
        })
    }

    pub fn x(&self) -> &DistributionModel {
        &self.x
    }

    pub fn y(&self) -> &DistributionModel {
        &self.y
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The order check this model was built with, if any.
    pub fn order_check(&self) -> Option<OrderCheckResult> {
        self.order
    }

    /// `E[Y^α] − E[X^α]`.
    pub fn denom(&self) -> f64 {
        self.ey - self.ex
    }

    /// `c = E[Y^α]/(E[Y^α] − E[X^α])`.
    pub fn mix_c(&self) -> f64 {
        self.ey / self.denom()
    }

    pub fn moment_x(&self) -> f64 {
        self.ex
    }

    pub fn moment_y(&self) -> f64 {
        self.ey
    }

    pub fn hints(&self) -> &Hints {
        &self.hints
    }

    pub fn density(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Ok(0.0);
        }
        let s = self.alpha - 1.0;
        let py = self.y.partial_moment(t, s, &self.cfg)?;
        let px = self.x.partial_moment(t, s, &self.cfg)?;
        Ok(self.alpha * (py - px) / self.denom())
    }

    /// `(f_Z(t), c·f_{Y^{(1)}}(t) + (1−c)·f_{X^{(1)}}(t))`.
    pub fn mixture_identity(&self, t: f64) -> Result<(f64, f64)> {
        let c = self.mix_c();
        let fy = first_order_density(&self.y, self.alpha, self.ey, t, &self.cfg)?;
        let fx = first_order_density(&self.x, self.alpha, self.ex, t, &self.cfg)?;
        Ok((self.density(t)?, c * fy + (1.0 - c) * fx))
    }

    /// `E[Z^r] = αB(α, r+1)·(E[Y^{α+r}] − E[X^{α+r}])/(E[Y^α] − E[X^α])`.
    pub fn moment(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Domain(format!("Z moment order {r} must be > 0")));
        }
        let a = self.alpha;
        let diff = self.y.moment(a + r, &self.cfg)? - self.x.moment(a + r, &self.cfg)?;
        Ok(a * beta(a, r + 1.0)? * diff / self.denom())
    }

    /// `∫ t^r f_Z(t) dt` by quadrature, `r > −1`.
    pub fn moment_quadrature(&self, r: f64) -> Result<f64> {
        let g = PowerSum::monomial(1.0, r)?;
        self.expectation(&g)
    }

    /// `∫ f_Z`.
    pub fn total_mass(&self) -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let f = |t: f64| match self.density(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        };
        let r = integrate_semi_infinite_hinted(f, 0.0, &self.hints, &self.cfg);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        r.into_value("Z density mass")
    }

    /// `E[h(Z)]` by quadrature against the density.
    pub fn expectation(&self, h: &PowerSum) -> Result<f64> {
        h.integrate_against(|t| self.density(t), &self.hints, &self.cfg)
    }

    pub fn classify_mean_location(&self) -> Result<MeanLocation> {
        let a = self.ex;
        let b = self.ey;
        let alpha = self.alpha;
        let ez = self.moment(1.0)?;
        let dv = fractional_variance(&self.y, alpha, &self.cfg)? - fractional_variance(&self.x, alpha, &self.cfg)?;
        let d = b - a;
        let lower = -d * (alpha * b - a);
        let upper = d * (b - alpha * a);

        // Both cases are closed at the thresholds; a tie within rounding is
        // resolved toward the closed side in both computations alike.
        let tol_mean = MEAN_TIE_TOL * a.abs().max(b.abs()).max(1.0);
        let tol_var = tol_mean * (alpha + 1.0) * d;
        let case = if ez <= a + tol_mean {
            MeanCase::BelowX
        } else if ez <= b + tol_mean {
            MeanCase::Between
        } else {
            MeanCase::AboveY
        };
        let case_from_variance = if dv <= lower + tol_var {
            MeanCase::BelowX
        } else if dv <= upper + tol_var {
            MeanCase::Between
        } else {
            MeanCase::AboveY
        };
        let identity_lhs = (ez - a) / d;
        let identity_rhs = ((alpha * b - a) / d + dv / (d * d)) / (alpha + 1.0);
        Ok(MeanLocation {
            mean_z: ez,
            moment_x: a,
            moment_y: b,
            delta_variance: dv,
            lower_threshold: lower,
            upper_threshold: upper,
            case,
            case_from_variance,
            identity_lhs,
            identity_rhs,
            identity_residual: (identity_lhs - identity_rhs).abs(),
            equal_variance_gap: ez - 2.0 * alpha / (alpha + 1.0) * (a + b) / 2.0,
        })
    }
}

fn first_order_density(m: &DistributionModel, alpha: f64, norm: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    if t < 0.0 {
        return Ok(0.0);
    }
    Ok(alpha * m.partial_moment(t, alpha - 1.0, cfg)? / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanCase {
    /// `E[Z] ≤ E[X^α]`.
    BelowX,
    Between,
    /// `E[Z] ≥ E[Y^α]`.
    AboveY,
}

/// Where `E[Z_α]` falls relative to `E[X^α]` and `E[Y^α]`, computed both
/// directly and from the difference of fractional variances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanLocation {
    pub mean_z: f64,
    pub moment_x: f64,
    pub moment_y: f64,
    /// `V_α(Y) − V_α(X)`.
    pub delta_variance: f64,
    /// `−(E[Y^α]−E[X^α])(αE[Y^α]−E[X^α])`.
    pub lower_threshold: f64,
    /// `(E[Y^α]−E[X^α])(E[Y^α]−αE[X^α])`.
    pub upper_threshold: f64,
    pub case: MeanCase,
    pub case_from_variance: MeanCase,
    pub identity_lhs: f64,
    pub identity_rhs: f64,
    pub identity_residual: f64,
    /// `E[Z] − 2α/(α+1)·(E[X^α]+E[Y^α])/2`; zero exactly when the
    /// fractional variances agree.
    pub equal_variance_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvtReport {
    pub lhs: f64,
    pub term_c0: f64,
    pub term_main: f64,
    pub residual: f64,
}

/// `c₀ = Γ(α)·lim_{x→0⁺} x^{1−α}g(x)` for a power sum with no exponent
/// below `α−1`.
pub fn mvt_c0(g: &PowerSum, alpha: f64) -> Result<f64> {
    if let Some(t) = g.terms().iter().find(|t| t.exp < alpha - 1.0 - EXPONENT_TOL) {
        return Err(Error::Precondition(format!(
            "exponent {} lies below alpha - 1 = {}",
            t.exp,
            alpha - 1.0
        )));
    }
    Ok(gamma(alpha)? * g.coefficient_of(alpha - 1.0))
}

/// Both sides of
/// `E[g(Y)] − E[g(X)] = c₀/Γ(α)·(E[Y^{α−1}] − E[X^{α−1}]) + (λ_α(Y) − λ_α(X))·E[D^α g(Z_α)]`.
pub fn mvt_verify(z: &ZAlphaModel, g: &PowerSum) -> Result<MvtReport> {
    let alpha = z.alpha;
    let cfg = &z.cfg;
    let c0 = mvt_c0(g, alpha)?;
    let lhs = g.expectation(&z.y, cfg)? - g.expectation(&z.x, cfg)?;
    let term_c0 = if c0 == 0.0 {
        0.0
    } else {
        c0 * reciprocal_gamma(alpha) * (z.y.moment(alpha - 1.0, cfg)? - z.x.moment(alpha - 1.0, cfg)?)
    };
    let dg = power_rl_derivative(g, 1, alpha);
    let lambda_diff = (z.ey - z.ex) / gamma(alpha + 1.0)?;
    let term_main = lambda_diff * z.expectation(&dg)?;
    Ok(MvtReport {
        lhs,
        term_c0,
        term_main,
        residual: lhs - (term_c0 + term_main),
    })
}
