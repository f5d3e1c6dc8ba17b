//! Nonnegative random variables: survival functions, atoms, and fractional
//! (partial) moments.
//!
//! Every model answers `E[X^s]` and `E[(X−t)₊^s]` by quadrature. Kinds with
//! a closed form also answer them analytically; [`DistributionModel::moment`]
//! and [`DistributionModel::partial_moment`] prefer the closed form, while the
//! `*_quadrature` methods always integrate so the two routes can be compared.
//!
//! The positive part follows `(x)₊^s = x^s·1{x > 0}`, so an atom sitting
//! exactly at `t` never contributes to `E[(X−t)₊^s]`, for any `s`.

mod numeric;
mod spec;

use serde::Serialize;

pub use spec::{
    DeductibleParams, DistributionSpec, ExponentialParams, HyperExp2Params, NumericParams, UniformParams,
    WeibullParams, ZeroInflatedParams,
};

use crate::error::{Error, Result};
use crate::numerics::{gamma, integrate_singular_power_hinted, Hints, IntegralResult, QuadratureConfig};
use numeric::NumericSurvival;

/// A point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

#[derive(Debug, Clone)]
enum Kind {
    Exponential { rate: f64 },
    Uniform { lo: f64, hi: f64 },
    Weibull { shape: f64, scale: f64 },
    HyperExp2 { p: f64, rate1: f64, rate2: f64 },
    ZeroInflated { p: f64, inner: Box<DistributionModel> },
    Deductible { d: f64, inner: Box<DistributionModel> },
    Numeric(NumericSurvival),
}

/// A validated distribution ready for evaluation.
#[derive(Debug, Clone)]
pub struct DistributionModel {
    spec: DistributionSpec,
    kind: Kind,
    atoms: Vec<Atom>,
    hints: Hints,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn probability(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(Error::invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.retain(|a| a.mass > 0.0);
    atoms.sort_by(|a, b| a.location.total_cmp(&b.location));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match out.last_mut() {
            Some(last) if last.location == a.location => last.mass += a.mass,
            _ => out.push(a),
        }
    }
    out
}

impl DistributionModel {
    pub fn build(spec: &DistributionSpec) -> Result<Self> {
        let (kind, atoms, hints) = match spec {
            DistributionSpec::Exponential { params } => (
                Kind::Exponential {
                    rate: positive("lambda", params.lambda)?,
                },
                vec![],
                Hints::default(),
            ),
            DistributionSpec::Uniform { params } => {
                let (lo, hi) = (params.a, params.b);
                if !(lo >= 0.0) || !hi.is_finite() || !(hi > lo) {
                    return Err(Error::invalid(
                        "b",
                        format!("need 0 <= a < b < inf, got a = {lo}, b = {hi}"),
                    ));
                }
                (Kind::Uniform { lo, hi }, vec![], Hints::new(vec![lo], hi))
            }
            DistributionSpec::Weibull { params } => (
                Kind::Weibull {
                    shape: positive("k", params.k)?,
                    scale: positive("lambda", params.lambda)?,
                },
                vec![],
                Hints::default(),
            ),
            DistributionSpec::Hyperexp2 { params } => (
                Kind::HyperExp2 {
                    p: probability("p", params.p)?,
                    rate1: positive("lambda1", params.lambda1)?,
                    rate2: positive("lambda2", params.lambda2)?,
                },
                vec![],
                Hints::default(),
            ),
            DistributionSpec::ZeroInflated { params, inner } => {
                let p = probability("p", params.p)?;
                let inner = DistributionModel::build(inner)?;
                let mut atoms: Vec<Atom> = inner
                    .atoms
                    .iter()
                    .map(|a| Atom {
                        location: a.location,
                        mass: (1.0 - p) * a.mass,
                    })
                    .collect();
                atoms.push(Atom { location: 0.0, mass: p });
                let hints = inner.hints.clone();
                (
                    Kind::ZeroInflated {
                        p,
                        inner: Box::new(inner),
                    },
                    merge_atoms(atoms),
                    hints,
                )
            }
            DistributionSpec::Deductible { params, inner } => {
                let d = positive("d", params.d)?;
                let inner = DistributionModel::build(inner)?;
                if d >= inner.support_upper() {
                    return Err(Error::invalid(
                        "d",
                        format!(
                            "deductible {d} leaves no mass above it (support ends at {})",
                            inner.support_upper()
                        ),
                    ));
                }
                let mut atoms: Vec<Atom> = inner
                    .atoms
                    .iter()
                    .filter(|a| a.location > d)
                    .map(|a| Atom {
                        location: a.location - d,
                        mass: a.mass,
                    })
                    .collect();
                atoms.push(Atom {
                    location: 0.0,
                    mass: 1.0 - inner.survival(d),
                });
                let shifted = inner.hints.shifted(d);
                let hints = Hints::new(shifted.breaks.into_iter().filter(|&b| b > 0.0).collect(), shifted.upper);
                (
                    Kind::Deductible {
                        d,
                        inner: Box::new(inner),
                    },
                    merge_atoms(atoms),
                    hints,
                )
            }
            DistributionSpec::Numeric { params } => {
                let table = NumericSurvival::new(&params.knots)?;
                let atoms = merge_atoms(vec![Atom {
                    location: 0.0,
                    mass: table.atom_at_zero(),
                }]);
                let hints = Hints::new(table.knots().to_vec(), table.upper());
                (Kind::Numeric(table), atoms, hints)
            }
        };
        Ok(DistributionModel {
            spec: spec.clone(),
            kind,
            atoms,
            hints,
        })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn mass_at_zero(&self) -> f64 {
        self.atoms.iter().find(|a| a.location == 0.0).map_or(0.0, |a| a.mass)
    }

    /// No point masses anywhere.
    pub fn is_absolutely_continuous(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Smallest `b` with `P(X > b) = 0`, possibly infinite.
    pub fn support_upper(&self) -> f64 {
        self.hints.upper
    }

    pub fn support_interval(&self) -> (f64, f64) {
        (0.0, self.support_upper())
    }

    /// Kinks of the survival function and the support end, for quadrature.
    pub fn hints(&self) -> &Hints {
        &self.hints
    }

    /// `P(X > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 1.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => (-rate * t).exp(),
            Kind::Uniform { lo, hi } => {
                if t < *lo {
                    1.0
                } else if t >= *hi {
                    0.0
                } else {
                    (hi - t) / (hi - lo)
                }
            }
            Kind::Weibull { shape, scale } => (-(t / scale).powf(*shape)).exp(),
            Kind::HyperExp2 { p, rate1, rate2 } => p * (-rate1 * t).exp() + (1.0 - p) * (-rate2 * t).exp(),
            Kind::ZeroInflated { p, inner } => (1.0 - p) * inner.survival(t),
            Kind::Deductible { d, inner } => inner.survival(d + t),
            Kind::Numeric(table) => table.survival(t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Density of the absolutely continuous part of the law. It integrates
    /// to `1 − Σ atom masses`.
    pub fn density_ac(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match &self.kind {
            Kind::Exponential { rate } => rate * (-rate * t).exp(),
            Kind::Uniform { lo, hi } => {
                if t >= *lo && t < *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            Kind::Weibull { shape, scale } => {
                if t == 0.0 {
                    return if *shape < 1.0 {
                        f64::INFINITY
                    } else if *shape == 1.0 {
                        1.0 / scale
                    } else {
                        0.0
                    };
                }
                let z = t / scale;
                shape / scale * z.powf(shape - 1.0) * (-z.powf(*shape)).exp()
            }
            Kind::HyperExp2 { p, rate1, rate2 } => {
                p * rate1 * (-rate1 * t).exp() + (1.0 - p) * rate2 * (-rate2 * t).exp()
            }
            Kind::ZeroInflated { p, inner } => (1.0 - p) * inner.density_ac(t),
            Kind::Deductible { d, inner } => inner.density_ac(d + t),
            Kind::Numeric(table) => table.density(t),
        }
    }

    /// Density of the whole law; fails when the law has atoms.
    pub fn density(&self, t: f64) -> Result<f64> {
        if self.is_absolutely_continuous() {
            Ok(self.density_ac(t))
        } else {
            Err(Error::MissingDensity(self.spec.to_string()))
        }
    }

    /// Smallest `t` with `P(X ≤ t) ≥ q`, located by bisection.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&q) {
            return Err(Error::invalid("q", format!("must lie in [0, 1), got {q}")));
        }
        let target = 1.0 - q;
        if self.survival(0.0) <= target {
            return Ok(0.0);
        }
        let mut hi = if self.support_upper().is_finite() {
            self.support_upper()
        } else {
            1.0
        };
        while self.survival(hi) > target {
            hi *= 2.0;
            if !hi.is_finite() {
                return Err(Error::Domain(format!("quantile {q} not reached")));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.survival(mid) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    fn check_moment_order(&self, s: f64) -> Result<()> {
        if !(s > -1.0) || !s.is_finite() {
            return Err(Error::Domain(format!("moment order {s} must be finite and > -1")));
        }
        if s < 0.0 && self.mass_at_zero() > 0.0 {
            return Err(Error::Divergence(format!(
                "E[X^{s}] is infinite: {} has an atom at 0",
                self.spec
            )));
        }
        if let Kind::Weibull { shape, .. } = self.kind {
            if s <= -shape {
                return Err(Error::Divergence(format!(
                    "E[X^{s}] is infinite for Weibull shape {shape}"
                )));
            }
        }
        Ok(())
    }

    fn check_partial_order(&self, t: f64, s: f64) -> Result<()> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("threshold {t} must be finite and >= 0")));
        }
        if !(s > -1.0) || !s.is_finite() {
            return Err(Error::Domain(format!(
                "partial moment order {s} must be finite and > -1"
            )));
        }
        if s < 0.0 {
            if let Some(a) = self.atoms.iter().find(|a| a.location > t) {
                return Err(Error::Divergence(format!(
                    "E[(X-{t})_+^{s}] is infinite: atom at {} lies above the threshold",
                    a.location
                )));
            }
            if let Kind::Weibull { shape, .. } = self.kind {
                if t == 0.0 && s <= -shape {
                    return Err(Error::Divergence(format!(
                        "E[X^{s}] is infinite for Weibull shape {shape}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// `E[X^s]` analytically, when this kind has a closed form.
    pub fn closed_form_moment(&self, s: f64) -> Option<Result<f64>> {
        if let Err(e) = self.check_moment_order(s) {
            return Some(Err(e));
        }
        if s == 0.0 {
            return Some(Ok(1.0));
        }
        match &self.kind {
            Kind::Exponential { rate } => Some(gamma(s + 1.0).map(|g| g * rate.powf(-s))),
            Kind::Uniform { lo, hi } => Some(Ok((hi.powf(s + 1.0) - lo.powf(s + 1.0)) / ((s + 1.0) * (hi - lo)))),
            Kind::Weibull { shape, scale } => Some(gamma(1.0 + s / shape).map(|g| scale.powf(s) * g)),
            Kind::HyperExp2 { p, rate1, rate2 } => {
                Some(gamma(s + 1.0).map(|g| g * (p * rate1.powf(-s) + (1.0 - p) * rate2.powf(-s))))
            }
            // s > 0 here: the zero atom was rejected above for s < 0
            Kind::ZeroInflated { p, inner } => inner.closed_form_moment(s).map(|r| r.map(|m| (1.0 - p) * m)),
            Kind::Deductible { d, inner } => inner.closed_form_partial(*d, s),
            Kind::Numeric(_) => None,
        }
    }

    /// `E[(X−t)₊^s]` analytically, when this kind has a closed form.
    pub fn closed_form_partial(&self, t: f64, s: f64) -> Option<Result<f64>> {
        if let Err(e) = self.check_partial_order(t, s) {
            return Some(Err(e));
        }
        if t >= self.support_upper() {
            return Some(Ok(0.0));
        }
        if s == 0.0 {
            return Some(Ok(self.survival(t)));
        }
        match &self.kind {
            Kind::Exponential { rate } => Some(gamma(s + 1.0).map(|g| (-rate * t).exp() * g * rate.powf(-s))),
            Kind::Uniform { lo, hi } => {
                let from = lo.max(t);
                Some(Ok(
                    ((hi - t).powf(s + 1.0) - (from - t).powf(s + 1.0)) / ((s + 1.0) * (hi - lo))
                ))
            }
            Kind::Weibull { .. } => None,
            Kind::HyperExp2 { p, rate1, rate2 } => Some(gamma(s + 1.0).map(|g| {
                g * (p * (-rate1 * t).exp() * rate1.powf(-s) + (1.0 - p) * (-rate2 * t).exp() * rate2.powf(-s))
            })),
            // the zero atom sits at or below t and contributes nothing
            Kind::ZeroInflated { p, inner } => inner.closed_form_partial(t, s).map(|r| r.map(|m| (1.0 - p) * m)),
            Kind::Deductible { d, inner } => inner.closed_form_partial(d + t, s),
            Kind::Numeric(_) => None,
        }
    }

    /// True when [`closed_form_partial`](Self::closed_form_partial) is
    /// available for every order.
    pub fn has_closed_form(&self) -> bool {
        match &self.kind {
            Kind::Weibull { .. } | Kind::Numeric(_) => false,
            Kind::ZeroInflated { inner, .. } | Kind::Deductible { inner, .. } => inner.has_closed_form(),
            _ => true,
        }
    }

    /// `E[X^s]`, closed form when available.
    pub fn moment(&self, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
        match self.closed_form_moment(s) {
            Some(r) => r,
            None => self.moment_quadrature(s, cfg)?.into_value("moment"),
        }
    }

    /// `E[(X−t)₊^s]`, closed form when available.
    pub fn partial_moment(&self, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<f64> {
        match self.closed_form_partial(t, s) {
            Some(r) => r,
            None => self.partial_moment_quadrature(t, s, cfg)?.into_value("partial moment"),
        }
    }

    /// `E[X^s]` by quadrature.
    pub fn moment_quadrature(&self, s: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
        self.check_moment_order(s)?;
        if s < 0.0 {
            // no atom at zero, so E[X^s] = E[(X−0)₊^s]
            return self.partial_moment_quadrature(0.0, s, cfg);
        }
        if s == 0.0 {
            return Ok(exact(1.0));
        }
        self.partial_moment_quadrature(0.0, s, cfg)
    }

    /// `E[(X−t)₊^s]` by quadrature.
    ///
    /// For `s > 0` this integrates `s·(x−t)^{s−1}F̄(x)` over `(t, ∞)`, which
    /// picks up atoms automatically. For `s < 0` it integrates
    /// `(x−t)^s` against the continuous density.
    pub fn partial_moment_quadrature(&self, t: f64, s: f64, cfg: &QuadratureConfig) -> Result<IntegralResult> {
        self.check_partial_order(t, s)?;
        if t >= self.support_upper() {
            return Ok(exact(0.0));
        }
        if s == 0.0 {
            return Ok(exact(self.survival(t)));
        }
        if s > 0.0 {
            let r = integrate_singular_power_hinted(|x| self.survival(x), t, s, &self.hints, cfg);
            return Ok(IntegralResult {
                value: s * r.value,
                error_estimate: s * r.error_estimate,
                ..r
            });
        }
        Ok(integrate_singular_power_hinted(
            |x| self.density_ac(x),
            t,
            s + 1.0,
            &self.hints,
            cfg,
        ))
    }
}

impl TryFrom<&DistributionSpec> for DistributionModel {
    type Error = Error;

    fn try_from(spec: &DistributionSpec) -> Result<Self> {
        DistributionModel::build(spec)
    }
}

fn exact(value: f64) -> IntegralResult {
    IntegralResult {
        value,
        error_estimate: 0.0,
        converged: true,
        upper: f64::INFINITY,
    }
}
