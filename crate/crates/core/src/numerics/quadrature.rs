//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! Everything funnels into one global-adaptive engine: a set of initial
//! panels (split at caller-supplied breakpoints, and for semi-infinite ranges
//! extended by geometric doubling) is refined by repeatedly bisecting the
//! panel with the largest error estimate.
//!
//! Power-law endpoint weights `(x−t)^{p−1}` with `0 < p < 1` are removed by
//! the substitution `u = (x−t)^p`, which turns
//! `∫_t^∞ (x−t)^{p−1} f(x) dx` into `(1/p) ∫_0^∞ f(t + u^{1/p}) du`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on bisections per integral, independent of `max_depth`.
const MAX_SPLITS: usize = 20_000;
/// Hard cap on doublings of the truncation point.
const MAX_DOUBLINGS: usize = 120;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum bisection depth of any panel.
    pub max_depth: u32,
    /// Truncation threshold for semi-infinite ranges.
    pub tail_epsilon: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_depth: 60,
            tail_epsilon: 1e-14,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("tail_epsilon", self.tail_epsilon),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.max_depth < 1 {
            return Err(Error::invalid("max_depth", "must be at least 1"));
        }
        Ok(())
    }

    /// Same config with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        QuadratureConfig {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralResult {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
    /// Upper integration limit actually used, in the caller's coordinates.
    /// For semi-infinite ranges this is the truncation point.
    pub upper: f64,
}

impl IntegralResult {
    /// Unwraps the value, turning a non-converged or non-finite result into
    /// [`Error::NonConvergence`].
    pub fn into_value(self, what: &str) -> Result<f64> {
        if self.converged && self.value.is_finite() {
            Ok(self.value)
        } else {
            Err(Error::NonConvergence(format!(
                "{what}: value {:e}, error estimate {:e}",
                self.value, self.error_estimate
            )))
        }
    }
}

/// Structural knowledge about an integrand: interior points where it is not
/// smooth, and a point beyond which it vanishes identically.
#[derive(Debug, Clone, PartialEq)]
pub struct Hints {
    pub breaks: Vec<f64>,
    pub upper: f64,
}

impl Default for Hints {
    fn default() -> Self {
        Hints {
            breaks: Vec::new(),
            upper: f64::INFINITY,
        }
    }
}

impl Hints {
    pub fn new(mut breaks: Vec<f64>, upper: f64) -> Self {
        breaks.retain(|b| b.is_finite());
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Hints { breaks, upper }
    }

    /// Union of two hint sets; the upper limit is the larger one.
    pub fn merge(&self, other: &Hints) -> Hints {
        let mut breaks = self.breaks.clone();
        breaks.extend_from_slice(&other.breaks);
        if self.upper.is_finite() {
            breaks.push(self.upper);
        }
        if other.upper.is_finite() {
            breaks.push(other.upper);
        }
        Hints::new(breaks, self.upper.max(other.upper))
    }

    /// Hints for `x ↦ f(x + shift)` given hints for `f`.
    pub fn shifted(&self, shift: f64) -> Hints {
        Hints::new(self.breaks.iter().map(|b| b - shift).collect(), self.upper - shift)
    }
}

// Gauss–Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
    depth: u32,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64, depth: u32) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
        depth,
    }
}

/// Global adaptive refinement over an initial set of panels.
fn refine(f: &dyn Fn(f64) -> f64, initial: Vec<Panel>, cfg: &QuadratureConfig) -> (f64, f64, bool) {
    let mut heap: BinaryHeap<Panel> = initial.into_iter().collect();
    let mut frozen: Vec<Panel> = Vec::new();
    let totals = |heap: &BinaryHeap<Panel>, frozen: &[Panel]| {
        let mut v = 0.0;
        let mut e = 0.0;
        for p in heap.iter().chain(frozen.iter()) {
            v += p.value;
            e += p.error;
        }
        (v, e)
    };

    let (mut value, mut error) = totals(&heap, &frozen);
    let mut splits = 0;
    while error > cfg.tolerance(value) && splits < MAX_SPLITS {
        let Some(worst) = heap.pop() else { break };
        if worst.value.is_nan() {
            frozen.push(worst);
            break;
        }
        if worst.depth >= cfg.max_depth {
            frozen.push(worst);
            (value, error) = totals(&heap, &frozen);
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel can no longer be bisected in floating point
            frozen.push(worst);
            (value, error) = totals(&heap, &frozen);
            continue;
        }
        let left = gk15(f, worst.a, mid, worst.depth + 1);
        let right = gk15(f, mid, worst.b, worst.depth + 1);
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        splits += 1;
        if splits % 64 == 0 {
            // resum to keep the running totals free of cancellation drift
            (value, error) = totals(&heap, &frozen);
        }
    }
    let (value, error) = totals(&heap, &frozen);
    let converged = value.is_finite() && error.is_finite() && error <= cfg.tolerance(value);
    (value, error, converged)
}

fn initial_panels(f: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> Vec<Panel> {
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2).map(|w| gk15(f, w[0], w[1], 0)).collect()
}

/// ∫_a^b f over a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: &QuadratureConfig) -> IntegralResult {
    integrate_with_breaks(f, a, b, &[], cfg)
}

/// ∫_a^b f with the range pre-split at `breaks`.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> IntegralResult {
    if b == a {
        return IntegralResult {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
            upper: b,
        };
    }
    if b < a {
        let r = integrate_with_breaks(f, b, a, breaks, cfg);
        return IntegralResult {
            value: -r.value,
            upper: b,
            ..r
        };
    }
    let panels = initial_panels(&f, a, b, breaks);
    let (value, error_estimate, converged) = refine(&f, panels, cfg);
    IntegralResult {
        value,
        error_estimate,
        converged,
        upper: b,
    }
}

/// ∫_a^∞ f.
///
/// The range is truncated at a point `T` found by geometric doubling from
/// `T₀ = a + 1`; doubling stops once the integral of `|f|` over the newest
/// segment falls below `tail_epsilon·(1 + |value so far|)`. The last
/// segment's magnitude is added to the error estimate to account for the
/// neglected tail.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, cfg: &QuadratureConfig) -> IntegralResult {
    integrate_semi_infinite_hinted(f, a, &Hints::default(), cfg)
}

pub fn integrate_semi_infinite_hinted<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    hints: &Hints,
    cfg: &QuadratureConfig,
) -> IntegralResult {
    if hints.upper.is_finite() {
        if hints.upper <= a {
            return IntegralResult {
                value: 0.0,
                error_estimate: 0.0,
                converged: true,
                upper: a,
            };
        }
        return integrate_with_breaks(f, a, hints.upper, &hints.breaks, cfg);
    }

    let f: &dyn Fn(f64) -> f64 = &f;
    let start = hints.breaks.iter().copied().filter(|&x| x > a).fold(a, f64::max);
    let mut panels = if start > a {
        initial_panels(f, a, start, &hints.breaks)
    } else {
        Vec::new()
    };

    let mut running: f64 = panels.iter().map(|p| p.value).sum();
    let mut lo = start;
    let mut width = 1.0;
    let mut stabilized = false;
    let mut tail = 0.0;
    for _ in 0..MAX_DOUBLINGS {
        let hi = lo + width;
        if !hi.is_finite() {
            break;
        }
        let seg = gk15(f, lo, hi, 0);
        running += seg.value;
        panels.push(seg);
        lo = hi;
        // first segment [start, start+1], then [T, 2T−start], ...
        width = lo - start;
        if seg.abs_value < cfg.tail_epsilon * (1.0 + running.abs()) {
            stabilized = true;
            tail = seg.abs_value;
            break;
        }
    }

    let (value, error, converged) = refine(f, panels, cfg);
    let error_estimate = error + tail;
    IntegralResult {
        value,
        error_estimate,
        converged: converged && stabilized && error_estimate <= cfg.tolerance(value),
        upper: lo,
    }
}

/// ∫_t^∞ (x−t)^{p−1} f(x) dx for `p > 0`.
pub fn integrate_singular_power<F: Fn(f64) -> f64>(f: F, t: f64, p: f64, cfg: &QuadratureConfig) -> IntegralResult {
    integrate_singular_power_hinted(f, t, p, &Hints::default(), cfg)
}

pub fn integrate_singular_power_hinted<F: Fn(f64) -> f64>(
    f: F,
    t: f64,
    p: f64,
    hints: &Hints,
    cfg: &QuadratureConfig,
) -> IntegralResult {
    assert!(p > 0.0, "integrate_singular_power needs p > 0, got {p}");
    if p >= 1.0 {
        let weighted = |x: f64| {
            let d = x - t;
            if d <= 0.0 {
                0.0
            } else if p == 1.0 {
                f(x)
            } else {
                d.powf(p - 1.0) * f(x)
            }
        };
        return integrate_semi_infinite_hinted(weighted, t, hints, cfg);
    }

    let inv_p = 1.0 / p;
    let to_u = |x: f64| (x - t).powf(p);
    let u_hints = Hints::new(
        hints.breaks.iter().filter(|&&x| x > t).map(|&x| to_u(x)).collect(),
        if hints.upper.is_finite() {
            to_u(hints.upper.max(t))
        } else {
            f64::INFINITY
        },
    );
    let substituted = |u: f64| f(t + u.powf(inv_p)) * inv_p;
    let r = integrate_semi_infinite_hinted(substituted, 0.0, &u_hints, cfg);
    IntegralResult {
        upper: t + r.upper.powf(inv_p),
        ..r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_INV: f64 = 0.367879441171442321595523770161;
    const SQRT_PI: f64 = 1.77245385090551602729816748334;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn check(r: IntegralResult, reference: f64) {
        assert!(r.converged, "{r:?}");
        let c = cfg();
        assert!(r.error_estimate <= c.abs_tol.max(c.rel_tol * r.value.abs()));
        assert!(
            (r.value - reference).abs() <= 10.0 * r.error_estimate,
            "value {} reference {} error estimate {:e}",
            r.value,
            reference,
            r.error_estimate
        );
    }

    #[test]
    fn semi_infinite_examples() {
        check(integrate_semi_infinite(|x| (-x).exp(), 0.0, &cfg()), 1.0);
        check(integrate_semi_infinite(|x| (-x).exp(), 1.0, &cfg()), E_INV);
        check(integrate_semi_infinite(|x| x * (-x).exp(), 0.0, &cfg()), 1.0);
    }

    #[test]
    fn singular_power_examples() {
        check(integrate_singular_power(|x| (-x).exp(), 0.0, 0.5, &cfg()), SQRT_PI);
        check(integrate_singular_power(|x| (-x).exp(), 1.0, 1.0, &cfg()), E_INV);
        check(
            integrate_singular_power(|x| if x < 1.0 { 1.0 } else { 0.0 }, 0.0, 2.0, &cfg()),
            0.5,
        );
    }

    #[test]
    fn singular_power_with_unit_exponent_matches_plain() {
        let f = |x: f64| x.powf(1.5) * (-2.0 * x).exp() + (-x * x).exp();
        for a in [0.0, 0.3, 2.0] {
            let s = integrate_singular_power(f, a, 1.0, &cfg());
            let p = integrate_semi_infinite(f, a, &cfg());
            assert!((s.value - p.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn finite_with_breaks_and_kinks() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &[0.3], &cfg());
        check(r, 0.5 * (0.09 + 0.49));
        let back = integrate(|x: f64| x, 1.0, 0.0, &cfg());
        assert!((back.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn bounded_support_hint_stops_at_upper() {
        let hints = Hints::new(vec![], 1.0);
        let r = integrate_singular_power_hinted(|x| 1.0 - x, 0.25, 0.5, &hints, &cfg());
        // ∫_{1/4}^1 (x−1/4)^{−1/2}(1−x) dx = (4/3)(3/4)^{3/2}
        check(r, 4.0 / 3.0 * 0.75f64.powf(1.5));
        assert!((r.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncation_point_reported() {
        let r = integrate_semi_infinite(|x| (-x).exp(), 0.0, &cfg());
        assert!(r.upper > 30.0 && r.upper.is_finite());
        assert!((-r.upper).exp() < 1e-13);
    }

    #[test]
    fn slowly_decaying_tail_still_converges() {
        // ∫_1^∞ x^{-3} = 1/2
        let r = integrate_semi_infinite(|x| x.powi(-3), 1.0, &cfg());
        assert!(r.converged);
        assert!((r.value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn nonintegrable_is_flagged() {
        let r = integrate_semi_infinite(|x| 1.0 / (1.0 + x), 0.0, &cfg());
        assert!(!r.converged);
        assert!(r.into_value("harmonic").is_err());
    }

    #[test]
    fn config_validation() {
        assert!(cfg().validate().is_ok());
        let bad = QuadratureConfig { abs_tol: 0.0, ..cfg() };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig { max_depth: 0, ..cfg() };
        assert!(bad.validate().is_err());
    }
}
