use crate::error::{Error, Result};

/// Piecewise-linear survival function with an exponential tail.
///
/// Knots are `(t_i, F̄(t_i))` with `t_0 = 0`. Beyond the last knot the
/// survival decays at the log-slope of the last segment, unless it already
/// reached zero.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct NumericSurvival {
    t: Vec<f64>,
    v: Vec<f64>,
    /// Decay rate past the last knot; zero when the table ends at F̄ = 0.
    tail_rate: f64,
    /// First knot where F̄ hits zero.
    upper: f64,
}

impl NumericSurvival {
    pub(crate) fn new(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::invalid("knots", "need at least two knots"));
        }
        let mut t = Vec::with_capacity(knots.len() + 1);
        let mut v = Vec::with_capacity(knots.len() + 1);
        for (i, &[ti, vi]) in knots.iter().enumerate() {
            if !ti.is_finite() || ti < 0.0 {
                return Err(Error::invalid(
                    "knots",
                    format!("knot {i}: t = {ti} must be finite and >= 0"),
                ));
            }
            if !(0.0..=1.0).contains(&vi) {
                return Err(Error::invalid(
                    "knots",
                    format!("knot {i}: survival {vi} outside [0, 1]"),
                ));
            }
            if let (Some(&tp), Some(&vp)) = (t.last(), v.last()) {
                if ti <= tp {
                    return Err(Error::invalid("knots", format!("knot {i}: t must strictly increase")));
                }
                if vi > vp {
                    return Err(Error::invalid("knots", format!("knot {i}: survival must not increase")));
                }
            } else if ti > 0.0 {
                t.push(0.0);
                v.push(1.0);
            }
            t.push(ti);
            v.push(vi);
        }

        let k = t.len() - 1;
        let upper = match v.iter().position(|&x| x == 0.0) {
            Some(j) => t[j],
            None => f64::INFINITY,
        };
        let tail_rate = if upper.is_finite() {
            0.0
        } else if v[k] < v[k - 1] {
            (v[k - 1] / v[k]).ln() / (t[k] - t[k - 1])
        } else {
            return Err(Error::invalid(
                "knots",
                "last segment is flat with positive survival, tail cannot be extrapolated",
            ));
        };
        Ok(NumericSurvival { t, v, tail_rate, upper })
    }

    pub(crate) fn survival(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        if x >= self.upper {
            return 0.0;
        }
        let k = self.t.len() - 1;
        if x >= self.t[k] {
            return self.v[k] * (-self.tail_rate * (x - self.t[k])).exp();
        }
        let i = self.segment(x);
        let w = (x - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + w * (self.v[i + 1] - self.v[i])
    }

    /// Density of the continuous part (minus the slope of F̄).
    pub(crate) fn density(&self, x: f64) -> f64 {
        if x < 0.0 || x >= self.upper {
            return 0.0;
        }
        let k = self.t.len() - 1;
        if x >= self.t[k] {
            return self.tail_rate * self.v[k] * (-self.tail_rate * (x - self.t[k])).exp();
        }
        let i = self.segment(x);
        (self.v[i] - self.v[i + 1]) / (self.t[i + 1] - self.t[i])
    }

    /// Mass of the jump at zero.
    pub(crate) fn atom_at_zero(&self) -> f64 {
        1.0 - self.v[0]
    }

    pub(crate) fn upper(&self) -> f64 {
        self.upper
    }

    pub(crate) fn knots(&self) -> &[f64] {
        &self.t
    }

    fn segment(&self, x: f64) -> usize {
        // last i with t[i] <= x
        self.t
            .partition_point(|&ti| ti <= x)
            .saturating_sub(1)
            .min(self.t.len() - 2)
    }
}
