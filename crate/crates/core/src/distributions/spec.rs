use std::fmt;

use serde::{Deserialize, Serialize};

/// Serializable description of a nonnegative random variable.
///
/// JSON layout: `{"kind": "...", "params": {...}, "inner": {...}}` where
/// `inner` appears only for the wrapper kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential {
        params: ExponentialParams,
    },
    Uniform {
        params: UniformParams,
    },
    Weibull {
        params: WeibullParams,
    },
    Hyperexp2 {
        params: HyperExp2Params,
    },
    ZeroInflated {
        params: ZeroInflatedParams,
        inner: Box<DistributionSpec>,
    },
    Deductible {
        params: DeductibleParams,
        inner: Box<DistributionSpec>,
    },
    Numeric {
        params: NumericParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialParams {
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformParams {
    pub a: f64,
    pub b: f64,
}

/// Survival `exp(−(t/λ)^k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeibullParams {
    pub k: f64,
    pub lambda: f64,
}

/// Phase 1 with probability `p` and rate `lambda1`, phase 2 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperExp2Params {
    pub p: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Probability `p` of an extra atom at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZeroInflatedParams {
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeductibleParams {
    pub d: f64,
}

/// Survival-function table: `knots[i] = [t_i, P(X > t_i)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericParams {
    pub knots: Vec<[f64; 2]>,
}

impl DistributionSpec {
    pub fn exponential(lambda: f64) -> Self {
        DistributionSpec::Exponential {
            params: ExponentialParams { lambda },
        }
    }

    /// Exponential with the given mean.
    pub fn exponential_mean(mean: f64) -> Self {
        Self::exponential(1.0 / mean)
    }

    pub fn uniform(a: f64, b: f64) -> Self {
        DistributionSpec::Uniform {
            params: UniformParams { a, b },
        }
    }

    pub fn weibull(k: f64, lambda: f64) -> Self {
        DistributionSpec::Weibull {
            params: WeibullParams { k, lambda },
        }
    }

    pub fn hyperexp2(p: f64, lambda1: f64, lambda2: f64) -> Self {
        DistributionSpec::Hyperexp2 {
            params: HyperExp2Params { p, lambda1, lambda2 },
        }
    }

    pub fn zero_inflated(p: f64, inner: DistributionSpec) -> Self {
        DistributionSpec::ZeroInflated {
            params: ZeroInflatedParams { p },
            inner: Box::new(inner),
        }
    }

    pub fn deductible(d: f64, inner: DistributionSpec) -> Self {
        DistributionSpec::Deductible {
            params: DeductibleParams { d },
            inner: Box::new(inner),
        }
    }

    pub fn numeric(knots: Vec<[f64; 2]>) -> Self {
        DistributionSpec::Numeric {
            params: NumericParams { knots },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DistributionSpec::Exponential { .. } => "exponential",
            DistributionSpec::Uniform { .. } => "uniform",
            DistributionSpec::Weibull { .. } => "weibull",
            DistributionSpec::Hyperexp2 { .. } => "hyperexp2",
            DistributionSpec::ZeroInflated { .. } => "zero_inflated",
            DistributionSpec::Deductible { .. } => "deductible",
            DistributionSpec::Numeric { .. } => "numeric",
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::Exponential { params } => write!(f, "exponential(lambda={})", params.lambda),
            DistributionSpec::Uniform { params } => write!(f, "uniform({}, {})", params.a, params.b),
            DistributionSpec::Weibull { params } => {
                write!(f, "weibull(k={}, lambda={})", params.k, params.lambda)
            }
            DistributionSpec::Hyperexp2 { params } => write!(
                f,
                "hyperexp2(p={}, lambda1={}, lambda2={})",
                params.p, params.lambda1, params.lambda2
            ),
            DistributionSpec::ZeroInflated { params, inner } => {
                write!(f, "zero_inflated(p={}, {inner})", params.p)
            }
            DistributionSpec::Deductible { params, inner } => write!(f, "deductible(d={}, {inner})", params.d),
            DistributionSpec::Numeric { params } => write!(f, "numeric({} knots)", params.knots.len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_layout() {
        let spec: DistributionSpec = serde_json::from_str(r#"{"kind":"exponential","params":{"lambda":1}}"#).unwrap();
        assert_eq!(spec, DistributionSpec::exponential(1.0));

        let nested = DistributionSpec::deductible(1.0, DistributionSpec::hyperexp2(0.4, 1.0, 3.0));
        let text = serde_json::to_string(&nested).unwrap();
        assert_eq!(
            text,
            r#"{"kind":"deductible","params":{"d":1.0},"inner":{"kind":"hyperexp2","params":{"p":0.4,"lambda1":1.0,"lambda2":3.0}}}"#
        );
        let back: DistributionSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, nested);
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"exponential","params":{"rate":1}}"#).is_err());
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"pareto","params":{"a":1}}"#).is_err());
        assert!(serde_json::from_str::<DistributionSpec>(r#"{"kind":"zero_inflated","params":{"p":0.3}}"#).is_err());
    }
}
