//! Single-command campaigns. Each returns a report whose checks compare
//! two independent library routes for the same quantity.

use fraceq::actuarial::{deductible_mvt, exponential_ratio_check, hyperexp2_deductible_z_density};
use fraceq::equilibrium::{characterization_check, log_grid, EquilibriumView};
use fraceq::fracops::{FracOrder, PowerSum};
use fraceq::order_mvt::{check_survival_bounded_order, default_order_grid, mvt_verify, ZAlphaModel};
use fraceq::taylor::{caputo_taylor_expectation, rl_taylor_expectation};
use fraceq::{DistributionModel, DistributionSpec, Error};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{grid_file_stem, CheckResult, GridRow, GridTable, Report};
use crate::{CliError, Outcome};

pub(crate) fn model(spec: &DistributionSpec) -> Result<DistributionModel, CliError> {
    Ok(DistributionModel::build(spec)?)
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing {flag}")))
}

/// Right end of a plotting grid: the 0.99 quantile, capped by a finite support.
pub(crate) fn grid_upper(x: &DistributionModel) -> Result<f64, CliError> {
    let q = x.quantile(0.99)?;
    let hi = q.min(x.support_upper());
    if hi > 0.0 {
        Ok(hi)
    } else {
        Err(CliError::Model(format!("{}: degenerate at 0", x.spec())))
    }
}

pub(crate) fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// The check with the largest residual relative to its gate.
pub(crate) fn worst(results: Vec<CheckResult>) -> Option<CheckResult> {
    let score = |r: &CheckResult| {
        if r.pass {
            r.residual / (r.tolerance * r.rhs.abs().max(1.0))
        } else {
            f64::INFINITY
        }
    };
    results.into_iter().fold(None, |best, r| match best {
        Some(b) if score(&b) >= score(&r) => Some(b),
        _ => Some(r),
    })
}

pub fn eqdist(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = model(required(&cfg.dist, "--dist")?)?;
    let grid = linspace(0.0, grid_upper(&x)?, cfg.grid);
    let mut report = Report::new(cfg);
    let mut grids = Vec::new();
    for &alpha in &cfg.alphas {
        for &n in &cfg.ns {
            let view = EquilibriumView::new(&x, FracOrder::new(alpha, n)?, &cfg.quadrature)?;
            let mut rows = Vec::with_capacity(grid.len());
            let mut checks = Vec::with_capacity(grid.len());
            for &t in &grid {
                let direct = view.survival(t)?;
                let weyl = view.survival_via_weyl(t)?;
                rows.push(GridRow::new(t, direct, weyl));
                checks.push(CheckResult::compare(
                    "eq_survival_partial_vs_weyl",
                    json!({"alpha": alpha, "n": n, "t": t}),
                    direct,
                    weyl,
                    cfg.tolerance,
                ));
            }
            report.results.extend(worst(checks));
            grids.push(GridTable {
                file_stem: grid_file_stem("eqdist", alpha, n),
                rows,
            });
        }
    }
    Ok(Outcome { report, grids })
}

pub fn characterize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = model(required(&cfg.dist, "--dist")?)?;
    let q = x.quantile(0.99)?;
    let grid = log_grid(q / 1000.0, q, cfg.grid);
    let rep = characterization_check(&x, &cfg.alphas, &cfg.ns, &grid, cfg.tolerance, &cfg.quadrature)?;
    let mut report = Report::new(cfg);
    let mut grids = Vec::new();
    for d in &rep.per_order {
        report.push(CheckResult::informational(
            "characterization_max_deviation",
            json!({"alpha": d.alpha, "n": d.n, "worst_t": d.worst_t}),
            d.max_deviation,
            0.0,
        ));
        let view = EquilibriumView::new(&x, FracOrder::new(d.alpha, d.n)?, &cfg.quadrature)?;
        let rows = grid
            .iter()
            .map(|&t| Ok(GridRow::new(t, view.density(t)?, x.density_ac(t))))
            .collect::<Result<Vec<_>, Error>>()?;
        grids.push(GridTable {
            file_stem: grid_file_stem("characterize", d.alpha, d.n),
            rows,
        });
    }
    report.note("is_fixed_point", json!(rep.is_fixed_point));
    report.note("max_deviation", json!(rep.max_deviation));
    report.note(
        "witness",
        json!({"alpha": rep.witness.0, "n": rep.witness.1, "t": rep.witness.2}),
    );
    Ok(Outcome { report, grids })
}

pub fn taylor(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = model(required(&cfg.dist, "--dist")?)?;
    let g = required(&cfg.g, "--g")?;
    let mut report = Report::new(cfg);
    let mut skipped = Vec::new();
    let check = if cfg.caputo { "caputo_taylor" } else { "rl_taylor" };
    for &alpha in &cfg.alphas {
        for &n in &cfg.ns {
            let res = if cfg.caputo {
                caputo_taylor_expectation(g, &x, alpha, n, &cfg.quadrature)
            } else {
                rl_taylor_expectation(g, &x, alpha, n, &cfg.quadrature)
            };
            match res {
                Ok(rep) => report.push(CheckResult::compare(
                    check,
                    json!({"alpha": alpha, "n": n, "terms": rep.terms, "remainder": rep.remainder}),
                    rep.lhs,
                    rep.terms.iter().sum::<f64>() + rep.remainder,
                    cfg.tolerance,
                )),
                Err(e @ Error::Precondition(_)) => {
                    skipped.push(json!({"alpha": alpha, "n": n, "reason": e.to_string()}));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    report.note("skipped", Value::Array(skipped));
    Ok(Outcome {
        report,
        grids: Vec::new(),
    })
}

pub fn mvt(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = model(required(&cfg.x, "--x")?)?;
    let y = model(required(&cfg.y, "--y")?)?;
    let g = required(&cfg.g, "--g")?;
    let order_grid = default_order_grid(&x, &y)?;
    let grid = linspace(0.0, grid_upper(&y)?.max(grid_upper(&x)?), cfg.grid);
    let mut report = Report::new(cfg);
    let mut grids = Vec::new();
    let mut locations = Vec::new();
    for &alpha in &cfg.alphas {
        let z = match ZAlphaModel::verified_on(&x, &y, alpha, &order_grid, &cfg.quadrature) {
            Ok(z) => z,
            Err(Error::OrderViolation { worst_t, worst_gap }) => {
                report.push(CheckResult::verdict(
                    "survival_bounded_order",
                    json!({"alpha": alpha, "worst_t": worst_t}),
                    worst_gap,
                    0.0,
                    0.0,
                    false,
                ));
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let params = json!({"alpha": alpha});
        report.push(CheckResult::verdict(
            "survival_bounded_order",
            params.clone(),
            0.0,
            0.0,
            0.0,
            true,
        ));

        let m = mvt_verify(&z, g)?;
        report.push(CheckResult::compare(
            "mvt",
            params.clone(),
            m.lhs,
            m.term_c0 + m.term_main,
            cfg.tolerance,
        ));
        report.push(CheckResult::compare(
            "z_total_mass",
            params.clone(),
            z.total_mass()?,
            1.0,
            cfg.tolerance,
        ));

        let mut rows = Vec::with_capacity(grid.len());
        let mut checks = Vec::with_capacity(grid.len());
        for &t in &grid {
            let (lhs, rhs) = z.mixture_identity(t)?;
            rows.push(GridRow::new(t, lhs, rhs));
            checks.push(CheckResult::compare(
                "mixture_identity",
                json!({"alpha": alpha, "t": t}),
                lhs,
                rhs,
                cfg.tolerance,
            ));
        }
        report.results.extend(worst(checks));
        grids.push(GridTable {
            file_stem: grid_file_stem("mvt", alpha, 1),
            rows,
        });

        let loc = z.classify_mean_location()?;
        report.push(CheckResult::compare(
            "mean_location_identity",
            params.clone(),
            loc.identity_lhs,
            loc.identity_rhs,
            cfg.tolerance,
        ));
        report.push(CheckResult::verdict(
            "mean_location_cases_agree",
            params,
            loc.delta_variance,
            loc.upper_threshold,
            0.0,
            loc.case == loc.case_from_variance,
        ));
        locations.push(json!({"alpha": alpha, "location": loc}));
    }
    report.note("mean_location", Value::Array(locations));
    Ok(Outcome { report, grids })
}

pub fn order(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = model(required(&cfg.x, "--x")?)?;
    let y = model(required(&cfg.y, "--y")?)?;
    let grid = default_order_grid(&x, &y)?;
    let mut report = Report::new(cfg);
    let mut verdicts = Vec::new();
    for &alpha in &cfg.alphas {
        let r = check_survival_bounded_order(&x, &y, alpha, &grid, &cfg.quadrature)?;
        report.push(CheckResult::informational(
            "survival_bounded_order",
            json!({"alpha": alpha, "holds": r.holds, "worst_t": r.worst_t}),
            r.worst_gap,
            0.0,
        ));
        verdicts.push(json!({"alpha": alpha, "holds": r.holds, "worst_t": r.worst_t, "worst_gap": r.worst_gap}));
    }
    report.note("orders", Value::Array(verdicts));
    Ok(Outcome {
        report,
        grids: Vec::new(),
    })
}

pub fn actuarial(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let severity = required(&cfg.severity, "--severity")?;
    let g = required(&cfg.g, "--g")?;
    let (r, s) = (*required(&cfg.r, "--r")?, *required(&cfg.s, "--s")?);
    let mut report = Report::new(cfg);
    let mut lambdas = Vec::new();
    for &alpha in &cfg.alphas {
        let rep = deductible_mvt(g, severity, r, s, alpha, &cfg.quadrature)?;
        let params = json!({"alpha": alpha, "r": r, "s": s});
        report.push(CheckResult::compare(
            "deductible_mvt",
            params.clone(),
            rep.lhs,
            rep.rhs,
            cfg.tolerance,
        ));
        lambdas.push(json!({"alpha": alpha, "lambda_r": rep.lambda_r, "lambda_s": rep.lambda_s}));

        let display: Option<Box<dyn Fn(f64) -> f64>> = match severity {
            DistributionSpec::Exponential { params } => {
                let l = params.lambda;
                Some(Box::new(move |t: f64| l * (-l * t).exp()))
            }
            DistributionSpec::Hyperexp2 { params } => {
                let p = *params;
                Some(Box::new(move |t: f64| {
                    hyperexp2_deductible_z_density(p.p, p.lambda1, p.lambda2, r, s, alpha, t)
                }))
            }
            _ => None,
        };
        if let Some(display) = display {
            let xr = model(&DistributionSpec::deductible(r, severity.clone()))?;
            let grid = linspace(0.0, grid_upper(&xr)?, cfg.grid);
            let checks = grid
                .iter()
                .map(|&t| {
                    Ok(CheckResult::absolute(
                        "deductible_z_density",
                        json!({"alpha": alpha, "t": t}),
                        rep.z.density(t)?,
                        display(t),
                        cfg.tolerance,
                    ))
                })
                .collect::<Result<Vec<_>, Error>>()?;
            report.results.extend(worst(checks));
        }
    }
    if let (Some(u), Some(v)) = (cfg.u, cfg.v) {
        let DistributionSpec::Exponential { params } = severity else {
            return Err(CliError::Model("ratio check needs an exponential severity".into()));
        };
        let alpha = cfg.alphas.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
        let gs: Vec<PowerSum> = vec![g.clone()];
        let rep = exponential_ratio_check(params.lambda, r, s, u, v, &gs, alpha, &cfg.quadrature)?;
        for (q, g) in rep.ratios.iter().zip(&gs) {
            report.push(CheckResult::compare(
                "ratio_independence",
                json!({"r": r, "s": s, "u": u, "v": v, "g": g}),
                *q,
                rep.reference_ratio,
                cfg.tolerance,
            ));
        }
    }
    report.note("normalized_moments", Value::Array(lambdas));
    Ok(Outcome {
        report,
        grids: Vec::new(),
    })
}
