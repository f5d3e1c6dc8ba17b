//! The full verification battery on a built-in catalog.
//!
//! Each block cross-checks two library routes, or a route against a known
//! closed form, at a fixed tolerance. The battery ignores `--alpha`, `--n`
//! and `--tol`; only the quadrature tolerances are taken from the config.

use fraceq::actuarial::{deductible_mvt, exponential_ratio_check, hyperexp2_deductible_z_density};
use fraceq::equilibrium::{characterization_check, characterization_grid, eq_survival_recursive, EquilibriumView};
use fraceq::fracops::{tail_term, weyl_integral, weyl_integral_nested, FracOrder, PowerSum, Term};
use fraceq::numerics::{gamma, QuadratureConfig};
use fraceq::order_mvt::{
    check_survival_bounded_order, default_order_grid, mvt_verify, normalized_moment, MeanCase, ZAlphaModel,
};
use fraceq::taylor::{caputo_taylor_expectation, fractional_moment_identity, rl_taylor_expectation};
use fraceq::{DistributionModel, DistributionSpec, Error};
use serde_json::json;

use crate::campaigns::{linspace, model, worst};
use crate::config::RunConfig;
use crate::report::{CheckResult, Report};
use crate::{CliError, Outcome};

type Checks = Vec<CheckResult>;

/// Models used wherever the battery sweeps "every distribution".
pub fn default_catalog() -> Vec<DistributionSpec> {
    vec![
        DistributionSpec::exponential(1.0),
        DistributionSpec::exponential(2.5),
        DistributionSpec::uniform(0.0, 1.0),
        DistributionSpec::uniform(0.5, 1.5),
        DistributionSpec::weibull(2.0, 1.0),
        DistributionSpec::hyperexp2(0.4, 1.0, 3.0),
        DistributionSpec::zero_inflated(0.3, DistributionSpec::exponential(1.0)),
        DistributionSpec::deductible(1.0, DistributionSpec::exponential(1.0)),
        DistributionSpec::deductible(0.5, DistributionSpec::hyperexp2(0.4, 1.0, 3.0)),
        DistributionSpec::numeric(vec![[0.0, 1.0], [0.5, 0.7], [1.0, 0.4], [2.0, 0.1]]),
    ]
}

fn ps(terms: &[(f64, f64)]) -> PowerSum {
    PowerSum::new(terms.iter().map(|&(coef, exp)| Term { coef, exp })).expect("valid power sum")
}

fn exp_rate(lambda: f64) -> Result<DistributionModel, CliError> {
    model(&DistributionSpec::exponential(lambda))
}

fn unif01() -> Result<DistributionModel, CliError> {
    model(&DistributionSpec::uniform(0.0, 1.0))
}

fn zi() -> Result<DistributionModel, CliError> {
    model(&DistributionSpec::zero_inflated(
        0.3,
        DistributionSpec::exponential(1.0),
    ))
}

fn push_worst(out: &mut Checks, block: Checks) {
    out.extend(worst(block));
}

fn exponential_fixed_point(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut block = Vec::new();
    for lambda in [0.5, 1.0, 3.0] {
        let x = exp_rate(lambda)?;
        for alpha in [0.3, 0.5, 0.9, 1.0] {
            for n in [1, 2, 3] {
                let view = EquilibriumView::new(&x, FracOrder::new(alpha, n)?, cfg)?;
                for t in linspace(0.0, 6.0 / lambda, 30) {
                    block.push(CheckResult::absolute(
                        "exponential_fixed_point",
                        json!({"lambda": lambda, "alpha": alpha, "n": n, "t": t}),
                        view.density(t)?,
                        lambda * (-lambda * t).exp(),
                        1e-7,
                    ));
                }
            }
        }
    }
    push_worst(out, block);
    Ok(())
}

fn characterization_converse(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    for spec in [DistributionSpec::weibull(2.0, 1.0), DistributionSpec::uniform(0.0, 1.0)] {
        let x = model(&spec)?;
        let grid = characterization_grid(&x)?;
        let rep = characterization_check(&x, &[1.0], &[1], &grid, 1e-6, cfg)?;
        out.push(CheckResult::verdict(
            "characterization_detects_non_exponential",
            json!({"dist": spec, "alpha": 1.0, "n": 1, "worst_t": rep.witness.2}),
            rep.max_deviation,
            0.05,
            0.05,
            !rep.is_fixed_point && rep.max_deviation >= 0.05,
        ));
    }
    Ok(())
}

fn semigroup_and_recursion(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut semigroup = Vec::new();
    let mut recursion = Vec::new();
    for (x, hi) in [(exp_rate(1.0)?, 3.0), (unif01()?, 0.9)] {
        for (a, b) in [(0.5, 0.5), (0.3, 0.7), (1.0, 1.0)] {
            for t in linspace(0.0, hi, 10) {
                semigroup.push(CheckResult::relative(
                    "weyl_semigroup",
                    json!({"dist": x.spec(), "a": a, "b": b, "t": t}),
                    weyl_integral_nested(&x, a, b, t, cfg)?,
                    weyl_integral(&x, a + b, t, cfg)?,
                    1e-5,
                ));
            }
        }
        for n in [1, 2] {
            for alpha in [0.5, 1.0] {
                let order = FracOrder::new(alpha, n)?;
                let view = EquilibriumView::new(&x, order, cfg)?;
                for t in linspace(0.0, hi, 5) {
                    recursion.push(CheckResult::relative(
                        "equilibrium_direct_vs_recursive",
                        json!({"dist": x.spec(), "alpha": alpha, "n": n, "t": t}),
                        eq_survival_recursive(&x, order, t, cfg)?,
                        view.survival(t)?,
                        1e-5,
                    ));
                }
            }
        }
    }
    push_worst(out, semigroup);
    push_worst(out, recursion);
    Ok(())
}

fn equilibrium_moments(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut block = Vec::new();
    for spec in default_catalog() {
        let x = model(&spec)?;
        for (alpha, n) in [(0.5, 1), (1.0, 1), (0.5, 2)] {
            let view = EquilibriumView::new(&x, FracOrder::new(alpha, n)?, cfg)?;
            for r in [0.5, 1.0, 2.0] {
                block.push(CheckResult::relative(
                    "equilibrium_moment_closed_vs_quadrature",
                    json!({"dist": spec, "alpha": alpha, "n": n, "r": r}),
                    view.moment(r)?,
                    view.moment_quadrature(r)?,
                    1e-5,
                ));
            }
        }
    }
    push_worst(out, block);
    let x = exp_rate(1.0)?;
    let mut block = Vec::new();
    for (alpha, n) in [(0.3, 1), (0.5, 2), (0.9, 3)] {
        let view = EquilibriumView::new(&x, FracOrder::new(alpha, n)?, cfg)?;
        for r in [0.5, 1.0, 2.0] {
            block.push(CheckResult::absolute(
                "exponential_equilibrium_moment",
                json!({"alpha": alpha, "n": n, "r": r}),
                view.moment(r)?,
                gamma(r + 1.0)?,
                1e-6,
            ));
        }
    }
    push_worst(out, block);
    Ok(())
}

fn taylor_blocks(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut rl = Vec::new();
    let mut caputo = Vec::new();
    let mut agree = Vec::new();
    for x in [exp_rate(1.0)?, unif01()?] {
        for alpha in [0.5, 0.75, 1.0] {
            let family = [
                ps(&[(1.0, 1.0)]),
                ps(&[(1.0, 2.0)]),
                ps(&[(1.0, 0.5)]),
                ps(&[(1.0, alpha - 1.0), (1.0, 2.0 * alpha)]),
            ];
            for g in &family {
                for n in [0, 1, 2] {
                    let params = json!({"dist": x.spec(), "g": g, "alpha": alpha, "n": n});
                    match rl_taylor_expectation(g, &x, alpha, n, cfg) {
                        Ok(rep) => rl.push(CheckResult::absolute(
                            "rl_taylor",
                            params.clone(),
                            rep.residual,
                            0.0,
                            1e-5,
                        )),
                        Err(Error::Precondition(_)) => {}
                        Err(e) => return Err(e.into()),
                    }
                    match caputo_taylor_expectation(g, &x, alpha, n, cfg) {
                        Ok(rep) => caputo.push(CheckResult::absolute("caputo_taylor", params, rep.residual, 0.0, 1e-5)),
                        Err(Error::Precondition(_)) | Err(Error::Domain(_)) => {}
                        Err(e) => return Err(e.into()),
                    }
                }
            }
        }
        for g in [
            ps(&[(1.0, 1.0)]),
            ps(&[(1.0, 2.0)]),
            ps(&[(2.0, 0.0), (1.0, 2.0), (0.5, 3.0)]),
        ] {
            for n in [0, 1, 2] {
                let a = rl_taylor_expectation(&g, &x, 1.0, n, cfg)?;
                let b = caputo_taylor_expectation(&g, &x, 1.0, n, cfg)?;
                let params = json!({"dist": x.spec(), "g": g, "n": n});
                for (j, (p, q)) in a.terms.iter().zip(&b.terms).enumerate() {
                    agree.push(CheckResult::absolute(
                        "integer_order_rl_vs_caputo",
                        json!({"dist": x.spec(), "g": g, "n": n, "term": j}),
                        *p,
                        *q,
                        1e-7,
                    ));
                }
                agree.push(CheckResult::absolute(
                    "integer_order_rl_vs_caputo",
                    params,
                    a.remainder,
                    b.remainder,
                    1e-7,
                ));
            }
        }
    }
    push_worst(out, rl);
    push_worst(out, caputo);
    push_worst(out, agree);

    let mut moment_identity = Vec::new();
    for x in [exp_rate(1.0)?, unif01()?] {
        for beta in [1.0, 1.5, 2.0] {
            for alpha in [0.5, 0.75, 1.0] {
                for n in 0..=2u32 {
                    if n as f64 > (beta - alpha) / alpha + 1e-12 {
                        continue;
                    }
                    let (lhs, rhs) = fractional_moment_identity(beta, &x, alpha, n, cfg)?;
                    moment_identity.push(CheckResult::relative(
                        "fractional_moment_identity",
                        json!({"dist": x.spec(), "beta": beta, "alpha": alpha, "n": n}),
                        rhs,
                        lhs,
                        1e-5,
                    ));
                }
            }
        }
    }
    push_worst(out, moment_identity);
    let (_, one) = fractional_moment_identity(1.0, &exp_rate(1.0)?, 0.5, 0, cfg)?;
    out.push(CheckResult::absolute(
        "fractional_moment_identity_unit",
        json!({"beta": 1.0, "alpha": 0.5, "n": 0}),
        one,
        1.0,
        1e-8,
    ));
    Ok(())
}

fn order_pairs() -> Result<Vec<(DistributionModel, DistributionModel, f64)>, CliError> {
    Ok(vec![
        (exp_rate(1.0)?, exp_rate(0.5)?, 1.0),
        (unif01()?, model(&DistributionSpec::uniform(0.5, 1.5))?, 1.0),
        (zi()?, exp_rate(1.0)?, 0.5),
        (zi()?, exp_rate(1.0)?, 1.0),
        (
            model(&DistributionSpec::deductible(1.0, DistributionSpec::exponential(1.0)))?,
            model(&DistributionSpec::deductible(0.5, DistributionSpec::exponential(1.0)))?,
            0.5,
        ),
    ])
}

fn mean_value_blocks(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut mvt = Vec::new();
    let pairs = [
        (exp_rate(1.0)?, exp_rate(0.5)?, vec![1.0, 1.5]),
        (zi()?, exp_rate(1.0)?, vec![0.5, 1.0]),
    ];
    for (x, y, alphas) in &pairs {
        for &alpha in alphas {
            let z = ZAlphaModel::verified(x, y, alpha, cfg)?;
            for g in [
                ps(&[(1.0, alpha - 1.0)]),
                ps(&[(1.0, 1.0)]),
                ps(&[(1.0, 2.0)]),
                ps(&[(1.0, 0.5), (3.0, 1.0)]),
            ] {
                let params = json!({"x": x.spec(), "y": y.spec(), "alpha": alpha, "g": g});
                match mvt_verify(&z, &g) {
                    Ok(rep) => mvt.push(CheckResult::absolute("mvt", params, rep.residual, 0.0, 1e-5)),
                    // E[X^{-1/2}] is infinite for an atom at zero
                    Err(Error::Divergence(_)) if x.mass_at_zero() > 0.0 => out.push(CheckResult::verdict(
                        "mvt_divergence_detected",
                        params,
                        0.0,
                        0.0,
                        0.0,
                        true,
                    )),
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    push_worst(out, mvt);

    let z = ZAlphaModel::verified(&exp_rate(1.0)?, &exp_rate(0.5)?, 1.0, cfg)?;
    out.push(CheckResult::absolute(
        "z_mean_closed_form",
        json!({"alpha": 1.0}),
        z.moment(1.0)?,
        3.0,
        1e-8,
    ));
    out.push(CheckResult::absolute(
        "z_mean_quadrature",
        json!({"alpha": 1.0}),
        z.moment_quadrature(1.0)?,
        3.0,
        1e-5,
    ));
    out.push(CheckResult::verdict(
        "mixture_coefficient",
        json!({"alpha": 1.0}),
        z.mix_c(),
        2.0,
        0.0,
        z.mix_c() == 2.0,
    ));

    let mut mixture = Vec::new();
    let mut identity = Vec::new();
    for (x, y, alpha) in order_pairs()? {
        let z = ZAlphaModel::verified(&x, &y, alpha, cfg)?;
        let hi = if y.support_upper().is_finite() {
            y.support_upper()
        } else {
            8.0
        };
        for t in linspace(0.0, hi, 30) {
            let (lhs, rhs) = z.mixture_identity(t)?;
            mixture.push(CheckResult::absolute(
                "mixture_identity",
                json!({"x": x.spec(), "y": y.spec(), "alpha": alpha, "t": t}),
                lhs,
                rhs,
                1e-10,
            ));
        }
        let m = z.classify_mean_location()?;
        let params = json!({"x": x.spec(), "y": y.spec(), "alpha": alpha, "case": m.case});
        identity.push(CheckResult::absolute(
            "mean_location_identity",
            params.clone(),
            m.identity_lhs,
            m.identity_rhs,
            1e-9,
        ));
        out.push(CheckResult::verdict(
            "mean_location_cases_agree",
            params,
            m.delta_variance,
            m.upper_threshold,
            0.0,
            m.case == m.case_from_variance,
        ));
    }
    push_worst(out, mixture);
    push_worst(out, identity);
    let m = z.classify_mean_location()?;
    out.push(CheckResult::verdict(
        "exponential_pair_mean_above_y",
        json!({"alpha": 1.0, "case": m.case}),
        m.mean_z,
        m.moment_y,
        0.0,
        m.case == MeanCase::AboveY,
    ));
    Ok(())
}

fn order_checker(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let (x, y) = (exp_rate(1.0)?, exp_rate(0.5)?);
    let grid = default_order_grid(&x, &y)?;
    for alpha in [1.0, 1.5, 2.0] {
        let r = check_survival_bounded_order(&x, &y, alpha, &grid, cfg)?;
        out.push(CheckResult::verdict(
            "order_holds",
            json!({"alpha": alpha, "worst_t": r.worst_t}),
            r.worst_gap,
            0.0,
            0.0,
            r.holds,
        ));
    }
    let r = check_survival_bounded_order(&x, &y, 0.5, &grid, cfg)?;
    out.push(CheckResult::verdict(
        "order_fails_at_origin",
        json!({"alpha": 0.5, "worst_t": r.worst_t}),
        r.worst_gap,
        0.0,
        0.0,
        !r.holds && r.worst_t == 0.0,
    ));
    Ok(())
}

fn actuarial_blocks(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let (r, s) = (0.2, 0.8);
    let mut mvt = Vec::new();
    let mut z_exp = Vec::new();
    let mut z_hyp = Vec::new();
    for sev in [
        DistributionSpec::exponential(1.0),
        DistributionSpec::hyperexp2(0.4, 1.0, 3.0),
    ] {
        for alpha in [0.5, 1.0] {
            for g in [ps(&[(1.0, 1.0)]), ps(&[(1.0, 2.0)]), ps(&[(1.0, 0.5), (3.0, 1.0)])] {
                let rep = deductible_mvt(&g, &sev, r, s, alpha, cfg)?;
                mvt.push(CheckResult::absolute(
                    "deductible_mvt",
                    json!({"severity": sev, "alpha": alpha, "g": g, "r": r, "s": s}),
                    rep.lhs,
                    rep.rhs,
                    1e-5,
                ));
                for t in linspace(0.0, 5.0, 20) {
                    let params = json!({"severity": sev, "alpha": alpha, "t": t});
                    let got = rep.z.density(t)?;
                    match &sev {
                        DistributionSpec::Exponential { params: p } => z_exp.push(CheckResult::absolute(
                            "deductible_z_is_exponential",
                            params,
                            got,
                            p.lambda * (-p.lambda * t).exp(),
                            1e-8,
                        )),
                        _ => z_hyp.push(CheckResult::absolute(
                            "deductible_z_hyperexp",
                            params,
                            got,
                            hyperexp2_deductible_z_density(0.4, 1.0, 3.0, r, s, alpha, t),
                            1e-7,
                        )),
                    }
                }
            }
        }
    }
    push_worst(out, mvt);
    push_worst(out, z_exp);
    push_worst(out, z_hyp);

    let gs = [ps(&[(1.0, 1.0)]), ps(&[(1.0, 2.0)]), ps(&[(1.0, 0.5)])];
    let rep = exponential_ratio_check(1.0, 0.5, 1.0, 1.0, 2.0, &gs, 1.0, cfg)?;
    let params = json!({"lambda": 1.0, "r": 0.5, "s": 1.0, "u": 1.0, "v": 2.0});
    out.push(CheckResult::absolute(
        "ratio_spread",
        params.clone(),
        rep.max_spread,
        0.0,
        1e-5,
    ));
    let formula = ((-0.5f64).exp() - (-1f64).exp()) / ((-1f64).exp() - (-2f64).exp());
    out.push(CheckResult::absolute(
        "ratio_reference",
        params,
        rep.reference_ratio,
        formula,
        1e-10,
    ));

    let mut lambdas = Vec::new();
    for (lambda, d) in [(1.0, 0.5), (2.0, 1.0), (0.5, 0.3)] {
        let xd = model(&DistributionSpec::deductible(d, DistributionSpec::exponential(lambda)))?;
        for alpha in [0.5, 0.75, 1.0] {
            lambdas.push(CheckResult::relative(
                "deductible_normalized_moment",
                json!({"lambda": lambda, "d": d, "alpha": alpha}),
                normalized_moment(&xd, alpha, cfg)?,
                (-lambda * d).exp() * lambda.powf(-alpha),
                1e-10,
            ));
        }
    }
    push_worst(out, lambdas);
    Ok(())
}

fn numerics_honesty(cfg: &QuadratureConfig, out: &mut Checks) -> Result<(), CliError> {
    let mut converged = Vec::new();
    let mut tails = Vec::new();
    for spec in default_catalog() {
        let x = model(&spec)?;
        for s in [0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0] {
            for t in [0.0, 0.5, 1.0, 2.0] {
                let r = x.partial_moment_quadrature(t, s, cfg)?;
                let params = json!({"dist": spec, "s": s, "t": t, "upper": r.upper});
                converged.push(CheckResult::verdict(
                    "quadrature_converged",
                    params.clone(),
                    r.error_estimate,
                    0.0,
                    0.0,
                    r.converged,
                ));
                let tail = if r.upper.is_finite() && r.upper < x.support_upper() {
                    tail_term(&x, s, t, r.upper)
                } else {
                    0.0
                };
                tails.push(CheckResult::verdict(
                    "truncation_tail",
                    params,
                    tail,
                    0.0,
                    1e-8,
                    tail < 1e-8,
                ));
            }
        }
    }
    push_worst(out, converged);
    push_worst(out, tails);
    Ok(())
}

pub fn run_suite(config: &RunConfig) -> Result<Outcome, CliError> {
    let cfg = &config.quadrature;
    let mut results = Vec::new();
    exponential_fixed_point(cfg, &mut results)?;
    characterization_converse(cfg, &mut results)?;
    semigroup_and_recursion(cfg, &mut results)?;
    equilibrium_moments(cfg, &mut results)?;
    taylor_blocks(cfg, &mut results)?;
    mean_value_blocks(cfg, &mut results)?;
    order_checker(cfg, &mut results)?;
    actuarial_blocks(cfg, &mut results)?;
    numerics_honesty(cfg, &mut results)?;
    let mut report = Report::new(config);
    report.results = results;
    report.note(
        "catalog",
        serde_json::to_value(default_catalog()).expect("catalog serializes"),
    );
    Ok(Outcome {
        report,
        grids: Vec::new(),
    })
}
