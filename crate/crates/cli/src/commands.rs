use claimtail::finite_t::{component_means, exact_joint_lt_with, CountingSpec, LtQuery};
use claimtail::limit::{lt_eval, lt_eval_with, SRule};
use claimtail::moments::{
    correlation_r0sq_tinf, moment_row, ratio_moment, ratio_moment_rational, ratio_variance, ratio_variance_forms,
    t_infinity_mean, t_infinity_variance,
};
use claimtail::montecarlo::{convergence_report, lepage_statistics, ConvergenceReport};
use claimtail::{Mixing, Ratio, Regime, Tail};
use serde_json::json;

use crate::config::{Format, RunConfig, Source};
use crate::output::{emit, json, Cell, Report, Table};
use crate::CliError;

fn single_point(cfg: &RunConfig) -> bool {
    let g = &cfg.grids;
    g.u.len() == 1 && g.v.len() == 1 && g.w.len() == 1 && g.s.len() == 1
}

pub fn lt_exact(cfg: &RunConfig) -> Result<(), CliError> {
    let opts = cfg.exact_options();
    let single = single_point(cfg) && cfg.grids.t.len() == 1;
    let mut table = Table::new(vec!["t", "s", "u", "v", "w", "value", "abs_err_est"]);
    for &t in &cfg.grids.t {
        let spec = CountingSpec::new(cfg.mixing.clone(), t)?;
        for &s in &cfg.grids.s {
            for (u, v, w) in cfg.queries() {
                let r = exact_joint_lt_with(&spec, &cfg.model, &LtQuery::new(u, v, w, s)?, &opts)?;
                if single {
                    return emit(cfg, Report::Json(json(&r)), Format::Json);
                }
                table.push(vec![
                    Cell::Real(t),
                    Cell::Int(s),
                    Cell::Real(u),
                    Cell::Real(v),
                    Cell::Real(w),
                    Cell::Real(r.value),
                    Cell::Real(r.abs_err_est),
                ]);
            }
        }
    }
    emit(cfg, Report::Table(table), Format::Json)
}

fn s_values(cfg: &RunConfig) -> Result<Vec<(usize, Regime)>, CliError> {
    let first = cfg.regime_for(cfg.grids.s[0])?;
    if !matches!(first.s_rule, SRule::FixedS(_)) {
        return Ok(vec![(cfg.grids.s[0], first)]);
    }
    cfg.grids.s.iter().map(|&s| Ok((s, cfg.regime_for(s)?))).collect()
}

pub fn lt_limit(cfg: &RunConfig) -> Result<(), CliError> {
    let opts = cfg.lt_options();
    let regimes = s_values(cfg)?;
    let single = regimes.len() == 1 && single_point(cfg);
    let mut table = Table::new(vec!["regime", "s", "u", "v", "w", "value"]);
    for (s, regime) in &regimes {
        regime.check_model(&cfg.model)?;
        for (u, v, w) in cfg.queries() {
            let value = lt_eval_with(regime, &cfg.model, &cfg.mixing, u, v, w, &opts)?;
            if single {
                let d = regime.normalization_descriptor();
                let doc = json!({
                    "value": value,
                    "regime": regime.to_string(),
                    "normalizers": {
                        "lambda": d.lambda.label(),
                        "xi": d.xi.label(),
                        "sigma": d.sigma.label(),
                        "sigma_centered": d.sigma_centered,
                    },
                });
                return emit(cfg, Report::Json(doc), Format::Json);
            }
            table.push(vec![
                Cell::Text(regime.name()),
                Cell::Int(*s),
                Cell::Real(u),
                Cell::Real(v),
                Cell::Real(w),
                Cell::Real(value),
            ]);
        }
    }
    emit(cfg, Report::Table(table), Format::Json)
}

pub fn moments(cfg: &RunConfig) -> Result<(), CliError> {
    let mut table = Table::new(vec!["s", "k", "gamma", "moment", "variance", "rho"]);
    // --k is the highest order; every order up to it gets a row
    let k_max = cfg.grids.k.iter().copied().max().unwrap_or(1);
    for &gamma in &cfg.grids.gamma {
        for &s in &cfg.grids.s {
            for k in 1..=k_max {
                let r = moment_row(s, k, gamma)?;
                table.push(vec![
                    Cell::Int(r.s),
                    Cell::Int(r.k),
                    Cell::Real(r.gamma),
                    Cell::Real(r.moment),
                    Cell::Real(r.variance),
                    Cell::Real(r.rho),
                ]);
            }
        }
    }
    emit(cfg, Report::Table(table), Format::Csv)
}

fn report(cfg: &RunConfig, cmd: &str) -> Result<ConvergenceReport, CliError> {
    let regime = cfg.regime_for(cfg.single_s(cmd)?)?;
    Ok(convergence_report(
        &cfg.model,
        &cfg.mixing,
        &regime,
        &cfg.grids.t,
        &cfg.queries(),
        cfg.simulation.n,
        cfg.seed,
        &cfg.paths(),
        &cfg.lt_options(),
    )?)
}

fn rows_table(rep: &ConvergenceReport) -> Table {
    let mut table = Table::new(vec!["t", "u", "v", "w", "empirical", "stderr", "limit", "gap"]);
    for r in &rep.rows {
        table.push(
            [r.t, r.u, r.v, r.w, r.empirical, r.stderr, r.limit, r.gap]
                .into_iter()
                .map(Cell::Real)
                .collect(),
        );
    }
    table
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.simulation.source {
        Source::Paths => {
            let rep = report(cfg, "simulate")?;
            for w in &rep.warnings {
                eprintln!("warning: {w}");
            }
            emit(cfg, Report::Table(rows_table(&rep)), Format::Csv)
        }
        Source::Lepage => simulate_lepage(cfg),
    }
}

fn simulate_lepage(cfg: &RunConfig) -> Result<(), CliError> {
    let alpha = cfg.model.alpha();
    let gamma = 1.0 / alpha;
    let sim = &cfg.simulation;
    let st = lepage_statistics(alpha, &cfg.grids.s, sim.max_k, &cfg.lepage(), sim.n, cfg.seed)?;
    let mut table = Table::new(vec!["statistic", "s", "k", "empirical", "stderr", "closed_form"]);
    let blank = || Cell::Text(String::new());
    for r in &st.ratios {
        for (k, e) in r.raw_moments.iter().enumerate() {
            table.push(vec![
                Cell::Text("ratio_moment".into()),
                Cell::Int(r.s),
                Cell::Int(k + 1),
                Cell::Real(e.value),
                Cell::Real(e.stderr),
                Cell::Real(ratio_moment(r.s, k + 1, &gamma).unwrap_or(f64::NAN)),
            ]);
        }
        if sim.max_k >= 2 {
            table.push(vec![
                Cell::Text("ratio_variance".into()),
                Cell::Int(r.s),
                blank(),
                Cell::Real(r.variance.value),
                Cell::Real(r.variance.stderr),
                Cell::Real(ratio_variance(r.s, gamma).unwrap_or(f64::NAN)),
            ]);
        }
    }
    let t = &st.t_infinity;
    let rho = correlation_r0sq_tinf(gamma).map(|c| c.rho).unwrap_or(f64::NAN);
    for (name, e, exact) in [
        ("t_mean", t.mean, t_infinity_mean(alpha)),
        ("t_variance", t.variance, t_infinity_variance(alpha)),
        ("corr_r0sq_t", t.corr_with_r0_squared, rho),
    ] {
        table.push(vec![
            Cell::Text(name.into()),
            blank(),
            blank(),
            Cell::Real(e.value),
            Cell::Real(e.stderr),
            Cell::Real(exact),
        ]);
    }
    emit(cfg, Report::Table(table), Format::Csv)
}

pub fn converge(cfg: &RunConfig) -> Result<(), CliError> {
    let rep = report(cfg, "converge")?;
    for h in &rep.horizons {
        eprintln!(
            "t = {}: median gap {:.3e}, median stderr {:.3e}, median z {:.2}, redraw rate {:.4}",
            h.t, h.median_gap, h.median_stderr, h.median_z, h.redraw_rate
        );
    }
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    if rep.flagged {
        eprintln!("flagged: median gap of {} does not decrease with t", rep.regime);
    }
    emit(cfg, Report::Table(rows_table(&rep)), Format::Csv)
}

pub fn corr(cfg: &RunConfig) -> Result<(), CliError> {
    let lepage = cfg.simulation.source == Source::Lepage;
    let mut header = vec!["gamma", "alpha", "rho", "rho_from_moments", "cov", "t_mean", "t_variance"];
    if lepage {
        header.extend(["empirical_rho", "stderr"]);
    }
    let mut table = Table::new(header);
    for (i, &gamma) in cfg.grids.gamma.iter().enumerate() {
        let c = correlation_r0sq_tinf(gamma)?;
        let mut row: Vec<Cell> = [gamma, 1.0 / gamma, c.rho, c.rho_from_moments, c.cov, c.t_mean, c.t_variance]
            .into_iter()
            .map(Cell::Real)
            .collect();
        if lepage {
            let seed = cfg.seed.wrapping_add(i as u64);
            let st = lepage_statistics(1.0 / gamma, &[0], 2, &cfg.lepage(), cfg.simulation.n, seed)?;
            let e = st.t_infinity.corr_with_r0_squared;
            row.extend([Cell::Real(e.value), Cell::Real(e.stderr)]);
        }
        table.push(row);
    }
    emit(cfg, Report::Table(table), Format::Csv)
}

struct Check {
    name: String,
    pass: bool,
    detail: String,
}

fn check_close(name: impl Into<String>, got: f64, want: f64, tol: f64) -> Check {
    Check {
        name: name.into(),
        pass: (got - want).abs() <= tol,
        detail: format!("got {got:.12e}, want {want:.12e}, tol {tol:.0e}"),
    }
}

fn check_result(name: impl Into<String>, r: Result<Check, claimtail::Error>) -> Check {
    let name = name.into();
    r.unwrap_or_else(|e| Check {
        name,
        pass: false,
        detail: e.to_string(),
    })
}

fn identity_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let regimes: [(&str, f64); 8] = [
        ("lt1-fixed-s", 0.6),
        ("lt1-vanishing", 0.6),
        ("lt1-fixed-p", 0.6),
        ("gt1-fixed-s", 2.0),
        ("gt1-vanishing", 2.0),
        ("gt1-fixed-p", 2.0),
        ("ctr12-fixed-s", 1.5),
        ("ctr2-fixed-s", 3.0),
    ];
    let mixes = [Mixing::unit(), Mixing::gamma(2.0, 2.0).expect("valid")];
    for (name, alpha) in regimes {
        for mix in &mixes {
            let label = format!("normalization {name} alpha={alpha} mixing={}", mix_label(mix));
            out.push(check_result(
                label.clone(),
                (|| {
                    let regime = Regime::from_name(name, 1, 0.5)?;
                    let model = Tail::pareto(alpha)?;
                    Ok(check_close(label, lt_eval(&regime, &model, mix, 0.0, 0.0, 0.0)?, 1.0, 1e-8))
                })(),
            ));
        }
    }
    for t in [10.0, 100.0, 1000.0] {
        let label = format!("normalization finite t={t}");
        out.push(check_result(
            label.clone(),
            (|| {
                let spec = CountingSpec::poisson(t)?;
                let model = Tail::pareto(0.7)?;
                let v = exact_joint_lt_with(&spec, &model, &LtQuery::new(0.0, 0.0, 0.0, 2)?, &Default::default())?;
                Ok(check_close(label, v.value, 1.0, 1e-9))
            })(),
        ));
    }
    out.push(check_result(
        "mean of the total claim amount",
        (|| {
            let spec = CountingSpec::new(Mixing::gamma(3.0, 1.5)?, 40.0)?;
            let model = Tail::pareto(2.5)?;
            let m = component_means(&spec, &model, 1)?;
            let want = spec.mean_count() * model.mean()?;
            Ok(check_close("mean of the total claim amount", m.lambda + m.xi + m.sigma, want, 1e-7 * want))
        })(),
    ));
    for gamma in [1.5, 2.0, 3.0] {
        for s in [0, 1, 3] {
            let label = format!("variance identity s={s} gamma={gamma}");
            out.push(check_result(
                label.clone(),
                (|| {
                    let f = ratio_variance_forms(s, gamma)?;
                    let m1 = ratio_moment(s, 1, &gamma)?;
                    let m2 = ratio_moment(s, 2, &gamma)?;
                    let c = check_close(label.clone(), f.gamma_form, f.alpha_form, 1e-12 * f.alpha_form);
                    let d = check_close(label, m2 - m1 * m1, f.gamma_form, 1e-10 * f.gamma_form);
                    Ok(Check {
                        pass: c.pass && d.pass,
                        detail: format!("{}; {}", c.detail, d.detail),
                        name: c.name,
                    })
                })(),
            ));
        }
    }
    out.push(check_result(
        "exact second ratio moment at gamma=2",
        ratio_moment_rational(0, 2, 2, 1).map(|m| {
            let want = Ratio::new(16.into(), 3.into());
            Check {
                name: "exact second ratio moment at gamma=2".into(),
                pass: m == want,
                detail: format!("got {m}, want {want}"),
            }
        }),
    ));
    for gamma in [1.5, 2.0, 5.0] {
        let label = format!("correlation consistency gamma={gamma}");
        out.push(check_result(
            label.clone(),
            correlation_r0sq_tinf(gamma).map(|c| check_close(label, c.rho, c.rho_from_moments, 1e-10)),
        ));
    }
    out.push(check_result(
        "correlation limit",
        correlation_r0sq_tinf(1e6).map(|c| check_close("correlation limit", c.rho, -6.0 / 43f64.sqrt(), 1e-5)),
    ));
    out
}

fn mix_label(m: &Mixing) -> String {
    match m {
        Mixing::Degenerate { theta } => format!("degenerate:{theta}"),
        Mixing::Gamma { shape, rate } => format!("gamma:{shape}:{rate}"),
        Mixing::Discrete { atoms } => format!("discrete({} atoms)", atoms.len()),
    }
}

/// Runs the identity suite; returns whether every line passed.
pub fn check() -> bool {
    let mut all = true;
    for c in identity_suite() {
        all &= c.pass;
        println!("{} {} ({})", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    all
}
