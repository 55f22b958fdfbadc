//! Subcommand implementations: validate arguments, compute, and emit a table.

use std::f64::consts::PI;

use hypball::closedform::{
    conjecture1_residual, conjecture2_zero_count, green_closed_n4, green_closed_n6, laplace_weight, poisson_integral,
    Rect,
};
use hypball::geometry::unit_sphere_area;
use hypball::identities::{run_suite, SUITE_NAMES};
use hypball::kernels::{green_function_radial, poisson_coefficient, poisson_kernel_radial, SeriesControl};
use hypball::mc_sim::{validate, ExitRule, PotentialRule, Scheme, SdeConfig, ValidationPlan};
use hypball::quadrature::QuadratureControl;
use hypball::{BallDomain, Dimension, Point};
use serde::Serialize;

use crate::error::CliError;
use crate::output::{config_pairs, destination, render, write, Cell, Meta, Table};
use crate::{
    AngleOpts, ClosedTable, CoeffsArgs, Command, ConjectureScanArgs, DomainOpts, ExitChoice, GreenClosedArgs,
    GreenEvalArgs, IdentityCheckArgs, McValidateArgs, OutputOpts, PkClosedArgs, PkEvalArgs, PotentialChoice,
    QuadOpts, SchemeChoice, SeriesOpts, SuiteChoice,
};

/// A finished command: its table plus an optional validation failure that
/// turns into exit status 3 after the table is written.
struct Outcome {
    table: Table,
    failure: Option<String>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, failure: None }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::PkEval(a) => emit("pk-eval", &a, &a.out, pk_eval(&a)?),
        Command::GreenEval(a) => emit("green-eval", &a, &a.out, green_eval(&a)?),
        Command::Coeffs(a) => emit("coeffs", &a, &a.out, coeffs(&a)?),
        Command::PkClosed(a) => emit("pk-closed", &a, &a.out, pk_closed(&a)?),
        Command::GreenClosed(a) => emit("green-closed", &a, &a.out, green_closed(&a)?),
        Command::McValidate(a) => emit("mc-validate", &a, &a.out, mc_validate(&a)?),
        Command::IdentityCheck(a) => emit("identity-check", &a, &a.out, identity_check(&a)?),
        Command::ConjectureScan(a) => emit("conjecture-scan", &a, &a.out, conjecture_scan(&a)?),
    }
}

fn emit(command: &str, args: &impl Serialize, out: &OutputOpts, outcome: impl Into<Outcome>) -> Result<(), CliError> {
    let outcome = outcome.into();
    let meta = Meta {
        command,
        config: config_pairs(args),
    };
    let text = render(&outcome.table, &meta, out.format);
    write(&text, destination(out.output.as_ref(), command, out.format).as_ref())?;
    match outcome.failure {
        Some(msg) => Err(CliError::Validation(msg)),
        None => Ok(()),
    }
}

fn domain(d: &DomainOpts) -> Result<BallDomain, CliError> {
    Ok(BallDomain::new(Dimension::new(d.n)?, d.r)?)
}

fn series(s: &SeriesOpts) -> Result<SeriesControl, CliError> {
    Ok(SeriesControl::new(s.series_kmax, s.series_tol, s.series_min_terms)?)
}

fn quadrature(q: &QuadOpts) -> Result<QuadratureControl, CliError> {
    Ok(QuadratureControl::new(q.quad_tol, q.quad_max_panels)?)
}

fn radius_inside(value: f64, domain: &BallDomain, what: &str) -> Result<f64, CliError> {
    if !(value >= 0.0 && value < domain.r) {
        return Err(CliError::Usage(format!("{what} must lie in [0, r) = [0, {}), got {value}", domain.r)));
    }
    Ok(value)
}

/// The requested angles; `true` when they form the midpoint grid.
fn angles(a: &AngleOpts) -> Result<(Vec<f64>, bool), CliError> {
    if let Some(t) = a.theta {
        if !(0.0..=PI).contains(&t) {
            return Err(CliError::Usage(format!("theta must lie in [0, π], got {t}")));
        }
        return Ok((vec![t], false));
    }
    if a.theta_grid == 0 {
        return Err(CliError::Usage("theta-grid must be at least 1".into()));
    }
    let m = f64::from(a.theta_grid);
    Ok(((0..a.theta_grid).map(|j| (f64::from(j) + 0.5) * PI / m).collect(), true))
}

fn pk_eval(a: &PkEvalArgs) -> Result<Table, CliError> {
    let dom = domain(&a.domain)?;
    let ax = radius_inside(a.x, &dom, "x")?;
    let ctl = series(&a.series)?;
    let (thetas, is_grid) = angles(&a.angles)?;
    let mut t = Table::new(vec!["theta", "cos_theta", "poisson", "tail_bound", "terms"]);
    let n = dom.dim.n();
    let surface = unit_sphere_area(n - 1) * dom.r.powi(n as i32 - 1);
    let mut mass = 0.0;
    for &theta in &thetas {
        let s = poisson_kernel_radial(&dom, ax, theta.cos(), &ctl)?;
        mass += s.value * surface * theta.sin().powi(n as i32 - 2) * PI / thetas.len() as f64;
        t.push(vec![theta.into(), theta.cos().into(), s.value.into(), s.tail_bound.into(), s.terms.into()]);
    }
    if is_grid {
        t.summarize("midpoint-mass", crate::output::format_real(mass));
    }
    Ok(t)
}

fn green_eval(a: &GreenEvalArgs) -> Result<Table, CliError> {
    let dom = domain(&a.domain)?;
    let ax = radius_inside(a.x, &dom, "x")?;
    let ay = radius_inside(a.y, &dom, "y")?;
    let ctl = series(&a.series)?;
    let (thetas, _) = angles(&a.angles)?;
    let mut t = Table::new(vec!["theta", "green", "tail_bound", "terms"]);
    for &theta in &thetas {
        let s = green_function_radial(&dom, ax, ay, theta.cos(), &ctl)?;
        t.push(vec![theta.into(), s.value.into(), s.tail_bound.into(), s.terms.into()]);
    }
    Ok(t)
}

fn coeffs(a: &CoeffsArgs) -> Result<Table, CliError> {
    let dom = domain(&a.domain)?;
    let ax = radius_inside(a.x, &dom, "x")?;
    let mut t = Table::new(vec!["k", "coefficient"]);
    for k in 0..=a.kmax {
        t.push(vec![k.into(), poisson_coefficient(&dom, k, ax)?.into()]);
    }
    Ok(t)
}

fn pk_closed(a: &PkClosedArgs) -> Result<Table, CliError> {
    let dom = domain(&a.domain)?;
    let ax = radius_inside(a.x, &dom, "x")?;
    let n = dom.dim.n() as usize;
    match a.table {
        ClosedTable::Weight => {
            let w = laplace_weight(dom.dim, ax * ax, dom.r2())?;
            if a.v_grid < 2 || a.v_max.is_nan() || a.v_max <= 0.0 {
                return Err(CliError::Usage("the weight table needs v-grid ≥ 2 and v-max > 0".into()));
            }
            let mut t = Table::new(vec!["v", "w"]);
            for j in 0..a.v_grid {
                let v = a.v_max * f64::from(j) / f64::from(a.v_grid - 1);
                t.push(vec![v.into(), w.eval(v).into()]);
            }
            t.summarize("regime", w.regime.name());
            Ok(t)
        }
        ClosedTable::Kernel => {
            let ctl = series(&a.series)?;
            let q = quadrature(&a.quad)?;
            let (thetas, _) = angles(&a.angles)?;
            let x = Point::polar(n, ax, 0.0);
            let mut t = Table::new(vec!["theta", "closed", "series", "abs_difference"]);
            let mut worst: f64 = 0.0;
            for &theta in &thetas {
                let y = Point::polar(n, dom.r, theta);
                let closed = poisson_integral(&dom, &x, &y, &q)?;
                let s = poisson_kernel_radial(&dom, ax, theta.cos(), &ctl)?.value;
                worst = worst.max((closed - s).abs());
                t.push(vec![theta.into(), closed.into(), s.into(), (closed - s).abs().into()]);
            }
            t.summarize("max-abs-difference", crate::output::format_real(worst));
            Ok(t)
        }
    }
}

fn green_closed(a: &GreenClosedArgs) -> Result<Table, CliError> {
    let dom = domain(&a.domain)?;
    let ax = radius_inside(a.x, &dom, "x")?;
    let ay = radius_inside(a.y, &dom, "y")?;
    let closed_fn = match dom.dim.n() {
        4 => green_closed_n4,
        6 => green_closed_n6,
        n => return Err(CliError::Usage(format!("closed-form Green functions exist for n = 4 and 6, got {n}"))),
    };
    let ctl = series(&a.series)?;
    let q = quadrature(&a.quad)?;
    let (thetas, _) = angles(&a.angles)?;
    let n = dom.dim.n() as usize;
    let x = Point::polar(n, ax, 0.0);
    let mut t = Table::new(vec!["theta", "closed", "series", "abs_difference"]);
    let mut worst: f64 = 0.0;
    for &theta in &thetas {
        let y = Point::polar(n, ay, theta);
        let closed = closed_fn(&dom, &x, &y, &q)?;
        let s = green_function_radial(&dom, ax, ay, theta.cos(), &ctl)?.value;
        worst = worst.max((closed - s).abs());
        t.push(vec![theta.into(), closed.into(), s.into(), (closed - s).abs().into()]);
    }
    t.summarize("max-abs-difference", crate::output::format_real(worst));
    Ok(t)
}

fn mc_validate(a: &McValidateArgs) -> Result<Outcome, CliError> {
    let dom = domain(&a.domain)?;
    if !(3..=8).contains(&dom.dim.n()) {
        return Err(CliError::Usage(format!("mc-validate supports n = 3..8, got {}", dom.dim.n())));
    }
    let ax = radius_inside(a.x, &dom, "x")?;
    let base = SdeConfig {
        dt: a.dt,
        max_steps: a.max_steps,
        n_paths: a.paths,
        seed: a.seed,
        r_floor: a.r_floor,
        scheme: Scheme::Cartesian,
        exit_rule: match a.exit_rule {
            ExitChoice::Grid => ExitRule::GridCrossing,
            ExitChoice::Bridge => ExitRule::BrownianBridge,
        },
        potential_rule: match a.potential_rule {
            PotentialChoice::Left => PotentialRule::LeftEndpoint,
            PotentialChoice::BridgeMean => PotentialRule::BridgeMean,
        },
    };
    let mut plan = ValidationPlan::new(dom, ax, base);
    plan.schemes = match a.scheme {
        SchemeChoice::Cartesian => vec![Scheme::Cartesian],
        SchemeChoice::Polar => vec![Scheme::Polar],
        SchemeChoice::Both => vec![Scheme::Cartesian, Scheme::Polar],
    };
    plan.k_max = a.kmax;
    plan.gauge_k_max = a.gauge_kmax;
    plan.extrapolate = a.extrapolate;
    plan.bias_curve = a.bias_curve;
    plan.z_threshold = a.z_threshold;
    let report = validate(&plan)?;
    let mut t = Table::new(vec![
        "scheme",
        "statistic",
        "method",
        "dt",
        "k",
        "reference",
        "empirical",
        "std_error",
        "z_score",
        "graded",
    ]);
    for r in &report.rows {
        t.push(vec![
            r.scheme.clone().into(),
            r.statistic.name().into(),
            r.method.into(),
            r.dt.into(),
            r.k.into(),
            r.reference.into(),
            r.empirical.into(),
            r.std_error.into(),
            r.z_score.into(),
            r.graded.into(),
        ]);
    }
    t.summarize("result", if report.passed { "pass" } else { "fail" });
    t.summarize("max-abs-z", crate::output::format_real(report.max_abs_z));
    for (scheme, dt, frac) in &report.censoring {
        t.summarize(
            &format!("censored-fraction {} dt {}", scheme.name(), crate::output::format_real(*dt)),
            crate::output::format_real(*frac),
        );
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
        t.summarize("warning", w.replace('=', " "));
    }
    let failure = (!report.passed).then(|| {
        format!(
            "max |z| = {:.3} (threshold {}), censoring {:?}",
            report.max_abs_z, a.z_threshold, report.censoring
        )
    });
    Ok(Outcome { table: t, failure })
}

fn parse_dims(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("cannot parse dimensions '{text}' (use 4, 4,6 or 3..8)"));
    let dims: Vec<u32> = if let Some((a, b)) = text.split_once("..") {
        let (a, b): (u32, u32) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    for &n in &dims {
        Dimension::new(n)?;
    }
    Ok(dims)
}

fn identity_check(a: &IdentityCheckArgs) -> Result<Outcome, CliError> {
    let dims = parse_dims(&a.n)?;
    let suites: Vec<&str> = match a.suite {
        SuiteChoice::Wronskian => vec!["wronskian"],
        SuiteChoice::Generating => vec!["generating"],
        SuiteChoice::Laplace => vec!["laplace"],
        SuiteChoice::All => SUITE_NAMES.to_vec(),
    };
    let mut t = Table::new(vec!["suite", "check", "residual", "tolerance", "passed"]);
    let mut failed = Vec::new();
    for name in suites {
        let report = run_suite(name, &dims)?;
        for c in &report.checks {
            t.push(vec![name.into(), c.label.clone().into(), c.residual.into(), c.tolerance.into(), c.passed().into()]);
        }
        let verdict = if report.passed() { "pass" } else { "fail" };
        t.summarize(name, format!("{verdict} ({} checks, {} failures)", report.checks.len(), report.failures()));
        if !report.passed() {
            failed.push(name);
        }
    }
    let failure = (!failed.is_empty()).then(|| format!("failing suites: {}", failed.join(", ")));
    Ok(Outcome { table: t, failure })
}

fn conjecture_scan(a: &ConjectureScanArgs) -> Result<Table, CliError> {
    let dim = Dimension::new(a.n)?;
    if let Some(text) = &a.rect {
        let parts: Vec<f64> = text
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Usage(format!("cannot parse rectangle '{text}'")))?;
        let [re_min, re_max, im_min, im_max] = parts[..] else {
            return Err(CliError::Usage("rectangle needs four numbers re_min,re_max,im_min,im_max".into()));
        };
        let rect = Rect::new(re_min, re_max, im_min, im_max)?;
        let zc = conjecture2_zero_count(dim, a.z, &rect)?;
        let mut t = Table::new(vec![
            "re_min",
            "re_max",
            "im_min",
            "im_max",
            "count",
            "winding",
            "nodes",
            "min_abs",
            "in_conjecture_region",
        ]);
        t.push(vec![
            re_min.into(),
            re_max.into(),
            im_min.into(),
            im_max.into(),
            Cell::Int(zc.count),
            zc.winding.into(),
            (zc.nodes as u64).into(),
            zc.min_abs.into(),
            zc.in_conjecture_region.into(),
        ]);
        return Ok(t);
    }
    let mut t = Table::new(vec!["k", "residual"]);
    let mut worst: f64 = 0.0;
    for k in 1..=a.kmax {
        let r = conjecture1_residual(dim, a.z, f64::from(k))?;
        worst = worst.max(r);
        t.push(vec![k.into(), r.into()]);
    }
    t.summarize("max-residual", crate::output::format_real(worst));
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_specs() {
        assert_eq!(parse_dims("3..8").unwrap(), vec![3, 4, 5, 6, 7, 8]);
        assert_eq!(parse_dims("4, 6").unwrap(), vec![4, 6]);
        assert_eq!(parse_dims("5").unwrap(), vec![5]);
        assert!(parse_dims("2..4").is_err());
        assert!(parse_dims("x").is_err());
        assert!(parse_dims("6..4").is_err());
    }
}
