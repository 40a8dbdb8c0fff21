use std::path::Path;

use anyhow::Context;
use cone_weights::fredholm::{
    acyl_windows, asymptotics_set_dirac, asymptotics_set_laplace, base_window, dirac_windows, extension_report,
    gamma_to_beta, index_ladder, to_delta_ah, to_gamma, to_gamma_window, window_ac0, window_acinf, window_ah,
    window_ah_shifted, witt_check, witt_interval, AsymptoticsMember, LinkData, Parametrization, WeightWindow,
    WindowOutcome, WittVerdict,
};
use cone_weights::link_spectra::{DiracSpectrumTable, SpectrumTable};
use cone_weights::model_cone::{
    log_derivative, mellin_derivative_check, mellin_forward, mellin_isometry_check, solve_model_problem,
    HomogeneousMode, LogGrid, ModeFunction, ModeTerm,
};
use cone_weights::symbols::{
    ah_roots, dirac_root_set, generic_conormal_roots, laplace_roots, ConeData, Convention,
};
use cone_weights::verify::{bump, run_checks};
use cone_weights::scalar::format_float as num;
use cone_weights::Scalar;
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::args::{ConventionArg, MellinCheck, MellinCmd, OpKind, ProblemArgs, SampleFunction, VerifyCmd};
use crate::link::{dirac_table, laplace_table, Coverage, LinkExpr};
use crate::output::{scalar, value, window, window_line, yes_no, Report, Table};
use crate::UsageError;

/// Amount by which a ladder endpoint sitting on an indicial root is moved inward.
const LADDER_NUDGE: (i64, i64) = (1, 1_000_000);

/// Tail tolerance for individual Mellin transforms.
const MELLIN_TAIL_TOLERANCE: f64 = 1e-8;

fn usage(message: impl Into<String>) -> anyhow::Error {
    UsageError(message.into()).into()
}

/// Validated view of the problem flags.
pub struct Problem {
    args: ProblemArgs,
}

impl Problem {
    pub fn new(args: ProblemArgs) -> Self {
        Problem { args }
    }

    fn op(&self) -> OpKind {
        self.args.op.unwrap_or(OpKind::Laplace)
    }

    fn n(&self) -> anyhow::Result<u32> {
        self.args.n.ok_or_else(|| usage("--n is required"))
    }

    fn cone(&self) -> anyhow::Result<ConeData> {
        let s = self.args.s.ok_or_else(|| usage("--s is required"))?.0;
        Ok(ConeData::new(self.n()?, s)?)
    }

    fn p(&self) -> anyhow::Result<Scalar> {
        Ok(self.args.p.map_or(Scalar::int(2), |p| p.0))
    }

    fn convention(&self) -> Convention {
        match self.args.convention {
            Some(ConventionArg::Down) => Convention::Downstairs,
            _ => Convention::Upstairs,
        }
    }

    fn link(&self) -> anyhow::Result<LinkExpr> {
        Ok(self.args.link.as_deref().unwrap_or("sphere").parse()?)
    }

    fn laplace_table(&self, needed: Option<Scalar>) -> anyhow::Result<SpectrumTable> {
        let coverage = Coverage {
            n: self.n()?,
            kmax: self.args.kmax,
            mu_max: self.args.mu_max.map(|m| m.0),
            needed,
        };
        laplace_table(&self.link()?, coverage)
    }

    /// Dirac data, with the curvature gap `(n-1)/2` merged in under `--kappa-nonneg`.
    fn dirac_table(&self, with_curvature_gap: bool) -> anyhow::Result<Option<DiracSpectrumTable>> {
        let link = self.args.link.as_deref().map(str::parse::<LinkExpr>).transpose()?;
        let table = dirac_table(self.args.dirac_file.as_ref(), link.as_ref(), self.args.gap.map(|g| g.0))?;
        if !(with_curvature_gap && self.args.kappa_nonneg) {
            return Ok(table);
        }
        let gap = Scalar::ratio(self.n()? as i64 - 1, 2);
        Ok(Some(match table {
            Some(t) => t.with_gap_at_least(gap)?,
            None => DiracSpectrumTable::gap_only("curvature gap", gap)?,
        }))
    }

    fn require_dirac_data(&self) -> anyhow::Result<()> {
        let a = &self.args;
        if a.dirac_file.is_none() && a.gap.is_none() && !a.kappa_nonneg && a.link.is_none() {
            return Err(usage("dirac problems need --dirac-file, --gap, --kappa-nonneg or a Dirac --link file"));
        }
        Ok(())
    }

    /// The weight query as `beta`, from whichever of `--beta/--gamma/--delta` was given.
    fn beta(&self, n: u32) -> anyhow::Result<Option<Scalar>> {
        let a = &self.args;
        let given = [a.beta.is_some(), a.gamma.is_some(), a.delta.is_some()].iter().filter(|g| **g).count();
        if given > 1 {
            return Err(usage("give at most one of --beta, --gamma, --delta"));
        }
        if let Some(b) = a.beta {
            return Ok(Some(b.0));
        }
        if let Some(g) = a.gamma {
            return Ok(Some(gamma_to_beta(n, g.0)));
        }
        if let Some(d) = a.delta {
            return Ok(Some(match self.op() {
                OpKind::Ah | OpKind::AhShifted => to_delta_ah(n, self.p()?, d.0),
                _ => -d.0,
            }));
        }
        Ok(None)
    }

    fn warn_ignored_s(&self) {
        if self.args.s.is_some() {
            eprintln!("warning: --s is ignored for hyperbolic operators");
        }
    }
}

fn cone_json(cone: &ConeData) -> Value {
    json!({ "n": cone.n(), "s": scalar(cone.s()), "a": scalar(cone.a()), "a_hat": scalar(cone.a_hat()) })
}

fn cone_text(cone: &ConeData) -> String {
    format!("n = {}, s = {} (a = {})", cone.n(), cone.s(), cone.a())
}

fn table_json(table: &SpectrumTable) -> Value {
    json!({ "label": table.label(), "truncation": table.truncation().describe() })
}

fn float_cell(x: Scalar) -> String {
    x.to_f64().to_string()
}

// ---------------------------------------------------------------------------
// roots

pub fn roots(problem: &Problem) -> anyhow::Result<Report> {
    match problem.op() {
        OpKind::Laplace => laplace_roots_report(problem),
        OpKind::Dirac => dirac_roots_report(problem),
        OpKind::Generic => generic_roots_report(problem),
        op @ (OpKind::Ah | OpKind::AhShifted) => ah_roots_report(problem, op),
    }
}

fn laplace_roots_report(problem: &Problem) -> anyhow::Result<Report> {
    let cone = problem.cone()?;
    let convention = problem.convention();
    let table = problem.laplace_table(None)?;
    let mut rows = Vec::new();
    let mut text = vec![
        format!("laplace indicial roots, {}, link {} ({})", cone_text(&cone), table.label(), convention.tag()),
        format!("{:<10} {:<6} roots", "mu", "mult"),
    ];
    let mut csv = Table { headers: vec!["mu", "mult", "root_lo", "root_hi"], rows: Vec::new() };
    for e in table.entries() {
        let [lo, hi] = laplace_roots(&cone, e.value, e.mult, convention)?;
        rows.push(json!({ "mu": scalar(e.value), "mult": e.mult, "roots": [scalar(lo.zeta), scalar(hi.zeta)] }));
        text.push(format!("{:<10} {:<6} {}, {}", e.value, e.mult, lo.zeta, hi.zeta));
        csv.rows.push(vec![float_cell(e.value), e.mult.to_string(), float_cell(lo.zeta), float_cell(hi.zeta)]);
    }
    let json = json!({
        "command": "roots",
        "operator": "laplace",
        "convention": convention.tag(),
        "cone": cone_json(&cone),
        "link": table_json(&table),
        "rows": rows,
    });
    Ok(Report::new(json, text).with_table(csv))
}

fn dirac_roots_report(problem: &Problem) -> anyhow::Result<Report> {
    let cone = problem.cone()?;
    let convention = problem.convention();
    let table = problem
        .dirac_table(false)?
        .filter(|t| !t.entries().is_empty())
        .ok_or_else(|| usage("dirac roots need listed eigenvalues (--dirac-file or a Dirac --link file)"))?;
    let mut text = vec![
        format!("dirac indicial roots, {}, link {} ({})", cone_text(&cone), table.label(), convention.tag()),
        format!("{:<10} {:<6} root", "theta", "mult"),
    ];
    let mut rows = Vec::new();
    let mut csv = Table { headers: vec!["theta", "mult", "root"], rows: Vec::new() };
    for root in dirac_root_set(&cone, &table, convention) {
        rows.push(json!({ "theta": scalar(root.source), "mult": root.mult, "root": scalar(root.zeta) }));
        text.push(format!("{:<10} {:<6} {}", root.source, root.mult, root.zeta));
        csv.rows.push(vec![float_cell(root.source), root.mult.to_string(), float_cell(root.zeta)]);
    }
    let json = json!({
        "command": "roots",
        "operator": "dirac",
        "convention": convention.tag(),
        "cone": cone_json(&cone),
        "link": { "label": table.label(), "truncation": table.truncation().describe() },
        "rows": rows,
    });
    Ok(Report::new(json, text).with_table(csv))
}

fn generic_roots_report(problem: &Problem) -> anyhow::Result<Report> {
    let coeffs = problem.args.coeffs.as_ref().ok_or_else(|| usage("generic roots need --coeffs c0,c1,...,cm"))?;
    let roots = generic_conormal_roots(&coeffs.0)?;
    let mut text = vec![
        format!("conormal polynomial coefficients {}", join_floats(&coeffs.0)),
        format!("{:<24} {:<24} mult", "re", "im"),
    ];
    let mut csv = Table { headers: vec!["re", "im", "mult", "is_real"], rows: Vec::new() };
    for r in &roots {
        text.push(format!("{:<24} {:<24} {}", num(r.re), num(r.im), r.mult));
        csv.rows.push(vec![r.re.to_string(), r.im.to_string(), r.mult.to_string(), r.is_real.to_string()]);
    }
    let json = json!({ "command": "roots", "operator": "generic", "coefficients": coeffs.0, "roots": value(&roots) });
    Ok(Report::new(json, text).with_table(csv))
}

fn ah_roots_report(problem: &Problem, op: OpKind) -> anyhow::Result<Report> {
    problem.warn_ignored_s();
    let n = problem.n()?;
    let t = match (op, problem.args.t) {
        (OpKind::AhShifted, None) => return Err(usage("ah-shifted needs --t")),
        (_, t) => t.map_or(Scalar::zero(), |t| t.0),
    };
    let [lo, hi] = ah_roots(n, t);
    let text = vec![format!("hyperbolic indicial roots, n = {n}, t = {t}: {lo}, {hi}")];
    let json = json!({
        "command": "roots",
        "operator": if op == OpKind::Ah { "ah" } else { "ah_shifted" },
        "n": n,
        "t": scalar(t),
        "roots": [scalar(lo), scalar(hi)],
    });
    let csv = Table { headers: vec!["root"], rows: vec![vec![float_cell(lo)], vec![float_cell(hi)]] };
    Ok(Report::new(json, text).with_table(csv))
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| num(*x)).collect::<Vec<_>>().join(", ")
}

// ---------------------------------------------------------------------------
// windows

struct Query {
    param: Parametrization,
    value: Scalar,
}

fn query_lines(windows: &[(String, WeightWindow)], queries: &[Query]) -> (Vec<Value>, Vec<String>) {
    let mut json = Vec::new();
    let mut text = Vec::new();
    for (name, w) in windows {
        if let Some(q) = queries.iter().find(|q| q.param == w.parametrization) {
            let inside = w.contains(q.value);
            json.push(json!({ "window": name, "parametrization": q.param.tag(), "weight": scalar(q.value), "inside": inside }));
            text.push(format!("{} = {} in {name}: {}", q.param.tag(), q.value, yes_no(inside)));
        }
    }
    (json, text)
}

pub fn windows(problem: &Problem) -> anyhow::Result<Report> {
    match problem.op() {
        OpKind::Laplace => laplace_windows(problem),
        OpKind::Dirac => dirac_windows_report(problem),
        OpKind::Ah | OpKind::AhShifted => ah_windows(problem),
        OpKind::Generic => Err(usage("windows are not defined for generic operators; use `roots --op generic`")),
    }
}

fn laplace_windows(problem: &Problem) -> anyhow::Result<Report> {
    let cone = problem.cone()?;
    let n = cone.n();
    let beta = problem.beta(n)?;
    if cone.a().is_zero() {
        return acyl_windows_report(problem, &cone, beta);
    }
    let base = base_window(&cone)?;
    let mut named = vec![("base".to_string(), base), ("base_gamma".to_string(), to_gamma_window(n, &base))];
    if cone.s() == Scalar::int(1) {
        named.push(("ac0".to_string(), window_ac0(n)?));
    }
    if cone.s() == Scalar::int(-1) {
        named.push(("acinf".to_string(), window_acinf(n)?));
    }
    let mut text = vec![format!("laplace windows, {}", cone_text(&cone))];
    text.extend(named.iter().map(|(name, w)| window_line(name, w)));
    let queries: Vec<Query> = beta
        .map(|b| {
            vec![
                Query { param: Parametrization::Beta, value: b },
                Query { param: Parametrization::Gamma, value: to_gamma(n, b) },
            ]
        })
        .unwrap_or_default();
    let (query_json, query_text) = query_lines(&named, &queries);
    text.extend(query_text);
    let json = json!({
        "command": "windows",
        "operator": "laplace",
        "cone": cone_json(&cone),
        "windows": named.iter().map(|(name, w)| window(name, w)).collect::<Vec<_>>(),
        "query": query_json,
    });
    Ok(Report::new(json, text))
}

fn acyl_windows_report(problem: &Problem, cone: &ConeData, beta: Option<Scalar>) -> anyhow::Result<Report> {
    let table = problem.laplace_table(None)?;
    let report = acyl_windows(cone.n(), &table)?;
    let mut text = vec![
        format!("cylindrical windows, n = {}, link {}", cone.n(), table.label()),
        window_line("primary", &report.primary),
        format!(
            "failure points (delta): {}",
            report.failure_points.iter().map(|p| p.display()).collect::<Vec<_>>().join(", ")
        ),
    ];
    if let Some(bound) = report.known_up_to {
        text.push(format!("known for |delta| < {bound}"));
    }
    for (i, gap) in report.gaps.iter().enumerate() {
        text.push(window_line(&format!("gap {}", i + 1), gap));
    }
    let mut query = Value::Null;
    if let Some(b) = beta {
        let delta = -b;
        let fredholm = report.is_fredholm(delta)?;
        text.push(format!("delta = {delta}: fredholm {}", yes_no(fredholm)));
        query = json!({ "delta": scalar(delta), "fredholm": fredholm });
    }
    let json = json!({
        "command": "windows",
        "operator": "laplace",
        "regime": "cylindrical",
        "cone": cone_json(cone),
        "link": table_json(&table),
        "windows": [window("primary", &report.primary)],
        "failure_points": value(&report.failure_points),
        "known_up_to": report.known_up_to.map(scalar),
        "gaps": report.gaps.iter().enumerate().map(|(i, g)| window(&format!("gap {}", i + 1), g)).collect::<Vec<_>>(),
        "query": query,
    });
    let csv = Table {
        headers: vec!["delta_lo", "delta_hi"],
        rows: report
            .gaps
            .iter()
            .map(|g| vec![g.lo.display(), g.hi.display()])
            .collect(),
    };
    Ok(Report::new(json, text).with_table(csv))
}

fn outcome_json(name: &str, outcome: &WindowOutcome) -> Value {
    match outcome {
        WindowOutcome::Window { window: w } => json!({ "status": "window", "window": window(name, w) }),
        WindowOutcome::NoVerdict { failed_hypothesis } => {
            json!({ "status": "no_verdict", "name": name, "failed_hypothesis": failed_hypothesis })
        }
    }
}

fn outcome_line(name: &str, outcome: &WindowOutcome) -> String {
    match outcome {
        WindowOutcome::Window { window: w } => window_line(name, w),
        WindowOutcome::NoVerdict { failed_hypothesis } => format!("{name:<14} no verdict: needs {failed_hypothesis}"),
    }
}

fn dirac_windows_report(problem: &Problem) -> anyhow::Result<Report> {
    problem.require_dirac_data()?;
    let cone = problem.cone()?;
    let table = problem.dirac_table(false)?;
    let result = dirac_windows(&cone, table.as_ref(), problem.args.kappa_nonneg)?;
    let mut text = vec![
        format!("dirac windows, {}", cone_text(&cone)),
        outcome_line("basic", &result.basic),
        outcome_line("enhanced", &result.enhanced),
        format!(
            "symmetric weight {} (inside enhanced window: {})",
            result.symmetric_weight,
            yes_no(result.symmetric_weight_in_enhanced)
        ),
    ];
    let named: Vec<(String, WeightWindow)> = [("basic", &result.basic), ("enhanced", &result.enhanced)]
        .into_iter()
        .filter_map(|(name, o)| o.window().map(|w| (name.to_string(), *w)))
        .collect();
    let queries: Vec<Query> = problem
        .beta(cone.n())?
        .map(|b| vec![Query { param: Parametrization::Beta, value: b }])
        .unwrap_or_default();
    let (query_json, query_text) = query_lines(&named, &queries);
    text.extend(query_text);
    let json = json!({
        "command": "windows",
        "operator": "dirac",
        "cone": cone_json(&cone),
        "basic": outcome_json("basic", &result.basic),
        "enhanced": outcome_json("enhanced", &result.enhanced),
        "symmetric_weight": scalar(result.symmetric_weight),
        "symmetric_weight_in_enhanced": result.symmetric_weight_in_enhanced,
        "query": query_json,
    });
    Ok(Report::new(json, text))
}

fn ah_windows(problem: &Problem) -> anyhow::Result<Report> {
    problem.warn_ignored_s();
    let n = problem.n()?;
    let p = problem.p()?;
    let (name, w, t) = match problem.op() {
        OpKind::AhShifted => {
            let t = problem.args.t.ok_or_else(|| usage("ah-shifted needs --t"))?.0;
            ("ah_shifted", window_ah_shifted(n, p, t)?, Some(t))
        }
        _ => ("ah", window_ah(n, p)?, None),
    };
    let named = vec![(name.to_string(), w)];
    let mut text = vec![match t {
        Some(t) => format!("hyperbolic windows, n = {n}, p = {p}, t = {t}"),
        None => format!("hyperbolic windows, n = {n}, p = {p}"),
    }];
    text.push(window_line(name, &w));
    let queries: Vec<Query> = match (problem.args.delta, problem.args.beta) {
        (Some(d), _) => vec![Query { param: Parametrization::Delta, value: d.0 }],
        (None, Some(b)) => vec![Query { param: Parametrization::Delta, value: to_delta_ah(n, p, b.0) }],
        _ => Vec::new(),
    };
    let (query_json, query_text) = query_lines(&named, &queries);
    text.extend(query_text);
    let json = json!({
        "command": "windows",
        "operator": name,
        "n": n,
        "p": scalar(p),
        "t": t.map(scalar),
        "windows": [window(name, &w)],
        "query": query_json,
    });
    Ok(Report::new(json, text))
}

// ---------------------------------------------------------------------------
// ladder

pub fn ladder(problem: &Problem) -> anyhow::Result<Report> {
    if problem.op() != OpKind::Laplace {
        return Err(usage("index ladders are computed for --op laplace"));
    }
    let cone = problem.cone()?;
    let range = problem.args.range.ok_or_else(|| usage("ladder needs --range lo,hi"))?;
    if !range.lo.lt(range.hi) {
        return Err(usage(format!("empty range ({}, {})", range.lo, range.hi)));
    }
    let base = base_window(&cone)?;
    let (base_lo, base_hi) = base.bounds().expect("base window is finite");
    let centre = cone.a() / 2;
    let mut reach = Scalar::zero();
    if range.hi.gt(base_hi) {
        reach = reach.max(range.hi - centre);
    }
    if range.lo.lt(base_lo) {
        reach = reach.max(centre - range.lo);
    }
    let needed = reach * reach - cone.a() * cone.a() / 4;
    let table = problem.laplace_table(Some(needed))?;

    let mut roots = Vec::new();
    for e in table.entries() {
        roots.extend(laplace_roots(&cone, e.value, e.mult, Convention::Upstairs)?.map(|r| r.zeta));
    }
    let nudge = Scalar::ratio(LADDER_NUDGE.0, LADDER_NUDGE.1);
    let on_root = |x: Scalar| roots.iter().any(|r| r.approx_eq(x));
    let mut lo = range.lo;
    let mut hi = range.hi;
    let mut nudged = Vec::new();
    if on_root(lo) {
        lo = lo + nudge;
        eprintln!("warning: range start {} is an indicial root; using {lo}", range.lo);
        nudged.push(json!({ "from": scalar(range.lo), "to": scalar(lo) }));
    }
    if on_root(hi) {
        hi = hi - nudge;
        eprintln!("warning: range end {} is an indicial root; using {hi}", range.hi);
        nudged.push(json!({ "from": scalar(range.hi), "to": scalar(hi) }));
    }
    let result = index_ladder(&cone, &table, lo, hi)?;

    let mut text = vec![
        format!("index ladder, {}, link {}", cone_text(&cone), table.label()),
        format!("{:<14} {:<14} index", "beta_lo", "beta_hi"),
    ];
    let mut csv = Table { headers: vec!["beta_lo", "beta_hi", "index"], rows: Vec::new() };
    for step in &result.steps {
        text.push(format!("{:<14} {:<14} {}", step.beta_lo, step.beta_hi, step.index));
        csv.rows.push(vec![float_cell(step.beta_lo), float_cell(step.beta_hi), step.index.to_string()]);
    }
    for bp in &result.breakpoints {
        text.push(format!("breakpoint beta = {} jump {}", bp.beta, bp.jump));
    }
    let json = json!({
        "command": "ladder",
        "cone": cone_json(&cone),
        "link": table_json(&table),
        "range": [scalar(result.beta_min), scalar(result.beta_max)],
        "nudged": nudged,
        "base_window": window("base", &result.base_window),
        "breakpoints": result.breakpoints.iter().map(|b| json!({ "beta": scalar(b.beta), "jump": b.jump })).collect::<Vec<_>>(),
        "steps": result.steps.iter().map(|s| json!({
            "beta_lo": scalar(s.beta_lo),
            "beta_hi": scalar(s.beta_hi),
            "index": s.index,
        })).collect::<Vec<_>>(),
    });
    Ok(Report::new(json, text).with_table(csv))
}

// ---------------------------------------------------------------------------
// witt

pub fn witt(problem: &Problem) -> anyhow::Result<Report> {
    problem.require_dirac_data()?;
    let cone = problem.cone()?;
    let table = problem
        .dirac_table(true)?
        .ok_or_else(|| usage("witt needs --dirac-file, --gap or --kappa-nonneg"))?;
    let (lo, hi) = witt_interval(&cone);
    let verdict = witt_check(&cone, &table);
    let summary = match verdict {
        WittVerdict::Satisfied => "Witt: satisfied".to_string(),
        WittVerdict::Violated(theta) => format!("Witt: violated (eigenvalue {theta})"),
        WittVerdict::Unknown => "Witt: unknown".to_string(),
    };
    let text = vec![
        summary,
        format!("interval ({lo}, {hi}), {}", cone_text(&cone)),
        format!(
            "link {}: gap {}, listed {}",
            table.label(),
            table.gap_bound().map_or("none".to_string(), |g| g.display()),
            table.truncation().describe()
        ),
    ];
    let json = json!({
        "command": "witt",
        "cone": cone_json(&cone),
        "interval": [scalar(lo), scalar(hi)],
        "verdict": value(&verdict),
        "link": {
            "label": table.label(),
            "gap": table.gap_bound().map(scalar),
            "truncation": table.truncation().describe(),
        },
    });
    Ok(Report::new(json, text))
}

// ---------------------------------------------------------------------------
// extension

fn member_json(m: &AsymptoticsMember) -> Value {
    json!({ "eigenvalue": scalar(m.eigenvalue), "branch": m.branch, "position": scalar(m.position), "mult": m.mult })
}

pub fn extension(problem: &Problem) -> anyhow::Result<Report> {
    let cone = problem.cone()?;
    let beta = problem.beta(cone.n())?.ok_or_else(|| usage("extension needs --beta (or --gamma)"))?;
    let (label, members, report) = match problem.op() {
        OpKind::Laplace => {
            let centre = beta - cone.a() / 2;
            let reach = centre.abs().max((centre - cone.s() * 2).abs());
            let table = problem.laplace_table(Some(reach * reach - cone.a() * cone.a() / 4))?;
            let members = asymptotics_set_laplace(&cone, &table, beta)?;
            let report = extension_report(&cone, LinkData::Laplace(&table), beta)?;
            (table.label().to_string(), members, report)
        }
        OpKind::Dirac => {
            problem.require_dirac_data()?;
            let table = problem.dirac_table(true)?.ok_or_else(|| usage("dirac extension needs Dirac data"))?;
            let members = asymptotics_set_dirac(&cone, &table, beta)?;
            let report = extension_report(&cone, LinkData::Dirac(&table), beta)?;
            (table.label().to_string(), members, report)
        }
        _ => return Err(usage("extension supports --op laplace or --op dirac")),
    };
    let mut text = vec![
        format!(
            "unique closed extension: {}; essentially self-adjoint weight: {}",
            yes_no(report.unique_closed_extension),
            report.symmetric_weight
        ),
        format!(
            "beta = {beta}, {}, link {label}; essentially self-adjoint: {}",
            cone_text(&cone),
            yes_no(report.essentially_self_adjoint)
        ),
    ];
    if members.is_empty() {
        text.push("asymptotics set: empty".into());
    }
    for m in &members {
        text.push(format!(
            "asymptotics member: eigenvalue {} (mult {}), branch {}, position {}",
            m.eigenvalue, m.mult, m.branch, m.position
        ));
    }
    let json = json!({
        "command": "extension",
        "operator": if problem.op() == OpKind::Laplace { "laplace" } else { "dirac" },
        "cone": cone_json(&cone),
        "link": label,
        "beta": scalar(beta),
        "unique_closed_extension": report.unique_closed_extension,
        "symmetric_weight": scalar(report.symmetric_weight),
        "essentially_self_adjoint": report.essentially_self_adjoint,
        "asymptotics": members.iter().map(member_json).collect::<Vec<_>>(),
    });
    Ok(Report::new(json, text))
}

// ---------------------------------------------------------------------------
// solve

fn mode_text(m: &HomogeneousMode) -> String {
    let log = if m.logpow > 0 { format!(" (log x)^{}", m.logpow) } else { String::new() };
    format!("x^{}{log} on mu = {} (mult {})", num(m.gamma), num(m.mu), m.mult)
}

fn function_text(f: &ModeFunction) -> String {
    if f.is_zero() {
        return "0".into();
    }
    f.terms()
        .iter()
        .map(|t| {
            let log = if t.logpow > 0 { format!(" (log x)^{}", t.logpow) } else { String::new() };
            format!("{} x^{}{log}", num(t.coeff), num(t.gamma))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn solve(problem: &Problem) -> anyhow::Result<Report> {
    if problem.op() != OpKind::Laplace {
        return Err(usage("solve handles --op laplace"));
    }
    let cone = problem.cone()?;
    let beta = problem.beta(cone.n())?.ok_or_else(|| usage("solve needs --beta"))?;
    let p = problem.p()?;
    let reach = beta - cone.a() / 2;
    let table = problem.laplace_table(Some(reach * reach - cone.a() * cone.a() / 4))?;
    let terms = problem.args.rhs.as_ref().map(|r| r.0.clone()).unwrap_or_default();
    let rhs = ModeFunction::new(terms.iter().map(|t| ModeTerm::new(t.coeff, t.exponent, t.logpow, t.mu)));
    let report = solve_model_problem(&cone, &table, &rhs, beta.to_f64(), p.to_f64())?;

    let mut text = vec![
        format!("model problem, {}, link {}, beta = {}, p = {p}", cone_text(&cone), table.label(), num(report.beta)),
        format!("index relative to beta = {}: {}", num(report.reference_beta), report.index),
    ];
    text.extend(report.kernel.iter().map(|m| format!("kernel: {}", mode_text(m))));
    text.extend(report.obstructed.iter().map(|m| format!("cokernel: {}", mode_text(m))));
    for (i, v) in report.rhs.iter().enumerate() {
        text.push(format!(
            "rhs term {}: {}; forcing exponent {}; data admitted {}; resonance {}; solution {}; solution admitted {}",
            i + 1,
            function_text(&ModeFunction::new([v.term])),
            num(v.forcing_exponent),
            yes_no(v.data_member),
            value(&v.resonance).as_str().unwrap_or_default(),
            function_text(&v.particular),
            yes_no(v.particular_admitted),
        ));
    }
    let json = json!({
        "command": "solve",
        "cone": cone_json(&cone),
        "link": table_json(&table),
        "p_exact": scalar(p),
        "report": value(&report),
    });
    Ok(Report::new(json, text))
}

// ---------------------------------------------------------------------------
// mellin

fn read_samples(path: &Path) -> anyhow::Result<(LogGrid, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut ts = Vec::new();
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.starts_with(|c: char| c.is_ascii_alphabetic())) {
            continue;
        }
        let bad = || usage(format!("{}:{}: expected `t,value`", path.display(), i + 1));
        let (t, v) = line.split_once(',').ok_or_else(bad)?;
        ts.push(t.trim().parse::<f64>().map_err(|_| bad())?);
        values.push(v.trim().parse::<f64>().map_err(|_| bad())?);
    }
    if ts.len() < 5 {
        return Err(usage(format!("{}: need at least 5 samples", path.display())));
    }
    let grid = LogGrid::new(ts[0], ts[ts.len() - 1], ts.len())?;
    let h = grid.spacing();
    if let Some(j) = (0..ts.len()).find(|&j| (ts[j] - grid.t(j)).abs() > 1e-9 * h.max(1.0)) {
        return Err(usage(format!("{}: t is not uniformly spaced at row {}", path.display(), j + 1)));
    }
    Ok((grid, values))
}

fn builtin_samples(function: SampleFunction) -> (&'static str, LogGrid, Vec<f64>) {
    let grid = LogGrid::reference();
    let (label, samples) = match function {
        SampleFunction::Exp => ("exp(-x)", grid.sample(|x| (-x).exp())),
        SampleFunction::Gauss => ("exp(-x^2)", grid.sample(|x| (-x * x).exp())),
        SampleFunction::Xexp => ("x exp(-x)", grid.sample(|x| x * (-x).exp())),
        SampleFunction::Bump => ("bump(log x)", grid.sample(|x| bump(x.ln()))),
    };
    (label, grid, samples)
}

pub fn mellin(cmd: &MellinCmd) -> anyhow::Result<Report> {
    let (label, grid, samples) = match &cmd.samples {
        Some(path) => {
            let (grid, samples) = read_samples(path)?;
            ("samples", grid, samples)
        }
        None => builtin_samples(cmd.function),
    };
    let source = cmd.samples.as_ref().map_or(label.to_string(), |p| p.display().to_string());
    let zeta = Complex64::new(cmd.zeta.re, cmd.zeta.im);
    let wants = |c: MellinCheck| cmd.check == c || cmd.check == MellinCheck::All;

    let mut text = vec![format!(
        "mellin checks for {source} on t in [{}, {}] with {} points, tolerance {}",
        num(grid.t_min()),
        num(grid.t_max()),
        grid.count(),
        num(cmd.tolerance)
    )];
    let mut checks = serde_json::Map::new();
    let mut failed = false;

    if wants(MellinCheck::Forward) {
        let m = mellin_forward(&grid, &samples, zeta, MELLIN_TAIL_TOLERANCE)?;
        text.push(format!(
            "forward    M f({}, {}) = {} + {} i (tail {})",
            num(zeta.re),
            num(zeta.im),
            num(m.re),
            num(m.im),
            num(m.tail)
        ));
        checks.insert("forward".into(), json!({ "zeta": [zeta.re, zeta.im], "value": value(&m) }));
    }
    if wants(MellinCheck::Derivative) {
        let df = log_derivative(&grid, &samples)?;
        let residual = mellin_derivative_check(&grid, &samples, &df, zeta, MELLIN_TAIL_TOLERANCE)?;
        let pass = residual < cmd.tolerance;
        failed |= !pass;
        text.push(format!(
            "{} derivative rule at ({}, {}): residual {}",
            pass_fail(pass),
            num(zeta.re),
            num(zeta.im),
            num(residual)
        ));
        checks.insert(
            "derivative".into(),
            json!({ "zeta": [zeta.re, zeta.im], "residual": residual, "passed": pass }),
        );
    }
    if wants(MellinCheck::Isometry) {
        let r = mellin_isometry_check(&grid, &samples, cmd.theta, cmd.line_count, cmd.half_width)?;
        let pass = r.relative_error < cmd.tolerance;
        failed |= !pass;
        text.push(format!(
            "{} isometry at theta = {}: weighted norm^2 {}, line integral {}, relative error {}",
            pass_fail(pass),
            num(cmd.theta),
            num(r.weighted_norm_sq),
            num(r.line_integral),
            num(r.relative_error)
        ));
        checks.insert(
            "isometry".into(),
            json!({
                "theta": cmd.theta,
                "line_count": cmd.line_count,
                "half_width": cmd.half_width,
                "report": value(&r),
                "passed": pass,
            }),
        );
    }
    let json = json!({
        "command": "mellin",
        "function": source,
        "grid": { "t_min": grid.t_min(), "t_max": grid.t_max(), "count": grid.count() },
        "tolerance": cmd.tolerance,
        "checks": checks,
        "passed": !failed,
    });
    let mut report = Report::new(json, text);
    report.failed = failed;
    Ok(report)
}

fn pass_fail(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

// ---------------------------------------------------------------------------
// verify

pub fn verify(cmd: &VerifyCmd) -> anyhow::Result<Report> {
    let results = run_checks(cmd.filter.as_deref(), cmd.inject_failure.as_deref());
    if results.is_empty() {
        return Err(usage(format!("no check matches `{}`", cmd.filter.as_deref().unwrap_or_default())));
    }
    let failures = results.iter().filter(|r| !r.passed).count();
    let mut text: Vec<String> = results
        .iter()
        .map(|r| format!("{} {}: {}", pass_fail(r.passed), r.name, r.detail))
        .collect();
    text.push(format!("{} checks, {} failed", results.len(), failures));
    let json = json!({
        "command": "verify",
        "checks": value(&results),
        "total": results.len(),
        "failed": failures,
    });
    let csv = Table {
        headers: vec!["check", "passed"],
        rows: results.iter().map(|r| vec![r.name.clone(), r.passed.to_string()]).collect(),
    };
    let mut report = Report::new(json, text).with_table(csv);
    report.failed = failures > 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::args::{RangeArg, ScalarArg};

    fn args(op: OpKind, n: u32, s: i64) -> ProblemArgs {
        ProblemArgs { op: Some(op), n: Some(n), s: Some(ScalarArg(Scalar::int(s))), ..Default::default() }
    }

    #[test]
    fn ladder_endpoint_on_root_is_nudged() {
        let mut a = args(OpKind::Laplace, 4, 1);
        a.range = Some(RangeArg { lo: Scalar::int(-1), hi: Scalar::int(3) });
        let report = ladder(&Problem::new(a)).unwrap();
        assert_eq!(report.json["nudged"].as_array().unwrap().len(), 2);
        assert_eq!(report.json["range"][0]["display"], "-999999/1000000");
    }

    #[test]
    fn ladder_inside_base_window_is_flat() {
        let mut a = args(OpKind::Laplace, 5, 1);
        a.range = Some(RangeArg { lo: Scalar::ratio(1, 2), hi: Scalar::int(2) });
        let report = ladder(&Problem::new(a)).unwrap();
        let steps = report.json["steps"].as_array().unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(steps[0]["index"], 0);
    }

    #[test]
    fn cylindrical_windows_list_failure_points() {
        let report = windows(&Problem::new(args(OpKind::Laplace, 4, 0))).unwrap();
        assert_eq!(report.json["regime"], "cylindrical");
        assert_eq!(report.json["windows"][0]["lo"]["display"], "0");
    }

    #[test]
    fn generic_operator_has_no_windows() {
        let err = windows(&Problem::new(args(OpKind::Generic, 4, 1))).unwrap_err();
        assert!(err.downcast_ref::<UsageError>().is_some());
    }
}
