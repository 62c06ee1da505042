use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use serde_json::{json, Value};

use skewforms::cases::{self, CaseReport};
use skewforms::characteristics::{
    canonical_system, characteristic_system, closure_along, detect_degeneracy, fan_initial_states, integrate,
    IntegrateOptions, OdeSystem, SystemKind, Trajectory,
};
use skewforms::relations::{
    analyze, find_integrating_factor, potential, sequential_integrate, Ansatz, Classification as RelClass,
    IntegratingFactor,
};
use skewforms::{Chart, Error, Expr, Form, Verdict, ZeroTest};

use crate::output::num;
use crate::problem::{CaseSpec, InputError, Problem, Result};
use crate::{AnsatzArg, CaseId, Cli, Command, Input};

pub struct Report {
    pub json: Value,
    pub text: String,
    /// Well-formed negative verdict.
    pub negative: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    seed: Option<u64>,
    tol: Option<f64>,
    samples: Option<usize>,
    jobs: Option<usize>,
    dt: Option<f64>,
    steps: Option<usize>,
}

struct Settings {
    zt: ZeroTest,
    jobs: usize,
    /// Integration overrides from flags, then from the config file; the
    /// problem file sits between the two.
    dt: (Option<f64>, Option<f64>),
    steps: (Option<usize>, Option<usize>),
}

fn settings(cli: &Cli) -> Result<Settings> {
    let config = match &cli.config {
        Some(path) => {
            let text = read(path)?;
            serde_json::from_str::<Config>(&text)
                .map_err(|e| InputError(format!("config {}: {e}", path.display())))?
        }
        None => Config::default(),
    };
    let mut zt = ZeroTest::default();
    zt.seed = cli.seed.or(config.seed).unwrap_or(zt.seed);
    zt.tol = cli.tol.or(config.tol).unwrap_or(zt.tol);
    zt.samples = config.samples.unwrap_or(zt.samples);
    if !(zt.tol > 0.0 && zt.tol.is_finite()) {
        return Err(InputError(format!("--tol must be positive, got {}", zt.tol)));
    }
    let jobs = cli.jobs.or(config.jobs).unwrap_or(1);
    if jobs == 0 {
        return Err(InputError("--jobs must be at least 1".into()));
    }
    Ok(Settings { zt, jobs, dt: (cli.dt, config.dt), steps: (cli.steps, config.steps) })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn load(input: &Input) -> Result<Problem> {
    let mut functions = BTreeMap::new();
    for spec in &input.functions {
        let (name, deps) = parse_function_flag(spec)?;
        functions.insert(name, deps);
    }
    match &input.file {
        Some(path) => {
            if !input.chart.is_empty() || !functions.is_empty() {
                return Err(InputError("--chart and --function apply to inline input only".into()));
            }
            Problem::from_json(&read(path)?).map_err(|InputError(m)| InputError(format!("{}: {m}", path.display())))
        }
        None => Problem::inline((!input.chart.is_empty()).then(|| input.chart.clone()), functions),
    }
}

fn parse_function_flag(spec: &str) -> Result<(String, Vec<String>)> {
    let bad = || InputError(format!("--function expects NAME(ARG,...), got `{spec}`"));
    let (name, rest) = spec.split_once('(').ok_or_else(bad)?;
    let args = rest.strip_suffix(')').ok_or_else(bad)?;
    let deps = args.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    Ok((name.trim().to_string(), deps))
}

fn core(e: Error) -> InputError {
    InputError(e.to_string())
}

pub fn run(cli: &Cli) -> Result<Report> {
    let s = settings(cli)?;
    match &cli.command {
        Command::D(input) => cmd_d(input),
        Command::Wedge { input, with } => cmd_wedge(input, with),
        Command::Closed(input) => cmd_closed(input, &s),
        Command::Commutator { input, connection } => cmd_commutator(input, connection.as_deref(), &s),
        Command::Analyze { input, relation } => cmd_analyze(input, relation.as_deref(), &s),
        Command::Factor { input, ansatz } => cmd_factor(input, *ansatz, &s),
        Command::Restrict { input, relation, pseudostructures } => {
            cmd_restrict(input, relation.as_deref(), pseudostructures, &s)
        }
        Command::Characteristics { input, csv, thin, closure_tol } => {
            cmd_characteristics(input, csv.as_deref(), *thin, *closure_tol, &s)
        }
        Command::Case { input, id } => cmd_case(input, *id, &s),
        Command::Validate(input) => cmd_validate(input),
    }
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Zero => "Zero",
        Verdict::NonZero => "NonZero",
        Verdict::Unknown => "Unknown",
    }
}

fn basis(chart: &Chart, idx: &[usize]) -> String {
    idx.iter().map(|&i| format!("d{}", chart.name(i))).collect::<Vec<_>>().join(" ^ ")
}

fn components(form: &Form) -> Value {
    let printer = form.chart().printer();
    Value::Array(
        form.terms()
            .map(|(idx, c)| {
                json!({
                    "indices": idx.iter().map(|i| i + 1).collect::<Vec<_>>(),
                    "basis": basis(form.chart(), idx),
                    "coefficient": printer.expr(c),
                })
            })
            .collect(),
    )
}

fn cmd_d(input: &Input) -> Result<Report> {
    let p = load(input)?;
    let w = p.default_form(input.form.as_deref())?;
    let dw = w.d();
    Ok(Report {
        json: json!({
            "command": "d",
            "chart": w.chart().coords(),
            "form": w.render(),
            "degree": dw.degree(),
            "result": dw.render(),
            "components": components(&dw),
        }),
        text: format!("d({}) = {}\n", w, dw),
        negative: false,
    })
}

fn cmd_wedge(input: &Input, with: &str) -> Result<Report> {
    let p = load(input)?;
    let a = p.default_form(input.form.as_deref())?;
    let b = p.form(with)?;
    let ab = a.wedge(&b).map_err(core)?;
    Ok(Report {
        json: json!({
            "command": "wedge",
            "chart": a.chart().coords(),
            "left": a.render(),
            "right": b.render(),
            "degree": ab.degree(),
            "result": ab.render(),
            "components": components(&ab),
        }),
        text: format!("({}) ^ ({}) = {}\n", a, b, ab),
        negative: false,
    })
}

fn cmd_closed(input: &Input, s: &Settings) -> Result<Report> {
    let p = load(input)?;
    let w = p.default_form(input.form.as_deref())?;
    let dw = w.d();
    let v = w.is_closed(&s.zt);
    let per: Vec<Value> = dw
        .component_verdicts(&s.zt)
        .into_iter()
        .filter(|(_, v)| *v != Verdict::Zero)
        .map(|(idx, v)| json!({"basis": basis(w.chart(), &idx), "verdict": verdict(v)}))
        .collect();
    Ok(Report {
        json: json!({
            "command": "closed",
            "chart": w.chart().coords(),
            "form": w.render(),
            "differential": dw.render(),
            "verdict": verdict(v),
            "closed": v == Verdict::Zero,
            "nonzero_components": per,
        }),
        text: format!("form: {w}\nd: {dw}\nverdict: {}\n", verdict(v)),
        negative: v != Verdict::Zero,
    })
}

fn commutator_json(report: &skewforms::CommutatorReport) -> Value {
    let chart = &report.chart;
    let printer = chart.printer();
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "indices": [e.alpha + 1, e.beta + 1],
                "coordinates": [chart.name(e.alpha), chart.name(e.beta)],
                "value": printer.expr(&e.total),
                "derivative_part": printer.expr(&e.derivative_part),
                "connection_part": printer.expr(&e.connection_part),
                "verdict": verdict(e.verdict),
                "derivative_verdict": verdict(e.derivative_verdict),
                "connection_verdict": verdict(e.connection_verdict),
            })
        })
        .collect();
    json!({"entries": entries, "verdict": verdict(report.verdict), "with_connection": report.with_connection})
}

fn commutator_text(report: &skewforms::CommutatorReport) -> String {
    let chart = &report.chart;
    let printer = chart.printer();
    let mut out = String::new();
    for e in &report.entries {
        let _ = write!(out, "K[{},{}] = {}", chart.name(e.alpha), chart.name(e.beta), printer.expr(&e.total));
        if report.with_connection {
            let _ = write!(
                out,
                "  (derivative {}, connection {})",
                printer.expr(&e.derivative_part),
                printer.expr(&e.connection_part)
            );
        }
        let _ = writeln!(out, "  [{}]", verdict(e.verdict));
    }
    let _ = writeln!(out, "verdict: {}", verdict(report.verdict));
    out
}

fn cmd_commutator(input: &Input, connection: Option<&str>, s: &Settings) -> Result<Report> {
    let p = load(input)?;
    let w = p.default_form(input.form.as_deref())?;
    let conn = connection.map(|c| p.connection(c)).transpose()?;
    let report = w.commutator(conn.as_ref(), &s.zt).map_err(core)?;
    let mut json = commutator_json(&report);
    let mut text = format!("form: {w}\n");
    text.push_str(&commutator_text(&report));
    json["command"] = json!("commutator");
    json["chart"] = json!(w.chart().coords());
    json["form"] = json!(w.render());
    if let (Some(c), Some(name)) = (&conn, connection) {
        let cls = c.classify(&s.zt);
        json["connection"] = json!({
            "name": name,
            "classification": cls.classification,
            "torsion": verdict(cls.torsion),
            "curvature": verdict(cls.curvature),
        });
        let _ = writeln!(
            text,
            "connection {name}: {} (torsion {}, curvature {})",
            serde_json::to_value(cls.classification).expect("serializes").as_str().unwrap_or(""),
            verdict(cls.torsion),
            verdict(cls.curvature)
        );
    }
    Ok(Report { json, text, negative: false })
}

fn rel_class(c: RelClass) -> &'static str {
    match c {
        RelClass::Identical => "identical",
        RelClass::Nonidentical => "nonidentical",
        RelClass::Indeterminate => "indeterminate",
    }
}

fn cmd_analyze(input: &Input, relation: Option<&str>, s: &Settings) -> Result<Report> {
    let p = load(input)?;
    let (name, rel) = p.relation(relation, input.form.as_deref())?;
    let v = analyze(&rel, &s.zt).map_err(core)?;
    let chart = rel.omega.chart().clone();
    let sources: Vec<Value> = v
        .sources
        .iter()
        .map(|src| {
            json!({
                "name": src.name,
                "verdict": verdict(src.verdict),
                "components": src.components.iter().map(|idx| basis(&chart, idx)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let mut json = json!({
        "command": "analyze",
        "relation": name,
        "chart": chart.coords(),
        "omega": rel.omega.render(),
        "psi": rel.psi.as_ref().map(Form::render),
        "classification": rel_class(v.classification),
        "differential": v.differential.render(),
        "sources": sources,
        "potential_check": v.potential.map(verdict),
    });
    let mut text = format!("relation {name}: omega = {}\n", rel.omega);
    if let Some(rep) = &v.commutator {
        json["commutator"] = commutator_json(rep);
        text.push_str(&commutator_text(rep));
    } else {
        let _ = writeln!(text, "d omega = {}", v.differential);
    }
    if let Some(c) = &rel.connection {
        let cls = c.classify(&s.zt);
        json["connection"] = json!({
            "classification": cls.classification,
            "torsion": verdict(cls.torsion),
            "curvature": verdict(cls.curvature),
        });
    }
    for src in &v.sources {
        let comps: Vec<String> = src.components.iter().map(|idx| basis(&chart, idx)).collect();
        let _ = writeln!(text, "source: {} [{}] on {}", src.name, verdict(src.verdict), comps.join(", "));
    }
    if let Some(pv) = v.potential {
        let _ = writeln!(text, "omega - d psi: {}", verdict(pv));
    }
    let _ = writeln!(text, "classification: {}", rel_class(v.classification));
    Ok(Report { json, text, negative: v.classification != RelClass::Identical })
}

fn cmd_factor(input: &Input, ansatz: AnsatzArg, s: &Settings) -> Result<Report> {
    let p = load(input)?;
    let w = p.default_form(input.form.as_deref())?;
    let ansatz = match ansatz {
        AnsatzArg::Auto => Ansatz::Auto,
        AnsatzArg::First => Ansatz::First,
        AnsatzArg::Second => Ansatz::Second,
    };
    let chart = w.chart().clone();
    let printer = chart.printer();
    let result = find_integrating_factor(&w, ansatz, &s.zt).map_err(core)?;
    let mut json = json!({
        "command": "factor",
        "chart": chart.coords(),
        "form": w.render(),
        "ansatz": ansatz,
    });
    let mut text = format!("form: {w}\n");
    let negative = match result {
        IntegratingFactor::Found { mu, variable } => {
            let closed = w.scale(&mu);
            let psi = potential(&closed);
            json["result"] = json!("found");
            json["mu"] = json!(printer.expr(&mu));
            json["variable"] = json!(variable.map(|i| chart.name(i).to_string()));
            json["closed_form"] = json!(closed.render());
            json["potential"] = json!(psi.as_ref().map(Form::render));
            let _ = writeln!(text, "mu = {}", printer.expr(&mu));
            let _ = writeln!(text, "mu * omega = {closed}");
            if let Some(psi) = &psi {
                let _ = writeln!(text, "potential = {psi}");
            }
            false
        }
        IntegratingFactor::NotFound => {
            json["result"] = json!("not-found");
            text.push_str("no integrating factor found\n");
            true
        }
        IntegratingFactor::Indeterminate => {
            json["result"] = json!("indeterminate");
            text.push_str("indeterminate\n");
            true
        }
    };
    Ok(Report { json, text, negative })
}

fn cmd_restrict(input: &Input, relation: Option<&str>, names: &[String], s: &Settings) -> Result<Report> {
    let p = load(input)?;
    let (rel_name, rel) = p.relation(relation, input.form.as_deref())?;
    let chain = names.iter().map(|n| p.pseudostructure(n)).collect::<Result<Vec<_>>>()?;
    let report = sequential_integrate(&rel, &chain, &s.zt);
    let steps: Vec<Value> = report
        .steps
        .iter()
        .zip(names)
        .map(|(st, name)| {
            json!({
                "pseudostructure": name,
                "parameters": st.pseudostructure.params().coords(),
                "omega_pi": st.omega_pi.render(),
                "psi_pi": st.psi_pi.as_ref().map(Form::render),
            })
        })
        .collect();
    let mut text = format!("relation {rel_name}: omega = {}\n", rel.omega);
    for (st, name) in report.steps.iter().zip(names) {
        let _ = writeln!(text, "on {name}: omega_pi = {}", st.omega_pi);
        match &st.psi_pi {
            Some(psi) => {
                let _ = writeln!(text, "  psi_pi = {psi}");
            }
            None => text.push_str("  no symbolic potential\n"),
        }
    }
    let mut json = json!({
        "command": "restrict",
        "relation": rel_name,
        "omega": rel.omega.render(),
        "steps": steps,
        "closed": report.failure.is_none(),
        "failure": null,
    });
    let negative = match report.failure {
        None => false,
        Some((i, Error::NotClosedOnPseudostructure { residual })) => {
            json["failure"] = json!({"step": i + 1, "pseudostructure": names[i], "kind": "not-closed", "residual": residual});
            let _ = writeln!(text, "not closed on {}: {}", names[i], residual.join(", "));
            true
        }
        Some((i, Error::NoPotential(msg))) => {
            json["failure"] = json!({"step": i + 1, "pseudostructure": names[i], "kind": "no-potential", "detail": msg});
            let _ = writeln!(text, "stopped before {}: {msg}", names[i]);
            true
        }
        Some((i, e)) => return Err(InputError(format!("pseudostructure `{}`: {e}", names[i]))),
    };
    Ok(Report { json, text, negative })
}

struct FanRun {
    system: OdeSystem,
    params: Vec<f64>,
    trajectories: Vec<Trajectory>,
    options: IntegrateOptions,
}

fn run_fan(p: &Problem, s: &Settings) -> Result<FanRun> {
    let system = match (p.hj()?, p.pde()?) {
        (Some(hj), None) => canonical_system(&hj).map_err(core)?,
        (None, Some(pde)) => characteristic_system(&pde).map_err(core)?,
        (Some(_), Some(_)) => return Err(InputError("give either `hj` or `pde`, not both".into())),
        (None, None) => return Err(InputError("characteristics needs an `hj` or `pde` section".into())),
    };
    let fan = p.fan()?.ok_or_else(|| InputError("characteristics needs a `fan` section".into()))?;
    if fan.initial.len() != system.state.len() {
        return Err(InputError(format!(
            "fan: {} initial expressions for state ({})",
            fan.initial.len(),
            system.state.join(", ")
        )));
    }
    let options = integrate_options(p, s)?;
    let init = fan_initial_states(&fan.initial, &fan.parameter, fan.lo, fan.hi, fan.count, &options.constants)
        .map_err(|e| InputError(format!("fan: {e}")))?;
    let params = init.iter().map(|(a, _)| *a).collect();
    let states: Vec<Vec<f64>> = init.into_iter().map(|(_, y)| y).collect();
    let trajectories = integrate(&system, &states, &options).map_err(core)?;
    Ok(FanRun { system, params, trajectories, options })
}

fn integrate_options(p: &Problem, s: &Settings) -> Result<IntegrateOptions> {
    let file = p.file.integration.as_ref();
    let defaults = IntegrateOptions::default();
    let opts = IntegrateOptions {
        t0: file.and_then(|f| f.t0).unwrap_or(defaults.t0),
        dt: s.dt.0.or(file.and_then(|f| f.dt)).or(s.dt.1).unwrap_or(defaults.dt),
        steps: s.steps.0.or(file.and_then(|f| f.steps)).or(s.steps.1).unwrap_or(defaults.steps),
        jobs: s.jobs,
        constants: p.file.constants.clone(),
    };
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(InputError(format!("dt must be positive, got {}", opts.dt)));
    }
    Ok(opts)
}

fn cmd_characteristics(
    input: &Input,
    csv: Option<&Path>,
    thin: usize,
    closure_tol: Option<f64>,
    s: &Settings,
) -> Result<Report> {
    if thin == 0 {
        return Err(InputError("--thin must be at least 1".into()));
    }
    let p = load(input)?;
    let run = run_fan(&p, s)?;
    let tol = closure_tol.or(p.file.integration.as_ref().and_then(|i| i.tolerance)).unwrap_or(1e-6);
    let sys = &run.system;
    let chart = sys.chart();
    let printer = chart.printer();
    let theta = sys.default_theta();
    let mut rows = Vec::new();
    let mut worst_closure = 0.0_f64;
    let mut worst_drift = 0.0_f64;
    let mut failed = 0;
    for (k, traj) in run.trajectories.iter().enumerate() {
        let closure = closure_along(sys, &theta, traj, &run.options.constants, tol).map_err(core)?;
        worst_closure = worst_closure.max(closure.max_residual);
        let d0 = traj.diagnostics.first().copied().unwrap_or(0.0);
        let drift = traj.diagnostics.iter().map(|d| (d - d0).abs()).fold(0.0, f64::max);
        if sys.energy.is_some() {
            worst_drift = worst_drift.max(drift);
        }
        failed += usize::from(traj.error.is_some());
        rows.push(json!({
            "index": k,
            "parameter": run.params[k],
            "initial": traj.states.first(),
            "final": traj.last(),
            "final_time": traj.times.last(),
            "samples": traj.len(),
            "error": traj.error,
            "closure_residual": closure.max_residual,
            "diagnostic_drift": drift,
        }));
    }
    let events = detect_degeneracy(&run.trajectories, &run.params, 0).map_err(core)?;
    if let Some(path) = csv {
        write_csv(path, sys, &run, thin)?;
    }
    let closed = worst_closure <= tol;
    let conserved = sys.energy.is_none() || worst_drift <= tol;
    let kind = match sys.kind {
        SystemKind::Strip => "strip",
        SystemKind::Canonical => "canonical",
    };
    let json = json!({
        "command": "characteristics",
        "system": {
            "kind": kind,
            "time": sys.time,
            "state": sys.state,
            "rhs": sys.rhs.iter().map(|r| printer.expr(r)).collect::<Vec<_>>(),
            "diagnostic": printer.expr(&sys.diagnostic),
            "theta": theta.render(),
        },
        "options": {"t0": run.options.t0, "dt": run.options.dt, "steps": run.options.steps, "tolerance": tol},
        "trajectories": rows,
        "max_closure_residual": worst_closure,
        "max_energy_drift": sys.energy.as_ref().map(|_| worst_drift),
        "closed": closed,
        "failed_trajectories": failed,
        "degeneracy_events": events,
        "first_degeneracy_time": events.iter().map(|e| e.time).reduce(f64::min),
    });
    let mut text = String::new();
    let _ = writeln!(text, "{kind} system in ({}; {})", sys.time, sys.state.join(", "));
    for (name, r) in sys.state.iter().zip(&sys.rhs) {
        let _ = writeln!(text, "  d{name}/d{} = {}", sys.time, printer.expr(r));
    }
    let _ = writeln!(
        text,
        "{} trajectories, dt {}, {} steps",
        run.trajectories.len(),
        num(run.options.dt),
        run.options.steps
    );
    let _ = writeln!(text, "max closure residual {} (tolerance {})", num(worst_closure), num(tol));
    if sys.energy.is_some() {
        let _ = writeln!(text, "max energy drift {}", num(worst_drift));
    }
    if failed > 0 {
        let _ = writeln!(text, "{failed} trajectories stopped early");
    }
    let _ = writeln!(text, "{} degeneracy events", events.len());
    for e in &events {
        let _ = writeln!(text, "  t = {} between trajectories {} and {}", num(e.time), e.pair.0, e.pair.1);
    }
    Ok(Report { json, text, negative: !closed || !conserved || failed > 0 })
}

fn write_csv(path: &Path, sys: &OdeSystem, run: &FanRun, thin: usize) -> Result<()> {
    let mut out = String::new();
    let _ = write!(out, "trajectory,parameter,{}", sys.time);
    for name in &sys.state {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",diagnostic\n");
    for (k, traj) in run.trajectories.iter().enumerate() {
        for j in 0..traj.len() {
            if j % thin != 0 && j + 1 != traj.len() {
                continue;
            }
            let _ = write!(out, "{k},{},{}", num(run.params[k]), num(traj.times[j]));
            for v in &traj.states[j] {
                let _ = write!(out, ",{}", num(*v));
            }
            let _ = writeln!(out, ",{}", num(traj.diagnostics[j]));
        }
    }
    std::fs::write(path, out).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn cmd_case(input: &Input, id: Option<CaseId>, s: &Settings) -> Result<Report> {
    let report = match (&input.file, id) {
        (Some(_), Some(_)) => return Err(InputError("give a problem file or --id, not both".into())),
        (None, Some(CaseId::Thermodynamics)) => cases::thermodynamics("c_v", "R", &s.zt).map_err(core)?,
        (None, Some(other)) => return Err(InputError(format!("case {other:?} needs a problem file"))),
        (None, None) => return Err(InputError("case needs a problem file or --id".into())),
        (Some(_), None) => {
            let p = load(input)?;
            p.validate()?;
            let spec = p.file.case.as_ref().ok_or_else(|| InputError("the problem has no `case` section".into()))?;
            run_case(&p, spec, s)?
        }
    };
    Ok(case_report(report))
}

fn run_case(p: &Problem, spec: &CaseSpec, s: &Settings) -> Result<CaseReport> {
    match spec {
        CaseSpec::Thermodynamics { c_v, r } => cases::thermodynamics(c_v, r, &s.zt).map_err(core),
        CaseSpec::GasDynamics { u, h0, f, t, unsteady, normals } => {
            let input = p.gas_input(u, h0, f, t, *unsteady, normals)?;
            cases::gas_dynamics(&input, &s.zt).map_err(core)
        }
        CaseSpec::Electromagnetic { profile } => {
            let f: Expr = p.expr("profile", profile)?;
            cases::electromagnetic(&f, &s.zt).map_err(core)
        }
        CaseSpec::HamiltonJacobi { e } => {
            let e = p.expr("E", e)?;
            let fan = p.fan()?.ok_or_else(|| InputError("case hamilton_jacobi needs a `fan`".into()))?;
            let opts = integrate_options(p, s)?;
            let tol = p.file.integration.as_ref().and_then(|i| i.tolerance).unwrap_or(1e-6);
            cases::hamilton_jacobi(&e, &fan, &opts, tol, &s.zt).map_err(core)
        }
    }
}

fn case_report(report: CaseReport) -> Report {
    let text = report.render_text();
    let negative = !report.passed();
    let mut json = serde_json::to_value(&report).expect("case reports serialize");
    json["passed"] = json!(!negative);
    Report { json, text, negative }
}

fn cmd_validate(input: &Input) -> Result<Report> {
    let p = load(input)?;
    let counts = p.validate()?;
    let mut text = String::from("ok\n");
    for (k, n) in &counts {
        let _ = writeln!(text, "  {k}: {n}");
    }
    Ok(Report { json: json!({"command": "validate", "valid": true, "counts": counts}), text, negative: false })
}
