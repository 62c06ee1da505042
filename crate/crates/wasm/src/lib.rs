//! Browser bindings. Every export takes plain strings and numbers and
//! returns a JSON document; failures come back as `{"error": ...}`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use skewforms::characteristics::{canonical_system, detect_degeneracy, fan_initial_states, integrate};
use skewforms::characteristics::{HamiltonJacobi, IntegrateOptions};
use skewforms::relations::{analyze, find_integrating_factor, potential, Ansatz, Classification, IntegratingFactor};
use skewforms::relations::EvolutionaryRelation;
use skewforms::{parse, Chart, Connection, Expr, Form, ParseContext, Verdict, ZeroTest};

fn finish(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn coords(chart: &str) -> Vec<String> {
    chart.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Zero => "Zero",
        Verdict::NonZero => "NonZero",
        Verdict::Unknown => "Unknown",
    }
}

/// `d`, commutator and classification of a form; for a 1-form in two
/// coordinates also the integrating factor and potential.
pub fn analyze_form_json(chart: &str, form: &str) -> Result<Value, String> {
    let zt = ZeroTest::default();
    let chart = Chart::new(&coords(chart)).map_err(|e| e.to_string())?;
    let printer = chart.printer();
    let w = Form::parse(&chart, form, &ParseContext::new()).map_err(|e| e.to_string())?;
    let v = analyze(&EvolutionaryRelation::new(w.clone()), &zt).map_err(|e| e.to_string())?;
    let class = match v.classification {
        Classification::Identical => "identical",
        Classification::Nonidentical => "nonidentical",
        Classification::Indeterminate => "indeterminate",
    };
    let commutator: Vec<Value> = v
        .commutator
        .iter()
        .flat_map(|r| &r.entries)
        .map(|e| {
            json!({
                "pair": [chart.name(e.alpha), chart.name(e.beta)],
                "value": printer.expr(&e.total),
                "verdict": verdict(e.verdict),
            })
        })
        .collect();
    let mut out = json!({
        "form": w.render(),
        "differential": v.differential.render(),
        "classification": class,
        "commutator": commutator,
        "potential": if class == "identical" { potential(&w).map(|p| p.render()) } else { None },
    });
    if w.degree() == 1 && chart.dim() == 2 && class != "identical" {
        out["integrating_factor"] = match find_integrating_factor(&w, Ansatz::Auto, &zt) {
            Ok(IntegratingFactor::Found { mu, .. }) => {
                let closed = w.scale(&mu);
                json!({
                    "mu": printer.expr(&mu),
                    "closed_form": closed.render(),
                    "potential": potential(&closed).map(|p| p.render()),
                })
            }
            _ => Value::Null,
        };
    }
    Ok(out)
}

/// Fan of characteristics of `E(t, x, p)` from `x = x0(a), p = p0(a),
/// u = u0(a)` for `count` values of `a` in `[lo, hi]`.
#[allow(clippy::too_many_arguments)]
pub fn characteristic_fan_json(
    hamiltonian: &str,
    x0: &str,
    p0: &str,
    u0: &str,
    lo: f64,
    hi: f64,
    count: usize,
    dt: f64,
    steps: usize,
) -> Result<Value, String> {
    if !(2..=200).contains(&count) {
        return Err("count must be between 2 and 200".into());
    }
    if !(1..=20_000).contains(&steps) {
        return Err("steps must be between 1 and 20000".into());
    }
    let e = parse(hamiltonian).map_err(|e| format!("E: {e}"))?;
    let hj = HamiltonJacobi::new("t", vec!["x".into()], vec!["p".into()], e).map_err(|e| e.to_string())?;
    let sys = canonical_system(&hj).map_err(|e| e.to_string())?;
    let initial = [x0, p0, u0]
        .iter()
        .map(|s| parse(s).map_err(|e| format!("initial `{s}`: {e}")))
        .collect::<Result<Vec<Expr>, _>>()?;
    let fan = fan_initial_states(&initial, "a", lo, hi, count, &Default::default()).map_err(|e| e.to_string())?;
    let params: Vec<f64> = fan.iter().map(|(a, _)| *a).collect();
    let states: Vec<Vec<f64>> = fan.into_iter().map(|(_, y)| y).collect();
    let opts = IntegrateOptions { dt, steps, ..Default::default() };
    let trajectories = integrate(&sys, &states, &opts).map_err(|e| e.to_string())?;
    let events = detect_degeneracy(&trajectories, &params, 0).map_err(|e| e.to_string())?;
    let stride = (steps / 200).max(1);
    let paths: Vec<Value> = trajectories
        .iter()
        .zip(&params)
        .map(|(tr, a)| {
            let keep: Vec<usize> = (0..tr.len()).filter(|j| j % stride == 0 || j + 1 == tr.len()).collect();
            json!({
                "a": a,
                "t": keep.iter().map(|&j| tr.times[j]).collect::<Vec<_>>(),
                "x": keep.iter().map(|&j| tr.states[j][0]).collect::<Vec<_>>(),
                "error": tr.error,
            })
        })
        .collect();
    let events: Vec<Value> = events
        .iter()
        .map(|ev| {
            let (k, _) = ev.pair;
            let tr = &trajectories[k];
            let j = tr.times.iter().position(|&t| t >= ev.time).unwrap_or(tr.len() - 1);
            json!({ "t": ev.time, "x": tr.states[j][0], "pair": [ev.pair.0, ev.pair.1] })
        })
        .collect();
    let printer = sys.chart().printer();
    Ok(json!({
        "rhs": sys.rhs.iter().map(|r| printer.expr(r)).collect::<Vec<_>>(),
        "trajectories": paths,
        "events": events,
    }))
}

/// Levi-Civita connection of a metric given row by row, `;` between rows
/// and `,` between entries; reports torsion, curvature and classification.
pub fn classify_metric_json(chart: &str, metric: &str) -> Result<Value, String> {
    let zt = ZeroTest::default();
    let chart = Chart::new(&coords(chart)).map_err(|e| e.to_string())?;
    let printer = chart.printer();
    let g = metric
        .split(';')
        .map(|row| row.split(',').map(|s| parse(s.trim()).map_err(|e| format!("`{}`: {e}", s.trim()))).collect())
        .collect::<Result<Vec<Vec<Expr>>, String>>()?;
    let conn = Connection::from_metric(&chart, g).map_err(|e| e.to_string())?;
    let report = conn.classify(&zt);
    let christoffel: Vec<Value> = conn
        .entries()
        .into_iter()
        .map(|(rho, mu, nu, v)| {
            json!({
                "symbol": format!("Γ^{}_{}{}", chart.name(rho), chart.name(mu), chart.name(nu)),
                "value": printer.expr(&v),
            })
        })
        .collect();
    let r = conn.curvature();
    let mut curvature = Vec::new();
    for (mu, r_mu) in r.iter().enumerate() {
        for (nu, r_nu) in r_mu.iter().enumerate() {
            for (rho, r_rho) in r_nu.iter().enumerate() {
                for (sigma, v) in r_rho.iter().enumerate().skip(rho + 1) {
                    if !v.is_zero() {
                        curvature.push(json!({
                            "symbol": format!(
                                "R^{}_{}{}{}",
                                chart.name(mu),
                                chart.name(nu),
                                chart.name(rho),
                                chart.name(sigma)
                            ),
                            "value": printer.expr(v),
                        }));
                    }
                }
            }
        }
    }
    Ok(json!({
        "classification": report.classification,
        "torsion": verdict(report.torsion),
        "curvature": verdict(report.curvature),
        "christoffel": christoffel,
        "riemann": curvature,
    }))
}

#[wasm_bindgen]
pub fn analyze_form(chart: &str, form: &str) -> String {
    finish(analyze_form_json(chart, form))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn characteristic_fan(
    hamiltonian: &str,
    x0: &str,
    p0: &str,
    u0: &str,
    lo: f64,
    hi: f64,
    count: usize,
    dt: f64,
    steps: usize,
) -> String {
    finish(characteristic_fan_json(hamiltonian, x0, p0, u0, lo, hi, count, dt, steps))
}

#[wasm_bindgen]
pub fn classify_metric(chart: &str, metric: &str) -> String {
    finish(classify_metric_json(chart, metric))
}
