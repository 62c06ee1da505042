//! Worked reproductions: thermodynamics, gas dynamics, a plane
//! electromagnetic wave and a Hamilton-Jacobi fan.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::characteristics::{
    canonical_system, closure_along, detect_degeneracy, fan_initial_states, integrate, HamiltonJacobi, IntegrateOptions,
};
use crate::error::{Error, Result};
use crate::expr::{Expr, Verdict, ZeroTest};
use crate::forms::{Chart, Form, Pseudostructure};
use crate::relations::{
    analyze, find_integrating_factor, potential, Ansatz, Classification, EvolutionaryRelation, IntegratingFactor,
};

/// A value recorded in a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Finding {
    Text(String),
    Number(f64),
    Flag(bool),
    List(Vec<Finding>),
    Map(BTreeMap<String, Finding>),
}

impl From<&str> for Finding {
    fn from(s: &str) -> Self {
        Finding::Text(s.to_string())
    }
}

impl From<String> for Finding {
    fn from(s: String) -> Self {
        Finding::Text(s)
    }
}

impl From<f64> for Finding {
    fn from(v: f64) -> Self {
        Finding::Number(v)
    }
}

impl From<bool> for Finding {
    fn from(v: bool) -> Self {
        Finding::Flag(v)
    }
}

/// One checked statement, with the operation that decided it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Claim {
    pub name: String,
    pub operation: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub inputs: BTreeMap<String, Finding>,
    pub findings: BTreeMap<String, Finding>,
    pub claims: Vec<Claim>,
}

impl CaseReport {
    fn new(case: &str) -> Self {
        CaseReport { case: case.to_string(), inputs: BTreeMap::new(), findings: BTreeMap::new(), claims: Vec::new() }
    }

    fn input(&mut self, key: &str, value: impl Into<Finding>) {
        self.inputs.insert(key.to_string(), value.into());
    }

    fn finding(&mut self, key: &str, value: impl Into<Finding>) {
        self.findings.insert(key.to_string(), value.into());
    }

    fn claim(&mut self, name: &str, operation: &str, passed: bool, detail: impl Into<String>) {
        self.claims.push(Claim {
            name: name.to_string(),
            operation: operation.to_string(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn claim_named(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }

    /// Plain-text rendering, one line per input, finding and claim.
    pub fn render_text(&self) -> String {
        fn show(f: &Finding) -> String {
            match f {
                Finding::Text(s) => s.clone(),
                Finding::Number(v) => format!("{v}"),
                Finding::Flag(b) => b.to_string(),
                Finding::List(items) => format!("[{}]", items.iter().map(show).collect::<Vec<_>>().join(", ")),
                Finding::Map(m) => {
                    format!("{{{}}}", m.iter().map(|(k, v)| format!("{k}: {}", show(v))).collect::<Vec<_>>().join(", "))
                }
            }
        }
        let mut out = format!("case {}\n", self.case);
        for (k, v) in &self.inputs {
            out.push_str(&format!("  input    {k} = {}\n", show(v)));
        }
        for (k, v) in &self.findings {
            out.push_str(&format!("  finding  {k} = {}\n", show(v)));
        }
        for c in &self.claims {
            let mark = if c.passed { "pass" } else { "FAIL" };
            out.push_str(&format!("  [{mark}] {} ({}): {}\n", c.name, c.operation, c.detail));
        }
        out
    }
}

fn verdict_text(v: Verdict) -> String {
    v.to_string()
}

/// First law `c_v dT + (R T/V) dV`, its integrating factor and the entropy.
pub fn thermodynamics(c_v: &str, r: &str, zt: &ZeroTest) -> Result<CaseReport> {
    let mut report = CaseReport::new("thermodynamics");
    report.input("c_v", c_v);
    report.input("R", r);
    let chart = Chart::new(&["T", "V"])?;
    let printer = chart.printer();
    let (t, v) = (Expr::sym("T"), Expr::sym("V"));
    let cv = Expr::sym(c_v);
    let rr = Expr::sym(r);
    let omega = Form::one_form(&chart, vec![cv.clone(), &(&rr * &t) * &v.recip().expect("V is a symbol")])?;
    report.finding("omega", omega.to_string());

    let verdict = analyze(&EvolutionaryRelation::new(omega.clone()), zt)?;
    let k = verdict.commutator.as_ref().map(|c| c.component(0, 1)).unwrap_or_default();
    let expected_k = &rr * &v.recip().expect("V is a symbol");
    report.finding("commutator_TV", printer.expr(&k));
    report.claim(
        "nonidentical",
        "analyze",
        verdict.classification == Classification::Nonidentical,
        format!("classification {}", verdict.classification),
    );
    report.claim("commutator is R/V", "commutator", k == expected_k, format!("K_TV = {}", printer.expr(&k)));

    let mu = match find_integrating_factor(&omega, Ansatz::Auto, zt)? {
        IntegratingFactor::Found { mu, .. } => Some(mu),
        _ => None,
    };
    let inv_t = t.recip().expect("T is a symbol");
    report.finding("integrating_factor", mu.as_ref().map_or("none".to_string(), |m| printer.expr(m)));
    report.claim(
        "integrating factor is 1/T",
        "find_integrating_factor",
        mu.as_ref() == Some(&inv_t),
        mu.as_ref().map_or("no factor found".to_string(), |m| format!("mu = {}", printer.expr(m))),
    );

    let scaled = omega.scale(&inv_t);
    let closed = scaled.is_closed(zt);
    report.finding("omega_over_T", scaled.to_string());
    report.claim("omega/T is closed", "is_closed", closed == Verdict::Zero, verdict_text(closed));

    let entropy = &(&cv * &Expr::ln(t.clone())) + &(&rr * &Expr::ln(v.clone()));
    let recovered = potential(&scaled).map(|p| p.coefficient(&[]));
    report.finding("entropy", recovered.as_ref().map_or("none".to_string(), |s| printer.expr(s)));
    report.claim(
        "entropy recovered",
        "potential",
        recovered.as_ref() == Some(&entropy),
        format!("expected {}", printer.expr(&entropy)),
    );
    let witness = scaled.exactness_witness_check(&Form::scalar(&chart, entropy), zt)?;
    report.claim("dS = omega/T", "exactness_witness_check", witness == Verdict::Zero, verdict_text(witness));

    let closed_form = Form::one_form(&chart, vec![cv.clone(), rr.clone()])?;
    let trivial = find_integrating_factor(&closed_form, Ansatz::Auto, zt)?;
    report.claim(
        "closed form needs factor 1",
        "find_integrating_factor",
        matches!(&trivial, IntegratingFactor::Found { mu, .. } if mu.is_one()),
        format!("on {closed_form}"),
    );
    report.finding(
        "second_principle",
        "reversible: dS = dQ/T; irreversible: dS > dQ/T (stated, not evaluated)",
    );
    Ok(report)
}

/// Fields for the gas-dynamics case, all over `(t, x, y, z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GasDynamicsInput {
    pub velocity: [Expr; 3],
    /// Total enthalpy `h0 = U·U/2 + h`.
    pub h0: Expr,
    pub force: [Expr; 3],
    pub temperature: Expr,
    /// Include `∂U/∂t`.
    pub unsteady: bool,
    /// Optional directions spanning the plane normal to the trajectory; the
    /// right-hand side is projected onto their span (assumed orthogonal).
    pub normals: Vec<[Expr; 3]>,
}

pub const GAS_SOURCES: [&str; 4] = ["enthalpy gradient", "vorticity", "nonpotential force", "unsteadiness"];

fn cross(a: &[Expr; 3], b: &[Expr; 3]) -> [Expr; 3] {
    [
        &(&a[1] * &b[2]) - &(&a[2] * &b[1]),
        &(&a[2] * &b[0]) - &(&a[0] * &b[2]),
        &(&a[0] * &b[1]) - &(&a[1] * &b[0]),
    ]
}

fn dot(a: &[Expr; 3], b: &[Expr; 3]) -> Expr {
    (0..3).map(|i| &a[i] * &b[i]).sum()
}

pub fn gas_dynamics(input: &GasDynamicsInput, zt: &ZeroTest) -> Result<CaseReport> {
    let mut report = CaseReport::new("gas_dynamics");
    let chart = Chart::new(&["t", "x", "y", "z"])?;
    let printer = chart.printer();
    let show3 = |v: &[Expr; 3]| Finding::List(v.iter().map(|e| Finding::Text(printer.expr(e))).collect());
    report.input("U", show3(&input.velocity));
    report.input("h0", printer.expr(&input.h0));
    report.input("F", show3(&input.force));
    report.input("T", printer.expr(&input.temperature));
    report.input("unsteady", input.unsteady);
    if !input.normals.is_empty() {
        report.input("normals", Finding::List(input.normals.iter().map(show3).collect()));
    }
    let inv_t = input
        .temperature
        .recip()
        .ok_or_else(|| Error::DivisionByZero("temperature is zero".into()))?;
    let u = &input.velocity;
    let grad = |f: &Expr| [f.diff("x"), f.diff("y"), f.diff("z")];
    let rot = [
        &u[2].diff("y") - &u[1].diff("z"),
        &u[0].diff("z") - &u[2].diff("x"),
        &u[1].diff("x") - &u[0].diff("y"),
    ];
    let zero3 = || [Expr::zero(), Expr::zero(), Expr::zero()];
    let vectors: [[Expr; 3]; 4] = [
        grad(&input.h0),
        cross(u, &rot),
        input.force.clone().map(|f| -f),
        if input.unsteady { u.clone().map(|c| c.diff("t")) } else { zero3() },
    ];
    let project = |v: &[Expr; 3]| -> Result<[Expr; 3]> {
        if input.normals.is_empty() {
            return Ok(v.clone());
        }
        let mut out = zero3();
        for n in &input.normals {
            let nn = dot(n, n).recip().ok_or_else(|| Error::Invalid("zero normal direction".into()))?;
            let coef = &dot(v, n) * &nn;
            for i in 0..3 {
                out[i] = &out[i] + &(&coef * &n[i]);
            }
        }
        Ok(out)
    };
    let mut total = Form::zero(&chart, 1);
    let mut attributed = Vec::new();
    let mut per_source = BTreeMap::new();
    for (name, v) in GAS_SOURCES.iter().zip(&vectors) {
        let v = project(v)?;
        let mut coeffs = vec![Expr::zero()];
        coeffs.extend(v.iter().map(|c| c * &inv_t));
        let piece = Form::one_form(&chart, coeffs)?;
        let k = piece.commutator(None, zt)?;
        if k.verdict != Verdict::Zero {
            attributed.push(Finding::Text(name.to_string()));
        }
        let mut entry = BTreeMap::new();
        entry.insert("verdict".to_string(), Finding::Text(k.verdict.to_string()));
        entry.insert(
            "commutator".to_string(),
            Finding::Map(
                k.entries
                    .iter()
                    .filter(|e| !e.total.is_zero())
                    .map(|e| {
                        (format!("{}{}", chart.name(e.alpha), chart.name(e.beta)), Finding::Text(printer.expr(&e.total)))
                    })
                    .collect(),
            ),
        );
        per_source.insert(name.to_string(), Finding::Map(entry));
        total = total.add(&piece)?;
    }
    report.finding("omega", total.to_string());
    report.finding("sources", Finding::Map(per_source));
    report.finding("attributed", Finding::List(attributed));
    let verdict = analyze(&EvolutionaryRelation::new(total), zt)?;
    report.finding("classification", verdict.classification.to_string());
    let along = verdict.commutator.as_ref().map(|k| {
        Verdict::all(k.entries.iter().filter(|e| e.alpha == 0).map(|e| e.verdict))
    });
    report.finding("time_components", along.map_or("none".to_string(), |v| v.to_string()));
    report.claim(
        "A_t = 0",
        "one_form",
        true,
        "the along-trajectory coefficient is zero by construction",
    );
    report.claim(
        "classification decided",
        "analyze",
        verdict.classification != Classification::Indeterminate,
        verdict.classification.to_string(),
    );
    Ok(report)
}

/// Plane wave `E = (0, f, 0)`, `H = (0, 0, f)` with `f = profile(x − c t)`.
/// `profile` is an expression in the symbol `xi`.
pub fn electromagnetic(profile: &Expr, zt: &ZeroTest) -> Result<CaseReport> {
    let mut report = CaseReport::new("electromagnetic");
    report.input("profile", profile.to_string());
    let chart = Chart::new(&["t", "x"])?;
    let printer = chart.printer();
    let (t, x, c) = (Expr::sym("t"), Expr::sym("x"), Expr::sym("c"));
    let phase = &x - &(&c * &t);
    let f = profile
        .subs(&[("xi".to_string(), phase)].into())
        .ok_or_else(|| Error::DivisionByZero("profile".into()))?;
    let e = [Expr::zero(), f.clone(), Expr::zero()];
    let h = [Expr::zero(), Expr::zero(), f.clone()];
    let s_vec = cross(&e, &h);
    if !s_vec[1].is_zero() || !s_vec[2].is_zero() {
        return Err(Error::Unsupported("Poynting vector off the x axis".into()));
    }
    let s = s_vec[0].clone();
    let c_inv = c.recip().expect("c is a symbol");
    let i = &(&dot(&e, &e) + &dot(&h, &h)) * &c_inv;
    report.finding("S", printer.expr(&s));
    report.finding("I", printer.expr(&i));

    let s_t = s.diff("t");
    let s_x = s.diff("x");
    let degenerate = zt.check(&s_x) == Verdict::Zero;
    report.claim("profile is not constant", "diff", !degenerate, if degenerate { "dS/dl vanishes: degenerate input" } else { "dS/dl nonzero" });
    if degenerate {
        report.finding("direction", "indeterminate");
    } else {
        let direction = -(&s_t * &s_x.recip().expect("nonzero"));
        let v = zt.check(&(&direction - &c));
        report.finding("direction", if v == Verdict::Zero { "c".to_string() } else { printer.expr(&direction) });
        report.claim("integrating direction dl/dt = c", "diff", v == Verdict::Zero, verdict_text(v));
    }

    let line = Pseudostructure::new(
        Chart::new(&["tau"])?,
        [("t".to_string(), Expr::sym("tau")), ("x".to_string(), &Expr::sym("xi0") + &(&c * &Expr::sym("tau")))].into(),
        vec![],
    )?;
    for (name, q) in [("S", &s), ("I", &i)] {
        let pulled = Form::scalar(&chart, q.clone()).d().pullback(&line)?;
        let v = pulled.zero_verdict(zt);
        report.claim(&format!("d{name} vanishes on x - c t = const"), "pullback", v == Verdict::Zero, verdict_text(v));
    }
    // (∂S/∂l dl + ∂S/∂t dt) + (∂I/∂l dl + ∂I/∂t dt) with the action terms zero
    let residual = Form::scalar(&chart, &s + &i).d();
    let on_line = residual.pullback(&line)?;
    let v = on_line.zero_verdict(zt);
    report.finding("balance_residual", residual.to_string());
    report.claim("balance residual vanishes on the direction", "pullback", v == Verdict::Zero, verdict_text(v));
    let off = residual.zero_verdict(zt);
    report.finding("balance_residual_off_direction", off.to_string());
    Ok(report)
}

/// Fan of initial data `state(a)` for `a` in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FanSpec {
    pub parameter: String,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `x(a)`, `p(a)`, `u(a)`, in state order.
    pub initial: Vec<Expr>,
}

pub fn hamilton_jacobi(
    e: &Expr,
    fan: &FanSpec,
    opts: &IntegrateOptions,
    closure_tol: f64,
    zt: &ZeroTest,
) -> Result<CaseReport> {
    let mut report = CaseReport::new("hamilton_jacobi");
    let hj = HamiltonJacobi::new("t", vec!["x".into()], vec!["p".into()], e.clone())?;
    let sys = canonical_system(&hj)?;
    let chart = sys.chart();
    let printer = chart.printer();
    report.input("E", printer.expr(e));
    report.input("dt", opts.dt);
    report.input("steps", opts.steps as f64);
    report.input(
        "fan",
        Finding::Map(
            [
                ("parameter".to_string(), Finding::Text(fan.parameter.clone())),
                ("lo".to_string(), fan.lo.into()),
                ("hi".to_string(), fan.hi.into()),
                ("count".to_string(), (fan.count as f64).into()),
                (
                    "initial".to_string(),
                    Finding::List(fan.initial.iter().map(|x| Finding::Text(printer.expr(x))).collect()),
                ),
            ]
            .into(),
        ),
    );
    report.finding(
        "rhs",
        Finding::List(sys.rhs.iter().map(|r| Finding::Text(printer.expr(r))).collect()),
    );

    // −E dt + p dx along an arbitrary trajectory t = τ, x = X(τ), p = P(τ), u = W(τ)
    let tau = Expr::sym("tau");
    let path = Pseudostructure::new(
        Chart::new(&["tau"])?,
        [
            ("t".to_string(), tau.clone()),
            ("x".to_string(), Expr::opaque("X", vec![tau.clone()])),
            ("p".to_string(), Expr::opaque("P", vec![tau.clone()])),
            ("u".to_string(), Expr::opaque("W", vec![tau.clone()])),
        ]
        .into(),
        vec![],
    )?;
    let theta = sys.default_theta();
    let pulled = theta.pullback(&path)?;
    let v = pulled.d().zero_verdict(zt);
    report.claim("Poincare form closed on trajectories", "pullback", v == Verdict::Zero, verdict_text(v));
    let dtheta = theta.d();
    report.finding("d_theta", dtheta.to_string());

    if fan.initial.len() != sys.state.len() {
        return Err(Error::DimensionMismatch { expected: sys.state.len(), found: fan.initial.len() });
    }
    let init = fan_initial_states(&fan.initial, &fan.parameter, fan.lo, fan.hi, fan.count, &opts.constants)?;
    let params: Vec<f64> = init.iter().map(|(a, _)| *a).collect();
    let states: Vec<Vec<f64>> = init.into_iter().map(|(_, y)| y).collect();
    let trajectories = integrate(&sys, &states, opts)?;
    let failed: Vec<usize> = trajectories.iter().enumerate().filter(|(_, t)| t.error.is_some()).map(|(i, _)| i).collect();
    report.claim(
        "all trajectories completed",
        "integrate",
        failed.is_empty(),
        format!("{} of {} stopped early", failed.len(), trajectories.len()),
    );

    let mut worst = 0.0_f64;
    for traj in &trajectories {
        let r = closure_along(&sys, &theta, traj, &opts.constants, closure_tol)?;
        worst = worst.max(r.max_residual);
    }
    report.finding("max_closure_residual", worst);
    report.claim(
        "closure residual within tolerance",
        "closure_along",
        worst <= closure_tol,
        format!("max {worst:e} vs {closure_tol:e}"),
    );

    if e.is_free_of(&["t"]) {
        let drift = trajectories
            .iter()
            .flat_map(|tr| {
                let e0 = tr.diagnostics.first().copied().unwrap_or(0.0);
                tr.diagnostics.iter().map(move |d| (d - e0).abs())
            })
            .fold(0.0_f64, f64::max);
        report.finding("max_energy_drift", drift);
        report.claim("energy conserved", "integrate", drift <= closure_tol, format!("max drift {drift:e}"));
    }

    let events = detect_degeneracy(&trajectories, &params, 0)?;
    let times: Vec<f64> = events.iter().map(|ev| ev.time).collect();
    report.finding("caustic_events", events.len() as f64);
    report.finding("caustic_times", Finding::List(times.iter().map(|&t| Finding::Number(t)).collect()));
    if let (Some(first), Some(last)) = (
        times.iter().copied().reduce(f64::min),
        times.iter().copied().reduce(f64::max),
    ) {
        report.finding("caustic_time_range", Finding::List(vec![first.into(), last.into()]));
    }
    Ok(report)
}
