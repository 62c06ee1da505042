//! Characteristic strips of first-order PDEs and canonical systems, with a
//! fixed-step RK4 integrator and envelope detection on trajectory fans.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{CompiledExpr, Expr};
use crate::forms::{Chart, Form};

/// `F(x, u, p) = 0` with `p_i = ∂u/∂x^i`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderPde {
    pub xs: Vec<String>,
    pub u: String,
    pub ps: Vec<String>,
    pub f: Expr,
}

impl FirstOrderPde {
    pub fn new(xs: Vec<String>, u: impl Into<String>, ps: Vec<String>, f: Expr) -> Result<Self> {
        if xs.len() != ps.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), found: ps.len() });
        }
        if !ps.iter().any(|p| f.contains_symbol(p)) {
            return Err(Error::Invalid("F does not involve any derivative symbol".into()));
        }
        Ok(FirstOrderPde { xs, u: u.into(), ps, f })
    }
}

/// `u_t + E(t, x, p) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonJacobi {
    pub time: String,
    pub xs: Vec<String>,
    pub ps: Vec<String>,
    pub u: String,
    pub e: Expr,
}

impl HamiltonJacobi {
    pub fn new(time: impl Into<String>, xs: Vec<String>, ps: Vec<String>, e: Expr) -> Result<Self> {
        if xs.len() != ps.len() {
            return Err(Error::DimensionMismatch { expected: xs.len(), found: ps.len() });
        }
        let u = "u".to_string();
        if e.contains_symbol(&u) {
            return Err(Error::Invalid("E must not depend on the unknown `u`".into()));
        }
        Ok(HamiltonJacobi { time: time.into(), xs, ps, u, e })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    /// Characteristic strip of a general first-order PDE.
    Strip,
    /// Canonical system in the time variable.
    Canonical,
}

/// Symbolic ODE system `d(state)/d(time) = rhs` with state `(x, p, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSystem {
    pub kind: SystemKind,
    pub time: String,
    pub state: Vec<String>,
    pub rhs: Vec<Expr>,
    /// Quantity recorded per step (`F` for strips, `E` for canonical systems).
    pub diagnostic: Expr,
    /// The Hamiltonian-like function, for canonical systems.
    pub energy: Option<Expr>,
}

impl OdeSystem {
    pub fn dim(&self) -> usize {
        (self.state.len() - 1) / 2
    }

    pub fn xs(&self) -> &[String] {
        &self.state[..self.dim()]
    }

    pub fn ps(&self) -> &[String] {
        &self.state[self.dim()..2 * self.dim()]
    }

    pub fn u(&self) -> &str {
        &self.state[2 * self.dim()]
    }

    /// Chart `(time, x, p, u)` on which trajectory forms live.
    pub fn chart(&self) -> Arc<Chart> {
        let mut names = vec![self.time.clone()];
        names.extend(self.state.iter().cloned());
        Chart::new(&names).expect("state names are distinct")
    }

    /// `θ = p_i dx^i`, plus `−E dt` for canonical systems.
    pub fn default_theta(&self) -> Form {
        let chart = self.chart();
        let n = self.dim();
        let mut terms: Vec<(Vec<usize>, Expr)> = (0..n).map(|i| (vec![1 + i], Expr::sym(self.ps()[i].clone()))).collect();
        if let Some(e) = &self.energy {
            terms.push((vec![0], -e.clone()));
        }
        Form::from_terms(&chart, 1, terms).expect("indices are in range")
    }
}

fn check_distinct(names: &[&String]) -> Result<()> {
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) {
            return Err(Error::Invalid(format!("variable `{a}` used twice")));
        }
    }
    Ok(())
}

/// `dx^i/ds = F_{p_i}`, `dp_i/ds = −(F_{x^i} + p_i F_u)`, `du/ds = Σ p_i F_{p_i}`.
pub fn characteristic_system(pde: &FirstOrderPde) -> Result<OdeSystem> {
    let names: Vec<&String> = pde.xs.iter().chain(&pde.ps).chain(std::iter::once(&pde.u)).collect();
    check_distinct(&names)?;
    let time = free_name("s", &names);
    let f = &pde.f;
    let f_u = f.diff(&pde.u);
    let f_p: Vec<Expr> = pde.ps.iter().map(|p| f.diff(p)).collect();
    let mut rhs = f_p.clone();
    for (x, p) in pde.xs.iter().zip(&pde.ps) {
        rhs.push(-(&f.diff(x) + &(&Expr::sym(p.clone()) * &f_u)));
    }
    rhs.push(pde.ps.iter().zip(&f_p).map(|(p, fp)| &Expr::sym(p.clone()) * fp).sum());
    Ok(OdeSystem {
        kind: SystemKind::Strip,
        time,
        state: names.into_iter().cloned().collect(),
        rhs,
        diagnostic: f.clone(),
        energy: None,
    })
}

/// `dx^j/dt = E_{p_j}`, `dp_j/dt = −E_{x^j}`, `du/dt = Σ p_j E_{p_j} − E`.
pub fn canonical_system(hj: &HamiltonJacobi) -> Result<OdeSystem> {
    let names: Vec<&String> =
        std::iter::once(&hj.time).chain(&hj.xs).chain(&hj.ps).chain(std::iter::once(&hj.u)).collect();
    check_distinct(&names)?;
    let e = &hj.e;
    let e_p: Vec<Expr> = hj.ps.iter().map(|p| e.diff(p)).collect();
    let mut rhs = e_p.clone();
    for x in &hj.xs {
        rhs.push(-e.diff(x));
    }
    let action: Expr = hj.ps.iter().zip(&e_p).map(|(p, ep)| &Expr::sym(p.clone()) * ep).sum();
    rhs.push(&action - e);
    Ok(OdeSystem {
        kind: SystemKind::Canonical,
        time: hj.time.clone(),
        state: names.into_iter().skip(1).cloned().collect(),
        rhs,
        diagnostic: e.clone(),
        energy: Some(e.clone()),
    })
}

fn free_name(base: &str, taken: &[&String]) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| **t == name) {
        name.push('_');
    }
    name
}

/// Samples of one integrated strip on a uniform grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Vec<f64>,
    /// Set when evaluation failed and the trajectory stopped early.
    pub error: Option<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn series(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[i]).collect()
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub t0: f64,
    pub dt: f64,
    pub steps: usize,
    /// Worker threads for fans; 1 integrates sequentially.
    pub jobs: usize,
    /// Values for symbols that are neither time nor state.
    pub constants: BTreeMap<String, f64>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions { t0: 0.0, dt: 1e-3, steps: 1000, jobs: 1, constants: BTreeMap::new() }
    }
}

struct Compiled {
    rhs: Vec<CompiledExpr>,
    diagnostic: CompiledExpr,
}

impl Compiled {
    fn new(sys: &OdeSystem, constants: &BTreeMap<String, f64>) -> Result<Self> {
        let slots = slots(sys);
        let rhs = sys
            .rhs
            .iter()
            .map(|e| CompiledExpr::compile(e, &slots, constants))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let diagnostic = CompiledExpr::compile(&sys.diagnostic, &slots, constants)?;
        Ok(Compiled { rhs, diagnostic })
    }

    fn eval_rhs(&self, buf: &mut Vec<f64>, t: f64, y: &[f64], out: &mut [f64]) -> std::result::Result<(), String> {
        buf.clear();
        buf.push(t);
        buf.extend_from_slice(y);
        for (o, f) in out.iter_mut().zip(&self.rhs) {
            *o = f.eval(buf).map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

fn slots(sys: &OdeSystem) -> Vec<String> {
    let mut s = vec![sys.time.clone()];
    s.extend(sys.state.iter().cloned());
    s
}

/// Integrate every initial state with classical RK4 at a fixed step.
pub fn integrate(sys: &OdeSystem, initial: &[Vec<f64>], opts: &IntegrateOptions) -> Result<Vec<Trajectory>> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::Invalid(format!("step size must be positive, got {}", opts.dt)));
    }
    for y0 in initial {
        if y0.len() != sys.state.len() {
            return Err(Error::DimensionMismatch { expected: sys.state.len(), found: y0.len() });
        }
    }
    let compiled = Compiled::new(sys, &opts.constants)?;
    let jobs = opts.jobs.max(1).min(initial.len().max(1));
    if jobs == 1 {
        return Ok(initial.iter().map(|y0| run(&compiled, y0, opts)).collect());
    }
    let chunk = initial.len().div_ceil(jobs);
    let compiled = &compiled;
    let parts: Vec<Vec<Trajectory>> = std::thread::scope(|scope| {
        let handles: Vec<_> = initial
            .chunks(chunk)
            .map(|c| scope.spawn(move || c.iter().map(|y0| run(compiled, y0, opts)).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().map(|h| h.join().expect("integration worker panicked")).collect()
    });
    Ok(parts.into_iter().flatten().collect())
}

fn run(c: &Compiled, y0: &[f64], opts: &IntegrateOptions) -> Trajectory {
    let n = y0.len();
    let dt = opts.dt;
    let mut buf = Vec::with_capacity(n + 1);
    let mut traj = Trajectory {
        times: Vec::with_capacity(opts.steps + 1),
        states: Vec::with_capacity(opts.steps + 1),
        diagnostics: Vec::with_capacity(opts.steps + 1),
        error: None,
    };
    let diag = |buf: &mut Vec<f64>, t: f64, y: &[f64]| {
        buf.clear();
        buf.push(t);
        buf.extend_from_slice(y);
        c.diagnostic.eval(buf).map_err(|e| e.to_string())
    };
    let mut y = y0.to_vec();
    let mut t = opts.t0;
    match diag(&mut buf, t, &y) {
        Ok(d) => {
            traj.times.push(t);
            traj.states.push(y.clone());
            traj.diagnostics.push(d);
        }
        Err(e) => {
            traj.error = Some(format!("at t = {t}: {e}"));
            return traj;
        }
    }
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    for step in 1..=opts.steps {
        let stage = (|| -> std::result::Result<(), String> {
            c.eval_rhs(&mut buf, t, &y, &mut k1)?;
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * dt * k1[i];
            }
            c.eval_rhs(&mut buf, t + 0.5 * dt, &tmp, &mut k2)?;
            for i in 0..n {
                tmp[i] = y[i] + 0.5 * dt * k2[i];
            }
            c.eval_rhs(&mut buf, t + 0.5 * dt, &tmp, &mut k3)?;
            for i in 0..n {
                tmp[i] = y[i] + dt * k3[i];
            }
            c.eval_rhs(&mut buf, t + dt, &tmp, &mut k4)?;
            Ok(())
        })();
        let next_t = opts.t0 + step as f64 * dt;
        let result = stage.and_then(|_| {
            for i in 0..n {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            diag(&mut buf, next_t, &y)
        });
        match result {
            Ok(d) => {
                t = next_t;
                traj.times.push(t);
                traj.states.push(y.clone());
                traj.diagnostics.push(d);
            }
            Err(e) => {
                traj.error = Some(format!("at t = {t}: {e}"));
                break;
            }
        }
    }
    traj
}

/// Initial states `state_i = exprs_i(a)` for `count` evenly spaced values of
/// the fan parameter `a` in `[lo, hi]`. Returns `(a, state)` pairs.
pub fn fan_initial_states(
    exprs: &[Expr],
    parameter: &str,
    lo: f64,
    hi: f64,
    count: usize,
    constants: &BTreeMap<String, f64>,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let compiled = exprs
        .iter()
        .map(|e| CompiledExpr::compile(e, &[parameter], constants))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    (0..count)
        .map(|k| {
            let a = if count == 1 { lo } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 };
            let state = compiled.iter().map(|c| c.eval(&[a])).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok((a, state))
        })
        .collect()
}

/// How well `du = θ` holds along a trajectory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub max_residual: f64,
    /// Step (1-based end index) where the maximum occurs.
    pub worst_step: usize,
    pub tolerance: f64,
    pub closed: bool,
}

/// Per step, `|Δu − Σ θ_i(midpoint) Δc^i|` where `c` runs over the chart
/// `(time, state)` of the system.
pub fn closure_along(
    sys: &OdeSystem,
    theta: &Form,
    traj: &Trajectory,
    constants: &BTreeMap<String, f64>,
    tolerance: f64,
) -> Result<ClosureReport> {
    let chart = sys.chart();
    crate::forms::same_chart(&chart, theta.chart())?;
    let coeffs = theta.one_form_coefficients()?;
    let slots = slots(sys);
    let compiled = coeffs
        .iter()
        .map(|e| CompiledExpr::compile(e, &slots, constants))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let u = sys.state.len() - 1;
    let mut worst = (0.0_f64, 0usize);
    let row = |j: usize| {
        let mut r = vec![traj.times[j]];
        r.extend_from_slice(&traj.states[j]);
        r
    };
    for j in 1..traj.len() {
        let (a, b) = (row(j - 1), row(j));
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 0.5 * (x + y)).collect();
        let mut sum = 0.0;
        for (i, c) in compiled.iter().enumerate() {
            let delta = b[i] - a[i];
            if delta != 0.0 {
                sum += c.eval(&mid)? * delta;
            }
        }
        let r = ((b[1 + u] - a[1 + u]) - sum).abs();
        if r > worst.0 || j == 1 {
            worst = (r, j);
        }
    }
    Ok(ClosureReport { max_residual: worst.0, worst_step: worst.1, tolerance, closed: worst.0 <= tolerance })
}

/// Sign change of the neighbor-difference estimate of `∂x/∂a` along a fan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyEvent {
    /// Midpoint of the bracketing interval.
    pub time: f64,
    pub t_before: f64,
    pub t_after: f64,
    /// Indices of the neighboring trajectories.
    pub pair: (usize, usize),
    pub j_before: f64,
    pub j_after: f64,
}

/// Scan neighboring trajectories `(k, k+1)` for sign changes of
/// `(x_{k+1} − x_k) / (a_{k+1} − a_k)` in state component `component`.
/// Values within `1e-9` of the largest `|∂x/∂a|` on the pair count as zero.
/// Fewer than two trajectories give no events.
pub fn detect_degeneracy(fan: &[Trajectory], params: &[f64], component: usize) -> Result<Vec<DegeneracyEvent>> {
    if params.len() != fan.len() {
        return Err(Error::DimensionMismatch { expected: fan.len(), found: params.len() });
    }
    let mut events = Vec::new();
    for k in 0..fan.len().saturating_sub(1) {
        let (a, b) = (&fan[k], &fan[k + 1]);
        let da = params[k + 1] - params[k];
        if da == 0.0 {
            return Err(Error::Invalid(format!("fan parameters {k} and {} coincide", k + 1)));
        }
        let len = a.len().min(b.len());
        let jacs: Vec<f64> = (0..len).map(|j| (b.states[j][component] - a.states[j][component]) / da).collect();
        // round-off at an exact crossing is not a sign
        let floor = 1e-9 * jacs.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut last: Option<(f64, f64)> = None;
        for (j, &jac) in jacs.iter().enumerate() {
            if jac.abs() <= floor {
                continue;
            }
            if let Some((t0, j0)) = last {
                if j0.signum() != jac.signum() {
                    let t1 = a.times[j];
                    events.push(DegeneracyEvent {
                        time: 0.5 * (t0 + t1),
                        t_before: t0,
                        t_after: t1,
                        pair: (k, k + 1),
                        j_before: j0,
                        j_after: jac,
                    });
                }
            }
            last = Some((a.times[j], jac));
        }
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn hj(e: &str) -> OdeSystem {
        canonical_system(&HamiltonJacobi::new("t", s(&["x"]), s(&["p"]), parse(e).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn canonical_right_hand_sides() {
        let sys = hj("p^2/2");
        assert_eq!(sys.rhs, vec![parse("p").unwrap(), Expr::zero(), parse("p^2/2").unwrap()]);
        let sys = hj("(p^2 + x^2)/2");
        assert_eq!(sys.rhs[0], parse("p").unwrap());
        assert_eq!(sys.rhs[1], parse("-x").unwrap());
        // dE/dt along the flow
        let e = sys.energy.clone().unwrap();
        let de = &(&e.diff("x") * &sys.rhs[0]) + &(&e.diff("p") * &sys.rhs[1]);
        assert!(de.is_zero());
    }

    #[test]
    fn strip_right_hand_sides() {
        let pde = FirstOrderPde::new(s(&["x", "y"]), "u", s(&["p", "q"]), parse("p - y^2").unwrap()).unwrap();
        let sys = characteristic_system(&pde).unwrap();
        assert_eq!(sys.rhs[0], Expr::one());
        assert_eq!(sys.rhs[2], Expr::zero());
        assert_eq!(sys.rhs[3], parse("2*y").unwrap());
        let pde = FirstOrderPde::new(s(&["x"]), "u", s(&["p"]), parse("p - u").unwrap()).unwrap();
        let sys = characteristic_system(&pde).unwrap();
        assert_eq!(sys.rhs[1], parse("p").unwrap());
        assert!(FirstOrderPde::new(s(&["x"]), "u", s(&["p"]), parse("x - u").unwrap()).is_err());
    }

    #[test]
    fn strip_matches_canonical_form() {
        let e = parse("p^2/2 + t*x").unwrap();
        let pde = FirstOrderPde::new(s(&["t", "x"]), "u", s(&["p_t", "p"]), &parse("p_t").unwrap() + &e).unwrap();
        let strip = characteristic_system(&pde).unwrap();
        let canon = canonical_system(&HamiltonJacobi::new("t", s(&["x"]), s(&["p"]), e).unwrap()).unwrap();
        assert_eq!(strip.rhs[0], Expr::one());
        assert_eq!(strip.rhs[1], canon.rhs[0]);
        assert_eq!(strip.rhs[3], canon.rhs[1]);
    }

    #[test]
    fn free_streaming() {
        let sys = hj("p^2/2");
        let opts = IntegrateOptions { dt: 0.01, steps: 100, ..Default::default() };
        let traj = integrate(&sys, &[vec![0.0, 1.0, 0.0]], &opts).unwrap().remove(0);
        assert!((traj.last()[0] - 1.0).abs() <= 1e-9);
        let report = closure_along(&sys, &sys.default_theta(), &traj, &BTreeMap::new(), 1e-8).unwrap();
        assert!(report.closed, "{report:?}");
        let mut bad = traj.clone();
        bad.states[50][2] += 1e-3;
        assert!(!closure_along(&sys, &sys.default_theta(), &bad, &BTreeMap::new(), 1e-8).unwrap().closed);
    }

    #[test]
    fn harmonic_period_and_energy() {
        let sys = hj("(p^2 + x^2)/2");
        let steps = (2.0 * PI / 1e-3).round() as usize;
        let opts = IntegrateOptions { dt: 2.0 * PI / steps as f64, steps, ..Default::default() };
        let traj = integrate(&sys, &[vec![1.0, 0.0, 0.0]], &opts).unwrap().remove(0);
        let end = traj.last();
        assert!((end[0] - 1.0).abs() < 1e-6 && end[1].abs() < 1e-6, "{end:?}");
        let e0 = traj.diagnostics[0];
        assert!(traj.diagnostics.iter().all(|e| (e - e0).abs() < 1e-6));
    }

    #[test]
    fn fourth_order_convergence() {
        let sys = hj("(p^2 + x^2)/2");
        let err = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let opts = IntegrateOptions { dt, steps, ..Default::default() };
            let tr = integrate(&sys, &[vec![1.0, 0.0, 0.0]], &opts).unwrap().remove(0);
            (tr.last()[0] - 1.0_f64.cos()).abs()
        };
        assert!(err(0.02) / err(0.01) >= 8.0);
    }

    #[test]
    fn focusing_fan_has_event_at_one() {
        let sys = hj("p^2/2");
        let exprs = [parse("a").unwrap(), parse("-a").unwrap(), parse("-a^2/2").unwrap()];
        let init = fan_initial_states(&exprs, "a", -1.0, 1.0, 9, &BTreeMap::new()).unwrap();
        let params: Vec<f64> = init.iter().map(|(a, _)| *a).collect();
        let states: Vec<Vec<f64>> = init.into_iter().map(|(_, y)| y).collect();
        let dt = 0.01;
        let opts = IntegrateOptions { dt, steps: 200, jobs: 3, ..Default::default() };
        let fan = integrate(&sys, &states, &opts).unwrap();
        let events = detect_degeneracy(&fan, &params, 0).unwrap();
        assert_eq!(events.len(), 8);
        assert!(events.iter().all(|e| (e.time - 1.0).abs() <= 2.0 * dt), "{events:?}");
        assert!(events.iter().all(|e| e.j_before * e.j_after < 0.0));

        let spread = [parse("a").unwrap(), parse("a").unwrap(), Expr::zero()];
        let init = fan_initial_states(&spread, "a", -1.0, 1.0, 5, &BTreeMap::new()).unwrap();
        let params: Vec<f64> = init.iter().map(|(a, _)| *a).collect();
        let states: Vec<Vec<f64>> = init.into_iter().map(|(_, y)| y).collect();
        let fan = integrate(&sys, &states, &opts).unwrap();
        assert!(detect_degeneracy(&fan, &params, 0).unwrap().is_empty());
        assert!(detect_degeneracy(&fan[..1], &params[..1], 0).unwrap().is_empty());
    }

    #[test]
    fn parallel_matches_sequential() {
        let sys = hj("(p^2 + x^2)/2");
        let init: Vec<Vec<f64>> = (0..7).map(|k| vec![1.0 + 0.1 * k as f64, 0.0, 0.0]).collect();
        let seq = IntegrateOptions { dt: 0.01, steps: 50, ..Default::default() };
        let par = IntegrateOptions { jobs: 4, ..seq.clone() };
        assert_eq!(integrate(&sys, &init, &seq).unwrap(), integrate(&sys, &init, &par).unwrap());
    }

    #[test]
    fn domain_error_flags_partial_trajectory() {
        let sys = hj("p^2/2 + ln(x)");
        let opts = IntegrateOptions { dt: 0.1, steps: 100, ..Default::default() };
        let traj = integrate(&sys, &[vec![1.0, -3.0, 0.0]], &opts).unwrap().remove(0);
        assert!(traj.error.is_some());
        assert!(traj.len() < 101);
    }
}
