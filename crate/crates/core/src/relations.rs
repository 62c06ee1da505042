//! Analysis of relations `dψ = ω` whose right side need not be closed.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::connection::Connection;
use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, Func, Verdict, ZeroTest};
use crate::forms::{same_chart, Chart, CommutatorReport, Form, Pseudostructure};
use crate::linalg::{self, Minor};

/// `dψ = ω`, with `ψ` known or left as an unknown state function.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionaryRelation {
    pub omega: Form,
    pub psi: Option<Form>,
    pub connection: Option<Connection>,
}

impl EvolutionaryRelation {
    pub fn new(omega: Form) -> Self {
        EvolutionaryRelation { omega, psi: None, connection: None }
    }

    pub fn with_potential(mut self, psi: Form) -> Result<Self> {
        same_chart(self.omega.chart(), psi.chart())?;
        if psi.degree() + 1 != self.omega.degree() {
            return Err(Error::DegreeMismatch(format!(
                "potential of degree {} for a {}-form",
                psi.degree(),
                self.omega.degree()
            )));
        }
        self.psi = Some(psi);
        Ok(self)
    }

    pub fn with_connection(mut self, connection: Connection) -> Result<Self> {
        same_chart(self.omega.chart(), connection.chart())?;
        self.connection = Some(connection);
        Ok(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Identical,
    Nonidentical,
    Indeterminate,
}

impl Classification {
    fn from_verdict(v: Verdict) -> Self {
        match v {
            Verdict::Zero => Classification::Identical,
            Verdict::NonZero => Classification::Nonidentical,
            Verdict::Unknown => Classification::Indeterminate,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Identical => "identical",
            Classification::Nonidentical => "nonidentical",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

/// A named group of terms that keeps the relation from being identical.
#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub name: String,
    pub verdict: Verdict,
    /// Multi-indices of the components this source touches.
    pub components: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityVerdict {
    pub classification: Classification,
    /// Flat exterior derivative of `ω`.
    pub differential: Form,
    /// Commutator table, for 1-forms.
    pub commutator: Option<CommutatorReport>,
    /// Nonzero or undecided sources.
    pub sources: Vec<Source>,
    /// `ω − dψ` verdict when a potential was supplied.
    pub potential: Option<Verdict>,
}

pub const SOURCE_CURL: &str = "coefficient curl";
pub const SOURCE_TORSION: &str = "connection torsion";

pub fn analyze(rel: &EvolutionaryRelation, zt: &ZeroTest) -> Result<IdentityVerdict> {
    let differential = rel.omega.d();
    let potential = match &rel.psi {
        Some(psi) => Some(rel.omega.exactness_witness_check(psi, zt)?),
        None => None,
    };
    if rel.omega.degree() == 1 {
        let report = rel.omega.commutator(rel.connection.as_ref(), zt)?;
        let mut sources = Vec::new();
        let mut push = |name: &str, pick: &dyn Fn(&crate::forms::CommutatorEntry) -> Verdict| {
            let hits: Vec<_> = report.entries.iter().filter(|e| pick(e) != Verdict::Zero).collect();
            if !hits.is_empty() {
                sources.push(Source {
                    name: name.to_string(),
                    verdict: Verdict::all(hits.iter().map(|e| pick(e))),
                    components: hits.iter().map(|e| vec![e.alpha, e.beta]).collect(),
                });
            }
        };
        push(SOURCE_CURL, &|e| e.derivative_verdict);
        if rel.connection.is_some() {
            push(SOURCE_TORSION, &|e| e.connection_verdict);
        }
        return Ok(IdentityVerdict {
            classification: Classification::from_verdict(report.verdict),
            differential,
            commutator: Some(report),
            sources,
            potential,
        });
    }
    if rel.connection.is_some() {
        return Err(Error::Unsupported(format!(
            "connection-aware differential of a {}-form",
            rel.omega.degree()
        )));
    }
    let verdicts = differential.component_verdicts(zt);
    let hits: Vec<_> = verdicts.iter().filter(|(_, v)| *v != Verdict::Zero).collect();
    let verdict = Verdict::all(verdicts.iter().map(|(_, v)| *v));
    let sources = if hits.is_empty() {
        Vec::new()
    } else {
        vec![Source {
            name: SOURCE_CURL.to_string(),
            verdict,
            components: hits.iter().map(|(i, _)| i.clone()).collect(),
        }]
    };
    Ok(IdentityVerdict {
        classification: Classification::from_verdict(verdict),
        differential,
        commutator: None,
        sources,
        potential,
    })
}

/// Which single-variable ansatz to try for an integrating factor.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ansatz {
    /// `μ(x¹)`, then `μ(x²)`.
    #[default]
    Auto,
    First,
    Second,
}

#[derive(Clone, Debug, PartialEq)]
pub enum IntegratingFactor {
    /// `μ` with `d(μ w) = 0` structurally; `variable` is the coordinate it
    /// depends on (`None` when `w` is already closed and `μ = 1`).
    Found { mu: Expr, variable: Option<usize> },
    NotFound,
    Indeterminate,
}

/// Single-variable integrating factor for a 1-form on a 2-coordinate chart.
pub fn find_integrating_factor(w: &Form, ansatz: Ansatz, zt: &ZeroTest) -> Result<IntegratingFactor> {
    let chart = w.chart();
    if chart.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: chart.dim() });
    }
    let a = w.one_form_coefficients()?;
    let (x1, x2) = (chart.name(0), chart.name(1));
    let curl = &a[1].diff(x1) - &a[0].diff(x2);
    let closed = zt.check(&curl);
    if closed == Verdict::Zero {
        return Ok(IntegratingFactor::Found { mu: Expr::one(), variable: None });
    }
    let order: &[usize] = match ansatz {
        Ansatz::Auto => &[0, 1],
        Ansatz::First => &[0],
        Ansatz::Second => &[1],
    };
    let mut undecided = closed == Verdict::Unknown;
    for &k in order {
        // μ(x¹): μ'/μ = −curl/Q;  μ(x²): μ'/μ = curl/P
        let (var, other, ratio) = match k {
            0 => (x1, x2, a[1].recip().map(|q| -(&curl * &q))),
            _ => (x2, x1, a[0].recip().map(|p| &curl * &p)),
        };
        let Some(ratio) = ratio else { continue };
        match zt.check(&ratio.diff(other)) {
            Verdict::Zero => {}
            Verdict::Unknown => {
                undecided = true;
                continue;
            }
            Verdict::NonZero => continue,
        }
        let Some(log_mu) = ratio.integrate(var) else { continue };
        let mu = normalize(&exp_of(&log_mu));
        match w.scale(&mu).is_closed(zt) {
            Verdict::Zero => return Ok(IntegratingFactor::Found { mu, variable: Some(k) }),
            Verdict::Unknown => undecided = true,
            Verdict::NonZero => {}
        }
    }
    Ok(if undecided { IntegratingFactor::Indeterminate } else { IntegratingFactor::NotFound })
}

/// `exp(e)`, turning integer multiples of logarithms into powers.
fn exp_of(e: &Expr) -> Expr {
    let mut out = Expr::one();
    let mut rest = Expr::zero();
    for (m, c) in e.terms() {
        let mut factors = m.factors();
        let log_arg = match (factors.next(), factors.next()) {
            (Some((Atom::Call(Func::Ln, arg), 1)), None) if c.is_integer() => Some(arg),
            _ => None,
        };
        match log_arg.and_then(|arg| arg.powi(num_traits::ToPrimitive::to_i64(&c.to_integer())?)) {
            Some(p) => out = &out * &p,
            None => rest = &rest + &Expr::term(c.clone(), m.clone()),
        }
    }
    if rest.is_zero() {
        out
    } else {
        &out * &Expr::exp(rest)
    }
}

/// Scale so the leading rational coefficient is 1.
fn normalize(mu: &Expr) -> Expr {
    match mu.leading_coefficient() {
        Some(c) if !num_traits::Zero::is_zero(c) => mu.scale(&num_traits::Inv::inv(c.clone())),
        _ => mu.clone(),
    }
}

/// Outcome of restricting a relation to a pseudostructure where it closes.
#[derive(Clone, Debug, PartialEq)]
pub struct IdenticalRestriction {
    pub pseudostructure: Pseudostructure,
    /// `ω` pulled back to the parameter chart; closed.
    pub omega_pi: Form,
    /// Potential on the parameter chart, when one could be integrated.
    pub psi_pi: Option<Form>,
}

impl IdenticalRestriction {
    /// Interior differential `d_π ψ`, equal to `ω_π` on the pseudostructure.
    pub fn interior_differential(&self) -> &Form {
        &self.omega_pi
    }
}

pub fn restrict(rel: &EvolutionaryRelation, s: &Pseudostructure, zt: &ZeroTest) -> Result<IdenticalRestriction> {
    restrict_form(&rel.omega, s, zt)
}

fn restrict_form(omega: &Form, s: &Pseudostructure, zt: &ZeroTest) -> Result<IdenticalRestriction> {
    if omega.degree() == 0 {
        return Err(Error::DegreeMismatch("nothing to integrate in a 0-form".into()));
    }
    let omega_pi = omega.pullback(s)?;
    let d = omega_pi.d();
    let verdicts = d.component_verdicts(zt);
    if verdicts.iter().any(|(_, v)| *v != Verdict::Zero) {
        let printer = s.params().printer();
        let residual = d
            .terms()
            .map(|(idx, c)| {
                let basis: Vec<String> = idx.iter().map(|&i| format!("d{}", s.params().name(i))).collect();
                format!("{}: {}", basis.join(" ^ "), printer.expr(c))
            })
            .collect();
        return Err(Error::NotClosedOnPseudostructure { residual });
    }
    let psi_pi = potential(&omega_pi);
    Ok(IdenticalRestriction { pseudostructure: s.clone(), omega_pi, psi_pi })
}

/// Potential of a closed form by integrating out one coordinate at a time.
///
/// Returns `None` when a coefficient has no symbolic antiderivative or when
/// something is left over (the form was not closed).
pub fn potential(omega: &Form) -> Option<Form> {
    if omega.degree() == 0 {
        return None;
    }
    let chart = omega.chart().clone();
    let mut rest = omega.clone();
    let mut psi = Form::zero(&chart, omega.degree() - 1);
    for k in 0..chart.dim() {
        let mut terms = Vec::new();
        for (idx, c) in rest.terms() {
            let Some(pos) = idx.iter().position(|&i| i == k) else { continue };
            let integral = c.integrate(chart.name(k))?;
            let mut lower = idx.clone();
            lower.remove(pos);
            terms.push((lower, if pos % 2 == 1 { -integral } else { integral }));
        }
        let b = Form::from_terms(&chart, omega.degree() - 1, terms).ok()?;
        rest = rest.sub(&b.d()).ok()?;
        psi = psi.add(&b).ok()?;
    }
    rest.is_zero().then_some(psi)
}

/// Result of integrating along a chain of pseudostructures.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainReport {
    pub steps: Vec<IdenticalRestriction>,
    /// Index of the failing step and its error, if the chain stopped early.
    pub failure: Option<(usize, Error)>,
}

/// Restrict, recover the potential, and continue with that potential on the
/// next pseudostructure; one degree lower per step.
pub fn sequential_integrate(rel: &EvolutionaryRelation, chain: &[Pseudostructure], zt: &ZeroTest) -> ChainReport {
    let mut steps = Vec::new();
    let mut current = rel.omega.clone();
    for (i, s) in chain.iter().enumerate() {
        let step = match restrict_form(&current, s, zt) {
            Ok(step) => step,
            Err(e) => return ChainReport { steps, failure: Some((i, e)) },
        };
        let next = step.psi_pi.clone();
        steps.push(step);
        match next {
            Some(psi) if i + 1 < chain.len() => current = psi,
            Some(_) => {}
            None if i + 1 < chain.len() => {
                return ChainReport {
                    steps,
                    failure: Some((i + 1, Error::NoPotential("no symbolic potential for the previous step".into()))),
                }
            }
            None => {}
        }
    }
    ChainReport { steps, failure: None }
}

/// Degenerate-transform conditions for linear constraints on the chart
/// differentials: maximal minors of the coefficient matrix, each of which
/// must vanish.
pub fn degenerate_conditions(constraints: &[Form]) -> Result<Vec<Minor>> {
    let Some(first) = constraints.first() else {
        return Ok(Vec::new());
    };
    let chart: &Arc<Chart> = first.chart();
    let mut rows = Vec::new();
    for c in constraints {
        same_chart(chart, c.chart())?;
        rows.push(c.one_form_coefficients()?);
    }
    linalg::maximal_minors(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, ParseContext};

    fn chart(names: &[&str]) -> Arc<Chart> {
        Chart::new(names).unwrap()
    }

    fn form(c: &Arc<Chart>, s: &str) -> Form {
        Form::parse(c, s, &ParseContext::default()).unwrap()
    }

    fn line(map: &[(&str, &str)], param: &str) -> Pseudostructure {
        Pseudostructure::new(
            chart(&[param]),
            map.iter().map(|(k, v)| (k.to_string(), parse(v).unwrap())).collect(),
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn thermodynamic_relation() {
        let tv = chart(&["T", "V"]);
        let zt = ZeroTest::default();
        let w = form(&tv, "c_v dT + R*T/V dV");
        let v = analyze(&EvolutionaryRelation::new(w.clone()), &zt).unwrap();
        assert_eq!(v.classification, Classification::Nonidentical);
        assert_eq!(v.commutator.as_ref().unwrap().component(0, 1), parse("R/V").unwrap());
        assert_eq!(v.sources[0].name, SOURCE_CURL);

        let found = find_integrating_factor(&w, Ansatz::Auto, &zt).unwrap();
        assert_eq!(found, IntegratingFactor::Found { mu: parse("1/T").unwrap(), variable: Some(0) });
        assert_eq!(w.scale(&parse("1/T").unwrap()), form(&tv, "c_v/T dT + R/V dV"));

        let isotherm = line(&[("T", "T"), ("V", "V")], "V");
        let r = restrict(&EvolutionaryRelation::new(w), &isotherm, &zt).unwrap();
        assert_eq!(r.omega_pi.to_string(), "V^-1*R*T dV");
        assert_eq!(r.psi_pi.unwrap(), Form::scalar(r.omega_pi.chart(), parse("R*T*ln(V)").unwrap()));
    }

    #[test]
    fn integrating_factor_ansatz_choice() {
        let xy = chart(&["x", "y"]);
        let zt = ZeroTest::default();
        let w = form(&xy, "y dx - x dy");
        let auto = find_integrating_factor(&w, Ansatz::Auto, &zt).unwrap();
        assert_eq!(auto, IntegratingFactor::Found { mu: parse("x^-2").unwrap(), variable: Some(0) });
        let second = find_integrating_factor(&w, Ansatz::Second, &zt).unwrap();
        assert_eq!(second, IntegratingFactor::Found { mu: parse("y^-2").unwrap(), variable: Some(1) });
        let closed = find_integrating_factor(&form(&xy, "y dx + x dy"), Ansatz::Auto, &zt).unwrap();
        assert_eq!(closed, IntegratingFactor::Found { mu: Expr::one(), variable: None });
        // μ = exp(x) for dx + ... where ratio is constant
        let w = form(&xy, "y dx + 2 dy");
        // curl = -1, μ(x): μ'/μ = 1/2
        assert_eq!(
            find_integrating_factor(&w, Ansatz::First, &zt).unwrap(),
            IntegratingFactor::Found { mu: parse("exp(1/2*x)").unwrap(), variable: Some(0) }
        );
        let none = form(&xy, "x*y^2 dx + (x + y) dy");
        assert_eq!(find_integrating_factor(&none, Ansatz::Auto, &zt).unwrap(), IntegratingFactor::NotFound);
    }

    #[test]
    fn opaque_coefficients_are_symbolically_nonidentical() {
        let c = chart(&["a", "b"]);
        let ctx = ParseContext::new().with_function("A", &["a", "b"]).with_function("B", &["a", "b"]);
        let w = Form::parse(&c, "A da + B db", &ctx).unwrap();
        let v = analyze(&EvolutionaryRelation::new(w), &ZeroTest::default()).unwrap();
        assert_eq!(v.classification, Classification::Nonidentical);
        let k = v.commutator.unwrap().component(0, 1);
        assert_eq!(k, crate::expr::parse_with("B_a - A_b", &ctx).unwrap());
    }

    #[test]
    fn potentials_and_chains() {
        let xy = chart(&["x", "y"]);
        let zt = ZeroTest::default();
        let omega = form(&xy, "2*x dx ^ dy");
        assert_eq!(potential(&omega).unwrap(), form(&xy, "x^2 dy"));
        let chain = [Pseudostructure::identity(&xy), line(&[("x", "a"), ("y", "s")], "s")];
        let report = sequential_integrate(&EvolutionaryRelation::new(omega), &chain, &zt);
        assert!(report.failure.is_none());
        assert_eq!(report.steps.len(), 2);
        let last = report.steps[1].psi_pi.clone().unwrap();
        assert_eq!(last.coefficient(&[]), parse("a^2*s").unwrap());

        let area = form(&xy, "dx ^ dy");
        let chain = [Pseudostructure::identity(&xy), Pseudostructure::identity(&xy)];
        let report = sequential_integrate(&EvolutionaryRelation::new(area), &chain, &zt);
        assert_eq!(report.steps.len(), 1);
        assert_eq!(report.steps[0].psi_pi.as_ref().unwrap(), &form(&xy, "x dy"));
        assert!(matches!(report.failure, Some((1, Error::NotClosedOnPseudostructure { .. }))));
    }

    #[test]
    fn restrict_simple_line() {
        let xy = chart(&["x", "y"]);
        let zt = ZeroTest::default();
        let s = line(&[("x", "a"), ("y", "y")], "y");
        let r = restrict(&EvolutionaryRelation::new(form(&xy, "x dy")), &s, &zt).unwrap();
        assert_eq!(r.omega_pi, form(s.params(), "a dy"));
        assert_eq!(r.psi_pi.unwrap().coefficient(&[]), parse("a*y").unwrap());
    }

    #[test]
    fn connection_sources_and_unsupported_degree() {
        let xy = chart(&["x", "y"]);
        let zt = ZeroTest::default();
        let conn = Connection::from_entries(&xy, [(0, 0, 1, Expr::one())]).unwrap();
        let rel = EvolutionaryRelation::new(form(&xy, "y dx + x dy")).with_connection(conn.clone()).unwrap();
        let v = analyze(&rel, &zt).unwrap();
        assert_eq!(v.classification, Classification::Nonidentical);
        assert_eq!(v.sources.len(), 1);
        assert_eq!(v.sources[0].name, SOURCE_TORSION);
        let rel = EvolutionaryRelation::new(form(&xy, "dx ^ dy")).with_connection(conn).unwrap();
        assert!(matches!(analyze(&rel, &zt), Err(Error::Unsupported(_))));
    }

    #[test]
    fn analyze_with_potential() {
        let xy = chart(&["x", "y"]);
        let zt = ZeroTest::default();
        let rel = EvolutionaryRelation::new(form(&xy, "y dx + x dy")).with_potential(form(&xy, "x*y")).unwrap();
        let v = analyze(&rel, &zt).unwrap();
        assert_eq!(v.classification, Classification::Identical);
        assert_eq!(v.potential, Some(Verdict::Zero));
        assert!(v.sources.is_empty());
    }

    #[test]
    fn determinant_conditions() {
        let xp = chart(&["x", "p"]);
        // (F_x + p F_u) dX + F_p dP = 0 together with the direction (dX, dP)
        let f = parse("p^2/2 + x^2/2").unwrap();
        let a = f.diff("x");
        let b = f.diff("p");
        let rows = [
            Form::one_form(&xp, vec![a.clone(), b.clone()]).unwrap(),
            Form::one_form(&xp, vec![-parse("dP").unwrap(), parse("dX").unwrap()]).unwrap(),
        ];
        let minors = degenerate_conditions(&rows).unwrap();
        assert_eq!(minors.len(), 1);
        let det = &minors[0].value;
        assert_eq!(det, &parse("x*dX + p*dP").unwrap());
        // vanishes exactly on dX : dP = F_p : -(F_x)
        let on_direction = det.subs(&[("dX".to_string(), b), ("dP".to_string(), -a)].into()).unwrap();
        assert!(on_direction.is_zero());
        let id = [form(&xp, "dx"), form(&xp, "dp")];
        assert_eq!(degenerate_conditions(&id).unwrap()[0].value, Expr::one());
    }
}
