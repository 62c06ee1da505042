//! Skew-symmetric differential forms on coordinate charts.
//!
//! A [`Form`] of degree `p` stores one coefficient per strictly increasing
//! multi-index `i1 < i2 < ... < ip`; any other ordering is folded in with the
//! sign of the sorting permutation, and repeated indices vanish.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::connection::Connection;
use crate::error::{Error, Result};
use num_traits::Signed;

use crate::expr::{Expr, ParseContext, ParseError, ParseErrorKind, Parser, Printer, Verdict, ZeroTest};

/// Ordered coordinate names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    coords: Vec<String>,
}

impl Chart {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Arc<Chart>> {
        let coords: Vec<String> = coords.iter().map(|s| s.as_ref().to_string()).collect();
        if coords.is_empty() {
            return Err(Error::Invalid("a chart needs at least one coordinate".into()));
        }
        let unique: BTreeSet<&String> = coords.iter().collect();
        if unique.len() != coords.len() {
            return Err(Error::Invalid(format!("duplicate coordinate in chart [{}]", coords.join(", "))));
        }
        Ok(Arc::new(Chart { coords }))
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == name)
    }

    pub fn printer(&self) -> Printer {
        Printer::with_order(&self.coords)
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coords.join(", "))
    }
}

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch(a.to_string(), b.to_string()))
    }
}

/// Sort a multi-index, returning the permutation sign, or `None` if an index
/// repeats.
fn sort_with_sign(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Form {
    chart: Arc<Chart>,
    degree: usize,
    terms: BTreeMap<Vec<usize>, Expr>,
}

impl Form {
    /// Zero form of any degree; degrees above the dimension are allowed here
    /// only because they arise as wedge products that must vanish.
    pub fn zero(chart: &Arc<Chart>, degree: usize) -> Form {
        Form { chart: chart.clone(), degree, terms: BTreeMap::new() }
    }

    pub fn scalar(chart: &Arc<Chart>, f: Expr) -> Form {
        let mut form = Form::zero(chart, 0);
        form.add_term(Vec::new(), f);
        form
    }

    /// The basis differential `d<coord i>`.
    pub fn differential(chart: &Arc<Chart>, i: usize) -> Form {
        let mut form = Form::zero(chart, 1);
        form.add_term(vec![i], Expr::one());
        form
    }

    /// `Σ a_i dx^i` from a full coefficient list.
    pub fn one_form(chart: &Arc<Chart>, coefficients: Vec<Expr>) -> Result<Form> {
        if coefficients.len() != chart.dim() {
            return Err(Error::DimensionMismatch { expected: chart.dim(), found: coefficients.len() });
        }
        Form::from_terms(chart, 1, coefficients.into_iter().enumerate().map(|(i, c)| (vec![i], c)))
    }

    /// Build from arbitrary (possibly unsorted) multi-indices.
    pub fn from_terms<I>(chart: &Arc<Chart>, degree: usize, terms: I) -> Result<Form>
    where
        I: IntoIterator<Item = (Vec<usize>, Expr)>,
    {
        let mut form = Form::zero(chart, degree);
        for (idx, coef) in terms {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch(format!(
                    "multi-index of length {} in a {degree}-form",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= chart.dim()) {
                return Err(Error::Invalid(format!("index {bad} out of range for chart [{chart}]")));
            }
            if let Some((sorted, sign)) = sort_with_sign(&idx) {
                form.add_term(sorted, if sign < 0 { -coef } else { coef });
            }
        }
        Ok(form)
    }

    fn add_term(&mut self, idx: Vec<usize>, coef: Expr) {
        if coef.is_zero() {
            return;
        }
        let slot = self.terms.entry(idx.clone()).or_default();
        *slot = &*slot + &coef;
        if slot.is_zero() {
            self.terms.remove(&idx);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero terms in canonical (lexicographic multi-index) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
        self.terms.iter()
    }

    /// Coefficient of the basis element with the given multi-index in any
    /// order (sign-adjusted); zero for repeated indices.
    pub fn coefficient(&self, idx: &[usize]) -> Expr {
        match sort_with_sign(idx) {
            Some((sorted, sign)) => {
                let c = self.terms.get(&sorted).cloned().unwrap_or_default();
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
            None => Expr::zero(),
        }
    }

    /// Coefficients of a 1-form in chart order.
    pub fn one_form_coefficients(&self) -> Result<Vec<Expr>> {
        if self.degree != 1 {
            return Err(Error::DegreeMismatch(format!("expected a 1-form, got degree {}", self.degree)));
        }
        Ok((0..self.chart.dim()).map(|i| self.coefficient(&[i])).collect())
    }

    pub fn add(&self, other: &Form) -> Result<Form> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch(format!("cannot add degrees {} and {}", self.degree, other.degree)));
        }
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.map_coefficients(|c| -c)
    }

    pub fn scale(&self, f: &Expr) -> Form {
        self.map_coefficients(|c| c * f)
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let mut out = Form::zero(&self.chart, self.degree);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), f(c));
        }
        out
    }

    /// Exterior product. Bilinear and associative, graded anticommutative.
    pub fn wedge(&self, other: &Form) -> Result<Form> {
        same_chart(&self.chart, &other.chart)?;
        let mut out = Form::zero(&self.chart, self.degree + other.degree);
        for (ia, ca) in &self.terms {
            for (ib, cb) in &other.terms {
                let mut idx = ia.clone();
                idx.extend_from_slice(ib);
                if let Some((sorted, sign)) = sort_with_sign(&idx) {
                    let c = ca * cb;
                    out.add_term(sorted, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Flat exterior derivative: `d(f dx^I) = Σ_i ∂f/∂x^i dx^i ∧ dx^I`.
    pub fn d(&self) -> Form {
        let n = self.chart.dim();
        let mut out = Form::zero(&self.chart, self.degree + 1);
        for (idx, c) in &self.terms {
            for i in 0..n {
                if idx.contains(&i) {
                    continue;
                }
                let dc = c.diff(self.chart.name(i));
                if dc.is_zero() {
                    continue;
                }
                let pos = idx.partition_point(|&j| j < i);
                let mut new_idx = idx.clone();
                new_idx.insert(pos, i);
                out.add_term(new_idx, if pos % 2 == 1 { -dc } else { dc });
            }
        }
        out
    }

    /// Zero verdict for every component, in canonical order.
    pub fn component_verdicts(&self, zt: &ZeroTest) -> Vec<(Vec<usize>, Verdict)> {
        self.terms.iter().map(|(idx, c)| (idx.clone(), zt.check(c))).collect()
    }

    /// Aggregate zero verdict over all coefficients.
    pub fn zero_verdict(&self, zt: &ZeroTest) -> Verdict {
        Verdict::all(self.terms.values().map(|c| zt.check(c)))
    }

    /// Whether `d(self)` vanishes.
    pub fn is_closed(&self, zt: &ZeroTest) -> Verdict {
        self.d().zero_verdict(zt)
    }

    /// Zero iff `self - d(psi)` vanishes, i.e. `psi` is a potential.
    pub fn exactness_witness_check(&self, psi: &Form, zt: &ZeroTest) -> Result<Verdict> {
        same_chart(&self.chart, &psi.chart)?;
        if psi.degree + 1 != self.degree {
            return Err(Error::DegreeMismatch(format!(
                "potential of degree {} for a {}-form",
                psi.degree, self.degree
            )));
        }
        Ok(self.sub(&psi.d())?.zero_verdict(zt))
    }

    /// Commutator table of a 1-form, optionally with connection terms:
    /// `K_{αβ} = (∂a_β/∂x^α − ∂a_α/∂x^β) + (Γ^σ_{βα} − Γ^σ_{αβ}) a_σ`.
    pub fn commutator(&self, conn: Option<&Connection>, zt: &ZeroTest) -> Result<CommutatorReport> {
        let a = self.one_form_coefficients()?;
        if let Some(c) = conn {
            if c.dim() != self.chart.dim() {
                return Err(Error::DimensionMismatch { expected: self.chart.dim(), found: c.dim() });
            }
            same_chart(&self.chart, c.chart())?;
        }
        let n = self.chart.dim();
        let mut entries = Vec::new();
        for alpha in 0..n {
            for beta in alpha + 1..n {
                let derivative_part =
                    &a[beta].diff(self.chart.name(alpha)) - &a[alpha].diff(self.chart.name(beta));
                let connection_part: Expr = match conn {
                    Some(c) => (0..n)
                        .map(|sigma| &(c.gamma(sigma, beta, alpha) - c.gamma(sigma, alpha, beta)) * &a[sigma])
                        .sum(),
                    None => Expr::zero(),
                };
                let total = &derivative_part + &connection_part;
                entries.push(CommutatorEntry {
                    alpha,
                    beta,
                    derivative_verdict: zt.check(&derivative_part),
                    connection_verdict: zt.check(&connection_part),
                    verdict: zt.check(&total),
                    derivative_part,
                    connection_part,
                    total,
                });
            }
        }
        let verdict = Verdict::all(entries.iter().map(|e| e.verdict));
        Ok(CommutatorReport { chart: self.chart.clone(), entries, verdict, with_connection: conn.is_some() })
    }

    /// Pull back along a pseudostructure parametrization.
    pub fn pullback(&self, s: &Pseudostructure) -> Result<Form> {
        let mut used: BTreeSet<usize> = self.terms.keys().flatten().copied().collect();
        for c in self.terms.values() {
            for sym in c.free_symbols() {
                if let Some(i) = self.chart.index_of(&sym) {
                    used.insert(i);
                }
            }
        }
        let mut pulled_differentials = BTreeMap::new();
        for &i in &used {
            let name = self.chart.name(i);
            let image = s.map.get(name).ok_or_else(|| Error::MissingParametrization(name.to_string()))?;
            let coeffs = s.params.coords().iter().map(|u| image.diff(u)).collect();
            pulled_differentials.insert(i, Form::one_form(&s.params, coeffs)?);
        }
        let subs: BTreeMap<String, Expr> =
            used.iter().map(|&i| (self.chart.name(i).to_string(), s.map[self.chart.name(i)].clone())).collect();
        let mut out = Form::zero(&s.params, self.degree);
        for (idx, c) in &self.terms {
            let coef = c.subs(&subs).ok_or_else(|| Error::DivisionByZero(format!("pullback of `{c}`")))?;
            let mut piece = Form::scalar(&s.params, coef);
            for i in idx {
                piece = piece.wedge(&pulled_differentials[i])?;
            }
            out = out.add(&piece)?;
        }
        Ok(out)
    }

    /// Parse a form literal such as `x*y dx ^ dz + (x + y) dy ^ dz`.
    ///
    /// Each term is an optional multiplicative coefficient followed by a
    /// wedge chain of coordinate differentials `d<coord>`. Coefficients that
    /// are sums must be parenthesized. A literal without differentials is a
    /// 0-form.
    pub fn parse(chart: &Arc<Chart>, text: &str, ctx: &ParseContext) -> Result<Form> {
        let mut p = Parser::new(text, ctx, Some(chart.coords()))?;
        let mut terms: Vec<(Vec<usize>, Expr)> = Vec::new();
        let mut degree: Option<usize> = None;
        let mut first = true;
        while !p.at_end() {
            let negative = match p.eat_sign() {
                Some(neg) => neg,
                None if first => false,
                None => {
                    return Err(ParseError {
                        kind: ParseErrorKind::Syntax("expected `+` or `-` between terms".into()),
                        offset: p.offset(),
                    }
                    .into())
                }
            };
            first = false;
            let coef = if p.at_basis() { Expr::one() } else { p.term()? };
            let idx = if p.at_basis() { p.basis_chain()? } else { Vec::new() };
            match degree {
                None => degree = Some(idx.len()),
                Some(d) if d != idx.len() => return Err(Error::InhomogeneousDegree(d, idx.len())),
                _ => {}
            }
            terms.push((idx, if negative { -coef } else { coef }));
        }
        if first {
            return Err(ParseError {
                kind: ParseErrorKind::Syntax("empty form literal".into()),
                offset: 0,
            }
            .into());
        }
        let degree = degree.unwrap_or(0);
        if degree > chart.dim() {
            return Err(Error::DegreeMismatch(format!("degree {degree} exceeds chart dimension {}", chart.dim())));
        }
        Form::from_terms(chart, degree, terms)
    }

    /// Render with coefficients printed in chart order.
    pub fn render(&self) -> String {
        let printer = self.chart.printer();
        if self.degree == 0 {
            return printer.expr(&self.coefficient(&[]));
        }
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, (idx, c)) in self.terms.iter().enumerate() {
            let basis = idx.iter().map(|&j| format!("d{}", self.chart.name(j))).collect::<Vec<_>>().join(" ^ ");
            let (negative, body) = match c.single_term() {
                Some((m, q)) => (q.is_negative(), printer.term_body(m, &q.abs())),
                None => (false, format!("({})", printer.expr(c))),
            };
            let body = if body == "1" { basis } else { format!("{body} {basis}") };
            match (i, negative) {
                (0, true) => out.push_str(&format!("-{body}")),
                (0, false) => out.push_str(&body),
                (_, true) => out.push_str(&format!(" - {body}")),
                (_, false) => out.push_str(&format!(" + {body}")),
            }
        }
        out
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// One antisymmetric component `K_{αβ}`, `α < β`, split into its two sources.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorEntry {
    pub alpha: usize,
    pub beta: usize,
    pub derivative_part: Expr,
    pub connection_part: Expr,
    pub total: Expr,
    pub derivative_verdict: Verdict,
    pub connection_verdict: Verdict,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutatorReport {
    pub chart: Arc<Chart>,
    pub entries: Vec<CommutatorEntry>,
    pub verdict: Verdict,
    pub with_connection: bool,
}

impl CommutatorReport {
    /// `K_{αβ}` for any index pair; antisymmetric, zero on the diagonal.
    pub fn component(&self, alpha: usize, beta: usize) -> Expr {
        if alpha == beta {
            return Expr::zero();
        }
        let (lo, hi, flip) = if alpha < beta { (alpha, beta, false) } else { (beta, alpha, true) };
        let e = self
            .entries
            .iter()
            .find(|e| e.alpha == lo && e.beta == hi)
            .map(|e| e.total.clone())
            .unwrap_or_default();
        if flip {
            -e
        } else {
            e
        }
    }
}

/// Parametrized subset on which a form is examined.
///
/// `map` sends chart coordinates to expressions in the parameter chart's
/// coordinates; constraints are expressions in chart coordinates that must
/// vanish identically after substitution.
#[derive(Clone, Debug, PartialEq)]
pub struct Pseudostructure {
    params: Arc<Chart>,
    map: BTreeMap<String, Expr>,
    constraints: Vec<Expr>,
}

impl Pseudostructure {
    pub fn new(params: Arc<Chart>, map: BTreeMap<String, Expr>, constraints: Vec<Expr>) -> Result<Self> {
        for c in &constraints {
            let value = c.subs(&map).ok_or_else(|| Error::DivisionByZero(format!("constraint `{c}`")))?;
            if !(value.is_zero() || value.together().0.is_zero()) {
                return Err(Error::ConstraintViolated(c.to_string()));
            }
        }
        Ok(Pseudostructure { params, map, constraints })
    }

    pub fn params(&self) -> &Arc<Chart> {
        &self.params
    }

    pub fn map(&self) -> &BTreeMap<String, Expr> {
        &self.map
    }

    pub fn constraints(&self) -> &[Expr] {
        &self.constraints
    }

    /// Identity parametrization of a chart (every coordinate its own parameter).
    pub fn identity(chart: &Arc<Chart>) -> Pseudostructure {
        let map = chart.coords().iter().map(|c| (c.clone(), Expr::sym(c.clone()))).collect();
        Pseudostructure { params: chart.clone(), map, constraints: Vec::new() }
    }
}
