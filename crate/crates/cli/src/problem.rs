//! Problem files: JSON documents naming charts, forms, connections,
//! pseudostructures, relations, characteristic problems and case inputs.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use skewforms::cases::{FanSpec, GasDynamicsInput};
use skewforms::characteristics::{FirstOrderPde, HamiltonJacobi};
use skewforms::relations::EvolutionaryRelation;
use skewforms::{parse_with, Chart, Connection, Expr, Form, ParseContext, Pseudostructure};

pub const SCHEMA: u32 = 1;

#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

macro_rules! bail {
    ($($arg:tt)*) => { return Err(InputError(format!($($arg)*))) };
}

pub type Result<T> = std::result::Result<T, InputError>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub schema: u32,
    #[serde(default)]
    pub chart: Option<Vec<String>>,
    #[serde(default)]
    pub functions: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub forms: BTreeMap<String, String>,
    #[serde(default)]
    pub connections: BTreeMap<String, ConnectionSpec>,
    #[serde(default)]
    pub pseudostructures: BTreeMap<String, PseudostructureSpec>,
    #[serde(default)]
    pub relations: BTreeMap<String, RelationSpec>,
    #[serde(default)]
    pub pde: Option<PdeSpec>,
    #[serde(default)]
    pub hj: Option<HjSpec>,
    #[serde(default)]
    pub fan: Option<FanSpecFile>,
    #[serde(default)]
    pub integration: Option<IntegrationSpec>,
    #[serde(default)]
    pub case: Option<CaseSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionEntry {
    pub rho: usize,
    pub mu: usize,
    pub nu: usize,
    pub value: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSpec {
    #[serde(default)]
    pub entries: Vec<ConnectionEntry>,
    #[serde(default)]
    pub metric: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudostructureSpec {
    #[serde(default)]
    pub identity: bool,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub map: BTreeMap<String, String>,
    #[serde(default)]
    pub constraints: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub omega: String,
    #[serde(default)]
    pub psi: Option<String>,
    #[serde(default)]
    pub connection: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdeSpec {
    pub x: Vec<String>,
    #[serde(default = "default_u")]
    pub u: String,
    pub p: Vec<String>,
    #[serde(rename = "F")]
    pub f: String,
}

fn default_u() -> String {
    "u".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HjSpec {
    #[serde(default = "default_time")]
    pub time: String,
    pub x: Vec<String>,
    pub p: Vec<String>,
    #[serde(rename = "E")]
    pub e: String,
}

fn default_time() -> String {
    "t".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FanSpecFile {
    pub parameter: String,
    pub range: [f64; 2],
    pub count: usize,
    pub initial: Vec<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrationSpec {
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case", deny_unknown_fields)]
pub enum CaseSpec {
    Thermodynamics {
        #[serde(default = "default_cv")]
        c_v: String,
        #[serde(rename = "R", default = "default_r")]
        r: String,
    },
    GasDynamics {
        #[serde(rename = "U")]
        u: [String; 3],
        #[serde(default = "zero_string")]
        h0: String,
        #[serde(rename = "F", default = "zero3")]
        f: [String; 3],
        #[serde(rename = "T", default = "one_string")]
        t: String,
        #[serde(default)]
        unsteady: bool,
        #[serde(default)]
        normals: Vec<[String; 3]>,
    },
    Electromagnetic {
        profile: String,
    },
    HamiltonJacobi {
        #[serde(rename = "E")]
        e: String,
    },
}

fn default_cv() -> String {
    "c_v".into()
}
fn default_r() -> String {
    "R".into()
}
fn zero_string() -> String {
    "0".into()
}
fn one_string() -> String {
    "1".into()
}
fn zero3() -> [String; 3] {
    ["0".into(), "0".into(), "0".into()]
}

/// A problem file with its chart and parse context resolved.
pub struct Problem {
    pub file: ProblemFile,
    pub chart: Option<Arc<Chart>>,
    pub ctx: ParseContext,
}

fn describe_json_error(e: &serde_json::Error) -> String {
    e.to_string()
}

impl Problem {
    pub fn from_json(text: &str) -> Result<Problem> {
        let raw: serde_json::Value =
            serde_json::from_str(text).map_err(|e| InputError(format!("invalid JSON: {}", describe_json_error(&e))))?;
        match raw.get("schema").and_then(|v| v.as_u64()) {
            Some(v) if v == SCHEMA as u64 => {}
            Some(v) => bail!("unsupported schema version {v} (expected {SCHEMA})"),
            None => bail!("missing integer field `schema`"),
        }
        let file: ProblemFile =
            serde_json::from_value(raw).map_err(|e| InputError(format!("invalid problem file: {e}")))?;
        Problem::new(file)
    }

    pub fn inline(chart: Option<Vec<String>>, functions: BTreeMap<String, Vec<String>>) -> Result<Problem> {
        Problem::new(ProblemFile { schema: SCHEMA, chart, functions, ..Default::default() })
    }

    fn new(file: ProblemFile) -> Result<Problem> {
        if file.schema != SCHEMA {
            bail!("unsupported schema version {} (expected {SCHEMA})", file.schema);
        }
        let chart = match &file.chart {
            Some(names) => Some(Chart::new(names).map_err(|e| InputError(e.to_string()))?),
            None => None,
        };
        let mut ctx = ParseContext::new();
        for (name, deps) in &file.functions {
            if !is_identifier(name) {
                bail!("function name `{name}` is not an identifier");
            }
            ctx.declare(name.clone(), deps.clone());
        }
        Ok(Problem { file, chart, ctx })
    }

    pub fn chart(&self) -> Result<&Arc<Chart>> {
        self.chart.as_ref().ok_or_else(|| InputError("the problem has no `chart`".into()))
    }

    pub fn expr(&self, what: &str, text: &str) -> Result<Expr> {
        parse_with(text, &self.ctx).map_err(|e| InputError(format!("{what}: {e} in `{text}`")))
    }

    /// A named form, or a literal on the problem chart.
    pub fn form(&self, name_or_literal: &str) -> Result<Form> {
        let chart = self.chart()?;
        let (what, text) = match self.file.forms.get(name_or_literal) {
            Some(text) => (format!("form `{name_or_literal}`"), text.as_str()),
            None => ("form literal".to_string(), name_or_literal),
        };
        Form::parse(chart, text, &self.ctx).map_err(|e| InputError(format!("{what}: {e} in `{text}`")))
    }

    /// The form selected by `--form`, else `omega`, else the only form.
    pub fn default_form(&self, selected: Option<&str>) -> Result<Form> {
        if let Some(s) = selected {
            return self.form(s);
        }
        if self.file.forms.contains_key("omega") {
            return self.form("omega");
        }
        match self.file.forms.len() {
            1 => self.form(self.file.forms.keys().next().expect("one form")),
            0 => bail!("no form given (use --form)"),
            _ => bail!("several forms defined; choose one with --form"),
        }
    }

    pub fn connection(&self, name: &str) -> Result<Connection> {
        let chart = self.chart()?;
        let spec = self.file.connections.get(name).ok_or_else(|| InputError(format!("unknown connection `{name}`")))?;
        let n = chart.dim();
        let conn = match (&spec.metric, spec.entries.is_empty()) {
            (Some(_), false) => bail!("connection `{name}`: give either `entries` or `metric`, not both"),
            (Some(rows), true) => {
                let g = rows
                    .iter()
                    .map(|r| r.iter().map(|s| self.expr(&format!("metric of `{name}`"), s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Connection::from_metric(chart, g)
            }
            (None, _) => {
                let mut entries = Vec::new();
                for e in &spec.entries {
                    if [e.rho, e.mu, e.nu].iter().any(|&i| i == 0 || i > n) {
                        bail!("connection `{name}`: indices are 1-based and at most {n}");
                    }
                    entries.push((e.rho - 1, e.mu - 1, e.nu - 1, self.expr(&format!("connection `{name}`"), &e.value)?));
                }
                Connection::from_entries(chart, entries)
            }
        };
        conn.map_err(|e| InputError(format!("connection `{name}`: {e}")))
    }

    pub fn pseudostructure(&self, name: &str) -> Result<Pseudostructure> {
        let chart = self.chart()?;
        let spec =
            self.file.pseudostructures.get(name).ok_or_else(|| InputError(format!("unknown pseudostructure `{name}`")))?;
        if spec.identity {
            if !spec.parameters.is_empty() || !spec.map.is_empty() || !spec.constraints.is_empty() {
                bail!("pseudostructure `{name}`: `identity` excludes other fields");
            }
            return Ok(Pseudostructure::identity(chart));
        }
        if spec.parameters.is_empty() {
            bail!("pseudostructure `{name}` needs `parameters`");
        }
        let params = Chart::new(&spec.parameters).map_err(|e| InputError(format!("pseudostructure `{name}`: {e}")))?;
        let mut map = BTreeMap::new();
        for (coord, text) in &spec.map {
            let known = chart.index_of(coord).is_some()
                || self.file.pseudostructures.values().any(|other| other.parameters.contains(coord));
            if !known {
                bail!("pseudostructure `{name}` maps `{coord}`, which is not a chart coordinate");
            }
            map.insert(coord.clone(), self.expr(&format!("pseudostructure `{name}`"), text)?);
        }
        let constraints = spec
            .constraints
            .iter()
            .map(|c| self.expr(&format!("constraint of `{name}`"), c))
            .collect::<Result<Vec<_>>>()?;
        Pseudostructure::new(params, map, constraints).map_err(|e| InputError(format!("pseudostructure `{name}`: {e}")))
    }

    pub fn relation(&self, name: Option<&str>, form: Option<&str>) -> Result<(String, EvolutionaryRelation)> {
        let name = match (name, form) {
            (Some(n), _) => n.to_string(),
            (None, Some(f)) => return Ok((f.to_string(), EvolutionaryRelation::new(self.form(f)?))),
            (None, None) => match self.file.relations.len() {
                1 => self.file.relations.keys().next().expect("one relation").clone(),
                0 => return Ok(("omega".into(), EvolutionaryRelation::new(self.default_form(None)?))),
                _ => bail!("several relations defined; choose one with --relation"),
            },
        };
        let spec = self.file.relations.get(&name).ok_or_else(|| InputError(format!("unknown relation `{name}`")))?;
        let mut rel = EvolutionaryRelation::new(self.form(&spec.omega)?);
        if let Some(psi) = &spec.psi {
            rel = rel.with_potential(self.form(psi)?).map_err(|e| InputError(format!("relation `{name}`: {e}")))?;
        }
        if let Some(c) = &spec.connection {
            rel = rel.with_connection(self.connection(c)?).map_err(|e| InputError(format!("relation `{name}`: {e}")))?;
        }
        Ok((name, rel))
    }

    pub fn pde(&self) -> Result<Option<FirstOrderPde>> {
        let Some(spec) = &self.file.pde else { return Ok(None) };
        let f = self.expr("pde F", &spec.f)?;
        FirstOrderPde::new(spec.x.clone(), spec.u.clone(), spec.p.clone(), f)
            .map(Some)
            .map_err(|e| InputError(format!("pde: {e}")))
    }

    pub fn hj(&self) -> Result<Option<HamiltonJacobi>> {
        let Some(spec) = &self.file.hj else { return Ok(None) };
        let e = self.expr("hj E", &spec.e)?;
        HamiltonJacobi::new(spec.time.clone(), spec.x.clone(), spec.p.clone(), e)
            .map(Some)
            .map_err(|e| InputError(format!("hj: {e}")))
    }

    pub fn fan(&self) -> Result<Option<FanSpec>> {
        let Some(spec) = &self.file.fan else { return Ok(None) };
        if spec.count == 0 {
            bail!("fan: `count` must be positive");
        }
        let initial = spec.initial.iter().map(|s| self.expr("fan initial state", s)).collect::<Result<Vec<_>>>()?;
        Ok(Some(FanSpec { parameter: spec.parameter.clone(), lo: spec.range[0], hi: spec.range[1], count: spec.count, initial }))
    }

    pub fn gas_input(
        &self,
        u: &[String; 3],
        h0: &str,
        f: &[String; 3],
        t: &str,
        unsteady: bool,
        normals: &[[String; 3]],
    ) -> Result<GasDynamicsInput> {
        let v3 = |what: &str, v: &[String; 3]| -> Result<[Expr; 3]> {
            Ok([self.expr(what, &v[0])?, self.expr(what, &v[1])?, self.expr(what, &v[2])?])
        };
        Ok(GasDynamicsInput {
            velocity: v3("U", u)?,
            h0: self.expr("h0", h0)?,
            force: v3("F", f)?,
            temperature: self.expr("T", t)?,
            unsteady,
            normals: normals.iter().map(|n| v3("normal", n)).collect::<Result<Vec<_>>>()?,
        })
    }

    /// Resolve every named entity; returns counts per section.
    pub fn validate(&self) -> Result<BTreeMap<&'static str, usize>> {
        for name in self.file.forms.keys() {
            self.form(name)?;
        }
        for name in self.file.connections.keys() {
            self.connection(name)?;
        }
        for name in self.file.pseudostructures.keys() {
            self.pseudostructure(name)?;
        }
        for name in self.file.relations.keys() {
            self.relation(Some(name), None)?;
        }
        self.pde()?;
        let hj = self.hj()?;
        if let Some(fan) = self.fan()? {
            let state_len = match (&hj, &self.file.pde) {
                (Some(h), _) => Some(2 * h.xs.len() + 1),
                (None, Some(p)) => Some(2 * p.x.len() + 1),
                _ => None,
            };
            if let Some(n) = state_len {
                if fan.initial.len() != n {
                    bail!("fan: {} initial expressions for a state of length {n}", fan.initial.len());
                }
            }
        }
        if let Some(case) = &self.file.case {
            match case {
                CaseSpec::Thermodynamics { c_v, r } => {
                    for s in [c_v, r] {
                        if !is_identifier(s) {
                            bail!("case: `{s}` is not a symbol name");
                        }
                    }
                }
                CaseSpec::GasDynamics { u, h0, f, t, unsteady, normals } => {
                    self.gas_input(u, h0, f, t, *unsteady, normals)?;
                }
                CaseSpec::Electromagnetic { profile } => {
                    self.expr("profile", profile)?;
                }
                CaseSpec::HamiltonJacobi { e } => {
                    self.expr("E", e)?;
                    if self.file.fan.is_none() {
                        bail!("case hamilton_jacobi needs a `fan`");
                    }
                }
            }
        }
        let mut counts = BTreeMap::new();
        counts.insert("forms", self.file.forms.len());
        counts.insert("connections", self.file.connections.len());
        counts.insert("pseudostructures", self.file.pseudostructures.len());
        counts.insert("relations", self.file.relations.len());
        counts.insert("pde", usize::from(self.file.pde.is_some()));
        counts.insert("hj", usize::from(self.file.hj.is_some()));
        counts.insert("fan", usize::from(self.file.fan.is_some()));
        counts.insert("case", usize::from(self.file.case.is_some()));
        Ok(counts)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
