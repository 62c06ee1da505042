//! Affine connections: torsion, curvature, covariant derivatives of covectors.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Expr, Verdict, ZeroTest};
use crate::forms::Chart;
use crate::linalg;

/// `Γ^ρ_{μν}` on a chart, stored densely, with an optional metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    chart: Arc<Chart>,
    gamma: Vec<Expr>,
    metric: Option<Vec<Vec<Expr>>>,
}

/// Sign used for the connection term of a covector derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariantSign {
    /// `a_{β;α} = ∂a_β/∂x^α + Γ^σ_{βα} a_σ`
    #[default]
    Plus,
    /// `a_{β;α} = ∂a_β/∂x^α − Γ^σ_{βα} a_σ`
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    EuclideanLike,
    TorsionOnly,
    Curved,
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::EuclideanLike => "euclidean-like",
            Classification::TorsionOnly => "torsion-only",
            Classification::Curved => "curved",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyReport {
    pub classification: Classification,
    pub torsion: Verdict,
    pub curvature: Verdict,
}

impl Connection {
    pub fn zero(chart: &Arc<Chart>) -> Connection {
        let n = chart.dim();
        Connection { chart: chart.clone(), gamma: vec![Expr::zero(); n * n * n], metric: None }
    }

    /// Sparse construction from `(ρ, μ, ν, Γ^ρ_{μν})`, zero-based. Repeated
    /// entries add up.
    pub fn from_entries<I>(chart: &Arc<Chart>, entries: I) -> Result<Connection>
    where
        I: IntoIterator<Item = (usize, usize, usize, Expr)>,
    {
        let mut c = Connection::zero(chart);
        let n = chart.dim();
        for (rho, mu, nu, value) in entries {
            if rho >= n || mu >= n || nu >= n {
                return Err(Error::Invalid(format!("connection index ({rho}, {mu}, {nu}) out of range for dimension {n}")));
            }
            let k = c.slot(rho, mu, nu);
            c.gamma[k] = &c.gamma[k] + &value;
        }
        Ok(c)
    }

    /// Levi-Civita connection of a symmetric metric `g_{μν}`:
    /// `Γ^ρ_{μν} = ½ g^{ρλ}(∂_μ g_{λν} + ∂_ν g_{λμ} − ∂_λ g_{μν})`.
    pub fn from_metric(chart: &Arc<Chart>, g: Vec<Vec<Expr>>) -> Result<Connection> {
        let n = chart.dim();
        if g.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: g.len() });
        }
        for i in 0..n {
            if g[i].len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: g[i].len() });
            }
            for j in 0..i {
                if g[i][j] != g[j][i] {
                    return Err(Error::Invalid(format!("metric is not symmetric at ({}, {})", j + 1, i + 1)));
                }
            }
        }
        let inv = linalg::inverse(&g)?;
        let x = |i: usize| chart.name(i);
        let half = Expr::frac(1, 2);
        let mut c = Connection::zero(chart);
        for rho in 0..n {
            for mu in 0..n {
                for nu in mu..n {
                    let mut value = Expr::zero();
                    for lambda in 0..n {
                        if inv[rho][lambda].is_zero() {
                            continue;
                        }
                        let bracket = &(&g[lambda][nu].diff(x(mu)) + &g[lambda][mu].diff(x(nu))) - &g[mu][nu].diff(x(lambda));
                        value = &value + &(&inv[rho][lambda] * &bracket);
                    }
                    let value = &value * &half;
                    let (a, b) = (c.slot(rho, mu, nu), c.slot(rho, nu, mu));
                    c.gamma[a] = value.clone();
                    c.gamma[b] = value;
                }
            }
        }
        c.metric = Some(g);
        Ok(c)
    }

    fn slot(&self, rho: usize, mu: usize, nu: usize) -> usize {
        let n = self.dim();
        (rho * n + mu) * n + nu
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn metric(&self) -> Option<&Vec<Vec<Expr>>> {
        self.metric.as_ref()
    }

    /// `Γ^ρ_{μν}`.
    pub fn gamma(&self, rho: usize, mu: usize, nu: usize) -> Expr {
        self.gamma[self.slot(rho, mu, nu)].clone()
    }

    /// Nonzero entries as `(ρ, μ, ν, Γ)`, zero-based, in index order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Expr)> {
        let n = self.dim();
        let mut out = Vec::new();
        for rho in 0..n {
            for mu in 0..n {
                for nu in 0..n {
                    let g = &self.gamma[self.slot(rho, mu, nu)];
                    if !g.is_zero() {
                        out.push((rho, mu, nu, g.clone()));
                    }
                }
            }
        }
        out
    }

    /// `T^ρ_{μν} = Γ^ρ_{μν} − Γ^ρ_{νμ}`, indexed `[ρ][μ][ν]`.
    pub fn torsion(&self) -> Vec<Vec<Vec<Expr>>> {
        let n = self.dim();
        (0..n)
            .map(|rho| {
                (0..n)
                    .map(|mu| (0..n).map(|nu| &self.gamma(rho, mu, nu) - &self.gamma(rho, nu, mu)).collect())
                    .collect()
            })
            .collect()
    }

    /// `R^μ_{νρσ} = ∂_ρΓ^μ_{νσ} − ∂_σΓ^μ_{νρ} + Γ^μ_{λρ}Γ^λ_{νσ} − Γ^μ_{λσ}Γ^λ_{νρ}`,
    /// indexed `[μ][ν][ρ][σ]`.
    pub fn curvature(&self) -> Vec<Vec<Vec<Vec<Expr>>>> {
        let n = self.dim();
        let mut r = vec![vec![vec![vec![Expr::zero(); n]; n]; n]; n];
        for mu in 0..n {
            for nu in 0..n {
                for rho in 0..n {
                    for sigma in rho + 1..n {
                        let mut v = &self.gamma(mu, nu, sigma).diff(self.chart.name(rho))
                            - &self.gamma(mu, nu, rho).diff(self.chart.name(sigma));
                        for lambda in 0..n {
                            v = &v + &(&self.gamma(mu, lambda, rho) * &self.gamma(lambda, nu, sigma));
                            v = &v - &(&self.gamma(mu, lambda, sigma) * &self.gamma(lambda, nu, rho));
                        }
                        r[mu][nu][sigma][rho] = -v.clone();
                        r[mu][nu][rho][sigma] = v;
                    }
                }
            }
        }
        r
    }

    /// Covariant derivative table `[α][β] = a_{β;α}` of covector components.
    pub fn covariant_derivative_covector(&self, a: &[Expr], sign: CovariantSign) -> Result<Vec<Vec<Expr>>> {
        let n = self.dim();
        if a.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.len() });
        }
        Ok((0..n)
            .map(|alpha| {
                (0..n)
                    .map(|beta| {
                        let conn: Expr = (0..n).map(|s| &self.gamma(s, beta, alpha) * &a[s]).sum();
                        let d = a[beta].diff(self.chart.name(alpha));
                        match sign {
                            CovariantSign::Plus => &d + &conn,
                            CovariantSign::Minus => &d - &conn,
                        }
                    })
                    .collect()
            })
            .collect())
    }

    pub fn classify(&self, zt: &ZeroTest) -> ClassifyReport {
        let torsion = Verdict::all(self.torsion().iter().flatten().flatten().map(|e| zt.check(e)));
        let curvature = Verdict::all(self.curvature().iter().flatten().flatten().flatten().map(|e| zt.check(e)));
        let classification = match (torsion, curvature) {
            (_, Verdict::NonZero) => Classification::Curved,
            (_, Verdict::Unknown) => Classification::Indeterminate,
            (Verdict::Zero, Verdict::Zero) => Classification::EuclideanLike,
            (Verdict::NonZero, Verdict::Zero) => Classification::TorsionOnly,
            (Verdict::Unknown, Verdict::Zero) => Classification::Indeterminate,
        };
        ClassifyReport { classification, torsion, curvature }
    }
}
