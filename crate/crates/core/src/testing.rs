//! Random generators for property tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::connection::Connection;
use crate::expr::Expr;
use crate::forms::{Chart, Form};

/// Chart `x1 … xn`.
pub fn chart(n: usize) -> Arc<Chart> {
    let names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    Chart::new(&names).expect("generated names are distinct")
}

/// Polynomial in the chart coordinates with small integer coefficients and
/// total degree at most `max_degree`.
pub fn polynomial<R: Rng>(rng: &mut R, chart: &Chart, max_degree: u32, max_terms: usize) -> Expr {
    let mut out = Expr::zero();
    for _ in 0..rng.gen_range(0..=max_terms) {
        let degree = rng.gen_range(0..=max_degree);
        let mut term = Expr::int(rng.gen_range(-4..=4));
        for _ in 0..degree {
            let name = chart.coords().choose(rng).expect("chart is not empty");
            term = &term * &Expr::sym(name.clone());
        }
        out = &out + &term;
    }
    out
}

/// Random `degree`-form with polynomial coefficients.
pub fn form<R: Rng>(rng: &mut R, chart: &Arc<Chart>, degree: usize, max_degree: u32) -> Form {
    let n = chart.dim();
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(1..=3) {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        idx.truncate(degree);
        terms.push((idx, polynomial(rng, chart, max_degree, 3)));
    }
    Form::from_terms(chart, degree, terms).expect("indices are in range")
}

/// Connection with sparse polynomial entries; `symmetric` mirrors every
/// entry in its lower indices.
pub fn connection<R: Rng>(rng: &mut R, chart: &Arc<Chart>, symmetric: bool) -> Connection {
    let n = chart.dim();
    let mut entries = Vec::new();
    for _ in 0..rng.gen_range(1..=n * n) {
        let (rho, mu, nu) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
        let value = polynomial(rng, chart, 2, 2);
        if symmetric && mu != nu {
            entries.push((rho, nu, mu, value.clone()));
        }
        entries.push((rho, mu, nu, value));
    }
    Connection::from_entries(chart, entries).expect("indices are in range")
}

/// Square matrix of small rationals.
pub fn rational_matrix<R: Rng>(rng: &mut R, n: usize) -> Vec<Vec<Expr>> {
    (0..n)
        .map(|_| (0..n).map(|_| Expr::frac(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect())
        .collect()
}
