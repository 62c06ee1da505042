use std::cmp::Reverse;

use num_traits::{One, Signed};

use super::parse::arg_label;
use super::{Atom, Expr, Monomial, Rational};

/// Deterministic printer. Symbols listed in `order` (normally the chart)
/// sort first in that order; everything else sorts lexicographically.
/// Output is accepted by the parser and reparses to the same expression.
#[derive(Clone, Debug, Default)]
pub struct Printer {
    order: Vec<String>,
}

type AtomKey = (u8, usize, String);

impl Printer {
    pub fn with_order<S: AsRef<str>>(order: &[S]) -> Self {
        Printer { order: order.iter().map(|s| s.as_ref().to_string()).collect() }
    }

    pub fn expr(&self, e: &Expr) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = e.terms().map(|(m, c)| (self.monomial_key(m), m, c)).collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out = String::new();
        for (i, (_, m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let body = self.term_body(m, &c.abs());
            match (i, neg) {
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (0, false) => out.push_str(&body),
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    /// Single term printed without its sign.
    pub(crate) fn term_body(&self, m: &Monomial, abs_coef: &Rational) -> String {
        if m.is_one() {
            return abs_coef.to_string();
        }
        let mut factors: Vec<_> = m.factors().map(|(a, e)| (self.atom_key(a), a, e)).collect();
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let body = factors
            .iter()
            .map(|(_, a, e)| {
                let s = self.atom(a);
                if *e == 1 {
                    s
                } else {
                    format!("{s}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*");
        if abs_coef.is_one() {
            body
        } else {
            format!("{abs_coef}*{body}")
        }
    }

    pub fn atom(&self, a: &Atom) -> String {
        match a {
            Atom::Sym(s) => s.clone(),
            Atom::Call(f, arg) => format!("{}({})", f.name(), self.expr(arg)),
            Atom::Group(g) => format!("({})", self.expr(g)),
            Atom::Opaque(op) => {
                let mut name = op.name.clone();
                for &d in &op.derivs {
                    name.push('_');
                    name.push_str(&arg_label(&op.args, d));
                }
                let args = op.args.iter().map(|x| self.expr(x)).collect::<Vec<_>>().join(", ");
                format!("{name}({args})")
            }
        }
    }

    fn atom_key(&self, a: &Atom) -> AtomKey {
        match a {
            Atom::Sym(s) => {
                let rank = self.order.iter().position(|o| o == s).unwrap_or(usize::MAX);
                (0, rank, s.clone())
            }
            Atom::Call(..) => (1, 0, self.atom(a)),
            Atom::Opaque(..) => (2, 0, self.atom(a)),
            Atom::Group(..) => (3, 0, self.atom(a)),
        }
    }

    fn monomial_key(&self, m: &Monomial) -> (bool, Vec<(AtomKey, Reverse<i64>)>) {
        let mut key: Vec<_> = m.factors().map(|(a, e)| (self.atom_key(a), Reverse(e))).collect();
        key.sort();
        (m.is_one(), key)
    }
}
