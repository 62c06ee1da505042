//! Exact symbolic scalar expressions.
//!
//! An [`Expr`] is always kept in normal form: a sum of monomials with exact
//! rational coefficients, where each monomial is a product of [`Atom`]s raised
//! to nonzero integer powers. Products of sums are expanded on construction,
//! like terms are collected, and zero coefficients are dropped, so structural
//! equality of two `Expr` values is the canonical zero test.
//!
//! Sums raised to negative powers are kept as [`Atom::Group`] factors with
//! their content (rational coefficient and common monomial) pulled out. They
//! are only combined over a common denominator on demand, see
//! [`Expr::together`].

mod calculus;
mod eval;
mod parse;
mod print;
mod zero;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use eval::{Bindings, CompiledExpr, Env, EvalError};
pub use parse::{parse, parse_with, ParseContext, ParseError, ParseErrorKind};
pub(crate) use parse::Parser;
pub use print::Printer;
pub use zero::{Verdict, ZeroTest};

/// Exact rational number used for all coefficients.
pub type Rational = BigRational;

pub(crate) fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub(crate) fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Built-in elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Ln,
    Exp,
    Sin,
    Cos,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Ln => "ln",
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "ln" => Some(Func::Ln),
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    pub(crate) fn apply_f64(self, x: f64) -> Result<f64, EvalError> {
        match self {
            Func::Ln if x <= 0.0 => Err(EvalError::Domain(format!("ln of nonpositive value {x}"))),
            Func::Ln => Ok(x.ln()),
            Func::Exp => Ok(x.exp()),
            Func::Sin => Ok(x.sin()),
            Func::Cos => Ok(x.cos()),
        }
    }
}

/// Application of a user-declared opaque function, possibly differentiated.
///
/// `derivs` is the sorted multiset of argument positions the function has
/// been differentiated by, so `f_x(x, t)` is `Opaque { name: "f", args: [x, t],
/// derivs: [0] }`. Mixed partials commute.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Opaque {
    pub name: String,
    pub args: Vec<Expr>,
    pub derivs: Vec<usize>,
}

impl Opaque {
    pub fn new(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Opaque { name: name.into(), args, derivs: Vec::new() }
    }

    pub(crate) fn differentiated(&self, arg: usize) -> Opaque {
        let mut derivs = self.derivs.clone();
        let pos = derivs.partition_point(|&d| d <= arg);
        derivs.insert(pos, arg);
        Opaque { name: self.name.clone(), args: self.args.clone(), derivs }
    }
}

/// Irreducible factor of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    /// Variable or named symbolic constant.
    Sym(String),
    Call(Func, Expr),
    Opaque(Opaque),
    /// A sum of at least two terms, content-normalized. Only ever carries a
    /// negative exponent; positive powers of sums are expanded.
    Group(Expr),
}

impl Atom {
    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::Sym(s) => {
                out.insert(s.clone());
            }
            Atom::Call(_, e) | Atom::Group(e) => e.collect_symbols(out),
            Atom::Opaque(op) => op.args.iter().for_each(|a| a.collect_symbols(out)),
        }
    }

    fn collect_opaque_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::Sym(_) => {}
            Atom::Call(_, e) | Atom::Group(e) => e.collect_opaque_names(out),
            Atom::Opaque(op) => {
                out.insert(op.name.clone());
                op.args.iter().for_each(|a| a.collect_opaque_names(out));
            }
        }
    }

    fn contains_symbol(&self, name: &str) -> bool {
        match self {
            Atom::Sym(s) => s == name,
            Atom::Call(_, e) | Atom::Group(e) => e.contains_symbol(name),
            Atom::Opaque(op) => op.args.iter().any(|a| a.contains_symbol(name)),
        }
    }
}

/// Product of atoms with nonzero integer exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(BTreeMap<Atom, i64>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(BTreeMap::new())
    }

    pub fn atom(atom: Atom, exp: i64) -> Self {
        let mut m = BTreeMap::new();
        if exp != 0 {
            m.insert(atom, exp);
        }
        Monomial(m)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&Atom, i64)> {
        self.0.iter().map(|(a, &e)| (a, e))
    }

    pub fn exponent(&self, atom: &Atom) -> i64 {
        self.0.get(atom).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, &e) in &other.0 {
            let slot = out.entry(a.clone()).or_insert(0);
            *slot += e;
            if *slot == 0 {
                out.remove(a);
            }
        }
        Monomial(out)
    }

    /// Exponent-wise division; may produce negative exponents.
    pub(crate) fn div(&self, other: &Monomial) -> Monomial {
        let inv = Monomial(other.0.iter().map(|(a, &e)| (a.clone(), -e)).collect());
        self.mul(&inv)
    }

    pub(crate) fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().all(|(a, &e)| other.exponent(a) >= e)
    }

    pub(crate) fn degree(&self) -> i64 {
        self.0.values().sum()
    }

    pub(crate) fn without(&self, atom: &Atom) -> Monomial {
        let mut m = self.0.clone();
        m.remove(atom);
        Monomial(m)
    }

    pub(crate) fn with_exponent(&self, atom: &Atom, exp: i64) -> Monomial {
        let mut m = self.0.clone();
        if exp == 0 {
            m.remove(atom);
        } else {
            m.insert(atom.clone(), exp);
        }
        Monomial(m)
    }

    fn has_negative(&self) -> bool {
        self.0.values().any(|&e| e < 0)
    }
}

/// Normalized exact scalar expression.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Expr::constant(Rational::one())
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::constant(rat_frac(n, d))
    }

    pub fn constant(q: Rational) -> Self {
        Expr::term(q, Monomial::one())
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Expr::term(Rational::one(), Monomial::atom(Atom::Sym(name.into()), 1))
    }

    pub fn term(coef: Rational, mono: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(mono, coef);
        }
        Expr { terms }
    }

    /// Opaque function application `name(args...)`.
    pub fn opaque(name: impl Into<String>, args: Vec<Expr>) -> Self {
        Expr::from_atom(Atom::Opaque(Opaque::new(name, args)))
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        // constant folding at the usual special points
        if arg.is_zero() {
            return match f {
                Func::Exp | Func::Cos => Expr::one(),
                Func::Sin => Expr::zero(),
                Func::Ln => Expr::from_atom(Atom::Call(f, arg)),
            };
        }
        if f == Func::Ln && arg.is_one() {
            return Expr::zero();
        }
        Expr::from_atom(Atom::Call(f, arg))
    }

    pub fn ln(arg: Expr) -> Self {
        Expr::call(Func::Ln, arg)
    }

    pub fn exp(arg: Expr) -> Self {
        Expr::call(Func::Exp, arg)
    }

    pub fn sin(arg: Expr) -> Self {
        Expr::call(Func::Sin, arg)
    }

    pub fn cos(arg: Expr) -> Self {
        Expr::call(Func::Cos, arg)
    }

    pub(crate) fn from_atom(atom: Atom) -> Self {
        Expr::term(Rational::one(), Monomial::atom(atom, 1))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|q| q.is_one())
    }

    /// The value if this is a rational constant (including zero).
    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The symbol name if this expression is exactly one bare symbol.
    pub fn as_symbol(&self) -> Option<&str> {
        let (m, c) = self.single_term()?;
        if !c.is_one() || m.len() != 1 {
            return None;
        }
        match m.factors().next() {
            Some((Atom::Sym(s), 1)) => Some(s),
            _ => None,
        }
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of the first term in canonical order; used to fix the
    /// scale of factors that are only determined up to a constant.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next()
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    pub fn opaque_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_opaque_names(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                a.collect_symbols(out);
            }
        }
    }

    fn collect_opaque_names(&self, out: &mut BTreeSet<String>) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                a.collect_opaque_names(out);
            }
        }
    }

    pub fn contains_symbol(&self, name: &str) -> bool {
        self.terms.keys().any(|m| m.factors().any(|(a, _)| a.contains_symbol(name)))
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        if q.is_zero() {
            return Expr::zero();
        }
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect() }
    }

    fn add_term(&mut self, mono: Monomial, coef: Rational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.get_mut(&mono) {
            Some(c) => {
                *c += coef;
                if c.is_zero() {
                    self.terms.remove(&mono);
                }
            }
            None => {
                self.terms.insert(mono, coef);
            }
        }
    }

    fn add_ref(&self, other: &Expr) -> Expr {
        let (mut big, small) = if self.terms.len() >= other.terms.len() {
            (self.clone(), other)
        } else {
            (other.clone(), self)
        };
        for (m, c) in &small.terms {
            big.add_term(m.clone(), c.clone());
        }
        big
    }

    fn mul_ref(&self, other: &Expr) -> Expr {
        let mut out = Expr::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    /// Integer power. Positive powers of sums are expanded. Fails only for a
    /// negative power of zero.
    pub fn powi(&self, k: i64) -> Option<Expr> {
        if k == 0 {
            return Some(Expr::one());
        }
        if k > 0 {
            let mut base = self.clone();
            let mut acc = Expr::one();
            let mut n = k;
            while n > 0 {
                if n & 1 == 1 {
                    acc = &acc * &base;
                }
                n >>= 1;
                if n > 0 {
                    base = &base * &base;
                }
            }
            return Some(acc);
        }
        if self.is_zero() {
            return None;
        }
        if let Some((m, c)) = self.single_term() {
            return Some(monomial_power(c, m, k));
        }
        // a genuine sum: pull out content, keep the rest as a group atom
        let (content, mono, primitive) = self.content();
        let group = Expr::term(Rational::one(), Monomial::atom(Atom::Group(primitive), k));
        let content_pow = pow_rational(&content, k);
        let mono_pow = monomial_power(&Rational::one(), &mono, k);
        Some((&mono_pow * &group).scale(&content_pow))
    }

    pub fn recip(&self) -> Option<Expr> {
        self.powi(-1)
    }

    /// Division; `None` when the divisor is structurally zero.
    pub fn checked_div(&self, other: &Expr) -> Option<Expr> {
        Some(self * &other.recip()?)
    }

    /// Splits a multi-term sum as `content * mono * primitive`, where `mono` is
    /// the common monomial factor and `primitive` has leading coefficient 1.
    fn content(&self) -> (Rational, Monomial, Expr) {
        let atoms: BTreeSet<&Atom> = self.terms.keys().flat_map(|m| m.0.keys()).collect();
        let mut common = BTreeMap::new();
        for atom in atoms {
            // grouped sums must keep negative exponents, never factor them out
            if matches!(atom, Atom::Group(_)) {
                continue;
            }
            let lo = self.terms.keys().map(|m| m.exponent(atom)).min().unwrap_or(0);
            if lo != 0 {
                common.insert(atom.clone(), lo);
            }
        }
        let common = Monomial(common);
        let mut reduced = Expr::zero();
        for (m, c) in &self.terms {
            reduced.add_term(m.div(&common), c.clone());
        }
        let first = reduced.terms.values().next().cloned().unwrap_or_else(Rational::one);
        let primitive = reduced.scale(&first.recip());
        (first, common, primitive)
    }

    /// Simultaneous substitution of symbols. Fails only if a substitution
    /// sends a denominator to zero.
    pub fn substitute(&self, map: &dyn Fn(&str) -> Option<Expr>) -> Option<Expr> {
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::constant(c.clone());
            for (a, e) in m.factors() {
                let base = match a {
                    Atom::Sym(s) => map(s).unwrap_or_else(|| Expr::sym(s.clone())),
                    Atom::Call(f, arg) => Expr::call(*f, arg.substitute(map)?),
                    Atom::Opaque(op) => {
                        let args = op
                            .args
                            .iter()
                            .map(|x| x.substitute(map))
                            .collect::<Option<Vec<_>>>()?;
                        Expr::from_atom(Atom::Opaque(Opaque {
                            name: op.name.clone(),
                            args,
                            derivs: op.derivs.clone(),
                        }))
                    }
                    Atom::Group(g) => g.substitute(map)?,
                };
                term = &term * &base.powi(e)?;
            }
            out = &out + &term;
        }
        Some(out)
    }

    /// Substitute from a name → expression map.
    pub fn subs(&self, map: &BTreeMap<String, Expr>) -> Option<Expr> {
        self.substitute(&|s| map.get(s).cloned())
    }

    /// Combine over a common denominator, returning `(numerator, denominator)`
    /// with both free of negative exponents. The denominator is a product of
    /// the atoms (including grouped sums) that appeared with negative powers.
    pub fn together(&self) -> (Expr, Expr) {
        let mut den: BTreeMap<Atom, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in m.factors() {
                if e < 0 {
                    let slot = den.entry(a.clone()).or_insert(0);
                    *slot = (*slot).max(-e);
                }
            }
        }
        if den.is_empty() {
            return (self.clone(), Expr::one());
        }
        let den_mono = Monomial(den);
        let mut num = Expr::zero();
        for (m, c) in &self.terms {
            num = &num + &expand_monomial(c, &m.mul(&den_mono));
        }
        (num, expand_monomial(&Rational::one(), &den_mono))
    }

    /// True when no factor carries a negative exponent.
    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| !m.has_negative())
    }

    /// Exact polynomial division treating atoms as indeterminates. Returns
    /// `None` when `divisor` does not divide `self` exactly.
    pub fn exact_div(&self, divisor: &Expr) -> Option<Expr> {
        if divisor.is_zero() {
            return None;
        }
        if let Some((m, c)) = divisor.single_term() {
            let inv = Expr::term(c.recip(), Monomial::one().div(m));
            return Some(self * &inv);
        }
        if !self.is_polynomial() || !divisor.is_polynomial() {
            return None;
        }
        let (lead_m, lead_c) = divisor.grlex_leading()?;
        let mut rem = self.clone();
        let mut quot = Expr::zero();
        let limit = 10_000usize;
        for _ in 0..limit {
            let Some((rm, rc)) = rem.grlex_leading() else {
                return Some(quot);
            };
            if !lead_m.divides(&rm) {
                return None;
            }
            let t = Expr::term(&rc / &lead_c, rm.div(&lead_m));
            quot = &quot + &t;
            rem = &rem - &(&t * divisor);
        }
        None
    }

    fn grlex_leading(&self) -> Option<(Monomial, Rational)> {
        self.terms
            .iter()
            .max_by(|(a, _), (b, _)| grlex_cmp(a, b))
            .map(|(m, c)| (m.clone(), c.clone()))
    }
}

/// Graded lexicographic order, a monomial order on nonnegative exponents.
fn grlex_cmp(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        let atoms: BTreeSet<&Atom> = a.0.keys().chain(b.0.keys()).collect();
        for atom in atoms {
            let c = a.exponent(atom).cmp(&b.exponent(atom));
            if c != std::cmp::Ordering::Equal {
                return c;
            }
        }
        std::cmp::Ordering::Equal
    })
}

fn pow_rational(q: &Rational, k: i64) -> Rational {
    if k >= 0 {
        num_traits::pow(q.clone(), k as usize)
    } else {
        num_traits::pow(q.recip(), k.unsigned_abs() as usize)
    }
}

/// `(c * m)^k`, expanding any grouped sum whose exponent turns positive.
fn monomial_power(c: &Rational, m: &Monomial, k: i64) -> Expr {
    let scaled = Monomial(m.0.iter().map(|(a, &e)| (a.clone(), e * k)).collect());
    expand_monomial(&pow_rational(c, k), &scaled)
}

/// Build an expression from a coefficient and monomial, expanding grouped
/// sums that carry positive exponents.
fn expand_monomial(c: &Rational, m: &Monomial) -> Expr {
    let mut plain = BTreeMap::new();
    let mut out = Expr::one();
    for (a, &e) in &m.0 {
        match a {
            Atom::Group(g) if e > 0 => {
                out = &out * &g.powi(e).expect("positive power");
            }
            _ => {
                plain.insert(a.clone(), e);
            }
        }
    }
    &out * &Expr::term(c.clone(), Monomial(plain))
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::constant(q)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer::default().expr(self))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer::default().atom(self))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(&Expr, &Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                (&self).$method(rhs)
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                self.$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| a.add_ref(b));
binop!(Sub, sub, |a, b| a.add_ref(&-b));
binop!(Mul, mul, |a, b| a.mul_ref(b));

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::zero(), |acc, e| &acc + &e)
    }
}

impl std::iter::Product for Expr {
    fn product<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        iter.fold(Expr::one(), |acc, e| &acc * &e)
    }
}
