//! Recursive-descent parser for the infix expression grammar.
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := ("-" | "+") unary | power
//! power    := primary ("^" exponent)?
//! exponent := ["-" | "+"] INTEGER | "(" ["-" | "+"] INTEGER ")"
//! primary  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! NUMBER   := DIGITS ["." DIGITS] [("e" | "E") ["-" | "+"] DIGITS]
//! IDENT    := (letter | "_") (letter | digit | "_")*
//! ```
//!
//! Numbers are read exactly (`0.1` is `1/10`). Multiplication is always
//! explicit. Builtin functions are `ln`, `exp`, `sin` and `cos`; any other
//! call must name a function declared in the [`ParseContext`]. A declared
//! function `f` may be referenced with a derivative suffix, `f_x(x, t)` or
//! `f_x_t(x, t)`, where each component names a plain-variable argument or a
//! 1-based argument position (`f_1(x - c*t)`).

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::{Atom, Expr, Func, Opaque, Rational};

/// Declared opaque functions, each with a default dependency list used when
/// the name appears without an argument list.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParseContext {
    functions: BTreeMap<String, Vec<String>>,
}

impl ParseContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, name: impl Into<String>, deps: Vec<String>) {
        self.functions.insert(name.into(), deps);
    }

    pub fn with_function(mut self, name: &str, deps: &[&str]) -> Self {
        self.declare(name, deps.iter().map(|s| s.to_string()).collect());
        self
    }

    pub fn functions(&self) -> &BTreeMap<String, Vec<String>> {
        &self.functions
    }

    fn is_declared(&self, name: &str) -> bool {
        self.functions.contains_key(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownFunction(String),
    NonIntegerExponent,
    DivisionByZero,
}

/// Parse failure with the byte offset of the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownFunction(name) => write!(f, "unknown function `{name}`"),
            ParseErrorKind::NonIntegerExponent => f.write_str("exponent must be an integer literal"),
            ParseErrorKind::DivisionByZero => f.write_str("division by zero"),
        }
    }
}

/// Parse with no declared opaque functions.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    parse_with(text, &ParseContext::default())
}

pub fn parse_with(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let mut p = Parser::new(text, ctx, None)?;
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn syntax(msg: impl Into<String>, offset: usize) -> ParseError {
    ParseError { kind: ParseErrorKind::Syntax(msg.into()), offset }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            chars.next();
            out.push(Token { tok, offset: i });
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut end = i;
            let mut seen_exp = false;
            while let Some(&(j, d)) = chars.peek() {
                let accept = d.is_ascii_digit()
                    || d == '.'
                    || (!seen_exp && (d == 'e' || d == 'E'))
                    || ((d == '-' || d == '+') && seen_exp && matches!(text[..j].chars().last(), Some('e' | 'E')));
                if !accept {
                    break;
                }
                if d == 'e' || d == 'E' {
                    // only an exponent if followed by a digit or sign
                    let rest = &text[j + 1..];
                    let next = rest.chars().next();
                    if !matches!(next, Some(n) if n.is_ascii_digit() || n == '-' || n == '+') {
                        break;
                    }
                    seen_exp = true;
                }
                chars.next();
                end = j + d.len_utf8();
            }
            let lit = &text[start..end];
            let value = parse_number(lit).ok_or_else(|| syntax(format!("malformed number `{lit}`"), start))?;
            out.push(Token { tok: Tok::Num(value), offset: start });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    chars.next();
                    end = j + d.len_utf8();
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(text[start..end].to_string()), offset: start });
            continue;
        }
        return Err(syntax(format!("unexpected character `{c}`"), i));
    }
    out.push(Token { tok: Tok::End, offset: text.len() });
    Ok(out)
}

fn parse_number(lit: &str) -> Option<Rational> {
    let (mantissa, exp) = match lit.find(['e', 'E']) {
        Some(pos) => (&lit[..pos], lit[pos + 1..].parse::<i64>().ok()?),
        None => (lit, 0),
    };
    let (int_part, frac_part) = match mantissa.find('.') {
        Some(pos) => (&mantissa[..pos], &mantissa[pos + 1..]),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if frac_part.contains('.') {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().ok()?;
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, scale.unsigned_abs() as usize))
    };
    Some(value)
}

/// Shared parser state. In form mode (`basis` set) identifiers `d<coord>`
/// are differentials and terminate a coefficient.
pub(crate) struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a ParseContext,
    basis: Option<&'a [String]>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &str, ctx: &'a ParseContext, basis: Option<&'a [String]>) -> Result<Self, ParseError> {
        Ok(Parser { tokens: lex(text)?, pos: 0, ctx, basis })
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        let i = (self.pos + ahead).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    pub(crate) fn offset(&self) -> usize {
        self.tokens[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn at_end(&self) -> bool {
        matches!(self.peek(), Tok::End)
    }

    pub(crate) fn expect_end(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(syntax(format!("unexpected {}", describe(self.peek())), self.offset()))
        }
    }

    /// Coordinate index if `tok` is a differential `d<coord>` in form mode.
    fn basis_index(&self, tok: &Tok) -> Option<usize> {
        let coords = self.basis?;
        let Tok::Ident(name) = tok else { return None };
        let rest = name.strip_prefix('d')?;
        coords.iter().position(|c| c == rest)
    }

    pub(crate) fn at_basis(&self) -> bool {
        self.basis_index(self.peek()).is_some()
    }

    pub(crate) fn eat_sign(&mut self) -> Option<bool> {
        match self.peek() {
            Tok::Plus => {
                self.bump();
                Some(false)
            }
            Tok::Minus => {
                self.bump();
                Some(true)
            }
            _ => None,
        }
    }

    /// `dx ^ dy ^ ...` in form mode, returning coordinate indices in order.
    pub(crate) fn basis_chain(&mut self) -> Result<Vec<usize>, ParseError> {
        let mut out = Vec::new();
        loop {
            let off = self.offset();
            let idx = self
                .basis_index(self.peek())
                .ok_or_else(|| syntax("expected a coordinate differential", off))?;
            self.bump();
            out.push(idx);
            if matches!(self.peek(), Tok::Caret) {
                self.bump();
            } else {
                return Ok(out);
            }
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    /// Multiplicative chain. In form mode it stops in front of a
    /// differential, also swallowing a `*` that joins coefficient and basis.
    pub(crate) fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    if self.basis_index(self.peek_at(1)).is_some() {
                        self.bump();
                        return Ok(acc);
                    }
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    let off = self.bump().offset;
                    let rhs = self.unary()?;
                    acc = acc
                        .checked_div(&rhs)
                        .ok_or(ParseError { kind: ParseErrorKind::DivisionByZero, offset: off })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !matches!(self.peek(), Tok::Caret) {
            return Ok(base);
        }
        let caret = self.bump().offset;
        let k = self.exponent()?;
        if matches!(self.peek(), Tok::Caret) {
            return Err(syntax("chained exponents need parentheses", self.offset()));
        }
        base.powi(k).ok_or(ParseError { kind: ParseErrorKind::DivisionByZero, offset: caret })
    }

    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = matches!(self.peek(), Tok::LParen);
        if paren {
            self.bump();
        }
        let negative = self.eat_sign().unwrap_or(false);
        let off = self.offset();
        let value = match self.bump().tok {
            Tok::Num(q) if q.is_integer() => q.to_integer().to_i64(),
            _ => None,
        };
        let k = value.ok_or(ParseError { kind: ParseErrorKind::NonIntegerExponent, offset: off })?;
        if paren {
            if !matches!(self.peek(), Tok::RParen) {
                return Err(ParseError { kind: ParseErrorKind::NonIntegerExponent, offset: off });
            }
            self.bump();
        }
        Ok(if negative { -k } else { k })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let off = self.offset();
        if self.at_basis() {
            return Err(syntax("differential not allowed inside a coefficient", off));
        }
        match self.bump().tok {
            Tok::Num(q) => Ok(Expr::constant(q)),
            Tok::LParen => {
                let e = self.expr()?;
                if !matches!(self.peek(), Tok::RParen) {
                    return Err(syntax("expected `)`", self.offset()));
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, off),
            other => Err(syntax(format!("unexpected {}", describe(&other)), off)),
        }
    }

    fn identifier(&mut self, name: String, off: usize) -> Result<Expr, ParseError> {
        let call = matches!(self.peek(), Tok::LParen);
        if let Some(f) = Func::from_name(&name) {
            if !call {
                return Err(syntax(format!("`{name}` needs an argument list"), off));
            }
            let args = self.arguments()?;
            if args.len() != 1 {
                return Err(syntax(format!("`{name}` takes one argument"), off));
            }
            return Ok(Expr::call(f, args.into_iter().next().unwrap()));
        }
        let (base, suffix) = match self.resolve_function(&name) {
            Some(r) => r,
            None if call => {
                return Err(ParseError { kind: ParseErrorKind::UnknownFunction(name), offset: off })
            }
            None => return Ok(Expr::sym(name)),
        };
        let args = if call {
            self.arguments()?
        } else {
            let deps = &self.ctx.functions[&base];
            if deps.is_empty() {
                return Err(syntax(format!("`{base}` has no declared dependencies; give arguments"), off));
            }
            deps.iter().map(Expr::sym).collect()
        };
        let mut op = Opaque::new(base, args);
        if let Some(suffix) = suffix {
            for idx in decode_suffix(&suffix, &op.args)
                .ok_or_else(|| syntax(format!("cannot decode derivative suffix `{suffix}`"), off))?
            {
                op = op.differentiated(idx);
            }
        }
        Ok(Expr::from_atom(Atom::Opaque(op)))
    }

    /// Declared base name plus optional derivative suffix.
    fn resolve_function(&self, name: &str) -> Option<(String, Option<String>)> {
        if self.ctx.is_declared(name) {
            return Some((name.to_string(), None));
        }
        self.ctx
            .functions
            .keys()
            .filter_map(|f| {
                let rest = name.strip_prefix(f.as_str())?.strip_prefix('_')?;
                (!rest.is_empty()).then(|| (f.clone(), Some(rest.to_string())))
            })
            .max_by_key(|(f, _)| f.len())
    }

    fn arguments(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.bump(); // (
        let mut args = vec![self.expr()?];
        loop {
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                    args.push(self.expr()?);
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                other => return Err(syntax(format!("expected `,` or `)`, found {}", describe(other)), self.offset())),
            }
        }
    }
}

/// Argument label used in derivative suffixes: the variable name for plain
/// variable arguments, otherwise the 1-based position.
pub(crate) fn arg_label(args: &[Expr], i: usize) -> String {
    match args[i].as_symbol() {
        Some(s) => s.to_string(),
        None => (i + 1).to_string(),
    }
}

fn decode_suffix(suffix: &str, args: &[Expr]) -> Option<Vec<usize>> {
    let mut labels: Vec<(String, usize)> = Vec::new();
    for i in 0..args.len() {
        if let Some(s) = args[i].as_symbol() {
            labels.push((s.to_string(), i));
        }
        labels.push(((i + 1).to_string(), i));
    }
    let mut rest = suffix;
    let mut out = Vec::new();
    while !rest.is_empty() {
        let (label, idx) = labels
            .iter()
            .filter(|(l, _)| rest == l || rest.starts_with(&format!("{l}_")))
            .max_by_key(|(l, _)| l.len())?;
        out.push(*idx);
        rest = &rest[label.len()..];
        rest = rest.strip_prefix('_').unwrap_or(rest);
    }
    Some(out)
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(q) => format!("number `{q}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
        Tok::End => "end of input".into(),
    }
}
