use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{Atom, Expr, Func, Opaque, Rational};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("opaque function `{0}` has no numeric value")]
    Opaque(String),
    #[error("domain error: {0}")]
    Domain(String),
}

/// Source of numeric values for symbols and opaque applications.
pub trait Env {
    fn symbol(&self, name: &str) -> Option<f64>;

    fn opaque(&self, _op: &Opaque, _args: &[f64]) -> Option<f64> {
        None
    }
}

/// Plain name → value map.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Bindings(pub BTreeMap<String, f64>);

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn insert(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }
}

impl Env for Bindings {
    fn symbol(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

pub(crate) fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

impl Expr {
    pub fn eval(&self, env: &dyn Env) -> Result<f64, EvalError> {
        let mut total = 0.0;
        for (m, c) in self.terms() {
            let mut term = rational_to_f64(c);
            for (atom, e) in m.factors() {
                let v = atom.eval(env)?;
                if e < 0 && v == 0.0 {
                    return Err(EvalError::Domain(format!("division by zero in `{atom}`")));
                }
                term *= v.powi(e as i32);
            }
            total += term;
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(EvalError::Domain("non-finite result".into()))
        }
    }
}

impl Atom {
    fn eval(&self, env: &dyn Env) -> Result<f64, EvalError> {
        match self {
            Atom::Sym(s) => env.symbol(s).ok_or_else(|| EvalError::Unbound(s.clone())),
            Atom::Call(f, arg) => f.apply_f64(arg.eval(env)?),
            Atom::Group(g) => g.eval(env),
            Atom::Opaque(op) => {
                let args = op.args.iter().map(|a| a.eval(env)).collect::<Result<Vec<_>, _>>()?;
                env.opaque(op, &args).ok_or_else(|| EvalError::Opaque(op.name.clone()))
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Slot(usize),
    Sum(Vec<Node>),
    Product(f64, Vec<(Node, i32)>),
    Call(Func, Box<Node>),
}

/// Expression compiled against a fixed slot layout for repeated numeric
/// evaluation (used by the trajectory integrator).
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    root: Node,
}

impl CompiledExpr {
    /// Symbols found in `slots` read from that position; any other symbol
    /// must be bound in `constants`. Opaque functions are rejected.
    pub fn compile<S: AsRef<str>>(
        e: &Expr,
        slots: &[S],
        constants: &BTreeMap<String, f64>,
    ) -> Result<CompiledExpr, EvalError> {
        Ok(CompiledExpr { root: compile_expr(e, slots, constants)? })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        let v = eval_node(&self.root, values)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::Domain("non-finite result".into()))
        }
    }
}

fn compile_expr<S: AsRef<str>>(e: &Expr, slots: &[S], constants: &BTreeMap<String, f64>) -> Result<Node, EvalError> {
    let mut terms = Vec::new();
    for (m, c) in e.terms() {
        let mut factors = Vec::new();
        for (atom, exp) in m.factors() {
            let node = match atom {
                Atom::Sym(s) => match slots.iter().position(|x| x.as_ref() == s) {
                    Some(i) => Node::Slot(i),
                    None => Node::Const(*constants.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?),
                },
                Atom::Call(f, arg) => Node::Call(*f, Box::new(compile_expr(arg, slots, constants)?)),
                Atom::Group(g) => compile_expr(g, slots, constants)?,
                Atom::Opaque(op) => return Err(EvalError::Opaque(op.name.clone())),
            };
            factors.push((node, exp as i32));
        }
        terms.push(Node::Product(rational_to_f64(c), factors));
    }
    Ok(Node::Sum(terms))
}

fn eval_node(node: &Node, values: &[f64]) -> Result<f64, EvalError> {
    Ok(match node {
        Node::Const(v) => *v,
        Node::Slot(i) => values[*i],
        Node::Sum(terms) => {
            let mut acc = 0.0;
            for t in terms {
                acc += eval_node(t, values)?;
            }
            acc
        }
        Node::Product(c, factors) => {
            let mut acc = *c;
            for (f, e) in factors {
                let v = eval_node(f, values)?;
                if *e < 0 && v == 0.0 {
                    return Err(EvalError::Domain("division by zero".into()));
                }
                acc *= v.powi(*e);
            }
            acc
        }
        Node::Call(f, arg) => f.apply_f64(eval_node(arg, values)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    /// ln 2 = 2 atanh(1/3), summed in exact rationals.
    fn ln2_series() -> f64 {
        use crate::expr::rat_frac;
        let third = rat_frac(1, 3);
        let mut sum = rat_frac(0, 1);
        let mut power = third.clone();
        for k in 0..40i64 {
            sum += &power * rat_frac(1, 2 * k + 1);
            power = &power * &third * &third;
        }
        rational_to_f64(&(sum * rat_frac(2, 1)))
    }

    #[test]
    fn ln_of_two() {
        let e = parse("ln(T)").unwrap();
        let v = e.eval(&Bindings::new().set("T", 2.0)).unwrap();
        let oracle = ln2_series();
        assert!((v - oracle).abs() <= f64::EPSILON, "{v} vs {oracle}");
        assert_eq!(v, std::f64::consts::LN_2);
    }

    #[test]
    fn unbound_and_domain_errors() {
        let e = parse("x + y").unwrap();
        assert_eq!(e.eval(&Bindings::new().set("x", 1.0)), Err(EvalError::Unbound("y".into())));
        let e = parse("ln(x)").unwrap();
        assert!(matches!(e.eval(&Bindings::new().set("x", -1.0)), Err(EvalError::Domain(_))));
        let e = parse("1/x").unwrap();
        assert!(matches!(e.eval(&Bindings::new().set("x", 0.0)), Err(EvalError::Domain(_))));
    }

    #[test]
    fn compiled_matches_tree_evaluation() {
        let e = parse("x^2*sin(y) - c/(x + y) + exp(-x)").unwrap();
        let constants: BTreeMap<String, f64> = [("c".to_string(), 0.7)].into();
        let compiled = CompiledExpr::compile(&e, &["x", "y"], &constants).unwrap();
        let b = Bindings::new().set("x", 1.3).set("y", -0.4).set("c", 0.7);
        let direct = e.eval(&b).unwrap();
        let fast = compiled.eval(&[1.3, -0.4]).unwrap();
        assert!((direct - fast).abs() < 1e-14);
        assert!(CompiledExpr::compile(&e, &["x"], &BTreeMap::new()).is_err());
    }
}
