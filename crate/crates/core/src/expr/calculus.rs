use super::{rat, Atom, Expr, Func, Monomial, Rational};

impl Atom {
    /// Partial derivative of the atom itself (exponent 1).
    fn diff(&self, var: &str) -> Expr {
        match self {
            Atom::Sym(s) if s == var => Expr::one(),
            Atom::Sym(_) => Expr::zero(),
            Atom::Call(f, u) => {
                let du = u.diff(var);
                if du.is_zero() {
                    return Expr::zero();
                }
                let outer = match f {
                    Func::Ln => u.recip().unwrap_or_default(),
                    Func::Exp => Expr::exp(u.clone()),
                    Func::Sin => Expr::cos(u.clone()),
                    Func::Cos => -Expr::sin(u.clone()),
                };
                &outer * &du
            }
            Atom::Opaque(op) => op
                .args
                .iter()
                .enumerate()
                .map(|(i, arg)| {
                    let da = arg.diff(var);
                    if da.is_zero() {
                        Expr::zero()
                    } else {
                        &Expr::from_atom(Atom::Opaque(op.differentiated(i))) * &da
                    }
                })
                .sum(),
            Atom::Group(g) => g.diff(var),
        }
    }
}

impl Expr {
    /// Exact partial derivative with respect to `var`.
    ///
    /// Opaque functions differentiate by the chain rule into formal
    /// derivative symbols; arguments that do not mention `var` contribute 0.
    pub fn diff(&self, var: &str) -> Expr {
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            for (atom, e) in m.factors() {
                let da = atom.diff(var);
                if da.is_zero() {
                    continue;
                }
                let rest = Expr::term(c * rat(e), m.with_exponent(atom, e - 1));
                out = &out + &(&rest * &da);
            }
        }
        out
    }

    /// Antiderivative in `var` for expressions that are Laurent polynomials
    /// in `var` with `var`-free coefficients (plus `ln(var)/var` terms).
    /// The constant of integration is zero. Returns `None` otherwise.
    pub fn integrate(&self, var: &str) -> Option<Expr> {
        let x = Atom::Sym(var.to_string());
        let ln_x = Atom::Call(Func::Ln, Expr::sym(var));
        let mut out = Expr::zero();
        for (m, c) in self.terms() {
            let k = m.exponent(&x);
            let rest = m.without(&x);
            let ln_power = rest.exponent(&ln_x);
            let rest_no_ln = rest.without(&ln_x);
            if rest_no_ln.factors().any(|(a, _)| a.contains_symbol(var)) {
                return None;
            }
            let coef = Expr::term(c.clone(), rest_no_ln);
            let piece = match (k, ln_power) {
                (-1, 0) => Expr::ln(Expr::sym(var)),
                (-1, j) if j > 0 => Expr::ln(Expr::sym(var))
                    .powi(j + 1)?
                    .scale(&Rational::new(1.into(), (j + 1).into())),
                (k, 0) => Expr::term(Rational::new(1.into(), (k + 1).into()), Monomial::atom(x.clone(), k + 1)),
                _ => return None,
            };
            out = &out + &(&coef * &piece);
        }
        Some(out)
    }

    /// True when the expression does not depend on any of `vars`.
    pub fn is_free_of<S: AsRef<str>>(&self, vars: &[S]) -> bool {
        vars.iter().all(|v| !self.contains_symbol(v.as_ref()))
    }
}
