use std::fmt;

use super::{Formula, SurfaceFormula, Term};

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) => {
                write!(f, "{name}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
        }
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, args: &[Term]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// True when the printed form ends inside a quantifier scope, so that a
/// following binary connective would be swallowed by the quantifier body.
fn open_tail(sf: &SurfaceFormula) -> bool {
    match sf {
        SurfaceFormula::Exists(..) | SurfaceFormula::Forall(..) => true,
        SurfaceFormula::Not(g) => open_tail(g),
        _ => false,
    }
}

fn binary(
    f: &mut fmt::Formatter<'_>,
    op: &str,
    a: &SurfaceFormula,
    b: &SurfaceFormula,
) -> fmt::Result {
    if open_tail(a) {
        write!(f, "(({a}) {op} {b})")
    } else {
        write!(f, "({a} {op} {b})")
    }
}

impl fmt::Display for SurfaceFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurfaceFormula::Atom(p, args) => {
                write!(f, "{p}(")?;
                write_list(f, args)?;
                f.write_str(")")
            }
            SurfaceFormula::Equals(s, t) => write!(f, "({s} = {t})"),
            SurfaceFormula::True => f.write_str("true"),
            SurfaceFormula::False => f.write_str("false"),
            SurfaceFormula::Not(g) => write!(f, "~{g}"),
            SurfaceFormula::And(a, b) => binary(f, "&", a, b),
            SurfaceFormula::Or(a, b) => binary(f, "|", a, b),
            SurfaceFormula::Implies(a, b) => binary(f, "->", a, b),
            SurfaceFormula::Iff(a, b) => binary(f, "<->", a, b),
            SurfaceFormula::Exists(v, g) => write!(f, "exists {v} {g}"),
            SurfaceFormula::Forall(v, g) => write!(f, "forall {v} {g}"),
            SurfaceFormula::Modal(op, x, a, b) => {
                write!(f, "({a} {}[{x}] {b})", op.symbol())
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", SurfaceFormula::from(self))
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, IndexSet, Signature};
    use super::*;

    #[test]
    fn constructor_rendering() {
        let f = Formula::and(Formula::pred1("P", 0), Formula::pred1("Q", 1));
        assert_eq!(f.to_string(), "(P(v0) & Q(v1))");
        let x = IndexSet::new([1, 2]).unwrap();
        let g = Formula::succeq(&x, Formula::pred1("P", 0), Formula::pred1("P", 1));
        assert_eq!(g.to_string(), "(P(v0) >=[1,2] P(v1))");
        assert_eq!(Formula::top().to_string(), "~exists v0 ~(v0 = v0)");
    }

    #[test]
    fn quantified_left_operands_are_wrapped() {
        let sig = Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap();
        let f = Formula::and(
            Formula::exists(0, Formula::pred1("P", 0)),
            Formula::pred1("P", 1),
        );
        let text = f.to_string();
        assert_eq!(text, "((exists v0 P(v0)) & P(v1))");
        assert_eq!(parse_formula(&text, &sig).unwrap(), f);
    }
}
