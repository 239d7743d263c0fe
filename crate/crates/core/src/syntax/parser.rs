//! Recursive descent parser for the ASCII formula grammar.
//!
//! Precedence from tightest to loosest: `~`, `&`, `|`, `->`, `<->`. A
//! quantifier may stand wherever a negation operand may, and its body extends
//! as far to the right as possible. Preference connectives only occur inside
//! their own pair of parentheses and never chain.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::lexer::{lex, Tok, Token};
use super::{
    expand, is_variable_name, Formula, IndexSet, ModalOp, Signature, SurfaceFormula, SyntaxError,
    Term, Var,
};

/// Parses `text` against a known signature.
pub fn parse(text: &str, sig: &Signature) -> Result<SurfaceFormula, SyntaxError> {
    let mut p = Parser::new(text, Mode::Strict(sig))?;
    p.top()
}

/// Parses and expands into core syntax.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, SyntaxError> {
    parse(text, sig).map(|sf| expand(&sf))
}

/// Parses without a signature, inferring predicates, functions and index sets
/// from usage. Bare identifiers in term position are variables. When no
/// preference connective occurs the index family defaults to `{{1}}`.
pub fn parse_inferring(text: &str) -> Result<(SurfaceFormula, Signature), SyntaxError> {
    let mut p = Parser::new(text, Mode::Infer(Inferred::default()))?;
    let sf = p.top()?;
    let Mode::Infer(inf) = p.mode else {
        unreachable!()
    };
    let mut indices = inf.indices;
    if indices.is_empty() {
        indices.insert(IndexSet::singleton(1));
    }
    let sig = Signature::new(inf.predicates, inf.functions, indices)?;
    Ok((sf, sig))
}

#[derive(Default)]
struct Inferred {
    predicates: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    indices: BTreeSet<IndexSet>,
}

enum Mode<'a> {
    Strict(&'a Signature),
    Infer(Inferred),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    mode: Mode<'a>,
    vars: HashMap<String, u32>,
    next_var: u32,
}

impl<'a> Parser<'a> {
    fn new(text: &str, mode: Mode<'a>) -> Result<Self, SyntaxError> {
        let toks = lex(text)?;
        // Named variables other than x, y, z get indices above every
        // explicit `v<n>` so the two spellings never collide.
        let max_explicit = toks
            .iter()
            .filter_map(|t| match &t.tok {
                Tok::Ident(s) if s.len() > 1 && is_variable_name(s) => s[1..].parse::<u32>().ok(),
                _ => None,
            })
            .max();
        let next_var = max_explicit.map_or(3, |m| (m + 1).max(3));
        Ok(Parser {
            toks,
            pos: 0,
            mode,
            vars: HashMap::new(),
            next_var,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].offset
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> SyntaxError {
        SyntaxError::Unexpected {
            offset: self.offset(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else if tok == Tok::RParen && *self.peek() == Tok::Eof {
            Err(SyntaxError::Unbalanced {
                offset: self.offset(),
            })
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn top(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let f = self.formula()?;
        match self.peek() {
            Tok::Eof => Ok(f),
            Tok::RParen => Err(SyntaxError::Unbalanced {
                offset: self.offset(),
            }),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn formula(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        self.iff()
    }

    fn iff(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let mut lhs = self.imp()?;
        while *self.peek() == Tok::DArrow {
            self.bump();
            let rhs = self.imp()?;
            lhs = SurfaceFormula::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn imp(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.imp()?;
            return Ok(SurfaceFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let rhs = self.and()?;
            lhs = SurfaceFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let mut lhs = self.neg()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.neg()?;
            lhs = SurfaceFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn neg(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        match self.peek() {
            Tok::Tilde => {
                self.bump();
                Ok(SurfaceFormula::Not(Box::new(self.neg()?)))
            }
            Tok::Ident(s) if s == "exists" || s == "forall" => {
                let universal = s == "forall";
                self.bump();
                let v = self.bound_variable()?;
                let body = Box::new(self.formula()?);
                Ok(if universal {
                    SurfaceFormula::Forall(v, body)
                } else {
                    SurfaceFormula::Exists(v, body)
                })
            }
            _ => self.atom(),
        }
    }

    fn bound_variable(&mut self) -> Result<Var, SyntaxError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Ident(name) if !super::RESERVED.contains(&name.as_str()) => {
                if let Mode::Strict(sig) = &self.mode {
                    if sig.function_arity(&name).is_some() || sig.predicate_arity(&name).is_some()
                    {
                        return Err(SyntaxError::Unexpected {
                            offset,
                            expected: "variable".into(),
                            found: format!("symbol {name:?}"),
                        });
                    }
                }
                self.bump();
                Ok(self.variable(&name))
            }
            _ => Err(self.unexpected("variable")),
        }
    }

    fn variable(&mut self, name: &str) -> Var {
        match name {
            "x" => return Var(0),
            "y" => return Var(1),
            "z" => return Var(2),
            _ => {}
        }
        if is_variable_name(name) {
            if let Ok(n) = name[1..].parse::<u32>() {
                return Var(n);
            }
        }
        if let Some(v) = self.vars.get(name) {
            return Var(*v);
        }
        let v = self.next_var;
        self.next_var += 1;
        self.vars.insert(name.to_string(), v);
        Var(v)
    }

    fn atom(&mut self) -> Result<SurfaceFormula, SyntaxError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let lhs = self.formula()?;
                let op = match self.peek() {
                    Tok::Ge => Some(ModalOp::Succeq),
                    Tok::Gt => Some(ModalOp::Succ),
                    Tok::ApproxOp => Some(ModalOp::Approx),
                    Tok::Le => Some(ModalOp::Preceq),
                    Tok::Lt => Some(ModalOp::Prec),
                    _ => None,
                };
                let Some(op) = op else {
                    self.expect(Tok::RParen, "\")\"")?;
                    return Ok(lhs);
                };
                self.bump();
                let x = self.index_set()?;
                let rhs = self.formula()?;
                if matches!(
                    self.peek(),
                    Tok::Ge | Tok::Gt | Tok::ApproxOp | Tok::Le | Tok::Lt
                ) {
                    return Err(SyntaxError::NestedModal {
                        offset: self.offset(),
                    });
                }
                self.expect(Tok::RParen, "\")\"")?;
                Ok(SurfaceFormula::Modal(op, x, Box::new(lhs), Box::new(rhs)))
            }
            Tok::Ident(name) if name == "true" => {
                self.bump();
                Ok(SurfaceFormula::True)
            }
            Tok::Ident(name) if name == "false" => {
                self.bump();
                Ok(SurfaceFormula::False)
            }
            Tok::Ident(name) => {
                self.bump();
                let args = if *self.peek() == Tok::LParen {
                    self.bump();
                    Some(self.term_list()?)
                } else {
                    None
                };
                if *self.peek() == Tok::Eq {
                    let lhs = self.resolve_term(name, args, offset)?;
                    self.bump();
                    let rhs = self.term()?;
                    return Ok(SurfaceFormula::Equals(lhs, rhs));
                }
                let args = args.unwrap_or_default();
                self.check_predicate(&name, args.len(), offset)?;
                Ok(SurfaceFormula::Atom(name, args))
            }
            Tok::Eof => Err(SyntaxError::Unexpected {
                offset,
                expected: "formula".into(),
                found: "end of input".into(),
            }),
            _ => Err(self.unexpected("formula")),
        }
    }

    fn index_set(&mut self) -> Result<IndexSet, SyntaxError> {
        let offset = self.offset();
        self.expect(Tok::LBrack, "\"[\"")?;
        let mut members = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Nat(n) => {
                    self.bump();
                    members.push(n);
                }
                _ => return Err(self.unexpected("natural number")),
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected("\",\" or \"]\"")),
            }
        }
        let x = IndexSet::new(members)?;
        match &mut self.mode {
            Mode::Strict(sig) => {
                if !sig.indices().contains(&x) {
                    return Err(SyntaxError::UnknownIndexSet {
                        set: x.to_string(),
                        offset,
                    });
                }
            }
            Mode::Infer(inf) => {
                inf.indices.insert(x.clone());
            }
        }
        Ok(x)
    }

    fn term_list(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                _ => {
                    self.expect(Tok::RParen, "\",\" or \")\"")?;
                    return Ok(args);
                }
            }
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Ident(name) if !super::RESERVED.contains(&name.as_str()) => {
                self.bump();
                let args = if *self.peek() == Tok::LParen {
                    self.bump();
                    Some(self.term_list()?)
                } else {
                    None
                };
                self.resolve_term(name, args, offset)
            }
            _ => Err(self.unexpected("term")),
        }
    }

    fn resolve_term(
        &mut self,
        name: String,
        args: Option<Vec<Term>>,
        offset: usize,
    ) -> Result<Term, SyntaxError> {
        match &mut self.mode {
            Mode::Strict(sig) => match (sig.function_arity(&name), args) {
                (Some(expected), args) => {
                    let args = args.unwrap_or_default();
                    if expected != args.len() {
                        return Err(SyntaxError::ArityMismatch {
                            name,
                            expected,
                            found: args.len(),
                            offset,
                        });
                    }
                    Ok(Term::App(name, args))
                }
                (None, Some(_)) => Err(SyntaxError::UnknownFunction { name, offset }),
                (None, None) => {
                    if sig.predicate_arity(&name).is_some() {
                        return Err(SyntaxError::Unexpected {
                            offset,
                            expected: "term".into(),
                            found: format!("predicate {name:?}"),
                        });
                    }
                    Ok(Term::Var(self.variable(&name)))
                }
            },
            Mode::Infer(inf) => match args {
                Some(args) => {
                    if let Some(&expected) = inf.functions.get(&name) {
                        if expected != args.len() {
                            return Err(SyntaxError::ArityMismatch {
                                name,
                                expected,
                                found: args.len(),
                                offset,
                            });
                        }
                    }
                    if inf.predicates.contains_key(&name) || is_variable_name(&name) {
                        return Err(SyntaxError::Unexpected {
                            offset,
                            expected: "function symbol".into(),
                            found: format!("{name:?}"),
                        });
                    }
                    inf.functions.insert(name.clone(), args.len());
                    Ok(Term::App(name, args))
                }
                None => Ok(Term::Var(self.variable(&name))),
            },
        }
    }

    fn check_predicate(&mut self, name: &str, arity: usize, offset: usize) -> Result<(), SyntaxError> {
        match &mut self.mode {
            Mode::Strict(sig) => match sig.predicate_arity(name) {
                Some(expected) if expected == arity => Ok(()),
                Some(expected) => Err(SyntaxError::ArityMismatch {
                    name: name.to_string(),
                    expected,
                    found: arity,
                    offset,
                }),
                None => Err(SyntaxError::UnknownPredicate {
                    name: name.to_string(),
                    offset,
                }),
            },
            Mode::Infer(inf) => {
                if inf.functions.contains_key(name) {
                    return Err(SyntaxError::Unexpected {
                        offset,
                        expected: "predicate".into(),
                        found: format!("function {name:?}"),
                    });
                }
                match inf.predicates.insert(name.to_string(), arity) {
                    Some(expected) if expected != arity => Err(SyntaxError::ArityMismatch {
                        name: name.to_string(),
                        expected,
                        found: arity,
                        offset,
                    }),
                    _ => Ok(()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::new(
            [("P", 1), ("Q", 1), ("G", 2)],
            [("f", 1), ("c", 0)],
            [
                IndexSet::singleton(1),
                IndexSet::singleton(2),
                IndexSet::new([1, 2]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn x(members: &[u32]) -> IndexSet {
        IndexSet::new(members.iter().copied()).unwrap()
    }

    #[test]
    fn optimism_example_parses() {
        let f = parse_formula("exists x (P(x) >[1] forall y P(y))", &sig()).unwrap();
        let expected = Formula::exists(
            0,
            Formula::succ(
                &x(&[1]),
                Formula::pred1("P", 0),
                Formula::forall(1, Formula::pred1("P", 1)),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn true_expands_to_self_identity() {
        let f = parse_formula("true", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::forall(0, Formula::equals(Term::var(0), Term::var(0)))
        );
    }

    #[test]
    fn unbalanced_parenthesis_reports_end_offset() {
        assert_eq!(
            parse("P(x", &sig()).unwrap_err(),
            SyntaxError::Unbalanced { offset: 3 }
        );
        assert!(matches!(
            parse("(P(x) & Q(y)", &sig()).unwrap_err(),
            SyntaxError::Unbalanced { offset: 12 }
        ));
        assert!(matches!(
            parse("P(x))", &sig()).unwrap_err(),
            SyntaxError::Unbalanced { offset: 4 }
        ));
    }

    #[test]
    fn symbol_errors() {
        assert!(matches!(
            parse("R(x)", &sig()),
            Err(SyntaxError::UnknownPredicate { offset: 0, .. })
        ));
        assert!(matches!(
            parse("G(x)", &sig()),
            Err(SyntaxError::ArityMismatch {
                expected: 2,
                found: 1,
                ..
            })
        ));
        assert!(matches!(
            parse("(P(x) >=[3] P(y))", &sig()),
            Err(SyntaxError::UnknownIndexSet { offset: 8, .. })
        ));
        assert!(matches!(
            parse("g(x) = y", &sig()),
            Err(SyntaxError::UnknownFunction { .. })
        ));
        assert!(matches!(
            parse("P(x) # P(y)", &sig()),
            Err(SyntaxError::Lex { offset: 5, .. })
        ));
    }

    #[test]
    fn precedence_levels() {
        let s = sig();
        let f = parse("~P(x) & P(y) | P(z) -> Q(x) <-> Q(y)", &s).unwrap();
        let p = |v| SurfaceFormula::Atom("P".into(), vec![Term::var(v)]);
        let q = |v| SurfaceFormula::Atom("Q".into(), vec![Term::var(v)]);
        let expected = SurfaceFormula::Iff(
            Box::new(SurfaceFormula::Implies(
                Box::new(SurfaceFormula::Or(
                    Box::new(SurfaceFormula::And(
                        Box::new(SurfaceFormula::Not(Box::new(p(0)))),
                        Box::new(p(1)),
                    )),
                    Box::new(p(2)),
                )),
                Box::new(q(0)),
            )),
            Box::new(q(1)),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn quantifier_body_extends_right() {
        let s = sig();
        let f = parse("exists x P(x) & Q(x)", &s).unwrap();
        assert!(matches!(f, SurfaceFormula::Exists(Var(0), ref b) if matches!(**b, SurfaceFormula::And(..))));
        let g = parse("~exists v0 ~(v0 = v0)", &s).unwrap();
        assert_eq!(expand(&g), Formula::top());
    }

    #[test]
    fn index_sugar_is_normalized() {
        let f = parse_formula("(P(x) >=[2,1,2] P(y))", &sig()).unwrap();
        assert_eq!(
            f,
            Formula::succeq(&x(&[1, 2]), Formula::pred1("P", 0), Formula::pred1("P", 1))
        );
    }

    #[test]
    fn nested_modal_requires_parentheses() {
        assert!(matches!(
            parse("(P(x) >=[1] P(y) >=[1] P(z))", &sig()),
            Err(SyntaxError::NestedModal { .. })
        ));
        assert!(parse("((P(x) >=[1] P(y)) >=[1] P(z))", &sig()).is_ok());
    }

    #[test]
    fn terms_with_functions_and_constants() {
        let f = parse_formula("f(x) = c & P(f(c))", &sig()).unwrap();
        let fx = Term::App("f".into(), vec![Term::var(0)]);
        let c = Term::App("c".into(), vec![]);
        assert_eq!(
            f,
            Formula::and(
                Formula::equals(fx, c.clone()),
                Formula::atom("P", vec![Term::App("f".into(), vec![c])])
            )
        );
    }

    #[test]
    fn named_variables_avoid_explicit_indices() {
        let f = parse_formula("forall x1 forall y1 G(x1, v7)", &sig()).unwrap();
        let fv: Vec<u32> = f.free_variables().into_iter().map(|v| v.0).collect();
        assert_eq!(fv, vec![7]);
        assert_eq!(f.max_var(), Some(9));
    }

    #[test]
    fn inferring_collects_the_vocabulary() {
        let (sf, sig) = parse_inferring("forall x (R(x, y) -> (P(x) ~=[1,2] Q(f(x))))").unwrap();
        assert_eq!(sig.predicate_arity("R"), Some(2));
        assert_eq!(sig.predicate_arity("P"), Some(1));
        assert_eq!(sig.function_arity("f"), Some(1));
        assert!(sig.indices().contains(&x(&[1, 2])));
        assert!(matches!(sf, SurfaceFormula::Forall(..)));
        let (_, plain) = parse_inferring("P(x)").unwrap();
        assert_eq!(plain.designated_index(), &IndexSet::singleton(1));
    }
}
