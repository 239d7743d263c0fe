//! Signatures, terms and formulas of quantified preference logic.
//!
//! [`Formula`] is the core syntax: atoms, identity, `~`, `&`, `exists` and the
//! binary preference connective `>=[X]`. Everything else (`forall`, `|`,
//! `->`, `<->`, `true`, `false`, strict and converse preference, indifference)
//! lives only in [`SurfaceFormula`] and is removed by [`expand`].

mod lexer;
mod parser;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use parser::{parse, parse_formula, parse_inferring};

/// Words that can never name a predicate or function.
pub const RESERVED: &[&str] = &["exists", "forall", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("lex error at offset {offset}: unexpected character {found:?}")]
    Lex { offset: usize, found: char },
    #[error("parse error at offset {offset}: expected {expected}, found {found}")]
    Unexpected {
        offset: usize,
        expected: String,
        found: String,
    },
    #[error("parse error at offset {offset}: unbalanced parentheses")]
    Unbalanced { offset: usize },
    #[error("parse error at offset {offset}: nested preference connectives need parentheses")]
    NestedModal { offset: usize },
    #[error("unknown predicate {name:?} at offset {offset}")]
    UnknownPredicate { name: String, offset: usize },
    #[error("unknown function {name:?} at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("arity mismatch for {name:?} at offset {offset}: expected {expected}, found {found}")]
    ArityMismatch {
        name: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("index set [{set}] is not in the signature")]
    UnknownIndexSet { set: String, offset: usize },
    #[error("index sets must be nonempty")]
    EmptyIndexSet,
    #[error("invalid signature: {0}")]
    Signature(String),
    #[error("{0}")]
    Embedding(String),
}

/// A member of the family of utility-index sets: a nonempty set of naturals,
/// kept sorted and duplicate free.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexSet(Vec<u32>);

impl IndexSet {
    pub fn new<I: IntoIterator<Item = u32>>(members: I) -> Result<Self, SyntaxError> {
        let set: BTreeSet<u32> = members.into_iter().collect();
        if set.is_empty() {
            return Err(SyntaxError::EmptyIndexSet);
        }
        Ok(IndexSet(set.into_iter().collect()))
    }

    pub fn singleton(i: u32) -> Self {
        IndexSet(vec![i])
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for IndexSet {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut members = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let n = part.parse::<u32>().map_err(|_| SyntaxError::Unexpected {
                offset: 0,
                expected: "natural number".into(),
                found: format!("{part:?}"),
            })?;
            members.push(n);
        }
        IndexSet::new(members)
    }
}

/// The vocabulary `L` (predicates and functions with arities) together with
/// the family `U` of index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    predicates: BTreeMap<String, usize>,
    functions: BTreeMap<String, usize>,
    indices: BTreeSet<IndexSet>,
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Names the parser reads as variables (`x`, `y`, `z`, `v0`, `v1`, ...).
pub(crate) fn is_variable_name(name: &str) -> bool {
    matches!(name, "x" | "y" | "z")
        || (name.len() > 1
            && name.starts_with('v')
            && name[1..].chars().all(|c| c.is_ascii_digit()))
}

impl Signature {
    pub fn new<P, F, I, S1, S2>(predicates: P, functions: F, indices: I) -> Result<Self, SyntaxError>
    where
        P: IntoIterator<Item = (S1, usize)>,
        F: IntoIterator<Item = (S2, usize)>,
        I: IntoIterator<Item = IndexSet>,
        S1: Into<String>,
        S2: Into<String>,
    {
        let predicates: BTreeMap<String, usize> =
            predicates.into_iter().map(|(n, a)| (n.into(), a)).collect();
        let functions: BTreeMap<String, usize> =
            functions.into_iter().map(|(n, a)| (n.into(), a)).collect();
        let indices: BTreeSet<IndexSet> = indices.into_iter().collect();
        if indices.is_empty() {
            return Err(SyntaxError::Signature(
                "the family of index sets must be nonempty".into(),
            ));
        }
        for name in predicates.keys().chain(functions.keys()) {
            if !is_identifier(name) || RESERVED.contains(&name.as_str()) {
                return Err(SyntaxError::Signature(format!(
                    "{name:?} is not a usable symbol name"
                )));
            }
        }
        for name in functions.keys() {
            if is_variable_name(name) {
                return Err(SyntaxError::Signature(format!(
                    "function {name:?} would shadow a variable name"
                )));
            }
            if predicates.contains_key(name) {
                return Err(SyntaxError::Signature(format!(
                    "{name:?} is both a predicate and a function"
                )));
            }
        }
        Ok(Signature {
            predicates,
            functions,
            indices,
        })
    }

    /// Unary predicates only, no functions.
    pub fn monadic(predicates: &[&str], indices: &[IndexSet]) -> Result<Self, SyntaxError> {
        Signature::new(
            predicates.iter().map(|p| (*p, 1)),
            std::iter::empty::<(&str, usize)>(),
            indices.iter().cloned(),
        )
    }

    pub fn predicates(&self) -> &BTreeMap<String, usize> {
        &self.predicates
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn indices(&self) -> &BTreeSet<IndexSet> {
        &self.indices
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        self.predicates.get(name).copied()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    /// The least index set in lexicographic order; used for `box`/`diamond`.
    pub fn designated_index(&self) -> &IndexSet {
        self.indices.iter().next().expect("signature has an index set")
    }

    /// Position of `x` in the canonical order of `U`.
    pub fn index_position(&self, x: &IndexSet) -> Option<usize> {
        self.indices.iter().position(|y| y == x)
    }

    /// Union of two signatures; arities must agree.
    pub fn merge(&self, other: &Signature) -> Result<Signature, SyntaxError> {
        let mut preds = self.predicates.clone();
        for (n, a) in &other.predicates {
            if let Some(b) = preds.insert(n.clone(), *a) {
                if b != *a {
                    return Err(SyntaxError::Signature(format!(
                        "predicate {n:?} used with arities {b} and {a}"
                    )));
                }
            }
        }
        let mut funcs = self.functions.clone();
        for (n, a) in &other.functions {
            if let Some(b) = funcs.insert(n.clone(), *a) {
                if b != *a {
                    return Err(SyntaxError::Signature(format!(
                        "function {n:?} used with arities {b} and {a}"
                    )));
                }
            }
        }
        let indices = self.indices.union(&other.indices).cloned();
        Signature::new(preds, funcs, indices)
    }

    /// Checks symbol usage (names, arities, index sets) of a core formula.
    pub fn check(&self, f: &Formula) -> Result<(), SyntaxError> {
        fn term(sig: &Signature, t: &Term) -> Result<(), SyntaxError> {
            match t {
                Term::Var(_) => Ok(()),
                Term::App(name, args) => {
                    let expected =
                        sig.function_arity(name)
                            .ok_or_else(|| SyntaxError::UnknownFunction {
                                name: name.clone(),
                                offset: 0,
                            })?;
                    if expected != args.len() {
                        return Err(SyntaxError::ArityMismatch {
                            name: name.clone(),
                            expected,
                            found: args.len(),
                            offset: 0,
                        });
                    }
                    args.iter().try_for_each(|a| term(sig, a))
                }
            }
        }
        match f {
            Formula::Atom(name, args) => {
                let expected =
                    self.predicate_arity(name)
                        .ok_or_else(|| SyntaxError::UnknownPredicate {
                            name: name.clone(),
                            offset: 0,
                        })?;
                if expected != args.len() {
                    return Err(SyntaxError::ArityMismatch {
                        name: name.clone(),
                        expected,
                        found: args.len(),
                        offset: 0,
                    });
                }
                args.iter().try_for_each(|a| term(self, a))
            }
            Formula::Equals(s, t) => {
                term(self, s)?;
                term(self, t)
            }
            Formula::Not(g) | Formula::Exists(_, g) => self.check(g),
            Formula::And(a, b) => {
                self.check(a)?;
                self.check(b)
            }
            Formula::Succeq(x, a, b) => {
                if !self.indices.contains(x) {
                    return Err(SyntaxError::UnknownIndexSet {
                        set: x.to_string(),
                        offset: 0,
                    });
                }
                self.check(a)?;
                self.check(b)
            }
        }
    }
}

/// Individual variable `v<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(i: u32) -> Term {
        Term::Var(Var(i))
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// Core formulas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String, Vec<Term>),
    Equals(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Succeq(IndexSet, Box<Formula>, Box<Formula>),
}

// Constructors. The derived ones spell out the abbreviations in core syntax
// and are what `expand` uses.
impl Formula {
    pub fn atom(pred: &str, args: Vec<Term>) -> Formula {
        Formula::Atom(pred.to_string(), args)
    }

    /// Unary atom over a variable, the most common shape in fixtures.
    pub fn pred1(pred: &str, v: u32) -> Formula {
        Formula::Atom(pred.to_string(), vec![Term::var(v)])
    }

    pub fn equals(s: Term, t: Term) -> Formula {
        Formula::Equals(s, t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn exists(v: u32, f: Formula) -> Formula {
        Formula::Exists(Var(v), Box::new(f))
    }

    pub fn succeq(x: &IndexSet, a: Formula, b: Formula) -> Formula {
        Formula::Succeq(x.clone(), Box::new(a), Box::new(b))
    }

    pub fn forall(v: u32, f: Formula) -> Formula {
        Formula::not(Formula::exists(v, Formula::not(f)))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    pub fn top() -> Formula {
        Formula::forall(0, Formula::equals(Term::var(0), Term::var(0)))
    }

    pub fn bottom() -> Formula {
        Formula::not(Formula::top())
    }

    pub fn succ(x: &IndexSet, a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::succeq(x, a.clone(), b.clone()),
            Formula::not(Formula::succeq(x, b, a)),
        )
    }

    pub fn approx(x: &IndexSet, a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::succeq(x, a.clone(), b.clone()),
            Formula::succeq(x, b, a),
        )
    }

    pub fn preceq(x: &IndexSet, a: Formula, b: Formula) -> Formula {
        Formula::succeq(x, b, a)
    }

    pub fn prec(x: &IndexSet, a: Formula, b: Formula) -> Formula {
        Formula::succ(x, b, a)
    }

    /// Universal closure over the listed variables, outermost first.
    pub fn forall_all(vars: &[u32], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::forall(*v, acc))
    }

    pub fn exists_all(vars: &[u32], f: Formula) -> Formula {
        vars.iter().rev().fold(f, |acc, v| Formula::exists(*v, acc))
    }

    /// Conjunction of a nonempty list, associated to the left.
    pub fn conjunction<I: IntoIterator<Item = Formula>>(parts: I) -> Option<Formula> {
        parts.into_iter().reduce(Formula::and)
    }

    pub fn free_variables(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Formula::Equals(s, t) => {
                s.collect_vars(out);
                t.collect_vars(out);
            }
            Formula::Not(g) => g.collect_free(out),
            Formula::And(a, b) | Formula::Succeq(_, a, b) => {
                a.collect_free(out);
                b.collect_free(out);
            }
            Formula::Exists(v, g) => {
                let mut inner = BTreeSet::new();
                g.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_variables().is_empty()
    }

    pub fn modal_depth(&self) -> usize {
        match self {
            Formula::Atom(..) | Formula::Equals(..) => 0,
            Formula::Not(g) | Formula::Exists(_, g) => g.modal_depth(),
            Formula::And(a, b) => a.modal_depth().max(b.modal_depth()),
            Formula::Succeq(_, a, b) => 1 + a.modal_depth().max(b.modal_depth()),
        }
    }

    /// Largest variable index occurring anywhere (bound or free).
    pub fn max_var(&self) -> Option<u32> {
        fn term(t: &Term) -> Option<u32> {
            match t {
                Term::Var(v) => Some(v.0),
                Term::App(_, args) => args.iter().filter_map(term).max(),
            }
        }
        match self {
            Formula::Atom(_, args) => args.iter().filter_map(term).max(),
            Formula::Equals(s, t) => term(s).max(term(t)),
            Formula::Not(g) => g.max_var(),
            Formula::Exists(v, g) => Some(v.0).max(g.max_var()),
            Formula::And(a, b) | Formula::Succeq(_, a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Predicate names with the arities they are used at.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.walk(&mut |f| {
            if let Formula::Atom(p, args) = f {
                out.insert(p.clone(), args.len());
            }
        });
        out
    }

    /// Index sets mentioned by preference connectives.
    pub fn index_sets(&self) -> BTreeSet<IndexSet> {
        let mut out = BTreeSet::new();
        self.walk(&mut |f| {
            if let Formula::Succeq(x, _, _) = f {
                out.insert(x.clone());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk<'a>(&'a self, visit: &mut impl FnMut(&'a Formula)) {
        visit(self);
        match self {
            Formula::Atom(..) | Formula::Equals(..) => {}
            Formula::Not(g) | Formula::Exists(_, g) => g.walk(visit),
            Formula::And(a, b) | Formula::Succeq(_, a, b) => {
                a.walk(visit);
                b.walk(visit);
            }
        }
    }
}

/// Preference connectives available in the concrete syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModalOp {
    /// `>=`, weak preference (core).
    Succeq,
    /// `>`, strict preference.
    Succ,
    /// `~=`, indifference.
    Approx,
    /// `<=`, converse weak preference.
    Preceq,
    /// `<`, converse strict preference.
    Prec,
}

impl ModalOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ModalOp::Succeq => ">=",
            ModalOp::Succ => ">",
            ModalOp::Approx => "~=",
            ModalOp::Preceq => "<=",
            ModalOp::Prec => "<",
        }
    }
}

/// Parse-tree form admitting every abbreviation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SurfaceFormula {
    Atom(String, Vec<Term>),
    Equals(Term, Term),
    True,
    False,
    Not(Box<SurfaceFormula>),
    And(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Or(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Implies(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Iff(Box<SurfaceFormula>, Box<SurfaceFormula>),
    Exists(Var, Box<SurfaceFormula>),
    Forall(Var, Box<SurfaceFormula>),
    Modal(ModalOp, IndexSet, Box<SurfaceFormula>, Box<SurfaceFormula>),
}

impl From<&Formula> for SurfaceFormula {
    fn from(f: &Formula) -> Self {
        match f {
            Formula::Atom(p, args) => SurfaceFormula::Atom(p.clone(), args.clone()),
            Formula::Equals(s, t) => SurfaceFormula::Equals(s.clone(), t.clone()),
            Formula::Not(g) => SurfaceFormula::Not(Box::new(g.as_ref().into())),
            Formula::And(a, b) => {
                SurfaceFormula::And(Box::new(a.as_ref().into()), Box::new(b.as_ref().into()))
            }
            Formula::Exists(v, g) => SurfaceFormula::Exists(*v, Box::new(g.as_ref().into())),
            Formula::Succeq(x, a, b) => SurfaceFormula::Modal(
                ModalOp::Succeq,
                x.clone(),
                Box::new(a.as_ref().into()),
                Box::new(b.as_ref().into()),
            ),
        }
    }
}

/// Rewrites every abbreviation into core syntax, following the abbreviation
/// table literally (no simplification of double negations).
pub fn expand(sf: &SurfaceFormula) -> Formula {
    match sf {
        SurfaceFormula::Atom(p, args) => Formula::Atom(p.clone(), args.clone()),
        SurfaceFormula::Equals(s, t) => Formula::Equals(s.clone(), t.clone()),
        SurfaceFormula::True => Formula::top(),
        SurfaceFormula::False => Formula::bottom(),
        SurfaceFormula::Not(g) => Formula::not(expand(g)),
        SurfaceFormula::And(a, b) => Formula::and(expand(a), expand(b)),
        SurfaceFormula::Or(a, b) => Formula::or(expand(a), expand(b)),
        SurfaceFormula::Implies(a, b) => Formula::implies(expand(a), expand(b)),
        SurfaceFormula::Iff(a, b) => Formula::iff(expand(a), expand(b)),
        SurfaceFormula::Exists(v, g) => Formula::Exists(*v, Box::new(expand(g))),
        SurfaceFormula::Forall(v, g) => Formula::forall(v.0, expand(g)),
        SurfaceFormula::Modal(op, x, a, b) => {
            let (a, b) = (expand(a), expand(b));
            match op {
                ModalOp::Succeq => Formula::succeq(x, a, b),
                ModalOp::Succ => Formula::succ(x, a, b),
                ModalOp::Approx => Formula::approx(x, a, b),
                ModalOp::Preceq => Formula::preceq(x, a, b),
                ModalOp::Prec => Formula::prec(x, a, b),
            }
        }
    }
}

/// Maps a first-order sentence over the binary relation `relation` into the
/// modal language by replacing each `R(s,t)` with the diamond of
/// `P(s) & Q(t)` at index set `x`.
pub fn kripke_embed(
    f: &Formula,
    relation: &str,
    p: &str,
    q: &str,
    x: &IndexSet,
) -> Result<Formula, SyntaxError> {
    Ok(match f {
        Formula::Atom(name, args) if name == relation && args.len() == 2 => {
            let body = Formula::and(
                Formula::atom(p, vec![args[0].clone()]),
                Formula::atom(q, vec![args[1].clone()]),
            );
            Formula::succeq(x, body.clone(), body)
        }
        Formula::Atom(name, args) => {
            return Err(SyntaxError::Embedding(format!(
                "embedding expects only the binary relation {relation:?}, found {name}/{}",
                args.len()
            )))
        }
        Formula::Equals(..) => f.clone(),
        Formula::Not(g) => Formula::not(kripke_embed(g, relation, p, q, x)?),
        Formula::And(a, b) => Formula::and(
            kripke_embed(a, relation, p, q, x)?,
            kripke_embed(b, relation, p, q, x)?,
        ),
        Formula::Exists(v, g) => Formula::Exists(*v, Box::new(kripke_embed(g, relation, p, q, x)?)),
        Formula::Succeq(..) => {
            return Err(SyntaxError::Embedding(
                "embedding expects a first-order input without preference connectives".into(),
            ))
        }
    })
}
