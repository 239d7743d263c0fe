//! Translation into two-sorted first-order logic.
//!
//! A sentence `φ` becomes a formula `tr_φ(w)` with one free world variable,
//! together with a finite theory: each `⊵_X` is a total preorder `ge_X`,
//! and every operand `θ` of a comparison gets a selection function
//! `sel_k(w, ȳ)` (with `ȳ` the free variables of `θ`) that picks a member
//! of the truth set of `θ` whenever it is nonempty, and that agrees between
//! operands with the same truth set. Selection of an empty set is left
//! unconstrained; the comparison clause carries explicit nonemptiness
//! conjuncts instead.

mod structure;
mod tptp;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::{Formula, IndexSet, Signature, SyntaxError, Term, Var};

pub use structure::{relationalize, FolStructure};
pub use tptp::to_tptp;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FolError {
    #[error("only sentences can be translated; free variables: {0}")]
    Open(String),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("symbol {0} is not interpreted")]
    Uninterpreted(String),
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    World,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FVar {
    pub name: String,
    pub sort: Sort,
}

impl FVar {
    fn world(k: usize) -> FVar {
        FVar {
            name: format!("W{k}"),
            sort: Sort::World,
        }
    }

    fn individual(name: String) -> FVar {
        FVar {
            name,
            sort: Sort::Individual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FTerm {
    Var(FVar),
    App(String, Vec<FTerm>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Fol {
    True,
    Pred(String, Vec<FTerm>),
    Eq(FTerm, FTerm),
    Not(Box<Fol>),
    And(Box<Fol>, Box<Fol>),
    Or(Box<Fol>, Box<Fol>),
    Implies(Box<Fol>, Box<Fol>),
    Iff(Box<Fol>, Box<Fol>),
    Exists(FVar, Box<Fol>),
    Forall(FVar, Box<Fol>),
}

impl Fol {
    fn and(a: Fol, b: Fol) -> Fol {
        Fol::And(Box::new(a), Box::new(b))
    }

    fn implies(a: Fol, b: Fol) -> Fol {
        Fol::Implies(Box::new(a), Box::new(b))
    }

    fn forall_all(vars: &[FVar], body: Fol) -> Fol {
        vars.iter()
            .rev()
            .fold(body, |acc, v| Fol::Forall(v.clone(), Box::new(acc)))
    }
}

/// Symbols of the target vocabulary with their argument sorts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FolSignature {
    pub predicates: BTreeMap<String, Vec<Sort>>,
    /// Name to (argument sorts, result sort).
    pub functions: BTreeMap<String, (Vec<Sort>, Sort)>,
}

/// A comparison operand with its selection function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelSymbol {
    pub name: String,
    pub template: Formula,
    pub params: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolTheory {
    pub signature: FolSignature,
    pub source: Signature,
    pub selectors: Vec<SelSymbol>,
    /// Named axioms, in emission order.
    pub axioms: Vec<(String, Fol)>,
    /// `tr_φ` with free world variable `W0`.
    pub goal: Fol,
    pub sentence: Formula,
}

pub fn predicate_symbol(name: &str) -> String {
    format!("p_{name}")
}

pub fn function_symbol(name: &str) -> String {
    format!("f_{name}")
}

pub fn ge_symbol(x: &IndexSet) -> String {
    let parts: Vec<String> = x.members().iter().map(u32::to_string).collect();
    format!("ge_{}", parts.join("_"))
}

fn individual_name(v: Var) -> String {
    format!("X{}", v.0)
}

struct Translator<'a> {
    sig: &'a Signature,
    selectors: Vec<SelSymbol>,
    by_template: BTreeMap<Formula, usize>,
}

impl Translator<'_> {
    fn selector(&mut self, theta: &Formula) -> usize {
        if let Some(&k) = self.by_template.get(theta) {
            return k;
        }
        let k = self.selectors.len();
        self.selectors.push(SelSymbol {
            name: format!("sel_{k}"),
            template: theta.clone(),
            params: theta.free_variables().into_iter().collect(),
        });
        self.by_template.insert(theta.clone(), k);
        k
    }

    fn term(&self, t: &Term, env: &BTreeMap<Var, FTerm>) -> FTerm {
        match t {
            Term::Var(v) => env
                .get(v)
                .cloned()
                .unwrap_or_else(|| FTerm::Var(FVar::individual(individual_name(*v)))),
            Term::App(f, args) => FTerm::App(
                function_symbol(f),
                args.iter().map(|a| self.term(a, env)).collect(),
            ),
        }
    }

    /// `tr_f(w)`. World variables introduced inside are numbered from
    /// `level` upward; `env` renames free individual variables.
    fn tr(&mut self, f: &Formula, w: &FTerm, level: usize, env: &BTreeMap<Var, FTerm>) -> Fol {
        match f {
            Formula::Atom(p, args) => {
                let mut a = vec![w.clone()];
                a.extend(args.iter().map(|t| self.term(t, env)));
                Fol::Pred(predicate_symbol(p), a)
            }
            Formula::Equals(s, t) => Fol::Eq(self.term(s, env), self.term(t, env)),
            Formula::Not(g) => Fol::Not(Box::new(self.tr(g, w, level, env))),
            Formula::And(a, b) => {
                let a = self.tr(a, w, level, env);
                let b = self.tr(b, w, level, env);
                Fol::and(a, b)
            }
            Formula::Exists(v, g) => {
                let name = individual_name(*v);
                let mut inner = env.clone();
                inner.insert(*v, FTerm::Var(FVar::individual(name.clone())));
                Fol::Exists(FVar::individual(name), Box::new(self.tr(g, w, level, &inner)))
            }
            Formula::Succeq(x, a, b) => {
                let nonempty = |t: &mut Self, g: &Formula| {
                    let v = FVar::world(level);
                    let body = t.tr(g, &FTerm::Var(v.clone()), level + 1, env);
                    Fol::Exists(v, Box::new(body))
                };
                let na = nonempty(self, a);
                let nb = nonempty(self, b);
                let sa = self.sel_term(a, w, env);
                let sb = self.sel_term(b, w, env);
                Fol::and(Fol::and(na, nb), Fol::Pred(ge_symbol(x), vec![sa, sb]))
            }
        }
    }

    fn sel_term(&mut self, theta: &Formula, w: &FTerm, env: &BTreeMap<Var, FTerm>) -> FTerm {
        let k = self.selector(theta);
        let s = &self.selectors[k];
        let mut args = vec![w.clone()];
        args.extend(s.params.iter().map(|&v| self.term(&Term::Var(v), env)));
        FTerm::App(s.name.clone(), args)
    }
}

fn preorder_axioms(x: &IndexSet) -> Vec<(String, Fol)> {
    let ge = ge_symbol(x);
    let (a, b, c) = (FVar::world(0), FVar::world(1), FVar::world(2));
    let rel = |p: &FVar, q: &FVar| Fol::Pred(ge.clone(), vec![FTerm::Var(p.clone()), FTerm::Var(q.clone())]);
    vec![
        (format!("{ge}_reflexive"), Fol::forall_all(&[a.clone()], rel(&a, &a))),
        (
            format!("{ge}_transitive"),
            Fol::forall_all(
                &[a.clone(), b.clone(), c.clone()],
                Fol::implies(Fol::and(rel(&a, &b), rel(&b, &c)), rel(&a, &c)),
            ),
        ),
        (
            format!("{ge}_connected"),
            Fol::forall_all(&[a.clone(), b.clone()], Fol::Or(Box::new(rel(&a, &b)), Box::new(rel(&b, &a)))),
        ),
    ]
}

/// Parameters of a selector renamed to `<prefix><i>`.
fn renamed(params: &[Var], prefix: &str) -> (Vec<FVar>, BTreeMap<Var, FTerm>) {
    let vars: Vec<FVar> = (0..params.len())
        .map(|i| FVar::individual(format!("{prefix}{i}")))
        .collect();
    let env = params
        .iter()
        .zip(&vars)
        .map(|(&p, v)| (p, FTerm::Var(v.clone())))
        .collect();
    (vars, env)
}

/// Translates a sentence and generates its theory.
pub fn translate(f: &Formula, sig: &Signature) -> Result<FolTheory, FolError> {
    sig.check(f)?;
    if !f.is_closed() {
        let names: Vec<String> = f.free_variables().iter().map(|v| v.to_string()).collect();
        return Err(FolError::Open(names.join(", ")));
    }
    let mut t = Translator {
        sig,
        selectors: Vec::new(),
        by_template: BTreeMap::new(),
    };
    let w0 = FTerm::Var(FVar::world(0));
    let goal = t.tr(f, &w0, 1, &BTreeMap::new());

    let mut axioms = Vec::new();
    for x in sig.indices() {
        axioms.extend(preorder_axioms(x));
    }
    // Membership. Translating the templates may intern no new selectors:
    // every nested operand was already met while translating the goal.
    let count = t.selectors.len();
    for k in 0..count {
        let s = t.selectors[k].clone();
        let (ys, env) = renamed(&s.params, "Y");
        let w = FVar::world(0);
        let v = FVar::world(1);
        let some = Fol::Exists(v.clone(), Box::new(t.tr(&s.template, &FTerm::Var(v), 2, &env)));
        let mut args = vec![FTerm::Var(w.clone())];
        args.extend(ys.iter().cloned().map(FTerm::Var));
        let chosen = t.tr(&s.template, &FTerm::App(s.name.clone(), args), 1, &env);
        let mut bound = vec![w];
        bound.extend(ys);
        axioms.push((format!("{}_member", s.name), Fol::forall_all(&bound, Fol::implies(some, chosen))));
    }
    // Extensionality for every pair, including a symbol with itself.
    for i in 0..count {
        for j in i..count {
            let (a, b) = (t.selectors[i].clone(), t.selectors[j].clone());
            let (ys, env_a) = renamed(&a.params, "Y");
            let (zs, env_b) = renamed(&b.params, "Z");
            let w = FVar::world(0);
            let v = FVar::world(1);
            let same_set = Fol::Forall(
                v.clone(),
                Box::new(Fol::Iff(
                    Box::new(t.tr(&a.template, &FTerm::Var(v.clone()), 2, &env_a)),
                    Box::new(t.tr(&b.template, &FTerm::Var(v), 2, &env_b)),
                )),
            );
            let app = |s: &SelSymbol, vars: &[FVar]| {
                let mut args = vec![FTerm::Var(w.clone())];
                args.extend(vars.iter().cloned().map(FTerm::Var));
                FTerm::App(s.name.clone(), args)
            };
            let body = Fol::implies(same_set, Fol::Eq(app(&a, &ys), app(&b, &zs)));
            let mut bound = vec![w.clone()];
            bound.extend(ys.iter().cloned());
            bound.extend(zs.iter().cloned());
            axioms.push((format!("{}_{}_extensional", a.name, b.name), Fol::forall_all(&bound, body)));
        }
    }
    debug_assert_eq!(t.selectors.len(), count);

    let mut signature = FolSignature::default();
    for (p, &arity) in sig.predicates() {
        let mut sorts = vec![Sort::World];
        sorts.extend(std::iter::repeat(Sort::Individual).take(arity));
        signature.predicates.insert(predicate_symbol(p), sorts);
    }
    for x in sig.indices() {
        signature
            .predicates
            .insert(ge_symbol(x), vec![Sort::World, Sort::World]);
    }
    for (f, &arity) in sig.functions() {
        signature.functions.insert(
            function_symbol(f),
            (vec![Sort::Individual; arity], Sort::Individual),
        );
    }
    for s in &t.selectors {
        let mut sorts = vec![Sort::World];
        sorts.extend(std::iter::repeat(Sort::Individual).take(s.params.len()));
        signature.functions.insert(s.name.clone(), (sorts, Sort::World));
    }
    let _ = t.sig;
    Ok(FolTheory {
        signature,
        source: sig.clone(),
        selectors: t.selectors,
        axioms,
        goal,
        sentence: f.clone(),
    })
}

impl fmt::Display for FTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FTerm::Var(v) => f.write_str(&v.name),
            FTerm::App(name, args) => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    fn sig() -> Signature {
        Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap()
    }

    #[test]
    fn non_modal_sentence_has_no_selectors() {
        let f = parse_formula("exists x P(x)", &sig()).unwrap();
        let t = translate(&f, &sig()).unwrap();
        assert!(t.selectors.is_empty());
        assert_eq!(t.axioms.len(), 3);
        assert_eq!(
            t.goal,
            Fol::Exists(
                FVar::individual("X0".into()),
                Box::new(Fol::Pred(
                    "p_P".into(),
                    vec![FTerm::Var(FVar::world(0)), FTerm::Var(FVar::individual("X0".into()))]
                ))
            )
        );
    }

    #[test]
    fn parameters_follow_free_variables() {
        let f = parse_formula("exists x (P(x) >[1] forall y P(y))", &sig()).unwrap();
        let t = translate(&f, &sig()).unwrap();
        let inventory: Vec<(Formula, Vec<Var>)> = t
            .selectors
            .iter()
            .map(|s| (s.template.clone(), s.params.clone()))
            .collect();
        assert_eq!(inventory.len(), 2);
        assert_eq!(inventory[0], (Formula::pred1("P", 0), vec![Var(0)]));
        assert!(inventory[1].1.is_empty());
        // Three preorder axioms, two memberships, three extensionality pairs.
        assert_eq!(t.axioms.len(), 8);
    }

    #[test]
    fn translation_preserves_boolean_structure() {
        let s = sig();
        let a = parse_formula("exists x P(x)", &s).unwrap();
        let b = parse_formula("(true >=[1] true)", &s).unwrap();
        let ta = translate(&a, &s).unwrap().goal;
        let tb = translate(&b, &s).unwrap().goal;
        let both = translate(&Formula::and(a.clone(), b.clone()), &s).unwrap().goal;
        assert_eq!(both, Fol::and(ta.clone(), tb));
        let not = translate(&Formula::not(a), &s).unwrap().goal;
        assert_eq!(not, Fol::Not(Box::new(ta)));
    }

    #[test]
    fn open_input_is_rejected() {
        let f = parse_formula("P(x)", &sig()).unwrap();
        assert!(matches!(translate(&f, &sig()), Err(FolError::Open(_))));
    }
}
