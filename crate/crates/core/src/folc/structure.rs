//! Finite two-sorted structures and the relational reading of preorder models.

use std::collections::BTreeMap;

use super::{function_symbol, ge_symbol, predicate_symbol, FTerm, Fol, FolError, FolTheory, Sort};
use crate::eval::{Compiled, Evaluator, RankOracle};
use crate::model::PreorderModel;

#[derive(Debug, Clone, PartialEq, Eq)]
struct Relation {
    sorts: Vec<Sort>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Function {
    sorts: Vec<Sort>,
}

/// A finite interpretation of a target vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolStructure {
    pub worlds: usize,
    pub individuals: usize,
    predicates: BTreeMap<String, Relation>,
    functions: BTreeMap<String, Function>,
    predicate_ids: BTreeMap<String, usize>,
    function_ids: BTreeMap<String, usize>,
    relation_tables: Vec<Vec<bool>>,
    function_tables: Vec<Vec<usize>>,
}

impl FolStructure {
    pub fn new(worlds: usize, individuals: usize) -> Self {
        FolStructure {
            worlds,
            individuals,
            predicates: BTreeMap::new(),
            functions: BTreeMap::new(),
            predicate_ids: BTreeMap::new(),
            function_ids: BTreeMap::new(),
            relation_tables: Vec::new(),
            function_tables: Vec::new(),
        }
    }

    fn size(&self, s: Sort) -> usize {
        match s {
            Sort::World => self.worlds,
            Sort::Individual => self.individuals,
        }
    }

    fn table_len(&self, sorts: &[Sort]) -> usize {
        sorts.iter().map(|&s| self.size(s)).product()
    }

    fn decode(&self, sorts: &[Sort], mut code: usize) -> Vec<usize> {
        let mut out = vec![0; sorts.len()];
        for (i, &s) in sorts.iter().enumerate().rev() {
            out[i] = code % self.size(s);
            code /= self.size(s);
        }
        out
    }

    /// Interprets a predicate by its characteristic function.
    pub fn define_predicate(&mut self, name: &str, sorts: Vec<Sort>, mut f: impl FnMut(&[usize]) -> bool) {
        let holds = (0..self.table_len(&sorts))
            .map(|c| f(&self.decode(&sorts, c)))
            .collect();
        let id = *self.predicate_ids.entry(name.to_string()).or_insert(self.relation_tables.len());
        if id == self.relation_tables.len() {
            self.relation_tables.push(Vec::new());
        }
        self.relation_tables[id] = holds;
        self.predicates.insert(name.to_string(), Relation { sorts });
    }

    pub fn define_function(&mut self, name: &str, sorts: Vec<Sort>, mut f: impl FnMut(&[usize]) -> usize) {
        let values = (0..self.table_len(&sorts))
            .map(|c| f(&self.decode(&sorts, c)))
            .collect();
        let id = *self.function_ids.entry(name.to_string()).or_insert(self.function_tables.len());
        if id == self.function_tables.len() {
            self.function_tables.push(Vec::new());
        }
        self.function_tables[id] = values;
        self.functions.insert(name.to_string(), Function { sorts });
    }

    fn compile_term(&self, t: &FTerm, scope: &[&str]) -> Result<CTerm, FolError> {
        match t {
            FTerm::Var(v) => scope
                .iter()
                .rposition(|n| *n == v.name)
                .map(CTerm::Var)
                .ok_or_else(|| FolError::Unbound(v.name.clone())),
            FTerm::App(name, args) => {
                let f = self
                    .functions
                    .get(name)
                    .ok_or_else(|| FolError::Uninterpreted(name.clone()))?;
                let id = self.function_ids[name];
                let args = args
                    .iter()
                    .map(|a| self.compile_term(a, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(CTerm::App(id, self.strides(&f.sorts), args))
            }
        }
    }

    fn strides(&self, sorts: &[Sort]) -> Vec<usize> {
        let mut out = vec![1; sorts.len()];
        for i in (0..sorts.len().saturating_sub(1)).rev() {
            out[i] = out[i + 1] * self.size(sorts[i + 1]);
        }
        out
    }

    fn compile<'a>(&self, f: &'a Fol, scope: &mut Vec<&'a str>) -> Result<CFol, FolError> {
        let bin = |c: fn(Box<CFol>, Box<CFol>) -> CFol, a: &'a Fol, b: &'a Fol, scope: &mut Vec<&'a str>| {
            Ok::<_, FolError>(c(Box::new(self.compile(a, scope)?), Box::new(self.compile(b, scope)?)))
        };
        Ok(match f {
            Fol::True => CFol::True,
            Fol::Pred(name, args) => {
                let r = self
                    .predicates
                    .get(name)
                    .ok_or_else(|| FolError::Uninterpreted(name.clone()))?;
                let args = args
                    .iter()
                    .map(|a| self.compile_term(a, scope))
                    .collect::<Result<Vec<_>, _>>()?;
                CFol::Pred(self.predicate_ids[name], self.strides(&r.sorts), args)
            }
            Fol::Eq(a, b) => CFol::Eq(self.compile_term(a, scope)?, self.compile_term(b, scope)?),
            Fol::Not(g) => CFol::Not(Box::new(self.compile(g, scope)?)),
            Fol::And(a, b) => bin(CFol::And, a, b, scope)?,
            Fol::Or(a, b) => bin(CFol::Or, a, b, scope)?,
            Fol::Implies(a, b) => bin(CFol::Implies, a, b, scope)?,
            Fol::Iff(a, b) => bin(CFol::Iff, a, b, scope)?,
            Fol::Exists(v, g) | Fol::Forall(v, g) => {
                scope.push(&v.name);
                let body = self.compile(g, scope);
                scope.pop();
                CFol::Quant(matches!(f, Fol::Exists(..)), self.size(v.sort), Box::new(body?))
            }
        })
    }

    fn value(&self, t: &CTerm, env: &[usize]) -> usize {
        match t {
            CTerm::Var(i) => env[*i],
            CTerm::App(id, strides, args) => {
                let code: usize = args.iter().zip(strides).map(|(a, s)| self.value(a, env) * s).sum();
                self.function_tables[*id][code]
            }
        }
    }

    fn truth(&self, f: &CFol, env: &mut Vec<usize>) -> bool {
        match f {
            CFol::True => true,
            CFol::Pred(id, strides, args) => {
                let code: usize = args.iter().zip(strides).map(|(a, s)| self.value(a, env) * s).sum();
                self.relation_tables[*id][code]
            }
            CFol::Eq(a, b) => self.value(a, env) == self.value(b, env),
            CFol::Not(g) => !self.truth(g, env),
            CFol::And(a, b) => self.truth(a, env) && self.truth(b, env),
            CFol::Or(a, b) => self.truth(a, env) || self.truth(b, env),
            CFol::Implies(a, b) => !self.truth(a, env) || self.truth(b, env),
            CFol::Iff(a, b) => self.truth(a, env) == self.truth(b, env),
            CFol::Quant(exists, size, body) => {
                let mut found = !exists;
                for a in 0..*size {
                    env.push(a);
                    let r = self.truth(body, env);
                    env.pop();
                    if r == *exists {
                        found = *exists;
                        break;
                    }
                }
                found
            }
        }
    }

    /// Truth of `f` under `env`, a list of variable bindings (later entries
    /// shadow earlier ones).
    pub fn holds(&self, f: &Fol, env: &[(String, usize)]) -> Result<bool, FolError> {
        let mut scope: Vec<&str> = env.iter().map(|(n, _)| n.as_str()).collect();
        let c = self.compile(f, &mut scope)?;
        Ok(self.truth(&c, &mut env.iter().map(|&(_, a)| a).collect()))
    }

    /// Truth of the translated sentence at every world.
    pub fn goal_truth(&self, theory: &FolTheory) -> Result<Vec<bool>, FolError> {
        let c = self.compile(&theory.goal, &mut vec!["W0"])?;
        Ok((0..self.worlds).map(|w| self.truth(&c, &mut vec![w])).collect())
    }

    /// Names of the axioms of `theory` false in this structure.
    pub fn failed_axioms(&self, theory: &FolTheory) -> Result<Vec<String>, FolError> {
        let mut out = Vec::new();
        for (name, ax) in &theory.axioms {
            let c = self.compile(ax, &mut Vec::new())?;
            if !self.truth(&c, &mut Vec::new()) {
                out.push(name.clone());
            }
        }
        Ok(out)
    }
}

/// Formulas with variables resolved to environment positions and symbols
/// to table indices.
enum CTerm {
    Var(usize),
    App(usize, Vec<usize>, Vec<CTerm>),
}

enum CFol {
    True,
    Pred(usize, Vec<usize>, Vec<CTerm>),
    Eq(CTerm, CTerm),
    Not(Box<CFol>),
    And(Box<CFol>, Box<CFol>),
    Or(Box<CFol>, Box<CFol>),
    Implies(Box<CFol>, Box<CFol>),
    Iff(Box<CFol>, Box<CFol>),
    Quant(bool, usize, Box<CFol>),
}

/// The structure a preorder model induces on the vocabulary of `theory`.
/// Each selection function applies the model's selector to the truth set of
/// its operand under the given parameters; on an empty truth set it returns
/// the first world.
pub fn relationalize(m: &PreorderModel, theory: &FolTheory) -> Result<FolStructure, FolError> {
    let problems = m.validate();
    if !problems.is_empty() {
        return Err(FolError::InvalidModel(problems));
    }
    let s = &m.structure;
    let sig = s.signature();
    sig.check(&theory.sentence)?;
    let mut out = FolStructure::new(s.world_len(), s.domain_len());

    for (p, &arity) in theory.source.predicates() {
        let mut sorts = vec![Sort::World];
        sorts.extend(std::iter::repeat(Sort::Individual).take(arity));
        out.define_predicate(&predicate_symbol(p), sorts, |a| s.holds(p, a[0], &a[1..]));
    }
    for (f, &arity) in theory.source.functions() {
        let id = s.function_id(f).ok_or_else(|| FolError::Uninterpreted(f.clone()))?;
        out.define_function(&function_symbol(f), vec![Sort::Individual; arity], |a| {
            s.apply(id, s.tuple_code(a)).expect("total function")
        });
    }
    for x in theory.source.indices() {
        let pos = sig
            .index_position(x)
            .ok_or_else(|| FolError::Uninterpreted(ge_symbol(x)))?;
        let rank = &m.ranks[pos];
        out.define_predicate(&ge_symbol(x), vec![Sort::World, Sort::World], |a| rank[a[0]] >= rank[a[1]]);
    }

    let mut prog = Compiled::new(sig);
    let nodes = theory
        .selectors
        .iter()
        .map(|sel| prog.add(&sel.template))
        .collect::<Result<Vec<_>, _>>()?;
    let mut ev = Evaluator::new(&prog, s, RankOracle::from_preorder(m));
    let slots: BTreeMap<_, _> = (0..prog.slot_count()).map(|k| (prog.slot_var(k), k)).collect();
    for (sel, &node) in theory.selectors.iter().zip(&nodes) {
        let mut sorts = vec![Sort::World];
        sorts.extend(std::iter::repeat(Sort::Individual).take(sel.params.len()));
        out.define_function(&sel.name, sorts, |a| {
            for (v, &e) in sel.params.iter().zip(&a[1..]) {
                ev.set_slot(slots[v], e);
            }
            let set = ev.denote(node);
            if set == 0 {
                0
            } else {
                m.selector.select(a[0], set).expect("valid selector")
            }
        });
    }
    Ok(out)
}
