//! Truth sets of formulas in finite models.

mod compile;

use std::collections::HashMap;
use std::convert::Infallible;

use thiserror::Error;

use crate::model::{
    full_mask, Assignment, GeneralizedModel, Model, PreorderModel, Proposition, Selector,
    Structure, UtilityModel,
};
use crate::syntax::{Formula, Signature, SyntaxError};

pub use compile::{Compiled, NodeId};
use compile::{CTerm, Node};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error(transparent)]
    Symbol(#[from] SyntaxError),
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),
}

/// Answers the preference clause: the worlds `w` in `mask` at which the
/// representative of `left` is weakly better than that of `right` for the
/// index set at position `x`. Both propositions are nonempty.
///
/// Search supplies oracles over partially specified models that fail with a
/// description of the missing entry.
pub trait PreferenceOracle {
    type Need;
    fn compare(&self, x: usize, left: u64, right: u64, mask: u64) -> Result<u64, Self::Need>;
}

/// Utility and preorder semantics: a selector plus, per index set, a rank of
/// every world (higher is weakly better). Utilities are turned into dense
/// ranks, which preserves every comparison.
#[derive(Debug, Clone)]
pub struct RankOracle<'a> {
    pub selector: &'a Selector,
    pub levels: Vec<Vec<u32>>,
}

impl<'a> RankOracle<'a> {
    pub fn from_utility(m: &'a UtilityModel) -> Self {
        let p = PreorderModel::from_utility(m);
        RankOracle {
            selector: &m.selector,
            levels: p
                .ranks
                .iter()
                .map(|row| row.iter().map(|r| r.unwrap_or(0)).collect())
                .collect(),
        }
    }

    pub fn from_preorder(m: &'a PreorderModel) -> Self {
        RankOracle {
            selector: &m.selector,
            levels: m
                .ranks
                .iter()
                .map(|row| row.iter().map(|r| r.unwrap_or(0)).collect())
                .collect(),
        }
    }
}

impl PreferenceOracle for RankOracle<'_> {
    type Need = Infallible;

    fn compare(&self, x: usize, left: u64, right: u64, mask: u64) -> Result<u64, Infallible> {
        let levels = &self.levels[x];
        let mut out = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let a = self.selector.select(w, left).expect("valid selector");
            let b = self.selector.select(w, right).expect("valid selector");
            if levels[a] >= levels[b] {
                out |= 1 << w;
            }
        }
        Ok(out)
    }
}

/// Generalized semantics: compare the ranks of the propositions themselves.
#[derive(Debug, Clone, Copy)]
pub struct GeneralizedOracle<'a>(pub &'a GeneralizedModel);

impl PreferenceOracle for GeneralizedOracle<'_> {
    type Need = Infallible;

    fn compare(&self, x: usize, left: u64, right: u64, mask: u64) -> Result<u64, Infallible> {
        let mut out = 0u64;
        let mut rest = mask;
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.0.rank(w, x, left) >= self.0.rank(w, x, right) {
                out |= 1 << w;
            }
        }
        Ok(out)
    }
}

/// Oracle for any complete model.
#[derive(Debug, Clone)]
pub enum ModelOracle<'a> {
    Rank(RankOracle<'a>),
    Generalized(GeneralizedOracle<'a>),
}

impl<'a> ModelOracle<'a> {
    pub fn new(m: &'a Model) -> Self {
        match m {
            Model::Utility(u) => ModelOracle::Rank(RankOracle::from_utility(u)),
            Model::Preorder(p) => ModelOracle::Rank(RankOracle::from_preorder(p)),
            Model::Generalized(g) => ModelOracle::Generalized(GeneralizedOracle(g)),
        }
    }
}

impl PreferenceOracle for ModelOracle<'_> {
    type Need = Infallible;

    fn compare(&self, x: usize, left: u64, right: u64, mask: u64) -> Result<u64, Infallible> {
        match self {
            ModelOracle::Rank(o) => o.compare(x, left, right, mask),
            ModelOracle::Generalized(o) => o.compare(x, left, right, mask),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Memo {
    mask: u64,
    bits: u64,
}

/// Memoizing evaluator for the formulas of one `Compiled` over one structure.
///
/// `prop(node, mask)` is exact on the worlds of `mask` and empty outside it.
/// Boolean structure only asks for the worlds still undecided, and operands
/// of a comparison are always computed on all worlds, so a formula asked at a
/// single world touches the oracle only at that world for its outermost
/// comparisons.
pub struct Evaluator<'c, 's, O> {
    prog: &'c Compiled,
    structure: &'s Structure,
    oracle: O,
    full: u64,
    dsize: usize,
    env: Vec<usize>,
    closed: Vec<Option<Memo>>,
    open: HashMap<(u32, u64), Memo>,
}

impl<'c, 's, O: PreferenceOracle> Evaluator<'c, 's, O> {
    pub fn new(prog: &'c Compiled, structure: &'s Structure, oracle: O) -> Self {
        Evaluator {
            prog,
            structure,
            oracle,
            full: full_mask(structure.world_len()),
            dsize: structure.domain_len(),
            env: vec![0; prog.slot_count()],
            closed: vec![None; prog.len()],
            open: HashMap::new(),
        }
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }

    pub fn full_mask(&self) -> u64 {
        self.full
    }

    pub fn set_assignment(&mut self, d: &Assignment) {
        for slot in 0..self.env.len() {
            self.env[slot] = d.get(self.prog.slot_var(slot));
        }
    }

    /// Sets the element of the `slot`-th compiled variable.
    pub fn set_slot(&mut self, slot: usize, element: usize) {
        self.env[slot] = element;
    }

    fn term(&self, t: &CTerm) -> usize {
        match t {
            CTerm::Var(s) => self.env[*s as usize],
            CTerm::App(f, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a)).collect();
                let code = self.structure.tuple_code(&vals);
                self.structure.apply(*f, code).expect("total function")
            }
        }
    }

    fn memo_key(&self, id: usize) -> Option<u64> {
        let mut code: u64 = 0;
        for &s in self.prog.free[id].iter().rev() {
            code = code
                .checked_mul(self.dsize as u64)?
                .checked_add(self.env[s as usize] as u64)?;
        }
        Some(code)
    }

    pub fn prop(&mut self, node: NodeId, mask: u64) -> Result<u64, O::Need> {
        let id = node.0 as usize;
        let mask = mask & self.full;
        if mask == 0 {
            return Ok(0);
        }
        let closed = self.prog.free[id].is_empty();
        let key = if closed { None } else { self.memo_key(id) };
        let cached = if closed {
            self.closed[id]
        } else {
            key.and_then(|k| self.open.get(&(id as u32, k)).copied())
        };
        if let Some(m) = cached {
            if mask & !m.mask == 0 {
                return Ok(m.bits & mask);
            }
        }
        let bits = self.compute(id, mask)?;
        let memo = match cached {
            Some(m) => Memo {
                mask: m.mask | mask,
                bits: (m.bits & !mask) | bits,
            },
            None => Memo { mask, bits },
        };
        if closed {
            self.closed[id] = Some(memo);
        } else if let Some(k) = key {
            self.open.insert((id as u32, k), memo);
        }
        Ok(bits)
    }

    fn compute(&mut self, id: usize, mask: u64) -> Result<u64, O::Need> {
        let prog = self.prog;
        Ok(match &prog.nodes[id] {
            Node::Atom(p, args) => {
                let vals: Vec<usize> = args.iter().map(|a| self.term(a)).collect();
                let code = self.structure.tuple_code(&vals);
                self.structure.atom_worlds(*p, code) & mask
            }
            Node::Eq(s, t) => {
                if self.term(s) == self.term(t) {
                    mask
                } else {
                    0
                }
            }
            Node::Not(a) => mask & !self.prop(*a, mask)?,
            Node::And(a, b) => {
                let l = self.prop(*a, mask)?;
                if l == 0 {
                    0
                } else {
                    self.prop(*b, l)?
                }
            }
            Node::Exists(v, a) => {
                let slot = *v as usize;
                let saved = self.env[slot];
                let mut acc = 0u64;
                for e in 0..self.dsize {
                    self.env[slot] = e;
                    let r = self.prop(*a, mask & !acc);
                    match r {
                        Ok(bits) => acc |= bits,
                        Err(need) => {
                            self.env[slot] = saved;
                            return Err(need);
                        }
                    }
                    if acc == mask {
                        break;
                    }
                }
                self.env[slot] = saved;
                acc
            }
            Node::Pref(x, a, b) => {
                let l = self.prop(*a, self.full)?;
                if l == 0 {
                    return Ok(0);
                }
                let r = self.prop(*b, self.full)?;
                if r == 0 {
                    return Ok(0);
                }
                self.oracle.compare(*x, l, r, mask)?
            }
        })
    }
}

impl<O: PreferenceOracle<Need = Infallible>> Evaluator<'_, '_, O> {
    /// `⟦node⟧` at the current assignment.
    pub fn denote(&mut self, node: NodeId) -> u64 {
        match self.prop(node, self.full) {
            Ok(b) => b,
            Err(e) => match e {},
        }
    }

    /// Intersection of `⟦node⟧` over all values of the node's free variables
    /// (other slots keep their current values).
    pub fn denote_all_assignments(&mut self, node: NodeId) -> u64 {
        let slots: Vec<usize> = self.prog.free[node.0 as usize]
            .iter()
            .map(|&s| s as usize)
            .collect();
        let saved: Vec<usize> = slots.iter().map(|&s| self.env[s]).collect();
        let mut acc = self.full;
        let mut values = vec![0usize; slots.len()];
        if self.dsize == 0 && !slots.is_empty() {
            return acc;
        }
        'outer: loop {
            for (i, &s) in slots.iter().enumerate() {
                self.env[s] = values[i];
            }
            acc &= self.denote(node);
            if acc == 0 {
                break;
            }
            for v in values.iter_mut() {
                *v += 1;
                if *v < self.dsize {
                    continue 'outer;
                }
                *v = 0;
            }
            break;
        }
        for (i, &s) in slots.iter().enumerate() {
            self.env[s] = saved[i];
        }
        acc
    }
}

/// Compiles `formulas` and evaluates them in one model, sharing work.
/// The model is validated once.
pub struct ModelEvaluator<'m> {
    model: &'m Model,
    prog: Compiled,
}

impl<'m> ModelEvaluator<'m> {
    pub fn new(model: &'m Model) -> Result<Self, EvalError> {
        let violations = model.validate();
        if !violations.is_empty() {
            return Err(EvalError::InvalidModel(violations));
        }
        Ok(ModelEvaluator {
            model,
            prog: Compiled::new(model.structure().signature()),
        })
    }

    pub fn add(&mut self, f: &Formula) -> Result<NodeId, EvalError> {
        Ok(self.prog.add(f)?)
    }

    pub fn evaluator(&self) -> Evaluator<'_, 'm, ModelOracle<'m>> {
        Evaluator::new(&self.prog, self.model.structure(), ModelOracle::new(self.model))
    }
}

fn prop_of(m: &Model, bits: u64) -> Proposition {
    Proposition::from_bits(bits, m.structure().world_len())
}

/// `⟦f⟧` in `m` at assignment `d`.
pub fn eval(m: &Model, f: &Formula, d: &Assignment) -> Result<Proposition, EvalError> {
    let mut me = ModelEvaluator::new(m)?;
    let root = me.add(f)?;
    let mut ev = me.evaluator();
    ev.set_assignment(d);
    Ok(prop_of(m, ev.denote(root)))
}

/// Intersection of `⟦f⟧` over all assignments.
pub fn denote_closed(m: &Model, f: &Formula) -> Result<Proposition, EvalError> {
    let mut me = ModelEvaluator::new(m)?;
    let root = me.add(f)?;
    let mut ev = me.evaluator();
    Ok(prop_of(m, ev.denote_all_assignments(root)))
}

/// `□φ = ¬(¬φ ⪰_X ¬φ)` with `X` the signature's designated index set.
pub fn boxed(sig: &Signature, f: Formula) -> Formula {
    let x = sig.designated_index();
    let neg = Formula::not(f);
    Formula::not(Formula::succeq(x, neg.clone(), neg))
}

/// `◇φ = (φ ⪰_X φ)` with `X` the signature's designated index set.
pub fn diamond(sig: &Signature, f: Formula) -> Formula {
    let x = sig.designated_index();
    Formula::succeq(x, f.clone(), f)
}

/// Outcome of checking both chains of equivalences for `□` and `◇`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalModalityReport {
    pub phi: Proposition,
    pub boxed: Proposition,
    pub diamond: Proposition,
    /// Each failed link, described; empty when both chains hold.
    pub failures: Vec<String>,
}

impl GlobalModalityReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    /// Checks `□φ ≠ ∅ ⇔ □φ = W ⇔ φ = W` and `◇φ ≠ ∅ ⇔ ◇φ = W ⇔ φ ≠ ∅`.
    pub fn from_denotations(phi: Proposition, boxed: Proposition, diamond: Proposition) -> Self {
        let mut failures = Vec::new();
        let chain = |name: &str, p: Proposition, target: bool, failures: &mut Vec<String>| {
            let a = !p.is_empty();
            let b = p.is_full();
            if a != b {
                failures.push(format!("{name} is neither empty nor everything: {p:?}"));
            }
            if b != target {
                failures.push(format!(
                    "{name} = {p:?} disagrees with the truth set of the operand {phi:?}"
                ));
            }
        };
        chain("box", boxed, phi.is_full(), &mut failures);
        chain("diamond", diamond, !phi.is_empty(), &mut failures);
        GlobalModalityReport {
            phi,
            boxed,
            diamond,
            failures,
        }
    }
}

pub fn check_global_modality(m: &Model, f: &Formula, d: &Assignment) -> Result<GlobalModalityReport, EvalError> {
    let sig = m.structure().signature();
    let mut me = ModelEvaluator::new(m)?;
    let phi = me.add(f)?;
    let b = me.add(&boxed(sig, f.clone()))?;
    let dm = me.add(&diamond(sig, f.clone()))?;
    let mut ev = me.evaluator();
    ev.set_assignment(d);
    let (p, bp, dp) = (ev.denote(phi), ev.denote(b), ev.denote(dm));
    Ok(GlobalModalityReport::from_denotations(
        prop_of(m, p),
        prop_of(m, bp),
        prop_of(m, dp),
    ))
}
