//! Tables showing that a utility decomposes through a binary function.
//!
//! Two anonymity formulas over a unary `P` make one utility a function of
//! two others at a world `w0`. Extraction fills the table of that function
//! from the model and reports the first pair of assignments that would
//! give it two values.

use std::collections::BTreeMap;

use num_rational::Rational64;

use crate::eval::{denote_closed, eval, EvalError};
use crate::model::{Assignment, Model, UtilityModel};
use crate::syntax::{Formula, IndexSet, Term, Var};

/// Conjunctive anonymity for `P` and `X`:
/// `∀xy((Px ≈ Py) → ∀z((Px ∧ Pz) ≈ (Py ∧ Pz)))`.
pub fn conjunction_anonymity(x: &IndexSet) -> Formula {
    let p = |v| Formula::pred1("P", v);
    Formula::forall_all(
        &[0, 1],
        Formula::implies(
            Formula::approx(x, p(0), p(1)),
            Formula::forall(2, Formula::approx(x, Formula::and(p(0), p(2)), Formula::and(p(1), p(2)))),
        ),
    )
}

/// Index anonymity: `∀xy(((Px ≈_1 Py) ∧ (Px ≈_2 Py)) → (Px ≈_{1,2} Py))`.
pub fn index_anonymity() -> Formula {
    let (one, two, both) = index_sets();
    let p = |v| Formula::pred1("P", v);
    Formula::forall_all(
        &[0, 1],
        Formula::implies(
            Formula::and(Formula::approx(&one, p(0), p(1)), Formula::approx(&two, p(0), p(1))),
            Formula::approx(&both, p(0), p(1)),
        ),
    )
}

fn index_sets() -> (IndexSet, IndexSet, IndexSet) {
    (
        IndexSet::singleton(1),
        IndexSet::singleton(2),
        IndexSet::new([1, 2]).expect("nonempty"),
    )
}

/// The function's table: argument utilities to value utility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub entries: BTreeMap<(Rational64, Rational64), Rational64>,
    /// Whether `w0` satisfies the anonymity formula.
    pub premise_holds: bool,
}

/// Two assignments with equal argument utilities and different values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompositionConflict {
    pub premise_holds: bool,
    pub arguments: [(Formula, IndexSet); 2],
    pub value: (Formula, IndexSet),
    pub first: Assignment,
    pub second: Assignment,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Function(Table),
    Conflict(DecompositionConflict),
}

impl Decomposition {
    pub fn premise_holds(&self) -> bool {
        match self {
            Decomposition::Function(t) => t.premise_holds,
            Decomposition::Conflict(c) => c.premise_holds,
        }
    }
}

/// `u_X(s(w0, ⟦f⟧_d))`, or `None` when the truth set is empty.
fn utility_at(m: &Model, um: &UtilityModel, w0: usize, f: &Formula, x: &IndexSet, d: &Assignment) -> Result<Option<Rational64>, EvalError> {
    let p = eval(m, f, d)?;
    if p.is_empty() {
        return Ok(None);
    }
    let v = um.selector.select(w0, p.bits()).expect("valid selector");
    Ok(um.utility_of(x, v))
}

impl DecompositionConflict {
    /// Re-evaluates all formulas under both assignments.
    pub fn verify(&self, m: &UtilityModel, w0: usize) -> Result<bool, EvalError> {
        let model = Model::Utility(m.clone());
        let mut outcome = Vec::new();
        for d in [&self.first, &self.second] {
            let mut args = Vec::new();
            for (f, x) in &self.arguments {
                args.push(utility_at(&model, m, w0, f, x, d)?);
            }
            let value = utility_at(&model, m, w0, &self.value.0, &self.value.1, d)?;
            if args.iter().any(Option::is_none) || value.is_none() {
                return Ok(false);
            }
            outcome.push((args, value));
        }
        Ok(outcome[0].0 == outcome[1].0 && outcome[0].1 != outcome[1].1)
    }
}

/// Fills the table from the extensions of `P` directly, over the supplied
/// assignments of `x` and `y` (0 and 1) to elements.
fn extract(
    m: &UtilityModel,
    w0: usize,
    premise: &Formula,
    arguments: [(Formula, IndexSet); 2],
    value: (Formula, IndexSet),
    mask: impl Fn(usize, usize) -> [u64; 3],
    pairs: Vec<(usize, usize)>,
) -> Result<Decomposition, EvalError> {
    let model = Model::Utility(m.clone());
    let premise_holds = denote_closed(&model, premise)?.contains(w0);
    let util = |set: u64, x: &IndexSet| -> Rational64 {
        let v = m.selector.select(w0, set).expect("valid selector");
        m.utility_of(x, v).expect("valid utilities")
    };
    let mut entries = BTreeMap::new();
    let mut origin: BTreeMap<(Rational64, Rational64), (usize, usize)> = BTreeMap::new();
    for (a, b) in pairs {
        let [s1, s2, sv] = mask(a, b);
        if sv == 0 {
            continue;
        }
        let key = (util(s1, &arguments[0].1), util(s2, &arguments[1].1));
        let val = util(sv, &value.1);
        match entries.get(&key) {
            Some(&old) if old != val => {
                let (a0, b0) = origin[&key];
                let asg = |a, b| Assignment::from_pairs([(Var(0), a), (Var(1), b)]);
                return Ok(Decomposition::Conflict(DecompositionConflict {
                    premise_holds,
                    arguments,
                    value,
                    first: asg(a0, b0),
                    second: asg(a, b),
                }));
            }
            Some(_) => {}
            None => {
                entries.insert(key, val);
                origin.insert(key, (a, b));
            }
        }
    }
    Ok(Decomposition::Function(Table {
        entries,
        premise_holds,
    }))
}

fn p_worlds(m: &UtilityModel, a: usize) -> Result<u64, EvalError> {
    let s = &m.structure;
    let id = s
        .predicate_id("P")
        .filter(|&id| s.predicate_arity_by_id(id) == 1)
        .ok_or_else(|| {
            EvalError::Symbol(crate::syntax::SyntaxError::UnknownPredicate {
                name: "P".into(),
                offset: 0,
            })
        })?;
    Ok(s.atom_worlds(id, a))
}

fn checked(m: &UtilityModel) -> Result<(), EvalError> {
    let problems = m.validate();
    if problems.is_empty() {
        Ok(())
    } else {
        Err(EvalError::InvalidModel(problems))
    }
}

/// `F(u(s(w0,⟦Px⟧)), u(s(w0,⟦Py⟧))) = u(s(w0,⟦Px ∧ Py⟧))` over assignments
/// with `⟦Px ∧ Py⟧` nonempty.
pub fn extract_conjunction_decomposition(m: &UtilityModel, w0: usize, x: &IndexSet) -> Result<Decomposition, EvalError> {
    checked(m)?;
    let premise = conjunction_anonymity(x);
    let d = m.structure.domain_len();
    let ext: Vec<u64> = (0..d).map(|a| p_worlds(m, a)).collect::<Result<_, _>>()?;
    let p = |v| Formula::pred1("P", v);
    extract(
        m,
        w0,
        &premise,
        [(p(0), x.clone()), (p(1), x.clone())],
        (Formula::and(p(0), p(1)), x.clone()),
        |a, b| [ext[a], ext[b], ext[a] & ext[b]],
        (0..d).flat_map(|a| (0..d).map(move |b| (a, b))).collect(),
    )
}

/// `F(u_1(s(w0,⟦Px⟧)), u_2(s(w0,⟦Px⟧))) = u_{1,2}(s(w0,⟦Px⟧))` over
/// assignments with `⟦Px⟧` nonempty.
pub fn extract_index_decomposition(m: &UtilityModel, w0: usize) -> Result<Decomposition, EvalError> {
    checked(m)?;
    let premise = index_anonymity();
    let d = m.structure.domain_len();
    let ext: Vec<u64> = (0..d).map(|a| p_worlds(m, a)).collect::<Result<_, _>>()?;
    let (one, two, both) = index_sets();
    let p = Formula::atom("P", vec![Term::Var(Var(0))]);
    extract(
        m,
        w0,
        &premise,
        [(p.clone(), one), (p.clone(), two)],
        (p, both),
        |a, _| [ext[a], ext[a], ext[a]],
        (0..d).map(|a| (a, 0)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Selector, Structure};
    use crate::syntax::Signature;

    fn r(n: i64) -> Rational64 {
        Rational64::from_integer(n)
    }

    fn three_index_model(u1: [i64; 3], u2: [i64; 3], u12: [i64; 3]) -> UtilityModel {
        let (one, two, both) = index_sets();
        let sig = Signature::monadic(&["P"], &[one.clone(), two.clone(), both.clone()]).unwrap();
        // Element e{i} is P exactly at world w{i}.
        let mut s = Structure::with_sizes(sig, 3, 3).unwrap();
        for w in 0..3 {
            s.set_holds("P", w, &[w], true).unwrap();
        }
        let mut m = UtilityModel::new(s);
        for w in 0..3 {
            m.set_utility(&one, w, r(u1[w])).unwrap();
            m.set_utility(&two, w, r(u2[w])).unwrap();
            m.set_utility(&both, w, r(u12[w])).unwrap();
        }
        m
    }

    #[test]
    fn constant_utility_gives_constant_table() {
        let x = IndexSet::singleton(1);
        let sig = Signature::monadic(&["P"], std::slice::from_ref(&x)).unwrap();
        let mut s = Structure::with_sizes(sig, 2, 3).unwrap();
        s.set_holds("P", 0, &[0], true).unwrap();
        s.set_holds("P", 0, &[1], true).unwrap();
        s.set_holds("P", 1, &[1], true).unwrap();
        let m = UtilityModel::new(s);
        let Decomposition::Function(t) = extract_conjunction_decomposition(&m, 0, &x).unwrap() else {
            panic!()
        };
        assert!(t.premise_holds);
        assert!(t.entries.values().all(|&v| v == r(0)));
    }

    #[test]
    fn additive_index_recovers_addition() {
        let m = three_index_model([0, 1, 2], [5, 3, 1], [5, 4, 3]);
        let Decomposition::Function(t) = extract_index_decomposition(&m, 0).unwrap() else {
            panic!()
        };
        assert!(t.premise_holds);
        assert_eq!(t.entries.len(), 3);
        for (&(p, q), &v) in &t.entries {
            assert_eq!(p + q, v);
        }
    }

    #[test]
    fn shared_arguments_with_different_aggregate_conflict() {
        let m = three_index_model([1, 1, 0], [2, 2, 0], [3, 4, 0]);
        let Decomposition::Conflict(c) = extract_index_decomposition(&m, 0).unwrap() else {
            panic!()
        };
        assert!(!c.premise_holds);
        assert!(c.verify(&m, 0).unwrap());
    }

    #[test]
    fn conjunction_conflict_reverifies() {
        // ⟦P e0⟧ = {w0,w1} and ⟦P e1⟧ = {w0,w2} select worlds of utility 1,
        // their conjunction {w0} selects utility 0, and P e0 with itself
        // keeps utility 1: the pair (1, 1) gets two values.
        let x = IndexSet::singleton(1);
        let sig = Signature::monadic(&["P"], std::slice::from_ref(&x)).unwrap();
        let mut s = Structure::with_sizes(sig, 3, 3).unwrap();
        for (w, elems) in [(0, &[0, 1, 2][..]), (1, &[0, 2][..]), (2, &[1, 2][..])] {
            for &a in elems {
                s.set_holds("P", w, &[a], true).unwrap();
            }
        }
        let mut m = UtilityModel::new(s);
        m.selector = Selector::Sparse {
            worlds: 3,
            entries: [((0, 0b011), 1), ((0, 0b101), 2)].into_iter().collect(),
            default: crate::model::SelectorDefault::MinIndex,
        };
        for (w, u) in [(0, 0), (1, 1), (2, 1)] {
            m.set_utility(&x, w, r(u)).unwrap();
        }
        let Decomposition::Conflict(c) = extract_conjunction_decomposition(&m, 0, &x).unwrap() else {
            panic!()
        };
        assert!(!c.premise_holds);
        assert_eq!(c.first, Assignment::from_pairs([(Var(0), 0), (Var(1), 0)]));
        assert_eq!(c.second, Assignment::from_pairs([(Var(0), 0), (Var(1), 1)]));
        assert!(c.verify(&m, 0).unwrap());
    }

    #[test]
    fn missing_predicate_is_an_error() {
        let x = IndexSet::singleton(1);
        let sig = Signature::monadic(&["Q"], std::slice::from_ref(&x)).unwrap();
        let m = UtilityModel::new(Structure::with_sizes(sig, 1, 1).unwrap());
        assert!(extract_conjunction_decomposition(&m, 0, &x).is_err());
    }
}
