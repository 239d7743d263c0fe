//! Formula families, fixture formulas and seeded generators shared by the
//! test suites, the benches and the command line.

use std::collections::BTreeSet;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::denote_closed;
use crate::model::{Model, Structure, UtilityModel};
use crate::search::{conjunction_anonymity, index_anonymity};
use crate::syntax::{Formula, IndexSet, Signature, Term, Var};

fn p(v: u32) -> Formula {
    Formula::pred1("P", v)
}

fn neq(a: u32, b: u32) -> Formula {
    Formula::not(Formula::equals(Term::var(a), Term::var(b)))
}

/// Closed formulas over one unary `P` and index set `x`, of modal depth at
/// most 2. Deterministic, without duplicates.
pub fn template_family(x: &IndexSet) -> Vec<Formula> {
    let ge = |a: &Formula, b: &Formula| Formula::succeq(x, a.clone(), b.clone());
    let some_p = Formula::exists(1, p(1));
    let all_p = Formula::forall(1, p(1));
    let base = [
        p(0),
        Formula::not(p(0)),
        Formula::top(),
        Formula::bottom(),
        some_p.clone(),
        all_p,
    ];
    let mut out: Vec<Formula> = vec![
        Formula::exists(0, p(0)),
        Formula::forall(0, p(0)),
        Formula::exists(0, Formula::not(p(0))),
        Formula::top(),
        Formula::bottom(),
        Formula::and(Formula::exists(0, p(0)), Formula::exists(0, Formula::not(p(0)))),
    ];
    let close = |f: Formula, out: &mut Vec<Formula>| {
        if f.is_closed() {
            out.push(Formula::not(f.clone()));
            out.push(f);
        } else {
            out.push(Formula::exists(0, f.clone()));
            out.push(Formula::forall(0, f));
        }
    };
    for a in &base {
        for b in &base {
            close(ge(a, b), &mut out);
        }
    }
    let level1 = [
        p(0),
        Formula::not(p(0)),
        Formula::top(),
        some_p.clone(),
        ge(&p(0), &Formula::top()),
        ge(&Formula::top(), &p(0)),
        ge(&p(0), &Formula::not(p(0))),
        ge(&some_p, &p(0)),
        Formula::succ(x, Formula::top(), p(0)),
    ];
    for a in &level1 {
        for b in &level1 {
            if a.modal_depth().max(b.modal_depth()) == 1 {
                close(ge(a, b), &mut out);
            }
        }
    }
    let mut seen = BTreeSet::new();
    out.retain(|f| seen.insert(f.clone()));
    out
}

/// Transitivity of revealed preference over a unary `P`: if distinct
/// elements have non-equivalent `P`-propositions, then choosing `Px` from
/// `Px ∨ Py` and `Py` from `Py ∨ Pz` means choosing `Px` from `Px ∨ Pz`.
///
/// The first part is a hypothesis. As a conjunct it fails whenever two
/// elements share a nonempty extension, transitive frame or not; see
/// [`revealed_preference_conjunction`].
pub fn revealed_preference_formula(x: &IndexSet) -> Formula {
    let (first, second) = revealed_preference_parts(x);
    Formula::implies(first, second)
}

/// Both parts of [`revealed_preference_formula`] as a plain conjunction.
pub fn revealed_preference_conjunction(x: &IndexSet) -> Formula {
    let (first, second) = revealed_preference_parts(x);
    Formula::and(first, second)
}

fn revealed_preference_parts(x: &IndexSet) -> (Formula, Formula) {
    let eqv = |a: Formula, b: Formula| Formula::approx(x, a, b);
    let first = Formula::forall_all(&[0, 1], Formula::implies(neq(0, 1), Formula::not(eqv(p(0), p(1)))));
    let distinct = Formula::and(Formula::and(neq(0, 1), neq(1, 2)), neq(0, 2));
    let chosen = Formula::and(
        eqv(Formula::or(p(0), p(1)), p(0)),
        eqv(Formula::or(p(1), p(2)), p(1)),
    );
    let second = Formula::forall_all(
        &[0, 1, 2],
        Formula::implies(distinct, Formula::implies(chosen, eqv(Formula::or(p(0), p(2)), p(0)))),
    );
    (first, second)
}

/// The lexicographic order on pairs through a binary `G`.
pub fn lexicographic_formula(x: &IndexSet) -> Formula {
    let g = |a: u32, b: u32| Formula::atom("G", vec![Term::var(a), Term::var(b)]);
    let lt = |a: Formula, b: Formula| Formula::prec(x, a, b);
    let first = Formula::forall_all(
        &[0, 1],
        Formula::implies(neq(0, 1), Formula::or(lt(g(0, 0), g(1, 1)), lt(g(1, 1), g(0, 0)))),
    );
    // x1 y1 x2 y2 are variables 3 4 5 6.
    let second = Formula::forall_all(
        &[3, 4, 5, 6],
        Formula::iff(
            lt(g(3, 4), g(5, 6)),
            Formula::or(
                lt(g(3, 3), g(5, 5)),
                Formula::and(Formula::equals(Term::var(3), Term::var(5)), lt(g(4, 4), g(6, 6))),
            ),
        ),
    );
    Formula::and(first, second)
}

/// A model of [`lexicographic_formula`] with two elements: world `g<a><b>`
/// makes `G` true of `(a, b)` alone, with utility `2a + b`, and a further
/// world has `G` empty.
pub fn lexicographic_model(x: &IndexSet) -> UtilityModel {
    let sig = Signature::new([("G", 2)], std::iter::empty::<(&str, usize)>(), [x.clone()]).expect("signature");
    let names = ["g00", "g01", "g10", "g11", "root"].map(String::from).to_vec();
    let mut s = Structure::new(sig, vec!["a".into(), "b".into()], names).expect("structure");
    for a in 0..2 {
        for b in 0..2 {
            s.set_holds("G", 2 * a + b, &[a, b], true).expect("in range");
        }
    }
    let mut m = UtilityModel::new(s);
    for w in 0..4 {
        m.set_utility(x, w, Rational64::from_integer(w as i64)).expect("index");
    }
    m
}

/// True exactly at worlds where the domain has two elements and `P` holds
/// of exactly one of them; any two such worlds are isomorphic.
pub fn two_element_description() -> Formula {
    let two = Formula::exists_all(
        &[0, 1],
        Formula::and(
            neq(0, 1),
            Formula::forall(
                2,
                Formula::or(
                    Formula::equals(Term::var(2), Term::var(0)),
                    Formula::equals(Term::var(2), Term::var(1)),
                ),
            ),
        ),
    );
    let one_p = Formula::exists(
        0,
        Formula::and(
            p(0),
            Formula::forall(1, Formula::implies(p(1), Formula::equals(Term::var(1), Term::var(0)))),
        ),
    );
    Formula::and(two, one_p)
}

/// `(ψ ∧ (ψ ≻_X ⊤) ∧ (ψ ≻_Y ⊤)) → ((ψ ∧ (ψ ≻_X ⊤)) ≈_X (ψ ∧ (ψ ≻_Y ⊤)))`
/// with `ψ` the two-element description: valid when isomorphic worlds
/// share utilities, invalid in general.
pub fn invariance_witness(x: &IndexSet, y: &IndexSet) -> Formula {
    let psi = two_element_description();
    let better = |z: &IndexSet| Formula::and(psi.clone(), Formula::succ(z, psi.clone(), Formula::top()));
    let antecedent = Formula::and(
        Formula::and(psi.clone(), Formula::succ(x, psi.clone(), Formula::top())),
        Formula::succ(y, psi.clone(), Formula::top()),
    );
    Formula::implies(antecedent, Formula::approx(x, better(x), better(y)))
}

/// Vocabulary for random formulas.
#[derive(Debug, Clone)]
pub struct FormulaShape {
    pub signature: Signature,
    pub variables: u32,
    pub max_size: usize,
    pub max_depth: usize,
}

impl Default for FormulaShape {
    fn default() -> Self {
        let sets = [
            IndexSet::singleton(1),
            IndexSet::singleton(2),
            IndexSet::new([1, 2]).expect("nonempty"),
        ];
        FormulaShape {
            signature: Signature::new([("P", 1), ("R", 2), ("Q", 0)], [("f", 1), ("c", 0)], sets).expect("signature"),
            variables: 5,
            max_size: 12,
            max_depth: 3,
        }
    }
}

fn random_term(shape: &FormulaShape, rng: &mut ChaCha8Rng, budget: usize) -> Term {
    let funcs: Vec<(&String, &usize)> = shape.signature.functions().iter().collect();
    if budget > 0 && !funcs.is_empty() && rng.gen_bool(0.25) {
        let (name, &arity) = funcs[rng.gen_range(0..funcs.len())];
        let args = (0..arity).map(|_| random_term(shape, rng, budget - 1)).collect();
        Term::App(name.clone(), args)
    } else {
        Term::var(rng.gen_range(0..shape.variables))
    }
}

fn random_node(shape: &FormulaShape, rng: &mut ChaCha8Rng, size: usize, depth: usize) -> Formula {
    let preds: Vec<(&String, &usize)> = shape.signature.predicates().iter().collect();
    if size <= 1 {
        return if rng.gen_bool(0.8) || preds.is_empty() {
            let (name, &arity) = preds[rng.gen_range(0..preds.len())];
            Formula::Atom(name.clone(), (0..arity).map(|_| random_term(shape, rng, 1)).collect())
        } else {
            Formula::equals(random_term(shape, rng, 1), random_term(shape, rng, 1))
        };
    }
    let sets: Vec<&IndexSet> = shape.signature.indices().iter().collect();
    let choice = rng.gen_range(0..if depth > 0 { 4 } else { 3 });
    match choice {
        0 => Formula::not(random_node(shape, rng, size - 1, depth)),
        1 => {
            let left = rng.gen_range(1..size);
            Formula::and(
                random_node(shape, rng, left, depth),
                random_node(shape, rng, (size - left).max(1), depth),
            )
        }
        2 => Formula::Exists(
            Var(rng.gen_range(0..shape.variables)),
            Box::new(random_node(shape, rng, size - 1, depth)),
        ),
        _ => {
            let x = sets[rng.gen_range(0..sets.len())];
            let left = rng.gen_range(1..size);
            Formula::succeq(
                x,
                random_node(shape, rng, left, depth - 1),
                random_node(shape, rng, (size - left).max(1), depth - 1),
            )
        }
    }
}

/// Seeded random core formulas of varying size.
pub fn random_formulas(shape: &FormulaShape, count: usize, seed: u64) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let size = rng.gen_range(1..=shape.max_size);
            random_node(shape, &mut rng, size, shape.max_depth)
        })
        .collect()
}

/// A random utility model over `sig` with utilities drawn from
/// `0..levels` and a uniform random selector.
pub fn random_utility_model(sig: &Signature, domain: usize, worlds: usize, levels: i64, rng: &mut impl Rng) -> UtilityModel {
    assert!(sig.functions().is_empty(), "random models are relational");
    let mut s = Structure::with_sizes(sig.clone(), domain, worlds).expect("sizes");
    for (name, &arity) in sig.predicates() {
        let tuples = domain.pow(arity as u32);
        for w in 0..worlds {
            for t in 0..tuples {
                let tuple = s.decode_tuple(t, arity);
                s.set_holds(name, w, &tuple, rng.gen_bool(0.5)).expect("in range");
            }
        }
    }
    let mut m = UtilityModel::new(s);
    for row in &mut m.utility {
        for u in row.iter_mut() {
            *u = Some(Rational64::from_integer(rng.gen_range(0..levels)));
        }
    }
    m.selector = crate::search::enumerate::random_selector(worlds, rng);
    m
}

/// Which anonymity formula a sample is drawn for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anonymity {
    Conjunction,
    Index,
}

/// Seeded random models that satisfy (or violate) the anonymity formula at
/// world 0. Satisfying conjunction samples make `P` true of everything at
/// world 0 and have few utility values so that ties occur; satisfying index
/// samples set `u_{1,2}` to a random function of `(u_1, u_2)`.
pub fn anonymity_samples(kind: Anonymity, satisfying: bool, count: usize, seed: u64) -> Vec<UtilityModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (sig, formula) = match kind {
        Anonymity::Conjunction => {
            let x = IndexSet::singleton(1);
            (
                Signature::monadic(&["P"], std::slice::from_ref(&x)).expect("signature"),
                conjunction_anonymity(&x),
            )
        }
        Anonymity::Index => (
            Signature::monadic(
                &["P"],
                &[
                    IndexSet::singleton(1),
                    IndexSet::singleton(2),
                    IndexSet::new([1, 2]).expect("nonempty"),
                ],
            )
            .expect("signature"),
            index_anonymity(),
        ),
    };
    let mut out = Vec::new();
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        assert!(attempts < 1_000_000, "sampler made no progress");
        let domain = rng.gen_range(2..=3);
        let worlds = rng.gen_range(3..=5);
        let levels = if satisfying { 2 } else { 4 };
        let mut m = random_utility_model(&sig, domain, worlds, levels, &mut rng);
        if satisfying {
            match kind {
                Anonymity::Conjunction => {
                    for a in 0..domain {
                        m.structure.set_holds("P", 0, &[a], true).expect("in range");
                    }
                }
                Anonymity::Index if rng.gen_bool(0.7) => {
                    let table: Vec<i64> = (0..levels * levels).map(|_| rng.gen_range(0..3)).collect();
                    // Index sets are ordered {1}, {1,2}, {2}.
                    for w in 0..worlds {
                        let u1 = *m.utility[0][w].expect("total").numer();
                        let u2 = *m.utility[2][w].expect("total").numer();
                        m.utility[1][w] = Some(Rational64::from_integer(table[(u1 * levels + u2) as usize]));
                    }
                }
                Anonymity::Index => {}
            }
        }
        let holds = denote_closed(&Model::Utility(m.clone()), &formula)
            .expect("well-formed sample")
            .contains(0);
        if holds == satisfying {
            out.push(m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval;
    use crate::model::Assignment;

    #[test]
    fn template_family_is_closed_and_shallow() {
        let fam = template_family(&IndexSet::singleton(1));
        assert!(fam.len() > 150, "{}", fam.len());
        assert!(fam.iter().all(|f| f.is_closed() && f.modal_depth() <= 2));
        assert!(fam.iter().any(|f| f.modal_depth() == 2));
    }

    #[test]
    fn lexicographic_model_satisfies_the_formula() {
        let x = IndexSet::singleton(1);
        let m = Model::Utility(lexicographic_model(&x));
        let p = denote_closed(&m, &lexicographic_formula(&x)).unwrap();
        assert!(p.is_full());
    }

    #[test]
    fn two_element_description_picks_out_one_p() {
        let x = IndexSet::singleton(1);
        let sig = Signature::monadic(&["P"], std::slice::from_ref(&x)).unwrap();
        let mut s = Structure::with_sizes(sig, 2, 3).unwrap();
        s.set_holds("P", 0, &[0], true).unwrap();
        s.set_holds("P", 1, &[1], true).unwrap();
        s.set_holds("P", 2, &[0], true).unwrap();
        s.set_holds("P", 2, &[1], true).unwrap();
        let m = Model::Utility(UtilityModel::new(s));
        let got = eval(&m, &two_element_description(), &Assignment::new(0)).unwrap();
        assert_eq!(got.worlds().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn random_formulas_are_reproducible() {
        let shape = FormulaShape::default();
        let a = random_formulas(&shape, 20, 3);
        assert_eq!(a, random_formulas(&shape, 20, 3));
        assert!(a.iter().all(|f| shape.signature.check(f).is_ok()));
    }

    #[test]
    fn anonymity_samples_have_the_requested_status() {
        for kind in [Anonymity::Conjunction, Anonymity::Index] {
            for satisfying in [true, false] {
                assert_eq!(anonymity_samples(kind, satisfying, 5, 1).len(), 5);
            }
        }
    }
}
