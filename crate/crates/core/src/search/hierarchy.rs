//! Formulas of increasing modal depth whose truth sets escape everything
//! expressible at lower depth.
//!
//! `𝔓_n` (nonempty propositions of depth-`≤ n` formulas with parameters from
//! the domain) is represented by the atoms of the Boolean algebra it spans.
//! Over a finite domain, quantifiers are finite unions, so the algebra for
//! depth 0 is generated by the atomic propositions. A comparison
//! `(θ ⪰_X χ)` is a Boolean combination of the level sets
//! `{w : u_X(s(w, A)) ≥ c}` of its operands' propositions, so the algebra
//! for depth `n + 1` is generated by depth `n` together with those level
//! sets. Computing them for every `A` in the algebra would need `2^atoms`
//! evaluations; the selector representation makes this unnecessary, because
//! only explicitly listed sets can depend on the vantage world. The computed
//! family contains every depth-`≤ n` proposition, which is the direction the
//! non-membership certificates need.

use std::collections::BTreeSet;

use num_rational::Rational64;
use thiserror::Error;

use crate::eval::{denote_closed, EvalError};
use crate::model::{full_mask, Model, PreorderModel, Proposition, Selector, SelectorDefault, Structure, UtilityModel};
use crate::syntax::{Formula, IndexSet, Signature};

/// Largest algebra whose members a dense selector lets us enumerate.
const MAX_ENUMERATED_ATOMS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error(
        "no freshness headroom at depth {depth}: {atoms} atoms span 2^{atoms} - 1 propositions, \
         not fewer than 2^({worlds} - 2)"
    )]
    Headroom { depth: usize, atoms: usize, worlds: usize },
    #[error("no fresh proposition available at depth {depth}")]
    NoFreshSet { depth: usize },
    #[error("algebra with {0} atoms is too large to enumerate under a dense selector")]
    TooManyAtoms(usize),
    #[error("certificate failed: the depth-{0} truth set is expressible at lower depth")]
    NotFresh(usize),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Worlds, domain and interpretation, with a closed non-modal formula.
#[derive(Debug, Clone)]
pub struct NormalCore {
    pub structure: Structure,
    pub psi: Formula,
}

impl NormalCore {
    /// One unary `P` over `domain` elements; world `i` makes `P` true of the
    /// elements in the binary expansion of `i mod 2^domain`. `ψ` is `∃x P(x)`.
    pub fn monadic(worlds: usize, domain: usize, x: &IndexSet) -> Result<NormalCore, HierarchyError> {
        if domain == 0 || domain > 6 {
            return Err(HierarchyError::Precondition("domain size must be 1 to 6".into()));
        }
        let pre = |e: crate::syntax::SyntaxError| HierarchyError::Precondition(e.to_string());
        let sig = Signature::monadic(&["P"], std::slice::from_ref(x)).map_err(pre)?;
        let mut s = Structure::with_sizes(sig, domain, worlds)
            .map_err(|e| HierarchyError::Precondition(e.to_string()))?;
        for w in 0..worlds {
            let code = w % (1 << domain);
            for a in 0..domain {
                s.set_holds("P", w, &[a], code >> a & 1 == 1)
                    .map_err(|e| HierarchyError::Precondition(e.to_string()))?;
            }
        }
        Ok(NormalCore {
            structure: s,
            psi: Formula::exists(0, Formula::pred1("P", 0)),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyOptions {
    pub n_max: usize,
    pub x: IndexSet,
    /// Keep the selector reflexive: `s(w, A) = w` whenever `w ∈ A`.
    pub reflexive: bool,
}

/// `⟦φ_{depth+1}⟧` checked against the computed family for `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub depth: usize,
    /// Atoms of the algebra; it has `2^atoms - 1` nonempty members.
    pub atoms: usize,
    pub fresh: bool,
}

#[derive(Debug, Clone)]
pub struct HierarchyReport {
    pub model: UtilityModel,
    pub formulas: Vec<Formula>,
    pub denotations: Vec<Proposition>,
    pub w0: usize,
    pub w1: usize,
    pub certificates: Vec<Certificate>,
    pub notes: Vec<String>,
}

/// Partition of the worlds into the atoms of an algebra of propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Atoms(Vec<u64>);

impl Atoms {
    fn whole(full: u64) -> Atoms {
        Atoms(vec![full])
    }

    fn refine(&mut self, g: u64) {
        let mut out = Vec::with_capacity(self.0.len());
        for &a in &self.0 {
            for part in [a & g, a & !g] {
                if part != 0 {
                    out.push(part);
                }
            }
        }
        out.sort_by_key(|a| a.trailing_zeros());
        self.0 = out;
    }

    pub(crate) fn len(&self) -> usize {
        self.0.len()
    }

    /// Whether `set` is a union of atoms.
    pub(crate) fn contains(&self, set: u64) -> bool {
        self.0.iter().all(|&a| a & set == 0 || a & set == a)
    }

    /// Whether `a` equals `B - e` for some member `B`.
    fn is_trace(&self, a: u64, e: u64) -> bool {
        let cover: u64 = self.0.iter().filter(|&&q| q & a != 0).fold(0, |acc, q| acc | q);
        cover & !e == a
    }
}

fn atomic_algebra(s: &Structure) -> Atoms {
    let mut atoms = Atoms::whole(full_mask(s.world_len()));
    for p in 0..s.predicate_count() {
        let tuples = s.domain_len().pow(s.predicate_arity_by_id(p) as u32);
        for t in 0..tuples {
            atoms.refine(s.atom_worlds(p, t));
        }
    }
    atoms
}

/// Refines `atoms` (the algebra for some depth) by the level sets of its
/// members, giving the algebra for the next depth.
fn next_algebra(m: &UtilityModel, atoms: &Atoms) -> Result<Atoms, HierarchyError> {
    let n = m.structure.world_len();
    let ranks: Vec<Vec<u32>> = PreorderModel::from_utility(m)
        .ranks
        .iter()
        .map(|row| row.iter().map(|r| r.unwrap_or(0)).collect())
        .collect();
    let mut generators: BTreeSet<u64> = BTreeSet::new();
    let level_sets = |set: u64, generators: &mut BTreeSet<u64>| {
        for row in &ranks {
            let top = row.iter().copied().max().unwrap_or(0);
            for c in 1..=top {
                let g = (0..n)
                    .filter(|&w| m.selector.select(w, set).is_some_and(|v| row[v] >= c))
                    .fold(0u64, |acc, w| acc | 1 << w);
                generators.insert(g);
            }
        }
    };
    match &m.selector {
        Selector::Sparse {
            entries, default, ..
        } => {
            // Sets without entries are answered by the default rule: with
            // min-index the choice ignores the vantage world, and with the
            // reflexive rule each level set is a Boolean combination of the
            // set and {w : u_X(w) ≥ c}.
            let listed: BTreeSet<u64> = entries.keys().map(|&(_, a)| a).collect();
            for a in listed {
                if atoms.contains(a) {
                    level_sets(a, &mut generators);
                }
            }
            if *default == SelectorDefault::ReflexiveMinIndex {
                for row in &ranks {
                    let top = row.iter().copied().max().unwrap_or(0);
                    for c in 1..=top {
                        generators.insert((0..n).filter(|&w| row[w] >= c).fold(0, |acc, w| acc | 1 << w));
                    }
                }
            }
        }
        Selector::Table { .. } => {
            let k = atoms.len();
            if k > MAX_ENUMERATED_ATOMS {
                return Err(HierarchyError::TooManyAtoms(k));
            }
            for pick in 1u64..1 << k {
                let set = (0..k)
                    .filter(|&i| pick >> i & 1 == 1)
                    .fold(0u64, |acc, i| acc | atoms.0[i]);
                level_sets(set, &mut generators);
            }
        }
    }
    let mut out = atoms.clone();
    for g in generators {
        out.refine(g);
    }
    Ok(out)
}

/// Algebras for depths `0..=n_max` in `m`.
pub(crate) fn algebras(m: &UtilityModel, n_max: usize) -> Result<Vec<Atoms>, HierarchyError> {
    let mut out = vec![atomic_algebra(&m.structure)];
    for _ in 0..n_max {
        let next = next_algebra(m, out.last().expect("nonempty"))?;
        out.push(next);
    }
    Ok(out)
}

fn fresh_choice(atoms: &Atoms, excluded: u64, depth: usize) -> Result<u64, HierarchyError> {
    for &q in &atoms.0 {
        let rest = q & !excluded;
        if rest.count_ones() >= 2 {
            let a = 1u64 << rest.trailing_zeros();
            debug_assert!(!atoms.is_trace(a, excluded));
            return Ok(a);
        }
    }
    Err(HierarchyError::NoFreshSet { depth })
}

/// Builds `φ_0, …, φ_{n_max}` and a model in which each `⟦φ_{n+1}⟧` lies
/// outside the family of depth-`≤ n` propositions.
pub fn build_hierarchy(core: &NormalCore, opts: &HierarchyOptions) -> Result<HierarchyReport, HierarchyError> {
    let s = &core.structure;
    let n = s.world_len();
    let pre = |m: &str| Err(HierarchyError::Precondition(m.to_string()));
    let mut problems = Vec::new();
    s.violations(&mut problems);
    if !problems.is_empty() {
        return Err(HierarchyError::Precondition(problems.join("; ")));
    }
    let Some(xk) = s.signature().index_position(&opts.x) else {
        return pre("the index set is not in the signature");
    };
    if !core.psi.is_closed() || core.psi.modal_depth() != 0 {
        return pre("ψ must be closed and free of comparisons");
    }
    let full = full_mask(n);
    let base = UtilityModel::new(s.clone());
    let mut psi = core.psi.clone();
    let mut den = denote_closed(&Model::Utility(base.clone()), &psi)?.bits();
    if den == 0 || den == full {
        return pre("ψ must be true at some worlds and false at others");
    }
    if den.count_ones() < 2 {
        psi = Formula::not(psi);
        den = full & !den;
        if den.count_ones() < 2 {
            return pre("neither ψ nor its negation holds at two worlds");
        }
    }
    let w0 = den.trailing_zeros() as usize;
    let w1 = (den & !(1 << w0)).trailing_zeros() as usize;

    let mut model = base;
    for (k, row) in model.utility.iter_mut().enumerate() {
        for (w, u) in row.iter_mut().enumerate() {
            let v = if k == xk && w != w0 { 1 } else { 0 };
            *u = Some(Rational64::from_integer(v));
        }
    }
    model.selector = if opts.reflexive {
        Selector::reflexive_min_index(n)
    } else {
        let mut sel = Selector::min_index(n);
        for w in 0..n {
            sel.set(w, full, w0);
        }
        sel
    };

    let mut formulas = vec![psi];
    let mut denotations = vec![den];
    let mut atoms = vec![atomic_algebra(s)];
    let e = 1u64 << w0 | 1 << w1;
    for depth in 0..opts.n_max {
        let cur = &atoms[depth];
        if cur.len() + 2 > n {
            return Err(HierarchyError::Headroom {
                depth,
                atoms: cur.len(),
                worlds: n,
            });
        }
        let f = denotations[depth];
        let excluded = if opts.reflexive { f } else { e };
        let a = fresh_choice(cur, excluded, depth)?;
        for w in 0..n {
            if opts.reflexive {
                if f >> w & 1 == 0 {
                    model.selector.set(w, f, if a >> w & 1 == 1 { w1 } else { w0 });
                }
            } else {
                model.selector.set(w, f, if (a | e) >> w & 1 == 1 { w1 } else { w0 });
            }
        }
        let prev = formulas[depth].clone();
        let next = if opts.reflexive {
            Formula::succeq(&opts.x, prev, Formula::top())
        } else {
            Formula::prec(&opts.x, Formula::top(), prev)
        };
        let d = denote_closed(&Model::Utility(model.clone()), &next)?.bits();
        formulas.push(next);
        denotations.push(d);
        atoms.push(next_algebra(&model, cur)?);
    }

    // Certify on the finished model, from scratch.
    let fam = algebras(&model, opts.n_max)?;
    let mut certificates = Vec::new();
    for depth in 0..opts.n_max {
        let fresh = !fam[depth].contains(denotations[depth + 1]);
        certificates.push(Certificate {
            depth,
            atoms: fam[depth].len(),
            fresh,
        });
        if !fresh {
            return Err(HierarchyError::NotFresh(depth + 1));
        }
    }
    for (depth, f) in formulas.iter().enumerate() {
        if f.modal_depth() != depth {
            return Err(HierarchyError::Precondition(format!("formula {depth} has the wrong depth")));
        }
    }
    let notes = vec![
        format!("finite approximation: {n} worlds and a domain of {} elements", s.domain_len()),
        "each family is the Boolean algebra spanned by atomic propositions and preference level \
         sets, which contains every proposition of the given depth with parameters"
            .to_string(),
    ];
    Ok(HierarchyReport {
        model,
        formulas,
        denotations: denotations.into_iter().map(|b| Proposition::from_bits(b, n)).collect(),
        w0,
        w1,
        certificates,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{Compiled, Evaluator, RankOracle};
    use crate::syntax::parse_formula;

    fn x() -> IndexSet {
        IndexSet::singleton(1)
    }

    fn opts(n_max: usize, reflexive: bool) -> HierarchyOptions {
        HierarchyOptions {
            n_max,
            x: x(),
            reflexive,
        }
    }

    #[test]
    fn depth_zero_is_psi() {
        let core = NormalCore::monadic(16, 2, &x()).unwrap();
        let r = build_hierarchy(&core, &opts(0, false)).unwrap();
        assert_eq!(r.formulas, vec![core.psi.clone()]);
        assert!(r.denotations[0].contains(r.w0) && r.denotations[0].contains(r.w1));
    }

    #[test]
    fn top_always_draws_w0() {
        let core = NormalCore::monadic(16, 2, &x()).unwrap();
        let r = build_hierarchy(&core, &opts(2, false)).unwrap();
        let full = full_mask(16);
        for w in 0..16 {
            assert_eq!(r.model.selector.select(w, full), Some(r.w0));
        }
        assert_eq!(r.model.utility[0][r.w0], Some(Rational64::from_integer(0)));
    }

    /// Every proposition of a small formula family, under every assignment,
    /// must be a member of the computed family of its depth.
    fn family_covers(r: &HierarchyReport, formulas: &[&str]) {
        let m = &r.model;
        let s = &m.structure;
        let fam = algebras(m, 2).unwrap();
        let mut prog = Compiled::new(s.signature());
        let ids: Vec<_> = formulas
            .iter()
            .map(|t| prog.add(&parse_formula(t, s.signature()).unwrap()).unwrap())
            .collect();
        for (t, id) in formulas.iter().zip(ids) {
            let depth = prog.modal_depth(id);
            let d = s.domain_len();
            for a in 0..d {
                for b in 0..d {
                    let mut env = Evaluator::new(&prog, s, RankOracle::from_utility(m));
                    for slot in 0..prog.slot_count() {
                        env.set_slot(slot, if prog.slot_var(slot).0 == 0 { a } else { b });
                    }
                    let p = env.denote(id);
                    assert!(fam[depth].contains(p), "{t} at ({a},{b}) escapes depth {depth}");
                }
            }
        }
    }

    #[test]
    fn computed_family_contains_small_formulas() {
        let core = NormalCore::monadic(32, 2, &x()).unwrap();
        for reflexive in [false, true] {
            let r = build_hierarchy(&core, &opts(2, reflexive)).unwrap();
            family_covers(
                &r,
                &[
                    "P(x)",
                    "(P(x) & ~P(y))",
                    "exists x P(x)",
                    "x = y",
                    "(P(x) >=[1] P(y))",
                    "(true >[1] exists x P(x))",
                    "(P(x) >[1] (P(y) | ~P(x)))",
                    "((true >[1] exists x P(x)) >=[1] P(y))",
                    "(true >[1] (true >[1] exists x P(x)))",
                    "((exists x P(x) >=[1] true) >=[1] true)",
                    "~(~P(x) >=[1] ~P(x))",
                ],
            );
        }
    }

    #[test]
    fn hierarchy_on_sixty_four_worlds() {
        let core = NormalCore::monadic(64, 3, &x()).unwrap();
        for reflexive in [false, true] {
            let r = build_hierarchy(&core, &opts(3, reflexive)).unwrap();
            assert_eq!(r.formulas.len(), 4);
            for (n, f) in r.formulas.iter().enumerate() {
                assert_eq!(f.modal_depth(), n);
            }
            assert!(r.certificates.iter().all(|c| c.fresh));
            let d = &r.denotations;
            assert!(d[1] != d[2] && d[2] != d[3] && d[1] != d[3]);
            assert!(r.model.validate().is_empty());
            if reflexive {
                if let Selector::Sparse { entries, .. } = &r.model.selector {
                    assert!(entries.iter().all(|(&(w, a), &v)| a >> w & 1 == 0 || v == w));
                }
            }
        }
    }

    #[test]
    fn preconditions_are_checked() {
        let core = NormalCore::monadic(8, 1, &x()).unwrap();
        let bad = NormalCore {
            psi: Formula::top(),
            ..core.clone()
        };
        assert!(matches!(
            build_hierarchy(&bad, &opts(1, false)),
            Err(HierarchyError::Precondition(_))
        ));
        let modal = NormalCore {
            psi: parse_formula("(true >=[1] true)", core.structure.signature()).unwrap(),
            ..core.clone()
        };
        assert!(build_hierarchy(&modal, &opts(1, false)).is_err());
        // Four worlds leave no room for three fresh stages.
        let tiny = NormalCore::monadic(4, 1, &x()).unwrap();
        assert!(build_hierarchy(&tiny, &opts(3, false)).is_err());
    }

    #[test]
    fn trace_test_matches_brute_force() {
        let mut atoms = Atoms::whole(0b1111_1111);
        atoms.refine(0b0000_1111);
        atoms.refine(0b0011_0011);
        let e = 0b0000_0011;
        for a in 0u64..256 {
            if a & e != 0 {
                continue;
            }
            let brute = (0u64..256).any(|b| atoms.contains(b) && b & !e == a);
            assert_eq!(atoms.is_trace(a, e), brute, "{a:#b}");
        }
    }
}
