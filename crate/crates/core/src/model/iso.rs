use itertools::Itertools;

use super::{Structure, UtilityModel};

/// A permutation `h` of the domain with `ā ∈ t(v, P) ⇔ h(ā) ∈ t(w, P)` for
/// every predicate and `h(f_v(ā)) = f_w(h(ā))` for every function.
pub fn isomorphism(s: &Structure, v: usize, w: usize) -> Option<Vec<usize>> {
    let n = s.domain_len();
    (0..n).permutations(n).find(|h| preserves(s, v, w, h))
}

pub fn are_isomorphic(s: &Structure, v: usize, w: usize) -> bool {
    if s.interpretation_code(v) == s.interpretation_code(w) && functions_equal(s, v, w) {
        return true;
    }
    isomorphism(s, v, w).is_some()
}

fn functions_equal(s: &Structure, v: usize, w: usize) -> bool {
    (0..s.function_count()).all(|f| {
        let arity = s.function_arity_by_id(f);
        let count = s.domain_len().pow(arity as u32);
        (0..count).all(|c| s.function_value(f, v, c) == s.function_value(f, w, c))
    })
}

fn preserves(s: &Structure, v: usize, w: usize, h: &[usize]) -> bool {
    let map = |code: usize, arity: usize| {
        let t: Vec<usize> = s.decode_tuple(code, arity).iter().map(|&a| h[a]).collect();
        s.tuple_code(&t)
    };
    for p in 0..s.predicate_count() {
        let arity = s.predicate_arity_by_id(p);
        let count = s.domain_len().pow(arity as u32);
        for c in 0..count {
            let at_v = s.atom_worlds(p, c) >> v & 1;
            let at_w = s.atom_worlds(p, map(c, arity)) >> w & 1;
            if at_v != at_w {
                return false;
            }
        }
    }
    for f in 0..s.function_count() {
        let arity = s.function_arity_by_id(f);
        let count = s.domain_len().pow(arity as u32);
        for c in 0..count {
            let lhs = s.function_value(f, v, c).map(|a| h[a]);
            if lhs != s.function_value(f, w, map(c, arity)) {
                return false;
            }
        }
    }
    true
}

/// Isomorphic worlds receive equal utility for every index set.
pub fn is_utility_invariant(m: &UtilityModel) -> bool {
    let s = &m.structure;
    let n = s.world_len();
    for v in 0..n {
        for w in v + 1..n {
            let same = m.utility.iter().all(|row| row[v] == row[w]);
            if !same && are_isomorphic(s, v, w) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use num_rational::Rational64;

    use super::*;
    use crate::syntax::{IndexSet, Signature};

    fn two_worlds_swapped() -> Structure {
        let sig = Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap();
        let mut s = Structure::with_sizes(sig, 2, 3).unwrap();
        s.set_holds("P", 0, &[0], true).unwrap();
        s.set_holds("P", 1, &[1], true).unwrap();
        s.set_holds("P", 2, &[0], true).unwrap();
        s.set_holds("P", 2, &[1], true).unwrap();
        s
    }

    #[test]
    fn swapped_extensions_are_isomorphic() {
        let s = two_worlds_swapped();
        assert_eq!(isomorphism(&s, 0, 1), Some(vec![1, 0]));
        assert!(are_isomorphic(&s, 0, 0));
        assert!(!are_isomorphic(&s, 0, 2));
    }

    #[test]
    fn utility_invariance() {
        let s = two_worlds_swapped();
        let mut m = UtilityModel::new(s);
        m.utility[0] = vec![
            Some(Rational64::from_integer(1)),
            Some(Rational64::from_integer(1)),
            Some(Rational64::from_integer(5)),
        ];
        assert!(is_utility_invariant(&m));
        m.utility[0][1] = Some(Rational64::from_integer(2));
        assert!(!is_utility_invariant(&m));
    }

    #[test]
    fn binary_relations_respect_direction() {
        let sig = Signature::new([("G", 2)], std::iter::empty::<(&str, usize)>(), [IndexSet::singleton(1)])
            .unwrap();
        let mut s = Structure::with_sizes(sig, 2, 3).unwrap();
        s.set_holds("G", 0, &[0, 1], true).unwrap();
        s.set_holds("G", 1, &[1, 0], true).unwrap();
        s.set_holds("G", 2, &[0, 0], true).unwrap();
        assert!(are_isomorphic(&s, 0, 1));
        assert!(!are_isomorphic(&s, 0, 2));
    }
}
