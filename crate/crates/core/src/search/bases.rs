//! Interpretations up to renaming of worlds and domain elements.
//!
//! A world's interpretation is packed into one `u64` with one bit per
//! (predicate, tuple) pair. A base is a non-decreasing list of world codes,
//! optionally paired with a valuation label; it is kept only if no domain
//! permutation maps it to a lexicographically smaller sorted list. Every
//! structure is isomorphic to exactly one kept base.

use itertools::Itertools;

use super::SearchError;
use crate::model::Structure;
use crate::syntax::Signature;

#[derive(Debug, Clone)]
pub(crate) struct Layout {
    offsets: Vec<usize>,
    arities: Vec<usize>,
    pub bits: usize,
    pub dsize: usize,
    /// For each non-identity permutation of the domain, the image of each bit.
    perms: Vec<Vec<usize>>,
}

impl Layout {
    pub fn new(sig: &Signature, dsize: usize) -> Result<Layout, SearchError> {
        if !sig.functions().is_empty() {
            return Err(SearchError::Unsupported(
                "model search enumerates relational vocabularies only".into(),
            ));
        }
        let mut offsets = Vec::new();
        let mut arities = Vec::new();
        let mut bits = 0usize;
        for &arity in sig.predicates().values() {
            offsets.push(bits);
            arities.push(arity);
            bits = dsize
                .checked_pow(arity as u32)
                .and_then(|t| bits.checked_add(t))
                .filter(|&b| b <= 64)
                .ok_or_else(|| {
                    SearchError::Unsupported(format!(
                        "the vocabulary needs more than 64 atoms per world at domain size {dsize}"
                    ))
                })?;
        }
        let mut layout = Layout {
            offsets,
            arities,
            bits,
            dsize,
            perms: Vec::new(),
        };
        let identity: Vec<usize> = (0..dsize).collect();
        for h in (0..dsize).permutations(dsize) {
            if h == identity {
                continue;
            }
            let table = (0..bits).map(|b| layout.image_bit(b, &h)).collect();
            layout.perms.push(table);
        }
        Ok(layout)
    }

    fn image_bit(&self, bit: usize, h: &[usize]) -> usize {
        let p = self.offsets.iter().rposition(|&o| o <= bit).expect("bit in range");
        let mut code = bit - self.offsets[p];
        let mut image = 0usize;
        let mut place = 1usize;
        for _ in 0..self.arities[p] {
            image += h[code % self.dsize] * place;
            code /= self.dsize;
            place *= self.dsize;
        }
        self.offsets[p] + image
    }

    pub fn code_count(&self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            1u64 << self.bits
        }
    }

    fn max_code(&self) -> u64 {
        match self.bits {
            0 => 0,
            b => u64::MAX >> (64 - b),
        }
    }

    fn apply(table: &[usize], code: u64) -> u64 {
        let mut out = 0u64;
        let mut rest = code;
        while rest != 0 {
            let b = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1 << table[b];
        }
        out
    }

    /// Interpretation bits of world `w` of a structure with this layout.
    #[cfg(test)]
    pub fn code_of(&self, s: &Structure, w: usize) -> u64 {
        let mut code = 0u64;
        for (p, &off) in self.offsets.iter().enumerate() {
            let tuples = self.dsize.pow(self.arities[p] as u32);
            for t in 0..tuples {
                if s.atom_worlds(p, t) >> w & 1 == 1 {
                    code |= 1 << (off + t);
                }
            }
        }
        code
    }

    pub fn structure(&self, sig: &Signature, codes: &[u64]) -> Structure {
        let mut s = Structure::with_sizes(sig.clone(), self.dsize, codes.len())
            .expect("layout fits");
        for (p, &off) in self.offsets.iter().enumerate() {
            let tuples = self.dsize.pow(self.arities[p] as u32);
            for t in 0..tuples {
                let mut worlds = 0u64;
                for (w, &c) in codes.iter().enumerate() {
                    if c >> (off + t) & 1 == 1 {
                        worlds |= 1 << w;
                    }
                }
                s.set_atom_worlds(p, t, worlds);
            }
        }
        s
    }
}

fn multiset_count(kinds: u128, n: usize) -> u128 {
    // C(kinds + n - 1, n), saturating.
    let mut acc: u128 = 1;
    for i in 0..n as u128 {
        acc = acc.saturating_mul(kinds + i) / (i + 1);
    }
    acc
}

/// Canonical bases of `n` worlds whose codes are `(interpretation, label)`
/// with `label < labels`. Labels are left fixed by domain permutations.
pub(crate) fn canonical_bases(
    layout: &Layout,
    n: usize,
    labels: u32,
    limit: u64,
) -> Result<Vec<Vec<(u64, u32)>>, SearchError> {
    let kinds = layout.code_count() as u128 * labels as u128;
    if multiset_count(kinds, n) > limit as u128 {
        return Err(SearchError::BudgetExceeded { budget: limit });
    }
    let mut out = Vec::new();
    let mut current: Vec<(u64, u32)> = Vec::with_capacity(n);
    let mut scratch = Vec::with_capacity(n);
    extend(layout, n, labels, &mut current, &mut scratch, &mut out);
    Ok(out)
}

fn next_code(layout: &Layout, labels: u32, c: (u64, u32)) -> Option<(u64, u32)> {
    if c.1 + 1 < labels {
        Some((c.0, c.1 + 1))
    } else if c.0 < layout.max_code() {
        Some((c.0 + 1, 0))
    } else {
        None
    }
}

fn extend(
    layout: &Layout,
    n: usize,
    labels: u32,
    current: &mut Vec<(u64, u32)>,
    scratch: &mut Vec<(u64, u32)>,
    out: &mut Vec<Vec<(u64, u32)>>,
) {
    if current.len() == n {
        if is_canonical(layout, current, scratch) {
            out.push(current.clone());
        }
        return;
    }
    let mut c = current.last().copied().unwrap_or((0, 0));
    loop {
        current.push(c);
        extend(layout, n, labels, current, scratch, out);
        current.pop();
        match next_code(layout, labels, c) {
            Some(d) => c = d,
            None => break,
        }
    }
}

fn is_canonical(layout: &Layout, codes: &[(u64, u32)], scratch: &mut Vec<(u64, u32)>) -> bool {
    for table in &layout.perms {
        scratch.clear();
        scratch.extend(codes.iter().map(|&(c, l)| (Layout::apply(table, c), l)));
        scratch.sort_unstable();
        if scratch.as_slice() < codes {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::are_isomorphic;
    use crate::syntax::IndexSet;

    fn unary() -> Signature {
        Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap()
    }

    #[test]
    fn one_world_two_elements() {
        // P empty, P = {a} (same as {b}), P = D.
        let layout = Layout::new(&unary(), 2).unwrap();
        let bases = canonical_bases(&layout, 1, 1, 1000).unwrap();
        let codes: Vec<u64> = bases.iter().map(|b| b[0].0).collect();
        assert_eq!(codes, vec![0, 1, 3]);
    }

    #[test]
    fn bases_are_pairwise_non_isomorphic_and_cover() {
        // Brute force over all code tuples: each is isomorphic (by world and
        // element renaming) to exactly one canonical base.
        let sig = unary();
        let layout = Layout::new(&sig, 2).unwrap();
        let bases = canonical_bases(&layout, 2, 1, 1000).unwrap();
        let key = |codes: &[u64]| {
            let mut best: Option<Vec<u64>> = None;
            for h in [vec![0usize, 1], vec![1, 0]] {
                let mut img: Vec<u64> = codes
                    .iter()
                    .map(|&c| (0..2).filter(|&a| c >> a & 1 == 1).map(|a| 1u64 << h[a]).sum())
                    .collect();
                img.sort();
                if best.as_ref().map_or(true, |b| img < *b) {
                    best = Some(img);
                }
            }
            best.unwrap()
        };
        let mut classes = std::collections::BTreeSet::new();
        for a in 0..4u64 {
            for b in 0..4u64 {
                classes.insert(key(&[a, b]));
            }
        }
        let found: std::collections::BTreeSet<Vec<u64>> =
            bases.iter().map(|b| b.iter().map(|c| c.0).collect()).collect();
        assert_eq!(found, classes);
        assert_eq!(found.len(), bases.len());
    }

    #[test]
    fn binary_layout_maps_tuples() {
        let sig = Signature::new([("G", 2)], std::iter::empty::<(&str, usize)>(), [IndexSet::singleton(1)])
            .unwrap();
        let layout = Layout::new(&sig, 2).unwrap();
        assert_eq!(layout.bits, 4);
        // Swapping a and b maps (a,b) (code 2) to (b,a) (code 1).
        assert_eq!(Layout::apply(&layout.perms[0], 1 << 2), 1 << 1);
        let s = layout.structure(&sig, &[1 << 2, 1 << 1]);
        assert!(s.holds("G", 0, &[0, 1]));
        assert!(s.holds("G", 1, &[1, 0]));
        assert!(are_isomorphic(&s, 0, 1));
        assert_eq!(layout.code_of(&s, 1), 1 << 1);
    }

    #[test]
    fn labels_are_part_of_the_code() {
        let layout = Layout::new(&unary(), 1).unwrap();
        let bases = canonical_bases(&layout, 2, 2, 1000).unwrap();
        // Codes (interp, label) over 2 x 2 kinds, multisets of size 2.
        assert_eq!(bases.len(), 10);
    }

    #[test]
    fn oversized_enumerations_are_refused() {
        let layout = Layout::new(&unary(), 3).unwrap();
        assert!(matches!(
            canonical_bases(&layout, 6, 1, 10),
            Err(SearchError::BudgetExceeded { .. })
        ));
    }
}
