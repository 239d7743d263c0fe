//! Plain enumeration of small models, for exhaustive property suites.
//!
//! Unlike [`find_model`](super::find_model) nothing here is lazy: every
//! model is materialized, so the sizes are only suitable for a handful of
//! worlds.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bases::{canonical_bases, Layout};
use super::SearchError;
use crate::model::{full_mask, GeneralizedModel, PreorderModel, Selector, Structure, UtilityModel};
use crate::syntax::Signature;

/// Dense rank vectors of length `n` using at most `levels` ranks: every
/// total preorder on `n` worlds with at most `levels` classes, once.
pub fn weak_orders(n: usize, levels: usize) -> Vec<Vec<u32>> {
    fn go(i: usize, n: usize, levels: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == n {
            let top = cur.iter().copied().max().map_or(0, |m| m + 1);
            if (0..top).all(|r| cur.contains(&r)) {
                out.push(cur.clone());
            }
            return;
        }
        for r in 0..levels as u32 {
            cur.push(r);
            go(i + 1, n, levels, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, levels, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Every combination of per-entry options, as selector tables.
pub struct Selectors {
    worlds: usize,
    options: Vec<Vec<u8>>,
    index: Vec<usize>,
    done: bool,
}

impl Selectors {
    fn new(worlds: usize, options: Vec<Vec<u8>>) -> Self {
        Selectors {
            worlds,
            done: options.iter().any(Vec::is_empty),
            index: vec![0; options.len()],
            options,
        }
    }
}

impl Iterator for Selectors {
    type Item = Selector;

    fn next(&mut self) -> Option<Selector> {
        if self.done {
            return None;
        }
        let choice = self
            .index
            .iter()
            .zip(&self.options)
            .map(|(&i, o)| o[i])
            .collect();
        // Advance the mixed-radix counter.
        self.done = true;
        for (i, o) in self.index.iter_mut().zip(&self.options) {
            *i += 1;
            if *i < o.len() {
                self.done = false;
                break;
            }
            *i = 0;
        }
        Some(Selector::Table {
            worlds: self.worlds,
            choice,
        })
    }
}

fn entry_options(n: usize, mut pick: impl FnMut(usize, u64) -> Vec<u8>) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for w in 0..n {
        for a in 1..=full_mask(n) {
            out.push(pick(w, a));
        }
    }
    out
}

fn members(a: u64) -> impl Iterator<Item = u8> {
    (0..64u8).filter(move |&v| a >> v & 1 == 1)
}

/// Every selector on `n` worlds.
pub fn all_selectors(n: usize) -> Selectors {
    assert!(n <= 4, "selector enumeration is limited to 4 worlds");
    Selectors::new(n, entry_options(n, |_, a| members(a).collect()))
}

/// One selector per way of choosing, at every `(w, A)`, a class of `A`
/// under `classes`; each class is represented by its lowest member. Any
/// selector agrees in every comparison with exactly one of these.
pub fn class_selectors(classes: &[u32]) -> Selectors {
    let n = classes.len();
    assert!(n <= 4, "selector enumeration is limited to 4 worlds");
    Selectors::new(
        n,
        entry_options(n, |_, a| {
            let mut seen = Vec::new();
            members(a)
                .filter(|&v| {
                    let fresh = !seen.contains(&classes[v as usize]);
                    seen.push(classes[v as usize]);
                    fresh
                })
                .collect()
        }),
    )
}

/// Structures up to renaming of worlds and elements, by world count then
/// domain size.
pub fn structures(sig: &Signature, max_domain: usize, max_worlds: usize) -> Result<Vec<Structure>, SearchError> {
    let mut out = Vec::new();
    for n in 1..=max_worlds {
        for d in 1..=max_domain {
            let layout = Layout::new(sig, d)?;
            for base in canonical_bases(&layout, n, 1, u64::MAX)? {
                let codes: Vec<u64> = base.iter().map(|c| c.0).collect();
                out.push(layout.structure(sig, &codes));
            }
        }
    }
    Ok(out)
}

/// Joint classes of worlds under several rank vectors.
fn joint_classes(ranks: &[Vec<u32>]) -> Vec<u32> {
    let n = ranks.first().map_or(0, Vec::len);
    let keys: Vec<Vec<u32>> = (0..n).map(|w| ranks.iter().map(|r| r[w]).collect()).collect();
    (0..n)
        .map(|w| keys.iter().position(|k| *k == keys[w]).expect("present") as u32)
        .collect()
}

fn rank_tuples(n: usize, k: usize, levels: usize) -> Vec<Vec<Vec<u32>>> {
    let orders = weak_orders(n, levels);
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                orders.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect();
    }
    out
}

/// Utility models over `s`: every assignment of the values (by rank, up to
/// order) combined with every class selector.
pub fn utility_models<'a>(s: &'a Structure, values: &'a [Rational64]) -> impl Iterator<Item = UtilityModel> + 'a {
    let n = s.world_len();
    let k = s.signature().indices().len();
    rank_tuples(n, k, values.len()).into_iter().flat_map(move |ranks| {
        let classes = joint_classes(&ranks);
        let utility: Vec<Vec<Option<Rational64>>> = ranks
            .iter()
            .map(|r| r.iter().map(|&c| Some(values[c as usize])).collect())
            .collect();
        class_selectors(&classes).map(move |selector| UtilityModel {
            structure: s.clone(),
            utility: utility.clone(),
            selector,
        })
    })
}

/// Preorder models over `s` with at most `levels` classes per preorder.
pub fn preorder_models(s: &Structure, levels: usize) -> impl Iterator<Item = PreorderModel> + '_ {
    let n = s.world_len();
    let k = s.signature().indices().len();
    rank_tuples(n, k, levels).into_iter().flat_map(move |ranks| {
        let classes = joint_classes(&ranks);
        let table: Vec<Vec<Option<u32>>> = ranks
            .iter()
            .map(|r| r.iter().map(|&c| Some(c)).collect())
            .collect();
        class_selectors(&classes).map(move |selector| PreorderModel {
            structure: s.clone(),
            ranks: table.clone(),
            selector,
        })
    })
}

/// Every generalized model over `s` (at most 2 worlds).
pub fn generalized_models(s: &Structure) -> impl Iterator<Item = GeneralizedModel> + '_ {
    let n = s.world_len();
    assert!(n <= 2, "generalized enumeration is limited to 2 worlds");
    let k = s.signature().indices().len();
    let subsets = (1usize << n) - 1;
    let orders = weak_orders(subsets, subsets);
    let slots = n * k;
    let total = orders.len().pow(slots as u32);
    (0..total).map(move |mut code| {
        let mut ranking = vec![vec![Vec::new(); k]; n];
        for w in 0..n {
            for x in 0..k {
                let o = &orders[code % orders.len()];
                code /= orders.len();
                ranking[w][x] = o.iter().map(|&r| Some(r)).collect();
            }
        }
        GeneralizedModel {
            structure: s.clone(),
            ranking,
        }
    })
}

/// The selector picking, at every `(w, A)`, a member of `A` of extreme rank
/// under `rank`, lowest index first.
fn by_rank(n: usize, rank: &[u32], best: bool) -> Selector {
    Selector::table_from_fn(n, |_, a| {
        let key = |v: &u8| if best { u32::MAX - rank[*v as usize] } else { rank[*v as usize] };
        members(a).min_by_key(key).expect("nonempty") as usize
    })
    .expect("small table")
}

/// Preorder models over `s` with a reduced family of selectors: for each
/// preorder, the min-index and reflexive min-index selectors, best and worst
/// by the first preorder, and `random` seeded uniform tables.
pub fn reduced_preorder_models(s: &Structure, levels: usize, random: usize, seed: u64) -> Vec<PreorderModel> {
    let n = s.world_len();
    let k = s.signature().indices().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for ranks in rank_tuples(n, k, levels) {
        let table: Vec<Vec<Option<u32>>> = ranks
            .iter()
            .map(|r| r.iter().map(|&c| Some(c)).collect())
            .collect();
        let mut selectors = vec![
            Selector::min_index(n).to_table().expect("small table"),
            Selector::reflexive_min_index(n).to_table().expect("small table"),
            by_rank(n, &ranks[0], true),
            by_rank(n, &ranks[0], false),
        ];
        for _ in 0..random {
            selectors.push(random_selector(n, &mut rng));
        }
        for selector in selectors {
            out.push(PreorderModel {
                structure: s.clone(),
                ranks: table.clone(),
                selector,
            });
        }
    }
    out
}

/// A uniformly random selector table.
pub fn random_selector(n: usize, rng: &mut impl Rng) -> Selector {
    Selector::table_from_fn(n, |_, a| {
        let m: Vec<u8> = members(a).collect();
        m[rng.gen_range(0..m.len())] as usize
    })
    .expect("small table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::IndexSet;

    #[test]
    fn weak_order_counts_are_fubini_numbers() {
        assert_eq!(weak_orders(3, 3).len(), 13);
        assert_eq!(weak_orders(4, 4).len(), 75);
        assert_eq!(weak_orders(3, 2).len(), 7);
    }

    #[test]
    fn selector_counts() {
        // Per world: 1 * 2 * 2 * 2 * 3 choices at three worlds.
        assert_eq!(all_selectors(3).count(), 24usize.pow(3));
        assert_eq!(all_selectors(1).count(), 1);
        // All worlds in one class leaves a single selector.
        assert_eq!(class_selectors(&[0, 0, 0]).count(), 1);
        assert_eq!(class_selectors(&[0, 1, 2]).count(), 24usize.pow(3));
        // Classes {0,1} and {2}: only sets meeting both classes branch.
        assert_eq!(class_selectors(&[0, 0, 1]).count(), 8usize.pow(3));
    }

    #[test]
    fn selectors_are_valid_and_distinct() {
        let all: Vec<Selector> = all_selectors(2).collect();
        assert_eq!(all.len(), 4);
        for (i, s) in all.iter().enumerate() {
            for w in 0..2 {
                for a in 1..4u64 {
                    assert!(a >> s.select(w, a).unwrap() & 1 == 1);
                }
            }
            assert!(all[..i].iter().all(|t| t != s));
        }
    }

    #[test]
    fn structure_counts() {
        let sig = Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap();
        // One world: P over one element (2 ways), over two elements up to
        // swapping (3 ways).
        assert_eq!(structures(&sig, 2, 1).unwrap().len(), 5);
    }

    #[test]
    fn generalized_count() {
        let sig = Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap();
        let s = Structure::with_sizes(sig, 1, 2).unwrap();
        assert_eq!(generalized_models(&s).count(), 13 * 13);
    }

    #[test]
    fn reduced_family_validates() {
        let sig = Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap();
        let s = Structure::with_sizes(sig, 1, 3).unwrap();
        let models = reduced_preorder_models(&s, 3, 2, 7);
        assert_eq!(models.len(), 13 * 6);
        assert!(models.iter().all(|m| m.validate().is_empty()));
    }
}
