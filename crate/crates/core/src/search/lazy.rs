//! Depth-first search over partially specified models.
//!
//! The interpretation is fixed by a base; selector entries and the ranks of
//! worlds (or, in generalized semantics, of propositions) start unknown. The
//! evaluator runs against the partial model and stops at the first unknown
//! entry it needs, the search branches over that entry's admissible values,
//! and a branch ends as soon as the target formula's value at the target
//! world is determined. Every complete model extends exactly one leaf, so the
//! search is exhaustive without enumerating entries the formula never reads.

use num_rational::Rational64;

use super::FrameClass;
use crate::eval::{Compiled, Evaluator, NodeId, PreferenceOracle};
use crate::model::{
    full_mask, metric_with_constraints, DistanceMatrix, Flavor, GeneralizedModel, Model,
    PreorderModel, Selector, Structure, UtilityModel,
};

const UNSET_SEL: u8 = u8::MAX;
const UNRANKED: u16 = u16::MAX;

/// A total preorder on the items ranked so far, as class numbers (0 worst).
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct WeakOrder {
    class: Vec<u16>,
    classes: u16,
}

impl WeakOrder {
    pub fn new(items: usize) -> Self {
        WeakOrder {
            class: vec![UNRANKED; items],
            classes: 0,
        }
    }

    #[inline]
    pub fn get(&self, item: usize) -> Option<u16> {
        let c = self.class[item];
        (c != UNRANKED).then_some(c)
    }

    fn join(&self, item: usize, c: u16) -> WeakOrder {
        let mut o = self.clone();
        o.class[item] = c;
        o
    }

    fn insert(&self, item: usize, pos: u16) -> WeakOrder {
        let mut o = self.clone();
        for c in o.class.iter_mut() {
            if *c != UNRANKED && *c >= pos {
                *c += 1;
            }
        }
        o.class[item] = pos;
        o.classes += 1;
        o
    }

    /// Every way of ranking `item` relative to the ranked items, with at most
    /// `limit` classes.
    fn extensions(&self, item: usize, limit: usize) -> Vec<WeakOrder> {
        let mut out: Vec<WeakOrder> = (0..self.classes).map(|c| self.join(item, c)).collect();
        if (self.classes as usize) < limit {
            out.extend((0..=self.classes).map(|p| self.insert(item, p)));
        }
        out
    }

    /// Unranked items join the bottom class.
    pub fn completed(&self) -> Vec<u32> {
        self.class
            .iter()
            .map(|&c| if c == UNRANKED { 0 } else { c as u32 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Need {
    Select(usize, u64),
    Rank(usize, usize),
    Gen(usize, usize, u64),
}

#[derive(Debug, Clone)]
pub(crate) struct Frame {
    n: usize,
    sel: Vec<u8>,
    /// `before[w * n + a]`: worlds that `a` must precede in row `w`'s order
    /// (transitive and metric classes only).
    before: Vec<u64>,
    ranks: Vec<WeakOrder>,
    gen: Vec<WeakOrder>,
}

pub(crate) struct Config<'a> {
    pub prog: &'a Compiled,
    pub root: NodeId,
    pub semantics: Flavor,
    pub frame: FrameClass,
    /// Maximum number of rank classes per index set (the utility levels).
    pub levels: usize,
    pub values: &'a [Rational64],
}

impl Config<'_> {
    fn reflexive(&self) -> bool {
        matches!(self.frame, FrameClass::Reflexive | FrameClass::Metric(_))
    }

    fn ordered(&self) -> bool {
        matches!(self.frame, FrameClass::Transitive | FrameClass::Metric(_))
    }
}

struct PartialOracle<'f> {
    frame: &'f Frame,
    reflexive: bool,
    k: usize,
}

impl PartialOracle<'_> {
    #[inline]
    fn select(&self, w: usize, set: u64) -> Result<usize, Need> {
        if set & (set - 1) == 0 {
            return Ok(set.trailing_zeros() as usize);
        }
        if self.reflexive && set >> w & 1 == 1 {
            return Ok(w);
        }
        let subsets = (1usize << self.frame.n) - 1;
        match self.frame.sel[w * subsets + set as usize - 1] {
            UNSET_SEL => Err(Need::Select(w, set)),
            c => Ok(c as usize),
        }
    }
}

impl PreferenceOracle for PartialOracle<'_> {
    type Need = Need;

    fn compare(&self, x: usize, left: u64, right: u64, mask: u64) -> Result<u64, Need> {
        let mut out = 0u64;
        let mut rest = mask;
        let generalized = !self.frame.gen.is_empty();
        while rest != 0 {
            let w = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let better = if generalized {
                if left == right {
                    true
                } else {
                    let o = &self.frame.gen[w * self.k + x];
                    let a = o.get(left as usize - 1).ok_or(Need::Gen(w, x, left))?;
                    let b = o.get(right as usize - 1).ok_or(Need::Gen(w, x, right))?;
                    a >= b
                }
            } else {
                let a = self.select(w, left)?;
                let b = self.select(w, right)?;
                if a == b {
                    true
                } else {
                    let o = &self.frame.ranks[x];
                    let ra = o.get(a).ok_or(Need::Rank(x, a))?;
                    let rb = o.get(b).ok_or(Need::Rank(x, b))?;
                    ra >= rb
                }
            };
            if better {
                out |= 1 << w;
            }
        }
        Ok(out)
    }
}

/// Outcome of searching one base.
pub(crate) enum Leaf {
    Found(Frame, Option<DistanceMatrix>),
    Exhausted,
    OverLimit,
}

pub(crate) struct BaseSearch<'a> {
    cfg: &'a Config<'a>,
    structure: &'a Structure,
    /// Isomorphism class of each world (utility-invariant class only).
    iso: Vec<usize>,
    k: usize,
    pub nodes: u64,
    limit: u64,
}

impl<'a> BaseSearch<'a> {
    pub fn new(cfg: &'a Config<'a>, structure: &'a Structure, iso: Vec<usize>, limit: u64) -> Self {
        BaseSearch {
            cfg,
            structure,
            iso,
            k: structure.signature().indices().len(),
            nodes: 0,
            limit,
        }
    }

    pub fn empty_frame(&self) -> Frame {
        let n = self.structure.world_len();
        let subsets = (1usize << n) - 1;
        let generalized = self.cfg.semantics == Flavor::Generalized;
        let mut before = Vec::new();
        if self.cfg.ordered() {
            before = vec![0u64; n * n];
            if self.cfg.reflexive() {
                for w in 0..n {
                    before[w * n + w] = full_mask(n) & !(1 << w);
                }
            }
        }
        Frame {
            n,
            sel: if generalized { Vec::new() } else { vec![UNSET_SEL; n * subsets] },
            before,
            ranks: if generalized {
                Vec::new()
            } else {
                vec![WeakOrder::new(n); self.k]
            },
            gen: if generalized {
                vec![WeakOrder::new(subsets); n * self.k]
            } else {
                Vec::new()
            },
        }
    }

    /// Looks for an extension of `frame` in which membership of `world` in
    /// the target's truth set (at assignment `env`, by slot) equals `want`.
    pub fn run(&mut self, frame: Frame, world: usize, env: &[usize], want: bool) -> Leaf {
        self.nodes += 1;
        if self.nodes > self.limit {
            return Leaf::OverLimit;
        }
        let need = {
            let oracle = PartialOracle {
                frame: &frame,
                reflexive: self.cfg.reflexive(),
                k: self.k,
            };
            let mut ev = Evaluator::new(self.cfg.prog, self.structure, oracle);
            for (slot, &e) in env.iter().enumerate() {
                ev.set_slot(slot, e);
            }
            match ev.prop(self.cfg.root, 1 << world) {
                Ok(bits) => {
                    if (bits != 0) != want {
                        return Leaf::Exhausted;
                    }
                    None
                }
                Err(need) => Some(need),
            }
        };
        let Some(need) = need else {
            if let FrameClass::Metric(bound) = self.cfg.frame {
                return match self.metric_for(&frame, bound) {
                    Some(d) => Leaf::Found(frame, Some(d)),
                    None => Leaf::Exhausted,
                };
            }
            return Leaf::Found(frame, None);
        };
        for child in self.children(&frame, &need) {
            match self.run(child, world, env, want) {
                Leaf::Exhausted => continue,
                other => return other,
            }
        }
        Leaf::Exhausted
    }

    fn rank_determined(&self, frame: &Frame, x: usize, a: usize) -> Option<u16> {
        let o = &frame.ranks[x];
        if let Some(c) = o.get(a) {
            return Some(c);
        }
        if self.cfg.frame == FrameClass::UtilityInvariant {
            return (0..frame.n)
                .filter(|&v| self.iso[v] == self.iso[a])
                .find_map(|v| o.get(v));
        }
        None
    }

    fn children(&self, frame: &Frame, need: &Need) -> Vec<Frame> {
        let n = frame.n;
        match *need {
            Need::Select(w, set) => {
                let subsets = (1usize << n) - 1;
                let mut out = Vec::new();
                let mut seen: Vec<Vec<u16>> = Vec::new();
                for c in (0..n).filter(|c| set >> c & 1 == 1) {
                    let rest = set & !(1 << c);
                    if self.cfg.ordered() {
                        let blocked = (0..n)
                            .filter(|b| rest >> b & 1 == 1)
                            .any(|b| frame.before[w * n + b] >> c & 1 == 1);
                        if blocked {
                            continue;
                        }
                    } else {
                        // Members with the same determined ranks lead to the
                        // same evaluations.
                        let key: Option<Vec<u16>> = (0..self.k)
                            .map(|x| self.rank_determined(frame, x, c))
                            .collect();
                        if let Some(key) = key {
                            if seen.contains(&key) {
                                continue;
                            }
                            seen.push(key);
                        }
                    }
                    let mut f = frame.clone();
                    f.sel[w * subsets + set as usize - 1] = c as u8;
                    if self.cfg.ordered() {
                        let mut add = rest;
                        for b in (0..n).filter(|b| rest >> b & 1 == 1) {
                            add |= frame.before[w * n + b];
                        }
                        for y in 0..n {
                            if y == c || frame.before[w * n + y] >> c & 1 == 1 {
                                f.before[w * n + y] |= add;
                            }
                        }
                    }
                    out.push(f);
                }
                out
            }
            Need::Rank(x, a) => {
                if let Some(c) = self.rank_determined(frame, x, a) {
                    let mut f = frame.clone();
                    f.ranks[x] = frame.ranks[x].join(a, c);
                    return vec![f];
                }
                frame.ranks[x]
                    .extensions(a, self.cfg.levels)
                    .into_iter()
                    .map(|o| {
                        let mut f = frame.clone();
                        f.ranks[x] = o;
                        f
                    })
                    .collect()
            }
            Need::Gen(w, x, set) => {
                let i = w * self.k + x;
                frame.gen[i]
                    .extensions(set as usize - 1, usize::MAX)
                    .into_iter()
                    .map(|o| {
                        let mut f = frame.clone();
                        f.gen[i] = o;
                        f
                    })
                    .collect()
            }
        }
    }

    fn metric_for(&self, frame: &Frame, bound: u32) -> Option<DistanceMatrix> {
        let n = frame.n;
        let mut lt = Vec::new();
        for w in 0..n {
            for a in (0..n).filter(|&a| a != w) {
                let after = frame.before[w * n + a];
                for b in (0..n).filter(|b| after >> b & 1 == 1) {
                    lt.push(((w, a), (w, b)));
                }
            }
        }
        metric_with_constraints(n, &lt, true, bound)
    }

    /// Row order for the transitive completion: a topological order of the
    /// row's constraints, least index first among the available worlds.
    fn row_order(frame: &Frame, w: usize) -> Vec<usize> {
        let n = frame.n;
        let mut placed = 0u64;
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n)
                .find(|&a| {
                    placed >> a & 1 == 0
                        && (0..n).all(|y| {
                            placed >> y & 1 == 1 || y == a || frame.before[w * n + y] >> a & 1 == 0
                        })
                })
                .expect("constraints are acyclic");
            placed |= 1 << next;
            order.push(next);
        }
        order
    }

    /// A complete model extending `frame`.
    pub fn complete(&self, frame: &Frame, metric: Option<&DistanceMatrix>) -> Model {
        let n = frame.n;
        let s = self.structure.clone();
        if self.cfg.semantics == Flavor::Generalized {
            let ranking = (0..n)
                .map(|w| {
                    (0..self.k)
                        .map(|x| {
                            frame.gen[w * self.k + x]
                                .completed()
                                .into_iter()
                                .map(Some)
                                .collect()
                        })
                        .collect()
                })
                .collect();
            return Model::Generalized(GeneralizedModel {
                structure: s,
                ranking,
            });
        }
        let subsets = (1usize << n) - 1;
        let orders: Vec<Vec<usize>> = if self.cfg.ordered() {
            (0..n).map(|w| Self::row_order(frame, w)).collect()
        } else {
            Vec::new()
        };
        let selector = Selector::table_from_fn(n, |w, set| {
            if set & (set - 1) == 0 {
                return set.trailing_zeros() as usize;
            }
            if let Some(d) = metric {
                return (0..n)
                    .filter(|a| set >> a & 1 == 1)
                    .min_by_key(|&a| d.d[w][a])
                    .expect("nonempty");
            }
            if self.cfg.reflexive() && set >> w & 1 == 1 {
                return w;
            }
            match frame.sel[w * subsets + set as usize - 1] {
                UNSET_SEL if self.cfg.ordered() => *orders[w]
                    .iter()
                    .find(|&&a| set >> a & 1 == 1)
                    .expect("nonempty"),
                UNSET_SEL => set.trailing_zeros() as usize,
                c => c as usize,
            }
        })
        .expect("search sizes fit a table");
        let ranks: Vec<Vec<Option<u32>>> = (0..self.k)
            .map(|x| {
                (0..n)
                    .map(|a| Some(self.rank_determined(frame, x, a).map_or(0, u32::from)))
                    .collect()
            })
            .collect();
        match self.cfg.semantics {
            Flavor::Preorder => Model::Preorder(PreorderModel {
                structure: s,
                ranks,
                selector,
            }),
            _ => Model::Utility(UtilityModel {
                structure: s,
                utility: ranks
                    .iter()
                    .map(|row| row.iter().map(|r| r.map(|r| self.cfg.values[r as usize])).collect())
                    .collect(),
                selector,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weak_order_extensions_count_positions() {
        let o = WeakOrder::new(3);
        let e = o.extensions(0, 3);
        assert_eq!(e.len(), 1);
        let o = &e[0];
        // Join class 0, or a new class below or above.
        let e = o.extensions(1, 3);
        assert_eq!(e.len(), 3);
        assert_eq!(e[1].completed(), vec![1, 0, 0]);
        assert_eq!(e[2].completed(), vec![0, 1, 0]);
        // Level cap stops new classes.
        assert_eq!(e[1].extensions(2, 2).len(), 2);
    }

    #[test]
    fn all_weak_orders_are_reached_once() {
        // Ordered set partitions of 3 items: the Fubini number 13.
        let mut orders = vec![WeakOrder::new(3)];
        for item in 0..3 {
            orders = orders
                .iter()
                .flat_map(|o| o.extensions(item, usize::MAX))
                .collect();
        }
        let mut flat: Vec<Vec<u32>> = orders.iter().map(|o| o.completed()).collect();
        assert_eq!(flat.len(), 13);
        flat.sort();
        flat.dedup();
        assert_eq!(flat.len(), 13);
    }
}
