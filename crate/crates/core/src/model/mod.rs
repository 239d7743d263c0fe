//! Explicit finite models for utility, preorder and generalized semantics.

mod frames;
mod iso;
pub mod json;

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::syntax::{IndexSet, Signature, Var};

pub(crate) use frames::metric_with_constraints;
pub use frames::{
    is_metric, is_order_rationalizable, is_reflexive, is_transitive, metric_witness,
    DistanceMatrix,
};
pub use iso::{are_isomorphic, isomorphism, is_utility_invariant};

/// World sets are `u64` bitsets, so at most this many worlds.
pub const MAX_WORLDS: usize = 64;
/// Dense per-subset tables (selectors, generalized rankings) are capped here.
pub const MAX_TABLE_WORLDS: usize = 12;
const MAX_TUPLES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("too many worlds: {0} (limit {MAX_WORLDS})")]
    TooManyWorlds(usize),
    #[error("dense tables need at most {MAX_TABLE_WORLDS} worlds, got {0}")]
    TableTooLarge(usize),
    #[error("interpretation of {0:?} is too large for the domain size")]
    TooManyTuples(String),
    #[error("unknown {kind} {name:?}")]
    Unknown { kind: &'static str, name: String },
    #[error("malformed model: {0}")]
    Format(String),
}

/// A set of worlds of a fixed model.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Proposition {
    bits: u64,
    len: u8,
}

pub(crate) fn full_mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl Proposition {
    pub fn empty(len: usize) -> Self {
        assert!(len <= MAX_WORLDS);
        Proposition { bits: 0, len: len as u8 }
    }

    pub fn full(len: usize) -> Self {
        assert!(len <= MAX_WORLDS);
        Proposition {
            bits: full_mask(len),
            len: len as u8,
        }
    }

    /// Bits above `len` are discarded.
    pub fn from_bits(bits: u64, len: usize) -> Self {
        assert!(len <= MAX_WORLDS);
        Proposition {
            bits: bits & full_mask(len),
            len: len as u8,
        }
    }

    pub fn from_worlds<I: IntoIterator<Item = usize>>(worlds: I, len: usize) -> Self {
        let mut bits = 0u64;
        for w in worlds {
            assert!(w < len, "world {w} out of range");
            bits |= 1 << w;
        }
        Proposition::from_bits(bits, len)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn contains(self, w: usize) -> bool {
        w < self.len() && self.bits >> w & 1 == 1
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn is_full(self) -> bool {
        self.bits == full_mask(self.len())
    }

    pub fn count(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn complement(self) -> Self {
        Proposition::from_bits(!self.bits, self.len())
    }

    pub fn is_subset(self, other: Proposition) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn worlds(self) -> impl Iterator<Item = usize> {
        let bits = self.bits;
        (0..self.len()).filter(move |w| bits >> w & 1 == 1)
    }
}

impl std::ops::BitAnd for Proposition {
    type Output = Proposition;
    fn bitand(self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        Proposition {
            bits: self.bits & rhs.bits,
            len: self.len,
        }
    }
}

impl std::ops::BitOr for Proposition {
    type Output = Proposition;
    fn bitor(self, rhs: Self) -> Self {
        debug_assert_eq!(self.len, rhs.len);
        Proposition {
            bits: self.bits | rhs.bits,
            len: self.len,
        }
    }
}

impl std::ops::Not for Proposition {
    type Output = Proposition;
    fn not(self) -> Self {
        self.complement()
    }
}

impl fmt::Debug for Proposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, w) in self.worlds().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{w}")?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct PredicateTable {
    arity: usize,
    /// Worlds at which each tuple (by code) is in the extension.
    holds: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct FunctionTable {
    arity: usize,
    /// `graphs[w][code]`, the value at world `w` on the argument tuple.
    graphs: Vec<Vec<Option<u32>>>,
}

/// The shared part `<D, W, t>` of every model flavor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    signature: Signature,
    domain: Vec<String>,
    worlds: Vec<String>,
    predicates: Vec<PredicateTable>,
    functions: Vec<FunctionTable>,
}

fn tuple_count(domain: usize, arity: usize) -> Option<usize> {
    let mut n: usize = 1;
    for _ in 0..arity {
        n = n.checked_mul(domain)?;
        if n > MAX_TUPLES {
            return None;
        }
    }
    Some(n)
}

impl Structure {
    /// Empty extensions everywhere; functions start undefined.
    pub fn new(
        signature: Signature,
        domain: Vec<String>,
        worlds: Vec<String>,
    ) -> Result<Self, ModelError> {
        if worlds.len() > MAX_WORLDS {
            return Err(ModelError::TooManyWorlds(worlds.len()));
        }
        let mut predicates = Vec::new();
        for (name, &arity) in signature.predicates() {
            let n = tuple_count(domain.len(), arity)
                .ok_or_else(|| ModelError::TooManyTuples(name.clone()))?;
            predicates.push(PredicateTable {
                arity,
                holds: vec![0; n],
            });
        }
        let mut functions = Vec::new();
        for (name, &arity) in signature.functions() {
            let n = tuple_count(domain.len(), arity)
                .ok_or_else(|| ModelError::TooManyTuples(name.clone()))?;
            functions.push(FunctionTable {
                arity,
                graphs: vec![vec![None; n]; worlds.len()],
            });
        }
        Ok(Structure {
            signature,
            domain,
            worlds,
            predicates,
            functions,
        })
    }

    /// Structure with generated names `e0..` and `w0..`.
    pub fn with_sizes(signature: Signature, domain: usize, worlds: usize) -> Result<Self, ModelError> {
        Structure::new(
            signature,
            (0..domain).map(|i| format!("e{i}")).collect(),
            (0..worlds).map(|i| format!("w{i}")).collect(),
        )
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn domain_len(&self) -> usize {
        self.domain.len()
    }

    pub fn world_len(&self) -> usize {
        self.worlds.len()
    }

    pub fn all_worlds(&self) -> Proposition {
        Proposition::full(self.world_len())
    }

    pub fn element_index(&self, name: &str) -> Option<usize> {
        self.domain.iter().position(|e| e == name)
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.worlds.iter().position(|w| w == name)
    }

    pub fn predicate_id(&self, name: &str) -> Option<usize> {
        self.signature.predicates().keys().position(|p| p == name)
    }

    pub fn function_id(&self, name: &str) -> Option<usize> {
        self.signature.functions().keys().position(|p| p == name)
    }

    pub fn tuple_code(&self, tuple: &[usize]) -> usize {
        let n = self.domain.len();
        tuple.iter().rev().fold(0, |acc, &a| acc * n + a)
    }

    pub fn decode_tuple(&self, mut code: usize, arity: usize) -> Vec<usize> {
        let n = self.domain.len().max(1);
        let mut out = Vec::with_capacity(arity);
        for _ in 0..arity {
            out.push(code % n);
            code /= n;
        }
        out
    }

    fn pred(&self, name: &str) -> Result<usize, ModelError> {
        self.predicate_id(name).ok_or_else(|| ModelError::Unknown {
            kind: "predicate",
            name: name.to_string(),
        })
    }

    pub fn set_holds(&mut self, pred: &str, world: usize, tuple: &[usize], value: bool) -> Result<(), ModelError> {
        let id = self.pred(pred)?;
        let table = &mut self.predicates[id];
        if tuple.len() != table.arity || tuple.iter().any(|&a| a >= self.domain.len()) {
            return Err(ModelError::Format(format!("bad tuple {tuple:?} for {pred}")));
        }
        if world >= self.worlds.len() {
            return Err(ModelError::Format(format!("bad world {world}")));
        }
        let code = {
            let n = self.domain.len();
            tuple.iter().rev().fold(0, |acc, &a| acc * n + a)
        };
        if value {
            table.holds[code] |= 1 << world;
        } else {
            table.holds[code] &= !(1 << world);
        }
        Ok(())
    }

    pub fn holds(&self, pred: &str, world: usize, tuple: &[usize]) -> bool {
        let Some(id) = self.predicate_id(pred) else {
            return false;
        };
        self.predicates[id].holds[self.tuple_code(tuple)] >> world & 1 == 1
    }

    /// Worlds at which `tuple` is in the extension of predicate `id`.
    pub fn atom_worlds(&self, id: usize, code: usize) -> u64 {
        self.predicates[id].holds[code]
    }

    pub(crate) fn set_atom_worlds(&mut self, id: usize, code: usize, worlds: u64) {
        self.predicates[id].holds[code] = worlds;
    }

    pub fn predicate_arity_by_id(&self, id: usize) -> usize {
        self.predicates[id].arity
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    pub fn function_count(&self) -> usize {
        self.functions.len()
    }

    pub fn function_arity_by_id(&self, id: usize) -> usize {
        self.functions[id].arity
    }

    /// `t(w, P)` as a sorted list of tuples.
    pub fn extension(&self, pred: &str, world: usize) -> Vec<Vec<usize>> {
        let Some(id) = self.predicate_id(pred) else {
            return Vec::new();
        };
        let table = &self.predicates[id];
        (0..table.holds.len())
            .filter(|&c| table.holds[c] >> world & 1 == 1)
            .map(|c| self.decode_tuple(c, table.arity))
            .collect()
    }

    pub fn set_function(&mut self, name: &str, world: usize, args: &[usize], value: usize) -> Result<(), ModelError> {
        let id = self.function_id(name).ok_or_else(|| ModelError::Unknown {
            kind: "function",
            name: name.to_string(),
        })?;
        if args.len() != self.functions[id].arity
            || args.iter().chain([&value]).any(|&a| a >= self.domain.len())
            || world >= self.worlds.len()
        {
            return Err(ModelError::Format(format!("bad entry for function {name}")));
        }
        let code = self.tuple_code(args);
        self.functions[id].graphs[world][code] = Some(value as u32);
        Ok(())
    }

    /// Same graph at every world.
    pub fn set_rigid_function(&mut self, name: &str, args: &[usize], value: usize) -> Result<(), ModelError> {
        for w in 0..self.worlds.len() {
            self.set_function(name, w, args, value)?;
        }
        Ok(())
    }

    /// Function value used for term evaluation (the graph at the first world;
    /// `validate` insists all worlds agree).
    pub fn apply(&self, id: usize, code: usize) -> Option<usize> {
        self.functions[id]
            .graphs
            .first()
            .and_then(|g| g[code])
            .map(|v| v as usize)
    }

    pub fn function_value(&self, id: usize, world: usize, code: usize) -> Option<usize> {
        self.functions[id].graphs[world][code].map(|v| v as usize)
    }

    /// Membership bits of every (predicate, tuple) pair at `world`.
    pub fn interpretation_code(&self, world: usize) -> Vec<bool> {
        self.predicates
            .iter()
            .flat_map(|t| t.holds.iter().map(move |h| h >> world & 1 == 1))
            .collect()
    }

    pub(crate) fn violations(&self, out: &mut Vec<String>) {
        if self.domain.is_empty() {
            out.push("domain is empty".into());
        }
        if self.worlds.is_empty() {
            out.push("set of worlds is empty".into());
        }
        for (fid, (name, _)) in self.signature.functions().iter().enumerate() {
            let table = &self.functions[fid];
            for (w, graph) in table.graphs.iter().enumerate() {
                if graph.iter().any(Option::is_none) {
                    out.push(format!(
                        "function {name} is not total at world {}",
                        self.worlds[w]
                    ));
                }
                if w > 0 && *graph != table.graphs[0] {
                    out.push(format!(
                        "function {name} differs between worlds {} and {}",
                        self.worlds[0], self.worlds[w]
                    ));
                }
            }
        }
    }
}

/// How a sparse selector answers for subsets not listed explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectorDefault {
    /// The lowest-index member of the argument set.
    MinIndex,
    /// The vantage world when it belongs to the set, else the lowest index.
    ReflexiveMinIndex,
}

impl SelectorDefault {
    pub fn name(self) -> &'static str {
        match self {
            SelectorDefault::MinIndex => "min-index",
            SelectorDefault::ReflexiveMinIndex => "reflexive-min-index",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "min-index" => Some(SelectorDefault::MinIndex),
            "reflexive-min-index" => Some(SelectorDefault::ReflexiveMinIndex),
            _ => None,
        }
    }

    pub fn choose(self, w: usize, set: u64) -> usize {
        match self {
            SelectorDefault::ReflexiveMinIndex if set >> w & 1 == 1 => w,
            _ => set.trailing_zeros() as usize,
        }
    }
}

const UNSET: u8 = u8::MAX;

/// The selection function `s(w, A)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Selector {
    /// Total table over all nonempty subsets, indexed `w * (2^n - 1) + (A - 1)`.
    Table { worlds: usize, choice: Vec<u8> },
    /// Explicit entries with a default rule for the rest.
    Sparse {
        worlds: usize,
        entries: BTreeMap<(usize, u64), usize>,
        default: SelectorDefault,
    },
}

impl Selector {
    /// A table with every entry unset.
    pub fn empty_table(worlds: usize) -> Result<Self, ModelError> {
        if worlds > MAX_TABLE_WORLDS {
            return Err(ModelError::TableTooLarge(worlds));
        }
        let subsets = (1usize << worlds) - 1;
        Ok(Selector::Table {
            worlds,
            choice: vec![UNSET; worlds * subsets],
        })
    }

    pub fn table_from_fn(worlds: usize, mut f: impl FnMut(usize, u64) -> usize) -> Result<Self, ModelError> {
        let mut s = Selector::empty_table(worlds)?;
        let subsets = (1u64 << worlds) - 1;
        for w in 0..worlds {
            for a in 1..=subsets {
                s.set(w, a, f(w, a));
            }
        }
        Ok(s)
    }

    pub fn min_index(worlds: usize) -> Self {
        Selector::Sparse {
            worlds,
            entries: BTreeMap::new(),
            default: SelectorDefault::MinIndex,
        }
    }

    pub fn reflexive_min_index(worlds: usize) -> Self {
        Selector::Sparse {
            worlds,
            entries: BTreeMap::new(),
            default: SelectorDefault::ReflexiveMinIndex,
        }
    }

    pub fn world_len(&self) -> usize {
        match self {
            Selector::Table { worlds, .. } | Selector::Sparse { worlds, .. } => *worlds,
        }
    }

    /// `s(w, A)`; `None` for an unset table entry or an empty/out-of-range set.
    #[inline]
    pub fn select(&self, w: usize, set: u64) -> Option<usize> {
        if set == 0 {
            return None;
        }
        match self {
            Selector::Table { worlds, choice } => {
                let subsets = (1usize << worlds) - 1;
                let c = *choice.get(w * subsets + (set as usize - 1))?;
                (c != UNSET).then_some(c as usize)
            }
            Selector::Sparse {
                entries, default, ..
            } => Some(
                entries
                    .get(&(w, set))
                    .copied()
                    .unwrap_or_else(|| default.choose(w, set)),
            ),
        }
    }

    pub fn set(&mut self, w: usize, set: u64, value: usize) {
        match self {
            Selector::Table { worlds, choice } => {
                let subsets = (1usize << *worlds) - 1;
                choice[w * subsets + (set as usize - 1)] = value as u8;
            }
            Selector::Sparse { entries, .. } => {
                entries.insert((w, set), value);
            }
        }
    }

    /// Dense copy (needs at most `MAX_TABLE_WORLDS` worlds).
    pub fn to_table(&self) -> Result<Selector, ModelError> {
        let n = self.world_len();
        let mut t = Selector::empty_table(n)?;
        for w in 0..n {
            for a in 1..=full_mask(n) {
                if let Some(c) = self.select(w, a) {
                    t.set(w, a, c);
                }
            }
        }
        Ok(t)
    }

    fn violations(&self, worlds: &[String], out: &mut Vec<String>) {
        let n = worlds.len();
        if self.world_len() != n {
            out.push(format!(
                "selector is defined for {} worlds, model has {n}",
                self.world_len()
            ));
            return;
        }
        match self {
            Selector::Table { .. } => {
                for w in 0..n {
                    for a in 1..=full_mask(n) {
                        match self.select(w, a) {
                            None => out.push(format!(
                                "selector not total: s({}, {a:#b}) undefined",
                                worlds[w]
                            )),
                            Some(c) if a >> c & 1 == 0 => out.push(format!(
                                "selector outside argument set: s({}, {a:#b}) = {}",
                                worlds[w],
                                worlds.get(c).map_or("?", String::as_str)
                            )),
                            Some(_) => {}
                        }
                    }
                }
            }
            Selector::Sparse { entries, .. } => {
                for (&(w, a), &c) in entries {
                    if w >= n || a == 0 || a & !full_mask(n) != 0 {
                        out.push(format!("selector entry ({w}, {a:#b}) out of range"));
                    } else if a >> c & 1 == 0 {
                        out.push(format!(
                            "selector outside argument set: s({}, {a:#b}) = {}",
                            worlds[w],
                            worlds.get(c).map_or("?", String::as_str)
                        ));
                    }
                }
            }
        }
    }
}

/// `<D, W, t, u, s>`: utilities are exact rationals indexed by
/// `[index-set position][world]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UtilityModel {
    pub structure: Structure,
    pub utility: Vec<Vec<Option<Rational64>>>,
    pub selector: Selector,
}

/// `<D, W, t, ⊵, s>`: each total preorder is a rank function, higher rank
/// meaning weakly better.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreorderModel {
    pub structure: Structure,
    pub ranks: Vec<Vec<Option<u32>>>,
    pub selector: Selector,
}

/// `<D, W, t, r>`: `ranking[w][x][A - 1]` ranks the nonempty proposition `A`
/// in `r(w, X)`; a higher rank comes later, that is, is weakly better.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralizedModel {
    pub structure: Structure,
    pub ranking: Vec<Vec<Vec<Option<u32>>>>,
}

impl UtilityModel {
    /// All utilities zero, min-index selector.
    pub fn new(structure: Structure) -> Self {
        let n = structure.world_len();
        let k = structure.signature().indices().len();
        UtilityModel {
            utility: vec![vec![Some(Rational64::from_integer(0)); n]; k],
            selector: Selector::min_index(n),
            structure,
        }
    }

    pub fn utility_of(&self, x: &IndexSet, w: usize) -> Option<Rational64> {
        let k = self.structure.signature().index_position(x)?;
        self.utility[k][w]
    }

    pub fn set_utility(&mut self, x: &IndexSet, w: usize, value: Rational64) -> Result<(), ModelError> {
        let k = self
            .structure
            .signature()
            .index_position(x)
            .ok_or_else(|| ModelError::Unknown {
                kind: "index set",
                name: x.to_string(),
            })?;
        self.utility[k][w] = Some(value);
        Ok(())
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.structure.violations(&mut out);
        check_value_table(&self.structure, &self.utility, "utility", &mut out);
        self.selector.violations(self.structure.worlds(), &mut out);
        out
    }
}

impl PreorderModel {
    pub fn new(structure: Structure) -> Self {
        let n = structure.world_len();
        let k = structure.signature().indices().len();
        PreorderModel {
            ranks: vec![vec![Some(0); n]; k],
            selector: Selector::min_index(n),
            structure,
        }
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.structure.violations(&mut out);
        check_value_table(&self.structure, &self.ranks, "preorder", &mut out);
        self.selector.violations(self.structure.worlds(), &mut out);
        out
    }

    /// Utilities equal to the rank numbers.
    pub fn realize(&self) -> UtilityModel {
        UtilityModel {
            structure: self.structure.clone(),
            utility: self
                .ranks
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|r| r.map(|r| Rational64::from_integer(r as i64)))
                        .collect()
                })
                .collect(),
            selector: self.selector.clone(),
        }
    }

    /// Ranks worlds by utility (dense ranks, ties preserved).
    pub fn from_utility(m: &UtilityModel) -> PreorderModel {
        let ranks = m
            .utility
            .iter()
            .map(|row| {
                let mut levels: Vec<Rational64> = row.iter().flatten().copied().collect();
                levels.sort();
                levels.dedup();
                row.iter()
                    .map(|u| {
                        u.map(|u| levels.binary_search(&u).expect("level present") as u32)
                    })
                    .collect()
            })
            .collect();
        PreorderModel {
            structure: m.structure.clone(),
            ranks,
            selector: m.selector.clone(),
        }
    }
}

/// Replaces the preorder by utilities equal to its rank numbers.
pub fn realize_preorder(m: &PreorderModel) -> UtilityModel {
    m.realize()
}

fn check_value_table<T>(s: &Structure, table: &[Vec<Option<T>>], what: &str, out: &mut Vec<String>) {
    let indices: Vec<&IndexSet> = s.signature().indices().iter().collect();
    if table.len() != indices.len() {
        out.push(format!("{what} not total: wrong number of index sets"));
        return;
    }
    for (k, row) in table.iter().enumerate() {
        if row.len() != s.world_len() {
            out.push(format!("{what} not total at index set [{}]", indices[k]));
            continue;
        }
        for (w, v) in row.iter().enumerate() {
            if v.is_none() {
                out.push(format!(
                    "{what} not total: missing [{}] at world {}",
                    indices[k],
                    s.worlds()[w]
                ));
            }
        }
    }
}

impl GeneralizedModel {
    /// Every proposition ranked equally.
    pub fn new(structure: Structure) -> Result<Self, ModelError> {
        let n = structure.world_len();
        if n > MAX_TABLE_WORLDS {
            return Err(ModelError::TableTooLarge(n));
        }
        let k = structure.signature().indices().len();
        let subsets = (1usize << n) - 1;
        Ok(GeneralizedModel {
            ranking: vec![vec![vec![Some(0); subsets]; k]; n],
            structure,
        })
    }

    pub fn rank(&self, w: usize, x: usize, set: u64) -> Option<u32> {
        if set == 0 {
            return None;
        }
        self.ranking.get(w)?.get(x)?.get(set as usize - 1).copied().flatten()
    }

    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.structure.violations(&mut out);
        let n = self.structure.world_len();
        let k = self.structure.signature().indices().len();
        if self.ranking.len() != n {
            out.push("generalized ranking must list every world".into());
            return out;
        }
        for (w, per_x) in self.ranking.iter().enumerate() {
            if per_x.len() != k {
                out.push(format!(
                    "generalized ranking at {} must cover every index set",
                    self.structure.worlds()[w]
                ));
                continue;
            }
            for ranks in per_x {
                let missing = ranks.iter().filter(|r| r.is_none()).count();
                if ranks.len() != full_mask(n) as usize || missing > 0 {
                    out.push(format!(
                        "generalized ranking at {} does not rank every nonempty proposition",
                        self.structure.worlds()[w]
                    ));
                }
            }
        }
        out
    }
}

/// Semantics flavor of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Utility,
    Preorder,
    Generalized,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::Utility => "utility",
            Flavor::Preorder => "preorder",
            Flavor::Generalized => "generalized",
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Model {
    Utility(UtilityModel),
    Preorder(PreorderModel),
    Generalized(GeneralizedModel),
}

impl Model {
    pub fn structure(&self) -> &Structure {
        match self {
            Model::Utility(m) => &m.structure,
            Model::Preorder(m) => &m.structure,
            Model::Generalized(m) => &m.structure,
        }
    }

    pub fn flavor(&self) -> Flavor {
        match self {
            Model::Utility(_) => Flavor::Utility,
            Model::Preorder(_) => Flavor::Preorder,
            Model::Generalized(_) => Flavor::Generalized,
        }
    }

    pub fn selector(&self) -> Option<&Selector> {
        match self {
            Model::Utility(m) => Some(&m.selector),
            Model::Preorder(m) => Some(&m.selector),
            Model::Generalized(_) => None,
        }
    }

    /// Every violated invariant, one line each. Empty means valid.
    pub fn validate(&self) -> Vec<String> {
        match self {
            Model::Utility(m) => m.validate(),
            Model::Preorder(m) => m.validate(),
            Model::Generalized(m) => m.validate(),
        }
    }
}

impl From<UtilityModel> for Model {
    fn from(m: UtilityModel) -> Self {
        Model::Utility(m)
    }
}

impl From<PreorderModel> for Model {
    fn from(m: PreorderModel) -> Self {
        Model::Preorder(m)
    }
}

impl From<GeneralizedModel> for Model {
    fn from(m: GeneralizedModel) -> Self {
        Model::Generalized(m)
    }
}

/// Map from variables to domain elements; unmentioned variables take the
/// default element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Assignment {
    values: BTreeMap<Var, usize>,
    default: usize,
}

impl Assignment {
    pub fn new(default: usize) -> Self {
        Assignment {
            values: BTreeMap::new(),
            default,
        }
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, usize)>>(pairs: I) -> Self {
        Assignment {
            values: pairs.into_iter().collect(),
            default: 0,
        }
    }

    pub fn get(&self, v: Var) -> usize {
        self.values.get(&v).copied().unwrap_or(self.default)
    }

    pub fn default_element(&self) -> usize {
        self.default
    }

    pub fn set(&mut self, v: Var, a: usize) {
        self.values.insert(v, a);
    }

    /// The `v`-variant mapping `v` to `a`.
    pub fn variant(&self, v: Var, a: usize) -> Assignment {
        let mut d = self.clone();
        d.set(v, a);
        d
    }

    /// Explicit entries (variables without one take the default).
    pub fn entries(&self) -> impl Iterator<Item = (Var, usize)> + '_ {
        self.values.iter().map(|(v, a)| (*v, *a))
    }

    /// Parses `x=a,y=b` against a structure's element names.
    pub fn parse(text: &str, structure: &Structure) -> Result<Assignment, ModelError> {
        let mut d = Assignment::new(0);
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (var, elem) = part
                .split_once('=')
                .ok_or_else(|| ModelError::Format(format!("bad assignment entry {part:?}")))?;
            let (var, elem) = (var.trim(), elem.trim());
            let v = match var {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => var
                    .strip_prefix('v')
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| ModelError::Format(format!("bad variable {var:?}")))?,
            };
            let a = structure.element_index(elem).ok_or_else(|| ModelError::Unknown {
                kind: "element",
                name: elem.to_string(),
            })?;
            d.set(Var(v), a);
        }
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Signature {
        Signature::monadic(&["P"], &[IndexSet::singleton(1)]).unwrap()
    }

    #[test]
    fn proposition_algebra() {
        let a = Proposition::from_worlds([0, 2], 3);
        assert_eq!(a.complement(), Proposition::from_worlds([1], 3));
        assert!(!a.is_full());
        assert!((a | a.complement()).is_full());
        assert!((a & a.complement()).is_empty());
        assert_eq!(a.worlds().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(format!("{a:?}"), "{0,2}");
    }

    #[test]
    fn selector_outside_argument_set_is_reported() {
        let s = Structure::with_sizes(sig(), 1, 2).unwrap();
        let mut m = UtilityModel::new(s);
        let mut sel = Selector::table_from_fn(2, |_, a| a.trailing_zeros() as usize).unwrap();
        sel.set(0, 0b10, 0);
        m.selector = sel;
        let v = m.validate();
        assert_eq!(v.len(), 1);
        assert!(v[0].contains("selector outside argument set"), "{v:?}");
    }

    #[test]
    fn missing_utility_is_reported() {
        let s = Structure::with_sizes(sig(), 1, 2).unwrap();
        let mut m = UtilityModel::new(s);
        m.utility[0][1] = None;
        let v = m.validate();
        assert!(v.iter().any(|l| l.contains("utility not total")), "{v:?}");
    }

    #[test]
    fn rank_preorders_have_no_violations() {
        let s = Structure::with_sizes(sig(), 2, 3).unwrap();
        let mut m = PreorderModel::new(s);
        m.ranks[0] = vec![Some(2), Some(0), Some(2)];
        assert!(m.validate().is_empty());
    }

    #[test]
    fn non_rigid_function_is_reported() {
        let sig = Signature::new([("P", 1)], [("f", 1)], [IndexSet::singleton(1)]).unwrap();
        let mut s = Structure::with_sizes(sig, 2, 2).unwrap();
        s.set_rigid_function("f", &[0], 1).unwrap();
        s.set_rigid_function("f", &[1], 1).unwrap();
        assert!(UtilityModel::new(s.clone()).validate().is_empty());
        s.set_function("f", 1, &[1], 0).unwrap();
        let v = UtilityModel::new(s).validate();
        assert!(v.iter().any(|l| l.contains("differs")), "{v:?}");
    }

    #[test]
    fn realize_preorder_uses_ranks() {
        let s = Structure::with_sizes(sig(), 1, 3).unwrap();
        let mut m = PreorderModel::new(s);
        m.ranks[0] = vec![Some(0), Some(1), Some(2)];
        let u = realize_preorder(&m);
        let vals: Vec<i64> = u.utility[0].iter().map(|v| *v.unwrap().numer()).collect();
        assert_eq!(vals, vec![0, 1, 2]);
        m.ranks[0] = vec![Some(1); 3];
        let u = realize_preorder(&m);
        assert!(u.utility[0].windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn preorder_from_utility_keeps_ties() {
        let s = Structure::with_sizes(sig(), 1, 3).unwrap();
        let mut m = UtilityModel::new(s);
        m.utility[0] = vec![
            Some(Rational64::new(1, 2)),
            Some(Rational64::new(-3, 1)),
            Some(Rational64::new(1, 2)),
        ];
        let p = PreorderModel::from_utility(&m);
        assert_eq!(p.ranks[0], vec![Some(1), Some(0), Some(1)]);
    }

    #[test]
    fn sparse_defaults() {
        assert_eq!(SelectorDefault::MinIndex.choose(2, 0b110), 1);
        assert_eq!(SelectorDefault::ReflexiveMinIndex.choose(2, 0b110), 2);
        assert_eq!(SelectorDefault::ReflexiveMinIndex.choose(0, 0b110), 1);
        let s = Selector::min_index(64);
        assert_eq!(s.select(63, 1 << 63), Some(63));
    }

    #[test]
    fn assignment_variants_differ_only_at_the_variable() {
        let d = Assignment::from_pairs([(Var(0), 1), (Var(1), 2)]);
        let e = d.variant(Var(0), 0);
        assert_eq!(e.get(Var(0)), 0);
        assert_eq!(e.get(Var(1)), 2);
        assert_eq!(e.get(Var(7)), d.get(Var(7)));
    }
}
