//! Bounded model search, the modal hierarchy and anonymity tables.

mod anonymity;
pub(crate) mod bases;
pub mod enumerate;
mod hierarchy;
mod lazy;

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::eval::{eval, Compiled, EvalError};
use crate::model::{are_isomorphic, json::to_json, Assignment, Flavor, Model};
use crate::syntax::{Formula, IndexSet, Signature, SyntaxError, Var};

pub use anonymity::{
    conjunction_anonymity, extract_conjunction_decomposition, extract_index_decomposition,
    index_anonymity, Decomposition, DecompositionConflict, Table,
};
pub use hierarchy::{
    build_hierarchy, Certificate, HierarchyError, HierarchyOptions, HierarchyReport, NormalCore,
};

use bases::{canonical_bases, Layout};
use lazy::{BaseSearch, Config, Leaf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("search budget of {budget} steps exceeded")]
    BudgetExceeded { budget: u64 },
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("internal error: {0}")]
    Internal(String),
}

impl From<EvalError> for SearchError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Symbol(s) => SearchError::Syntax(s),
            EvalError::InvalidModel(v) => SearchError::Internal(v.join("; ")),
        }
    }
}

/// Which selectors (and valuations) the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FrameClass {
    All,
    Reflexive,
    Transitive,
    /// Metric frames with integer distances up to the bound.
    Metric(u32),
    /// Isomorphic worlds get equal utilities.
    UtilityInvariant,
}

impl fmt::Display for FrameClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameClass::All => f.write_str("all"),
            FrameClass::Reflexive => f.write_str("reflexive"),
            FrameClass::Transitive => f.write_str("transitive"),
            FrameClass::Metric(b) => write!(f, "metric:{b}"),
            FrameClass::UtilityInvariant => f.write_str("invariant"),
        }
    }
}

impl FromStr for FrameClass {
    type Err = String;

    /// `all`, `reflexive`, `transitive`, `invariant`, `metric` or `metric:N`.
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(FrameClass::All),
            "reflexive" => Ok(FrameClass::Reflexive),
            "transitive" => Ok(FrameClass::Transitive),
            "invariant" | "utility-invariant" => Ok(FrameClass::UtilityInvariant),
            "metric" => Ok(FrameClass::Metric(3)),
            _ => s
                .strip_prefix("metric:")
                .and_then(|b| b.parse::<u32>().ok())
                .filter(|&b| b >= 1)
                .map(FrameClass::Metric)
                .ok_or_else(|| format!("unknown frame class {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bounds {
    pub max_domain: usize,
    pub max_worlds: usize,
    /// Utility values available to utility-semantics models, ascending.
    /// Only the induced order matters, so the search uses as many of the
    /// smallest values as a model has distinct utility classes.
    pub utility_values: Vec<Rational64>,
    pub frame: FrameClass,
    pub semantics: Flavor,
    /// Maximum number of partial models visited.
    pub budget: u64,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Vocabulary beyond the formula's own symbols.
    pub signature: Option<Signature>,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_domain: 2,
            max_worlds: 3,
            utility_values: vec![
                Rational64::from_integer(0),
                Rational64::new(1, 2),
                Rational64::from_integer(1),
            ],
            frame: FrameClass::All,
            semantics: Flavor::Utility,
            budget: 200_000_000,
            jobs: None,
            signature: None,
        }
    }
}

impl Bounds {
    pub fn new(max_domain: usize, max_worlds: usize) -> Self {
        Bounds {
            max_domain,
            max_worlds,
            ..Bounds::default()
        }
    }

    pub fn with_frame(mut self, frame: FrameClass) -> Self {
        self.frame = frame;
        self
    }

    pub fn with_semantics(mut self, semantics: Flavor) -> Self {
        self.semantics = semantics;
        self
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidBounds(m.to_string()));
        if self.max_domain == 0 || self.max_worlds == 0 {
            return bad("domain and world bounds must be at least 1");
        }
        if self.max_worlds > 6 {
            return bad("at most 6 worlds can be searched");
        }
        if self.utility_values.is_empty() || self.utility_values.windows(2).any(|w| w[0] >= w[1]) {
            return bad("utility values must be nonempty and strictly ascending");
        }
        if self.budget == 0 {
            return bad("budget must be at least 1");
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1");
        }
        if self.semantics == Flavor::Generalized && self.frame != FrameClass::All {
            return Err(SearchError::Unsupported(
                "generalized models have no selector or utilities to restrict".into(),
            ));
        }
        if let FrameClass::Metric(0) = self.frame {
            return bad("metric distance bound must be at least 1");
        }
        Ok(())
    }
}

/// A model with a world and an assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub model: Model,
    pub world: usize,
    pub assignment: Assignment,
}

impl Witness {
    /// The model file with an added `witness` record.
    pub fn to_json(&self, formula: &Formula) -> String {
        let s = self.model.structure();
        let mut value: serde_json::Value =
            serde_json::from_str(&to_json(&self.model)).expect("model json");
        let assignment: serde_json::Map<String, serde_json::Value> = self
            .assignment
            .entries()
            .map(|(v, a)| (v.to_string(), json!(s.domain()[a])))
            .collect();
        value["witness"] = json!({
            "formula": formula.to_string(),
            "world": s.worlds()[self.world],
            "assignment": assignment,
        });
        serde_json::to_string_pretty(&value).expect("witness json")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    SatisfiedBy(Witness),
    NoModelWithinBounds,
    ValidWithinBounds,
    CounterexampleAt(Witness),
}

impl Verdict {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::SatisfiedBy(w) | Verdict::CounterexampleAt(w) => Some(w),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Verdict::SatisfiedBy(w) => format!(
                "satisfied at world {}",
                w.model.structure().worlds()[w.world]
            ),
            Verdict::NoModelWithinBounds => "no model within bounds".into(),
            Verdict::ValidWithinBounds => "valid within bounds".into(),
            Verdict::CounterexampleAt(w) => format!(
                "counterexample at world {}",
                w.model.structure().worlds()[w.world]
            ),
        }
    }
}

/// The formula's own vocabulary, extended by the bounds' signature and, in
/// utility-invariant search, by nothing else: every symbol outside the
/// formula would only duplicate models.
fn search_signature(f: &Formula, b: &Bounds) -> Result<Signature, SearchError> {
    let mut indices = f.index_sets();
    if indices.is_empty() {
        indices.insert(IndexSet::singleton(1));
    }
    let own = Signature::new(f.predicates(), std::iter::empty::<(String, usize)>(), indices)?;
    let sig = match &b.signature {
        Some(extra) => own.merge(extra)?,
        None => own,
    };
    sig.check(f)?;
    Ok(sig)
}

const CHUNK: usize = 64;

/// Searches for a (model, world, assignment) with world membership in the
/// truth set of `f` equal to `want`.
fn search(f: &Formula, b: &Bounds, want: bool) -> Result<Option<Witness>, SearchError> {
    b.validate()?;
    let run = || search_inner(f, b, want);
    match b.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| SearchError::Internal(e.to_string()))?
            .install(run),
        None => run(),
    }
}

fn search_inner(f: &Formula, b: &Bounds, want: bool) -> Result<Option<Witness>, SearchError> {
    let sig = search_signature(f, b)?;
    let mut prog = Compiled::new(&sig);
    let root = prog.add(f)?;
    let free: Vec<Var> = prog.free_variables(root);
    let free_slots: Vec<usize> = free
        .iter()
        .map(|v| (0..prog.slot_count()).find(|&s| prog.slot_var(s) == *v).expect("slot"))
        .collect();
    let mut used: u64 = 0;
    for n in 1..=b.max_worlds {
        for dsize in 1..=b.max_domain {
            let layout = Layout::new(&sig, dsize)?;
            let remaining = b.budget - used;
            let bases = canonical_bases(&layout, n, 1, remaining)?;
            let levels = match b.semantics {
                Flavor::Utility => b.utility_values.len().min(n),
                _ => n,
            };
            let cfg = Config {
                prog: &prog,
                root,
                semantics: b.semantics,
                frame: b.frame,
                levels,
                values: &b.utility_values,
            };
            for chunk in bases.chunks(CHUNK) {
                let remaining = b.budget - used;
                let results: Vec<(u64, Result<Option<Witness>, SearchError>)> = chunk
                    .par_iter()
                    .map(|codes| {
                        let codes: Vec<u64> = codes.iter().map(|c| c.0).collect();
                        search_base(&cfg, &layout, &sig, &codes, &free, &free_slots, want, remaining)
                    })
                    .collect();
                for (nodes, result) in results {
                    used = used.saturating_add(nodes);
                    if used > b.budget {
                        return Err(SearchError::BudgetExceeded { budget: b.budget });
                    }
                    if let Some(w) = result? {
                        let p = eval(&w.model, f, &w.assignment)?;
                        if p.contains(w.world) != want {
                            return Err(SearchError::Internal(
                                "witness failed to re-verify".into(),
                            ));
                        }
                        return Ok(Some(w));
                    }
                }
            }
        }
    }
    Ok(None)
}

#[allow(clippy::too_many_arguments)]
fn search_base(
    cfg: &Config<'_>,
    layout: &Layout,
    sig: &Signature,
    codes: &[u64],
    free: &[Var],
    free_slots: &[usize],
    want: bool,
    limit: u64,
) -> (u64, Result<Option<Witness>, SearchError>) {
    let structure = layout.structure(sig, codes);
    let n = codes.len();
    let iso: Vec<usize> = if cfg.frame == FrameClass::UtilityInvariant {
        (0..n)
            .map(|w| (0..=w).find(|&v| are_isomorphic(&structure, v, w)).expect("reflexive"))
            .collect()
    } else {
        (0..n).collect()
    };
    let mut search = BaseSearch::new(cfg, &structure, iso, limit);
    // Worlds with equal codes are interchangeable.
    let reps: Vec<usize> = (0..n).filter(|&w| w == 0 || codes[w] != codes[w - 1]).collect();
    let dsize = layout.dsize;
    let mut env = vec![0usize; cfg.prog.slot_count()];
    let combos = dsize.pow(free.len() as u32);
    for w in reps {
        for combo in 0..combos {
            let mut c = combo;
            for &slot in free_slots {
                env[slot] = c % dsize;
                c /= dsize;
            }
            match search.run(search.empty_frame(), w, &env, want) {
                Leaf::Exhausted => continue,
                Leaf::OverLimit => {
                    return (
                        search.nodes,
                        Err(SearchError::BudgetExceeded { budget: limit }),
                    )
                }
                Leaf::Found(frame, metric) => {
                    let model = search.complete(&frame, metric.as_ref());
                    let assignment = Assignment::from_pairs(
                        free.iter().zip(free_slots).map(|(v, &slot)| (*v, env[slot])),
                    );
                    return (
                        search.nodes,
                        Ok(Some(Witness {
                            model,
                            world: w,
                            assignment,
                        })),
                    );
                }
            }
        }
    }
    (search.nodes, Ok(None))
}

/// First model (in enumeration order) with a world and assignment
/// satisfying `f`.
pub fn find_model(f: &Formula, b: &Bounds) -> Result<Verdict, SearchError> {
    Ok(match search(f, b, true)? {
        Some(w) => Verdict::SatisfiedBy(w),
        None => Verdict::NoModelWithinBounds,
    })
}

/// First model with a world and assignment falsifying `f`.
pub fn check_validity(f: &Formula, b: &Bounds) -> Result<Verdict, SearchError> {
    Ok(match search(f, b, false)? {
        Some(w) => Verdict::CounterexampleAt(w),
        None => Verdict::ValidWithinBounds,
    })
}

/// Validity of the utility-invariance witness formula for index sets `x`
/// and `y` (see `corpus::invariance_witness`) under the bounds' class.
pub fn check_invariant_validity(x: &IndexSet, y: &IndexSet, b: &Bounds) -> Result<Verdict, SearchError> {
    check_validity(&crate::corpus::invariance_witness(x, y), b)
}

/// A formula valid within bounds over utility models with a generalized
/// countermodel within the same bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Discrepancy {
    pub formula: Formula,
    pub witness: Witness,
}

/// Printed with every probe report: a discrepancy found at small bounds
/// says nothing about validity in general.
pub const PROBE_CAVEAT: &str = "discrepancies are evidence at the given bounds only; \
they do not decide whether utility and generalized validity coincide";

/// For each closed corpus formula valid within bounds over utility models,
/// looks for a generalized countermodel within the same bounds.
pub fn probe_open_question(b: &Bounds, corpus: &[Formula]) -> Result<Vec<Discrepancy>, SearchError> {
    let utility = Bounds {
        semantics: Flavor::Utility,
        ..b.clone()
    };
    let generalized = Bounds {
        semantics: Flavor::Generalized,
        frame: FrameClass::All,
        ..b.clone()
    };
    let mut out = Vec::new();
    for f in corpus {
        if !f.is_closed() {
            continue;
        }
        if check_validity(f, &utility)? != Verdict::ValidWithinBounds {
            continue;
        }
        if let Verdict::CounterexampleAt(w) = check_validity(f, &generalized)? {
            out.push(Discrepancy {
                formula: f.clone(),
                witness: w,
            });
        }
    }
    Ok(out)
}
