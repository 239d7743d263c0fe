//! The JSON model file format.
//!
//! ```json
//! {
//!   "domain": ["a", "b"],
//!   "worlds": ["w0", "w1"],
//!   "interp": {"w0": {"P": [["a"]]}, "w1": {"P": [["a"], ["b"]]}},
//!   "utility": {"1": {"w0": "0", "w1": "1/2"}},
//!   "selector": {"w0": [[1, "w0"], [2, "w1"], [3, "w0"]],
//!                "w1": [[1, "w0"], [2, "w1"], [3, "w1"]]}
//! }
//! ```
//!
//! Exactly one of `utility`, `preorder` and `generalized` is present. Two
//! optional keys extend the format: `signature` declares the vocabulary
//! (required for functions and for predicates with empty extensions), and
//! `selector_default` (`"min-index"` or `"reflexive-min-index"`) makes the
//! `selector` entries sparse, which is how models with more than twelve
//! worlds are stored.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::{
    full_mask, GeneralizedModel, Model, ModelError, PreorderModel, Selector, SelectorDefault,
    Structure, UtilityModel, MAX_TABLE_WORLDS,
};
use crate::syntax::{IndexSet, Signature};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SignatureFile {
    #[serde(default)]
    predicates: BTreeMap<String, usize>,
    #[serde(default)]
    functions: BTreeMap<String, usize>,
    indices: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum Number {
    Int(i64),
    Text(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    signature: Option<SignatureFile>,
    domain: Vec<String>,
    worlds: Vec<String>,
    #[serde(default)]
    interp: BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility: Option<BTreeMap<String, BTreeMap<String, Number>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    preorder: Option<BTreeMap<String, BTreeMap<String, u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    generalized: Option<BTreeMap<String, BTreeMap<String, BTreeMap<String, u32>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selector: Option<BTreeMap<String, Vec<(u64, String)>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    selector_default: Option<String>,
    /// Written by search next to a witness model; ignored on input.
    #[serde(default, skip_serializing)]
    #[allow(dead_code)]
    witness: Option<serde_json::Value>,
}

fn fmt_err(msg: impl Into<String>) -> ModelError {
    ModelError::Format(msg.into())
}

fn parse_rational(n: &Number) -> Result<Rational64, ModelError> {
    match n {
        Number::Int(i) => Ok(Rational64::from_integer(*i)),
        Number::Text(s) => {
            let s = s.trim();
            let r = match s.split_once('/') {
                Some((p, q)) => {
                    let p: i64 = p.trim().parse().map_err(|_| fmt_err(format!("bad rational {s:?}")))?;
                    let q: i64 = q.trim().parse().map_err(|_| fmt_err(format!("bad rational {s:?}")))?;
                    if q == 0 {
                        return Err(fmt_err(format!("zero denominator in {s:?}")));
                    }
                    Rational64::new(p, q)
                }
                None => Rational64::from_integer(
                    s.parse().map_err(|_| fmt_err(format!("bad rational {s:?}")))?,
                ),
            };
            Ok(r)
        }
    }
}

fn parse_index(s: &str) -> Result<IndexSet, ModelError> {
    s.parse::<IndexSet>()
        .map_err(|e| fmt_err(format!("bad index set {s:?}: {e}")))
}

fn infer_signature(file: &ModelFile) -> Result<Signature, ModelError> {
    let mut predicates: BTreeMap<String, usize> = BTreeMap::new();
    for per_world in file.interp.values() {
        for (name, tuples) in per_world {
            for t in tuples {
                match predicates.insert(name.clone(), t.len()) {
                    Some(a) if a != t.len() => {
                        return Err(fmt_err(format!("predicate {name:?} used with arities {a} and {}", t.len())))
                    }
                    _ => {}
                }
            }
        }
    }
    for per_world in file.interp.values() {
        for (name, tuples) in per_world {
            if tuples.is_empty() && !predicates.contains_key(name) {
                return Err(fmt_err(format!(
                    "arity of {name:?} cannot be inferred; declare it under \"signature\""
                )));
            }
        }
    }
    let mut indices = BTreeSet::new();
    if let Some(u) = &file.utility {
        for k in u.keys() {
            indices.insert(parse_index(k)?);
        }
    }
    if let Some(p) = &file.preorder {
        for k in p.keys() {
            indices.insert(parse_index(k)?);
        }
    }
    if let Some(g) = &file.generalized {
        for per_x in g.values() {
            for k in per_x.keys() {
                indices.insert(parse_index(k)?);
            }
        }
    }
    Signature::new(predicates, std::iter::empty::<(String, usize)>(), indices)
        .map_err(|e| fmt_err(e.to_string()))
}

fn world_of(s: &Structure, name: &str) -> Result<usize, ModelError> {
    s.world_index(name).ok_or_else(|| ModelError::Unknown {
        kind: "world",
        name: name.to_string(),
    })
}

fn elem_of(s: &Structure, name: &str) -> Result<usize, ModelError> {
    s.element_index(name).ok_or_else(|| ModelError::Unknown {
        kind: "element",
        name: name.to_string(),
    })
}

/// Parses a model file. Structural problems (unknown names, bad numbers)
/// are errors; missing table entries are left for `Model::validate`.
pub fn from_json(text: &str) -> Result<Model, ModelError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| fmt_err(e.to_string()))?;
    let present = [file.utility.is_some(), file.preorder.is_some(), file.generalized.is_some()];
    if present.iter().filter(|p| **p).count() != 1 {
        return Err(fmt_err(
            "exactly one of \"utility\", \"preorder\" and \"generalized\" must be present",
        ));
    }
    let signature = match &file.signature {
        Some(sf) => {
            let indices = sf.indices.iter().map(|s| parse_index(s)).collect::<Result<Vec<_>, _>>()?;
            Signature::new(sf.predicates.clone(), sf.functions.clone(), indices)
                .map_err(|e| fmt_err(e.to_string()))?
        }
        None => infer_signature(&file)?,
    };
    for (kind, names) in [("domain", &file.domain), ("worlds", &file.worlds)] {
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(fmt_err(format!("duplicate names in {kind}")));
        }
    }
    let mut s = Structure::new(signature.clone(), file.domain.clone(), file.worlds.clone())?;
    for (wname, per_world) in &file.interp {
        let w = world_of(&s, wname)?;
        for (name, rows) in per_world {
            if let Some(arity) = signature.function_arity(name) {
                for row in rows {
                    if row.len() != arity + 1 {
                        return Err(fmt_err(format!("function {name:?} entries need {} names", arity + 1)));
                    }
                    let vals = row.iter().map(|e| elem_of(&s, e)).collect::<Result<Vec<_>, _>>()?;
                    s.set_function(name, w, &vals[..arity], vals[arity])?;
                }
            } else {
                for row in rows {
                    let tuple = row.iter().map(|e| elem_of(&s, e)).collect::<Result<Vec<_>, _>>()?;
                    s.set_holds(name, w, &tuple, true)?;
                }
            }
        }
    }
    let n = s.world_len();
    let k_of = |x: &str| -> Result<usize, ModelError> {
        let x = parse_index(x)?;
        signature.index_position(&x).ok_or_else(|| ModelError::Unknown {
            kind: "index set",
            name: x.to_string(),
        })
    };

    if let Some(g) = &file.generalized {
        if file.selector.is_some() || file.selector_default.is_some() {
            return Err(fmt_err("generalized models have no selector"));
        }
        let mut m = GeneralizedModel::new(s)?;
        for row in m.ranking.iter_mut().flatten() {
            row.iter_mut().for_each(|r| *r = None);
        }
        for (wname, per_x) in g {
            let w = world_of(&m.structure, wname)?;
            for (x, per_set) in per_x {
                let k = k_of(x)?;
                for (mask, &rank) in per_set {
                    let mask: u64 = mask.trim().parse().map_err(|_| fmt_err(format!("bad bitmask {mask:?}")))?;
                    if mask == 0 || mask & !full_mask(n) != 0 {
                        return Err(fmt_err(format!("bitmask {mask} out of range")));
                    }
                    m.ranking[w][k][mask as usize - 1] = Some(rank);
                }
            }
        }
        return Ok(Model::Generalized(m));
    }

    let selector = {
        let default = match &file.selector_default {
            None => None,
            Some(d) => Some(
                SelectorDefault::from_name(d)
                    .ok_or_else(|| fmt_err(format!("unknown selector default {d:?}")))?,
            ),
        };
        let mut sel = match default {
            Some(d) => Selector::Sparse {
                worlds: n,
                entries: BTreeMap::new(),
                default: d,
            },
            None if n > MAX_TABLE_WORLDS => {
                return Err(fmt_err(format!(
                    "models with more than {MAX_TABLE_WORLDS} worlds need \"selector_default\""
                )))
            }
            None => Selector::empty_table(n)?,
        };
        for (wname, entries) in file.selector.iter().flatten() {
            let w = world_of(&s, wname)?;
            for (mask, target) in entries {
                if *mask == 0 || mask & !full_mask(n) != 0 {
                    return Err(fmt_err(format!("bitmask {mask} out of range")));
                }
                sel.set(w, *mask, world_of(&s, target)?);
            }
        }
        sel
    };
    let k = signature.indices().len();
    if let Some(u) = &file.utility {
        let mut table = vec![vec![None; n]; k];
        for (x, per_world) in u {
            let xi = k_of(x)?;
            for (wname, value) in per_world {
                table[xi][world_of(&s, wname)?] = Some(parse_rational(value)?);
            }
        }
        return Ok(Model::Utility(UtilityModel {
            structure: s,
            utility: table,
            selector,
        }));
    }
    let p = file.preorder.as_ref().expect("checked above");
    let mut ranks = vec![vec![None; n]; k];
    for (x, per_world) in p {
        let xi = k_of(x)?;
        for (wname, &r) in per_world {
            ranks[xi][world_of(&s, wname)?] = Some(r);
        }
    }
    Ok(Model::Preorder(PreorderModel {
        structure: s,
        ranks,
        selector,
    }))
}

fn interp_of(s: &Structure) -> BTreeMap<String, BTreeMap<String, Vec<Vec<String>>>> {
    let mut out = BTreeMap::new();
    let sig = s.signature();
    for (w, wname) in s.worlds().iter().enumerate() {
        let mut per: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        for p in sig.predicates().keys() {
            let rows: Vec<Vec<String>> = s
                .extension(p, w)
                .into_iter()
                .map(|t| t.into_iter().map(|a| s.domain()[a].clone()).collect())
                .collect();
            per.insert(p.clone(), rows);
        }
        for (fid, (f, &arity)) in sig.functions().iter().enumerate() {
            let count = s.domain_len().pow(arity as u32);
            let rows = (0..count)
                .filter_map(|c| {
                    let v = s.function_value(fid, w, c)?;
                    let mut row: Vec<String> = s
                        .decode_tuple(c, arity)
                        .into_iter()
                        .map(|a| s.domain()[a].clone())
                        .collect();
                    row.push(s.domain()[v].clone());
                    Some(row)
                })
                .collect();
            per.insert(f.clone(), rows);
        }
        out.insert(wname.clone(), per);
    }
    out
}

fn selector_of(sel: &Selector, s: &Structure) -> (BTreeMap<String, Vec<(u64, String)>>, Option<String>) {
    let worlds = s.worlds();
    let mut out: BTreeMap<String, Vec<(u64, String)>> = BTreeMap::new();
    match sel {
        Selector::Table { worlds: n, .. } => {
            for w in 0..*n {
                let rows = (1..=full_mask(*n))
                    .filter_map(|a| sel.select(w, a).map(|c| (a, worlds[c].clone())))
                    .collect();
                out.insert(worlds[w].clone(), rows);
            }
            (out, None)
        }
        Selector::Sparse {
            entries, default, ..
        } => {
            for (&(w, a), &c) in entries {
                out.entry(worlds[w].clone()).or_default().push((a, worlds[c].clone()));
            }
            (out, Some(default.name().to_string()))
        }
    }
}

/// Serializes a model; the output always carries an explicit `signature`.
pub fn to_json(m: &Model) -> String {
    let s = m.structure();
    let sig = s.signature();
    let indices: Vec<&IndexSet> = sig.indices().iter().collect();
    let mut file = ModelFile {
        signature: Some(SignatureFile {
            predicates: sig.predicates().clone(),
            functions: sig.functions().clone(),
            indices: indices.iter().map(|x| x.to_string()).collect(),
        }),
        domain: s.domain().to_vec(),
        worlds: s.worlds().to_vec(),
        interp: interp_of(s),
        utility: None,
        preorder: None,
        generalized: None,
        selector: None,
        selector_default: None,
        witness: None,
    };
    let per_index = |f: &dyn Fn(usize, usize) -> Option<Number>| {
        let mut out = BTreeMap::new();
        for (k, x) in indices.iter().enumerate() {
            let row: BTreeMap<String, Number> = s
                .worlds()
                .iter()
                .enumerate()
                .filter_map(|(w, wn)| f(k, w).map(|v| (wn.clone(), v)))
                .collect();
            out.insert(x.to_string(), row);
        }
        out
    };
    match m {
        Model::Utility(u) => {
            file.utility = Some(per_index(&|k, w| {
                u.utility[k][w].map(|r| Number::Text(r.to_string()))
            }));
            let (sel, def) = selector_of(&u.selector, s);
            file.selector = Some(sel);
            file.selector_default = def;
        }
        Model::Preorder(p) => {
            let mut out = BTreeMap::new();
            for (k, x) in indices.iter().enumerate() {
                let row = s
                    .worlds()
                    .iter()
                    .enumerate()
                    .filter_map(|(w, wn)| p.ranks[k][w].map(|r| (wn.clone(), r)))
                    .collect();
                out.insert(x.to_string(), row);
            }
            file.preorder = Some(out);
            let (sel, def) = selector_of(&p.selector, s);
            file.selector = Some(sel);
            file.selector_default = def;
        }
        Model::Generalized(g) => {
            let mut out = BTreeMap::new();
            for (w, wn) in s.worlds().iter().enumerate() {
                let mut per_x = BTreeMap::new();
                for (k, x) in indices.iter().enumerate() {
                    let row = (1..=full_mask(s.world_len()))
                        .filter_map(|a| g.rank(w, k, a).map(|r| (a.to_string(), r)))
                        .collect();
                    per_x.insert(x.to_string(), row);
                }
                out.insert(wn.clone(), per_x);
            }
            file.generalized = Some(out);
        }
    }
    serde_json::to_string_pretty(&file).expect("model serializes")
}
