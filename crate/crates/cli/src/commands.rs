use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qpl_core::corpus::{random_formulas, template_family, FormulaShape};
use qpl_core::eval::eval as denote;
use qpl_core::folc::{to_tptp, translate as fol_translate};
use qpl_core::model::json::{from_json, to_json};
use qpl_core::model::{
    is_metric, is_order_rationalizable, is_reflexive, is_transitive, is_utility_invariant, metric_witness,
    Flavor, MAX_TABLE_WORLDS,
};
use qpl_core::search::{
    build_hierarchy, check_validity, extract_conjunction_decomposition, extract_index_decomposition,
    find_model, probe_open_question, Bounds, Decomposition, FrameClass, HierarchyOptions, NormalCore,
    PROBE_CAVEAT,
};
use qpl_core::syntax::{expand, parse_formula, parse_inferring};
use qpl_core::{Assignment, Formula, IndexSet, Model, Proposition, Signature, Structure};

use crate::config::Config;
use crate::error::CliError;
use crate::SearchArgs;

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let m = from_json(&read(path)?)?;
    let problems = m.validate();
    if !problems.is_empty() {
        return Err(CliError::Validation(problems.join("; ")));
    }
    Ok(m)
}

fn world_set(s: &Structure, p: Proposition) -> String {
    let names: Vec<&str> = p.worlds().map(|w| s.worlds()[w].as_str()).collect();
    format!("{{{}}}", names.join(", "))
}

fn parse_flavor(s: &str) -> Result<Flavor, CliError> {
    match s {
        "utility" => Ok(Flavor::Utility),
        "preorder" => Ok(Flavor::Preorder),
        "generalized" => Ok(Flavor::Generalized),
        _ => Err(CliError::Usage(format!("unknown semantics {s:?}"))),
    }
}

pub fn bounds(a: &SearchArgs, c: &Config) -> Result<Bounds, CliError> {
    let mut b = Bounds::default();
    if let Some(class) = a.class.as_ref().or(c.class.as_ref()) {
        b.frame = class.parse::<FrameClass>().map_err(CliError::Usage)?;
    }
    if let Some(s) = a.semantics.as_ref().or(c.semantics.as_ref()) {
        b.semantics = parse_flavor(s)?;
    }
    b.max_worlds = a.max_worlds.or(c.max_worlds).unwrap_or(b.max_worlds);
    b.max_domain = a.max_domain.or(c.max_domain).unwrap_or(b.max_domain);
    b.budget = a.budget.or(c.budget).unwrap_or(b.budget);
    b.jobs = a.jobs.or(c.jobs);
    b.validate()?;
    Ok(b)
}

fn sentence(text: &str) -> Result<Formula, CliError> {
    let (sf, _) = parse_inferring(text)?;
    Ok(expand(&sf))
}

pub fn eval(path: &Path, text: &str, assign: Option<&str>) -> Result<String, CliError> {
    let m = load_model(path)?;
    let s = m.structure();
    let f = parse_formula(text, s.signature())?;
    let d = match assign {
        Some(a) => Assignment::parse(a, s)?,
        None => Assignment::new(0),
    };
    let p = denote(&m, &f, &d)?;
    Ok(format!("{}\nsemantics: {}\n", world_set(s, p), m.flavor()))
}

pub fn search(text: &str, b: &Bounds, satisfy: bool, out: Option<&Path>) -> Result<String, CliError> {
    let f = sentence(text)?;
    let v = if satisfy { find_model(&f, b)? } else { check_validity(&f, b)? };
    let mut report = format!("{}\n", v.describe());
    if let Some(w) = v.witness() {
        let json = w.to_json(&f);
        match out {
            Some(p) => {
                write(p, &format!("{json}\n"))?;
                writeln!(report, "model written to {}", p.display()).expect("string write");
            }
            None => writeln!(report, "{json}").expect("string write"),
        }
    }
    Ok(report)
}

pub fn translate(text: &str, axioms_only: bool, out: Option<&Path>) -> Result<String, CliError> {
    let (sf, sig) = parse_inferring(text)?;
    let theory = fol_translate(&expand(&sf), &sig)?;
    let tptp = to_tptp(&theory, !axioms_only);
    match out {
        Some(p) => {
            write(p, &tptp)?;
            Ok(format!("{} formulas written to {}\n", tptp.lines().count(), p.display()))
        }
        None => Ok(tptp),
    }
}

pub struct HierarchyArgs {
    pub core: Option<PathBuf>,
    pub n_max: usize,
    pub psi: Option<String>,
    pub worlds: usize,
    pub domain: usize,
    pub index: String,
    pub reflexive: bool,
    pub out: Option<PathBuf>,
}

pub fn hierarchy(a: &HierarchyArgs) -> Result<String, CliError> {
    let x: IndexSet = a.index.parse()?;
    let mut core = match &a.core {
        Some(p) => {
            let structure = load_model(p)?.structure().clone();
            let text = a
                .psi
                .as_deref()
                .ok_or_else(|| CliError::Usage("a core file needs --psi".into()))?;
            let psi = parse_formula(text, structure.signature())?;
            NormalCore { structure, psi }
        }
        None => NormalCore::monadic(a.worlds, a.domain, &x)?,
    };
    if let (None, Some(text)) = (&a.core, &a.psi) {
        core.psi = parse_formula(text, core.structure.signature())?;
    }
    let opts = HierarchyOptions {
        n_max: a.n_max,
        x,
        reflexive: a.reflexive,
    };
    let r = build_hierarchy(&core, &opts)?;
    let s = &r.model.structure;
    let mut out = String::new();
    let w = |out: &mut String, line: String| writeln!(out, "{line}").expect("string write");
    w(&mut out, format!("worlds: {}, domain: {}", s.world_len(), s.domain_len()));
    w(&mut out, format!("w0 = {}, w1 = {}", s.worlds()[r.w0], s.worlds()[r.w1]));
    for (n, (f, p)) in r.formulas.iter().zip(&r.denotations).enumerate() {
        w(&mut out, format!("phi_{n} (depth {}): {f}", f.modal_depth()));
        w(&mut out, format!("  truth set ({} worlds): {}", p.count(), world_set(s, *p)));
    }
    for c in &r.certificates {
        w(
            &mut out,
            format!(
                "certificate: depth {} family has {} atoms; phi_{} {}",
                c.depth,
                c.atoms,
                c.depth + 1,
                if c.fresh { "is outside it" } else { "is NOT outside it" }
            ),
        );
    }
    for note in &r.notes {
        w(&mut out, format!("note: {note}"));
    }
    if let Some(p) = &a.out {
        write(p, &format!("{}\n", to_json(&Model::Utility(r.model.clone()))))?;
        w(&mut out, format!("model written to {}", p.display()));
    }
    Ok(out)
}

pub fn frames(path: &Path, max_distance: u32) -> Result<String, CliError> {
    let m = load_model(path)?;
    let sel = m
        .selector()
        .ok_or_else(|| CliError::Input("generalized models have no selector".into()))?;
    let mut out = String::new();
    let yes = |b: bool| if b { "yes" } else { "no" };
    if sel.world_len() > MAX_TABLE_WORLDS {
        writeln!(
            out,
            "selector checks: skipped ({} worlds, at most {MAX_TABLE_WORLDS} supported)",
            sel.world_len()
        )
        .expect("string write");
        invariance(&mut out, &m);
        return Ok(out);
    }
    writeln!(out, "reflexive: {}", yes(is_reflexive(sel))).expect("string write");
    writeln!(out, "transitive: {}", yes(is_transitive(sel))).expect("string write");
    writeln!(
        out,
        "order-rationalizable: {}",
        yes(is_order_rationalizable(sel).is_some())
    )
    .expect("string write");
    let metric = is_metric(sel, max_distance);
    writeln!(out, "metric (distances <= {max_distance}): {}", yes(metric)).expect("string write");
    if let Some(d) = metric_witness(sel, max_distance) {
        writeln!(out, "  distances: {d:?}").expect("string write");
    }
    invariance(&mut out, &m);
    Ok(out)
}

fn invariance(out: &mut String, m: &Model) {
    match m {
        Model::Utility(u) => writeln!(
            out,
            "utility-invariant: {}",
            if is_utility_invariant(u) { "yes" } else { "no" }
        ),
        _ => writeln!(out, "utility-invariant: not applicable ({} model)", m.flavor()),
    }
    .expect("string write");
}

fn render(out: &mut String, name: &str, s: &Structure, d: Decomposition) {
    let w = |out: &mut String, line: String| writeln!(out, "{line}").expect("string write");
    w(out, format!("{name}: premise {}", if d.premise_holds() { "holds" } else { "fails" }));
    match d {
        Decomposition::Function(t) => {
            w(out, format!("  single-valued, {} entries", t.entries.len()));
            for ((a, b), v) in &t.entries {
                w(out, format!("  F({a}, {b}) = {v}"));
            }
        }
        Decomposition::Conflict(c) => {
            let args: Vec<String> = c.arguments.iter().map(|(f, x)| format!("u[{x}]({f})")).collect();
            w(out, format!("  conflict on {} -> u[{}]({})", args.join(", "), c.value.1, c.value.0));
            for (label, d) in [("first", &c.first), ("second", &c.second)] {
                let parts: Vec<String> = d.entries().map(|(v, a)| format!("{v}={}", s.domain()[a])).collect();
                w(out, format!("  {label} assignment: {}", parts.join(",")));
            }
        }
    }
}

pub fn decompose(path: &Path, world: Option<&str>, index: Option<&str>) -> Result<String, CliError> {
    let m = load_model(path)?;
    let Model::Utility(u) = &m else {
        return Err(CliError::Input(format!("decomposition needs a utility model, got {}", m.flavor())));
    };
    let s = &u.structure;
    let w0 = match world {
        Some(name) => s
            .world_index(name)
            .ok_or_else(|| CliError::Input(format!("unknown world {name:?}")))?,
        None => 0,
    };
    let x = match index {
        Some(t) => t.parse()?,
        None => s.signature().designated_index().clone(),
    };
    let mut out = format!("world: {}\n", s.worlds()[w0]);
    render(&mut out, "conjunction", s, extract_conjunction_decomposition(u, w0, &x)?);
    let has_indices = ["1", "2", "1,2"]
        .iter()
        .all(|t| s.signature().index_position(&t.parse().expect("index set")).is_some());
    if has_indices {
        render(&mut out, "index", s, extract_index_decomposition(u, w0)?);
    } else {
        out.push_str("index: skipped (needs index sets {1}, {2} and {1,2})\n");
    }
    Ok(out)
}

pub fn probe(b: &Bounds, random: usize, seed: u64) -> Result<String, CliError> {
    let x = IndexSet::singleton(1);
    let mut corpus = template_family(&x);
    let shape = FormulaShape {
        signature: Signature::monadic(&["P"], std::slice::from_ref(&x))?,
        ..FormulaShape::default()
    };
    corpus.extend(random_formulas(&shape, random, seed).into_iter().filter(Formula::is_closed));
    let found = probe_open_question(b, &corpus)?;
    let mut out = format!("{} formulas probed, {} discrepancies\n", corpus.len(), found.len());
    for d in &found {
        writeln!(
            out,
            "{}: generalized counterexample at {}",
            d.formula,
            d.witness.model.structure().worlds()[d.witness.world]
        )
        .expect("string write");
    }
    writeln!(out, "note: {PROBE_CAVEAT}").expect("string write");
    Ok(out)
}
