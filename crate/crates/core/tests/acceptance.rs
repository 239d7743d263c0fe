//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! fails. Pass criterion numbers as arguments to run a subset.

use std::time::Instant;

use num_rational::Rational64;

use qpl_core::corpus::{
    anonymity_samples, invariance_witness, lexicographic_formula, lexicographic_model,
    random_formulas, revealed_preference_conjunction, revealed_preference_formula, template_family, Anonymity, FormulaShape,
};
use qpl_core::eval::{
    boxed, denote_closed, diamond, eval, Compiled, Evaluator, GlobalModalityReport, ModelOracle,
    RankOracle,
};
use qpl_core::folc::{relationalize, translate};
use qpl_core::model::{
    is_metric, is_order_rationalizable, is_reflexive, is_transitive, realize_preorder, PreorderModel,
};
use qpl_core::search::enumerate::{
    all_selectors, preorder_models, reduced_preorder_models, structures, utility_models,
};
use qpl_core::search::{
    build_hierarchy, check_invariant_validity, check_validity,
    extract_conjunction_decomposition, extract_index_decomposition, Bounds, Decomposition,
    FrameClass, HierarchyOptions, NormalCore, Verdict, Witness,
};
use qpl_core::syntax::parse_formula;
use qpl_core::{Assignment, IndexSet, Model, Proposition, Signature};

/// Every criterion is exact: no violation is tolerated.
const ALLOWED_VIOLATIONS: usize = 0;
/// Utility levels and world/domain bounds of the exhaustive corpora.
const LEVELS: usize = 3;
const SMALL_WORLDS: usize = 3;
const SMALL_DOMAIN: usize = 2;
/// Bounds for the correspondence check, and random selectors added per
/// preorder to the fixed ones.
const FOL_WORLDS: usize = 4;
const FOL_DOMAIN: usize = 2;
const FOL_RANDOM_SELECTORS: usize = 2;
/// Search bounds for the verdict criteria.
const CHECK_DOMAIN: usize = 3;
const CHECK_WORLDS: usize = 4;
const HIERARCHY_WORLDS: usize = 64;
const HIERARCHY_DOMAIN: usize = 3;
const HIERARCHY_DEPTH: usize = 3;
const ANONYMITY_SAMPLES: usize = 100;
const METRIC_DISTANCE: u32 = 3;
const SELECTOR_WORLDS: usize = 3;
const ROUND_TRIPS: usize = 1000;
const SEED: u64 = 0;

type Outcome = Result<String, String>;

fn x1() -> IndexSet {
    IndexSet::singleton(1)
}

fn monadic() -> Signature {
    Signature::monadic(&["P"], &[x1()]).unwrap()
}

fn levels() -> Vec<Rational64> {
    (0..LEVELS as i64).map(Rational64::from_integer).collect()
}

fn verdict(violations: &[String], summary: String) -> Outcome {
    if violations.len() > ALLOWED_VIOLATIONS {
        let shown: Vec<&str> = violations.iter().take(3).map(String::as_str).collect();
        Err(format!("{} violations, e.g. {}", violations.len(), shown.join(" | ")))
    } else {
        Ok(summary)
    }
}

fn global_modality() -> Outcome {
    let sig = monadic();
    let family = template_family(&x1());
    let values = levels();
    let (mut models, mut violations) = (0usize, Vec::new());
    for s in structures(&sig, SMALL_DOMAIN, SMALL_WORLDS).map_err(|e| e.to_string())? {
        let mut prog = Compiled::new(&sig);
        let nodes: Vec<_> = family
            .iter()
            .map(|f| {
                (
                    prog.add(f).unwrap(),
                    prog.add(&boxed(&sig, f.clone())).unwrap(),
                    prog.add(&diamond(&sig, f.clone())).unwrap(),
                )
            })
            .collect();
        let n = s.world_len();
        for m in utility_models(&s, &values) {
            models += 1;
            let mut ev = Evaluator::new(&prog, &m.structure, RankOracle::from_utility(&m));
            for (k, &(f, b, d)) in nodes.iter().enumerate() {
                let p = |bits| Proposition::from_bits(bits, n);
                let r = GlobalModalityReport::from_denotations(p(ev.denote(f)), p(ev.denote(b)), p(ev.denote(d)));
                if !r.holds() {
                    violations.push(format!("{}: {}", family[k], r.failures.join("; ")));
                }
            }
        }
    }
    verdict(
        &violations,
        format!("{models} utility models x {} formulas, both chains hold", family.len()),
    )
}

fn expect_counterexample(f: &qpl_core::Formula, v: &Verdict) -> Result<Witness, String> {
    match v {
        Verdict::CounterexampleAt(w) => {
            let p = eval(&w.model, f, &w.assignment).map_err(|e| e.to_string())?;
            if p.contains(w.world) {
                Err("counterexample does not re-verify".into())
            } else {
                Ok(w.clone())
            }
        }
        other => Err(format!("expected a counterexample, got {}", other.describe())),
    }
}

fn revealed_preference() -> Outcome {
    let f = revealed_preference_formula(&x1());
    let b = Bounds::new(CHECK_DOMAIN, CHECK_WORLDS);
    let all = check_validity(&f, &b).map_err(|e| e.to_string())?;
    let w = expect_counterexample(&f, &all)?;
    let tr = check_validity(&f, &b.clone().with_frame(FrameClass::Transitive)).map_err(|e| e.to_string())?;
    if tr != Verdict::ValidWithinBounds {
        return Err(format!("transitive frames: {}", tr.describe()));
    }
    // The literal conjunction is refuted on transitive frames too.
    let g = revealed_preference_conjunction(&x1());
    let lit = check_validity(&g, &b.with_frame(FrameClass::Transitive)).map_err(|e| e.to_string())?;
    let lit = expect_counterexample(&g, &lit)?;
    Ok(format!(
        "all frames: counterexample with {} worlds; transitive: valid within bounds; \
         conjunctive reading: transitive counterexample with {} worlds",
        w.model.structure().world_len(),
        lit.model.structure().world_len()
    ))
}

fn utility_preorder() -> Outcome {
    let sig = monadic();
    let family = template_family(&x1());
    let mut valid_u = vec![true; family.len()];
    let mut valid_p = vec![true; family.len()];
    let (mut models, mut violations) = (0usize, Vec::new());
    for s in structures(&sig, SMALL_DOMAIN, SMALL_WORLDS).map_err(|e| e.to_string())? {
        let mut prog = Compiled::new(&sig);
        let nodes: Vec<_> = family.iter().map(|f| prog.add(f).unwrap()).collect();
        let full = s.all_worlds().bits();
        for p in preorder_models(&s, LEVELS) {
            models += 1;
            let pm = Model::Preorder(p);
            let um = match &pm {
                Model::Preorder(p) => Model::Utility(realize_preorder(p)),
                _ => unreachable!(),
            };
            if !um.validate().is_empty() {
                violations.push("realized model is invalid".into());
                continue;
            }
            let mut ep = Evaluator::new(&prog, pm.structure(), ModelOracle::new(&pm));
            let mut eu = Evaluator::new(&prog, um.structure(), ModelOracle::new(&um));
            for (k, &node) in nodes.iter().enumerate() {
                let a = ep.denote(node);
                if a != eu.denote(node) {
                    violations.push(format!("{} differs after realization", family[k]));
                }
                valid_p[k] &= a == full;
            }
        }
        for u in utility_models(&s, &levels()) {
            models += 1;
            let um = Model::Utility(u);
            let mut eu = Evaluator::new(&prog, um.structure(), ModelOracle::new(&um));
            for (k, &node) in nodes.iter().enumerate() {
                valid_u[k] &= eu.denote(node) == full;
            }
        }
    }
    for k in 0..family.len() {
        if valid_u[k] != valid_p[k] {
            violations.push(format!("{}: validity differs between semantics", family[k]));
        }
    }
    let valid = valid_u.iter().filter(|&&v| v).count();
    verdict(
        &violations,
        format!(
            "{models} models, {} formulas ({valid} valid in both semantics), zero discrepancies",
            family.len()
        ),
    )
}

fn correspondence() -> Outcome {
    let sig = monadic();
    let family = template_family(&x1());
    let theories: Vec<_> = family
        .iter()
        .map(|f| translate(f, &sig))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let (mut models, mut checks, mut violations) = (0usize, 0usize, Vec::new());
    for s in structures(&sig, FOL_DOMAIN, FOL_WORLDS).map_err(|e| e.to_string())? {
        let mut prog = Compiled::new(&sig);
        let nodes: Vec<_> = family.iter().map(|f| prog.add(f).unwrap()).collect();
        for p in reduced_preorder_models(&s, FOL_WORLDS, FOL_RANDOM_SELECTORS, SEED ^ models as u64) {
            models += 1;
            let mut ev = Evaluator::new(&prog, &p.structure, RankOracle::from_preorder(&p));
            for (k, t) in theories.iter().enumerate() {
                let r = relationalize(&p, t).map_err(|e| e.to_string())?;
                let truth = ev.denote(nodes[k]);
                let image = r.goal_truth(t).map_err(|e| e.to_string())?;
                for (w, &holds) in image.iter().enumerate() {
                    checks += 1;
                    if holds != (truth >> w & 1 == 1) {
                        violations.push(format!("{} at world {w}", family[k]));
                    }
                }
                for name in r.failed_axioms(t).map_err(|e| e.to_string())? {
                    violations.push(format!("{}: axiom {name} fails", family[k]));
                }
            }
        }
    }
    verdict(
        &violations,
        format!("{models} preorder models, {checks} world checks, all axioms hold"),
    )
}

fn hierarchy() -> Outcome {
    let x = x1();
    let core = NormalCore::monadic(HIERARCHY_WORLDS, HIERARCHY_DOMAIN, &x).map_err(|e| e.to_string())?;
    let opts = HierarchyOptions {
        n_max: HIERARCHY_DEPTH,
        x,
        reflexive: false,
    };
    let report = build_hierarchy(&core, &opts).map_err(|e| e.to_string())?;
    let mut violations = Vec::new();
    for (n, f) in report.formulas.iter().enumerate() {
        if f.modal_depth() != n {
            violations.push(format!("depth of formula {n} is {}", f.modal_depth()));
        }
    }
    if report.formulas.len() != HIERARCHY_DEPTH + 1 {
        violations.push(format!("{} formulas", report.formulas.len()));
    }
    for n in 0..HIERARCHY_DEPTH {
        match report.certificates.iter().find(|c| c.depth == n) {
            Some(c) if c.fresh => {}
            _ => violations.push(format!("no freshness certificate at depth {n}")),
        }
    }
    let model = Model::Utility(report.model.clone());
    for (n, f) in report.formulas.iter().enumerate() {
        let p = denote_closed(&model, f).map_err(|e| e.to_string())?;
        if p != report.denotations[n] {
            violations.push(format!("denotation {n} does not re-verify"));
        }
    }
    let atoms: Vec<String> = report.certificates.iter().map(|c| c.atoms.to_string()).collect();
    verdict(
        &violations,
        format!("{HIERARCHY_WORLDS} worlds, depths 0..={HIERARCHY_DEPTH}, family atoms {}", atoms.join("/")),
    )
}

fn lexicographic() -> Outcome {
    let x = x1();
    let f = lexicographic_formula(&x);
    let m = lexicographic_model(&x);
    if m.structure.domain_len() != 2 {
        return Err("model domain is not two elements".into());
    }
    let model = Model::Utility(m.clone());
    let sat = denote_closed(&model, &f).map_err(|e| e.to_string())?;
    let Some(world) = sat.worlds().next() else {
        return Err("constructed model does not satisfy the formula".into());
    };
    let v = Verdict::SatisfiedBy(Witness {
        model: model.clone(),
        world,
        assignment: Assignment::new(0),
    });
    let w = v.witness().expect("witness");
    if !eval(&w.model, &f, &w.assignment).map_err(|e| e.to_string())?.contains(w.world) {
        return Err("witness does not re-verify".into());
    }
    let pm = Model::Preorder(PreorderModel::from_utility(&m));
    let psat = denote_closed(&pm, &f).map_err(|e| e.to_string())?;
    if psat.is_empty() {
        return Err("not satisfied in the induced preorder model".into());
    }
    Ok(format!(
        "satisfied at {} of {} worlds (utility), {} (preorder)",
        sat.count(),
        sat.len(),
        psat.count()
    ))
}

fn anonymity() -> Outcome {
    let x = x1();
    let mut violations = Vec::new();
    let mut summary = Vec::new();
    for kind in [Anonymity::Conjunction, Anonymity::Index] {
        let extract = |m: &qpl_core::model::UtilityModel| match kind {
            Anonymity::Conjunction => extract_conjunction_decomposition(m, 0, &x),
            Anonymity::Index => extract_index_decomposition(m, 0),
        };
        for m in anonymity_samples(kind, true, ANONYMITY_SAMPLES, SEED) {
            match extract(&m).map_err(|e| e.to_string())? {
                Decomposition::Function(t) if t.premise_holds => {}
                Decomposition::Function(_) => violations.push(format!("{kind:?}: premise not recognized")),
                Decomposition::Conflict(_) => violations.push(format!("{kind:?}: conflict on a satisfying model")),
            }
        }
        let (mut conflicts, mut passes) = (0, 0);
        for m in anonymity_samples(kind, false, ANONYMITY_SAMPLES, SEED + 1) {
            match extract(&m).map_err(|e| e.to_string())? {
                Decomposition::Conflict(c) => {
                    conflicts += 1;
                    if !c.verify(&m, 0).map_err(|e| e.to_string())? {
                        violations.push(format!("{kind:?}: conflict does not re-verify"));
                    }
                }
                Decomposition::Function(t) => {
                    passes += 1;
                    if t.premise_holds {
                        violations.push(format!("{kind:?}: violating sample passes the premise"));
                    }
                }
            }
        }
        summary.push(format!("{kind:?}: {ANONYMITY_SAMPLES} functions, {conflicts} conflicts/{passes} passes"));
    }
    verdict(&violations, summary.join("; "))
}

fn invariance() -> Outcome {
    let (x, y) = (x1(), IndexSet::singleton(2));
    let b = Bounds::new(CHECK_DOMAIN, CHECK_WORLDS);
    let inv = check_invariant_validity(&x, &y, &b.clone().with_frame(FrameClass::UtilityInvariant)).map_err(|e| e.to_string())?;
    if inv != Verdict::ValidWithinBounds {
        return Err(format!("invariant class: {}", inv.describe()));
    }
    let f = invariance_witness(&x, &y);
    let all = check_validity(&f, &b.with_frame(FrameClass::All)).map_err(|e| e.to_string())?;
    let w = expect_counterexample(&f, &all)?;
    Ok(format!(
        "invariant class: valid within bounds; all models: counterexample with {} worlds",
        w.model.structure().world_len()
    ))
}

fn frames() -> Outcome {
    let (mut selectors, mut metric, mut violations) = (0usize, 0usize, Vec::new());
    for n in 1..=SELECTOR_WORLDS {
        for s in all_selectors(n) {
            selectors += 1;
            if is_metric(&s, METRIC_DISTANCE) {
                metric += 1;
                if !(is_transitive(&s) && is_reflexive(&s) && is_order_rationalizable(&s).is_some()) {
                    violations.push(format!("{s:?}"));
                }
            }
        }
    }
    verdict(
        &violations,
        format!("{selectors} selectors, {metric} metric, all transitive, reflexive and rationalizable"),
    )
}

fn round_trip() -> Outcome {
    let shape = FormulaShape::default();
    let mut violations = Vec::new();
    for f in random_formulas(&shape, ROUND_TRIPS, SEED) {
        let text = f.to_string();
        match parse_formula(&text, &shape.signature) {
            Ok(g) if g == f => {}
            Ok(g) => violations.push(format!("{text} reparsed as {g}")),
            Err(e) => violations.push(format!("{text}: {e}")),
        }
    }
    verdict(&violations, format!("{ROUND_TRIPS} formulas reparse exactly"))
}

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("global modality", global_modality),
        ("revealed preference verdicts", revealed_preference),
        ("utility/preorder equivalence", utility_preorder),
        ("first-order correspondence", correspondence),
        ("modal hierarchy", hierarchy),
        ("lexicographic model", lexicographic),
        ("anonymity decompositions", anonymity),
        ("invariance witness", invariance),
        ("frame implications", frames),
        ("syntax round trip", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
