use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qpl_core::corpus::{random_formulas, revealed_preference_formula, template_family, FormulaShape};
use qpl_core::eval::{Compiled, Evaluator, RankOracle};
use qpl_core::folc::{relationalize, translate};
use qpl_core::model::PreorderModel;
use qpl_core::search::enumerate::{reduced_preorder_models, structures};
use qpl_core::search::{build_hierarchy, check_validity, Bounds, FrameClass, HierarchyOptions, NormalCore};
use qpl_core::syntax::parse_formula;
use qpl_core::{IndexSet, Signature};

fn x1() -> IndexSet {
    IndexSet::singleton(1)
}

fn models() -> Vec<PreorderModel> {
    let sig = Signature::monadic(&["P"], &[x1()]).unwrap();
    let s = structures(&sig, 2, 4).unwrap().pop().unwrap();
    reduced_preorder_models(&s, 4, 1, 0)
}

fn bench_parse(c: &mut Criterion) {
    let shape = FormulaShape::default();
    let texts: Vec<String> = random_formulas(&shape, 200, 1).iter().map(|f| f.to_string()).collect();
    c.bench_function("parse 200 random formulas", |b| {
        b.iter(|| {
            for t in &texts {
                black_box(parse_formula(t, &shape.signature).unwrap());
            }
        })
    });
}

fn bench_eval(c: &mut Criterion) {
    let family = template_family(&x1());
    let ms = models();
    let sig = ms[0].structure.signature().clone();
    let mut prog = Compiled::new(&sig);
    let nodes: Vec<_> = family.iter().map(|f| prog.add(f).unwrap()).collect();
    c.bench_function("template family over 100 preorder models", |b| {
        b.iter(|| {
            for m in ms.iter().take(100) {
                let mut ev = Evaluator::new(&prog, &m.structure, RankOracle::from_preorder(m));
                for &n in &nodes {
                    black_box(ev.denote(n));
                }
            }
        })
    });
}

fn bench_search(c: &mut Criterion) {
    let f = revealed_preference_formula(&x1());
    let b = Bounds::new(3, 3).with_frame(FrameClass::Transitive);
    let mut g = c.benchmark_group("search");
    g.sample_size(10);
    g.bench_function("revealed preference, transitive, 3 worlds", |bch| {
        bch.iter(|| black_box(check_validity(&f, &b).unwrap()))
    });
    g.finish();
}

fn bench_translate(c: &mut Criterion) {
    let sig = Signature::monadic(&["P"], &[x1()]).unwrap();
    let f = parse_formula("exists x (P(x) >[1] forall y P(y))", &sig).unwrap();
    let t = translate(&f, &sig).unwrap();
    let ms = models();
    c.bench_function("relationalize and check axioms", |b| {
        b.iter(|| {
            for m in ms.iter().take(50) {
                let r = relationalize(m, &t).unwrap();
                black_box(r.failed_axioms(&t).unwrap());
            }
        })
    });
}

fn bench_hierarchy(c: &mut Criterion) {
    let core = NormalCore::monadic(64, 3, &x1()).unwrap();
    let opts = HierarchyOptions {
        n_max: 3,
        x: x1(),
        reflexive: false,
    };
    let mut g = c.benchmark_group("hierarchy");
    g.sample_size(10);
    g.bench_function("64 worlds to depth 3", |b| b.iter(|| black_box(build_hierarchy(&core, &opts).unwrap())));
    g.finish();
}

criterion_group!(benches, bench_parse, bench_eval, bench_search, bench_translate, bench_hierarchy);
criterion_main!(benches);
