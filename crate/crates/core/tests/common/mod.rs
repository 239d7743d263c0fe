//! A direct, uncompiled reading of the truth conditions, used as an oracle.

#![allow(dead_code)]

use qpl_core::model::{GeneralizedModel, UtilityModel};
use qpl_core::{Assignment, Formula, Structure, Term};

pub enum Prefs<'a> {
    Utility(&'a UtilityModel),
    Generalized(&'a GeneralizedModel),
}

fn term(s: &Structure, t: &Term, d: &Assignment) -> usize {
    match t {
        Term::Var(v) => d.get(*v),
        Term::App(f, args) => {
            let vals: Vec<usize> = args.iter().map(|a| term(s, a, d)).collect();
            let id = s.function_id(f).expect("declared function");
            s.apply(id, s.tuple_code(&vals)).expect("total function")
        }
    }
}

/// Worlds satisfying `f` under `d`, as a bitset.
pub fn truth(s: &Structure, p: &Prefs, f: &Formula, d: &Assignment) -> u64 {
    let n = s.world_len();
    let all = (0..n).fold(0u64, |acc, w| acc | 1 << w);
    match f {
        Formula::Atom(name, args) => {
            let tuple: Vec<usize> = args.iter().map(|a| term(s, a, d)).collect();
            (0..n).filter(|&w| s.holds(name, w, &tuple)).fold(0, |acc, w| acc | 1 << w)
        }
        Formula::Equals(a, b) => {
            if term(s, a, d) == term(s, b, d) {
                all
            } else {
                0
            }
        }
        Formula::Not(g) => all & !truth(s, p, g, d),
        Formula::And(a, b) => truth(s, p, a, d) & truth(s, p, b, d),
        Formula::Exists(v, g) => (0..s.domain_len()).fold(0, |acc, e| acc | truth(s, p, g, &d.variant(*v, e))),
        Formula::Succeq(x, a, b) => {
            let (ta, tb) = (truth(s, p, a, d), truth(s, p, b, d));
            if ta == 0 || tb == 0 {
                return 0;
            }
            let pos = s.signature().index_position(x).expect("declared index");
            (0..n)
                .filter(|&w| match p {
                    Prefs::Utility(m) => {
                        let ua = m.utility_of(x, m.selector.select(w, ta).unwrap());
                        let ub = m.utility_of(x, m.selector.select(w, tb).unwrap());
                        ua.unwrap() >= ub.unwrap()
                    }
                    Prefs::Generalized(m) => m.rank(w, pos, ta).unwrap() >= m.rank(w, pos, tb).unwrap(),
                })
                .fold(0, |acc, w| acc | 1 << w)
        }
    }
}

/// Worlds satisfying `f` under every assignment.
pub fn closed_truth(s: &Structure, p: &Prefs, f: &Formula) -> u64 {
    let vars: Vec<_> = f.free_variables().into_iter().collect();
    let dn = s.domain_len();
    let mut out = u64::MAX;
    for code in 0..dn.pow(vars.len() as u32) {
        let mut d = Assignment::new(0);
        let mut c = code;
        for &v in &vars {
            d.set(v, c % dn);
            c /= dn;
        }
        out &= truth(s, p, f, &d);
    }
    out & (0..s.world_len()).fold(0u64, |acc, w| acc | 1 << w)
}
