//! TPTP first-order form. Sorts become the guard predicates `world` and
//! `individual`; quantifiers are relativized to them.

use std::fmt::Write;

use super::{FTerm, FVar, Fol, FolTheory, Sort};

fn guard(v: &FVar) -> String {
    match v.sort {
        Sort::World => format!("world({})", v.name),
        Sort::Individual => format!("individual({})", v.name),
    }
}

fn term(t: &FTerm) -> String {
    t.to_string()
}

fn formula(f: &Fol) -> String {
    match f {
        Fol::True => "$true".into(),
        Fol::Pred(p, args) if args.is_empty() => p.clone(),
        Fol::Pred(p, args) => {
            let a: Vec<String> = args.iter().map(term).collect();
            format!("{p}({})", a.join(","))
        }
        Fol::Eq(a, b) => format!("({} = {})", term(a), term(b)),
        Fol::Not(g) => format!("~ {}", formula(g)),
        Fol::And(a, b) => format!("({} & {})", formula(a), formula(b)),
        Fol::Or(a, b) => format!("({} | {})", formula(a), formula(b)),
        Fol::Implies(a, b) => format!("({} => {})", formula(a), formula(b)),
        Fol::Iff(a, b) => format!("({} <=> {})", formula(a), formula(b)),
        Fol::Exists(v, g) => format!("? [{}] : ({} & {})", v.name, guard(v), formula(g)),
        Fol::Forall(v, g) => format!("! [{}] : ({} => {})", v.name, guard(v), formula(g)),
    }
}

fn sort_axiom(name: &str, args: &[Sort], result: Sort) -> Fol {
    let vars: Vec<FVar> = args
        .iter()
        .enumerate()
        .map(|(i, &sort)| FVar {
            name: format!("A{i}"),
            sort,
        })
        .collect();
    let app = FTerm::App(name.to_string(), vars.iter().cloned().map(FTerm::Var).collect());
    let head = match result {
        Sort::World => Fol::Pred("world".into(), vec![app]),
        Sort::Individual => Fol::Pred("individual".into(), vec![app]),
    };
    Fol::forall_all(&vars, head)
}

/// The theory as a TPTP problem; with `conjecture` the sentence is added as
/// `! [W0] : tr(W0)`.
pub fn to_tptp(theory: &FolTheory, conjecture: bool) -> String {
    let mut out = String::new();
    let mut emit = |name: &str, role: &str, body: String| {
        writeln!(out, "fof({name}, {role}, {body}).").expect("string write");
    };
    emit("world_nonempty", "axiom", "? [W] : world(W)".into());
    emit("individual_nonempty", "axiom", "? [X] : individual(X)".into());
    emit(
        "sorts_disjoint",
        "axiom",
        "! [V] : ~ (world(V) & individual(V))".into(),
    );
    for (name, (args, result)) in &theory.signature.functions {
        emit(&format!("{name}_sort"), "axiom", formula(&sort_axiom(name, args, *result)));
    }
    for (name, ax) in &theory.axioms {
        emit(name, "axiom", formula(ax));
    }
    if conjecture {
        let w0 = FVar {
            name: "W0".into(),
            sort: Sort::World,
        };
        emit("sentence", "conjecture", formula(&Fol::Forall(w0, Box::new(theory.goal.clone()))));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::folc::translate;
    use crate::syntax::{parse_formula, IndexSet, Signature};

    /// Minimal recognizer for the emitted subset of TPTP FOF.
    struct Lint<'a> {
        s: &'a [u8],
        i: usize,
    }

    impl Lint<'_> {
        fn ws(&mut self) {
            while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
                self.i += 1;
            }
        }

        fn eat(&mut self, t: &str) -> bool {
            self.ws();
            if self.s[self.i..].starts_with(t.as_bytes()) {
                self.i += t.len();
                true
            } else {
                false
            }
        }

        fn word(&mut self, upper: bool) -> Option<String> {
            self.ws();
            let start = self.i;
            let first = *self.s.get(self.i)?;
            if (upper && !first.is_ascii_uppercase()) || (!upper && !first.is_ascii_lowercase()) {
                return None;
            }
            while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
                self.i += 1;
            }
            Some(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
        }

        fn term(&mut self) -> bool {
            if self.word(true).is_some() {
                return true;
            }
            if self.word(false).is_none() {
                return false;
            }
            self.args()
        }

        fn args(&mut self) -> bool {
            if !self.eat("(") {
                return true;
            }
            loop {
                if !self.term() {
                    return false;
                }
                if self.eat(")") {
                    return true;
                }
                if !self.eat(",") {
                    return false;
                }
            }
        }

        fn unit(&mut self) -> bool {
            if self.eat("~") {
                return self.unit();
            }
            if self.eat("$true") {
                return true;
            }
            if self.eat("!") || self.eat("?") {
                if !self.eat("[") || self.word(true).is_none() || !self.eat("]") || !self.eat(":") {
                    return false;
                }
                return self.unit();
            }
            if self.eat("(") {
                if !self.formula() {
                    return false;
                }
                return self.eat(")");
            }
            // Atom, or a term on the left of an equation.
            let save = self.i;
            if self.word(true).is_some() {
                return self.eq_rest();
            }
            self.i = save;
            if self.word(false).is_none() || !self.args() {
                return false;
            }
            let save = self.i;
            if self.eat("=") && !self.s[self.i..].starts_with(b">") {
                return self.term();
            }
            self.i = save;
            true
        }

        fn eq_rest(&mut self) -> bool {
            self.eat("=") && self.term()
        }

        fn formula(&mut self) -> bool {
            if !self.unit() {
                return false;
            }
            for op in ["<=>", "=>", "&", "|"] {
                if self.eat(op) {
                    return self.unit();
                }
            }
            true
        }

        fn problem(&mut self) -> usize {
            let mut n = 0;
            loop {
                self.ws();
                if self.i == self.s.len() {
                    return n;
                }
                assert!(self.eat("fof("), "at {}", self.i);
                assert!(self.word(false).is_some());
                assert!(self.eat(","));
                let role = self.word(false).expect("role");
                assert!(role == "axiom" || role == "conjecture");
                assert!(self.eat(","));
                assert!(self.formula(), "bad formula near {}", self.i);
                assert!(self.eat(")") && self.eat("."), "at {}", self.i);
                n += 1;
            }
        }
    }

    #[test]
    fn output_is_well_formed() {
        let sig = Signature::new(
            [("P", 1), ("R", 2)],
            [("f", 1), ("c", 0)],
            [IndexSet::singleton(1), IndexSet::new([1, 2]).unwrap()],
        )
        .unwrap();
        for text in [
            "exists x (P(x) >[1] forall y P(y))",
            "forall x (R(x, f(x)) >=[1,2] (P(c) <-> ~(x = c)))",
            "(true >=[1] true)",
        ] {
            let f = parse_formula(text, &sig).unwrap();
            let t = translate(&f, &sig).unwrap();
            let with = to_tptp(&t, true);
            let without = to_tptp(&t, false);
            let n = Lint { s: with.as_bytes(), i: 0 }.problem();
            let m = Lint { s: without.as_bytes(), i: 0 }.problem();
            assert_eq!(n, m + 1, "{with}");
            assert!(with.contains(", conjecture, "));
            assert!(!without.contains("conjecture"));
        }
    }
}
