//! Differential suites over exhaustively enumerated models: the worklist
//! engine against the naive full-sweep evaluator, frame preservation under
//! single-entry mutations, and the structural support properties.

use std::collections::BTreeMap;
use std::sync::Arc;

use framelogic::ast::{Definition, DefinitionSet, Formula, Signature, Sort, Term};
use framelogic::model::{
    enumerate_pre_models, single_entry_mutations, Assignment, EnumFilter, PreModel, Value,
    DEFAULT_INT_RANGE,
};
use framelogic::oracle::{naive_fixpoint, reachable};
use framelogic::semantics::{
    check_frame_instance, frame_model, frame_model_with, FixpointOrder, FrameVerdict,
};

fn list_sig() -> Arc<Signature> {
    let mut sig = Signature::new().with_field("next");
    sig.inductives.insert("list".into(), vec![Sort::Fg]);
    Arc::new(sig)
}

fn tree_sig() -> Arc<Signature> {
    let mut sig = Signature::new().with_field("left").with_field("right");
    sig.inductives.insert("tree".into(), vec![Sort::Fg]);
    Arc::new(sig)
}

fn list_defs() -> DefinitionSet {
    let mut defs = DefinitionSet::new();
    defs.insert(Definition {
        name: "list".into(),
        params: vec![("lx".into(), Sort::Fg)],
        body: Formula::ite(
            Formula::eq(Term::var("lx"), Term::nil()),
            Formula::True,
            Formula::exists(
                "lz",
                Sort::Fg,
                Formula::eq(Term::var("lz"), Term::app1("next", Term::var("lx"))),
                Formula::and(
                    Formula::ind("list", vec![Term::var("lz")]),
                    Formula::not(Formula::member(
                        Term::var("lx"),
                        Term::sp(Formula::ind("list", vec![Term::var("lz")])),
                    )),
                ),
            ),
        ),
    })
    .unwrap();
    defs
}

/// Binary tree with disjoint subtrees, after the worked example.
fn tree_defs() -> DefinitionSet {
    let mut defs = DefinitionSet::new();
    let l = || Term::var("tl");
    let r = || Term::var("tr");
    let sub = |t: Term| Term::sp(Formula::ind("tree", vec![t]));
    defs.insert(Definition {
        name: "tree".into(),
        params: vec![("tx".into(), Sort::Fg)],
        body: Formula::ite(
            Formula::eq(Term::var("tx"), Term::nil()),
            Formula::True,
            Formula::exists(
                "tl",
                Sort::Fg,
                Formula::eq(l(), Term::app1("left", Term::var("tx"))),
                Formula::exists(
                    "tr",
                    Sort::Fg,
                    Formula::eq(r(), Term::app1("right", Term::var("tx"))),
                    Formula::and(
                        Formula::and(
                            Formula::ind("tree", vec![l()]),
                            Formula::ind("tree", vec![r()]),
                        ),
                        Formula::and(
                            Formula::Eq(Term::inter(sub(l()), sub(r())), Term::Empty),
                            Formula::not(Formula::member(
                                Term::var("tx"),
                                Term::union(sub(l()), sub(r())),
                            )),
                        ),
                    ),
                ),
            ),
        ),
    })
    .unwrap();
    defs
}

fn models(sig: &Arc<Signature>, max_fg: u8) -> Vec<PreModel> {
    let mut out = Vec::new();
    for fg in 1..=max_fg {
        out.extend(
            enumerate_pre_models(sig.clone(), fg, DEFAULT_INT_RANGE, &EnumFilter::mutables())
                .unwrap(),
        );
    }
    out
}

fn assignments(m: &PreModel, vars: &[&str]) -> Vec<Assignment> {
    let mut out = vec![Assignment::new()];
    for v in vars {
        let mut next = Vec::new();
        for nu in &out {
            for e in 0..m.fg_size {
                let mut nu2 = nu.clone();
                nu2.insert((*v).to_string(), Value::Elem(e));
                next.push(nu2);
            }
        }
        out = next;
    }
    out
}

#[test]
fn engine_matches_naive_fixpoint_on_lists() {
    let sig = list_sig();
    let defs = list_defs();
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        let naive = naive_fixpoint(&m, &defs).unwrap();
        assert_eq!(fm.inductive_tables(), naive.inductive_tables(), "{m:?}");
        assert_eq!(fm.support_tables(), naive.support_tables(), "{m:?}");
        // Reversed worklist order changes nothing.
        let rev = frame_model_with(&m, &defs, FixpointOrder::Reversed).unwrap();
        assert!(fm.same_tables(&rev));
        // One more operator step changes nothing.
        assert!(!fm.one_more_step_changes().unwrap());
    }
}

#[test]
fn engine_matches_naive_fixpoint_on_trees() {
    let sig = tree_sig();
    let defs = tree_defs();
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        let naive = naive_fixpoint(&m, &defs).unwrap();
        assert_eq!(fm.inductive_tables(), naive.inductive_tables());
        assert_eq!(fm.support_tables(), naive.support_tables());
    }
}

#[test]
fn list_support_equals_reachability() {
    let sig = list_sig();
    let defs = list_defs();
    let f = Formula::ind("list", vec![Term::var("x")]);
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        for nu in assignments(&m, &["x"]) {
            let sp = fm.support(&nu, &f).unwrap();
            let start = nu["x"].as_elem().unwrap();
            assert_eq!(sp, reachable(&m, start, &["next"]), "{m:?} {nu:?}");
        }
    }
}

#[test]
fn tree_support_equals_reachability() {
    let sig = tree_sig();
    let defs = tree_defs();
    let f = Formula::ind("tree", vec![Term::var("x")]);
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        for nu in assignments(&m, &["x"]) {
            let sp = fm.support(&nu, &f).unwrap();
            let start = nu["x"].as_elem().unwrap();
            assert_eq!(sp, reachable(&m, start, &["left", "right"]));
        }
    }
}

#[test]
fn tree_example_three_nodes() {
    // Root u1 with children u2, u3 over a universe of four elements.
    let sig = tree_sig();
    let mut m = PreModel::new(sig, 4, DEFAULT_INT_RANGE).unwrap();
    m.set_fn("left", &[Value::Elem(1)], Value::Elem(2)).unwrap();
    m.set_fn("right", &[Value::Elem(1)], Value::Elem(3)).unwrap();
    let fm = frame_model(&m, &tree_defs()).unwrap();
    let f = Formula::ind("tree", vec![Term::var("x")]);
    let nu: Assignment = [("x".to_string(), Value::Elem(1))].into_iter().collect();
    assert!(fm.eval(&nu, &f).unwrap());
    let sp = fm.support(&nu, &f).unwrap();
    assert_eq!(sp.iter().collect::<Vec<_>>(), vec![1, 2, 3]);
    // At nil the support is empty.
    let nu0: Assignment = [("x".to_string(), Value::Elem(0))].into_iter().collect();
    assert!(fm.support(&nu0, &f).unwrap().is_empty());
}

#[test]
fn frame_preservation_under_single_mutations() {
    let sig = list_sig();
    let defs = list_defs();
    // Mixed corpus: the inductive applied to a variable, a membership atom,
    // and a disjointness atom.
    let corpus = vec![
        Formula::ind("list", vec![Term::var("x")]),
        Formula::not(Formula::member(
            Term::var("y"),
            Term::sp(Formula::ind("list", vec![Term::var("x")])),
        )),
        Formula::Eq(
            Term::inter(
                Term::sp(Formula::ind("list", vec![Term::var("x")])),
                Term::sp(Formula::ind("list", vec![Term::var("y")])),
            ),
            Term::Empty,
        ),
    ];
    let mut passes = 0usize;
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        for formula in &corpus {
            for nu in assignments(&m, &["x", "y"]) {
                for mutation in single_entry_mutations(&m) {
                    match check_frame_instance(&fm, &defs, &mutation, &nu, formula).unwrap() {
                        FrameVerdict::Pass => passes += 1,
                        FrameVerdict::NotApplicable => {}
                        v @ FrameVerdict::Violated { .. } => {
                            panic!("frame violation: {v:?} on {m:?} {nu:?} {mutation:?}")
                        }
                    }
                }
            }
        }
    }
    assert!(passes > 1000, "sweep too small: {passes}");
}

#[test]
fn support_structural_properties() {
    let sig = list_sig();
    let defs = list_defs();
    let f = Formula::ind("list", vec![Term::var("x")]);
    let g = Formula::eq(Term::app1("next", Term::var("x")), Term::var("y"));
    for m in models(&sig, 3) {
        let fm = frame_model(&m, &defs).unwrap();
        for nu in assignments(&m, &["x", "y"]) {
            for phi in [&f, &g] {
                // Negation transparency.
                assert_eq!(
                    fm.support(&nu, phi).unwrap(),
                    fm.support(&nu, &Formula::not(phi.clone())).unwrap()
                );
                // Support of the wrapped support expression agrees.
                assert_eq!(
                    fm.eval_term(&nu, &Term::sp(phi.clone())).unwrap(),
                    Value::Set(fm.support(&nu, phi).unwrap())
                );
            }
            // Conjunction is union.
            let both = Formula::and(f.clone(), g.clone());
            assert_eq!(
                fm.support(&nu, &both).unwrap(),
                fm.support(&nu, &f).unwrap().union(fm.support(&nu, &g).unwrap())
            );
        }
    }
}

#[test]
fn guards_are_model_independent() {
    // A guard's truth is the same whether or not definitions are present.
    let sig = list_sig();
    let defs = list_defs();
    let guard = Formula::exists(
        "w",
        Sort::Fg,
        Formula::eq(Term::var("w"), Term::app1("next", Term::var("x"))),
        Formula::ne(Term::var("w"), Term::nil()),
    );
    for m in models(&sig, 3) {
        let with = frame_model(&m, &defs).unwrap();
        let without = frame_model(&m, &DefinitionSet::new()).unwrap();
        for nu in assignments(&m, &["x"]) {
            assert_eq!(with.eval(&nu, &guard).unwrap(), without.eval(&nu, &guard).unwrap());
        }
    }
}

#[test]
fn alpha_preserves_evaluation() {
    let sig = list_sig();
    let defs = list_defs();
    // Two binders with the same name; renaming must not change evaluation.
    let mk = |v: &str| {
        Formula::exists(
            "w",
            Sort::Fg,
            Formula::eq(Term::var("w"), Term::app1("next", Term::var(v))),
            Formula::ind("list", vec![Term::var("w")]),
        )
    };
    let f = Formula::and(mk("x"), mk("y"));
    let fa = framelogic::ast::alpha_normalize(&f);
    assert_ne!(f, fa);
    for m in models(&sig, 2) {
        let fm = frame_model(&m, &defs).unwrap();
        for nu in assignments(&m, &["x", "y"]) {
            assert_eq!(fm.eval(&nu, &f).unwrap(), fm.eval(&nu, &fa).unwrap());
            assert_eq!(fm.support(&nu, &f).unwrap(), fm.support(&nu, &fa).unwrap());
        }
    }
}

#[test]
fn mixed_int_definition_length() {
    // length(x, n) over small integer bounds: engine equals naive sweeps and
    // the relation matches hand counting.
    let mut sig = Signature::new().with_field("next");
    sig.inductives.insert("length".into(), vec![Sort::Fg, Sort::Int]);
    let sig = Arc::new(sig);
    let mut defs = DefinitionSet::new();
    defs.insert(Definition {
        name: "length".into(),
        params: vec![("qx".into(), Sort::Fg), ("qn".into(), Sort::Int)],
        body: Formula::ite(
            Formula::eq(Term::var("qx"), Term::nil()),
            Formula::eq(Term::ivar("qn"), Term::Int(0)),
            Formula::exists(
                "qz",
                Sort::Fg,
                Formula::eq(Term::var("qz"), Term::app1("next", Term::var("qx"))),
                Formula::ind(
                    "length",
                    vec![Term::var("qz"), Term::sub(Term::ivar("qn"), Term::Int(1))],
                ),
            ),
        ),
    })
    .unwrap();
    for fg in 1..=3u8 {
        for m in enumerate_pre_models(sig.clone(), fg, (-3, 3), &EnumFilter::mutables()).unwrap() {
            let fm = frame_model(&m, &defs).unwrap();
            let naive = naive_fixpoint(&m, &defs).unwrap();
            assert_eq!(fm.inductive_tables(), naive.inductive_tables());
            assert_eq!(fm.support_tables(), naive.support_tables());
            // Cross-check against reachability-based chain lengths.
            let rows = fm.inductive_rows("length").unwrap();
            let mut expect = std::collections::BTreeSet::new();
            for start in 0..fg {
                let mut seen = vec![false; fg as usize];
                let mut cur = start;
                let mut steps: i64 = 0;
                loop {
                    if cur == 0 {
                        expect.insert(vec![Value::Elem(start), Value::Int(steps)]);
                        break;
                    }
                    if seen[cur as usize] {
                        break; // cycle: no finite length
                    }
                    seen[cur as usize] = true;
                    cur = m.lookup_fn("next", &[Value::Elem(cur)]).unwrap().as_elem().unwrap();
                    steps += 1;
                    if steps > 3 {
                        break; // outside the integer bounds
                    }
                }
            }
            assert_eq!(rows, expect, "{m:?}");
        }
    }
    let _ = BTreeMap::<u8, u8>::new();
}
