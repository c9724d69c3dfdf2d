//! Bounded proof of the in-place list reversal: the annotated loop invariant
//! (two disjoint lists) yields initiation, preservation, and exit
//! obligations that all hold at small bounds, and the direct operational
//! check agrees.

use std::sync::Arc;

use framelogic::ast::{Definition, DefinitionSet, Formula, Signature, Sort, Term};
use framelogic::hoare::{check_triple, vc_gen, verify, Triple};
use framelogic::oracle::Bounds;
use framelogic::whilelang::Stmt;

fn list_sig() -> Arc<Signature> {
    let mut sig = Signature::new().with_field("next");
    sig.inductives.insert("list".into(), vec![Sort::Fg]);
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

fn list_of(v: &str) -> Formula {
    Formula::ind("list", vec![Term::var(v)])
}

fn invariant() -> Formula {
    Formula::and(
        Formula::and(list_of("i"), list_of("j")),
        Formula::Eq(
            Term::inter(Term::sp(list_of("i")), Term::sp(list_of("j"))),
            Term::Empty,
        ),
    )
}

fn reversal_triple() -> Triple {
    // j := nil; while (i != nil) do k := i.next; i.next := j; j := i; i := k
    let body = Stmt::Seq(vec![
        Stmt::Lookup { x: "k".into(), y: "i".into(), field: "next".into() },
        Stmt::Mutate { x: "i".into(), field: "next".into(), y: "j".into() },
        Stmt::AssignVar { x: "j".into(), y: "i".into() },
        Stmt::AssignVar { x: "i".into(), y: "k".into() },
    ]);
    let program = Stmt::Seq(vec![
        Stmt::AssignConst { x: "j".into(), c: Term::nil() },
        Stmt::While {
            cond: Formula::ne(Term::var("i"), Term::nil()),
            invariant: Some(invariant()),
            body: Box::new(body),
        },
    ]);
    Triple {
        sig: list_sig(),
        defs: list_defs(),
        pre: list_of("i"),
        program,
        post: list_of("j"),
        vars: vec![
            ("i".into(), Sort::Fg),
            ("j".into(), Sort::Fg),
            ("k".into(), Sort::Fg),
        ],
    }
}

#[test]
fn reversal_obligations_cover_the_loop() {
    let obs = vc_gen(&reversal_triple()).unwrap();
    let points: Vec<&str> = obs.iter().map(|o| o.provenance.as_str()).collect();
    assert!(points.iter().any(|p| p.contains("initiation")));
    assert!(points.iter().any(|p| p.contains("preservation")));
    assert!(points.iter().any(|p| p.contains("exit")));
}

#[test]
fn reversal_verifies_at_small_bounds() {
    let triple = reversal_triple();
    let (results, overall) = verify(&triple, &Bounds::new(3)).unwrap();
    for (ob, v) in &results {
        assert!(v.is_valid(), "{}: {v:?}", ob.provenance);
    }
    assert!(overall.is_valid());
}

#[test]
fn reversal_operational_check_agrees() {
    let triple = reversal_triple();
    let verdict = check_triple(&triple, &Bounds::new(3).with_fuel(16)).unwrap();
    assert!(verdict.is_valid(), "{verdict:?}");
}

#[test]
#[ignore = "full acceptance bounds; run explicitly"]
fn reversal_verifies_at_full_bounds() {
    let triple = reversal_triple();
    let (_, overall) = verify(&triple, &Bounds::new(5).with_fuel(32)).unwrap();
    assert!(overall.is_valid());
}
