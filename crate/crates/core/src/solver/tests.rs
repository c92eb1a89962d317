use super::*;
use crate::parser::{self, SourceFile};
use crate::structures::load_structure;

fn file(src: &str) -> SourceFile {
    parser::parse(src).unwrap_or_else(|d| panic!("{d:?}"))
}

fn setup(src: &str) -> (Theory, Structure) {
    let f = file(src);
    let t = f.theories().next().expect("a theory").clone();
    let s = load_structure(&f, None).unwrap_or_else(|d| panic!("{d:?}"));
    (t, s)
}

/// Every expansion accepted by the evaluator-backed model check, in expansion order.
fn brute_force(t: &Theory, partial: &Structure) -> Vec<Structure> {
    let own: Vec<_> = t.assignments.iter().collect();
    let base = extend_structure(partial, &own).unwrap();
    base.expansions(1 << 16).unwrap().filter(|s| check_model(t, s).unwrap().ok()).collect()
}

fn all_models(t: &Theory, s: &Structure) -> SolveResult {
    model_expand(t, s, &SolveConfig::all()).unwrap()
}

#[test]
fn false_axiom_is_unsat() {
    let (t, s) = setup("vocabulary V { p : () -> Bool } theory T : V { false. } structure S : V { }");
    let r = all_models(&t, &s);
    assert_eq!(r.status, Status::Unsat);
    assert!(r.models.is_empty());
}

#[test]
fn unconstrained_cells_enumerate_every_expansion() {
    let (t, s) = setup("vocabulary V { type T := {a, b} p : T -> Bool } theory T : V { } structure S : V { }");
    let r = all_models(&t, &s);
    assert_eq!(r.status, Status::Sat);
    let expected: Vec<Structure> = s.expansions(16).unwrap().collect();
    assert_eq!(r.models, expected);
}

const CASES: &[&str] = &[
    "!x in T: f(x) =< g(x) + 1.",
    "?x in T: p(x) & f(x) = 2.",
    "#{x in T: p(x)} = f(a).",
    "sum(lambda x in p: f(x)) >= 2.",
    "!x in p: ?y in T: f(x) = g(y) & x ~= y.",
    "!c in Concept[T->Bool]: $(c)(a) => $(c)(b).",
    "$(pick())(a) = 1 & ~p(a).",
    "!x in T: p(x) <=> f(x) > 1.",
    "#{x, y in T: f(x) < f(y)} =< 1. p(b).",
];

#[test]
fn models_equal_brute_force_in_order() {
    for case in CASES {
        let src = format!(
            "vocabulary V {{
               type T := {{a, b}}
               type V := {{0..2}}
               f, g : T -> V
               p : T -> Bool
               pick : () -> Concept[T->V]
             }}
             theory Th : V {{ {case} }}
             structure S : V {{ g := {{a -> 1, b -> 2}}. }}"
        );
        let (t, s) = setup(&src);
        let r = all_models(&t, &s);
        let expected = brute_force(&t, &s);
        assert_eq!(r.models, expected, "{case}");
        assert_eq!(r.status, if expected.is_empty() { Status::Unsat } else { Status::Sat });
        for m in &r.models {
            assert!(check_model(&t, m).unwrap().ok());
        }
        // same answer without simplification
        let g = grounder::ground(&t, &s).unwrap();
        assert_eq!(solve(&g, &t, &SolveConfig::all()).unwrap().models, expected, "{case}");
    }
}

const CLOSURE: &str = r#"
vocabulary V {
  type Node := {1..3}
  edge : Node ** Node -> Bool
  reach : Node ** Node -> Bool
}
theory T : V {
  { !x, y in Node: reach(x, y) <- edge(x, y).
    !x, y in Node: reach(x, y) <- ?z in Node: reach(x, z) & reach(z, y). }
  reach(1, 3). ~edge(1, 3).
  !x in Node: ~edge(x, x).
}
structure S : V { }
"#;

#[test]
fn defined_symbols_are_computed_per_candidate() {
    let (t, s) = setup(CLOSURE);
    let r = all_models(&t, &s);
    // enumerate edges only, with the fixpoint filled in afterwards
    let reach = s.vocabulary().symbol_id("reach").unwrap();
    let mut edges_only = s.clone();
    edges_only.set_table(reach, crate::structures::Table { values: vec![Elem::Bool(false); 9] }).unwrap();
    let mut expected: Vec<Structure> = edges_only
        .expansions(1 << 9)
        .unwrap()
        .map(|e| crate::evaluator::with_definitions(&e, &t.definitions).unwrap())
        .filter(|m| check_model(&t, m).unwrap().ok())
        .collect();
    let mut got = r.models.clone();
    let edge = s.vocabulary().symbol_id("edge").unwrap();
    let key = |m: &Structure| format!("{:?}", m.table(edge));
    expected.sort_by_key(key);
    got.sort_by_key(key);
    assert_eq!(got, expected);
    // edges among 3 nodes without loops or 1->3, with 1 reaching 3 through 2
    assert_eq!(r.models.len(), 8);
}

#[test]
fn unbounded_cells_follow_their_equations() {
    let (t, s) = setup(
        "vocabulary V {
           type Patient
           hasFever, coughs, sneezes, highRisk, test : Patient -> Bool
           riskFactor : Concept[Patient->Bool] -> Bool
           severity : Patient -> Int
         }
         theory T : V {
           riskFactor := {`hasFever, `coughs, `sneezes, `highRisk}.
           !x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}.
           !x in Patient: test(x) <=> 3 =< severity(x).
         }
         structure S : V { Patient := {bob}. }",
    );
    let r = all_models(&t, &s);
    assert_eq!(r.models.len(), 16);
    let voc = s.vocabulary();
    let bob = s.universe().open_element("bob").unwrap();
    for m in &r.models {
        let n = ["hasFever", "coughs", "sneezes", "highRisk"]
            .iter()
            .filter(|p| m.value(voc.symbol_id(p).unwrap(), &[bob]) == Some(Elem::Bool(true)))
            .count() as i64;
        assert_eq!(m.value(voc.symbol_id("severity").unwrap(), &[bob]), Some(Elem::Int(n)));
        assert_eq!(m.value(voc.symbol_id("test").unwrap(), &[bob]), Some(Elem::Bool(n >= 3)));
    }
}

#[test]
fn check_model_names_the_failing_axiom() {
    let (t, s) = setup(
        "vocabulary V {
           type Patient
           type Score := Int[0..4]
           hasFever, coughs, sneezes, highRisk, test : Patient -> Bool
           riskFactor : Concept[Patient->Bool] -> Bool
           severity : Patient -> Score
         }
         theory T : V {
           riskFactor := {`hasFever, `coughs, `sneezes, `highRisk}.
           !x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}.
           !x in Patient: test(x) <=> 3 =< severity(x).
         }
         structure S : V {
           Patient := {bob}. hasFever := {bob}. coughs := {bob}. sneezes := {bob}. highRisk := {}.
           severity := {bob -> 3}. test := {}.
         }",
    );
    let report = check_model(&t, &s).unwrap();
    assert!(!report.ok());
    assert_eq!(report.failing(), [1]);
    assert_eq!(report.axioms[1].text, "!x in Patient: test(x) <=> 3 =< severity(x)");
    let mut partial = s.clone();
    partial.clear_table(s.vocabulary().symbol_id("test").unwrap());
    assert_eq!(check_model(&t, &partial).unwrap_err().code(), "NotTotal");
}

#[test]
fn limits_and_determinism() {
    let (t, s) = setup("vocabulary V { type T := {1..6} p : T -> Bool } theory T : V { #{x in T: p(x)} = 3. } structure S : V { }");
    let r = all_models(&t, &s);
    assert_eq!(r.models.len(), 20);
    let again = all_models(&t, &s);
    assert_eq!(r.stats.decisions, again.stats.decisions);
    assert_eq!(r.stats.propagations, again.stats.propagations);

    let two = model_expand(&t, &s, &SolveConfig { max_models: 2, ..Default::default() }).unwrap();
    assert_eq!(two.status, Status::Sat);
    assert_eq!(two.models[..], r.models[..2]);

    let capped = model_expand(&t, &s, &SolveConfig { max_models: 0, expansion_cap: 20, ..Default::default() });
    assert_eq!(capped.unwrap().status, Status::Capped);

    let cfg = SolveConfig { max_models: 0, time_limit: Some(Duration::ZERO), ..Default::default() };
    assert_eq!(model_expand(&t, &s, &cfg).unwrap().status, Status::Timeout);
}

#[test]
fn non_stratified_definitions_are_rejected() {
    let (t, s) = setup(
        "vocabulary V { p, q : () -> Bool }
         theory T : V { { p() <- ~q(). } { q() <- ~p(). } }
         structure S : V { }",
    );
    assert_eq!(model_expand(&t, &s, &SolveConfig::all()).unwrap_err().code(), "NonStratified");
}
