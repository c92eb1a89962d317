use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::kernel::{Definition, SymbolId};
use crate::parser::{self, SourceFile};
use crate::structures::{load_structure, Table};

fn file(src: &str) -> SourceFile {
    parser::parse(src).unwrap_or_else(|d| panic!("{d:?}"))
}

fn sentence(s: &Structure, src: &str) -> Expr {
    parser::parse_expr(s.vocabulary(), src, &[]).unwrap_or_else(|d| panic!("{src}: {d:?}"))
}

fn holds(s: &Structure, src: &str) -> bool {
    eval_sentence(s, &sentence(s, src)).unwrap_or_else(|e| panic!("{src}: {e}"))
}

fn term(s: &Structure, src: &str) -> Value {
    eval(s, &mut VarAssignment::new(), &sentence(s, src))
}

/// Fills every uninterpreted symbol with random outputs.
fn randomize(s: &Structure, rng: &mut impl Rng) -> Structure {
    let mut out = s.clone();
    for sym in s.uninterpreted().collect::<Vec<SymbolId>>() {
        let dom = s.domain(s.vocabulary().symbol(sym).sig.out).unwrap().to_vec();
        let values = (0..s.universe().shape(sym).len).map(|_| dom[rng.gen_range(0..dom.len())]).collect();
        out.set_table(sym, Table { values }).unwrap();
    }
    out
}

const SYMPTOMS: &str = r#"
vocabulary V {
  type Patient
  type Score := Int[0..4]
  hasFever, coughs, sneezes, highRisk : Patient -> Bool
  riskFactor : Concept[Patient->Bool] -> Bool
  severity : Patient -> Score
  test : Patient -> Bool
}
structure S : V {
  Patient := {bob, ann}.
  hasFever := {bob}. coughs := {bob}. sneezes := {bob}. highRisk := {}.
  riskFactor := {`hasFever, `coughs, `sneezes, `highRisk}.
  severity := {bob -> 3} else 0.
  test := {bob}.
}
"#;

fn symptoms() -> Structure {
    load_structure(&file(SYMPTOMS), None).unwrap()
}

#[test]
fn concepts_are_counted_not_extensions() {
    let s = symptoms();
    assert_eq!(term(&s, "#{x in riskFactor: $(x)(bob)}"), Some(Elem::Int(3)));
    // the set-based reading would see a single extension {bob}
    assert!(holds(&s, "2 =< #{x in riskFactor: $(x)(bob)}"));
    assert_eq!(term(&s, "#{x in riskFactor: $(x)(ann)}"), Some(Elem::Int(0)));
    assert!(holds(&s, "!x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}"));
    assert!(holds(&s, "!x in Patient: test(x) <=> 3 =< severity(x)"));
}

#[test]
fn value_of_intension_equals_symbol() {
    let base = symptoms();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut s = base.clone();
    for sym in ["hasFever", "coughs", "test"] {
        s.clear_table(s.vocabulary().symbol_id(sym).unwrap());
    }
    for _ in 0..20 {
        let m = randomize(&s, &mut rng);
        for sym in ["hasFever", "coughs", "sneezes", "highRisk", "test", "severity"] {
            for p in ["bob", "ann"] {
                assert_eq!(term(&m, &format!("$(`{sym})({p})")), term(&m, &format!("{sym}({p})")));
            }
        }
    }
}

#[test]
fn guards_select_branches() {
    let s = symptoms();
    let bob = s.domain(s.vocabulary().type_id("Patient").unwrap()).unwrap()[0];
    let e = sentence(&s, "if x::[Patient->Bool] then $(x)(bob) else false");
    let mut env = VarAssignment::new();
    env.push("x", bob);
    assert_eq!(eval(&s, &mut env, &e), Some(Elem::Bool(false)));
    env.pop();
    env.push("x", Elem::Concept(s.vocabulary().symbol_id("coughs").unwrap()));
    assert_eq!(eval(&s, &mut env, &e), Some(Elem::Bool(true)));
    // a concept of the wrong signature also takes the else branch
    env.pop();
    env.push("x", Elem::Concept(s.vocabulary().symbol_id("severity").unwrap()));
    assert_eq!(eval(&s, &mut env, &e), Some(Elem::Bool(false)));
}

#[test]
fn strictness_and_undefinedness() {
    let s = symptoms();
    let bob = s.domain(s.vocabulary().type_id("Patient").unwrap()).unwrap()[0];
    let mut env = VarAssignment::new();
    env.push("x", bob);
    // $(x)() on a domain element is undefined, and so is any strict context
    for src in ["$(x)()", "true | $(x)()", "$(x)() & false", "~$(x)()", "?y in Patient: $(x)()"] {
        let e = parser::parse_expr(s.vocabulary(), src, &["x"]).unwrap();
        assert_eq!(eval(&s, &mut env, &e), None, "{src}");
    }
    // guards are the only non-strict construct
    let e = parser::parse_expr(s.vocabulary(), "if x::[()->Bool] then $(x)() else true", &["x"]).unwrap();
    assert_eq!(eval(&s, &mut env, &e), Some(Elem::Bool(true)));
    let unchecked = parser::parse_expr(s.vocabulary(), "?x in Patient: $(x)()", &[]).unwrap();
    assert_eq!(eval_sentence(&s, &unchecked), Err(EvalError::UndefinedResult));
    // arity mismatch
    assert_eq!(term(&s, "$(`hasFever)()"), None);
    // introspection
    assert_eq!(term(&s, "arity(`riskFactor)"), Some(Elem::Int(1)));
    assert!(holds(&s, "input(`severity, 1) = Patient & output(`severity) = Score"));
    assert_eq!(term(&s, "input(`severity, 2)"), None);
}

#[test]
fn count_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = load_structure(&file("vocabulary { type T := {1..5}\n p: T -> Bool\n q: T ** T -> Bool } structure { }"), None).unwrap();
    for _ in 0..50 {
        let s = randomize(&base, &mut rng);
        let Some(Elem::Int(n)) = term(&s, "#{x in T: p(x)}") else { panic!() };
        assert!((0..=5).contains(&n));
        let Some(Elem::Int(m)) = term(&s, "#{x in T, y in T: q(x, y)}") else { panic!() };
        assert!((0..=25).contains(&m));
        // predicate ranges count members only
        let Some(Elem::Int(k)) = term(&s, "#{x in p: true}") else { panic!() };
        assert_eq!(k, n);
        assert_eq!(term(&s, "sum(lambda x in p: x)"), term(&s, "sum(lambda x in T: x * #{y in T: y = x & p(x)})"));
    }
}

const INTL: &str = r#"
vocabulary V {
  type Country := {be, nl}
  threshold : Country -> Int
  thresholdEU : () -> Int
  obligation : Concept[Country->Int] -> Bool
  mapping : Concept[Country->Int] -> Concept[()->Int]
}
structure S : V {
  threshold := {be -> 500000, nl -> 500000}.
  thresholdEU := 1000000.
  obligation := {`threshold}.
  mapping := {`threshold -> `thresholdEU}.
}
"#;

#[test]
fn international_law() {
    let ok = load_structure(&file(INTL), None).unwrap();
    let axiom = "!o in obligation: !c in Country: $(o)(c) =< $(mapping(o))()";
    assert!(holds(&ok, axiom));
    let bad = load_structure(&file(&INTL.replace("be -> 500000", "be -> 1200000")), None).unwrap();
    assert!(!holds(&bad, axiom));
}

const TRANSCLOS: &str = r#"
vocabulary V {
  type Node := {1..N}
  graph1, graph2 : Node ** Node -> Bool
  TransClos : Concept[Node**Node->Bool] ** Node ** Node -> Bool
}
theory T : V {
  { !r in Concept[Node**Node->Bool]: !x, y in Node: TransClos(r, x, y) <- $(r)(x, y).
    !r in Concept[Node**Node->Bool]: !x, y in Node: TransClos(r, x, y) <- ?z in Node: TransClos(r, x, z) & TransClos(r, z, y). }
}
structure S : V { graph1 := {(1, 2), (2, 3)}. graph2 := {}. }
"#;

fn floyd_warshall(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                r[i][j] |= r[i][k] && r[k][j];
            }
        }
    }
    r
}

fn closure_of(s: &Structure, defs: &[Definition], graph: &str, n: usize) -> Vec<Vec<bool>> {
    let full = with_definitions(s, defs).unwrap();
    let v = full.vocabulary();
    let tc = v.symbol_id("TransClos").unwrap();
    let g = Elem::Concept(v.symbol_id(graph).unwrap());
    (1..=n as i64)
        .map(|i| (1..=n as i64).map(|j| full.value(tc, &[g, Elem::Int(i), Elem::Int(j)]) == Some(Elem::Bool(true))).collect())
        .collect()
}

#[test]
fn transitive_closure_example() {
    let f = file(&TRANSCLOS.replace("{1..N}", "{1..3}"));
    let s = load_structure(&f, None).unwrap();
    let defs = &f.theories().next().unwrap().definitions;
    let got = closure_of(&s, defs, "graph1", 3);
    assert_eq!(got, floyd_warshall(3, &[(0, 1), (1, 2)]));
    let tuples: Vec<(usize, usize)> =
        (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).filter(|&(i, j)| got[i][j]).collect();
    assert_eq!(tuples, [(0, 1), (0, 2), (1, 2)]);
    assert!(closure_of(&s, defs, "graph2", 3).iter().flatten().all(|&b| !b));
}

#[test]
fn least_fixpoint_is_minimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 4;
    let f = file(&TRANSCLOS.replace("{1..N}", &format!("{{1..{n}}}")));
    let defs = &f.theories().next().unwrap().definitions;
    let base = load_structure(&f, None).unwrap();
    let mut open = base.clone();
    for g in ["graph1", "graph2"] {
        open.clear_table(open.vocabulary().symbol_id(g).unwrap());
    }
    let tc = base.vocabulary().symbol_id("TransClos").unwrap();
    let rules_hold = |m: &Structure| {
        defs[0].rules.iter().all(|r| {
            let mut e = r.body.clone();
            // ∀ binders: body => head
            let head = Expr::app("TransClos", r.args.iter().map(|a| Expr::var(a)).collect());
            e = Expr::binary(crate::kernel::BinOp::Implies, e, head);
            for b in r.binders.iter().rev() {
                e = Expr::synth(ExprKind::Quant(crate::kernel::QuantKind::Forall, b.clone(), Box::new(e)));
            }
            eval_sentence(m, &e).unwrap()
        })
    };
    for _ in 0..10 {
        let g = randomize(&open, &mut rng);
        let full = with_definitions(&g, defs).unwrap();
        assert!(rules_hold(&full));
        let values = full.table(tc).unwrap().values.clone();
        for (i, v) in values.iter().enumerate() {
            if *v == Elem::Bool(true) {
                let mut smaller = full.clone();
                let mut vs = values.clone();
                vs[i] = Elem::Bool(false);
                smaller.set_table(tc, Table { values: vs }).unwrap();
                assert!(!rules_hold(&smaller), "atom {i} is not needed");
            }
        }
    }
}

#[test]
fn function_definition_matches_aggregate() {
    let src = SYMPTOMS.replace(
        "structure S : V {",
        "theory T : V { { !x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)} <- true. } }\nstructure S : V {",
    );
    let f = file(&src);
    let defs = &f.theories().next().unwrap().definitions;
    let mut base = load_structure(&f, None).unwrap();
    for sym in ["hasFever", "coughs", "sneezes", "highRisk", "severity", "test"] {
        base.clear_table(base.vocabulary().symbol_id(sym).unwrap());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sev = base.vocabulary().symbol_id("severity").unwrap();
    for _ in 0..20 {
        let mut s = randomize(&base, &mut rng);
        s.clear_table(sev);
        let full = with_definitions(&s, defs).unwrap();
        for p in ["bob", "ann"] {
            let direct = term(&full, &format!("#{{rf in riskFactor: $(rf)({p})}}"));
            assert_eq!(term(&full, &format!("severity({p})")), direct);
        }
    }
}

#[test]
fn definition_errors() {
    let voc = "vocabulary { type T := {a, b}\n p, q : T -> Bool\n f : T -> T }";
    let run = |body: &str| {
        let f = file(&format!("{voc} theory {{ {body} }} structure {{ }}"));
        let s = load_structure(&f, None).unwrap();
        let defs = f.theories().next().unwrap().definitions.clone();
        with_definitions(&s, &defs).map(|_| ()).unwrap_err().code()
    };
    assert_eq!(run("{ !x in T: p(x) <- ~p(x). }"), "NonStratified");
    assert_eq!(run("{ !x in T: p(x) <- q(x). } { !x in T: q(x) <- ~p(x). }"), "NonStratified");
    assert_eq!(run("{ !x in T: f(x) = x <- true. !x in T: f(x) = a <- true. }"), "MultipleValues");
    assert_eq!(run("{ !x in T: f(x) = x <- x = a. }"), "NoValue");
    // stratified negation is fine
    let f = file(&format!("{voc} theory {{ {{ !x in T: p(x) <- x = a. }} {{ !x in T: q(x) <- ~p(x). }} }} structure {{ }}"));
    let s = load_structure(&f, None).unwrap();
    let full = with_definitions(&s, &f.theories().next().unwrap().definitions).unwrap();
    assert!(holds(&full, "q(b) & ~q(a) & p(a)"));
    let strata = dependency_strata(s.vocabulary(), &f.theories().next().unwrap().definitions).unwrap();
    assert_eq!(strata, vec![vec![0], vec![1]]);
}

#[test]
fn structures_share_vocabulary() {
    let s = symptoms();
    let t = s.clone();
    assert!(Arc::ptr_eq(s.vocabulary_arc(), t.vocabulary_arc()));
}
