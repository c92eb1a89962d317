use super::*;
use crate::kernel::{ExprKind, Range, TypeRef};
use crate::parser::{self, pretty};

const VOC: &str = r#"
vocabulary V {
  type Patient
  type Time := {1..3}
  type Device := {laptop, oven}
  type Temp := Int[0..1000]
  hasFever, coughs, sneezes, highRisk : Patient -> Bool
  riskFactor : Concept[Patient->Bool] -> Bool
  severity : Patient -> Int
  test : Patient -> Bool
  p, q : () -> Bool
  f : () -> Int
  g : Patient -> Int
  temp : Time ** Device -> Temp
  sensor : Concept[Time**Device->Temp] -> Bool
  threshold : Patient -> Int
  thresholdEU : () -> Int
  mapping : Concept[Patient->Int] -> Concept[()->Int]
  counter : Time -> Time
}
"#;

fn voc() -> Vocabulary {
    parser::parse(VOC).unwrap().vocabularies().next().unwrap().clone()
}

fn sentence(src: &str) -> Expr {
    parser::parse_expr(&voc(), src, &[]).unwrap_or_else(|d| panic!("{src}: {d:?}"))
}

fn codes(src: &str) -> Vec<&'static str> {
    check_sentence(&voc(), &sentence(src)).diagnostics.iter().filter(|d| d.is_error()).map(|d| d.code).collect()
}

fn accepts(src: &str) {
    let r = check_sentence(&voc(), &sentence(src));
    assert!(r.ok, "{src}: {:?}", r.diagnostics);
}

#[test]
fn guarded_forms_are_accepted() {
    accepts("!x in Concept[Patient->Bool]: !pt in Patient: $(x)(pt)");
    accepts("!x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}");
    accepts("?x in Concept: if x::[()->Bool] then $(x)() else false");
    accepts("!x in Patient: test(x) <=> 3 =< severity(x)");
    accepts("!s in sensor: !t in Time: !d in Device: $(s)(t, d) =< 350");
    accepts("!o in Concept[Patient->Int]: !c in Patient: $(o)(c) =< $(mapping(o))()");
    accepts("`p = `q | arity(`hasFever) = 1 & input(`hasFever, 1) = Patient");
}

#[test]
fn ill_formed_value_applications() {
    // x bound to a domain element
    assert_eq!(codes("?x in Patient: $(x)()"), ["UnguardedValueApp"]);
    // a concept of a predicate used where an integer is expected
    assert_eq!(codes("?x in Concept[()->Bool]: f() = $(x)()"), ["TypeMismatch"]);
    // a unary concept applied to no arguments
    assert_eq!(codes("?x in Concept[Patient->Int]: 0 = $(x)()"), ["ArityMismatch"]);
    // an unrefined concept variable
    assert_eq!(codes("?x in Concept: $(x)()"), ["UnguardedValueApp"]);
}

#[test]
fn arity_of_binary_concept() {
    assert_eq!(codes("!s in Concept[Time**Device->Temp]: !t in Time: $(s)(t) =< 350"), ["ArityMismatch"]);
}

#[test]
fn else_branch_keeps_outer_kind() {
    assert_eq!(codes("?x in Concept: if x::[()->Bool] then p() else $(x)()"), ["UnguardedValueApp"]);
}

#[test]
fn type_errors() {
    assert_eq!(codes("!x in Patient: x = laptop"), ["TypeMismatch"]);
    assert_eq!(codes("!x in Patient: hasFever(x, x)"), ["ArityMismatch"]);
    assert_eq!(codes("`p = 3"), ["TypeMismatch"]);
    assert_eq!(codes("!x in Patient: x + 1 = 2"), ["TypeMismatch"]);
    assert_eq!(codes("p() & f()"), ["TypeMismatch"]);
    assert_eq!(codes("!x in Int: f() = x"), ["UnboundedInt"]);
    // out-of-range argument for a bounded parameter
    assert_eq!(codes("!t in Time: counter(t + 1) = t"), ["TypeMismatch"]);
    assert_eq!(codes("!t in Time: counter(t) = t"), Vec::<&str>::new());
    assert_eq!(codes("riskFactor(`g)"), ["TypeMismatch"]);
    assert_eq!(codes("?x in Concept: riskFactor(x)"), ["TypeMismatch"]);
    assert_eq!(codes("?x in Concept: input(x, 1) = Patient"), ["UnguardedValueApp"]);
    assert_eq!(codes("input(`p, 1) = Patient"), ["IndexOutOfRange"]);
}

#[test]
fn free_variables() {
    let e = parser::parse_expr(&voc(), "hasFever(z)", &["z"]).unwrap();
    let r = check_sentence(&voc(), &e);
    assert_eq!(r.diagnostics[0].code, "FreeVariableInSentence");
    let mut gamma = TypingContext::new();
    assert_eq!(check_term(&voc(), &gamma, &e).unwrap_err()[0].code, "UnboundVariable");
    gamma.push("z", Ty::Named(voc().type_id("Patient").unwrap()));
    assert_eq!(check_term(&voc(), &gamma, &e), Ok(Ty::Bool));
}

#[test]
fn shadowing_warns() {
    let r = check_sentence(&voc(), &sentence("!x in Patient: ?x in Patient: test(x)"));
    assert!(r.ok);
    assert_eq!(r.diagnostics[0].code, "ShadowedVariable");
}

#[test]
fn context_shadowing() {
    let mut g = TypingContext::new();
    g.push("x", Ty::Bool);
    g.push("x", Ty::Concept);
    assert_eq!(g.lookup("x"), Some(&Ty::Concept));
    g.pop();
    assert_eq!(g.lookup("x"), Some(&Ty::Bool));
    assert_eq!(g.lookup("y"), None);
}

fn desugared(src: &str) -> String {
    pretty::expr(&desugar_guards(&voc(), &sentence(src)).unwrap())
}

#[test]
fn desugar_existential_subtype() {
    assert_eq!(desugared("?x in Concept[()->Bool]: $(x)()"), "?x in Concept: if x::[()->Bool] then $(x)() else false");
    assert_eq!(
        desugared("!x in Concept[()->Bool]: $(x)()"),
        "!x in Concept: if x::[()->Bool] then $(x)() else true"
    );
}

#[test]
fn desugar_predicate_ranges() {
    assert_eq!(
        desugared("!x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}"),
        "!x in Patient: severity(x) = #{rf in Concept: if rf::[Patient->Bool] then riskFactor(rf) & $(rf)(x) else false}"
    );
    assert_eq!(
        desugared("!s in sensor: s = `temp"),
        "!s in Concept: if s::[Time**Device->Temp] then sensor(s) => s = `temp else true"
    );
}

#[test]
fn desugar_lifts_composite_value_apps() {
    assert_eq!(
        desugared("!o in Concept[Patient->Int]: !c in Patient: $(o)(c) =< $(mapping(o))()"),
        "!o in Concept: if o::[Patient->Int] then !c in Patient: ?y in Concept: if y::[()->Int] then y = mapping(o) & $(o)(c) =< $(y)() else false else true"
    );
    // the fresh name avoids clashes
    let s = desugared("?y in Patient: $(mapping(`g))() = g(y)");
    assert!(s.contains("?y1 in Concept: if y1::[()->Int] then y1 = mapping(`g) & $(y1)() = g(y)"), "{s}");
}

#[test]
fn desugar_is_identity_without_concepts() {
    for src in ["!x in Patient: test(x) <=> 3 =< severity(x)", "p() | ~q()", "?t in Time: counter(t) = 2"] {
        assert_eq!(desugar_guards(&voc(), &sentence(src)).unwrap(), sentence(src));
    }
}

#[test]
fn desugar_is_idempotent_and_leaves_no_subtype_ranges() {
    let srcs = [
        "!x in Patient: severity(x) = #{rf in riskFactor: $(rf)(x)}",
        "!o in Concept[Patient->Int]: !c in Patient: $(o)(c) =< $(mapping(o))()",
        "sum(lambda s in Concept[()->Int]: $(s)()) > 0",
    ];
    for src in srcs {
        let once = desugar_guards(&voc(), &sentence(src)).unwrap();
        assert_eq!(desugar_guards(&voc(), &once).unwrap(), once);
        fn walk(e: &Expr) {
            let ranges: Vec<&Range> = match &e.kind {
                ExprKind::Quant(_, b, _) | ExprKind::Sum(b, _) => vec![&b.range],
                ExprKind::Count(bs, _) => bs.iter().map(|b| &b.range).collect(),
                _ => vec![],
            };
            for r in ranges {
                assert!(!matches!(r, Range::Type(TypeRef::Subtype(_))));
            }
            if let ExprKind::ValueApp(f, _) = &e.kind {
                assert!(matches!(f.kind, ExprKind::Var(_)));
            }
            e.children().into_iter().for_each(walk);
        }
        walk(&once);
    }
}

fn with_big_stack(f: impl FnOnce() + Send + 'static) {
    std::thread::Builder::new().stack_size(256 << 20).spawn(f).unwrap().join().unwrap();
}

#[test]
fn steps_are_linear_in_conjuncts() {
    with_big_stack(conjunct_sweep);
}

fn conjunct_sweep() {
    let v = voc();
    let mut ratios = Vec::new();
    for n in [10, 100, 1000] {
        let src = vec!["p()"; n].join(" & ");
        let e = parser::parse_expr(&v, &src, &[]).unwrap();
        let (nodes, steps) = count_judgment_steps(&v, &e);
        assert_eq!(nodes, 2 * n - 1);
        ratios.push(steps as f64 / nodes as f64);
    }
    assert!(ratios.iter().all(|&r| (1.0..=3.0).contains(&r)), "{ratios:?}");
}

#[test]
fn steps_are_linear_in_quantifier_depth() {
    let v = voc();
    let mut prev = None;
    for d in 1..=50 {
        let src = format!("{}test(x)", "!x in Patient: ".repeat(d));
        let (nodes, steps) = count_judgment_steps(&v, &parser::parse_expr(&v, &src, &[]).unwrap());
        assert!(steps <= 3 * nodes);
        // constant increment for each extra quantifier
        if let Some((ps, pd)) = prev {
            assert_eq!(steps - ps, 2, "depth {pd} -> {d}");
        }
        prev = Some((steps, d));
    }
    let atom = parser::parse_expr(&v, "p()", &[]).unwrap();
    assert_eq!(count_judgment_steps(&v, &atom), (1, 1));
}

#[test]
fn theory_checks_definitions() {
    let src = format!(
        "{VOC} theory T : V {{ {{ !x in Patient: severity(x) = #{{rf in riskFactor: $(rf)(x)}} <- true. }}\n {{ !x in Patient: test(x) = 1 <- true. }} }}"
    );
    let file = parser::parse(&src).unwrap();
    let t = file.theories().next().unwrap();
    let d = check_theory(file.vocabularies().next().unwrap(), t);
    let codes: Vec<_> = d.iter().map(|d| d.code).collect();
    assert_eq!(codes, ["TypeMismatch"]);
}
