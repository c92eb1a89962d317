use std::collections::HashSet;

use proptest::prelude::*;

use super::*;
use crate::parser;

fn load(src: &str) -> Result<Structure, Vec<crate::kernel::Diagnostic>> {
    load_structure(&parser::parse(src).expect("parses"), None)
}

const SYMPTOMS: &str = r#"
vocabulary V {
  type Patient
  hasFever, coughs, sneezes, highRisk : Patient -> Bool
  riskFactor : Concept[Patient->Bool] -> Bool
  severity : Patient -> Int
  test : Patient -> Bool
}
structure S : V {
  Patient := {bob}.
  hasFever := {bob}.
}
"#;

#[test]
fn card_domain() {
    let s = load("vocabulary { type Card := {1..12}\n sel: Card -> Bool } structure { sel := <unknown>. }").unwrap();
    let card = s.vocabulary().type_id("Card").unwrap();
    let dom: Vec<_> = s.domain(card).unwrap().to_vec();
    assert_eq!(dom, (1..=12).map(Elem::Int).collect::<Vec<_>>());
}

#[test]
fn symptoms_domains() {
    let s = load(SYMPTOMS).unwrap();
    let v = s.vocabulary();
    let patient = v.type_id("Patient").unwrap();
    assert_eq!(s.domain(patient).unwrap().len(), 1);
    assert_eq!(s.show(s.domain(patient).unwrap()[0]), "bob");
    assert_eq!(s.domain(TypeId::CONCEPT).unwrap().len(), 7);
    assert_eq!(s.domain(TypeId::BOOL).unwrap(), [Elem::Bool(false), Elem::Bool(true)]);
    let sub = v.subtype_of(&crate::kernel::Signature::new(vec![patient], TypeId::BOOL)).unwrap();
    let names: Vec<_> = s.domain(sub).unwrap().iter().map(|&e| s.show(e)).collect();
    assert_eq!(names, ["`hasFever", "`coughs", "`sneezes", "`highRisk", "`test"]);
    assert!(matches!(s.domain(TypeId::INT), Err(StructError::UnboundedInt(_))));
}

#[test]
fn missing_open_domain() {
    let err = load("vocabulary { type P\n p: P -> Bool } structure { }").unwrap_err();
    assert_eq!(err[0].code, "MissingDomain");
}

#[test]
fn total_structure_has_itself_as_only_expansion() {
    let s = load("vocabulary { type T := {a, b}\n p: T -> Bool } structure { p := {a}. }").unwrap();
    assert!(s.is_total());
    let all: Vec<_> = s.expansions(DEFAULT_EXPANSION_CAP).unwrap().collect();
    assert_eq!(all, vec![s]);
}

#[test]
fn predicate_expansions_in_lexicographic_order() {
    let s = load("vocabulary { type T := {a, b}\n p: T -> Bool } structure { }").unwrap();
    let p = s.vocabulary().symbol_id("p").unwrap();
    let seen: Vec<Vec<Elem>> = s.expansions(100).unwrap().map(|m| m.table(p).unwrap().values.clone()).collect();
    let (f, t) = (Elem::Bool(false), Elem::Bool(true));
    assert_eq!(seen, vec![vec![f, f], vec![f, t], vec![t, f], vec![t, t]]);
}

#[test]
fn concept_valued_expansions() {
    let src = r#"
vocabulary { type Word := {childWord}
  type Person := {ann, ben}
  biologicalChildOf, legalChildOf : Person ** Person -> Bool
  childConcept : () -> Concept[Person**Person->Bool] }
structure { biologicalChildOf := {}. legalChildOf := {(ann, ben)}. }
"#;
    let s = load(src).unwrap();
    let c = s.vocabulary().symbol_id("childConcept").unwrap();
    let vals: Vec<_> = s.expansions(10).unwrap().map(|m| m.show(m.value(c, &[]).unwrap())).collect();
    assert_eq!(vals, ["`biologicalChildOf", "`legalChildOf"]);
}

#[test]
fn expansion_cap() {
    let s = load("vocabulary { type T := {1..30}\n p: T -> Bool } structure { }").unwrap();
    assert_eq!(s.expansion_count(), Ok(1 << 30));
    assert!(matches!(s.expansions(DEFAULT_EXPANSION_CAP), Err(StructError::CombinatorialLimit { .. })));
}

#[test]
fn tables_and_defaults() {
    let src = r#"
vocabulary { type Time := {1..3}
  type Device := {laptop, oven, lightbulb}
  type Temp := Int[0..1000]
  maxTemp : Device -> Temp
  on : Time ** Device -> Bool
  limit : () -> Temp }
structure { maxTemp := {laptop -> 100, oven -> 350} else 150. on := {(1, oven), (3, laptop)}. limit := 20. }
"#;
    let s = load(src).unwrap();
    let v = s.vocabulary();
    let dev = |n: &str| Elem::Named { ty: v.type_id("Device").unwrap(), idx: v.constructor(n).unwrap().1 as u32 };
    let m = v.symbol_id("maxTemp").unwrap();
    assert_eq!(s.value(m, &[dev("lightbulb")]), Some(Elem::Int(150)));
    assert_eq!(s.value(m, &[dev("oven")]), Some(Elem::Int(350)));
    let on = v.symbol_id("on").unwrap();
    assert_eq!(s.value(on, &[Elem::Int(3), dev("laptop")]), Some(Elem::Bool(true)));
    assert_eq!(s.value(on, &[Elem::Int(2), dev("laptop")]), Some(Elem::Bool(false)));
    assert_eq!(s.value(on, &[Elem::Int(4), dev("laptop")]), None);
    let on_idx = s.tuple_index(on, &[Elem::Int(2), dev("oven")]).unwrap();
    assert_eq!(on_idx, 4);
    assert_eq!(s.tuple_at(on, on_idx), vec![Elem::Int(2), dev("oven")]);
}

#[test]
fn table_errors() {
    let voc = "vocabulary { type T := {a, b}\n f: T -> T\n p: T -> Bool }";
    let code = |body: &str| load(&format!("{voc} structure {{ {body} }}")).unwrap_err()[0].code;
    assert_eq!(code("f := {a -> b}."), "TotalityError");
    assert_eq!(code("f := {a -> b, a -> a} else a."), "ConflictError");
    assert_eq!(code("p := {c}."), "TypeMismatch");
    assert_eq!(code("q := {a}."), "UnknownSymbol");
    assert_eq!(code("p := {a}. p := {b}."), "ConflictError");
    assert_eq!(code("f := {a -> 3} else a."), "TypeMismatch");
    assert!(load(&format!("{voc} structure {{ p := {{a}}. p := {{a}}. }}")).is_ok());
}

#[test]
fn save_load_round_trip() {
    let src = r#"
vocabulary V { type P
  type Temp := Int[0..1000]
  r : P ** P -> Bool
  score : P -> Temp
  pick : () -> Concept[P**P->Bool]
  flag : () -> Bool
  free : P -> Bool }
structure S : V { P := {bob, ann, cy}. r := {(bob, ann), (cy, cy)}. score := {ann -> 7} else 3. pick := `r. flag := true. free := <unknown>. }
"#;
    let s = load(src).unwrap();
    let text = save_structure(&s);
    assert_eq!(
        text,
        "structure S : V {\n    P := {bob, ann, cy}.\n    r := {(bob, ann), (cy, cy)}.\n    score := {ann -> 7} else 3.\n    pick := `r.\n    flag := true.\n    free := <unknown>.\n}\n"
    );
    let file = parser::parse(&format!("{}\n{}", crate::parser::pretty::vocabulary(s.vocabulary()), text)).unwrap();
    let again = load_structure(&file, Some("S")).unwrap();
    assert_eq!(again, s);
    assert_eq!(save_structure(&again), text);
    let json = structure_to_json(&s);
    assert_eq!(json["symbols"]["r"][0], serde_json::json!(["bob", "ann"]));
    assert_eq!(json["symbols"]["free"], serde_json::Value::Null);
    assert_eq!(json["symbols"]["pick"][0], serde_json::json!(["`r"]));
}

proptest! {
    #[test]
    fn expansion_count_matches_product(n_t in 1usize..4, n_u in 1usize..3, fixed in any::<bool>()) {
        let t = (0..n_t).map(|i| format!("t{i}")).collect::<Vec<_>>().join(", ");
        let u = (0..n_u).map(|i| format!("u{i}")).collect::<Vec<_>>().join(", ");
        let fixed_p = if fixed { "p := {}." } else { "" };
        let src = format!("vocabulary {{ type T := {{{t}}}\n type U := {{{u}}}\n p: T -> Bool\n f: T -> U\n c: () -> T }} structure {{ {fixed_p} }}");
        let s = load(&src).unwrap();
        let p_count = if fixed { 1 } else { 1u128 << n_t };
        let expected = p_count * (n_u as u128).pow(n_t as u32) * n_t as u128;
        prop_assert_eq!(s.expansion_count().unwrap(), expected);
        let all: Vec<_> = s.expansions(DEFAULT_EXPANSION_CAP).unwrap().collect();
        prop_assert_eq!(all.len() as u128, expected);
        let distinct: HashSet<String> = all.iter().map(save_structure).collect();
        prop_assert_eq!(distinct.len(), all.len());
        prop_assert!(all.iter().all(Structure::is_total));
        // deterministic order
        let again: Vec<_> = s.expansions(DEFAULT_EXPANSION_CAP).unwrap().collect();
        prop_assert_eq!(again, all);
    }
}
