//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use foc::kernel::Theory;
use foc::parser::{self, SourceFile};
use foc::solver::check_model;
use foc::structures::{extend_structure, load_structure, Elem, Structure, Table};

pub const CORPUS: &[&str] = &["symptoms", "intl_law", "disambiguation", "transclos", "setgame", "temperatures"];

pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(format!("{name}.foc"))
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).unwrap()
}

pub fn parse(src: &str) -> SourceFile {
    parser::parse(src).unwrap_or_else(|d| panic!("{d:?}"))
}

/// First theory and first structure of a source text.
pub fn setup(src: &str) -> (Theory, Structure) {
    let f = parse(src);
    let t = f.theories().next().expect("a theory").clone();
    let s = load_structure(&f, None).unwrap_or_else(|d| panic!("{d:?}"));
    (t, s)
}

/// Runs the command line in-process: (status, stdout, stderr).
pub fn cli(args: &[&str]) -> (i32, String, String) {
    let mut argv = vec!["foc"];
    argv.extend_from_slice(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = foc::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

/// Every model of `theory` over `partial`, found by enumerating all values of
/// the open non-defined symbols and keeping those the model check accepts.
/// Outputs without a finite domain range over `window`.
pub fn brute_force(theory: &Theory, partial: &Structure, window: (i64, i64)) -> Vec<Structure> {
    let own: Vec<_> = theory.assignments.iter().collect();
    let base = extend_structure(partial, &own).unwrap();
    let voc = base.vocabulary();
    let defined: Vec<&str> = theory.definitions.iter().map(|d| d.symbol()).collect();
    // one slot per tuple of every open, non-defined symbol
    let mut slots = Vec::new();
    for sym in base.uninterpreted() {
        let decl = voc.symbol(sym);
        if defined.contains(&decl.name.as_str()) {
            continue;
        }
        let dom: Vec<Elem> = match base.domain(decl.sig.out) {
            Ok(d) => d.to_vec(),
            Err(_) => (window.0..=window.1).map(Elem::Int).collect(),
        };
        for i in 0..base.universe().shape(sym).len {
            slots.push((sym, i, dom.clone()));
        }
    }
    let mut digits = vec![0usize; slots.len()];
    let mut models = Vec::new();
    loop {
        let mut s = base.clone();
        let mut tables: Vec<(foc::kernel::SymbolId, Vec<Elem>)> = Vec::new();
        for ((sym, _, dom), &d) in slots.iter().zip(&digits) {
            match tables.iter_mut().find(|(t, _)| t == sym) {
                Some((_, v)) => v.push(dom[d]),
                None => tables.push((*sym, vec![dom[d]])),
            }
        }
        for (sym, values) in tables {
            s.set_table(sym, Table { values }).unwrap();
        }
        if !theory.definitions.is_empty() {
            for d in &theory.definitions {
                let sym = voc.symbol_id(d.symbol()).unwrap();
                if !s.is_interpreted(sym) {
                    s.set_table(sym, Table { values: vec![Elem::Bool(false); s.universe().shape(sym).len] }).ok();
                }
            }
            // a failed fixpoint leaves the placeholder, which the check rejects
            if let Ok(full) = foc::evaluator::with_definitions(&s, &theory.definitions) {
                s = full;
            }
        }
        if check_model(theory, &s).unwrap().ok() {
            models.push(s);
        }
        // odometer, last slot fastest
        let mut k = slots.len();
        loop {
            if k == 0 {
                return models;
            }
            k -= 1;
            digits[k] += 1;
            if digits[k] < slots[k].2.len() {
                break;
            }
            digits[k] = 0;
        }
    }
}

/// Every table of a structure, for comparing model sets regardless of order.
pub fn key(s: &Structure) -> String {
    let voc = s.vocabulary();
    voc.symbol_ids().map(|sym| format!("{}={:?}", voc.symbol(sym).name, s.table(sym))).collect::<Vec<_>>().join(";")
}

pub fn model_keys(models: &[Structure]) -> Vec<String> {
    let mut keys: Vec<String> = models.iter().map(key).collect();
    keys.sort();
    keys
}
