//! The properties the fuzz targets assert, run over their checked-in seeds.

use std::path::PathBuf;

use foc::parser::{parse, parse_with_recovery, pretty};
use foc::structures::{load_structure, save_structure};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| {
            let p = e.unwrap().path();
            (p.display().to_string(), std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty());
    out
}

#[test]
fn parse_source_seeds() {
    for (name, src) in seeds("parse_source") {
        let (_, diags) = parse_with_recovery(&name, &src);
        assert!(diags.iter().all(|d| d.span.offset <= src.len()), "{name}");
    }
}

#[test]
fn roundtrip_seeds() {
    for (name, src) in seeds("roundtrip") {
        let first = parse(&src).unwrap_or_else(|d| panic!("{name}: {d:?}"));
        let printed = pretty::source_file(&first);
        let second = parse(&printed).unwrap_or_else(|d| panic!("{name}:\n{printed}\n{d:?}"));
        assert_eq!(first.blocks, second.blocks, "{name}");
        assert_eq!(printed, pretty::source_file(&second), "{name}");
    }
}

#[test]
fn load_structure_seeds() {
    let mut loaded = 0;
    for (name, src) in seeds("load_structure") {
        let file = parse(&src).unwrap();
        for decl in file.structures() {
            let s = load_structure(&file, Some(&decl.name)).unwrap_or_else(|d| panic!("{name}: {d:?}"));
            let saved = format!("{}\n{}", pretty::vocabulary(s.vocabulary()), save_structure(&s));
            let again = parse(&saved).unwrap_or_else(|d| panic!("{saved}\n{d:?}"));
            let t = load_structure(&again, Some(&s.name)).unwrap();
            assert_eq!(save_structure(&t), save_structure(&s), "{name}");
            loaded += 1;
        }
    }
    assert!(loaded >= 6);
}
