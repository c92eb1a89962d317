#![no_main]
use libfuzzer_sys::fuzz_target;

use foc::parser::pretty;
use foc::structures::{load_structure, save_structure};

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(file) = foc::parser::parse(src) else { return };
    for decl in file.structures() {
        let Ok(s) = load_structure(&file, Some(&decl.name)) else { continue };
        // the saved form loads back to the same structure
        let saved = format!("{}\n{}", pretty::vocabulary(s.vocabulary()), save_structure(&s));
        let again = foc::parser::parse(&saved).expect("saved structure parses");
        let t = load_structure(&again, Some(&s.name)).expect("saved structure loads");
        assert_eq!(save_structure(&t), save_structure(&s));
        let _ = foc::structures::structure_to_json(&s);
    }
});
