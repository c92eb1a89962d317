#![no_main]
use libfuzzer_sys::fuzz_target;

use foc::parser::{parse, pretty};

fuzz_target!(|data: &[u8]| {
    if data.len() > 4096 {
        return;
    }
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(first) = parse(src) else { return };
    let printed = pretty::source_file(&first);
    let second = parse(&printed).unwrap_or_else(|d| panic!("printed form does not parse:\n{printed}\n{d:?}"));
    assert_eq!(first.blocks, second.blocks);
    assert_eq!(printed, pretty::source_file(&second));
});
