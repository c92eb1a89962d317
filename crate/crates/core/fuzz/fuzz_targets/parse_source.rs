#![no_main]
use libfuzzer_sys::fuzz_target;

// Deeply nested input recurses; keep cases small enough for the default stack.
const MAX_LEN: usize = 4096;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_LEN {
        return;
    }
    if let Ok(src) = std::str::from_utf8(data) {
        let (file, diags) = foc::parser::parse_with_recovery("fuzz", src);
        for d in &diags {
            assert!(d.span.offset <= src.len(), "span past the end: {d:?}");
        }
        if diags.iter().all(|d| !d.is_error()) {
            for t in file.theories() {
                if let Some(voc) = file.vocabulary(&t.vocabulary) {
                    let _ = foc::typecheck::check_theory(voc, t);
                }
            }
        }
    }
});
