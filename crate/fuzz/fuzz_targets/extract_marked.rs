#![no_main]

use a11y_mend::llm::{extract_marked, LlmResponse, MarkerProtocol};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let m = MarkerProtocol::default();
    if let Some(inner) = extract_marked(text, &m.code_start, &m.code_end) {
        assert!(text.contains(&inner));
    }
    let r = LlmResponse::parse(text, &m);
    assert!(r.confidence.map_or(true, |c| c <= 100));
});
